"""Curriculum keep/replace schedule and similarity-weighted negative sampling.

The keep probability decays as mu / (mu + exp(t / mu)), strictly monotone
decreasing in t, starting at mu / (mu + 1).  When a draw replaces the ground
truth, the replacement is sampled by inverse CDF from the normalized
similarity row, which never assigns mass to the ground-truth index, and the
action loss is gated off for that sample while the response loss stays on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import TodkitError
from .matrix import SimilarityMatrix, sampling_row

TIME_UNITS = ("epoch", "step", "fraction")


@dataclass(frozen=True)
class Schedule:
    """Decay schedule; ``time_unit`` documents how callers measure t."""

    mu: float
    time_unit: str = "epoch"

    def __post_init__(self):
        if not self.mu > 0:
            raise TodkitError(f"mu must be positive, got {self.mu}")
        if self.time_unit not in TIME_UNITS:
            raise TodkitError(f"time_unit must be one of {TIME_UNITS}, got {self.time_unit!r}")


def keep_probability(schedule: Schedule, t: float) -> float:
    """mu / (mu + exp(t / mu)); raises on negative t."""
    if t < 0:
        raise ValueError(f"schedule time must be nonnegative, got {t}")
    mu = schedule.mu
    x = t / mu
    if x > 700.0:  # exp would overflow; use the asymptotic form
        return mu * math.exp(-x)
    return mu / (mu + math.exp(x))


@dataclass(frozen=True)
class SampleDecision:
    """Outcome of one scheduled-sampling draw."""

    gt_index: int
    out_index: int
    replaced: bool
    p: float
    optimize_action_loss: bool
    warning: str | None = None


def gate_losses(decision: SampleDecision) -> tuple[bool, bool]:
    """(action_loss_enabled, response_loss_enabled) for a decision.

    A replaced action disables the action loss; the response loss is always
    optimized.
    """
    return (not decision.replaced, True)


def _replacement_tables(matrix: SimilarityMatrix, gt_index: int):
    """Candidate indices and their cumulative distribution, gt excluded."""
    row = sampling_row(matrix, gt_index)
    candidates = np.flatnonzero(np.arange(matrix.size) != gt_index)
    cum = np.cumsum(row[candidates])
    cum[-1] = 1.0  # guard the inverse CDF against float round-off
    return candidates, cum


def decide_at_p(matrix: SimilarityMatrix, p: float, gt_index: int,
                rng: np.random.Generator) -> SampleDecision:
    """One draw at an explicit keep probability.

    Consumes one uniform for the keep decision and, only when replacing, a
    second uniform for the inverse-CDF categorical draw.
    """
    if matrix.size == 1:
        return SampleDecision(
            gt_index=gt_index, out_index=gt_index, replaced=False, p=p,
            optimize_action_loss=True,
            warning="single-action vocabulary: replacement impossible, kept ground truth",
        )
    u = rng.random()
    if u < p:
        return SampleDecision(
            gt_index=gt_index, out_index=gt_index, replaced=False, p=p,
            optimize_action_loss=True,
        )
    candidates, cum = _replacement_tables(matrix, gt_index)
    out = int(candidates[np.searchsorted(cum, rng.random(), side="right")])
    return SampleDecision(
        gt_index=gt_index, out_index=out, replaced=True, p=p,
        optimize_action_loss=False,
    )


def decide(matrix: SimilarityMatrix, schedule: Schedule, t: float, gt_index: int,
           rng: np.random.Generator) -> SampleDecision:
    return decide_at_p(matrix, keep_probability(schedule, t), gt_index, rng)


class NegativeSampler:
    """Stateful sampling stream: one rng, cached per-row candidate tables.

    Each stream owns its random state; distinct streams with distinct seeds
    can run in parallel against the same immutable matrix.
    """

    def __init__(self, matrix: SimilarityMatrix, schedule: Schedule, seed: int = 0):
        self.matrix = matrix
        self.schedule = schedule
        self.rng = np.random.default_rng(seed)
        self._tables: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def sample(self, gt_index: int, t: float, p_override: float | None = None) -> SampleDecision:
        p = keep_probability(self.schedule, t) if p_override is None else p_override
        if self.matrix.size == 1:
            return decide_at_p(self.matrix, p, gt_index, self.rng)
        if not 0 <= gt_index < self.matrix.size:
            raise IndexError(f"action index {gt_index} out of range")
        u = self.rng.random()
        if u < p:
            return SampleDecision(
                gt_index=gt_index, out_index=gt_index, replaced=False, p=p,
                optimize_action_loss=True,
            )
        tables = self._tables.get(gt_index)
        if tables is None:
            tables = _replacement_tables(self.matrix, gt_index)
            self._tables[gt_index] = tables
        candidates, cum = tables
        out = int(candidates[np.searchsorted(cum, self.rng.random(), side="right")])
        return SampleDecision(
            gt_index=gt_index, out_index=out, replaced=True, p=p,
            optimize_action_loss=False,
        )


# ---------------------------------------------------------------------------
# Line-oriented stream protocol for external training loops.
#
# Request:  {"turn_id": ..., "action": "<canonical string>", "t": <number>}
# Response: {"turn_id": ..., "action_out": ..., "replaced": ..., "p": ...,
#            "optimize_action_loss": ...}
# Unknown actions and malformed records produce {"turn_id": ..., "error": ...}.


def serve_stream(matrix: SimilarityMatrix, schedule: Schedule, seed: int,
                 in_stream: IO[str], out_stream: IO[str]) -> int:
    """Answer sampling requests line by line; returns the record count."""
    sampler = NegativeSampler(matrix, schedule, seed=seed)
    handled = 0
    for line in in_stream:
        line = line.strip()
        if not line:
            continue
        handled += 1
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            _emit(out_stream, {"turn_id": None, "error": f"bad request: {exc}"})
            continue
        if not isinstance(record, dict):
            _emit(out_stream, {"turn_id": None, "error": "bad request: not an object"})
            continue
        turn_id = record.get("turn_id")
        missing = [k for k in ("action", "t") if k not in record]
        if missing:
            _emit(out_stream, {"turn_id": turn_id, "error": f"missing fields: {missing}"})
            continue
        try:
            t = float(record["t"])
        except (TypeError, ValueError):
            _emit(out_stream, {"turn_id": turn_id, "error": f"bad t: {record['t']!r}"})
            continue
        try:
            gt_index = matrix.vocab.index_of(record["action"])
        except KeyError:
            _emit(out_stream, {"turn_id": turn_id, "error": f"unknown action: {record['action']}"})
            continue
        decision = sampler.sample(gt_index, t)
        response = {
            "turn_id": turn_id,
            "action_out": matrix.vocab[decision.out_index],
            "replaced": decision.replaced,
            "p": decision.p,
            "optimize_action_loss": decision.optimize_action_loss,
        }
        if decision.warning:
            response["warning"] = decision.warning
        _emit(out_stream, response)
    return handled


def _emit(stream: IO[str], record: dict) -> None:
    stream.write(json.dumps(record, ensure_ascii=False))
    stream.write("\n")
    stream.flush()

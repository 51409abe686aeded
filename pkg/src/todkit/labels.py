"""Turn-level auxiliary supervision targets and their loss functions.

Classes are (domain, slot) and (domain, act) pairs rather than bare names,
since bare names collide across domains.  All extractors are pure functions
of the annotations; the loss functions are plain numpy so any framework can
be checked against them.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

import numpy as np

from .model import ActionSeq, BeliefState, Ontology

logger = logging.getLogger(__name__)

# Slot-change categories.
KEEP, CHANGE, DELETE, NEW = 0, 1, 2, 3
CHANGE_NAMES = ("keep", "change", "delete", "new")

_PLACEHOLDER = re.compile(r"^\[value_[A-Za-z0-9_]+\]$")

_EPS = 1e-7


def slot_classes(ontology: Ontology) -> tuple[tuple[str, str], ...]:
    """(domain, slot) classes in ontology order."""
    return tuple((d, s) for d in ontology.domains for s in ontology.domain_slots(d))


def act_classes(ontology: Ontology) -> tuple[tuple[str, str], ...]:
    """(domain, act) classes in ontology order."""
    return tuple((d, a) for d in ontology.domains for a in ontology.acts)


def slot_type_labels(ontology: Ontology, belief: BeliefState) -> np.ndarray:
    """Multi-hot over (domain, slot): 1 where the belief holds a value."""
    classes = slot_classes(ontology)
    index = {c: i for i, c in enumerate(classes)}
    out = np.zeros(len(classes), dtype=np.int8)
    for domain, slot, _ in belief.items():
        out[index[(domain, slot)]] = 1
    return out


def slot_change_labels(ontology: Ontology, prev: BeliefState,
                       cur: BeliefState) -> tuple[np.ndarray, np.ndarray]:
    """Per-class transition category plus an active mask.

    keep: same value in both states; change: different values; delete: value
    only in ``prev``; new: value only in ``cur``.  The mask is true exactly on
    the union of occupied classes; categories are meaningful only there.
    """
    classes = slot_classes(ontology)
    index = {c: i for i, c in enumerate(classes)}
    categories = np.zeros(len(classes), dtype=np.int8)
    mask = np.zeros(len(classes), dtype=bool)
    prev_vals = {(d, s): v for d, s, v in prev.items()}
    cur_vals = {(d, s): v for d, s, v in cur.items()}
    for key in prev_vals.keys() | cur_vals.keys():
        i = index[key]
        mask[i] = True
        before, after = prev_vals.get(key), cur_vals.get(key)
        if before is None:
            categories[i] = NEW
        elif after is None:
            categories[i] = DELETE
        elif before == after:
            categories[i] = KEEP
        else:
            categories[i] = CHANGE
    return categories, mask


def action_type_labels(ontology: Ontology, action: ActionSeq) -> np.ndarray:
    """Multi-hot over (domain, act); repeated acts still contribute a single 1."""
    classes = act_classes(ontology)
    index = {c: i for i, c in enumerate(classes)}
    out = np.zeros(len(classes), dtype=np.int8)
    for domain, act, _ in action.items():
        out[index[(domain, act)]] = 1
    return out


def keyword_labels(response_delex: str, ontology: Ontology) -> np.ndarray:
    """Multi-hot over the keyword vocabulary, bag-of-words style.

    Placeholder tokens absent from the vocabulary are logged and ignored.
    """
    index = {kw: i for i, kw in enumerate(ontology.keyword_vocab)}
    out = np.zeros(len(index), dtype=np.int8)
    for token in response_delex.split():
        i = index.get(token)
        if i is not None:
            out[i] = 1
        elif _PLACEHOLDER.match(token):
            logger.warning("placeholder %s not in keyword vocabulary; ignored", token)
    return out


@dataclass(frozen=True)
class AuxLabelSet:
    """The four per-turn supervision targets."""

    slot_type: np.ndarray
    slot_change: np.ndarray
    slot_change_mask: np.ndarray
    action_type: np.ndarray
    keywords: np.ndarray


def extract_labels(ontology: Ontology, prev_belief: BeliefState, belief: BeliefState,
                   action: ActionSeq, response_delex: str) -> AuxLabelSet:
    """All four targets for one turn; turn 0 passes an empty previous belief."""
    categories, mask = slot_change_labels(ontology, prev_belief, belief)
    return AuxLabelSet(
        slot_type=slot_type_labels(ontology, belief),
        slot_change=categories,
        slot_change_mask=mask,
        action_type=action_type_labels(ontology, action),
        keywords=keyword_labels(response_delex, ontology),
    )


# ---------------------------------------------------------------------------
# Losses


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def bernoulli_multilabel_loss(scores: np.ndarray, labels: np.ndarray) -> float:
    """Summed binary cross-entropy of logistic(scores) against multi-hot labels.

    Probabilities are clamped inside (1e-7, 1 - 1e-7) for numerical safety.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape:
        raise ValueError(f"shape mismatch: scores {scores.shape} vs labels {labels.shape}")
    p = np.clip(_sigmoid(scores), _EPS, 1.0 - _EPS)
    return float(-np.sum(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def bernoulli_multilabel_grad(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d loss / d scores; zero where the probability clamp is active."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape:
        raise ValueError(f"shape mismatch: scores {scores.shape} vs labels {labels.shape}")
    p = _sigmoid(scores)
    grad = p - labels
    grad[(p < _EPS) | (p > 1.0 - _EPS)] = 0.0
    return grad


def categorical_change_loss(scores: np.ndarray, categories: np.ndarray,
                            mask: np.ndarray) -> float:
    """Summed negative log softmax probability of the true category.

    ``scores`` has one 4-way score vector per class; unmasked classes
    contribute nothing.
    """
    scores = np.asarray(scores, dtype=np.float64)
    categories = np.asarray(categories)
    mask = np.asarray(mask, dtype=bool)
    if scores.ndim != 2 or scores.shape[1] != len(CHANGE_NAMES):
        raise ValueError(f"scores must be (classes, 4), got {scores.shape}")
    if scores.shape[0] != categories.shape[0] or scores.shape[0] != mask.shape[0]:
        raise ValueError("scores, categories, and mask disagree on class count")
    if not mask.any():
        return 0.0
    s = scores[mask]
    y = categories[mask]
    log_z = np.log(np.sum(np.exp(s - s.max(axis=1, keepdims=True)), axis=1))
    log_p = s[np.arange(len(y)), y] - s.max(axis=1) - log_z
    return float(-np.sum(log_p))


def categorical_change_grad(scores: np.ndarray, categories: np.ndarray,
                            mask: np.ndarray) -> np.ndarray:
    """d loss / d scores: softmax minus one-hot on masked classes, else zero."""
    scores = np.asarray(scores, dtype=np.float64)
    categories = np.asarray(categories)
    mask = np.asarray(mask, dtype=bool)
    grad = np.zeros_like(scores)
    if not mask.any():
        return grad
    s = scores[mask]
    y = categories[mask]
    e = np.exp(s - s.max(axis=1, keepdims=True))
    soft = e / e.sum(axis=1, keepdims=True)
    soft[np.arange(len(y)), y] -= 1.0
    grad[mask] = soft
    return grad


def total_aux_loss(st: float, sc: float, a: float, k: float) -> float:
    """Unweighted sum of the four task losses."""
    return st + sc + a + k

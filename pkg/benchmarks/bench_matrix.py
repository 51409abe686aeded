"""Benchmark the similarity-matrix kernels: numba njit vs. pure Python/numpy.

Builds a synthetic action vocabulary and times the pairwise tree-distance
pass (the hot loop of ``todkit matrix build``) through both kernel variants
at several thread counts.  Run from the repository root:

    python benchmarks/bench_matrix.py --actions 1000 --threads 1 2 8
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from todkit import _ted
from todkit._accel import NUMBA_ENABLED
from todkit.codec import parse_action
from todkit.matrix import ActionVocab
from todkit.synth import SynthConfig, build_ontology
from todkit.tree import pack_trees, to_tree, tree_size


def make_vocab(ontology, n_actions: int, seed: int) -> ActionVocab:
    rng = random.Random(seed)
    seen: dict[str, None] = {}
    while len(seen) < n_actions:
        domain = rng.choice(list(ontology.domains))
        parts = [f"[{domain}]"]
        for _ in range(rng.randint(1, 2)):
            parts.append(f"[{rng.choice(list(ontology.acts))}]")
            parts.extend(rng.sample(sorted(ontology.entity_slots(domain)),
                                    rng.randint(0, 3)))
        seen.setdefault(" ".join(parts), None)
    return ActionVocab(actions=tuple(seen.keys()))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--actions", type=int, default=1000)
    parser.add_argument("--threads", type=int, nargs="+", default=[1, 2, 8])
    parser.add_argument("--seed", type=int, default=2)
    parser.add_argument("--skip-python", action="store_true",
                        help="time only the compiled kernel")
    args = parser.parse_args()

    ontology = build_ontology(SynthConfig(seed=0, n_domains=5, slots_per_domain=5))
    vocab = make_vocab(ontology, args.actions, args.seed)
    trees = [to_tree(parse_action(a, ontology)) for a in vocab.actions]
    mean_size = sum(tree_size(t) for t in trees) / len(trees)
    packed = pack_trees(trees)
    pair_args = (packed.node_start, packed.labels, packed.lml,
                 packed.kr_start, packed.keyroots)
    n_pairs = args.actions * (args.actions - 1) // 2
    print(f"{args.actions} actions, mean tree size {mean_size:.2f}, "
          f"{n_pairs} tree-distance pairs")
    print(f"numba enabled: {NUMBA_ENABLED} "
          f"(set TODKIT_NO_NUMBA=1 to force the fallback)\n")

    variants = {}
    if NUMBA_ENABLED:
        variants["numba njit"] = _ted.KERNEL_VARIANTS["compiled"]
    if not args.skip_python:
        variants["pure python"] = _ted.KERNEL_VARIANTS["python"]

    baselines: dict[str, np.ndarray] = {}
    for name, kernel in variants.items():
        # warm once so JIT compilation stays out of the timings
        warm = pack_trees(trees[:30])
        kernel(0, 30, warm.node_start, warm.labels, warm.lml,
               warm.kr_start, warm.keyroots,
               np.zeros((30, 30)), False)
        for threads in args.threads:
            started = time.perf_counter()
            out = _ted.pairwise_distances_packed(*pair_args, threads=threads,
                                                 kernel=kernel)
            elapsed = time.perf_counter() - started
            rate = n_pairs / elapsed / 1e6
            print(f"{name:>12}  threads={threads}  {elapsed:8.3f} s"
                  f"  ({rate:6.2f} M pairs/s)")
            baselines[name] = out
        print()

    if len(baselines) == 2:
        a, b = baselines.values()
        print("variant outputs identical:", np.array_equal(a, b))


if __name__ == "__main__":
    main()

"""Independent reference computations for ordered tree edit distance tests.

Two oracles, deliberately different from the keyroot dynamic program under
test:

* ``mapping_min_cost``: literal brute force.  Enumerates every valid node
  mapping (one-to-one, postorder-preserving, ancestor-preserving) and takes
  the cheapest induced edit script.  Exponential; fine for tiny trees.
* ``oracle_pairwise_packed``: full-table forest dynamic program over all
  postorder interval pairs (the defining recursion, no keyroot pruning),
  usable exhaustively on small-tree universes.

Both use unit costs, matching the library.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product

import numpy as np

from todkit._accel import maybe_njit
from todkit.tree import ActionTree, pack_trees


# ---------------------------------------------------------------------------
# Enumeration of all ordered labeled trees


@lru_cache(maxsize=None)
def _shapes(n: int) -> tuple:
    """All ordered rooted tree shapes with exactly n nodes (nested tuples)."""
    if n == 1:
        return ((),)
    out = []
    for forest in _forests(n - 1):
        out.append(forest)
    return tuple(out)


@lru_cache(maxsize=None)
def _forests(n: int) -> tuple:
    """All ordered forests (tuples of shapes) with exactly n nodes total."""
    if n == 0:
        return ((),)
    out = []
    for first_size in range(1, n + 1):
        for first in _shapes(first_size):
            for rest in _forests(n - first_size):
                out.append((first,) + rest)
    return tuple(out)


def _shape_size(shape) -> int:
    return 1 + sum(_shape_size(c) for c in shape)


def _label_shape(shape, labels, pos: int) -> tuple[ActionTree, int]:
    children = []
    for child in shape:
        node, pos = _label_shape(child, labels, pos)
        children.append(node)
    return ActionTree(label=labels[pos], children=tuple(children)), pos + 1


def enum_trees(max_nodes: int, alphabet: str) -> list[ActionTree]:
    """Every ordered labeled tree with 1..max_nodes nodes over the alphabet."""
    trees = []
    for n in range(1, max_nodes + 1):
        for shape in _shapes(n):
            for labels in product(alphabet, repeat=n):
                tree, _ = _label_shape(shape, labels, 0)
                trees.append(tree)
    return trees


# ---------------------------------------------------------------------------
# Brute force over valid mappings


def _postorder(tree: ActionTree):
    labels: list[str] = []
    lml: list[int] = []

    def walk(node: ActionTree) -> int:
        first = -1
        for child in node.children:
            f = walk(child)
            if first < 0:
                first = f
        index = len(labels)
        if first < 0:
            first = index
        labels.append(node.label)
        lml.append(first)
        return first

    walk(tree)
    return labels, lml


def mapping_min_cost(t1: ActionTree, t2: ActionTree) -> int:
    """Minimum edit cost over all valid mappings between the two trees.

    A mapping pairs postorder-ascending node subsets; validity additionally
    requires the ancestor relation to be preserved in both directions.  Cost
    is unmapped nodes on both sides plus label mismatches among pairs.
    """
    labels1, lml1 = _postorder(t1)
    labels2, lml2 = _postorder(t2)
    n1, n2 = len(labels1), len(labels2)
    best = n1 + n2
    for k in range(1, min(n1, n2) + 1):
        base = (n1 - k) + (n2 - k)
        if base >= best:
            continue  # every size-k mapping costs at least `base`
        for left in combinations(range(n1), k):
            for right in combinations(range(n2), k):
                valid = True
                for a in range(k):
                    for b in range(a + 1, k):
                        i1, i2 = left[a], left[b]
                        j1, j2 = right[a], right[b]
                        if (lml1[i2] <= i1) != (lml2[j2] <= j1):
                            valid = False
                            break
                    if not valid:
                        break
                if not valid:
                    continue
                cost = base + sum(
                    1 for a in range(k) if labels1[left[a]] != labels2[right[a]]
                )
                if cost < best:
                    best = cost
    return best


# ---------------------------------------------------------------------------
# Full-table interval dynamic program


def _oracle_rows_impl(row_start, row_end, node_start, labels, lml, out, full):
    """Forest distances over every postorder interval pair.

    ``dp[l1, e1, l2, e2]`` is the distance between half-open node intervals
    [l1, e1) and [l2, e2).  Width-ascending fill order satisfies every
    dependency of the delete/insert/match recursion.
    """
    n_trees = node_start.shape[0] - 1
    max_n = 0
    for i in range(n_trees):
        size = node_start[i + 1] - node_start[i]
        if size > max_n:
            max_n = size
    dp = np.empty((max_n + 1, max_n + 1, max_n + 1, max_n + 1), dtype=np.float64)
    for i in range(row_start, row_end):
        s1 = node_start[i]
        n1 = node_start[i + 1] - s1
        labels1 = labels[s1:s1 + n1]
        lml1 = lml[s1:s1 + n1]
        j0 = 0 if full else i + 1
        for j in range(j0, n_trees):
            s2 = node_start[j]
            n2 = node_start[j + 1] - s2
            labels2 = labels[s2:s2 + n2]
            lml2 = lml[s2:s2 + n2]
            for w1 in range(0, n1 + 1):
                for l1 in range(0, n1 - w1 + 1):
                    e1 = l1 + w1
                    for w2 in range(0, n2 + 1):
                        for l2 in range(0, n2 - w2 + 1):
                            e2 = l2 + w2
                            if w1 == 0:
                                dp[l1, e1, l2, e2] = w2
                            elif w2 == 0:
                                dp[l1, e1, l2, e2] = w1
                            else:
                                r1 = e1 - 1
                                r2 = e2 - 1
                                k1 = lml1[r1]
                                k2 = lml2[r2]
                                best = dp[l1, e1 - 1, l2, e2] + 1.0
                                cand = dp[l1, e1, l2, e2 - 1] + 1.0
                                if cand < best:
                                    best = cand
                                cost = 0.0 if labels1[r1] == labels2[r2] else 1.0
                                cand = dp[l1, k1, l2, k2] + dp[k1, r1, k2, r2] + cost
                                if cand < best:
                                    best = cand
                                dp[l1, e1, l2, e2] = best
            out[i, j] = dp[0, n1, 0, n2]


oracle_rows = maybe_njit(_oracle_rows_impl)


def oracle_pairwise_packed(node_start, labels, lml, threads: int = 1,
                           full: bool = False) -> np.ndarray:
    n_trees = node_start.shape[0] - 1
    out = np.zeros((n_trees, n_trees), dtype=np.float64)
    if threads <= 1:
        oracle_rows(0, n_trees, node_start, labels, lml, out, full)
        return out
    from concurrent.futures import ThreadPoolExecutor

    n_chunks = min(n_trees, threads * 8)
    bounds = np.linspace(0, n_trees, n_chunks + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(oracle_rows, int(bounds[k]), int(bounds[k + 1]),
                        node_start, labels, lml, out, full)
            for k in range(n_chunks)
            if bounds[k] < bounds[k + 1]
        ]
        for fut in futures:
            fut.result()
    return out


def oracle_distance(t1: ActionTree, t2: ActionTree) -> float:
    packed = pack_trees([t1, t2])
    out = np.zeros((2, 2), dtype=np.float64)
    _oracle_rows_impl(0, 1, packed.node_start, packed.labels, packed.lml, out, False)
    return float(out[0, 1])

"""Ordered tree edit distance kernels (keyroot dynamic program).

Trees are packed as flat postorder arrays so the kernels stay numba-friendly:
``labels`` holds interned label ids, ``lml`` the postorder index of each
node's leftmost leaf descendant (tree-local), and ``keyroots`` the ascending
keyroot indices.  ``node_start``/``kr_start`` delimit each tree's segment.

The row kernel is one self-contained function, compiled under numba
(``nogil=True`` so a thread pool can drive it concurrently) or run as plain
Python when the fallback is selected; see ``_accel``.  Both variants compute
bit-identical results.  Unit costs: insert = delete = relabel = 1.
"""

from __future__ import annotations

import numpy as np

from ._accel import maybe_njit


def _ted_rows_impl(row_start, row_end, node_start, labels, lml, kr_start, keyroots, out, full):
    """Fill ``out[i, j]`` with tree distances for rows ``row_start..row_end-1``.

    ``full`` selects all columns; otherwise only the strict upper triangle
    (j > i) is computed, which keeps a symmetric build at N(N-1)/2 distance
    computations.  The scratch tables are sized once for the largest tree;
    ``td`` needs no clearing between pairs because every cell read is written
    first while the current pair's keyroots are processed.
    """
    n_trees = node_start.shape[0] - 1
    max_n = 0
    for i in range(n_trees):
        size = node_start[i + 1] - node_start[i]
        if size > max_n:
            max_n = size
    fd = np.empty((max_n + 1, max_n + 1), dtype=np.float64)
    td = np.empty((max_n, max_n), dtype=np.float64)

    for i in range(row_start, row_end):
        s1 = node_start[i]
        n1 = node_start[i + 1] - s1
        labels1 = labels[s1:s1 + n1]
        lml1 = lml[s1:s1 + n1]
        krs1 = keyroots[kr_start[i]:kr_start[i + 1]]
        j0 = 0 if full else i + 1
        for j in range(j0, n_trees):
            s2 = node_start[j]
            n2 = node_start[j + 1] - s2
            labels2 = labels[s2:s2 + n2]
            lml2 = lml[s2:s2 + n2]
            krs2 = keyroots[kr_start[j]:kr_start[j + 1]]

            for a in range(krs1.shape[0]):
                k1 = krs1[a]
                for b in range(krs2.shape[0]):
                    k2 = krs2[b]
                    m = k1 - lml1[k1] + 2
                    n = k2 - lml2[k2] + 2
                    ioff = lml1[k1] - 1
                    joff = lml2[k2] - 1
                    fd[0, 0] = 0.0
                    for x in range(1, m):
                        fd[x, 0] = fd[x - 1, 0] + 1.0
                    for y in range(1, n):
                        fd[0, y] = fd[0, y - 1] + 1.0
                    for x in range(1, m):
                        xi = x + ioff
                        for y in range(1, n):
                            yj = y + joff
                            best = fd[x - 1, y] + 1.0
                            cand = fd[x, y - 1] + 1.0
                            if cand < best:
                                best = cand
                            if lml1[k1] == lml1[xi] and lml2[k2] == lml2[yj]:
                                cost = 0.0 if labels1[xi] == labels2[yj] else 1.0
                                cand = fd[x - 1, y - 1] + cost
                                if cand < best:
                                    best = cand
                                fd[x, y] = best
                                td[xi, yj] = best
                            else:
                                p = lml1[xi] - 1 - ioff
                                q = lml2[yj] - 1 - joff
                                cand = fd[p, q] + td[xi, yj]
                                if cand < best:
                                    best = cand
                                fd[x, y] = best
            out[i, j] = td[n1 - 1, n2 - 1]


ted_rows = maybe_njit(_ted_rows_impl)

# Both variants stay addressable for the kernel benchmark and fallback tests.
KERNEL_VARIANTS = {"python": _ted_rows_impl, "compiled": ted_rows}


def pairwise_distances_packed(node_start, labels, lml, kr_start, keyroots,
                              threads: int = 1, full: bool = False,
                              kernel=None) -> np.ndarray:
    """All pairwise tree distances for a packed forest.

    Returns an (N, N) float64 array.  With ``full=False`` only the strict
    upper triangle is populated (the rest stays zero).  Work is sharded over
    row chunks; entries are independent, so any thread count produces the
    same result.
    """
    if kernel is None:
        kernel = ted_rows
    n_trees = node_start.shape[0] - 1
    out = np.zeros((n_trees, n_trees), dtype=np.float64)
    if n_trees == 0:
        return out
    if threads <= 1:
        kernel(0, n_trees, node_start, labels, lml, kr_start, keyroots, out, full)
        return out

    from concurrent.futures import ThreadPoolExecutor

    n_chunks = min(n_trees, threads * 8)
    bounds = np.linspace(0, n_trees, n_chunks + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(kernel, int(bounds[k]), int(bounds[k + 1]),
                        node_start, labels, lml, kr_start, keyroots, out, full)
            for k in range(n_chunks)
            if bounds[k] < bounds[k + 1]
        ]
        for fut in futures:
            fut.result()
    return out

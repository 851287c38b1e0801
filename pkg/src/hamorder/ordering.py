"""Minimum-similarity path construction over a similarity matrix.

The target object is the sample ordering whose consecutive-pair similarity
sum is minimal: an open minimum-weight Hamiltonian path on the complete
similarity graph. Exact solvers (permutation enumeration, subset DP) cover
small instances; the multi-restart eta-greedy heuristic covers the rest.

Every random draw comes from a generator sub-seeded by (seed, restart), so
results are identical across runs and thread counts.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus_io import OrderFile, created_stamp
from .similarity import SimilarityMatrix

ENUM_AUTO_MAX = 8
ENUM_MAX = 12
DP_MAX = 18
EXACT_SUBSET_BUDGET = 10**6
DEFAULT_ETA = 3
DEFAULT_SEED = 42
_ENUM_CHUNK = 131072


def default_restarts(n: int) -> int:
    """Restart budget: half the node count, capped at 64, at least 1."""
    return max(1, min(n // 2, 64))


@dataclass(frozen=True)
class CuriosityOrder:
    """A sample ordering plus its cumulative similarity weight."""

    path: tuple[int, ...]
    weight: float
    eta: int | None = None
    restarts: int | None = None
    seed: int | None = None
    generator: str = ""
    weight_computed: bool = True

    @property
    def n(self) -> int:
        return len(self.path)

    def to_order_file(self, extra_metadata: dict | None = None) -> OrderFile:
        metadata = {
            "generator": self.generator,
            "eta": self.eta,
            "restarts": self.restarts,
            "seed": self.seed,
            "created": created_stamp(),
        }
        if not self.weight_computed:
            metadata["weight_unverified"] = True
        if extra_metadata:
            metadata.update(extra_metadata)
        return OrderFile(indices=self.path, weight=self.weight, metadata=metadata)


@dataclass(frozen=True)
class StagePartition:
    """Disjoint contiguous blocks of an ordering, covering all indices."""

    stages: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.stages)


def _check_path(path, n: int) -> np.ndarray:
    p = np.asarray(path, dtype=np.intp)
    if p.ndim != 1 or p.shape[0] != n:
        raise ValueError(f"path length {p.shape[0] if p.ndim == 1 else '?'} != matrix size {n}")
    if not np.array_equal(np.sort(p), np.arange(n)):
        raise ValueError("path is not a permutation of 0..n-1")
    return p


def path_weight(path, M: SimilarityMatrix, closed: bool = False) -> float:
    """Sum of similarities along consecutive path edges (n-1 edges for the
    open path; ``closed`` adds the edge back to the start)."""
    p = _check_path(path, M.n)
    if p.shape[0] == 1:
        return 0.0
    w = float(np.sum(M.values[p[:-1], p[1:]]))
    if closed:
        w += float(M.values[p[-1], p[0]])
    return w


def _enumerate_open(values: np.ndarray, n: int):
    """Scan every undirected open path once (orientation with first <= last);
    returns (best weight, lexicographically smallest best path)."""
    best_w = math.inf
    best_p = None
    perms = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(perms, _ENUM_CHUNK))
        if not chunk:
            break
        arr = np.array(chunk, dtype=np.intp)
        arr = arr[arr[:, 0] <= arr[:, -1]]
        if arr.shape[0] == 0:
            continue
        w = values[arr[:, :-1], arr[:, 1:]].sum(axis=1)
        lo = float(w.min())
        if lo < best_w:
            best_w = lo
            best_p = None
        if lo <= best_w:
            for row in arr[w == best_w]:
                t = tuple(int(x) for x in row)
                if best_p is None or t < best_p:
                    best_p = t
    return best_w, best_p


def _enumerate_closed(values: np.ndarray, n: int):
    """Scan every undirected cycle once: start fixed at 0, reflection handled
    by requiring second element <= last."""
    if n == 1:
        return float(values[0, 0]) * 0.0, (0,)
    best_w = math.inf
    best_p = None
    for rest in itertools.permutations(range(1, n)):
        if n > 2 and rest[0] > rest[-1]:
            continue
        p = (0,) + rest
        w = float(sum(values[p[k], p[k + 1]] for k in range(n - 1))) + float(
            values[p[-1], p[0]]
        )
        if w < best_w or (w == best_w and p < best_p):
            best_w = w
            best_p = p
    return best_w, best_p


def _held_karp_open(values: np.ndarray, n: int):
    """Subset DP over (visited set, last node); O(2^n * n^2)."""
    size = 1 << n
    dp = np.full((size, n), np.inf)
    parent = np.full((size, n), -1, dtype=np.int8)
    for i in range(n):
        dp[1 << i, i] = 0.0
    for mask in range(1, size):
        row = dp[mask]
        lasts = np.flatnonzero(np.isfinite(row))
        if lasts.size == 0:
            continue
        cand = row[lasts, None] + values[lasts, :]
        best = np.min(cand, axis=0)
        arg = lasts[np.argmin(cand, axis=0)]
        for j in range(n):
            if mask & (1 << j):
                continue
            t = mask | (1 << j)
            if best[j] < dp[t, j]:
                dp[t, j] = best[j]
                parent[t, j] = arg[j]
    full = size - 1
    end = int(np.argmin(dp[full]))
    path = [end]
    mask = full
    while parent[mask, path[-1]] >= 0:
        prev = int(parent[mask, path[-1]])
        mask ^= 1 << path[-1]
        path.append(prev)
    path.reverse()
    if path[0] > path[-1]:
        path.reverse()
    return tuple(path)


def _held_karp_closed(values: np.ndarray, n: int):
    """Cycle variant: start pinned at node 0."""
    if n == 1:
        return (0,)
    size = 1 << n
    dp = np.full((size, n), np.inf)
    parent = np.full((size, n), -1, dtype=np.int8)
    dp[1, 0] = 0.0
    for mask in range(1, size):
        if not mask & 1:
            continue
        row = dp[mask]
        lasts = np.flatnonzero(np.isfinite(row))
        if lasts.size == 0:
            continue
        cand = row[lasts, None] + values[lasts, :]
        best = np.min(cand, axis=0)
        arg = lasts[np.argmin(cand, axis=0)]
        for j in range(1, n):
            if mask & (1 << j):
                continue
            t = mask | (1 << j)
            if best[j] < dp[t, j]:
                dp[t, j] = best[j]
                parent[t, j] = arg[j]
    full = size - 1
    closing = dp[full] + values[:, 0]
    closing[0] = np.inf if n > 1 else closing[0]
    end = int(np.argmin(closing))
    path = [end]
    mask = full
    while path[-1] != 0:
        prev = int(parent[mask, path[-1]])
        mask ^= 1 << path[-1]
        path.append(prev)
    path.reverse()
    if n > 2 and path[1] > path[-1]:
        path = [path[0]] + path[:0:-1]
    return tuple(path)


def exact_min_path(
    M: SimilarityMatrix, method: str = "auto", closed: bool = False
) -> CuriosityOrder:
    """Globally minimum-weight Hamiltonian path (or cycle) by exhaustive
    search.

    ``enumerate`` scans all permutations (n <= 12) and breaks weight ties by
    the lexicographically smallest path whose first element is <= its last.
    ``dp`` runs the subset dynamic program (n <= 18); tie-breaking there
    follows smallest-index reconstruction, with the same orientation
    canonicalization. ``auto`` enumerates up to n=8 and switches to the DP
    above that.
    """
    n = M.n
    if method == "auto":
        method = "enumerate" if n <= ENUM_AUTO_MAX else "dp"
    if method == "enumerate":
        if n > ENUM_MAX:
            raise ValueError(
                f"n={n} exceeds enumeration limit {ENUM_MAX}; use method='dp' "
                f"or the eta_ghs heuristic"
            )
        if closed:
            _, path = _enumerate_closed(M.values, n)
        else:
            _, path = _enumerate_open(M.values, n)
    elif method == "dp":
        if n > DP_MAX:
            raise ValueError(
                f"n={n} exceeds the exact-solver limit {DP_MAX}; use the "
                f"eta_ghs heuristic"
            )
        if closed:
            path = _held_karp_closed(M.values, n)
        else:
            path = _held_karp_open(M.values, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    weight = path_weight(path, M, closed=closed)
    return CuriosityOrder(path=path, weight=weight, generator="exact")


def _ghs_restart(values: np.ndarray, n: int, eta: int, seed, r: int, start, closed):
    rng = np.random.default_rng((seed, r))
    s = int(start) if start is not None else int(rng.integers(n))
    path = np.empty(n, dtype=np.intp)
    path[0] = s
    visited = np.zeros(n, dtype=bool)
    visited[s] = True
    for step in range(1, n):
        sims = values[path[step - 1]]
        unvisited = np.flatnonzero(~visited)
        order = np.lexsort((unvisited, sims[unvisited]))
        k = min(eta, unvisited.size)
        pick = int(unvisited[order[int(rng.integers(k))]])
        path[step] = pick
        visited[pick] = True
    p = tuple(int(x) for x in path)
    w = float(np.sum(values[path[:-1], path[1:]])) if n > 1 else 0.0
    if closed and n > 1:
        w += float(values[path[-1], path[0]])
    return w, p


def eta_ghs(
    M: SimilarityMatrix,
    eta: int = DEFAULT_ETA,
    restarts: int | None = None,
    seed: int = DEFAULT_SEED,
    start: int | None = None,
    closed: bool = False,
    threads: int | None = None,
) -> CuriosityOrder:
    """Multi-restart eta-greedy path construction.

    Each restart begins at a node drawn from a generator sub-seeded by
    (seed, restart), then repeatedly extends the path with a uniform pick
    among the eta least-similar unvisited successors of the current endpoint
    (candidates ordered by (similarity, index)). The lowest-weight restart
    wins; exact weight ties keep the lower restart index, so the result is
    independent of how restarts are scheduled. ``start`` forces the start
    node of every restart (testing hook).
    """
    n = M.n
    if n < 1:
        raise ValueError("empty matrix")
    if eta < 1:
        raise ValueError(f"eta must be >= 1, got {eta}")
    if restarts is None:
        restarts = default_restarts(n)
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if start is not None and not 0 <= start < n:
        raise ValueError(f"start node {start} out of range")
    if threads is None:
        threads = int(os.environ.get("HAMORDER_THREADS", "1"))
    values = M.values
    if threads > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda r: _ghs_restart(values, n, eta, seed, r, start, closed),
                    range(restarts),
                )
            )
    else:
        results = [
            _ghs_restart(values, n, eta, seed, r, start, closed)
            for r in range(restarts)
        ]
    best_w, best_p = results[0]
    for w, p in results[1:]:
        if w < best_w:
            best_w, best_p = w, p
    return CuriosityOrder(
        path=best_p,
        weight=best_w,
        eta=eta,
        restarts=restarts,
        seed=seed,
        generator="eta-ghs",
    )


def _offdiag_sum(values: np.ndarray, idx) -> float:
    sub = values[np.ix_(idx, idx)]
    return float(sub.sum() - np.trace(sub))


def select_diverse_subset(M: SimilarityMatrix, m: int, mode: str = "auto") -> tuple[int, ...]:
    """Subset of m samples with (approximately) minimal pairwise similarity.

    Exact mode enumerates all C(n, m) subsets (budget 10^6) and breaks ties
    lexicographically. Greedy mode seeds with the endpoints of the globally
    smallest off-diagonal entry (m >= 2; for m = 1 the most isolated row)
    and then adds whichever index has the smallest total similarity to the
    current set.
    """
    n = M.n
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    if mode == "auto":
        mode = "exact" if math.comb(n, m) <= EXACT_SUBSET_BUDGET else "greedy"
    if mode == "exact":
        if math.comb(n, m) > EXACT_SUBSET_BUDGET:
            raise ValueError(
                f"C({n},{m}) exceeds the exact enumeration budget; use greedy mode"
            )
        best = None
        best_s = None
        for S in itertools.combinations(range(n), m):
            val = _offdiag_sum(M.values, S)
            if best is None or val < best:
                best, best_s = val, S
        return best_s
    if mode != "greedy":
        raise ValueError(f"unknown mode {mode!r}")
    values = M.values
    if m == 1:
        offdiag_rows = values.sum(axis=1) - np.diag(values)
        return (int(np.argmin(offdiag_rows)),)
    masked = values.copy()
    np.fill_diagonal(masked, np.inf)
    i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
    selected = [int(min(i, j)), int(max(i, j))]
    chosen = np.zeros(n, dtype=bool)
    chosen[selected] = True
    totals = values[selected[0]] + values[selected[1]]
    while len(selected) < m:
        scores = np.where(chosen, np.inf, totals)
        nxt = int(np.argmin(scores))
        selected.append(nxt)
        chosen[nxt] = True
        totals = totals + values[nxt]
    return tuple(sorted(selected))


def partition_stages(order: CuriosityOrder, k: int) -> StagePartition:
    """Cut the ordering into k contiguous blocks with sizes as equal as
    possible; earlier blocks take the remainder."""
    n = order.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    base, rem = divmod(n, k)
    stages = []
    pos = 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        stages.append(tuple(order.path[pos : pos + size]))
        pos += size
    return StagePartition(stages=tuple(stages))


def random_order(n: int, seed: int, M: SimilarityMatrix | None = None) -> CuriosityOrder:
    """Uniformly random permutation from a seeded generator; the weight is
    computed only when a similarity matrix is supplied."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    path = tuple(int(x) for x in rng.permutation(n))
    if M is not None:
        return CuriosityOrder(
            path=path, weight=path_weight(path, M), seed=seed, generator="random"
        )
    return CuriosityOrder(
        path=path, weight=0.0, seed=seed, generator="random", weight_computed=False
    )

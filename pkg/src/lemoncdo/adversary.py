"""Adversarial lemon placement and the error bounds it is measured against."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, islice
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cdo_model import TrancheSpec, ValueProfile, totals_from_counts
from .exceptions import GuardExceeded
from .expander import BipartiteGraph, NeighborCounts

DEFAULT_BUDGET = 10**7
# exact all-pairs L1 is used while the number of distinct tranche vectors stays below this
EXACT_L1_LIMIT = 4096

Placement = Tuple[int, ...]


@dataclass
class AttackResult:
    ell: int
    mode: str
    L_min: List[Placement]
    L_max: List[Placement]
    tv_min: np.ndarray
    tv_max: np.ndarray
    gap_per_tranche: np.ndarray
    gap_l1: float
    l1_pair: Tuple[Placement, Placement]
    eps_per_tranche: np.ndarray
    eps_l1: float
    placements_examined: int
    exhaustive_flag: bool
    l1_exact: bool
    baseline: np.ndarray
    baseline_gap_per_tranche: np.ndarray
    counts_min: List[Tuple[int, ...]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "mode": self.mode,
            "placements_examined": self.placements_examined,
            "exhaustive": self.exhaustive_flag,
            "l1_exact": self.l1_exact,
            "gap_per_tranche": [float(x) for x in self.gap_per_tranche],
            "gap_l1": float(self.gap_l1),
            "eps_per_tranche": [float(x) for x in self.eps_per_tranche],
            "eps_l1": float(self.eps_l1),
            "tv_min": [float(x) for x in self.tv_min],
            "tv_max": [float(x) for x in self.tv_max],
            "random_baseline": [float(x) for x in self.baseline],
            "baseline_gap_per_tranche": [float(x) for x in self.baseline_gap_per_tranche],
            "L_min": [list(p) for p in self.L_min],
            "L_max": [list(p) for p in self.L_max],
            "l1_pair": [list(p) for p in self.l1_pair],
            "counts_min": [list(c) for c in self.counts_min],
        }


def _histograms(A: np.ndarray, placements: np.ndarray, r: int) -> np.ndarray:
    hits = A[placements].sum(axis=1) if placements.shape[1] else np.zeros(
        (placements.shape[0], A.shape[1]), dtype=A.dtype)
    t = np.zeros((placements.shape[0], r + 1), dtype=np.int64)
    for i in range(r + 1):
        t[:, i] = (hits == i).sum(axis=1)
    return t


class _Tracker:
    """Order-independent reduction of per-tranche extremes over placements."""

    def __init__(self, s: int, r: int):
        self.lo = np.full(s, np.inf)
        self.hi = np.full(s, -np.inf)
        self.lo_at: List[Optional[Placement]] = [None] * s
        self.hi_at: List[Optional[Placement]] = [None] * s
        self.lo_t: List[Optional[Tuple[int, ...]]] = [None] * s
        self.total = np.zeros(s)
        self.count = 0
        self.profiles: Dict[Tuple[int, ...], Tuple[np.ndarray, Placement]] = {}
        self.r = r

    def update(self, placements: Sequence[Placement], t: np.ndarray, tv: np.ndarray):
        self.count += len(placements)
        self.total += tv.sum(axis=0)
        for i in range(tv.shape[1]):
            col = tv[:, i]
            j = int(np.argmin(col))
            cand = (col[j], placements[j])
            if self.lo_at[i] is None or cand[0] < self.lo[i] or (
                    cand[0] == self.lo[i] and cand[1] < self.lo_at[i]):
                self.lo[i], self.lo_at[i] = cand[0], cand[1]
                self.lo_t[i] = tuple(int(x) for x in t[j])
            j = int(np.argmax(col))
            cand = (col[j], placements[j])
            if self.hi_at[i] is None or cand[0] > self.hi[i] or (
                    cand[0] == self.hi[i] and cand[1] < self.hi_at[i]):
                self.hi[i], self.hi_at[i] = cand[0], cand[1]
        if len(self.profiles) <= EXACT_L1_LIMIT:
            for row, vec, p in zip(map(tuple, t), tv, placements):
                old = self.profiles.get(row)
                if old is None or p < old[1]:
                    self.profiles[row] = (vec, p)


def _farthest_pair(P: List[Placement], V: np.ndarray):
    D = np.abs(V[:, None, :] - V[None, :, :]).sum(axis=2)
    best, pair = -1.0, ((), ())
    for a in range(len(P)):
        b = int(np.argmax(D[a]))
        if D[a, b] > best:
            best, pair = float(D[a, b]), tuple(sorted((P[a], P[b])))
    return best, pair


def _l1_search(tracker: _Tracker, vectors: Dict[Placement, np.ndarray]):
    """Largest L1 distance over candidate pairs; exact when the profile set is small."""
    if len(tracker.profiles) <= EXACT_L1_LIMIT:
        keys = sorted(tracker.profiles, key=lambda k: tracker.profiles[k][1])
        V = np.asarray([tracker.profiles[k][0] for k in keys])
        best, pair = _farthest_pair([tracker.profiles[k][1] for k in keys], V)
        return best, pair, True
    P = sorted(vectors)
    best, pair = _farthest_pair(P, np.asarray([vectors[p] for p in P]))
    return best, pair, False


def _finish(G, profile, T, ell, mode, tracker, extra_vectors, exhaustive, rng, pairs):
    s = T.s
    widths = T.widths
    vectors = dict(extra_vectors)
    A = G.to_matrix()
    for i in range(s):
        for p in (tracker.lo_at[i], tracker.hi_at[i]):
            vectors[p] = _tv_of(A, profile, p)
    if len(tracker.profiles) > EXACT_L1_LIMIT:
        for _ in range(pairs):
            p = tuple(sorted(int(x) for x in rng.choice(G.n, size=ell, replace=False)))
            vectors[p] = _tv_of(A, profile, p)
    gap_l1, l1_pair, l1_exact = _l1_search(tracker, vectors)
    gaps = tracker.hi - tracker.lo
    baseline = tracker.total / max(tracker.count, 1)
    m, r = G.m, profile.r
    return AttackResult(
        ell=ell, mode=mode,
        L_min=list(tracker.lo_at), L_max=list(tracker.hi_at),
        tv_min=tracker.lo.copy(), tv_max=tracker.hi.copy(),
        gap_per_tranche=gaps, gap_l1=gap_l1, l1_pair=l1_pair,
        eps_per_tranche=gaps / (m * widths), eps_l1=gap_l1 / (m * r),
        placements_examined=tracker.count, exhaustive_flag=exhaustive,
        l1_exact=l1_exact and exhaustive,
        baseline=baseline, baseline_gap_per_tranche=baseline - tracker.lo,
        counts_min=list(tracker.lo_t),
    )


def _tv_of(A, profile, placement):
    t = _histograms(A, np.asarray([placement], dtype=np.intp).reshape(1, -1), profile.r)
    return totals_from_counts(t, profile)[0]


def _chunks(it, size):
    while True:
        block = list(islice(it, size))
        if not block:
            return
        yield block


def _greedy(G: BipartiteGraph, ell: int, dense: bool) -> Placement:
    """Grow a placement one asset at a time.

    ``dense`` maximizes the number of CDOs holding at least two lemons;
    otherwise that number is minimized.  Ties go to the lowest index.
    """
    hits = [0] * G.m
    chosen: List[int] = []
    taken = set()
    for _ in range(ell):
        best_u, best_score = None, None
        for u in range(G.n):
            if u in taken:
                continue
            score = sum(1 for v in G.adjacency[u] if hits[v] == 1)
            if best_score is None or (score > best_score if dense else score < best_score):
                best_u, best_score = u, score
        chosen.append(best_u)
        taken.add(best_u)
        for v in G.adjacency[best_u]:
            hits[v] += 1
    return tuple(sorted(chosen))


def search_worst(G: BipartiteGraph, profile: ValueProfile, T: TrancheSpec, ell: int,
                 mode: str = "exhaustive", budget: int = DEFAULT_BUDGET, seed: int = 0,
                 threads: int = 1, chunk: int = 2048, pairs: int = 1000) -> AttackResult:
    """Search lemon placements of size ``ell`` for the extreme tranche totals.

    ``exhaustive`` enumerates every placement, ``greedy`` examines a densest
    and a most spread-out placement, ``random`` draws ``budget`` placements.
    """
    if G.r != profile.r:
        raise ValueError(f"graph right degree {G.r} does not match profile r = {profile.r}")
    if not 0 <= ell <= G.n:
        raise ValueError(f"ell = {ell} outside [0, {G.n}]")
    A = G.to_matrix()
    r = profile.r
    tracker = _Tracker(T.s, r)
    rng = np.random.default_rng(seed)

    def evaluate(block):
        arr = np.asarray(block, dtype=np.intp).reshape(len(block), ell)
        t = _histograms(A, arr, r)
        return block, t, totals_from_counts(t, profile)

    if mode == "exhaustive":
        total = math.comb(G.n, ell)
        if total > budget:
            raise GuardExceeded(f"C({G.n},{ell}) = {total} placements exceed budget {budget}")
        blocks = _chunks(combinations(range(G.n), ell), chunk)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            for block, t, tv in pool.map(evaluate, blocks):
                tracker.update(block, t, tv)
        return _finish(G, profile, T, ell, mode, tracker, {}, True, rng, pairs)

    if mode == "greedy":
        block = sorted({_greedy(G, ell, dense=True), _greedy(G, ell, dense=False)})
    elif mode == "random":
        if budget < 1:
            raise ValueError("random mode needs a positive budget")
        block = sorted({tuple(sorted(int(x) for x in rng.choice(G.n, size=ell, replace=False)))
                        for _ in range(budget)})
    else:
        raise ValueError(f"unknown attack mode {mode!r}")
    block, t, tv = evaluate(block)
    tracker.update(block, t, tv)
    vectors = {p: v for p, v in zip(block, tv)} if len(block) <= 2 * pairs else {}
    return _finish(G, profile, T, ell, mode, tracker, vectors, False, rng, pairs)


# -- bounds --------------------------------------------------------------

@dataclass
class BoundReport:
    d: int
    r: int
    m: int
    ell: int
    trivial_tranche: float
    unique_tranche: float
    unique_l1: float
    explicit_tranche: float
    explicit_l1: float
    general_tranche: float
    widths: np.ndarray
    applicability: Dict[str, bool]
    valuediff_refined: Optional[np.ndarray] = None

    def normalized(self) -> Dict[str, object]:
        """Every bound as an error epsilon, capped at 1."""
        per = self.m * self.widths
        full = self.m * self.r

        def cap(x):
            return np.minimum(x, 1.0)
        out = {
            "trivial_tranche": cap(self.trivial_tranche / per),
            "unique_tranche": cap(self.unique_tranche / per),
            "explicit_tranche": cap(self.explicit_tranche / per),
            "general_tranche": cap(self.general_tranche / per),
            "unique_l1": min(self.unique_l1 / full, 1.0),
            "explicit_l1": min(self.explicit_l1 / full, 1.0),
        }
        if self.valuediff_refined is not None:
            out["valuediff_refined"] = cap(self.valuediff_refined / per)
        return out

    def to_dict(self) -> dict:
        absolute = {
            "trivial_tranche": self.trivial_tranche,
            "unique_tranche": self.unique_tranche,
            "unique_l1": self.unique_l1,
            "explicit_tranche": self.explicit_tranche,
            "explicit_l1": self.explicit_l1,
            "general_tranche": self.general_tranche,
        }
        if self.valuediff_refined is not None:
            absolute["valuediff_refined"] = [float(x) for x in self.valuediff_refined]
        norm = {k: (float(v) if np.ndim(v) == 0 else [float(x) for x in v])
                for k, v in self.normalized().items()}
        return {"absolute": {k: (float(v) if np.ndim(v) == 0 else v) for k, v in absolute.items()},
                "normalized": norm}


def theoretical_bounds(d: int, r: int, delta_exp: float, Delta: float, ell: int, mu: float,
                       delta: float, m: int, T: TrancheSpec, dominated: bool, k_max: int,
                       vacuous: bool = False, counts: Optional[NeighborCounts] = None,
                       profile: Optional[ValueProfile] = None) -> BoundReport:
    """All absolute gap bounds for moving ``ell`` lemons.

    ``Delta`` is the unique-neighbor deficiency (unique expansion ``d - Delta``)
    and ``delta_exp`` the plain expander deficiency used by the explicit bounds.
    """
    in_range = ell <= k_max and not vacuous
    unique_ok = in_range and Delta <= d
    refined = None
    if counts is not None and profile is not None:
        refined = np.asarray([valuediff_bound(counts, profile, Delta, ell, i)
                              for i in range(T.s)])
    return BoundReport(
        d=d, r=r, m=m, ell=ell,
        trivial_tranche=d * ell * delta,
        unique_tranche=2 * Delta * ell * delta,
        unique_l1=3 * Delta * ell * delta,
        explicit_tranche=4 * delta_exp * ell * delta,
        explicit_l1=6 * delta_exp * ell * delta,
        general_tranche=2 * Delta * ell * mu,
        widths=T.widths,
        applicability={
            "trivial": dominated,
            "unique": dominated and unique_ok,
            "explicit": dominated and in_range and 2 * delta_exp <= d,
            "general": unique_ok,
            "valuediff_refined": refined is not None and dominated and unique_ok,
        },
        valuediff_refined=refined,
    )


def valuediff_bound(counts: NeighborCounts, profile: ValueProfile, Delta: float, ell: int,
                    tranche_index: int) -> float:
    """Placement-dependent upper bound on how much any other placement can gain.

    ``counts`` must come from the lower-valued placement.
    """
    if ell == 0:
        return 0.0
    r = profile.r
    if counts.r > r:
        raise ValueError("lemon counts exceed the CDO size")
    col = profile.values[:, tranche_index]
    bound = Delta * ell * (col[r] - col[r - 1])
    for i in range(2, counts.r + 1):
        bound += counts.t[i] * (col[r] - col[r - i])
    return float(bound)


def profile_is_monotone(profile: ValueProfile, tol: float = 1e-12) -> bool:
    return bool(np.all(np.diff(profile.values, axis=0) >= -tol))


def empirical_errors(tvA, tvB, T: TrancheSpec, m: int, r: int):
    """Per-tranche and L1 pseudorandomness errors between two placements."""
    a = np.asarray(getattr(tvA, "totals", tvA), dtype=float)
    b = np.asarray(getattr(tvB, "totals", tvB), dtype=float)
    if a.shape != b.shape or a.shape != (T.s,):
        raise ValueError(f"tranche vectors of shape {a.shape} and {b.shape} for {T.s} tranches")
    diff = np.abs(a - b)
    return diff / (m * T.widths), float(diff.sum() / (m * r))

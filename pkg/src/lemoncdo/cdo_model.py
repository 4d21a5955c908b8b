"""Scenario-conditional asset model and exact tranche valuation.

Conditioned on a scenario, assets are independent draws from the scenario's
good-asset or lemon distribution, so the value of a CDO depends only on how
many of its ``r`` assets are good.  ``value_profile`` tabulates that value
for every good count by exact discrete convolution.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Tuple

import numpy as np

from .exceptions import FormatError, GuardExceeded
from .expander import BipartiteGraph, neighbor_counts

ATOM_GUARD = 10**6
PROB_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDist:
    support: Tuple[float, ...]
    probs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise ValueError("support and probs must be nonempty and of equal length")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError("support must be strictly ascending")
        if self.support[0] < 0 or self.support[-1] > 1:
            raise ValueError("payoffs must lie in [0, 1]")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1) > PROB_TOL:
            raise ValueError(f"probabilities sum to {sum(self.probs)!r}, not 1")

    @classmethod
    def point(cls, x: float) -> "DiscreteDist":
        return cls((float(x),), (1.0,))

    @classmethod
    def bernoulli(cls, p: float) -> "DiscreteDist":
        """Pays 1 with probability ``p``, else 0."""
        if p == 0:
            return cls.point(0.0)
        if p == 1:
            return cls.point(1.0)
        return cls((0.0, 1.0), (1.0 - p, float(p)))

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def tail(self, a: float) -> float:
        """``Pr[X >= a]``."""
        return float(sum(p for x, p in zip(self.support, self.probs) if x >= a))


@dataclass(frozen=True)
class Scenario:
    weight: float
    good: DiscreteDist
    lemon: DiscreteDist

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("scenario weight must be nonnegative")


@dataclass(frozen=True)
class DominanceReport:
    mu: float
    lam: float
    delta: float
    dominated: bool
    violation: Optional[Tuple[int, float]] = None  # (scenario index, threshold)


@dataclass(frozen=True)
class AssetModel:
    scenarios: Tuple[Scenario, ...]

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("model needs at least one scenario")
        total = sum(s.weight for s in self.scenarios)
        if abs(total - 1) > PROB_TOL:
            raise ValueError(f"scenario weights sum to {total!r}, not 1")

    @classmethod
    def single(cls, good: DiscreteDist, lemon: DiscreteDist) -> "AssetModel":
        return cls((Scenario(1.0, good, lemon),))

    @property
    def mu(self) -> float:
        return sum(s.weight * s.good.mean for s in self.scenarios)

    @property
    def lam(self) -> float:
        return sum(s.weight * s.lemon.mean for s in self.scenarios)

    @property
    def delta(self) -> float:
        return self.mu - self.lam

    @property
    def dominated(self) -> bool:
        return validate_model(self).dominated


def validate_model(M: AssetModel) -> DominanceReport:
    """Check first-order dominance of good over lemon in every scenario."""
    for i, s in enumerate(M.scenarios):
        for a in sorted(set(s.good.support) | set(s.lemon.support)):
            if s.good.tail(a) < s.lemon.tail(a) - PROB_TOL:
                return DominanceReport(M.mu, M.lam, M.delta, False, (i, a))
    return DominanceReport(M.mu, M.lam, M.delta, True)


@dataclass(frozen=True)
class TrancheSpec:
    points: Tuple[float, ...]

    def __post_init__(self):
        if len(self.points) < 2 or self.points[0] != 0:
            raise ValueError("attachment points must start at 0 and name at least one tranche")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ValueError("attachment points must be strictly ascending")

    @property
    def s(self) -> int:
        return len(self.points) - 1

    @property
    def size(self) -> float:
        return self.points[-1]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.asarray(self.points, dtype=float))


def tranche_payoff(T: TrancheSpec, x: float) -> np.ndarray:
    if not 0 <= x <= T.size:
        raise ValueError(f"portfolio payoff {x} outside [0, {T.size}]")
    return _payoffs(T, np.asarray([x], dtype=float))[0]


def _payoffs(T: TrancheSpec, x: np.ndarray) -> np.ndarray:
    capped = np.minimum(x[:, None], np.asarray(T.points, dtype=float)[None, :])
    return np.diff(capped, axis=1)


@dataclass(frozen=True)
class ValueProfile:
    """``values[g, i]`` is the expected payoff of tranche ``i`` of one CDO with ``g`` good assets."""

    r: int
    values: np.ndarray = field(repr=False)

    def row(self, g: int) -> np.ndarray:
        return self.values[g]


@dataclass(frozen=True)
class TrancheValueVector:
    totals: np.ndarray

    def __eq__(self, other):
        return isinstance(other, TrancheValueVector) and np.array_equal(self.totals, other.totals)


def _convolve(xa, pa, xb, pb):
    xs = np.add.outer(xa, xb).ravel()
    ps = np.multiply.outer(pa, pb).ravel()
    uniq, inv = np.unique(xs, return_inverse=True)
    return uniq, np.bincount(inv.ravel(), weights=ps, minlength=len(uniq))


def _powers(dist: DiscreteDist, k: int):
    x = np.asarray(dist.support, dtype=float)
    p = np.asarray(dist.probs, dtype=float)
    out = [(np.zeros(1), np.ones(1))]
    for _ in range(k):
        out.append(_convolve(*out[-1], x, p))
        if len(out[-1][0]) > ATOM_GUARD:
            raise GuardExceeded("convolution exceeds the atom guard; use mc_value")
    return out


def value_profile(M: AssetModel, T: TrancheSpec, r: int) -> ValueProfile:
    """Exact ``valu(g)`` for ``g = 0..r`` and every tranche."""
    if r < 1:
        raise ValueError("CDO size r must be positive")
    if abs(T.size - r) > 1e-12:
        raise ValueError(f"last attachment point {T.size} must equal r = {r}")
    values = np.zeros((r + 1, T.s))
    for sc in M.scenarios:
        if sc.weight == 0:
            continue
        goods = _powers(sc.good, r)
        lemons = _powers(sc.lemon, r)
        for g in range(r + 1):
            ga, lb = goods[g], lemons[r - g]
            if len(ga[0]) * len(lb[0]) > ATOM_GUARD:
                raise GuardExceeded("convolution exceeds the atom guard; use mc_value")
            xs, ps = _convolve(*ga, *lb)
            values[g] += sc.weight * (ps @ _payoffs(T, xs))
    return ValueProfile(r, values)


def tv_vector(G: BipartiteGraph, profile: ValueProfile, L: Iterable[int]) -> TrancheValueVector:
    """Total expected value of every tranche across the family when ``L`` are lemons."""
    if G.r != profile.r:
        raise ValueError(f"graph right degree {G.r} does not match profile r = {profile.r}")
    t = neighbor_counts(G, L).t
    return TrancheValueVector(totals_from_counts(np.asarray([t]), profile)[0])


def totals_from_counts(t: np.ndarray, profile: ValueProfile) -> np.ndarray:
    """Rows of lemon-count histograms to rows of tranche totals.

    Summed in a fixed order so equal histograms give bit-identical totals.
    """
    t = np.asarray(t)
    r = profile.r
    out = np.zeros((t.shape[0], profile.values.shape[1]))
    for i in range(r + 1):
        out += t[:, i, None] * profile.values[r - i][None, :]
    return out


@dataclass(frozen=True)
class MCEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    trials: int


def mc_value(M: AssetModel, T: TrancheSpec, r: int, g: int, seed: int = 0,
             trials: int = 100_000) -> MCEstimate:
    """Monte Carlo estimate of ``valu(g)`` for each tranche."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= g <= r:
        raise ValueError(f"good count {g} outside [0, {r}]")
    rng = np.random.default_rng(seed)
    weights = np.asarray([s.weight for s in M.scenarios], dtype=float)
    which = rng.choice(len(M.scenarios), size=trials, p=weights / weights.sum())
    totals = np.zeros(trials)
    for k, sc in enumerate(M.scenarios):
        rows = np.flatnonzero(which == k)
        if rows.size == 0:
            continue
        for dist, count in ((sc.good, g), (sc.lemon, r - g)):
            if count:
                draws = rng.choice(np.asarray(dist.support), size=(rows.size, count),
                                   p=np.asarray(dist.probs))
                totals[rows] += draws.sum(axis=1)
    pay = _payoffs(T, totals)
    mean = pay.mean(axis=0)
    stderr = pay.std(axis=0, ddof=1) / np.sqrt(trials) if trials > 1 else np.zeros(T.s)
    return MCEstimate(mean, stderr, trials)


# -- files ---------------------------------------------------------------

def _parse_dist(obj, where, source) -> DiscreteDist:
    if not isinstance(obj, dict) or set(obj) != {"support", "probs"}:
        raise FormatError(f"{where} must be an object with exactly 'support' and 'probs'", source)
    try:
        return DiscreteDist(tuple(float(x) for x in obj["support"]),
                            tuple(float(p) for p in obj["probs"]))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}", source) from None


def model_from_dict(obj, source=None) -> AssetModel:
    if not isinstance(obj, dict) or set(obj) != {"scenarios"}:
        raise FormatError("model must be an object with a single key 'scenarios'", source)
    scenarios = obj["scenarios"]
    if not isinstance(scenarios, list) or not scenarios:
        raise FormatError("'scenarios' must be a nonempty list", source)
    out = []
    for i, sc in enumerate(scenarios):
        where = f"scenarios[{i}]"
        if not isinstance(sc, dict) or set(sc) != {"weight", "good", "lemon"}:
            raise FormatError(f"{where} needs exactly 'weight', 'good', 'lemon'", source)
        try:
            weight = float(sc["weight"])
            out.append(Scenario(weight, _parse_dist(sc["good"], f"{where}.good", source),
                                _parse_dist(sc["lemon"], f"{where}.lemon", source)))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{where}: {exc}", source) from None
    try:
        return AssetModel(tuple(out))
    except ValueError as exc:
        raise FormatError(str(exc), source) from None


def model_to_dict(M: AssetModel) -> dict:
    def dist(d):
        return {"support": list(d.support), "probs": list(d.probs)}
    return {"scenarios": [{"weight": s.weight, "good": dist(s.good), "lemon": dist(s.lemon)}
                          for s in M.scenarios]}


def read_model(path) -> AssetModel:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", str(path), exc.lineno) from None
    return model_from_dict(obj, source=str(path))


def write_model(M: AssetModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(M), indent=2) + "\n")


def parse_tranches(text: str, source=None) -> TrancheSpec:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 1:
        raise FormatError("tranche file must hold exactly one line", source, 1)
    try:
        points = tuple(float(x) for x in lines[0].split())
    except ValueError:
        raise FormatError("attachment points must be numbers", source, 1) from None
    try:
        return TrancheSpec(points)
    except ValueError as exc:
        raise FormatError(str(exc), source, 1) from None


def read_tranches(path) -> TrancheSpec:
    return parse_tranches(Path(path).read_text(), source=str(path))

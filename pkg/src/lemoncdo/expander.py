"""Explicit unique-neighbor expanders for CDO families.

Left vertices are assets, right vertices are CDOs.  The base graph is the
Guruswami-Umans-Vadhan map: a left vertex is a polynomial ``f`` over GF(q)
of degree ``< n_q``, and its neighbor through ``y`` is the right vertex with
base-q digits ``(y, f(y), f^h(y) mod E, ..., f^(h^(m_q-2))(y) mod E)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, islice
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .exceptions import FormatError, GuardExceeded, InfeasibleInstance
from .galois import (
    FieldSpec,
    Poly,
    field_make,
    find_irreducible,
    poly_eval,
    poly_mod,
    poly_mod_pow,
    poly_trim,
)

ENUMERATION_GUARD = 10**8
GRAPH_MAGIC = "GUVCDO v1"


@dataclass(frozen=True)
class GuvParams:
    alpha: float
    q: int
    h: int
    n_q: int
    m_q: int
    E: Poly

    @property
    def field(self) -> FieldSpec:
        return field_make(self.q.bit_length() - 1)

    @property
    def n_prime(self) -> int:
        return self.q ** self.n_q

    @property
    def m_prime(self) -> int:
        return self.q ** self.m_q


@dataclass(frozen=True)
class ExpansionCertificate:
    """Guarantees carried by a constructed graph.

    ``gamma`` is the neighbor expansion for sets up to ``k_max_thm`` and
    ``gamma_unique`` the unique-neighbor expansion; both are measured against
    the current left degree ``gamma + delta``.
    """

    alpha: float
    q: int
    h: int
    n_q: int
    m_q: int
    delta: int
    k_max_thm: int
    k_max_cor: int
    gamma: int
    gamma_unique: int

    @property
    def vacuous(self) -> bool:
        return self.gamma <= 0

    @property
    def degree(self) -> int:
        return self.gamma + self.delta

    def trimmed(self, d: int) -> "ExpansionCertificate":
        """Guarantee after cutting every left degree down to ``d``."""
        gamma = d - self.delta
        return replace(self, gamma=gamma, gamma_unique=gamma - self.delta)

    def rebased(self, d: int) -> "ExpansionCertificate":
        """Guarantee after edges were added to reach left degree ``d``.

        Expansion is unchanged, so the deficiency grows by the added degree.
        """
        delta = d - self.gamma
        return replace(self, delta=delta, gamma_unique=self.gamma - delta)

    def to_line(self) -> str:
        fields = (repr(float(self.alpha)), self.q, self.h, self.n_q, self.m_q,
                  self.delta, self.k_max_thm, self.k_max_cor, self.gamma,
                  self.gamma_unique, int(self.vacuous))
        return " ".join(str(f) for f in fields)

    @classmethod
    def from_line(cls, line: str, source=None) -> "ExpansionCertificate":
        parts = line.split()
        if len(parts) != 11:
            raise FormatError(f"certificate needs 11 fields, got {len(parts)}", source, 1)
        try:
            alpha = float(parts[0])
            ints = [int(p) for p in parts[1:]]
        except ValueError as exc:
            raise FormatError(f"bad certificate field: {exc}", source, 1) from None
        q, h, n_q, m_q, delta, k_thm, k_cor, gamma, gamma_unique, vac = ints
        cert = cls(alpha, q, h, n_q, m_q, delta, k_thm, k_cor, gamma, gamma_unique)
        if gamma_unique != gamma - delta or vac != int(cert.vacuous):
            raise FormatError("certificate fields are inconsistent", source, 1)
        return cert


@dataclass(frozen=True)
class BipartiteGraph:
    n: int
    m: int
    adjacency: Tuple[Tuple[int, ...], ...]
    d: Optional[int] = None
    r: Optional[int] = None

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError(f"expected {self.n} adjacency lists, got {len(self.adjacency)}")
        for i, nbrs in enumerate(self.adjacency):
            if any(b <= a for a, b in zip(nbrs, nbrs[1:])):
                raise ValueError(f"left vertex {i}: neighbors not strictly ascending")
            if nbrs and not (0 <= nbrs[0] and nbrs[-1] < self.m):
                raise ValueError(f"left vertex {i}: neighbor index out of range")
            if self.d is not None and len(nbrs) != self.d:
                raise ValueError(f"left vertex {i} has degree {len(nbrs)}, expected {self.d}")
        if self.r is not None:
            bad = [v for v, deg in enumerate(self.right_degrees()) if deg != self.r]
            if bad:
                raise ValueError(f"right vertex {bad[0]} is not of degree {self.r}")

    @classmethod
    def from_lists(cls, m: int, lists: Iterable[Iterable[int]]) -> "BipartiteGraph":
        """Build from raw neighbor lists, inferring regularity."""
        adj = tuple(tuple(sorted(set(nb))) for nb in lists)
        g = cls(len(adj), m, adj)
        return g.with_regularity()

    def with_regularity(self) -> "BipartiteGraph":
        left = {len(nb) for nb in self.adjacency}
        right = set(self.right_degrees())
        d = left.pop() if len(left) == 1 else None
        r = right.pop() if len(right) == 1 else None
        return replace(self, d=d, r=r)

    def right_degrees(self) -> List[int]:
        deg = [0] * self.m
        for nbrs in self.adjacency:
            for v in nbrs:
                deg[v] += 1
        return deg

    def right_lists(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.m)]
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                out[v].append(u)
        return out

    @property
    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.adjacency)

    @property
    def max_right_degree(self) -> int:
        return max(self.right_degrees(), default=0)

    def to_matrix(self, dtype=np.int16) -> np.ndarray:
        A = np.zeros((self.n, self.m), dtype=dtype)
        for u, nbrs in enumerate(self.adjacency):
            A[u, list(nbrs)] = 1
        return A

    def is_biregular(self, d: int, r: int) -> bool:
        return all(len(nb) == d for nb in self.adjacency) and all(
            x == r for x in self.right_degrees())


@dataclass(frozen=True)
class NeighborCounts:
    """``t[i]`` is the number of right vertices with exactly ``i`` lemons."""

    t: Tuple[int, ...]

    @property
    def r(self) -> int:
        return len(self.t) - 1


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    mode: str
    k_max: int
    gamma: int
    worst_ratio: Fraction
    witness: Tuple[int, ...]
    subsets_checked: int

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        witness = " ".join(map(str, self.witness))
        return (f"{status} mode={self.mode} k={self.k_max} gamma={self.gamma} "
                f"worst_ratio={self.worst_ratio} witness={witness} "
                f"subsets={self.subsets_checked}")


# -- construction --------------------------------------------------------

def _smallest_power_of_two(d: int) -> int:
    q = 2
    while q < d:
        q *= 2
    return q


def derive_guv_params(alpha: float, n: int, m: int, d: int):
    """Parameter schedule for a GUV expander with left degree at least ``d``.

    Returns ``(GuvParams, ExpansionCertificate)``.  The certificate is stated
    for the untrimmed left degree ``q``.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    q = _smallest_power_of_two(d)
    if m < q:
        raise ValueError(f"m={m} is smaller than the field size q={q}")
    n_q = 1
    while q ** n_q < n:
        n_q += 1
    m_q = 1
    while q ** (m_q + 1) <= m:
        m_q += 1
    h = math.ceil(q ** alpha - 1e-12)
    F = field_make(q.bit_length() - 1)
    E = find_irreducible(F, n_q)
    delta = (h - 1) * (n_q - 1) * (m_q - 1)
    k_thm = h ** (m_q - 1)
    k_cor = math.floor((m / (4 * d * d)) ** alpha + 1e-12)
    gamma = q - delta
    params = GuvParams(alpha, q, h, n_q, m_q, E)
    cert = ExpansionCertificate(alpha, q, h, n_q, m_q, delta, k_thm, k_cor,
                                gamma, gamma - delta)
    return params, cert


def _digits(x: int, base: int, count: int) -> List[int]:
    out = []
    for _ in range(count):
        out.append(x % base)
        x //= base
    return out


def guv_neighbors(P: GuvParams, left_index: int) -> List[int]:
    """Right neighbors of one left vertex, in increasing ``y`` order."""
    if not 0 <= left_index < P.n_prime:
        raise ValueError(f"left index {left_index} out of range [0, {P.n_prime})")
    F = P.field
    q = P.q
    f = poly_trim(_digits(left_index, q, P.n_q))
    powers = [poly_mod(F, f, P.E)]
    for i in range(1, P.m_q - 1):
        powers.append(poly_mod_pow(F, f, P.h ** i, P.E))
    out = []
    for y in range(q):
        idx = y
        for g in powers:
            idx = idx * q + poly_eval(F, g, y)
        out.append(idx)
    return out


def guv_graph(P: GuvParams) -> BipartiteGraph:
    adj = tuple(tuple(sorted(guv_neighbors(P, u))) for u in range(P.n_prime))
    return BipartiteGraph(P.n_prime, P.m_prime, adj, d=P.q).with_regularity()


def trim_pad(G: BipartiteGraph, n: int, m: int, d: int) -> BipartiteGraph:
    """Keep left vertices ``[0, n)`` and their first ``d`` neighbors; pad right side to ``m``."""
    left_min = min((len(nb) for nb in G.adjacency), default=0)
    if n > G.n or m < G.m or d > left_min:
        raise ValueError(f"trim_pad needs n <= {G.n}, m >= {G.m}, d <= {left_min}")
    adj = tuple(nb[:d] for nb in G.adjacency[:n])
    return BipartiteGraph(n, m, adj).with_regularity()


def biregularize(G: BipartiteGraph, m: int, d: int, r: int) -> BipartiteGraph:
    """Turn a left-regular expander into a ``(d, r)``-biregular one on ``m`` right vertices.

    Overfull right vertices are split into blocks of ``r`` (by increasing left
    endpoint); the first block keeps the vertex index and the remaining blocks
    are appended in order.  Isolated right vertices pad to ``m``, then open
    left slots are filled round-robin, each to the lowest-index right vertex
    with room that is not already adjacent.
    """
    n = G.n
    degs = {len(nb) for nb in G.adjacency}
    if len(degs) > 1:
        raise ValueError("input graph must be left-regular")
    d0 = degs.pop() if degs else 0
    m0 = G.m
    if not d0 < d <= m0:
        raise ValueError(f"need d0 < d <= m0, got d0={d0}, d={d}, m0={m0}")
    if n * d != m * r:
        raise ValueError(f"n*d = {n * d} differs from m*r = {m * r}")
    if m * (d - d0) < m0 * d:
        raise ValueError(f"need m >= m0*d/(d-d0) = {m0 * d / (d - d0):.4g}, got {m}")
    if r > n:
        raise InfeasibleInstance(f"right degree {r} exceeds the {n} left vertices")

    blocks: List[List[int]] = []
    extra: List[List[int]] = []
    for v, lefts in enumerate(G.right_lists()):
        chunks = [lefts[i:i + r] for i in range(0, len(lefts), r)] or [[]]
        blocks.append(chunks[0])
        extra.extend(chunks[1:])
    blocks.extend(extra)
    if len(blocks) > m:
        raise InfeasibleInstance(f"splitting produced {len(blocks)} > {m} right vertices")
    blocks.extend([] for _ in range(m - len(blocks)))

    adj = [set() for _ in range(n)]
    for v, lefts in enumerate(blocks):
        for u in lefts:
            adj[u].add(v)
    load = [len(b) for b in blocks]
    lowest = 0
    for _ in range(d - d0):
        for u in range(n):
            while lowest < m and load[lowest] >= r:
                lowest += 1
            v = lowest
            while v < m and (load[v] >= r or v in adj[u]):
                v += 1
            if v == m:
                raise InfeasibleInstance(f"no duplicate-free slot left for left vertex {u}")
            adj[u].add(v)
            load[v] += 1
    out = BipartiteGraph(n, m, tuple(tuple(sorted(a)) for a in adj))
    return replace(out, d=d, r=r)


def _theorem_schedule(alpha: float, n: int, m: int, d: int):
    if d < 2:
        raise InfeasibleInstance("theorem mode needs d >= 2")
    total = 2 * (2 * d) ** alpha * math.log(n, d) * math.log(m, d) if n > 1 and m > 1 else 0.0
    delta0 = math.ceil(total / 2 - 1e-12)
    d0 = d - delta0
    if delta0 < 1 or d0 < 1:
        raise InfeasibleInstance(
            f"schedule gives Delta0={delta0}, d0={d0}; need Delta0 >= 1 and d0 >= 1")
    if (delta0 * m) % d:
        raise InfeasibleInstance(f"m0 = Delta0*m/d = {delta0}*{m}/{d} is not an integer")
    m0 = delta0 * m // d
    if m0 < d:
        raise InfeasibleInstance(f"m0 = {m0} is smaller than d = {d}")
    return delta0, d0, m0


def build_cdo_graph(alpha: float, n: int, m: int, d: int, r: int, mode: str = "direct"):
    """Build a ``(d, r)``-biregular CDO family graph with its certificate.

    ``direct`` trims the GUV graph to degree ``d`` and only biregularizes when
    the trimmed graph is not already right-regular; ``theorem`` follows the
    degree split ``d0 = d - Delta/2`` on ``m0 = (Delta/2) m / d`` right vertices.
    """
    if n * d != m * r:
        raise InfeasibleInstance(f"n*d = {n * d} differs from m*r = {m * r}")
    if mode == "direct":
        params, cert = derive_guv_params(alpha, n, m, d)
        base = guv_graph(params)
        G = trim_pad(base, n, m, d)
        if G.is_biregular(d, r):
            return replace(G, d=d, r=r), cert.trimmed(d)
        m0 = params.m_prime
        for d0 in range(d - 1, 0, -1):
            if m * (d - d0) >= m0 * d and d <= m0:
                G0 = trim_pad(base, n, m0, d0)
                return biregularize(G0, m, d, r), cert.trimmed(d0).rebased(d)
        raise InfeasibleInstance(
            "direct construction is not right-regular and leaves no room to "
            "biregularize; try mode=theorem")
    if mode == "theorem":
        delta0, d0, m0 = _theorem_schedule(alpha, n, m, d)
        params, cert = derive_guv_params(alpha, n, m0, d0)
        G0 = trim_pad(guv_graph(params), n, m0, d0)
        G = biregularize(G0, m, d, r)
        total = 2 * (2 * d) ** alpha * math.log(n, d) * math.log(m, d) if n > 1 else 0.0
        k_cor = math.floor((total * m / (8 * d ** 3)) ** alpha + 1e-12)
        cert = replace(cert.trimmed(d0).rebased(d), k_max_cor=k_cor)
        return G, cert
    raise ValueError(f"unknown construction mode {mode!r}")


# -- verification --------------------------------------------------------

def _chunks(it, size):
    while True:
        block = list(islice(it, size))
        if not block:
            return
        yield block


def _best_in_chunk(A, combos, k, unique):
    idx = np.asarray(combos, dtype=np.intp)
    counts = A[idx].sum(axis=1)
    vals = (counts == 1).sum(axis=1) if unique else (counts > 0).sum(axis=1)
    j = int(np.argmin(vals))
    return int(vals[j]), tuple(combos[j])


def verify_expansion(G: BipartiteGraph, k_max: int, gamma: int, mode: str = "neighbor",
                     threads: int = 1, chunk: int = 4096) -> VerificationReport:
    """Exhaustively check ``|Gamma(S)| >= gamma |S|`` (or ``|Gamma_1(S)|``) for ``|S| <= k_max``."""
    if mode not in ("neighbor", "unique"):
        raise ValueError(f"unknown verification mode {mode!r}")
    k_max = min(k_max, G.n)
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if math.comb(G.n, k_max) * k_max > ENUMERATION_GUARD:
        raise GuardExceeded(f"C({G.n},{k_max})*{k_max} exceeds {ENUMERATION_GUARD}")
    A = G.to_matrix()
    unique = mode == "unique"
    best = None  # (ratio, witness)
    checked = 0
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for k in range(1, k_max + 1):
            blocks = _chunks(combinations(range(G.n), k), chunk)
            for val, witness in pool.map(lambda c: _best_in_chunk(A, c, k, unique), blocks):
                key = (Fraction(val, k), witness)
                if best is None or key < best:
                    best = key
            checked += math.comb(G.n, k)
    ratio, witness = best
    return VerificationReport(ratio >= gamma, mode, k_max, gamma, ratio, witness, checked)


def neighbor_counts(G: BipartiteGraph, L: Iterable[int]) -> NeighborCounts:
    L = sorted(set(L))
    if L and not (0 <= L[0] and L[-1] < G.n):
        raise IndexError(f"lemon index out of range [0, {G.n})")
    r = G.r if G.r is not None else G.max_right_degree
    hits = [0] * G.m
    for u in L:
        for v in G.adjacency[u]:
            hits[v] += 1
    t = [0] * (r + 1)
    for c in hits:
        t[c] += 1
    return NeighborCounts(tuple(t))


# -- files ---------------------------------------------------------------

def format_graph(G: BipartiteGraph) -> str:
    lines = [GRAPH_MAGIC, f"{G.n} {G.m} {G.d or 0} {G.r or 0}"]
    lines.extend(" ".join(map(str, nb)) for nb in G.adjacency)
    return "\n".join(lines) + "\n"


def parse_graph(text: str, source=None) -> BipartiteGraph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != GRAPH_MAGIC:
        raise FormatError(f"missing header {GRAPH_MAGIC!r}", source, 1)
    if len(lines) < 2:
        raise FormatError("missing size line", source, 2)
    try:
        n, m, d, r = (int(x) for x in lines[1].split())
    except ValueError:
        raise FormatError("size line must hold four integers 'n m d r'", source, 2) from None
    if len(lines) - 2 != n:
        raise FormatError(f"expected {n} adjacency lines, found {len(lines) - 2}", source, len(lines))
    adj = []
    for i, line in enumerate(lines[2:]):
        try:
            nb = tuple(int(x) for x in line.split())
        except ValueError:
            raise FormatError("adjacency entries must be integers", source, i + 3) from None
        if any(b <= a for a, b in zip(nb, nb[1:])) or any(not 0 <= v < m for v in nb):
            raise FormatError("neighbors must be ascending, distinct and in [0, m)", source, i + 3)
        adj.append(nb)
    try:
        return BipartiteGraph(n, m, tuple(adj), d=d or None, r=r or None)
    except ValueError as exc:
        raise FormatError(str(exc), source, 2) from None


def write_graph(G: BipartiteGraph, path) -> None:
    Path(path).write_text(format_graph(G))


def read_graph(path) -> BipartiteGraph:
    return parse_graph(Path(path).read_text(), source=str(path))


def write_certificate(cert: ExpansionCertificate, path) -> None:
    Path(path).write_text(cert.to_line() + "\n")


def read_certificate(path) -> ExpansionCertificate:
    text = Path(path).read_text().strip()
    return ExpansionCertificate.from_line(text, source=str(path))

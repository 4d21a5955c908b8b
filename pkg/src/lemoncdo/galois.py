"""Arithmetic in GF(2^s) and in the polynomial ring GF(2^s)[Y].

Field elements are plain ints in ``[0, q)``; the bits are the coefficients of
a binary polynomial reduced by ``FieldSpec.modulus``.  Polynomials over the
field are tuples of elements, lowest degree first, with no trailing zeros
(the zero polynomial is the empty tuple).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

Poly = Tuple[int, ...]

MAX_FIELD_BITS = 16
MAX_SEARCH_SPACE = 1 << 24


@dataclass(frozen=True)
class FieldSpec:
    """The field GF(2^s) defined by an irreducible binary ``modulus``."""

    s: int
    modulus: int

    @property
    def q(self) -> int:
        return 1 << self.s

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise ValueError(f"element {a} out of range for GF(2^{self.s})")
        return a


def clmul_mod(a: int, b: int, modulus: int) -> int:
    """Carry-less product of two bit polynomials reduced by ``modulus``."""
    deg = modulus.bit_length() - 1
    top = 1 << deg
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return out


def _binary_irreducible(mask: int) -> bool:
    deg = mask.bit_length() - 1
    if deg < 1:
        return False
    for div in range(2, 1 << (deg // 2 + 1)):
        if _binary_mod(mask, div) == 0:
            return False
    return True


def _binary_mod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def field_make(s: int) -> FieldSpec:
    """Return GF(2^s) built on the smallest irreducible degree-s mask."""
    if not isinstance(s, int) or not 1 <= s <= MAX_FIELD_BITS:
        raise ValueError(f"field exponent must be in [1, {MAX_FIELD_BITS}], got {s!r}")
    return _field_make(s)


@lru_cache(maxsize=None)
def _field_make(s: int) -> FieldSpec:
    for mask in range(1 << s, 1 << (s + 1)):
        if _binary_irreducible(mask):
            return FieldSpec(s, mask)
    raise AssertionError("unreachable: irreducibles exist in every degree")


@lru_cache(maxsize=None)
def _tables(F: FieldSpec):
    # exp/log tables over a generator of the multiplicative group
    q = F.q
    order = q - 1
    if order == 1:
        return [1, 1], {1: 0}
    for g in range(2, q):
        exp = [1]
        x = 1
        for _ in range(order):
            x = clmul_mod(x, g, F.modulus)
            if x == 1:
                break
            exp.append(x)
        if len(exp) == order:
            log = {v: i for i, v in enumerate(exp)}
            exp = exp + exp
            return exp, log
    raise AssertionError("multiplicative group of a finite field is cyclic")


def field_mul(F: FieldSpec, a: int, b: int) -> int:
    F.check(a)
    F.check(b)
    if a == 0 or b == 0:
        return 0
    exp, log = _tables(F)
    return exp[log[a] + log[b]]


def field_inv(F: FieldSpec, a: int) -> int:
    F.check(a)
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    exp, log = _tables(F)
    return exp[(F.q - 1 - log[a]) % (F.q - 1)]


def field_pow(F: FieldSpec, a: int, e: int) -> int:
    F.check(a)
    if e == 0:
        return 1
    if a == 0:
        return 0
    exp, log = _tables(F)
    return exp[(log[a] * e) % (F.q - 1)]


# -- polynomials ---------------------------------------------------------

def poly_trim(coeffs: Sequence[int]) -> Poly:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def poly_degree(f: Poly) -> int:
    """Degree of ``f``; -1 for the zero polynomial."""
    return len(f) - 1


def poly_add(f: Poly, g: Poly) -> Poly:
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] ^= c
    return poly_trim(out)


def poly_mul(F: FieldSpec, f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return ()
    exp, log = _tables(F)
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        la = log[a]
        for j, b in enumerate(g):
            if b:
                out[i + j] ^= exp[la + log[b]]
    return poly_trim(out)


def poly_divmod(F: FieldSpec, f: Poly, g: Poly) -> Tuple[Poly, Poly]:
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(f)
    dg = len(g) - 1
    lead_inv = field_inv(F, g[-1])
    quot = [0] * max(len(f) - dg, 0)
    for k in range(len(rem) - 1, dg - 1, -1):
        c = rem[k]
        if c == 0:
            continue
        c = field_mul(F, c, lead_inv)
        quot[k - dg] = c
        for j, b in enumerate(g):
            if b:
                rem[k - dg + j] ^= field_mul(F, c, b)
    return poly_trim(quot), poly_trim(rem[:dg])


def poly_mod(F: FieldSpec, f: Poly, g: Poly) -> Poly:
    if len(f) < len(g):
        return poly_trim(f)
    return poly_divmod(F, f, g)[1]


def poly_gcd(F: FieldSpec, f: Poly, g: Poly) -> Poly:
    """Monic gcd of ``f`` and ``g``."""
    f, g = poly_trim(f), poly_trim(g)
    while g:
        f, g = g, poly_mod(F, f, g)
    if not f:
        return ()
    inv = field_inv(F, f[-1])
    return tuple(field_mul(F, c, inv) for c in f)


def poly_eval(F: FieldSpec, f: Poly, y: int) -> int:
    """Horner evaluation of ``f`` at ``y``."""
    F.check(y)
    acc = 0
    for c in reversed(f):
        acc = field_mul(F, acc, y) ^ F.check(c)
    return acc


def _check_modulus(E: Poly) -> None:
    if len(E) < 2 or E[-1] != 1:
        raise ValueError(f"modulus must be monic of degree >= 1, got {E!r}")


def poly_mod_pow(F: FieldSpec, f: Poly, e: int, E: Poly) -> Poly:
    """``f**e mod E`` by square-and-multiply."""
    _check_modulus(E)
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    base = poly_mod(F, poly_trim(f), E)
    result: Poly = poly_mod(F, (1,), E)
    while e:
        if e & 1:
            result = poly_mod(F, poly_mul(F, result, base), E)
        e >>= 1
        if e:
            base = poly_mod(F, poly_mul(F, base, base), E)
    return result


def is_irreducible(F: FieldSpec, f: Poly) -> bool:
    """Ben-Or test: no factor in common with Y^(q^i) - Y for i <= deg/2."""
    f = poly_trim(f)
    deg = poly_degree(f)
    if deg < 1:
        return False
    if deg == 1:
        return True
    Y = (0, 1)
    power = Y
    for _ in range(deg // 2):
        power = poly_mod_pow(F, power, F.q, _monic(F, f))
        if len(poly_gcd(F, poly_add(power, Y), f)) > 1:
            return False
    return True


def _monic(F: FieldSpec, f: Poly) -> Poly:
    if f[-1] == 1:
        return f
    inv = field_inv(F, f[-1])
    return tuple(field_mul(F, c, inv) for c in f)


def find_irreducible(F: FieldSpec, deg: int) -> Poly:
    """Smallest monic irreducible of degree ``deg`` over ``F``.

    Candidates are ordered by their coefficients read from degree ``deg - 1``
    down to the constant term, each compared as an integer.
    """
    if deg < 1:
        raise ValueError(f"degree must be positive, got {deg}")
    q = F.q
    if q ** deg > MAX_SEARCH_SPACE:
        raise ValueError(f"search space q^deg = {q}^{deg} exceeds {MAX_SEARCH_SPACE}")
    for tail in range(q ** deg):
        coeffs = [0] * deg
        t = tail
        for i in range(deg):
            coeffs[i] = t % q
            t //= q
        cand = tuple(coeffs) + (1,)
        if is_irreducible(F, cand):
            return cand
    raise AssertionError("irreducibles exist in every degree")

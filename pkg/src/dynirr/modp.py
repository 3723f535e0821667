"""Arithmetic over F_p and the per-prime stability certificate.

The certificate for a prime p checks the necessary conditions for every
iterate of f mod p to be irreducible:

* d even: Disc(f) and f_d * Res(f^(n), f') are non-squares mod p;
* d odd:  Disc(f) is a square and f_d * Res(f^(n), f') has the quadratic
  character of (-1)^((d-1)/2) mod p.

Res(f^(n), f') mod p is obtained without expanding f^(n): iterate y -> f(y)
in F_p[X]/(f') and finish with a small resultant. Whenever the expanded
iterate has degree within ``rabin_cap`` it is also run through Rabin's
irreducibility test, which is the only ground truth used.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np
from gmpy2 import mpz
from sympy import primefactors

from .errors import BadReduction, DegreeCapExceeded, EvenModulus
from .exactalg import IntPoly, discriminant, format_poly

DEFAULT_RABIN_CAP = 4096
MAX_MODULUS = 1 << 62
# products of two residues fit in int64 below this
_SMALL_P = 1 << 31


def jacobi(a: int, v: int) -> int:
    """Jacobi symbol (a/v) for odd v, by the binary algorithm.

    For negative v the symbol is taken at |v|; (a/1) = 1.
    """
    if v % 2 == 0:
        raise EvenModulus(f"Jacobi symbol needs an odd modulus, got {v}")
    v = abs(v)
    if v == 1:
        return 1
    a %= v
    t = 1
    while a:
        tz = (a & -a).bit_length() - 1
        if tz:
            a >>= tz
            # (2/v) = -1 iff v = 3, 5 mod 8
            if tz & 1 and (v & 7) in (3, 5):
                t = -t
        if a & 3 == 3 and v & 3 == 3:
            t = -t
        a, v = v % a, a
    return t if v == 1 else 0


def legendre(a: int, p: int) -> int:
    return jacobi(a, p)


@dataclass(frozen=True)
class ModPoly:
    p: int
    coeffs: tuple

    def __post_init__(self):
        if not 2 < self.p < MAX_MODULUS:
            raise ValueError(f"modulus must be in (2, 2^62), got {self.p}")
        c = [int(x) % self.p for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __str__(self):
        return f"{format_poly(self.coeffs)} over F_{self.p}"

    def monic(self) -> "ModPoly":
        inv = pow(self.coeffs[-1], -1, self.p)
        return ModPoly(self.p, tuple(c * inv for c in self.coeffs))


class Reduction(NamedTuple):
    poly: ModPoly
    degree_dropped: bool


def reduce_mod_p(f: IntPoly, p: int) -> Reduction:
    fp = ModPoly(p, f.coeffs)
    return Reduction(fp, fp.degree < f.degree)


# ---------------------------------------------------------------------------
# dense polynomials mod p on numpy arrays (int64, ascending, values in [0, p))


def _trim(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a)
    return a[: nz[-1] + 1] if nz.size else a[:0]


def _mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Product mod p via Kronecker substitution on GMP integers."""
    n = len(a) + len(b) - 1
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, dtype=np.int64)
    shortest = min(len(a), len(b))
    if shortest <= 16 and (p - 1) ** 2 * 16 < 2**63:
        return np.convolve(a, b) % p
    k = -(-(shortest * (p - 1) ** 2).bit_length() // 64)  # 64-bit words per slot
    w = _pack(a, k) * _pack(b, k)
    words = np.frombuffer(w.to_bytes(8 * k * n, "little"), dtype="<u8").reshape(n, k)
    if k == 1:
        return (words[:, 0] % np.uint64(p)).astype(np.int64)
    # word residues times 2^(64 i) mod p must not overflow int64
    dtype = np.int64 if p < _SMALL_P else object
    out = np.zeros(n, dtype=dtype)
    for i in range(k):
        part = (words[:, i] % np.uint64(p)).astype(np.int64).astype(dtype)
        out = (out + part * (pow(2, 64 * i, p))) % p
    return out.astype(np.int64)


def _pack(a: np.ndarray, k: int):
    buf = np.zeros((len(a), k), dtype="<u8")
    buf[:, 0] = a.astype("<u8")
    return mpz.from_bytes(buf.tobytes(), "little")


class _QuotientRing:
    """F_p[X]/(F) for monic F, with Barrett reduction."""

    def __init__(self, F: np.ndarray, p: int):
        self.p = p
        self.F = F
        self.D = len(F) - 1
        if self.D < 2:
            raise ValueError("quotient ring needs deg F >= 2")
        self._inv = self._rev_inverse(self.D - 1)

    def _rev_inverse(self, m):
        # power-series inverse of reverse(F) mod X^m by Newton iteration
        rev = self.F[::-1].copy()
        p = self.p
        g = np.ones(1, dtype=np.int64)
        k = 1
        while k < m:
            k = min(2 * k, m)
            e = _mul(rev[:k], g, p)[:k]
            e = (-e) % p
            e[0] = (e[0] + 2) % p
            g = _mul(g, e, p)[:k]
        return g[:m]

    def reduce(self, a: np.ndarray) -> np.ndarray:
        D, p = self.D, self.p
        if len(a) <= D:
            return a
        m = len(a) - D
        q_rev = _mul(a[::-1][:m], self._inv[:m], p)[:m]
        q = q_rev[::-1]
        r = (a[:D] - _mul(q, self.F, p)[:D]) % p
        return r

    def mul(self, a, b):
        return self.reduce(_mul(a, b, self.p))

    def pow(self, a, e: int):
        result = np.ones(1, dtype=np.int64)
        base = a
        for bit in bin(e)[2:]:
            result = self.mul(result, result)
            if bit == "1":
                result = self.mul(result, base)
        return _pad(result, self.D)


def _pad(a, n):
    if len(a) >= n:
        return a
    out = np.zeros(n, dtype=np.int64)
    out[: len(a)] = a
    return out


def _gcd_is_one(a: np.ndarray, b: np.ndarray, p: int) -> bool:
    if p >= _SMALL_P:
        a, b = a.astype(object), b.astype(object)
    a, b = _trim(a % p), _trim(b % p)
    while len(b):
        inv = pow(int(b[-1]), -1, p)
        b = (b * inv) % p
        a = a.copy()
        db = len(b) - 1
        while len(a) - 1 >= db and len(a):
            c = int(a[-1])
            s = len(a) - 1 - db
            a[s:] = (a[s:] - c * b) % p
            a = _trim(a)
        a, b = b, a
    return len(a) == 1


def _matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """A @ B mod p for residue matrices, exact through float64 BLAS.

    A is split into base-2^s digits so that every partial dot product stays
    below 2^53.
    """
    inner = A.shape[1]
    Bf = B.astype(np.float64)
    s = 53 - (inner * (p - 1)).bit_length()
    if s <= 0:
        return (A.astype(object) @ B.astype(object) % p).astype(np.int64)
    if (p - 1).bit_length() <= s:
        return (A.astype(np.float64) @ Bf).astype(np.int64) % p
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    mask = (1 << s) - 1
    rest = A.copy()
    scale = 1
    while rest.any():
        digit = (rest & mask).astype(np.float64)
        part = (digit @ Bf).astype(np.int64) % p
        out = (out + part * scale) % p
        rest >>= s
        scale = scale * (1 << s) % p
    return out


class _Composer:
    """g(h) mod F for a fixed inner h, by Brent-Kung baby and giant steps."""

    def __init__(self, ring: _QuotientRing, h: np.ndarray):
        self.ring = ring
        D = ring.D
        m = math.isqrt(D - 1) + 1
        pows = np.zeros((m, D), dtype=np.int64)
        pows[0, 0] = 1
        cur = pows[0]
        for j in range(1, m):
            cur = _pad(ring.mul(cur, h), D)
            pows[j] = cur
        self.m = m
        self.pows = pows
        self.giant = _pad(ring.mul(cur, h), D)

    def __call__(self, g: np.ndarray) -> np.ndarray:
        ring, m, p = self.ring, self.m, self.ring.p
        blocks = -(-len(g) // m)
        G = np.zeros(blocks * m, dtype=np.int64)
        G[: len(g)] = g
        V = _matmul_mod(G.reshape(blocks, m), self.pows, p)
        acc = V[-1]
        for i in range(blocks - 2, -1, -1):
            acc = (_pad(ring.mul(acc, self.giant), ring.D) + V[i]) % p
        return acc


class _FrobeniusOrbit:
    """X^(p^k) mod F, built from X^p by the rule X^(p^(a+b)) = X^(p^a) composed with X^(p^b)."""

    def __init__(self, ring: _QuotientRing):
        self.ring = ring
        x = _pad(np.array([0, 1], dtype=np.int64), ring.D)
        self.cache = {0: x, 1: ring.pow(x, ring.p)}
        self._composers = {}

    def _composer(self, k):
        if k not in self._composers:
            self._composers[k] = _Composer(self.ring, self.get(k))
        return self._composers[k]

    def get(self, k: int) -> np.ndarray:
        if k not in self.cache:
            half = k // 2
            h = self._composer(half)(self.get(half))
            if k & 1:
                h = self._composer(1)(h)
            self.cache[k] = h
        return self.cache[k]


def rabin_irreducible(fp: ModPoly, cap: int = DEFAULT_RABIN_CAP) -> bool:
    """Irreducibility over F_p by Rabin's test.

    F of degree D is irreducible iff X^(p^D) = X mod F and
    gcd(X^(p^(D/r)) - X, F) = 1 for every prime r | D.
    """
    D = fp.degree
    if D < 1:
        raise ValueError("Rabin test needs degree >= 1")
    if D > cap:
        raise DegreeCapExceeded(f"degree {D} exceeds Rabin cap {cap}")
    if D == 1:
        return True
    p = fp.p
    F = np.array(fp.monic().coeffs, dtype=np.int64)
    orbit = _FrobeniusOrbit(_QuotientRing(F, p))
    x = orbit.get(0)
    for r in sorted(primefactors(D), reverse=True):
        h = orbit.get(D // r)
        diff = h.copy()
        diff[1] = (diff[1] - 1) % p
        if not _gcd_is_one(F, diff, p):
            return False
    return bool(np.array_equal(orbit.get(D), x))


def iterate_mod_p(f: IntPoly, p: int, n: int) -> ModPoly:
    """f^(n) mod p, expanded."""
    fc = [c % p for c in f.coeffs]
    g = np.array([0, 1], dtype=np.int64)
    for _ in range(n):
        g = _compose(fc, g, p)
    return ModPoly(p, tuple(int(c) for c in g))


def _compose(outer: Sequence[int], inner: np.ndarray, p: int) -> np.ndarray:
    acc = np.zeros(0, dtype=np.int64)
    for c in reversed(outer):
        acc = _mul(acc, inner, p) if len(acc) else acc
        if len(acc) == 0:
            acc = np.array([c % p], dtype=np.int64)
        else:
            acc[0] = (acc[0] + c) % p
    return _trim(acc)


# ---------------------------------------------------------------------------
# small-degree list arithmetic mod p (for F_p[X]/(f'))


def _lstrip(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _lmod(a, m, p):
    """a mod m over F_p; m has nonzero leading coefficient."""
    a = list(a)
    dm = len(m) - 1
    inv = pow(m[-1], -1, p)
    while len(a) - 1 >= dm:
        c = a[-1] * inv % p
        s = len(a) - 1 - dm
        if c:
            for j in range(dm + 1):
                a[s + j] = (a[s + j] - c * m[j]) % p
        a.pop()
        _lstrip(a)
    return a


def _lmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _lstrip([c % p for c in out])


def res_mod_p(a: Sequence[int], b: Sequence[int], p: int) -> int:
    """Res(a, b) mod p by the Euclidean recursion.

    Uses Res(A, B) = (-1)^(deg A deg B) lc(B)^(deg A - deg R) Res(B, R)
    with R = A mod B, and Res(A, c) = c^deg A for a constant c.
    """
    a = _lstrip([x % p for x in a])
    b = _lstrip([x % p for x in b])
    if not a or not b:
        return 0
    acc = 1
    while True:
        da, db = len(a) - 1, len(b) - 1
        if db == 0:
            return acc * pow(b[0], da, p) % p
        r = _lmod(a, b, p)
        if not r:
            return 0
        if da & 1 and db & 1:
            acc = -acc
        acc = acc * pow(b[-1], da - (len(r) - 1), p) % p
        a, b = b, r


# ---------------------------------------------------------------------------
# the certificate


class Reason(str, enum.Enum):
    DISC_SQUARE = "disc_square"
    CHARACTER_VIOLATION = "character_violation"
    SHARED_ROOT = "shared_root"
    RABIN_REDUCIBLE = "rabin_reducible"


@dataclass(frozen=True)
class Eliminated:
    at_n: int
    reason: Reason


@dataclass(frozen=True)
class SurvivedToDepth:
    n_max: int


@dataclass(frozen=True)
class StabilityVerdict:
    p: int
    outcome: Optional[object]
    bad_reduction: bool = False
    # largest n whose expanded iterate went through Rabin (0: none)
    rabin_checked_to: int = field(default=0, compare=False)

    @property
    def survived(self) -> bool:
        return isinstance(self.outcome, SurvivedToDepth)

    def record(self) -> dict:
        """The JSONL record for this verdict."""
        if self.bad_reduction:
            return {"p": self.p, "verdict": "bad_reduction", "n": None, "reason": None}
        if isinstance(self.outcome, Eliminated):
            return {"p": self.p, "verdict": "eliminated", "n": self.outcome.at_n,
                    "reason": self.outcome.reason.value}
        return {"p": self.p, "verdict": "survived", "n": None, "reason": None}


class _Prepared(NamedTuple):
    f: IntPoly
    d: int
    fprime: IntPoly
    disc: int
    bad_modulus: int


@functools.lru_cache(maxsize=64)
def _prepare(f: IntPoly) -> _Prepared:
    if f.degree < 2:
        raise ValueError("stability certificate needs degree >= 2")
    disc = discriminant(f)
    assert disc.denominator == 1
    disc = disc.numerator
    fprime = f.derivative()
    return _Prepared(f, f.degree, fprime, disc, 2 * f.lc * fprime.lc * disc)


def is_bad_prime(f: IntPoly, p: int) -> bool:
    """p | 2 f_d lc(f') Disc(f); Disc(f) = 0 makes every prime bad."""
    return _prepare(f).bad_modulus % p == 0


def _char_stream(f: IntPoly, p: int) -> Iterator[tuple]:
    """Yield (n, (f_d Res(f^(n), f') / p)) for n = 1, 2, ..."""
    fd = f.lc % p
    fprime = [c % p for c in f.derivative().coeffs]
    if len(fprime) - 1 != f.degree - 1:
        raise BadReduction(p)
    k = len(fprime) - 1
    lcp = fprime[-1]
    fc = [c % p for c in f.coeffs]
    big_d = 1
    n = 0
    if k == 1:
        beta = (-fprime[0]) * pow(lcp, -1, p) % p
        y = beta
        while True:
            acc = 0
            for c in reversed(fc):
                acc = (acc * y + c) % p
            y = acc
            n += 1
            big_d *= f.degree
            if y == 0:
                yield n, 0
                continue
            # Res(A, f') = (-1)^deg A lc'^deg A A(beta)
            res = pow(lcp, big_d, p) * y % p
            if big_d & 1:
                res = -res
            yield n, legendre(fd * res, p)
    y = _lmod([0, 1], fprime, p)
    while True:
        acc = []
        for c in reversed(fc):
            acc = _lmul(acc, y, p)
            if acc:
                acc[0] = (acc[0] + c) % p
            elif c:
                acc = [c]
            acc = _lmod(_lstrip(acc), fprime, p)
        y = acc
        n += 1
        big_d *= f.degree
        if not y:
            yield n, 0
            continue
        res = res_mod_p(fprime, y, p) * pow(lcp, big_d - (len(y) - 1), p) % p
        if (big_d * k) & 1:
            res = -res
        yield n, legendre(fd * res, p)


def iter_resultant_chars(f: IntPoly, p: int, n_max: int) -> dict:
    """{n: Legendre symbol of f_d * Res(f^(n), f') mod p} for 2 <= n <= n_max."""
    if p % 2 == 0:
        raise EvenModulus("p must be odd")
    if f.lc % p == 0 or f.derivative().lc % p == 0:
        raise BadReduction(p)
    out = {}
    for n, s in _char_stream(f, p):
        if n > n_max:
            break
        if n >= 2:
            out[n] = s
    return out


def required_sign(f: IntPoly, p: int) -> int:
    """The constant character value that dynamical irreducibility forces."""
    d = f.degree
    if d % 2 == 0:
        return -1
    return legendre((-1) ** ((d - 1) // 2), p)


def stability_scan_single(f: IntPoly, p: int, depth: int,
                          rabin_cap: int = DEFAULT_RABIN_CAP) -> StabilityVerdict:
    """Depth-limited evidence about whether f mod p is dynamically irreducible.

    Order of tests: discriminant square class, Rabin on f mod p, then for
    n = 2..depth the resultant character and (within the cap) Rabin on the
    expanded iterate. The first failure eliminates p at that n.
    """
    prep = _prepare(f)
    if p % 2 == 0 or prep.bad_modulus % p == 0:
        return StabilityVerdict(p, None, bad_reduction=True)
    d = prep.d
    want = required_sign(f, p)
    disc_char = legendre(prep.disc, p)
    if (d % 2 == 0 and disc_char == 1) or (d % 2 == 1 and disc_char == -1):
        return StabilityVerdict(p, Eliminated(1, Reason.DISC_SQUARE))
    rabin_to = 0
    fc = [c % p for c in f.coeffs]
    expanded = None
    if d <= rabin_cap:
        expanded = np.array(fc, dtype=np.int64)
        rabin_to = 1
        if not rabin_irreducible(ModPoly(p, fc), rabin_cap):
            return StabilityVerdict(p, Eliminated(1, Reason.RABIN_REDUCIBLE), rabin_checked_to=1)
    degree = d
    for n, s in _char_stream(f, p):
        if n > depth:
            break
        if n < 2:
            continue
        if s == 0:
            return StabilityVerdict(p, Eliminated(n, Reason.SHARED_ROOT), rabin_checked_to=rabin_to)
        if s != want:
            return StabilityVerdict(p, Eliminated(n, Reason.CHARACTER_VIOLATION),
                                    rabin_checked_to=rabin_to)
        degree *= d
        if expanded is not None and degree <= rabin_cap:
            expanded = _compose(fc, expanded, p)
            rabin_to = n
            if not rabin_irreducible(ModPoly(p, tuple(int(c) for c in expanded)), rabin_cap):
                return StabilityVerdict(p, Eliminated(n, Reason.RABIN_REDUCIBLE),
                                        rabin_checked_to=rabin_to)
    return StabilityVerdict(p, SurvivedToDepth(depth), rabin_checked_to=rabin_to)

"""Prime ranges, Selberg weights, window sets and the character sums S, T."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BudgetExceeded, SquareModulus
from .exactalg import IntPoly, ResDecomp, res_decompose
from .modp import is_bad_prime, iter_resultant_chars, jacobi

SEGMENT = 1 << 18
EXACT_WEIGHTS_MAX_Z = 1000
DEFAULT_WINDOW_BUDGET = 1 << 16
DEFAULT_N_PARAM = 2
DEFAULT_WINDOW_DEGREE = 1 << 14


# --- primes -----------------------------------------------------------------


def _small_primes(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_in(lo: int, hi: int) -> list:
    """Primes in [lo, hi], ascending, by a segmented sieve of Eratosthenes."""
    lo = max(lo, 2)
    if hi < lo:
        return []
    base = _small_primes(math.isqrt(hi))
    out = []
    for start in range(lo, hi + 1, SEGMENT):
        stop = min(start + SEGMENT, hi + 1)
        flags = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            flags[first - start::p] = False
        if start < 2:
            flags[: 2 - start] = False
        out.extend((np.flatnonzero(flags) + start).tolist())
    return out


def prime_count(lo: int, hi: int) -> int:
    return len(primes_in(lo, hi))


# --- Selberg weights ---------------------------------------------------------


def _squarefree_factors(z: int) -> dict:
    """{r: (primes of r)} for squarefree 1 <= r <= z."""
    spf = list(range(z + 1))
    for p in range(2, math.isqrt(z) + 1):
        if spf[p] == p:
            for m in range(p * p, z + 1, p):
                if spf[m] == m:
                    spf[m] = p
    out = {1: ()}
    for r in range(2, z + 1):
        p = spf[r]
        rest = r // p
        if rest in out and rest % p != 0:
            out[r] = (p,) + out[rest]
    return out


@dataclass(frozen=True)
class SelbergWeights:
    z: int
    inner: dict  # r -> Lambda_r
    combined: dict  # e -> lambda^+_e (nonzero entries only)
    exact: bool
    primes: tuple  # primes <= z

    def smooth_divisors(self, q: int) -> list:
        """Squarefree divisors of q built from primes <= z."""
        divs = [1]
        for p in self.primes:
            if q % p == 0:
                divs += [d * p for d in divs]
        return divs


def selberg_weights(z: int, exact: bool | None = None) -> SelbergWeights:
    """Classical Selberg upper-bound weights of level z.

    With h(r) = prod_{p|r} 1/(p-1) and G(y) = sum_{r<=y} mu^2(r) h(r):
    Lambda_r = mu(r) (r/phi(r)) G_r(z/r) / G(z), where G_r only counts
    t coprime to r, and lambda^+_e = sum_{lcm(r,s)=e} Lambda_r Lambda_s.
    """
    z = int(z)
    if z < 2:
        raise ValueError("level z must be >= 2")
    if exact is None:
        exact = z <= EXACT_WEIGHTS_MAX_Z
    sqf = _squarefree_factors(z)
    one = Fraction(1) if exact else 1.0

    def h(r):
        den = 1
        for p in sqf[r]:
            den *= p - 1
        return one / den

    hs = {r: h(r) for r in sqf}
    G = sum(hs.values())
    inner = {}
    for r, ps in sqf.items():
        rset = set(ps)
        acc = sum(hs[t] for t in sqf if t <= z // r and not rset.intersection(sqf[t]))
        ratio = one
        for p in ps:
            ratio = ratio * p / (p - 1)
        mu = -1 if len(ps) & 1 else 1
        inner[r] = mu * ratio * acc / G
    combined = _combine(inner, exact)
    primes = tuple(r for r, ps in sqf.items() if len(ps) == 1)
    return SelbergWeights(z, inner, combined, exact, primes)


def _combine(inner: dict, exact: bool) -> dict:
    items = sorted(inner.items())
    acc: dict = {}
    if exact:
        # common denominator keeps the quadratic expansion in integers
        den = math.lcm(*(v.denominator for _, v in items))
        nums = [(r, int(v * den)) for r, v in items]
        for i, (r, a) in enumerate(nums):
            acc[r] = acc.get(r, 0) + a * a
            for s, b in nums[i + 1:]:
                e = r * s // math.gcd(r, s)
                acc[e] = acc.get(e, 0) + 2 * a * b
        d2 = den * den
        return {e: Fraction(v, d2) for e, v in sorted(acc.items()) if v}
    for i, (r, a) in enumerate(items):
        acc[r] = acc.get(r, 0.0) + a * a
        for s, b in items[i + 1:]:
            e = r * s // math.gcd(r, s)
            acc[e] = acc.get(e, 0.0) + 2 * a * b
    return {e: v for e, v in sorted(acc.items()) if v}


def sieve_indicator_sum(q: int, W: SelbergWeights):
    """sum_{e | q} lambda^+_e."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return sum(W.combined.get(e, 0) for e in W.smooth_divisors(q))


def inner_square(q: int, W: SelbergWeights):
    """(sum_{r | q, r <= z} Lambda_r)^2, the quadratic form behind the weights."""
    s = sum(W.inner.get(r, 0) for r in W.smooth_divisors(q))
    return s * s


def sifted_sum(lo: int, hi: int, W: SelbergWeights):
    """sum_{q in [lo, hi]} sum_{e | q} lambda^+_e, summed by e."""
    return sum(v * (hi // e - (lo - 1) // e) for e, v in W.combined.items())


def abs_weight_mass(W: SelbergWeights):
    return sum(abs(v) for v in W.combined.values())


def default_level(q: int) -> int:
    """floor(Q^(1/4)), at least 2."""
    z = math.isqrt(math.isqrt(q))
    return max(z, 2)


# --- window sets --------------------------------------------------------------


@dataclass(frozen=True)
class WindowSets:
    N_param: int
    t: int
    decomp: dict  # n -> ResDecomp
    N_set: tuple
    M_set: tuple
    residue_class: tuple  # (u mod 4, nu mod 2) shared by N_set
    sign: int  # common sign of u over M_set


def build_window_sets(f: IntPoly, N_param: int, t: int,
                      budget: int = DEFAULT_WINDOW_BUDGET) -> WindowSets:
    """Pigeonhole n in [N, N+t] on (u_n mod 4, nu_n mod 2), then on sign(u_n)."""
    if N_param < 2 or t < 1:
        raise ValueError("need N_param >= 2 and t >= 1")
    if f.degree ** (N_param + t) > budget:
        raise BudgetExceeded(f"deg f^({N_param + t}) exceeds window budget {budget}")
    decomp = {n: res_decompose(f, n) for n in range(N_param, N_param + t + 1)}
    classes: dict = {}
    for n, rd in decomp.items():
        classes.setdefault(2 * (rd.u % 4) + rd.nu % 2, []).append(n)
    idx = min(classes, key=lambda i: (-len(classes[i]), i))
    n_set = tuple(classes[idx])
    pos = tuple(n for n in n_set if decomp[n].u > 0)
    neg = tuple(n for n in n_set if decomp[n].u < 0)
    m_set, sign = (pos, 1) if len(pos) >= len(neg) else (neg, -1)
    ws = WindowSets(N_param, t, decomp, n_set, m_set, (idx // 2, idx % 2), sign)
    check_window_invariants(ws)
    return ws


def default_t(d: int, N_param: int = DEFAULT_N_PARAM) -> int:
    """Largest t >= 1 with d^(N_param + t) <= 2^14 (1 if none)."""
    t = 1
    while d ** (N_param + t + 1) <= DEFAULT_WINDOW_DEGREE:
        t += 1
    return t


def check_window_invariants(ws: WindowSets):
    t = ws.t
    assert len(ws.N_set) >= -(-t // 4), "pigeonhole bound #N >= t/4 violated"
    assert 8 * len(ws.M_set) >= t
    assert 2 * len(ws.M_set) >= len(ws.N_set)
    for r, s in combinations(ws.N_set, 2):
        a, b = ws.decomp[r], ws.decomp[s]
        assert (a.u + b.u) % 4 == 2 and (a.nu + b.nu) % 2 == 0
        for m in range(3, 100, 2):
            e = ((a.u + b.u - 2) // 2) * ((m - 1) // 2) + (a.nu + b.nu) * (m * m - 1) // 8
            assert e % 2 == 0
    for m, n in combinations(ws.M_set, 2):
        assert ws.decomp[m].u * ws.decomp[n].u > 0


# --- character sums -----------------------------------------------------------


class SResult(NamedTuple):
    S: int
    per_prime: dict  # p -> inner sum over M
    skipped: tuple  # bad-reduction primes left out


def flipped_character(rd: ResDecomp, p: int) -> int:
    """(f_d Res(f^(n), f') / p) rewritten by reciprocity as a symbol mod |u_n|."""
    e = ((rd.u - 1) // 2) * ((p - 1) // 2) + rd.nu * (p * p - 1) // 8
    return (-1 if e & 1 else 1) * jacobi(p, rd.u)


def compute_S(f: IntPoly, q_lo: int, q_hi: int, ws: WindowSets, mode: str = "direct") -> SResult:
    """S = sum over good primes p in [q_lo, q_hi] of (sum_{n in M} char_n(p))^2."""
    if not ws.M_set:
        raise ValueError("M_set is empty")
    if mode not in ("direct", "flipped"):
        raise ValueError(f"unknown mode {mode!r}")
    per_prime = {}
    skipped = []
    n_max = max(ws.M_set)
    for p in primes_in(max(q_lo, 3), q_hi):
        if is_bad_prime(f, p):
            skipped.append(p)
            continue
        if mode == "direct":
            chars = iter_resultant_chars(f, p, n_max)
            inner = sum(chars[n] for n in ws.M_set)
        else:
            inner = sum(flipped_character(ws.decomp[n], p) for n in ws.M_set)
        per_prime[p] = inner
    S = sum(v * v for v in per_prime.values())
    return SResult(S, per_prime, tuple(skipped))


def weighted_progression_sum(q_lo: int, q_hi: int, modulus: int, W: SelbergWeights):
    """sum_e lambda^+_e sum_{q in [q_lo, q_hi], e | q} (q / modulus)."""
    chi = [jacobi(q, modulus) for q in range(q_lo, q_hi + 1)]
    total = 0
    for e, lam in W.combined.items():
        first = -(-q_lo // e) * e
        s = sum(chi[first - q_lo::e])
        if s:
            total += lam * s
    return total


def compute_T(f: IntPoly, q_lo: int, q_hi: int, ws: WindowSets, W: SelbergWeights):
    """Off-diagonal part of the Selberg-weighted expansion of S (ordered pairs n1 != n2)."""
    us = [ws.decomp[n].u for n in ws.M_set]
    return pair_sum_T(q_lo, q_hi, us, W)


def pair_sum_T(q_lo: int, q_hi: int, us: Sequence[int], W: SelbergWeights):
    total = 0
    for a, b in combinations(us, 2):
        if a * b <= 0:
            raise ValueError("u values over M must share one sign")
        # the (n1, n2) and (n2, n1) terms are equal
        total += 2 * weighted_progression_sum(q_lo, q_hi, a * b, W)
    return total


# --- Polya-Vinogradov and GRH-shaped sums -------------------------------------


def _check_nonsquare_modulus(v: int):
    r = math.isqrt(v)
    if r * r == v:
        raise SquareModulus(f"{v} is a perfect square")


def pv_progression_sum(e: int, K: int, v: int) -> int:
    """sum_{k <= K, e | k} (k / v)."""
    if e < 1 or K < 1:
        raise ValueError("need e, K >= 1")
    if v < 3 or v % 2 == 0:
        raise ValueError("v must be odd and >= 3")
    _check_nonsquare_modulus(v)
    direct = sum(jacobi(k, v) for k in range(e, K + 1, e))
    if math.gcd(e, v) == 1:
        factored = jacobi(e, v) * sum(jacobi(m, v) for m in range(1, K // e + 1))
        assert factored == direct
    else:
        assert direct == 0
    return direct


def pv_envelope(v: int) -> float:
    return math.sqrt(v) * (math.log(v) + 2)


def prime_char_sum(q: int, M_bound: int) -> int:
    """sum_{p <= M_bound} (p / q)."""
    if q < 2:
        raise ValueError("q must be >= 2")
    _check_nonsquare_modulus(q)
    if M_bound < 2:
        return 0
    return sum(jacobi(p, q) for p in primes_in(2, M_bound))


def grh_envelope(q: int, M: int) -> float:
    return math.sqrt(M) * math.log(q * M)

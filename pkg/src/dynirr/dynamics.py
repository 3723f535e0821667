"""Rational orbits, the classes P1/P2/P3, and square-product searches."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from sympy import factorint

from .errors import ClassMismatch
from .exactalg import (
    IntPoly,
    iterate,
    rational_valuation,
    res_decompose,
    resultant,
    squarefree_decompose,
)

DEFAULT_MAX_STEPS = 10_000


# --- orbit certificates -----------------------------------------------------


@dataclass(frozen=True)
class Preperiodic:
    tail_length: int
    cycle_length: int
    orbit: tuple


@dataclass(frozen=True)
class RealEscape:
    step: int


@dataclass(frozen=True)
class ValuationEscape:
    prime: int
    step: int


@dataclass(frozen=True)
class NotPreperiodic:
    certificate: object


@dataclass(frozen=True)
class Undecided:
    steps_taken: int


def escape_radius(f: IntPoly) -> Fraction:
    """B with |x| >= B  =>  |f(x)| >= 2|x|."""
    tail = sum(abs(c) for c in f.coeffs[:-1])
    return max(Fraction(1), Fraction(2 + tail, abs(f.lc)))


def _strip_primes_of(den: int, m: int) -> int:
    """den with every prime factor shared with m removed."""
    g = math.gcd(den, m)
    while g > 1:
        while den % g == 0:
            den //= g
        g = math.gcd(den, m)
    return den


def _smallest_prime_factor(m: int) -> int:
    return min(factorint(m))


def is_preperiodic(f: IntPoly, x0, max_steps: int = DEFAULT_MAX_STEPS):
    """Decide whether the forward orbit of x0 is finite.

    Three sound certificates: a repeated value, escape past the real radius
    B, or a denominator prime p with v_p(x) < -v_p(f_d) (its valuation then
    falls strictly every step). Primes not dividing f_d are tried first. Escape certificates are checked on f(x0), f(f(x0)),
    ...; step counts index the orbit with x0 at step 0.
    """
    if f.degree < 2:
        raise ValueError("orbit analysis needs degree >= 2")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    x = Fraction(x0)
    bound = escape_radius(f)
    lc_primes = sorted(factorint(abs(f.lc)).items())
    seen = {x: 0}
    orbit = [x]
    for step in range(1, max_steps + 1):
        x = f(x)
        if x in seen:
            tail = seen[x]
            return Preperiodic(tail, step - tail, tuple(orbit))
        if abs(x) >= bound:
            assert abs(f(x)) >= 2 * abs(x)
            return NotPreperiodic(RealEscape(step))
        rest = _strip_primes_of(x.denominator, f.lc)
        if rest > 1:
            p = _smallest_prime_factor(rest)
            vx = rational_valuation(x, p)
            assert rational_valuation(f(x), p) == f.degree * vx < 0
            return NotPreperiodic(ValuationEscape(p, step))
        # p | f_d still escapes once v_p(x) < -v_p(f_d): the leading term dominates
        for p, e in (lc_primes if x else ()):
            vx = rational_valuation(x, p)
            if vx < -e:
                assert rational_valuation(f(x), p) == e + f.degree * vx < vx
                return NotPreperiodic(ValuationEscape(p, step))
        seen[x] = step
        orbit.append(x)
    return Undecided(max_steps)


# --- classification ---------------------------------------------------------


@dataclass(frozen=True)
class P1Witness:
    """f' = g^2 (aX + b)."""

    g: IntPoly
    a: int
    b: int


@dataclass(frozen=True)
class ClassInfo:
    in_P1: bool
    in_P2: bool
    in_P3: bool
    p1_witness: Optional[P1Witness]
    gamma: Optional[Fraction]
    gamma_preperiodic: Optional[object]
    zero_preperiodic: object
    undecided: tuple = field(default=())

    @property
    def hypothesis_holds(self) -> bool:
        """f in P1 or P2 with gamma certified not pre-periodic."""
        return (self.in_P1 or self.in_P2) and isinstance(self.gamma_preperiodic, NotPreperiodic)

    def to_dict(self) -> dict:
        w = self.p1_witness
        return {
            "P1": self.in_P1,
            "P2": self.in_P2,
            "P3": self.in_P3,
            "p1_witness": None if w is None else {"g": str(w.g), "a": w.a, "b": w.b},
            "gamma": None if self.gamma is None else str(self.gamma),
            "gamma_orbit": describe_orbit(self.gamma_preperiodic),
            "zero_orbit": describe_orbit(self.zero_preperiodic),
            "undecided": list(self.undecided),
        }


def describe_orbit(res) -> Optional[dict]:
    if res is None:
        return None
    if isinstance(res, Preperiodic):
        return {"status": "preperiodic", "tail": res.tail_length, "cycle": res.cycle_length,
                "orbit": [str(x) for x in res.orbit]}
    if isinstance(res, NotPreperiodic):
        c = res.certificate
        if isinstance(c, RealEscape):
            return {"status": "not_preperiodic", "certificate": "real_escape", "step": c.step}
        return {"status": "not_preperiodic", "certificate": "valuation_escape",
                "prime": c.prime, "step": c.step}
    return {"status": "undecided", "steps": res.steps_taken}


def _squarefree_split(c: int):
    """c = c0 * c1^2 with c0 squarefree (sign kept in c0)."""
    c0, c1 = (-1 if c < 0 else 1), 1
    for p, e in factorint(abs(c)).items():
        c1 *= p ** (e // 2)
        if e & 1:
            c0 *= p
    return c0, c1


def p1_witness(f: IntPoly) -> Optional[P1Witness]:
    """Integers g, a, b with f' = g^2 (aX+b), a != 0, if they exist."""
    fprime = f.derivative()
    content, factors = squarefree_decompose(fprime)
    odd = [s for s, m in factors if m % 2 == 1]
    if len(odd) != 1 or odd[0].degree != 1:
        return None
    c0, c1 = _squarefree_split(content)
    g = IntPoly((c1,))
    for s, m in factors:
        g = g * s ** (m // 2)
    lin = odd[0] * c0
    b, a = lin.coeffs
    assert g * g * lin == fprime
    return P1Witness(g, a, b)


def _is_p2_shape(f: IntPoly) -> bool:
    c = f.coeffs
    d = f.degree
    return d >= 2 and c[d] != 0 and c[d - 1] != 0 and all(x == 0 for x in c[1:d - 1])


def classify(f: IntPoly, max_steps: int = DEFAULT_MAX_STEPS) -> ClassInfo:
    if f.degree < 2:
        raise ValueError("classification needs degree >= 2")
    d = f.degree
    undecided = []
    zero = is_preperiodic(f, 0, max_steps)
    if isinstance(zero, Undecided):
        undecided.append("zero")
    zero_pre = isinstance(zero, Preperiodic)
    w = p1_witness(f)
    in_p1 = w is not None
    in_p2 = _is_p2_shape(f) and zero_pre
    gamma = None
    if in_p1:
        gamma = Fraction(-w.b, w.a)
    elif in_p2:
        gamma = Fraction(-f.coeffs[d - 1] * (d - 1), d * f.lc)
    gamma_res = None
    if gamma is not None:
        gamma_res = is_preperiodic(f, gamma, max_steps)
        if isinstance(gamma_res, Undecided):
            undecided.append("gamma")
    return ClassInfo(
        in_P1=in_p1,
        in_P2=in_p2,
        in_P3=in_p1 and zero_pre,
        p1_witness=w,
        gamma=gamma,
        gamma_preperiodic=gamma_res,
        zero_preperiodic=zero,
        undecided=tuple(undecided),
    )


# --- Eisenstein family ------------------------------------------------------


def eisenstein_member(a: int, c: int, d: int):
    """f = aX^d - acX^(d-1) + c and the smallest prime p with p!a, p|c, p^2!c."""
    if a == 0 or c == 0 or d < 2:
        raise ValueError("need a != 0, c != 0, d >= 2")
    coeffs = [0] * (d + 1)
    coeffs[d] = a
    coeffs[d - 1] = -a * c
    coeffs[0] += c
    f = IntPoly(coeffs)
    witness = None
    for p, e in sorted(factorint(abs(c)).items()):
        if e == 1 and a % p != 0:
            witness = p
            break
    return f, witness


# --- square products ---------------------------------------------------------


def find_square_products(f: IntPoly, n_lo: int, n_hi: int, check_hypothesis: bool = True,
                         method: str = "quotient"):
    """Pairs m < n in [n_lo, n_hi] with |u_m u_n| a perfect square."""
    if n_lo >= n_hi:
        return []
    if n_lo < 2:
        raise ValueError("n_lo must be >= 2")
    if check_hypothesis and not classify(f).hypothesis_holds:
        raise ClassMismatch("f must be in P1 or P2 with gamma not pre-periodic")
    us = {n: abs(res_decompose(f, n, method).u) for n in range(n_lo, n_hi + 1)}
    out = []
    for m in range(n_lo, n_hi + 1):
        for n in range(m + 1, n_hi + 1):
            prod = us[m] * us[n]
            if math.isqrt(prod) ** 2 == prod:
                out.append((m, n))
    return out


def res_product_sides(f: IntPoly, m: int, n: int):
    """Both sides of the P2 product formula for Res(f^(m) f^(n), f')."""
    info = classify(f)
    if not info.in_P2:
        raise ClassMismatch(f"{f} is not in P2")
    if not 2 <= m < n:
        raise ValueError("need 2 <= m < n")
    d, fd = f.degree, f.lc
    gamma = Fraction(-f.coeffs[d - 1] * (d - 1), d * fd)
    fm, fn = iterate(f, m), iterate(f, n)
    lhs = resultant(fm * fn, f.derivative())
    e = d**m + d**n
    sign = -1 if ((d - 1) * e) & 1 else 1
    rhs = sign * Fraction(d * fd) ** e * Fraction(fm(0) * fn(0)) ** (d - 2) * fm(gamma) * fn(gamma)
    return lhs, rhs


def verify_res_product_formula(f: IntPoly, m: int, n: int) -> bool:
    lhs, rhs = res_product_sides(f, m, n)
    return lhs == rhs

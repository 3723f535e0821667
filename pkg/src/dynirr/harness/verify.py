"""Cross-module invariant checks, run with a fixed randomness seed."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..dynamics import res_product_sides
from ..exactalg import (
    IntPoly,
    RatPoly,
    divide_with_remainder,
    iterate,
    iterate_resultant,
    res_decompose,
    resultant,
    sylvester_resultant,
)
from ..modp import iter_resultant_chars, is_bad_prime, jacobi, legendre
from ..sieve import build_window_sets, compute_S, inner_square, pv_envelope, selberg_weights, sieve_indicator_sum

DEFAULT_SEED = 20240101


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class VerifyReport:
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        out = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            out.append(f"[{tag}] {c.name} ({c.seconds:.2f}s) {c.detail}".rstrip())
        return out


def _random_poly(rng: random.Random, d: int, bound: int = 5) -> IntPoly:
    c = [rng.randint(-bound, bound) for _ in range(d)]
    c.append(rng.choice([x for x in range(-bound, bound + 1) if x]))
    return IntPoly(c)


# --- individual checks --------------------------------------------------------


def check_jacobi(rng: random.Random) -> str:
    for _ in range(1000):
        a, b = rng.randrange(-10**6, 10**6), rng.randrange(-10**6, 10**6)
        v = rng.randrange(1, 10**6) | 1
        assert jacobi(a * b, v) == jacobi(a, v) * jacobi(b, v), (a, b, v)
    for _ in range(1000):
        m = rng.randrange(3, 10**9) | 1
        n = rng.randrange(3, 10**9) | 1
        if math.gcd(m, n) != 1:
            continue
        sign = -1 if ((m - 1) // 2) * ((n - 1) // 2) & 1 else 1
        assert jacobi(m, n) * jacobi(n, m) == sign, (m, n)
    for p in (3, 5, 7, 101, 7919):
        for a in range(p):
            euler = pow(a, (p - 1) // 2, p)
            assert legendre(a, p) == (euler if euler < 2 else -1)
    return "multiplicativity, reciprocity, Euler criterion"


def check_resultants(rng: random.Random) -> str:
    for _ in range(100):
        g = _random_poly(rng, rng.randint(1, 6))
        h = _random_poly(rng, rng.randint(1, 6))
        r = resultant(g, h)
        assert r == sylvester_resultant(g, h), (g, h)
        assert resultant(h, g) == (-1) ** (g.degree * h.degree) * r
    return "subresultant = Sylvester, antisymmetry on 100 pairs"


def check_product_formula(rng: random.Random) -> str:
    # 2x^3-3x^2+1 makes both sides vanish (0 -> 1 -> 0); x^4-2x^3+2 does not
    out = []
    for f in (IntPoly((1, 0, -3, 2)), IntPoly((2, 0, 0, -2, 1))):
        lhs, rhs = res_product_sides(f, 2, 3)
        assert lhs == rhs, (f, lhs, rhs)
        out.append(f"{f}: {'zero' if lhs == 0 else 'nonzero'}")
    return ", ".join(out)


def check_division_identity(rng: random.Random) -> str:
    # f^(n) = f^(n-m) o f^(m), so f^(n) mod f^(m) is the constant f^(n-m)(0)
    count = 0
    for _ in range(20):
        f = _random_poly(rng, rng.choice((2, 3)), 3)
        its = [IntPoly.x()] + [iterate(f, n) for n in range(1, 6)]
        for n in range(2, 6):
            for m in range(1, n):
                _, r = divide_with_remainder(its[n], its[m])
                assert r == RatPoly((its[n - m](0),)), (f, m, n)
                count += 1
    return f"{count} (f, m, n) triples"


def check_selberg(rng: random.Random) -> str:
    for z in (2, 3, 10, 30):
        W = selberg_weights(z)
        for e in W.combined:
            assert e <= z * z and all(e % (p * p) for p in W.primes)
            assert _is_smooth(e, z), e
        for q in range(1, 2001):
            assert sieve_indicator_sum(q, W) == inner_square(q, W), (z, q)
        for _ in range(200):
            q = rng.randrange(2001, 10**7)
            assert sieve_indicator_sum(q, W) == inner_square(q, W), (z, q)
    return "support and quadratic form at z in {2, 3, 10, 30}"


def _is_smooth(e: int, z: int) -> bool:
    for p in range(2, z + 1):
        while e % p == 0:
            e //= p
    return e == 1


def pv_sweep(v_max: int = 2001, e_max: int = 10, K_max: int = 10**5):
    """Worst ratio |sum_{k<=K, e|k} (k/v)| / envelope(v) over the whole grid.

    Partial sums over all K <= K_max are taken at once with a cumulative sum
    of the periodic character table. Returns (violations, worst ratio).
    """
    violations = []
    worst = 0.0
    for v in range(3, v_max + 1, 2):
        if math.isqrt(v) ** 2 == v:
            continue
        table = np.array([jacobi(k, v) for k in range(v)], dtype=np.int64)
        env = pv_envelope(v)
        for e in range(1, e_max + 1):
            ks = np.arange(e, K_max + 1, e, dtype=np.int64)
            peak = int(np.abs(np.cumsum(table[ks % v])).max())
            worst = max(worst, peak / env)
            if peak > env:
                violations.append((v, e, peak))
    return violations, worst


def check_pv(rng: random.Random) -> str:
    violations, worst = pv_sweep()
    assert not violations, f"{len(violations)} violations, first {violations[0]}"
    return f"worst |sum| / envelope = {worst:.4f}"


def check_paths(rng: random.Random) -> str:
    count = 0
    for d in (2, 3, 4):
        for _ in range(3):
            f = _random_poly(rng, d, 3)
            for n in range(1, 7 if d == 2 else 5):
                assert iterate_resultant(f, n, "quotient") == iterate_resultant(f, n, "expand"), (f, n)
                count += 1
    return f"quotient and expansion paths agree on {count} cases"


def check_chars(rng: random.Random) -> str:
    count = 0
    for f in (IntPoly((1, 0, 1)), IntPoly((2, 0, -2, 1)), IntPoly((2, 0, 0, -2, 1)),
              _random_poly(rng, 2, 4), _random_poly(rng, 3, 4)):
        exact = {n: f.lc * iterate_resultant(f, n) for n in range(2, 5)}
        for p in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 97, 199):
            if is_bad_prime(f, p):
                continue
            chars = iter_resultant_chars(f, p, 4)
            for n in range(2, 5):
                assert chars[n] == legendre(exact[n] % p, p), (f, p, n)
                count += 1
    return f"{count} symbols match the exact resultants"


def check_flip(rng: random.Random) -> str:
    f = IntPoly((2, 0, 0, -2, 1))
    ws = build_window_sets(f, 2, 4)
    a = compute_S(f, 200, 600, ws, "direct")
    b = compute_S(f, 200, 600, ws, "flipped")
    assert a.per_prime == b.per_prime
    return f"S = {a.S} both ways over {len(a.per_prime)} primes"


def check_decomposition(rng: random.Random) -> str:
    want = {2: (5, 1), 3: (8, 5), 4: (17, 13), 5: (32, 677)}
    f = IntPoly((1, 0, 1))
    for n, (nu, u) in want.items():
        rd = res_decompose(f, n)
        assert (rd.nu, rd.u) == (nu, u), rd
        assert 2**nu * u == 2 ** (2**n) * iterate(f, n)(0)
    return "x^2+1 table for n = 2..5"


CHECKS: list = [
    ("jacobi", check_jacobi),
    ("resultant", check_resultants),
    ("product_formula", check_product_formula),
    ("division_identity", check_division_identity),
    ("selberg_quadratic_form", check_selberg),
    ("pv_envelope", check_pv),
    ("resultant_paths", check_paths),
    ("characters_vs_exact", check_chars),
    ("flip_identity", check_flip),
    ("decomposition_table", check_decomposition),
]


def run_check(name: str, fn: Callable, seed: int) -> CheckResult:
    rng = random.Random(f"{seed}:{name}")
    t0 = time.perf_counter()
    try:
        detail = fn(rng)
        ok = True
    except AssertionError as exc:
        detail, ok = f"assertion failed: {exc}", False
    except Exception as exc:  # reported, never raised
        detail, ok = f"{type(exc).__name__}: {exc}", False
    return CheckResult(name, ok, detail or "", time.perf_counter() - t0)


def verify_suite(seed: int = DEFAULT_SEED, only=None) -> VerifyReport:
    report = VerifyReport(seed)
    for name, fn in CHECKS:
        if only is None or name in only:
            report.checks.append(run_check(name, fn, seed))
    return report

"""Exact integer and rational polynomial arithmetic.

Polynomials are dense, coefficients ascending: ``c_0 + c_1 X + ... + c_d X^d``
is stored as ``(c_0, ..., c_d)`` with ``c_d != 0``; the zero polynomial is ``()``.

Rational numbers are :class:`fractions.Fraction` (aliased as ``BigRat``), which
already keeps ``num/den`` reduced with ``den >= 1`` and zero as ``0/1``.

Resultants follow the Sylvester convention

    Res(g, h) = lc(g)^deg(h) * prod_{g(a)=0} h(a)
              = (-1)^(deg g * deg h) * lc(h)^deg(g) * prod_{h(b)=0} g(b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    DegreeCapExceeded,
    DivisionByZeroPolynomial,
    ZeroInput,
    ZeroPolynomial,
    ZeroResultant,
)

BigRat = Fraction

DEFAULT_DEGREE_CAP = 1 << 20

# below this length schoolbook multiplication beats packing into one big int
_KRONECKER_MIN_LEN = 24


def _strip(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


class _PolyOps:
    """Shared behaviour of IntPoly and RatPoly."""

    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self):
        if not self.coeffs:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self):
        return format_poly(self.coeffs)


@dataclass(frozen=True)
class IntPoly(_PolyOps):
    coeffs: tuple

    def __post_init__(self):
        c = _strip(int(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def x(cls) -> "IntPoly":
        return cls((0, 1))

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls((c,))

    def __repr__(self):
        return f"IntPoly({str(self)!r})"

    def __add__(self, other):
        other = _as_int_poly(other)
        return IntPoly(_add(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return IntPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_int_poly(other))

    def __rsub__(self, other):
        return _as_int_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly(tuple(c * other for c in self.coeffs))
        return IntPoly(mul_int(self.coeffs, _as_int_poly(other).coeffs))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = IntPoly((1,))
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def derivative(self) -> "IntPoly":
        return IntPoly(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def compose(self, inner: "IntPoly") -> "IntPoly":
        """self(inner(X)) by Horner's rule."""
        acc = IntPoly(())
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def primitive(self) -> "IntPoly":
        g = self.content()
        if g == 0:
            return self
        if self.coeffs[-1] < 0:
            g = -g
        return IntPoly(tuple(c // g for c in self.coeffs))

    def to_rat(self) -> "RatPoly":
        return RatPoly(self.coeffs)


@dataclass(frozen=True)
class RatPoly(_PolyOps):
    coeffs: tuple

    def __post_init__(self):
        c = _strip(Fraction(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", tuple(c))

    def __repr__(self):
        return f"RatPoly({str(self)!r})"

    def __eq__(self, other):
        if isinstance(other, (RatPoly, IntPoly)):
            return self.coeffs == tuple(Fraction(c) for c in other.coeffs)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def to_int(self) -> IntPoly:
        if not self.is_integral():
            raise ValueError(f"{self} has non-integer coefficients")
        return IntPoly(tuple(c.numerator for c in self.coeffs))

    def denominator(self) -> int:
        return math.lcm(1, *(c.denominator for c in self.coeffs))


def _as_int_poly(p) -> IntPoly:
    if isinstance(p, IntPoly):
        return p
    if isinstance(p, int):
        return IntPoly((p,))
    raise TypeError(f"cannot use {type(p).__name__} as an integer polynomial")


def format_poly(coeffs: Sequence, var: str = "x") -> str:
    """Canonical text form, e.g. ``x^4-2*x^3+2``; parseable back by parse_poly."""
    if not coeffs:
        return "0"
    out = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = -c if c < 0 else c
        if i == 0:
            body = str(a)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if a == 1 else f"{a}*{mono}"
        if not out:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(sign + body)
    return "".join(out)


# ---------------------------------------------------------------------------
# coefficient-list kernels


def _add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return out


def _sub(a, b):
    n = max(len(a), len(b))
    return _strip((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n))


def _schoolbook(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pack(c, nbytes, half):
    data = b"".join((x + half).to_bytes(nbytes, "little") for x in c)
    return int.from_bytes(data, "little") - _bias(len(c), nbytes, half)


def _bias(n, nbytes, half):
    return int.from_bytes(half.to_bytes(nbytes, "little") * n, "little")


def mul_int(a: Sequence[int], b: Sequence[int]) -> list:
    """Product of two integer coefficient lists.

    Long inputs go through Kronecker substitution: both polynomials are
    packed into one big integer with slots wide enough that no product
    coefficient overflows its slot, multiplied once, and unpacked.
    """
    if not a or not b:
        return []
    if min(len(a), len(b)) < _KRONECKER_MIN_LEN:
        return _schoolbook(a, b)
    bound = min(len(a), len(b)) * max(abs(x) for x in a) * max(abs(x) for x in b)
    nbytes = (bound.bit_length() + 8) // 8
    half = 1 << (8 * nbytes - 1)
    w = _pack(a, nbytes, half) * _pack(b, nbytes, half)
    n = len(a) + len(b) - 1
    data = (w + _bias(n, nbytes, half)).to_bytes(n * nbytes, "little")
    return [
        int.from_bytes(data[i * nbytes:(i + 1) * nbytes], "little") - half
        for i in range(n)
    ]


def _prem(a, b):
    """Pseudo-remainder: lc(b)^(deg a - deg b + 1) * a mod b, over Z."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    e = len(a) - len(b) + 1
    while r and len(r) - 1 >= db:
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [c * lb for c in r]
        for j, bc in enumerate(b):
            r[shift + j] -= lr * bc
        r = _strip(r)
        e -= 1
    if e > 0:
        f = lb**e
        r = [c * f for c in r]
    return r


def _content(c):
    g = 0
    for x in c:
        g = math.gcd(g, x)
    return g


# ---------------------------------------------------------------------------
# public operations


def iterate(f: IntPoly, n: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> IntPoly:
    """The n-th iterate f^(n), with f^(0) = X."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return IntPoly.x()
    if f.degree < 1:
        raise ValueError("iterating a constant polynomial")
    if f.degree**n > degree_cap:
        raise DegreeCapExceeded(f"deg f^({n}) = {f.degree}^{n} exceeds cap {degree_cap}")
    g = f
    for _ in range(n - 1):
        g = f.compose(g)
    return g


def iterates(f: IntPoly, n_max: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> list:
    """[f^(0), f^(1), ..., f^(n_max)], each computed from the previous one."""
    if n_max >= 1 and f.degree**n_max > degree_cap:
        raise DegreeCapExceeded(f"deg f^({n_max}) exceeds cap {degree_cap}")
    out = [IntPoly.x()]
    for _ in range(n_max):
        out.append(f.compose(out[-1]))
    return out


def resultant(g: IntPoly, h: IntPoly) -> int:
    """Res(g, h) by the subresultant remainder sequence over Z."""
    if g.is_zero() or h.is_zero():
        raise ZeroPolynomial("resultant of a zero polynomial")
    a, b = list(g.coeffs), list(h.coeffs)
    da, db = len(a) - 1, len(b) - 1
    if da == 0:
        return a[0] ** db
    if db == 0:
        return b[0] ** da
    s = 1
    if da < db:
        a, b = b, a
        da, db = db, da
        if da & 1 and db & 1:
            s = -1
    ca, cb = _content(a), _content(b)
    a = [x // ca for x in a]
    b = [x // cb for x in b]
    t = ca**db * cb**da
    gg = hh = 1
    while True:
        da, db = len(a) - 1, len(b) - 1
        delta = da - db
        if da & 1 and db & 1:
            s = -s
        r = _prem(a, b)
        a = b
        div = gg * hh**delta
        b = [x // div for x in r]
        gg = a[-1]
        if delta == 0:
            pass
        elif delta == 1:
            hh = gg
        else:
            hh = gg**delta // hh ** (delta - 1)
        if not b:
            return 0
        if len(b) == 1:
            break
    da = len(a) - 1
    lb = b[0]
    if da == 0:
        res = 1
    elif da == 1:
        res = lb
    else:
        res = lb**da // hh ** (da - 1)
    return s * t * res


def sylvester_resultant(g: IntPoly, h: IntPoly) -> int:
    """Res(g, h) as the Sylvester determinant (fraction-free Bareiss elimination).

    Cubic cost; kept as an independent check of :func:`resultant`.
    """
    if g.is_zero() or h.is_zero():
        raise ZeroPolynomial("resultant of a zero polynomial")
    m, n = g.degree, h.degree
    size = m + n
    if size == 0:
        return 1
    gd = list(reversed(g.coeffs))
    hd = list(reversed(h.coeffs))
    rows = []
    for i in range(n):
        rows.append([0] * i + gd + [0] * (size - i - m - 1))
    for i in range(m):
        rows.append([0] * i + hd + [0] * (size - i - n - 1))
    return _bareiss_det(rows)


def _bareiss_det(mat):
    mat = [row[:] for row in mat]
    n = len(mat)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if mat[k][k] == 0:
            for i in range(k + 1, n):
                if mat[i][k] != 0:
                    mat[k], mat[i] = mat[i], mat[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                mat[i][j] = (mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j]) // prev
        prev = mat[k][k]
    return sign * mat[n - 1][n - 1]


def discriminant(f: IntPoly) -> Fraction:
    d = f.degree
    if d < 2:
        raise ValueError("discriminant needs degree >= 2")
    sign = -1 if (d * (d - 1) // 2) & 1 else 1
    return Fraction(sign * resultant(f, f.derivative()), f.lc)


# --- rational polynomial helpers (small degrees only) ----------------------


def _qdivmod(a, b):
    if not b:
        raise DivisionByZeroPolynomial("division by the zero polynomial")
    db = len(b) - 1
    if len(a) - 1 < db:
        return [], _strip(Fraction(c) for c in a)
    da = math.lcm(1, *(Fraction(c).denominator for c in a))
    dd = math.lcm(1, *(Fraction(c).denominator for c in b))
    A = [int(Fraction(c) * da) for c in a]
    B = [int(Fraction(c) * dd) for c in b]
    # pseudo-division in Z[X]: scale^k A = B Q + R; lc(B) = +-1 needs no scaling
    lead = B[-1]
    q = [0] * (len(A) - db)
    scale = 1
    for i in range(len(A) - 1, db - 1, -1):
        c = A[i]
        if not c:
            continue
        if c % lead:
            A = [x * lead for x in A]
            q = [x * lead for x in q]
            scale *= lead
            c = A[i]
        c //= lead
        q[i - db] = c
        for j in range(db + 1):
            A[i - db + j] -= c * B[j]
    qs, rs = Fraction(dd, da * scale), Fraction(1, da * scale)
    return _strip(c * qs for c in q), _strip(c * rs for c in A[:db])


def _qmonic(a):
    inv = Fraction(1) / a[-1]
    return [c * inv for c in a]


def _qgcd(a, b):
    a, b = _strip(a), _strip(b)
    while b:
        a, b = b, _qdivmod(a, b)[1]
    return _qmonic(a) if a else a


def _qderiv(a):
    return [i * c for i, c in enumerate(a)][1:]


def _to_primitive_int(a):
    den = math.lcm(1, *(Fraction(c).denominator for c in a))
    ints = [int(Fraction(c) * den) for c in a]
    return IntPoly(ints).primitive()


def divide_with_remainder(a: IntPoly, b: IntPoly):
    """(quotient, remainder) over Q with a = b*quotient + remainder."""
    if b.is_zero():
        raise DivisionByZeroPolynomial("division by the zero polynomial")
    q, r = _qdivmod([Fraction(c) for c in a.coeffs], [Fraction(c) for c in b.coeffs])
    return RatPoly(q), RatPoly(r)


def squarefree_decompose(f: IntPoly):
    """Yun's algorithm over Q, factors cleared to primitive integer polynomials.

    Returns ``(content, [(s_1, m_1), ...])`` with ``f = content * prod s_i^m_i``,
    multiplicities ascending and every ``s_i`` primitive with positive leading
    coefficient.
    """
    if f.is_zero():
        raise ZeroPolynomial("squarefree decomposition of zero")
    factors = []
    if f.degree >= 1:
        a = [Fraction(c) for c in f.coeffs]
        da = _qderiv(a)
        b = _qgcd(a, da)
        c = _qdivmod(a, b)[0]
        d = _sub(_qdivmod(da, b)[0], _qderiv(c))
        i = 1
        while len(c) > 1:
            g = _qgcd(c, d)
            if len(g) > 1:
                factors.append((_to_primitive_int(g), i))
            c = _qdivmod(c, g)[0]
            d = _sub(_qdivmod(d, g)[0], _qderiv(c))
            i += 1
    prod = IntPoly((1,))
    for s, m in factors:
        prod = prod * s**m
    content = Fraction(f.lc, prod.lc)
    assert content.denominator == 1
    return content.numerator, factors


def odd_part(m: int):
    """(nu, u) with m = 2^nu * u and u odd; the sign of m is carried by u."""
    if m == 0:
        raise ZeroInput("odd_part(0) is undefined")
    nu = (m & -m).bit_length() - 1
    return nu, m >> nu


class ResDecomp(NamedTuple):
    n: int
    nu: int
    u: int


def _res_expand(f: IntPoly, n: int, degree_cap: int) -> int:
    return resultant(iterate(f, n, degree_cap), f.derivative())


def _qmulmod(a, b, m):
    if not a or not b:
        return []
    return _qdivmod(_schoolbook(a, b), m)[1]


def iterate_mod_derivative(f: IntPoly, n: int) -> list:
    """f^(n)(X) mod f'(X) over Q, computed by n steps of y -> f(y) in Q[X]/(f')."""
    fp = [Fraction(c) for c in f.derivative().coeffs]
    y = _qdivmod([Fraction(0), Fraction(1)], fp)[1]
    for _ in range(n):
        acc = []
        for c in reversed(f.coeffs):
            acc = _strip(_add(_qmulmod(acc, y, fp), [Fraction(c)]))
        y = acc
    return y


def _res_quotient(f: IntPoly, n: int) -> int:
    fprime = f.derivative()
    k = fprime.degree
    big_d = f.degree**n
    r = iterate_mod_derivative(f, n)
    if not r:
        return 0
    den = math.lcm(1, *(c.denominator for c in r))
    r_int = IntPoly(tuple((c * den).numerator for c in r))
    # Res(A, B) = (-1)^(deg A deg B) lc(B)^(deg A - deg R) Res(B, R), R = A mod B
    res_br = Fraction(resultant(fprime, r_int), den**k)
    sign = -1 if (big_d * k) & 1 else 1
    val = sign * Fraction(fprime.lc) ** (big_d - r_int.degree) * res_br
    assert val.denominator == 1
    return val.numerator


def iterate_resultant(f: IntPoly, n: int, method: str = "quotient",
                      degree_cap: int = DEFAULT_DEGREE_CAP) -> int:
    """Res(f^(n), f') by full expansion ("expand") or in Q[X]/(f') ("quotient")."""
    if method == "quotient":
        return _res_quotient(f, n)
    if method == "expand":
        return _res_expand(f, n, degree_cap)
    raise ValueError(f"unknown method {method!r}")


def res_decompose(f: IntPoly, n: int, method: str = "quotient",
                  degree_cap: int = DEFAULT_DEGREE_CAP) -> ResDecomp:
    """f_d * Res(f^(n), f') = 2^nu * u with u odd."""
    if f.degree < 2:
        raise ValueError("res_decompose needs degree >= 2")
    if n < 2:
        raise ValueError("res_decompose needs n >= 2")
    res = iterate_resultant(f, n, method, degree_cap)
    if res == 0:
        raise ZeroResultant(n)
    nu, u = odd_part(f.lc * res)
    return ResDecomp(n, nu, u)


def weil_height(r) -> float:
    r = Fraction(r)
    if r == 0:
        return 0.0
    return max(_log_abs(r.numerator), _log_abs(r.denominator))


def _log_abs(m: int) -> float:
    m = abs(m)
    try:
        return math.log(m)
    except OverflowError:
        shift = m.bit_length() - 64
        return math.log(m >> shift) + shift * math.log(2)


def rational_valuation(r: Fraction, p: int) -> int:
    r = Fraction(r)
    if r == 0:
        raise ZeroInput("valuation of zero")
    v = 0
    num, den = r.numerator, r.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def poly_from_roots(roots: Iterable[int]) -> IntPoly:
    out = IntPoly((1,))
    for r in roots:
        out = out * IntPoly((-r, 1))
    return out

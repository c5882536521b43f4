"""Exact coefficient rings over a coordinate chart.

Two rings are supported, selected by the chart kind:

* affine charts carry rational functions: pairs of multivariate
  polynomials over Q, with equality decided by cross-multiplication
  (no gcd reduction is performed, only cheap content/monomial strips);
* periodic charts carry trigonometric polynomials: finite sums
  ``a_k*cos<k,t> + b_k*sin<k,t>`` indexed by integer frequency vectors
  ``k``, with scalars in Q[pi] so that circle integrals stay exact.

Every value is immutable and kept canonical: zero terms are pruned,
trig frequencies are flipped so that their first nonzero entry is
positive (using cos(-x) = cos(x), sin(-x) = -sin(x)), and the zero
frequency carries only a cosine part.  Equality of two coefficients is
decidable exactly; the zero test is exact.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

__all__ = [
    "Chart",
    "Scalar",
    "Polynomial",
    "RationalExpr",
    "TrigPoly",
    "Coefficient",
    "RingError",
    "ParseError",
    "EvalError",
    "coeff_parse",
    "parse_angle",
    "Rat",
]

Rat = Union[int, Fraction]


class RingError(ValueError):
    """An operation left (or was asked to leave) the coefficient ring."""


class ParseError(RingError):
    """The expression does not belong to the chart's grammar."""


class EvalError(RingError):
    """Evaluation failed (pole of a rational function, bad point)."""


# ---------------------------------------------------------------------------
# charts


class Chart:
    """A coordinate chart: named coordinates, all affine or all periodic."""

    __slots__ = ("names", "kind")

    def __init__(self, names: Iterable[str], kind: str):
        names = tuple(names)
        if not names:
            raise ValueError("chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be unique")
        if kind not in ("affine", "periodic"):
            raise ValueError("chart kind must be 'affine' or 'periodic'")
        self.names = names
        self.kind = kind

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ParseError(f"unknown identifier {name!r}") from None

    def __eq__(self, other):
        return (
            isinstance(other, Chart)
            and self.names == other.names
            and self.kind == other.kind
        )

    def __hash__(self):
        return hash((self.names, self.kind))

    def __repr__(self):
        return f"Chart({list(self.names)!r}, {self.kind!r})"


# ---------------------------------------------------------------------------
# scalars in Q[pi]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Scalar:
    """Element of Q[pi]: a finite rational combination of powers of pi."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, Fraction] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @staticmethod
    def of(q: Rat) -> "Scalar":
        q = Fraction(q)
        return Scalar({0: q}) if q else Scalar()

    @staticmethod
    def pi(power: int = 1, coeff: Rat = 1) -> "Scalar":
        return Scalar({power: Fraction(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return set(self.terms) <= {0}

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise RingError(f"scalar {self} has pi terms, not a plain rational")
        return self.terms.get(0, _ZERO)

    def __add__(self, other: "Scalar") -> "Scalar":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, _ZERO) + v
        return Scalar(t)

    def __neg__(self) -> "Scalar":
        return Scalar({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "Scalar") -> "Scalar":
        return self + (-other)

    def __mul__(self, other: "Scalar | Rat") -> "Scalar":
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return Scalar({k: v * q for k, v in self.terms.items()})
        t: dict[int, Fraction] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = k1 + k2
                t[k] = t.get(k, _ZERO) + v1 * v2
        return Scalar(t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Scalar.of(other)
        return isinstance(other, Scalar) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __float__(self) -> float:
        return float(sum(v * math.pi**k for k, v in self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, reverse=True):
            v = self.terms[k]
            if k == 0:
                parts.append(str(v))
            elif k == 1:
                parts.append(f"{v}*pi")
            else:
                parts.append(f"{v}*pi^{k}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def _cos_sin_half(r: Fraction) -> tuple[Fraction, Fraction] | None:
    """Exact (cos(r*pi), sin(r*pi)) when r is a half-integer, else None."""
    if r.denominator > 2:
        return None
    m = (2 * r) % 4  # r*pi mod 2*pi, in quarter turns
    return {
        0: (_ONE, _ZERO),
        1: (_ZERO, _ONE),
        2: (-_ONE, _ZERO),
        3: (_ZERO, -_ONE),
    }[int(m)]


# ---------------------------------------------------------------------------
# multivariate polynomials over Q


class Polynomial:
    """Sparse multivariate polynomial: exponent tuple -> Fraction."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[tuple, Fraction] | None = None):
        self.n = n
        self.terms = {e: c for e, c in (terms or {}).items() if c != 0}

    @staticmethod
    def const(n: int, q: Rat) -> "Polynomial":
        q = Fraction(q)
        return Polynomial(n, {(0,) * n: q} if q else {})

    @staticmethod
    def coordinate(n: int, i: int) -> "Polynomial":
        e = [0] * n
        e[i] = 1
        return Polynomial(n, {tuple(e): _ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.n, _ZERO)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, _ZERO) + c
        return Polynomial(self.n, t)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        t: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, _ZERO) + c1 * c2
        return Polynomial(self.n, t)

    def scale(self, q: Rat) -> "Polynomial":
        q = Fraction(q)
        return Polynomial(self.n, {e: c * q for e, c in self.terms.items()})

    def partial(self, i: int) -> "Polynomial":
        t: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = t.get(tuple(e2), _ZERO) + c * e[i]
        return Polynomial(self.n, t)

    def substitute(self, i: int, q: Rat) -> "Polynomial":
        q = Fraction(q)
        t: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            e2[i] = 0
            e2 = tuple(e2)
            t[e2] = t.get(e2, _ZERO) + c * q ** e[i]
        return Polynomial(self.n, t)

    def eval(self, point: tuple[Fraction, ...]) -> Fraction:
        total = _ZERO
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= x**k
            total += v
        return total

    def depends_on(self, i: int) -> bool:
        return any(e[i] for e in self.terms)

    def content(self) -> Fraction:
        """gcd of the coefficients (positive), 1 for the zero polynomial."""
        if not self.terms:
            return _ONE
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, c.numerator)
            den = math.lcm(den, c.denominator)
        return Fraction(num, den)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def to_str(self, names: tuple[str, ...]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            factors = [
                names[i] if k == 1 else f"{names[i]}^{k}"
                for i, k in enumerate(e)
                if k
            ]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(str(c) + "*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


class RationalExpr:
    """Quotient of two polynomials; denominator not identically zero.

    Stored without gcd reduction; equality is decided by
    cross-multiplication.  Cheap normalizations only: integer content of
    the denominator and common monomial factors are stripped.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial):
        if den.is_zero():
            raise RingError("denominator is identically zero")
        if num.is_zero():
            den = Polynomial.const(num.n, 1)
        else:
            # strip a common monomial factor x^m | num, den
            mins = [
                min(min(e[i] for e in num.terms), min(e[i] for e in den.terms))
                for i in range(num.n)
            ]
            if any(mins):
                num = _shift_down(num, mins)
                den = _shift_down(den, mins)
            c = den.content()
            if den.terms[max(den.terms)] < 0:
                c = -c
            if c != 1:
                num = num.scale(1 / c)
                den = den.scale(1 / c)
        self.num = num
        self.den = den

    @staticmethod
    def const(n: int, q: Rat) -> "RationalExpr":
        return RationalExpr(Polynomial.const(n, q), Polynomial.const(n, 1))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: "RationalExpr") -> "RationalExpr":
        if self.den == other.den:
            return RationalExpr(self.num + other.num, self.den)
        return RationalExpr(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RationalExpr":
        return RationalExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "RationalExpr") -> "RationalExpr":
        return RationalExpr(self.num * other.num, self.den * other.den)

    def scale(self, q: Rat) -> "RationalExpr":
        return RationalExpr(self.num.scale(q), self.den)

    def invert(self) -> "RationalExpr":
        if self.is_zero():
            raise RingError("division by the zero rational function")
        return RationalExpr(self.den, self.num)

    def partial(self, i: int) -> "RationalExpr":
        if not (self.num.depends_on(i) or self.den.depends_on(i)):
            return RationalExpr.const(self.num.n, 0)
        return RationalExpr(
            self.num.partial(i) * self.den - self.num * self.den.partial(i),
            self.den * self.den,
        )

    def substitute(self, i: int, q: Rat) -> "RationalExpr":
        den = self.den.substitute(i, q)
        if den.is_zero():
            raise EvalError(f"pole: denominator vanishes at coordinate {i} = {q}")
        return RationalExpr(self.num.substitute(i, q), den)

    def eval(self, point: tuple[Fraction, ...]) -> Fraction:
        d = self.den.eval(point)
        if d == 0:
            raise EvalError(f"pole of rational function at {point}")
        return self.num.eval(point) / d

    def depends_on(self, i: int) -> bool:
        return self.num.depends_on(i) or self.den.depends_on(i)

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def __eq__(self, other):
        return isinstance(other, RationalExpr) and (
            self.num * other.den == other.num * self.den
        )

    __hash__ = None


def _shift_down(p: Polynomial, mins: list[int]) -> Polynomial:
    return Polynomial(
        p.n,
        {tuple(e[i] - mins[i] for i in range(p.n)): c for e, c in p.terms.items()},
    )


# ---------------------------------------------------------------------------
# trigonometric polynomials


def _canon_freq(k: tuple, a: Scalar, b: Scalar):
    """Canonical representative: first nonzero entry of k positive."""
    for ki in k:
        if ki > 0:
            return k, a, b
        if ki < 0:
            return tuple(-x for x in k), a, -b
    return k, a, Scalar()  # k = 0: sin part is identically zero


class TrigPoly:
    """Trig polynomial: frequency vector -> (cos, sin) pair of Scalars."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        canon: dict[tuple, tuple[Scalar, Scalar]] = {}
        for k, (a, b) in (terms or {}).items():
            k, a, b = _canon_freq(k, a, b)
            if k in canon:
                a0, b0 = canon[k]
                a, b = a0 + a, b0 + b
            canon[k] = (a, b)
        self.terms = {
            k: ab for k, ab in canon.items() if not (ab[0].is_zero() and ab[1].is_zero())
        }

    @staticmethod
    def const(n: int, s: "Scalar | Rat") -> "TrigPoly":
        if not isinstance(s, Scalar):
            s = Scalar.of(s)
        return TrigPoly(n, {(0,) * n: (s, Scalar())})

    @staticmethod
    def cos(n: int, i: int) -> "TrigPoly":
        k = [0] * n
        k[i] = 1
        return TrigPoly(n, {tuple(k): (Scalar.of(1), Scalar())})

    @staticmethod
    def sin(n: int, i: int) -> "TrigPoly":
        k = [0] * n
        k[i] = 1
        return TrigPoly(n, {tuple(k): (Scalar(), Scalar.of(1))})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        t = dict(self.terms)
        for k, (a, b) in other.terms.items():
            if k in t:
                a0, b0 = t[k]
                t[k] = (a0 + a, b0 + b)
            else:
                t[k] = (a, b)
        return TrigPoly(self.n, t)

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(self.n, {k: (-a, -b) for k, (a, b) in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        # product-to-sum identities, one (k1, k2) pair at a time
        half = Fraction(1, 2)
        out: dict[tuple, list[Scalar]] = {}

        def put(k, da: Scalar, db: Scalar):
            k, da, db = _canon_freq(k, da, db)
            slot = out.get(k)
            if slot is None:
                out[k] = [da, db]
            else:
                slot[0] = slot[0] + da
                slot[1] = slot[1] + db

        for k1, (a1, b1) in self.terms.items():
            for k2, (a2, b2) in other.terms.items():
                ks = tuple(x + y for x, y in zip(k1, k2))
                kd = tuple(x - y for x, y in zip(k1, k2))
                aa = a1 * a2 * half
                bb = b1 * b2 * half
                ba = b1 * a2 * half
                ab = a1 * b2 * half
                # cos*cos -> cos(kd) + cos(ks); sin*sin -> cos(kd) - cos(ks)
                put(kd, aa + bb, Scalar())
                put(ks, aa - bb, Scalar())
                # sin*cos -> sin(ks) + sin(kd); cos*sin -> sin(ks) - sin(kd)
                put(ks, Scalar(), ba + ab)
                put(kd, Scalar(), ba - ab)
        return TrigPoly(self.n, {k: (v[0], v[1]) for k, v in out.items()})

    def scale(self, s: "Scalar | Rat") -> "TrigPoly":
        if not isinstance(s, Scalar):
            s = Scalar.of(s)
        return TrigPoly(self.n, {k: (a * s, b * s) for k, (a, b) in self.terms.items()})

    def partial(self, i: int) -> "TrigPoly":
        # d/dt_i [a cos<k,t> + b sin<k,t>] = k_i (b cos<k,t> - a sin<k,t>)
        t = {}
        for k, (a, b) in self.terms.items():
            if k[i]:
                t[k] = (b * k[i], a * (-k[i]))
        return TrigPoly(self.n, t)

    def circle_integral(self, i: int) -> "TrigPoly":
        """Integrate over a full period of coordinate i: 2*pi times the
        frequency-zero part in that coordinate."""
        two_pi = Scalar.pi(1, 2)
        t = {
            k: (a * two_pi, b * two_pi)
            for k, (a, b) in self.terms.items()
            if k[i] == 0
        }
        return TrigPoly(self.n, t)

    def substitute(self, i: int, angle: Fraction) -> "TrigPoly":
        """Set coordinate i to angle*pi; exact for half-integer angle."""
        cs = _cos_sin_half(Fraction(angle))
        if cs is None:
            raise RingError(
                "exact substitution needs an angle that is a multiple of pi/2"
            )
        t: dict[tuple, tuple[Scalar, Scalar]] = {}

        def put(k, a, b):
            if k in t:
                a0, b0 = t[k]
                a, b = a0 + a, b0 + b
            t[k] = (a, b)

        for k, (a, b) in self.terms.items():
            c, s = _cos_sin_half(Fraction(angle) * k[i])
            k2 = list(k)
            k2[i] = 0
            k2 = tuple(k2)
            # cos(m*x + r)|x -> c*cos(r) - s*sin(r); sin -> s*cos(r) + c*sin(r)
            put(k2, a * c + b * s, b * c - a * s)
        return TrigPoly(self.n, t)

    def eval(self, angles: tuple[Fraction, ...]):
        """Value at the point (angles[i]*pi); Scalar when every angle is a
        multiple of pi/2, float otherwise."""
        if all(Fraction(q).denominator <= 2 for q in angles):
            total = Scalar()
            for k, (a, b) in self.terms.items():
                r = sum(Fraction(q) * ki for q, ki in zip(angles, k))
                c, s = _cos_sin_half(r)
                total = total + a * c + b * s
            return total
        total = 0.0
        for k, (a, b) in self.terms.items():
            phase = math.pi * float(sum(Fraction(q) * ki for q, ki in zip(angles, k)))
            total += float(a) * math.cos(phase) + float(b) * math.sin(phase)
        return total

    def depends_on(self, i: int) -> bool:
        return any(k[i] for k in self.terms)

    def is_constant(self) -> bool:
        return set(self.terms) <= {(0,) * self.n}

    def constant_value(self) -> Scalar:
        return self.terms.get((0,) * self.n, (Scalar(), Scalar()))[0]

    def __eq__(self, other):
        return isinstance(other, TrigPoly) and self.terms == other.terms

    __hash__ = None


# ---------------------------------------------------------------------------
# chart-level coefficients


class Coefficient:
    """A ring element attached to a chart (rational or trigonometric)."""

    __slots__ = ("chart", "value")

    def __init__(self, chart: Chart, value):
        if chart.kind == "affine" and not isinstance(value, RationalExpr):
            raise TypeError("affine charts carry RationalExpr payloads")
        if chart.kind == "periodic" and not isinstance(value, TrigPoly):
            raise TypeError("periodic charts carry TrigPoly payloads")
        self.chart = chart
        self.value = value

    # -- constructors -------------------------------------------------
    @staticmethod
    def const(chart: Chart, q: "Rat | Scalar") -> "Coefficient":
        if chart.kind == "affine":
            if isinstance(q, Scalar):
                q = q.as_fraction()
            return Coefficient(chart, RationalExpr.const(chart.dim, q))
        return Coefficient(chart, TrigPoly.const(chart.dim, q))

    @staticmethod
    def zero(chart: Chart) -> "Coefficient":
        return Coefficient.const(chart, 0)

    @staticmethod
    def one(chart: Chart) -> "Coefficient":
        return Coefficient.const(chart, 1)

    @staticmethod
    def coordinate(chart: Chart, i: int) -> "Coefficient":
        if chart.kind != "affine":
            raise RingError(
                "bare coordinates live outside the trig ring; use sin/cos"
            )
        return Coefficient(
            chart,
            RationalExpr(
                Polynomial.coordinate(chart.dim, i), Polynomial.const(chart.dim, 1)
            ),
        )

    @staticmethod
    def cos(chart: Chart, i: int) -> "Coefficient":
        if chart.kind != "periodic":
            raise RingError("trig call on an affine chart")
        return Coefficient(chart, TrigPoly.cos(chart.dim, i))

    @staticmethod
    def sin(chart: Chart, i: int) -> "Coefficient":
        if chart.kind != "periodic":
            raise RingError("trig call on an affine chart")
        return Coefficient(chart, TrigPoly.sin(chart.dim, i))

    # -- ring operations ----------------------------------------------
    def _check(self, other: "Coefficient"):
        if self.chart != other.chart:
            raise RingError("coefficients live on different charts")

    def __add__(self, other: "Coefficient") -> "Coefficient":
        self._check(other)
        return Coefficient(self.chart, self.value + other.value)

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        self._check(other)
        return Coefficient(self.chart, self.value - other.value)

    def __neg__(self) -> "Coefficient":
        return Coefficient(self.chart, -self.value)

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        self._check(other)
        return Coefficient(self.chart, self.value * other.value)

    def scale(self, q) -> "Coefficient":
        return Coefficient(self.chart, self.value.scale(q))

    def __eq__(self, other):
        if not isinstance(other, Coefficient):
            return NotImplemented
        return self.chart == other.chart and self.value == other.value

    __hash__ = None

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def is_unit(self) -> bool:
        """Invertible inside the ring: nonzero rational function on affine
        charts, nonzero rational constant on periodic charts."""
        if self.chart.kind == "affine":
            return not self.value.is_zero()
        return (
            self.value.is_constant()
            and self.value.constant_value().is_rational()
            and not self.value.is_zero()
        )

    def invert(self) -> "Coefficient":
        if self.chart.kind == "affine":
            return Coefficient(self.chart, self.value.invert())
        if not self.is_unit():
            raise RingError("only nonzero constants are units of the trig ring")
        q = self.value.constant_value().as_fraction()
        return Coefficient.const(self.chart, Fraction(1) / q)

    # -- calculus -----------------------------------------------------
    def partial(self, i: int) -> "Coefficient":
        if not 0 <= i < self.chart.dim:
            raise RingError(f"coordinate index {i} out of range")
        return Coefficient(self.chart, self.value.partial(i))

    def circle_integral(self, i: int) -> "Coefficient":
        if self.chart.kind != "periodic":
            raise RingError("circle integrals need a periodic chart")
        if not 0 <= i < self.chart.dim:
            raise RingError(f"coordinate index {i} out of range")
        return Coefficient(self.chart, self.value.circle_integral(i))

    def arc_integral(self, i: int, a: Fraction, b: Fraction):
        """Integral over coordinate i running along the positively oriented
        arc from a*pi to b*pi; the coefficient must depend on no other
        coordinate.  Exact Scalar for half-integer endpoints, else float."""
        if self.chart.kind != "periodic":
            raise RingError("arc integrals need a periodic chart")
        for j in range(self.chart.dim):
            if j != i and self.value.depends_on(j):
                raise RingError(
                    f"arc integrand still depends on {self.chart.names[j]}"
                )
        a, b = Fraction(a), Fraction(b)
        exact = a.denominator <= 2 and b.denominator <= 2
        total = Scalar() if exact else 0.0
        for k, (ca, cb) in self.value.terms.items():
            m = k[i]
            if m == 0:
                # constant term: ca * (b - a) * pi
                piece = ca * Scalar.pi(1, b - a)
                total = total + piece if exact else total + float(piece)
                continue
            # antiderivative: (ca/m) sin(m t) - (cb/m) cos(m t)
            if exact:
                cb_, sb_ = _cos_sin_half(b * m)
                ca_, sa_ = _cos_sin_half(a * m)
                total = total + ca * Fraction(sb_ - sa_, m) - cb * Fraction(
                    cb_ - ca_, m
                )
            else:
                tb, ta = float(b) * math.pi, float(a) * math.pi
                total += float(ca) / m * (math.sin(m * tb) - math.sin(m * ta))
                total -= float(cb) / m * (math.cos(m * tb) - math.cos(m * ta))
        return total

    def substitute(self, i: int, value) -> "Coefficient":
        return Coefficient(self.chart, self.value.substitute(i, value))

    def eval(self, point):
        """Evaluate at a point: rationals on affine charts, multiples of pi
        (given as the rational factor) on periodic charts."""
        point = tuple(Fraction(x) for x in point)
        if len(point) != self.chart.dim:
            raise EvalError("point has the wrong number of coordinates")
        return self.value.eval(point)

    def eval_float(self, point) -> float:
        v = self.eval(point)
        return float(v)

    def depends_on(self, i: int) -> bool:
        return self.value.depends_on(i)

    # -- serialization ------------------------------------------------
    def __str__(self):
        names = self.chart.names
        v = self.value
        if isinstance(v, RationalExpr):
            num = v.num.to_str(names)
            if v.den == Polynomial.const(v.den.n, 1):
                return num
            return f"({num})/({v.den.to_str(names)})"
        if not v.terms:
            return "0"
        parts = []
        for k in sorted(v.terms):
            a, b = v.terms[k]
            pieces = []
            for i, ki in enumerate(k):
                if not ki:
                    continue
                body = names[i] if abs(ki) == 1 else f"{abs(ki)}*{names[i]}"
                pieces.append(("-" if ki < 0 else "+") + body)
            phase = "".join(pieces).lstrip("+")
            if not any(k):
                parts.append(f"({a})")
                continue
            if not a.is_zero():
                parts.append(f"({a})*cos({phase})")
            if not b.is_zero():
                parts.append(f"({b})*sin({phase})")
        return " + ".join(parts)

    def __repr__(self):
        return f"<{self.chart.kind} coeff {self}>"


# ---------------------------------------------------------------------------
# expression parser
#
# grammar:  expr   := term (('+'|'-') term)*
#           term   := unary (('*'|'/') unary)*
#           unary  := '-' unary | power
#           power  := atom ('^' INT)?
#           atom   := INT | 'pi' | NAME | ('sin'|'cos') '(' NAME ')'
#                   | '(' expr ')'
#
# Division is permitted on affine charts, and between rational literals
# on any chart.  sin/cos (and pi) are permitted on periodic charts only.

_TOKEN = re.compile(r"\s*(\d+|[A-Za-z_][A-Za-z_0-9]*|\*\*|[()+\-*/^])")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"bad character at {text[pos:pos + 8]!r}")
        tok = m.group(1)
        out.append("^" if tok == "**" else tok)
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str], chart: Chart):
        self.toks = tokens
        self.pos = 0
        self.chart = chart

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}")

    # each rule returns (Coefficient, literal or None) where `literal`
    # is a Fraction when the subexpression is a pure rational literal
    def expr(self):
        val, lit = self.term()
        while self.peek() in ("+", "-"):
            op = self.next()
            rhs, rlit = self.term()
            if op == "+":
                val = val + rhs
                lit = None if lit is None or rlit is None else lit + rlit
            else:
                val = val - rhs
                lit = None if lit is None or rlit is None else lit - rlit
        return val, lit

    def term(self):
        val, lit = self.unary()
        while self.peek() in ("*", "/"):
            op = self.next()
            rhs, rlit = self.unary()
            if op == "*":
                val = val * rhs
                lit = None if lit is None or rlit is None else lit * rlit
            else:
                if lit is not None and rlit is not None:
                    if rlit == 0:
                        raise ParseError("zero denominator literal")
                    lit = lit / rlit
                    val = Coefficient.const(self.chart, lit)
                elif self.chart.kind == "periodic":
                    raise ParseError("division on a periodic chart")
                else:
                    if rhs.is_zero():
                        raise ParseError("zero denominator literal")
                    val = val * rhs.invert()
                    lit = None
        return val, lit

    def unary(self):
        if self.peek() == "-":
            self.next()
            val, lit = self.unary()
            return -val, None if lit is None else -lit
        return self.power()

    def power(self):
        val, lit = self.atom()
        if self.peek() == "^":
            self.next()
            k = self.next()
            if not k.isdigit():
                raise ParseError(f"exponent must be a nonnegative integer, got {k!r}")
            k = int(k)
            out = Coefficient.one(self.chart)
            for _ in range(k):
                out = out * val
            return out, None if lit is None else lit**k
        return val, lit

    def atom(self):
        tok = self.next()
        if tok.isdigit():
            q = Fraction(int(tok))
            return Coefficient.const(self.chart, q), q
        if tok == "(":
            val, lit = self.expr()
            self.expect(")")
            return val, lit
        if tok == "pi":
            if self.chart.kind != "periodic":
                raise ParseError("pi lives outside the affine coefficient ring")
            return Coefficient.const(self.chart, Scalar.pi()), None
        if tok in ("sin", "cos"):
            if self.chart.kind != "periodic":
                raise ParseError("trig call on an affine chart")
            self.expect("(")
            name = self.next()
            i = self.chart.index(name)
            self.expect(")")
            fn = Coefficient.sin if tok == "sin" else Coefficient.cos
            return fn(self.chart, i), None
        # a coordinate name
        i = self.chart.index(tok)
        if self.chart.kind != "affine":
            raise ParseError(
                f"bare coordinate {tok!r} on a periodic chart; use sin/cos"
            )
        return Coefficient.coordinate(self.chart, i), None


def coeff_parse(text: str, chart: Chart) -> Coefficient:
    """Parse an expression string into a canonical Coefficient."""
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty expression")
    p = _Parser(toks, chart)
    val, _ = p.expr()
    if p.peek() is not None:
        raise ParseError(f"trailing input at {p.peek()!r}")
    return val


_ANGLE = re.compile(r"^\s*(-)?\s*(?:(\d+)\s*(?:/\s*(\d+))?\s*\*?\s*)?pi"
                    r"\s*(?:/\s*(\d+))?\s*$")


def parse_angle(text: str) -> Fraction:
    """Parse an angle given as a rational multiple of pi ('pi/2', '-pi',
    '3/2*pi', '0') into its rational factor."""
    text = str(text).strip()
    if "pi" not in text:
        try:
            return Fraction(text)
        except ValueError:
            raise ParseError(f"bad angle {text!r}") from None
    m = _ANGLE.match(text)
    if not m:
        raise ParseError(f"bad angle {text!r}")
    sign, num, den1, den2 = m.groups()
    q = Fraction(int(num) if num else 1, int(den1) if den1 else 1)
    if den2:
        q /= int(den2)
    return -q if sign else q

import math
from fractions import Fraction

import pytest

from presymplectic.coeffring import (
    Chart,
    Coefficient,
    EvalError,
    ParseError,
    RingError,
    Scalar,
    coeff_parse,
    parse_angle,
)
from conftest import parse, rng


# ---------------------------------------------------------------------------
# charts and parsing


def test_chart_validation():
    with pytest.raises(ValueError):
        Chart([], "affine")
    with pytest.raises(ValueError):
        Chart(["x", "x"], "affine")
    with pytest.raises(ValueError):
        Chart(["x"], "mixed")


def test_parse_rational_expr(ch3):
    c = parse(ch3, "x/(1+x)")
    assert c.value.num.to_str(ch3.names) == "x"
    assert c.value.den.to_str(ch3.names) == "1 + x"


def test_parse_product_to_sum(t4):
    got = parse(t4, "cos(t3)*cos(t4)")
    half = Scalar.of(Fraction(1, 2))
    assert got.value.terms == {
        (0, 0, 1, 1): (half, Scalar()),
        (0, 0, 1, -1): (half, Scalar()),
    }
    # float agreement with the pointwise product at generic angles
    for q3, q4 in [(Fraction(1, 3), Fraction(5, 7)), (Fraction(2, 5), Fraction(1, 9))]:
        lhs = float(got.eval((0, 0, q3, q4)))
        rhs = math.cos(float(q3) * math.pi) * math.cos(float(q4) * math.pi)
        assert abs(lhs - rhs) < 1e-9
    # exact at multiples of pi/2
    assert got.eval((0, 0, Fraction(1, 2), 1)) == 0


def test_parse_trig_on_affine_rejected(ch3):
    with pytest.raises(ParseError):
        parse(ch3, "sin(x)")


def test_parse_division_on_periodic_rejected(t4):
    with pytest.raises(ParseError):
        parse(t4, "cos(t3)/cos(t4)")
    # rational literals divide fine anywhere
    c = parse(t4, "1/2*cos(t3)")
    assert c == parse(t4, "cos(t3)*(1/2)")


def test_parse_errors(ch3, t4):
    with pytest.raises(ParseError):
        parse(ch3, "q + 1")
    with pytest.raises(ParseError):
        parse(ch3, "1/0")
    with pytest.raises(ParseError):
        parse(ch3, "x/(x - x)")
    with pytest.raises(ParseError):
        parse(t4, "t3 + 1")
    with pytest.raises(ParseError):
        parse(ch3, "pi")
    with pytest.raises(ParseError):
        parse(ch3, "x^-1")


def test_parse_angle():
    assert parse_angle("pi/2") == Fraction(1, 2)
    assert parse_angle("-pi") == -1
    assert parse_angle("3/2*pi") == Fraction(3, 2)
    assert parse_angle("0") == 0
    assert parse_angle("2*pi") == 2
    with pytest.raises(ParseError):
        parse_angle("two pi")


# ---------------------------------------------------------------------------
# derivatives


def test_partial_quotient_rule(ch3):
    c = parse(ch3, "1/(1+x)")
    assert c.partial(0) == parse(ch3, "-1/((1+x)^2)")


def test_partial_trig(t4):
    assert parse(t4, "cos(t3)").partial(2) == parse(t4, "-sin(t3)")


def test_partial_unrelated_coordinate(ch3):
    assert parse(ch3, "x/(1+x)").partial(1).is_zero()


def test_partials_commute(ch3, t4):
    r = rng(101)
    pool3 = ["x*y/(1+x)", "(x+z)^2", "y/(2+y)", "x*y*z"]
    pool4 = ["cos(t1)*sin(t2)", "cos(t3)^2", "sin(t4)*sin(t1)*cos(t2)"]
    for _ in range(25):
        c = parse(ch3, r.choice(pool3))
        i, j = r.randrange(3), r.randrange(3)
        assert c.partial(i).partial(j) == c.partial(j).partial(i)
        d = parse(t4, r.choice(pool4))
        i, j = r.randrange(4), r.randrange(4)
        assert d.partial(i).partial(j) == d.partial(j).partial(i)


def test_leibniz(ch3, t4):
    r = rng(102)
    for chart, pool in ((ch3, ["x", "y/(1+x)", "x*z+2"]),
                        (t4, ["cos(t1)", "sin(t2)*cos(t3)", "2*sin(t4)"])):
        for _ in range(20):
            c = parse(chart, r.choice(pool))
            d = parse(chart, r.choice(pool))
            i = r.randrange(chart.dim)
            lhs = (c * d).partial(i)
            rhs = c.partial(i) * d + c * d.partial(i)
            assert lhs == rhs


# ---------------------------------------------------------------------------
# integrals


def test_circle_integral_basics(t4):
    one = Coefficient.one(t4)
    assert one.circle_integral(0) == Coefficient.const(t4, Scalar.pi(1, 2))
    assert parse(t4, "cos(t3)").circle_integral(2).is_zero()


def test_circle_integral_cos_squared(t4):
    # cos^2 = 1/2 + 1/2 cos(2t); quadrature oracle pins the value pi
    got = parse(t4, "cos(t1)^2").circle_integral(0)
    assert got == Coefficient.const(t4, Scalar.pi(1, 1))
    import mpmath

    num = mpmath.quad(lambda s: mpmath.cos(s) ** 2, [0, 2 * mpmath.pi])
    assert abs(float(num) - math.pi) < 1e-9


def test_circle_integral_requires_periodic(ch3):
    with pytest.raises(RingError):
        Coefficient.one(ch3).circle_integral(0)


def test_circle_integral_of_derivative_vanishes(t4):
    r = rng(103)
    pool = ["cos(t1)", "sin(t1)*cos(t2)", "cos(t3)^2", "sin(t4)+cos(t1)"]
    for _ in range(25):
        c = parse(t4, r.choice(pool)) * parse(t4, r.choice(pool))
        i = r.randrange(4)
        assert c.partial(i).circle_integral(i).is_zero()


def test_arc_integral_exact(t4):
    # int_0^pi (-sin t) dt = -2
    got = parse(t4, "-sin(t3)").arc_integral(2, 0, 1)
    assert got == Scalar.of(-2)
    # int_0^(pi/2) 1 dt = pi/2
    got = Coefficient.one(t4).arc_integral(0, 0, Fraction(1, 2))
    assert got == Scalar.pi(1, Fraction(1, 2))


def test_arc_integral_float(t4):
    got = parse(t4, "cos(t1)").arc_integral(0, 0, Fraction(1, 3))
    assert isinstance(got, float)
    assert abs(got - math.sin(math.pi / 3)) < 1e-9


def test_arc_integral_rejects_second_coordinate(t4):
    with pytest.raises(RingError):
        parse(t4, "cos(t1)*cos(t2)").arc_integral(0, 0, 1)


# ---------------------------------------------------------------------------
# evaluation


def test_eval_rational(ch3):
    assert parse(ch3, "1/(1+x)").eval((1, 0, 0)) == Fraction(1, 2)
    with pytest.raises(EvalError):
        parse(ch3, "x/(1+x)").eval((-1, 0, 0))


def test_eval_trig_exact_and_float(t4):
    assert parse(t4, "cos(t1)").eval((1, 0, 0, 0)) == Scalar.of(-1)
    v = parse(t4, "cos(t1)").eval((Fraction(1, 3), 0, 0, 0))
    assert isinstance(v, float) and abs(v - 0.5) < 1e-12


def test_eval_product_property(ch3, t4):
    r = rng(104)
    for _ in range(20):
        c = parse(ch3, r.choice(["x", "y+1", "x*z/(2+y)"]))
        d = parse(ch3, r.choice(["z", "x-1", "1/(1+x)"]))
        pt = tuple(Fraction(r.randint(0, 3)) for _ in range(3))
        assert (c * d).eval(pt) == c.eval(pt) * d.eval(pt)
    for _ in range(20):
        c = parse(t4, r.choice(["cos(t1)", "sin(t2)", "cos(t3)*sin(t4)"]))
        d = parse(t4, r.choice(["sin(t1)", "cos(t2)^2", "2"]))
        pt = tuple(Fraction(r.randint(0, 5), r.choice([1, 3, 7])) for _ in range(4))
        lhs = float((c * d).eval(pt))
        rhs = float(c.eval(pt)) * float(d.eval(pt))
        assert abs(lhs - rhs) < 1e-9


# ---------------------------------------------------------------------------
# ring axioms on seeded random triples


def _random_coeff(r, chart):
    from presymplectic.sampling import random_coefficient

    return random_coefficient(r, chart)


def test_ring_axioms(ch3, t4):
    r = rng(105)
    for chart in (ch3, t4):
        for _ in range(30):
            a, b, c = (_random_coeff(r, chart) for _ in range(3))
            assert (a + b) + c == a + (b + c)
            assert a + b == b + a
            assert (a * b) * c == a * (b * c)
            assert a * b == b * a
            assert a * (b + c) == a * b + a * c
            assert (a - a).is_zero()
            assert (a * Coefficient.one(chart)) == a


def test_scalar_ring():
    two_pi = Scalar.pi(1, 2)
    assert two_pi * two_pi == Scalar.pi(2, 4)
    assert (two_pi - two_pi).is_zero()
    assert Scalar.of(Fraction(3, 2)).as_fraction() == Fraction(3, 2)
    with pytest.raises(RingError):
        two_pi.as_fraction()
    assert str(Scalar.pi(2, -16)) == "-16*pi^2"


def test_serialization_is_deterministic(ch3, t4):
    a = parse(ch3, "y + x + x*y - 1/2")
    b = parse(ch3, "x*y + y - 1/2 + x")
    assert str(a) == str(b)
    c = parse(t4, "cos(t1)*cos(t2) + sin(t3)")
    assert str(c) == str(parse(t4, "sin(t3) + cos(t2)*cos(t1)"))


def test_trigpoly_canonicalization(t4):
    # frequencies are flipped so the first nonzero entry is positive
    c = parse(t4, "sin(t1)*cos(t2)")  # 1/2 sin(t1+t2) + 1/2 sin(t1-t2)
    assert all(k[0] >= 0 for k in c.value.terms)
    # the angle-addition collapse lands on a single canonical frequency
    total = c + parse(t4, "cos(t1)*sin(t2)")
    assert total.value.terms == {(1, 1, 0, 0): (Scalar(), Scalar.of(1))}

import random

import pytest
from fractions import Fraction

from presymplectic.coeffring import Chart, Coefficient, coeff_parse
from presymplectic.cartan import DifferentialForm, MultiVector
from presymplectic.presym import build_model


@pytest.fixture(scope="session")
def ch3():
    return Chart(["x", "y", "z"], "affine")


@pytest.fixture(scope="session")
def ch4():
    return Chart(["x", "y", "z", "w"], "affine")


@pytest.fixture(scope="session")
def t4():
    return Chart(["t1", "t2", "t3", "t4"], "periodic")


def parse(chart, text):
    return coeff_parse(text, chart)


def form(chart, *terms):
    """form(chart, (indices, 'coeff'), ...) with rational shortcuts."""
    out = {}
    deg = len(terms[0][0]) if terms else 0
    for idx, c in terms:
        if not isinstance(c, Coefficient):
            c = parse(chart, c) if isinstance(c, str) else Coefficient.const(chart, c)
        idx = tuple(idx)
        out[idx] = out[idx] + c if idx in out else c
    return DifferentialForm(chart, deg, out)


def mvec(chart, *terms):
    out = {}
    deg = len(terms[0][0]) if terms else 0
    for idx, c in terms:
        if not isinstance(c, Coefficient):
            c = parse(chart, c) if isinstance(c, str) else Coefficient.const(chart, c)
        idx = tuple(idx)
        out[idx] = out[idx] + c if idx in out else c
    return MultiVector(chart, deg, out)


def vector(chart, components):
    terms = {}
    for i, c in enumerate(components):
        if not isinstance(c, Coefficient):
            c = parse(chart, c) if isinstance(c, str) else Coefficient.const(chart, c)
        if not c.is_zero():
            terms[(i,)] = c
    return MultiVector(chart, 1, terms)


@pytest.fixture(scope="session")
def quad_model(ch3):
    """eta = dy^dz on the 3-chart, kernel spanned by d/dx."""
    return build_model(
        ch3,
        form(ch3, ((1, 2), 1)),
        [vector(ch3, [1, 0, 0])],
        [vector(ch3, [0, 1, 0]), vector(ch3, [0, 0, 1])],
    )


@pytest.fixture(scope="session")
def cubic_model(ch4):
    """eta = dy^dz on the 4-chart with the sheared, non-involutive
    complement spanned by d/dy and d/dz - y d/dx."""
    return build_model(
        ch4,
        form(ch4, ((1, 2), 1)),
        [vector(ch4, [1, 0, 0, 0]), vector(ch4, [0, 0, 0, 1])],
        [vector(ch4, [0, 1, 0, 0]), vector(ch4, ["-y", 0, 1, 0])],
    )


@pytest.fixture(scope="session")
def torus_model(t4):
    """eta = dt3^dt4 on the 4-torus, kernel spanned by d/dt1, d/dt2."""
    return build_model(
        t4,
        form(t4, ((2, 3), 1)),
        [vector(t4, [1, 0, 0, 0]), vector(t4, [0, 1, 0, 0])],
        [vector(t4, [0, 0, 1, 0]), vector(t4, [0, 0, 0, 1])],
    )


def rng(seed):
    return random.Random(seed)


def frac(a, b=1):
    return Fraction(a, b)

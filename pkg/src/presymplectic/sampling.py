"""Seeded sample generators for the property suites.

Every generator takes an explicit ``random.Random`` so that suites are
reproducible from a recorded seed; nothing here touches global state.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .coeffring import Chart, Coefficient
from .cartan import DifferentialForm, MultiVector

__all__ = [
    "random_coefficient",
    "random_form",
    "random_multivector",
    "monomial_coefficients",
    "monomial_forms",
    "monomial_multivectors",
    "random_horizontal_form",
    "random_vvf",
]


def monomial_coefficients(chart: Chart) -> list[Coefficient]:
    """One, each coordinate (or its cosine/sine), and one product."""
    out = [Coefficient.one(chart)]
    if chart.kind == "affine":
        for i in range(chart.dim):
            out.append(Coefficient.coordinate(chart, i))
        out.append(Coefficient.coordinate(chart, 0)
                   * Coefficient.coordinate(chart, chart.dim - 1))
    else:
        for i in range(chart.dim):
            out.append(Coefficient.cos(chart, i))
        out.append(Coefficient.sin(chart, 0))
        out.append(Coefficient.cos(chart, 0) * Coefficient.sin(chart, chart.dim - 1))
    return out


def random_coefficient(rng: random.Random, chart: Chart) -> Coefficient:
    q = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
    c = Coefficient.const(chart, q)
    for _ in range(rng.randint(0, 2)):
        i = rng.randrange(chart.dim)
        if chart.kind == "affine":
            c = c * Coefficient.coordinate(chart, i)
        else:
            f = Coefficient.cos if rng.random() < 0.5 else Coefficient.sin
            c = c * f(chart, i)
    return c


def _random_terms(rng, chart, degree, n_terms):
    idxs = list(itertools.combinations(range(chart.dim), degree))
    terms: dict[tuple, Coefficient] = {}
    for _ in range(n_terms):
        idx = rng.choice(idxs)
        c = random_coefficient(rng, chart)
        terms[idx] = terms[idx] + c if idx in terms else c
    return terms


def random_form(rng: random.Random, chart: Chart, degree: int,
                n_terms: int = 3) -> DifferentialForm:
    return DifferentialForm(chart, degree, _random_terms(rng, chart, degree, n_terms))


def random_multivector(rng: random.Random, chart: Chart, degree: int,
                       n_terms: int = 3) -> MultiVector:
    return MultiVector(chart, degree, _random_terms(rng, chart, degree, n_terms))


def monomial_forms(chart: Chart, max_degree: int | None = None,
                   varied_coefficients: bool = True) -> list[DifferentialForm]:
    """All coordinate-coframe monomials up to top degree, optionally with a
    few non-constant coefficients mixed in."""
    top = chart.dim if max_degree is None else max_degree
    coeffs = monomial_coefficients(chart) if varied_coefficients \
        else [Coefficient.one(chart)]
    out = []
    for deg in range(top + 1):
        for idx in itertools.combinations(range(chart.dim), deg):
            for c in coeffs:
                out.append(DifferentialForm(chart, deg, {idx: c}))
    return out


def monomial_multivectors(chart: Chart, max_degree: int | None = None,
                          varied_coefficients: bool = True) -> list[MultiVector]:
    top = chart.dim if max_degree is None else max_degree
    coeffs = monomial_coefficients(chart) if varied_coefficients \
        else [Coefficient.one(chart)]
    out = []
    for deg in range(top + 1):
        for idx in itertools.combinations(range(chart.dim), deg):
            for c in coeffs:
                out.append(MultiVector(chart, deg, {idx: c}))
    return out


def random_horizontal_form(rng: random.Random, model, degree: int,
                           n_terms: int = 2) -> DifferentialForm:
    """Random combination of coframe monomials with at least one
    complement factor (so the form vanishes on the kernel)."""
    n = model.chart.dim
    idxs = [
        T
        for T in itertools.combinations(range(n), degree)
        if any(t >= model.n_k for t in T)
    ]
    out = DifferentialForm.zero(model.chart, degree)
    for _ in range(n_terms):
        T = rng.choice(idxs)
        out = out + model.coframe_monomial(T).scale(
            random_coefficient(rng, model.chart))
    return out


def random_vvf(rng: random.Random, model, degree: int, n_terms: int = 2):
    from .foliation import VectorValuedForm

    terms = {}
    for _ in range(n_terms):
        kt = tuple(sorted(rng.sample(range(model.n_k), degree)))
        g = rng.randrange(model.n_g)
        c = random_coefficient(rng, model.chart)
        key = (kt, g)
        terms[key] = terms[key] + c if key in terms else c
    return VectorValuedForm(model, degree, terms)

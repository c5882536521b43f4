"""Models of constant-rank closed 2-forms with a chosen splitting.

A model packages a chart, a closed 2-form eta, frames for the kernel K
of eta and a complement G, the dual coframes (which exist in the ring
because the frame matrix must have unit determinant), and the bivector
field Z with ``Z# = -(eta|_G#)^(-1)``.  On top of it live the bigraded
decomposition of forms over ``wedge^j K* (x) wedge^k G*``, the
exponential parametrization ``eta + F(beta)`` of nearby forms of equal
rank, and the equivalence check between the flatness residual of beta
and closedness-plus-rank of its image.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .coeffring import Chart, Coefficient, RingError, Scalar
from .cartan import (
    DifferentialForm,
    MultiVector,
    apply_vectors,
    cmat_adjugate,
    cmat_det,
    cmat_mul,
    cmat_scale,
    de_rham,
    iota,
    iota_form,
    sharp,
    wedge,
)
from .koszul import KoszulStructure
from . import fiberlin

__all__ = [
    "PreSymplecticModel",
    "BigradedDecomposition",
    "build_model",
    "ModelError",
]


class ModelError(ValueError):
    """The supplied data do not form a valid model."""


class PreSymplecticModel:
    """Chart + closed 2-form + splitting frames + derived bivector."""

    def __init__(self, chart: Chart, eta: DifferentialForm,
                 k_frame: list[MultiVector], g_frame: list[MultiVector]):
        if eta.chart != chart or eta.degree != 2:
            raise ModelError("eta must be a 2-form on the chart")
        n = chart.dim
        if len(k_frame) + len(g_frame) != n:
            raise ModelError("frames must span the tangent space")
        if not de_rham(eta).is_zero():
            raise ModelError("eta is not closed")
        for X in k_frame:
            if not iota(X, eta).is_zero():
                raise ModelError(f"kernel frame field {X} is not in ker(eta)")
        self.chart = chart
        self.eta = eta
        self.k_frame = list(k_frame)
        self.g_frame = list(g_frame)
        self.n_k = len(k_frame)
        self.n_g = len(g_frame)
        self.rank = self.n_g

        # frame matrix: column j holds the components of the j-th frame
        # field (K fields first); unit determinant keeps the dual
        # coframes inside the ring.
        fields = self.k_frame + self.g_frame
        A = [[f.coefficient((i,)) for f in fields] for i in range(n)]
        dA = cmat_det(A)
        if not dA.is_unit():
            raise ModelError("frame matrix determinant is not a ring unit")
        Ainv = cmat_scale(cmat_adjugate(A), dA.invert())
        self.frame_fields = fields
        self.coframes = [
            DifferentialForm(chart, 1,
                             {(i,): Ainv[j][i] for i in range(n)})
            for j in range(n)
        ]
        self.k_coframes = self.coframes[: self.n_k]
        self.g_coframes = self.coframes[self.n_k:]

        # restriction of eta to G and the derived bivector
        M_g = [[apply_vectors(eta, [self.g_frame[j], self.g_frame[i]])
                for j in range(self.n_g)] for i in range(self.n_g)]
        dG = cmat_det(M_g) if self.n_g else Coefficient.one(chart)
        if not dG.is_unit():
            raise ModelError("eta restricted to G is not invertible in the ring")
        W = cmat_scale(cmat_adjugate(M_g), dG.invert()) if self.n_g else []
        Z = MultiVector.zero(chart, 2)
        for a in range(self.n_g):
            for b in range(a + 1, self.n_g):
                c = -W[b][a]
                if not c.is_zero():
                    Z = Z + wedge(self.g_frame[a], self.g_frame[b]).scale(c)
        self.Z = Z
        self.koszul = KoszulStructure(chart, Z)
        self.z_frame_sharp = [[-W[i][j] for j in range(self.n_g)]
                              for i in range(self.n_g)] if self.n_g else []
        self._verify_derived()

    def _verify_derived(self):
        """Construction-time invariants of the derived bivector."""
        chart = self.chart
        S = cmat_mul(sharp(self.Z), sharp(self.eta))
        for E in self.g_frame:
            v = [E.coefficient((i,)) for i in range(chart.dim)]
            out = _cmat_vec(S, v)
            if any(not (out[i] + v[i]).is_zero() for i in range(chart.dim)):
                raise ModelError("Z# eta# is not -id on G")
        for X in self.k_frame:
            v = [X.coefficient((i,)) for i in range(chart.dim)]
            out = _cmat_vec(S, v)
            if any(not c.is_zero() for c in out):
                raise ModelError("Z# eta# is not zero on K")
        comps = self.multivector_components(self.koszul.zz)
        for idx, c in comps.items():
            n_gfac = sum(1 for t in idx if t >= self.n_k)
            if n_gfac == 3 and not c.is_zero():
                raise ModelError("[Z,Z] has a component in wedge^3 G")

    # -- frame expansion ------------------------------------------------
    def form_components(self, w: DifferentialForm) -> dict[tuple, Coefficient]:
        """Expansion of a form over the coframe basis, keyed by increasing
        tuples of frame indices (K indices first: 0..n_k-1, then G)."""
        out = {}
        for T in itertools.combinations(range(self.chart.dim), w.degree):
            c = apply_vectors(w, [self.frame_fields[t] for t in T])
            if not c.is_zero():
                out[T] = c
        return out

    def multivector_components(self, Y: MultiVector) -> dict[tuple, Coefficient]:
        """Expansion of a multivector over the frame basis."""
        out = {}
        for T in itertools.combinations(range(self.chart.dim), Y.degree):
            cur = Y
            for t in T:
                cur = iota_form(self.coframes[t], cur)
            c = cur.coefficient(())
            if not c.is_zero():
                out[T] = c
        return out

    def coframe_monomial(self, T: tuple) -> DifferentialForm:
        w = DifferentialForm(self.chart, 0, {(): Coefficient.one(self.chart)})
        for t in T:
            w = wedge(w, self.coframes[t])
        return w

    # -- projections ----------------------------------------------------
    def g_components(self, v: MultiVector) -> list[Coefficient]:
        return [iota(v, eps).coefficient(()) for eps in self.g_coframes]

    def k_components(self, v: MultiVector) -> list[Coefficient]:
        return [iota(v, kap).coefficient(()) for kap in self.k_coframes]

    def project_g(self, v: MultiVector) -> MultiVector:
        out = MultiVector.zero(self.chart, 1)
        for c, E in zip(self.g_components(v), self.g_frame):
            out = out + E.scale(c)
        return out

    def project_k(self, v: MultiVector) -> MultiVector:
        out = MultiVector.zero(self.chart, 1)
        for c, X in zip(self.k_components(v), self.k_frame):
            out = out + X.scale(c)
        return out

    def z_sharp_form(self, xi: DifferentialForm) -> MultiVector:
        """The vector field iota(xi, Z) for a 1-form xi."""
        return iota_form(xi, self.Z)

    # -- per-point fiber data --------------------------------------------
    def fiber_at(self, point):
        """eta and the splitting as exact rational data at a chart point."""
        eta_mat = _eval_matrix(sharp(self.eta), point)
        k_basis = [_eval_vector(X, point) for X in self.k_frame]
        g_basis = [_eval_vector(E, point) for E in self.g_frame]
        split = fiberlin.FiberSplitting(eta_mat, k_basis=k_basis, g_basis=g_basis)
        return eta_mat, split

    def rank_at(self, w: DifferentialForm, point) -> int:
        return fiberlin.rank(_eval_matrix(sharp(w), point))


def _cmat_vec(M, v):
    n = len(M)
    out = []
    for i in range(n):
        acc = None
        for j in range(n):
            t = M[i][j] * v[j]
            acc = t if acc is None else acc + t
        out.append(acc)
    return out


def _to_fraction(x) -> Fraction:
    if isinstance(x, Scalar):
        return x.as_fraction()
    return Fraction(x)


def _eval_matrix(M, point):
    return [[_to_fraction(c.eval(point)) for c in row] for row in M]


def _eval_vector(v: MultiVector, point):
    return [
        _to_fraction(v.coefficient((i,)).eval(point))
        for i in range(v.chart.dim)
    ]


def build_model(chart: Chart, eta: DifferentialForm,
                k_frame: list[MultiVector],
                g_frame: list[MultiVector]) -> PreSymplecticModel:
    """Validate the data and derive the bivector; see PreSymplecticModel."""
    return PreSymplecticModel(chart, eta, k_frame, g_frame)


class BigradedDecomposition:
    """Components of a form over wedge^j K* (x) wedge^k G*."""

    def __init__(self, model: PreSymplecticModel, w: DifferentialForm):
        if w.chart != model.chart:
            raise RingError("form lives on a different chart")
        self.model = model
        self.degree = w.degree
        comps = model.form_components(w)
        self.components: dict[tuple[int, int], dict[tuple, Coefficient]] = {}
        for T, c in comps.items():
            j = sum(1 for t in T if t < model.n_k)
            k = len(T) - j
            self.components.setdefault((j, k), {})[T] = c
        # the components must reassemble the input exactly
        back = DifferentialForm.zero(model.chart, w.degree)
        for part in self.components.values():
            for T, c in part.items():
                back = back + model.coframe_monomial(T).scale(c)
        if not (back - w).is_zero():
            raise AssertionError("bigraded components do not sum back")

    def component_form(self, j: int, k: int) -> DifferentialForm:
        out = DifferentialForm.zero(self.model.chart, self.degree)
        for T, c in self.components.get((j, k), {}).items():
            out = out + self.model.coframe_monomial(T).scale(c)
        return out

    def is_horizontal(self) -> bool:
        return all(k > 0 for (_, k) in self.components)

    def filtration_degree(self):
        """min k over nonzero components; None for the zero form."""
        if not self.components:
            return None
        return min(k for (_, k) in self.components)


def decompose(model: PreSymplecticModel, w: DifferentialForm) -> BigradedDecomposition:
    return BigradedDecomposition(model, w)


def is_horizontal(model: PreSymplecticModel, w: DifferentialForm) -> bool:
    return BigradedDecomposition(model, w).is_horizontal()


def exp_eta_section(model: PreSymplecticModel, beta: DifferentialForm) -> DifferentialForm:
    """eta + F(beta), computed inside the coefficient ring."""
    return model.eta + model.koszul.f_section(beta)


def verify_main_theorem(model: PreSymplecticModel, beta: DifferentialForm,
                        points) -> dict:
    """Check that flatness of beta coincides with [exp_eta(beta) closed and
    of rank equal to the model rank at every sample point]."""
    dec = BigradedDecomposition(model, beta)
    if not dec.is_horizontal():
        raise ModelError("beta must be horizontal")
    n = model.chart.dim
    for p in points:
        T = fiberlin.mat_add(
            fiberlin.eye(n),
            fiberlin.mat_mul(_eval_matrix(sharp(model.Z), p),
                             _eval_matrix(sharp(beta), p)),
        )
        if fiberlin.det(T) == 0:
            raise ModelError(f"the deformation leaves I_Z at sample point {p}")
    mc_zero = model.koszul.mc_residual(beta).is_zero()
    image = exp_eta_section(model, beta)
    closed = de_rham(image).is_zero()
    ranks = [model.rank_at(image, p) for p in points]
    rank_ok = all(r == model.rank for r in ranks)
    return {
        "mc_residual_zero": mc_zero,
        "image_closed": closed,
        "ranks": ranks,
        "rank_expected": model.rank,
        "image_side": closed and rank_ok,
        "agree": mc_zero == (closed and rank_ok),
    }


def closure_and_filtration_check(model: PreSymplecticModel,
                                 samples: list[DifferentialForm]) -> list[dict]:
    """Filtration bounds of the structure maps: lam1 keeps F^k, lam2 maps
    F^k x F^l into F^(k+l-1), lam3 maps F^k x F^l x F^m into F^(k+l+m-2);
    horizontal inputs give horizontal outputs."""
    K = model.koszul

    def fdeg(w):
        return BigradedDecomposition(model, w).filtration_degree()

    def ok(bound, w):
        d = fdeg(w)
        return d is None or d >= max(bound, 0)

    report = []
    degs = {i: fdeg(w) for i, w in enumerate(samples)}
    for i, w in enumerate(samples):
        if degs[i] is None:
            continue
        out = de_rham(w)
        report.append(_entry("filtration-lam1", (i,), ok(degs[i], out)))
    for i, j in itertools.combinations_with_replacement(range(len(samples)), 2):
        if degs[i] is None or degs[j] is None:
            continue
        out = K.koszul2(samples[i], samples[j])
        report.append(
            _entry("filtration-lam2", (i, j), ok(degs[i] + degs[j] - 1, out))
        )
    for i, j, k in itertools.combinations_with_replacement(range(len(samples)), 3):
        if None in (degs[i], degs[j], degs[k]):
            continue
        out = K.koszul3(samples[i], samples[j], samples[k])
        report.append(
            _entry("filtration-lam3", (i, j, k),
                   ok(degs[i] + degs[j] + degs[k] - 2, out))
        )
    horiz = [w for w in samples if BigradedDecomposition(model, w).is_horizontal()]
    for i, w in enumerate(horiz):
        report.append(
            _entry("horizontal-lam1", (i,),
                   _horizontal_or_zero(model, de_rham(w)))
        )
    for i, j in itertools.combinations_with_replacement(range(len(horiz)), 2):
        report.append(
            _entry("horizontal-lam2", (i, j),
                   _horizontal_or_zero(model, K.koszul2(horiz[i], horiz[j])))
        )
    return report


def _horizontal_or_zero(model, w):
    return w.is_zero() or BigradedDecomposition(model, w).is_horizontal()


def _entry(check, sample, ok):
    return {"check": check, "sample": list(sample),
            "status": "pass" if ok else "fail", "witness": None}

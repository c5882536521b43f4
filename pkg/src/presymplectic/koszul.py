"""Brackets induced by a bivector field and their homotopy structure.

On a chart with bivector field Z, the binary bracket on forms is

    [a, b]_Z = (-1)^(|a|+1) ( L_Z(a^b) - L_Z(a)^b - (-1)^|a| a^L_Z(b) )

and the trinary bracket is ``(a# ^ b# ^ c#)(1/2 [Z,Z])``.  Together with
the exterior derivative these equip the double degree shift of the form
algebra with structure maps

    lam1 = d,
    lam2(a . b)     = (-1)^|a|   [a, b]_Z,
    lam3(a . b . c) = (-1)^(|b|+1) (a# ^ b# ^ c#)(1/2 [Z,Z]),

whose generalized Jacobi relations the checker in this module verifies.
A degree-2 form b is flat (Maurer-Cartan) when

    d b + 1/2 [b, b]_Z - 1/6 (b# ^ b# ^ b#)(1/2 [Z,Z]) = 0,

which is exactly the shifted residual
``lam1(b) + 1/2 lam2(b,b) + 1/6 lam3(b,b,b)``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .coeffring import Chart, Coefficient, RingError
from .cartan import (
    DifferentialForm,
    MultiVector,
    cmat_add,
    cmat_det,
    cmat_adjugate,
    cmat_id,
    cmat_mul,
    cmat_scale,
    de_rham,
    form_from_sharp,
    iota,
    lie,
    multi_sharp,
    schouten,
    sharp,
    wedge,
)

__all__ = [
    "ShiftedElement",
    "KoszulStructure",
    "higher_koszul",
    "higher_koszul_closed",
    "bv_square_check",
    "linf_relation_residual",
    "linf_relation_check",
    "koszul_sign",
    "unshuffles",
]


class ShiftedElement:
    """A form viewed in the doubly shifted grading (degree |form| - 2)."""

    __slots__ = ("form", "sdeg")

    def __init__(self, form: DifferentialForm, sdeg: int | None = None):
        if sdeg is None:
            sdeg = form.degree - 2
        if sdeg != form.degree - 2:
            raise ValueError("shifted degree must be form degree - 2")
        self.form = form
        self.sdeg = sdeg

    @property
    def degree(self) -> int:
        """Unshifted form degree."""
        return self.sdeg + 2

    def __add__(self, other: "ShiftedElement") -> "ShiftedElement":
        return ShiftedElement(self.form + other.form)

    def scale(self, q) -> "ShiftedElement":
        return ShiftedElement(self.form.scale(q))

    def __neg__(self):
        return ShiftedElement(-self.form)

    def is_zero(self) -> bool:
        return self.form.is_zero()

    def __eq__(self, other):
        return isinstance(other, ShiftedElement) and self.form == other.form

    __hash__ = None

    def __repr__(self):
        return f"<shifted deg {self.sdeg}: {self.form}>"


class KoszulStructure:
    """A chart with a bivector field Z and its cached self-bracket."""

    def __init__(self, chart: Chart, Z: MultiVector):
        if Z.chart != chart:
            raise RingError("bivector lives on a different chart")
        if Z.degree != 2 and not Z.is_zero():
            raise ValueError("Z must be a bivector field")
        self.chart = chart
        self.Z = Z
        self.zz = schouten(Z, Z)
        self.half_zz = self.zz.scale(Fraction(1, 2))
        self.z_sharp = sharp(Z)

    def recompute_self_bracket(self) -> MultiVector:
        return schouten(self.Z, self.Z)

    def is_poisson(self) -> bool:
        return self.zz.is_zero()

    # -- brackets -------------------------------------------------------
    def koszul2(self, a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
        if a.chart != self.chart or b.chart != self.chart:
            raise RingError("bracket arguments live on a different chart")
        lz_ab = lie(self.Z, wedge(a, b))
        lza_b = wedge(lie(self.Z, a), b)
        a_lzb = wedge(a, lie(self.Z, b))
        inner = lz_ab - lza_b
        inner = inner - a_lzb if a.degree % 2 == 0 else inner + a_lzb
        return inner if (a.degree + 1) % 2 == 0 else -inner

    def koszul3(self, a, b, c) -> DifferentialForm:
        for x in (a, b, c):
            if x.chart != self.chart:
                raise RingError("bracket arguments live on a different chart")
        return multi_sharp([a, b, c], self.half_zz)

    # -- structure maps on the shifted complex ---------------------------
    def lam(self, arity: int, args: list[ShiftedElement]) -> ShiftedElement:
        if len(args) != arity:
            raise ValueError(f"arity {arity} got {len(args)} arguments")
        if arity == 1:
            return ShiftedElement(de_rham(args[0].form))
        if arity == 2:
            a, b = args
            out = self.koszul2(a.form, b.form)
            return ShiftedElement(out if a.degree % 2 == 0 else -out)
        if arity == 3:
            a, b, c = args
            out = self.koszul3(a.form, b.form, c.form)
            return ShiftedElement(out if (b.degree + 1) % 2 == 0 else -out)
        raise ValueError("only arities 1..3 carry nonzero brackets")

    # -- Maurer-Cartan --------------------------------------------------
    def mc_residual(self, beta: DifferentialForm) -> DifferentialForm:
        """d b + 1/2 [b,b]_Z - 1/6 (b#^b#^b#)(1/2 [Z,Z]); zero iff flat."""
        if beta.degree != 2:
            raise ValueError("Maurer-Cartan elements are 2-forms")
        res = de_rham(beta) + self.koszul2(beta, beta).scale(Fraction(1, 2)) \
            - self.koszul3(beta, beta, beta).scale(Fraction(1, 6))
        # the same residual through the shifted structure maps
        e = ShiftedElement(beta)
        shifted = self.lam(1, [e]) + self.lam(2, [e, e]).scale(Fraction(1, 2)) \
            + self.lam(3, [e, e, e]).scale(Fraction(1, 6))
        assert shifted.form == res, "shifted and unshifted residuals disagree"
        return res

    def is_mc(self, beta: DifferentialForm) -> bool:
        return self.mc_residual(beta).is_zero()

    # -- the section-level fiber transformation --------------------------
    def f_section(self, beta: DifferentialForm) -> DifferentialForm:
        """F(beta) with sharp ``beta#(id + Z# beta#)^(-1)``, inverted inside
        the coefficient ring via adjugate over determinant; the determinant
        must be a unit of the ring."""
        if beta.degree != 2:
            raise ValueError("F acts on 2-forms")
        n = self.chart.dim
        bs = sharp(beta)
        T = cmat_add(cmat_id(self.chart, n), cmat_mul(self.z_sharp, bs))
        d = cmat_det(T)
        if not d.is_unit():
            raise RingError(
                "det(id + Z# beta#) is not a unit of the coefficient ring; "
                "evaluate pointwise (fiberlin) at sample points instead"
            )
        Tinv = cmat_scale(cmat_adjugate(T), d.invert())
        return form_from_sharp(self.chart, cmat_mul(bs, Tinv))

    def f_inverse_section(self, alpha: DifferentialForm) -> DifferentialForm:
        """Inverse transformation: alpha#(id - Z# alpha#)^(-1)."""
        if alpha.degree != 2:
            raise ValueError("F^(-1) acts on 2-forms")
        n = self.chart.dim
        As = sharp(alpha)
        T = cmat_add(cmat_id(self.chart, n),
                     cmat_scale(cmat_mul(self.z_sharp, As), Fraction(-1)))
        d = cmat_det(T)
        if not d.is_unit():
            raise RingError("det(id - Z# alpha#) is not a unit of the ring")
        Tinv = cmat_scale(cmat_adjugate(T), d.invert())
        return form_from_sharp(self.chart, cmat_mul(As, Tinv))

    def psi_partial_sum(self, beta: DifferentialForm, N: int) -> DifferentialForm:
        """Partial sum of the conjugation series: sum_{j<=N} a_j with
        ``a_j# = (-1)^j beta# (Z# beta#)^j``."""
        if beta.degree != 2:
            raise ValueError("the series is defined for 2-forms")
        if N < 0:
            raise ValueError("N must be nonnegative")
        bs = sharp(beta)
        zb = cmat_mul(self.z_sharp, bs)
        total = bs
        power = bs
        for j in range(1, N + 1):
            power = cmat_mul(power, zb)
            total = cmat_add(total, cmat_scale(power, Fraction((-1) ** j)))
        return form_from_sharp(self.chart, total)


# ---------------------------------------------------------------------------
# higher brackets of a single operator


def higher_koszul(op, n: int, args: list[DifferentialForm]) -> DifferentialForm:
    """n-th bracket of an operator on forms, defined recursively:
    K(f)_1 = f and

        K(f)_n(a_1..a_n) = K(f)_{n-1}(a_1, .., a_{n-2}, a_{n-1}^a_n)
                         - K(f)_{n-1}(a_1, .., a_{n-1}) ^ a_n
                         - (-1)^(|a_{n-1}||a_n|)
                           K(f)_{n-1}(a_1, .., a_{n-2}, a_n) ^ a_{n-1}.
    """
    if n < 1:
        raise ValueError("arity must be at least 1")
    if len(args) != n:
        raise ValueError("argument count does not match the arity")
    if n == 1:
        return op(args[0])
    head, x, y = args[:-2], args[-2], args[-1]
    first = higher_koszul(op, n - 1, head + [wedge(x, y)])
    second = wedge(higher_koszul(op, n - 1, head + [x]), y)
    third = wedge(higher_koszul(op, n - 1, head + [y]), x)
    out = first - second
    return out - third if (x.degree * y.degree) % 2 == 0 else out + third


def higher_koszul_closed(vectors: list[MultiVector], r: int,
                         args: list[DifferentialForm]) -> DifferentialForm:
    """Closed unshuffle formula for the r-th bracket of contraction by the
    decomposable multivector ``vectors[0] ^ .. ^ vectors[m-1]`` (r <= m):

        sum over compositions i_1+..+i_r = m (i_p >= 1) and over
        (i_1,..,i_r)-unshuffles s of
        (-1)^# (iota_{Y_s(1)}..iota_{Y_s(i_1)} a_1) ^ .. ^ (.. a_r),

    with # = |s| + sum_{p>=2} i_p (|a_1| + .. + |a_{p-1}|).  Serves as the
    independent oracle for :func:`higher_koszul`.
    """
    m = len(vectors)
    if not args or r != len(args) or r > m:
        raise ValueError("need r arguments and r <= number of vectors")
    chart = vectors[0].chart
    deg = sum(a.degree for a in args) - m
    total = DifferentialForm.zero(chart, max(deg, 0))
    degs = [a.degree for a in args]
    for comp in _compositions(m, r):
        offsets = [0]
        for i in comp:
            offsets.append(offsets[-1] + i)
        for perm in _block_unshuffles(m, comp):
            inv = sum(
                1
                for i in range(m)
                for j in range(i + 1, m)
                if perm[i] > perm[j]
            )
            sign = inv
            for p in range(1, r):
                sign += comp[p] * sum(degs[:p])
            piece = None
            for p in range(r):
                block = perm[offsets[p]: offsets[p + 1]]
                val = args[p]
                for q in reversed(block):
                    val = iota(vectors[q], val)
                piece = val if piece is None else wedge(piece, val)
                if piece.is_zero():
                    break
            else:
                total = total + piece if sign % 2 == 0 else total - piece
    return total


def _compositions(m: int, r: int):
    """All (i_1..i_r) with i_p >= 1 summing to m."""
    if r == 1:
        yield (m,)
        return
    for first in range(1, m - r + 2):
        for rest in _compositions(m - first, r - 1):
            yield (first,) + rest


def _block_unshuffles(m: int, blocks: tuple[int, ...]):
    """Permutations of range(m) increasing within each consecutive block."""
    def rec(remaining: frozenset, bl: tuple[int, ...]):
        if not bl:
            yield ()
            return
        for chosen in itertools.combinations(sorted(remaining), bl[0]):
            for rest in rec(remaining - set(chosen), bl[1:]):
                yield chosen + rest

    yield from rec(frozenset(range(m)), blocks)


# ---------------------------------------------------------------------------
# squaring of the degree-shifted ring operator


def bv_square_check(K: KoszulStructure, samples: list[DifferentialForm]) -> list[dict]:
    """Expand the square of ``d - t L_Z - t^2 1/2 iota_[Z,Z]`` in powers of
    t and apply each coefficient operator to every sample; all five must
    vanish identically.  Returns one report entry per (power, sample)."""
    L = lambda w: lie(K.Z, w)
    I3 = lambda w: iota(K.zz, w)
    half = Fraction(1, 2)
    quarter = Fraction(1, 4)
    coeffs = {
        0: lambda w: de_rham(de_rham(w)),
        1: lambda w: -(de_rham(L(w)) + L(de_rham(w))),
        2: lambda w: L(L(w)) - (de_rham(I3(w)) + I3(de_rham(w))).scale(half),
        3: lambda w: (L(I3(w)) + I3(L(w))).scale(half),
        4: lambda w: I3(I3(w)).scale(quarter),
    }
    report = []
    for power in range(5):
        op = coeffs[power]
        for i, w in enumerate(samples):
            out = op(w)
            report.append(
                {
                    "check": f"bv-square-t{power}",
                    "sample": i,
                    "status": "pass" if out.is_zero() else "fail",
                    "witness": None if out.is_zero() else out.serialize(),
                }
            )
    return report


# ---------------------------------------------------------------------------
# generalized Jacobi relations


def koszul_sign(degrees: list[int], perm: tuple[int, ...]) -> int:
    """Sign of reordering graded symbols of the given degrees by perm."""
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j] and degrees[perm[i]] % 2 and degrees[perm[j]] % 2:
                sign = -sign
    return sign


def unshuffles(i: int, n: int):
    """(i, n-i)-unshuffles as index tuples."""
    universe = range(n)
    for S in itertools.combinations(universe, i):
        rest = tuple(t for t in universe if t not in S)
        yield S + rest


def linf_relation_residual(bracket, sdegs: list[int], args: list, n: int):
    """Evaluate sum over i+j = n+1 and (i, n-i)-unshuffles s of
    eps(s) bracket_j(bracket_i(x_{s(1)}..x_{s(i)}), x_{s(i+1)}..x_{s(n)}).

    ``bracket(arity, elems)`` must return elements supporting ``+`` and
    ``scale``; arities outside 1..3 are treated as zero."""
    if len(args) != n or len(sdegs) != n:
        raise ValueError("need n arguments with their shifted degrees")
    total = None
    for i in range(1, min(n, 3) + 1):
        j = n + 1 - i
        if not 1 <= j <= 3:
            continue
        for perm in unshuffles(i, n):
            eps = koszul_sign(sdegs, perm)
            inner = bracket(i, [args[p] for p in perm[:i]])
            outer = bracket(j, [inner] + [args[p] for p in perm[i:]])
            term = outer.scale(Fraction(eps))
            total = term if total is None else total + term
    return total


def linf_relation_check(bracket, sdeg_of, samples: list[list], n_values=range(1, 6)):
    """Run the generalized Jacobi relations over sample tuples; returns
    report entries with any nonzero residual serialized as witness."""
    report = []
    for n in n_values:
        for tup_idx, tup in enumerate(samples):
            if len(tup) < n:
                continue
            args = list(tup[:n])
            sdegs = [sdeg_of(x) for x in args]
            res = linf_relation_residual(bracket, sdegs, args, n)
            ok = res is None or res.is_zero()
            report.append(
                {
                    "check": f"linf-relation-n{n}",
                    "sample": tup_idx,
                    "status": "pass" if ok else "fail",
                    "witness": None if ok else repr(res),
                }
            )
    return report

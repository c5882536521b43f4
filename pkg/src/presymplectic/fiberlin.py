"""Per-fiber exact linear algebra over Q for skew bilinear forms.

A skew form ``b`` on Q^n is handled through its sharp matrix ``M``,
the matrix of ``v -> b(v, .)`` in the standard basis, so column j holds
the components of the contraction with ``e_j`` (``M[i][j] = b(e_j, e_i)``
and ``M^T = -M``).  All arithmetic is exact; every question asked here
(rank, kernels, invertibility) is decidable.
"""

from __future__ import annotations

import random
from fractions import Fraction

__all__ = [
    "as_skew",
    "mat_mul",
    "mat_vec",
    "mat_add",
    "mat_sub",
    "mat_neg",
    "mat_scale",
    "eye",
    "zeros",
    "transpose",
    "det",
    "inverse",
    "rank",
    "kernel_basis",
    "span_equal",
    "mat_str",
    "NotInvertible",
    "rank_kernel",
    "f_map",
    "f_inverse",
    "FiberSplitting",
    "exp_eta_fiber",
    "in_iz",
    "random_unimodular",
    "random_presymplectic_fiber",
    "random_skew",
    "random_horizontal",
]

Matrix = list[list[Fraction]]
Vector = list[Fraction]

_F0 = Fraction(0)
_F1 = Fraction(1)


class NotInvertible(ValueError):
    """Raised with a kernel witness when a required inverse fails."""

    def __init__(self, message: str, witness: Vector | None = None):
        super().__init__(message)
        self.witness = witness


def _frac_rows(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def as_skew(rows) -> Matrix:
    M = _frac_rows(rows)
    n = len(M)
    for i in range(n):
        if len(M[i]) != n:
            raise ValueError("matrix is not square")
        for j in range(i, n):
            if M[i][j] != -M[j][i]:
                raise ValueError(f"matrix is not skew at ({i},{j})")
    return M


def zeros(n: int, m: int | None = None) -> Matrix:
    return [[_F0] * (m if m is not None else n) for _ in range(n)]


def eye(n: int) -> Matrix:
    M = zeros(n)
    for i in range(n):
        M[i][i] = _F1
    return M


def transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)]


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_neg(A):
    return [[-a for a in row] for row in A]


def mat_scale(A, q) -> Matrix:
    q = Fraction(q)
    return [[a * q for a in row] for row in A]


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n, k, m = len(A), len(B), len(B[0])
    out = zeros(n, m)
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for r in range(k):
            a = Ai[r]
            if a:
                Br = B[r]
                for j in range(m):
                    if Br[j]:
                        row[j] += a * Br[j]
    return out


def mat_vec(A: Matrix, v: Vector) -> Vector:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def _rref(M: Matrix):
    """Reduced row echelon form; returns (rref, pivot columns)."""
    A = [row[:] for row in M]
    n = len(A)
    m = len(A[0]) if n else 0
    pivots = []
    r = 0
    for c in range(m):
        pivot = next((i for i in range(r, n) if A[i][c]), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(n):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return A, pivots


def rank(M: Matrix) -> int:
    return len(_rref(M)[1])


def kernel_basis(M: Matrix) -> list[Vector]:
    """Basis of the right kernel, deterministic ordering by free column."""
    if not M:
        return []
    R, pivots = _rref(M)
    m = len(M[0])
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [_F0] * m
        v[fc] = _F1
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][fc]
        basis.append(v)
    return basis


def det(M: Matrix) -> Fraction:
    A = [row[:] for row in M]
    n = len(A)
    d = _F1
    for c in range(n):
        pivot = next((i for i in range(c, n) if A[i][c]), None)
        if pivot is None:
            return _F0
        if pivot != c:
            A[c], A[pivot] = A[pivot], A[c]
            d = -d
        d *= A[c][c]
        inv_p = 1 / A[c][c]
        for i in range(c + 1, n):
            if A[i][c]:
                f = A[i][c] * inv_p
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return d


def inverse(M: Matrix) -> Matrix:
    n = len(M)
    A = [row[:] + e for row, e in zip(M, eye(n))]
    R, pivots = _rref(A)
    if pivots[: n] != list(range(n)):
        ker = kernel_basis(M)
        raise NotInvertible("matrix is singular", ker[0] if ker else None)
    return [row[n:] for row in R]


def span_equal(A: list[Vector], B: list[Vector]) -> bool:
    """Do two lists of vectors span the same subspace?"""
    if not A and not B:
        return True
    ra = rank(A) if A else 0
    rb = rank(B) if B else 0
    return ra == rb == rank(A + B)


def mat_str(M: Matrix) -> str:
    return "[" + "; ".join(" ".join(str(x) for x in row) for row in M) + "]"


# ---------------------------------------------------------------------------
# rank, the fiber transformation F, and the exponential chart


def rank_kernel(beta) -> tuple[int, list[Vector]]:
    """Rank (always even) and an exact kernel basis of a skew form."""
    M = as_skew(beta)
    r = rank(M)
    assert r % 2 == 0, "skew matrices have even rank"
    return r, kernel_basis(M)


def f_map(beta: Matrix, z: Matrix) -> Matrix:
    """The fiber transformation: beta (id + z beta)^(-1); requires
    ``id + z beta`` invertible (beta in I_z)."""
    n = len(beta)
    T = mat_add(eye(n), mat_mul(z, beta))
    try:
        Tinv = inverse(T)
    except NotInvertible as e:
        raise NotInvertible("not in I_Z: id + z*beta is singular", e.witness)
    return mat_mul(beta, Tinv)


def f_inverse(alpha: Matrix, z: Matrix) -> Matrix:
    """Inverse transformation: alpha (id - z alpha)^(-1)."""
    n = len(alpha)
    T = mat_sub(eye(n), mat_mul(z, alpha))
    try:
        Tinv = inverse(T)
    except NotInvertible as e:
        raise NotInvertible("not in I_{-Z}: id - z*alpha is singular", e.witness)
    return mat_mul(alpha, Tinv)


class FiberSplitting:
    """A skew form eta together with a complement of its kernel.

    ``k_basis`` must span ker(eta) and ``g_basis`` a complement on which
    eta is invertible; the derived matrix ``z`` satisfies
    ``z eta = -id on G, 0 on K`` and vanishes on the annihilator of G.
    """

    def __init__(self, eta, k_basis: list[Vector] | None = None,
                 g_basis: list[Vector] | None = None):
        self.eta = as_skew(eta)
        self.n = len(self.eta)
        r, ker = rank_kernel(self.eta)
        self.rank = r
        if k_basis is None:
            k_basis = ker
        k_basis = [[Fraction(x) for x in v] for v in k_basis]
        if not span_equal(k_basis, ker):
            raise ValueError("k_basis does not span the kernel of eta")
        if g_basis is None:
            g_basis = self._default_complement(k_basis)
        g_basis = [[Fraction(x) for x in v] for v in g_basis]
        C = transpose(g_basis + k_basis)  # columns: G then K
        try:
            Cinv = inverse(C)
        except NotInvertible:
            raise ValueError("k_basis + g_basis is not a basis") from None
        self.k_basis = k_basis
        self.g_basis = g_basis
        self.basis = C
        self.basis_inv = Cinv
        eta_ad = mat_mul(transpose(C), mat_mul(self.eta, C))
        Mg = [row[:r] for row in eta_ad[:r]]
        try:
            z_g = mat_neg(inverse(Mg))
        except NotInvertible:
            raise ValueError("eta is degenerate on the chosen complement") from None
        z_ad = zeros(self.n)
        for i in range(r):
            for j in range(r):
                z_ad[i][j] = z_g[i][j]
        self.z = mat_mul(C, mat_mul(z_ad, transpose(C)))
        # invariant: z eta acts as -id on G and 0 on K
        ZM = mat_mul(self.z, self.eta)
        for g in g_basis:
            assert mat_vec(ZM, g) == [-x for x in g]
        for k in k_basis:
            assert mat_vec(ZM, k) == [_F0] * self.n

    def _default_complement(self, k_basis: list[Vector]) -> list[Vector]:
        """Greedy coordinate complement of the kernel."""
        chosen: list[Vector] = []
        for i in range(self.n):
            e = [_F0] * self.n
            e[i] = _F1
            if rank(k_basis + chosen + [e]) > rank(k_basis + chosen):
                chosen.append(e)
            if len(chosen) == self.rank:
                break
        return chosen

    # -- adapted-basis plumbing ----------------------------------------
    def to_adapted(self, beta: Matrix) -> Matrix:
        """Sharp matrix of a form in the (G, K) adapted basis."""
        return mat_mul(transpose(self.basis), mat_mul(beta, self.basis))

    def from_adapted(self, beta_ad: Matrix) -> Matrix:
        Ci = self.basis_inv
        return mat_mul(transpose(Ci), mat_mul(beta_ad, Ci))

    def blocks(self, beta: Matrix) -> tuple[Matrix, Matrix, Matrix]:
        """Split beta = beta_K + beta_m + beta_G (each as an ambient
        sharp matrix) along the splitting."""
        r, n = self.rank, self.n
        ad = self.to_adapted(beta)
        bK = zeros(n)
        bm = zeros(n)
        bG = zeros(n)
        for i in range(n):
            for j in range(n):
                if i < r and j < r:
                    bG[i][j] = ad[i][j]
                elif i >= r and j >= r:
                    bK[i][j] = ad[i][j]
                else:
                    bm[i][j] = ad[i][j]
        return (self.from_adapted(bK), self.from_adapted(bm),
                self.from_adapted(bG))


def exp_eta_fiber(eta: Matrix, split: FiberSplitting, beta: Matrix) -> Matrix:
    """The exponential chart at eta: eta + F(beta)."""
    return mat_add(as_skew(eta), f_map(as_skew(beta), split.z))


def in_iz(beta: Matrix, z: Matrix, split: FiberSplitting):
    """Membership in I_Z, decided twice: by the full determinant and by
    the G-block criterion (id_G + z sigma invertible, sigma = beta|_G).
    Returns (bool, direct, block, witness)."""
    beta = as_skew(beta)
    n = len(beta)
    T = mat_add(eye(n), mat_mul(z, beta))
    d_full = det(T)
    r = split.rank
    beta_ad = split.to_adapted(beta)
    z_ad = mat_mul(split.basis_inv, mat_mul(z, transpose(split.basis_inv)))
    zg = [row[:r] for row in z_ad[:r]]
    sg = [row[:r] for row in beta_ad[:r]]
    d_block = det(mat_add(eye(r), mat_mul(zg, sg)))
    direct = d_full != 0
    block = d_block != 0
    assert direct == block, "determinant and block criteria disagree"
    witness = None
    if not direct:
        ker = kernel_basis(T)
        witness = ker[0] if ker else None
    return direct, d_full, d_block, witness


# ---------------------------------------------------------------------------
# seeded random instances with exactly known rank


def random_unimodular(rng: random.Random, n: int, steps: int = 12) -> Matrix:
    """Product of integer shears and permutations; determinant +-1."""
    M = eye(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = Fraction(rng.randint(-2, 2))
        if c:
            for col in range(n):
                M[i][col] += c * M[j][col]
        if rng.random() < 0.3:
            a, b = rng.sample(range(n), 2)
            M[a], M[b] = M[b], M[a]
    return M


def _standard_block(n: int, r: int) -> Matrix:
    J = zeros(n)
    for i in range(0, r, 2):
        J[i][i + 1] = _F1
        J[i + 1][i] = -_F1
    return J


def random_presymplectic_fiber(rng: random.Random, n: int, r: int):
    """(eta, splitting) with rank(eta) = r exactly: eta = Q^T J_r Q with
    Q unimodular, so the splitting bases are columns of Q^(-1)."""
    assert r % 2 == 0 and 0 <= r <= n
    Q = random_unimodular(rng, n)
    eta = mat_mul(transpose(Q), mat_mul(_standard_block(n, r), Q))
    Qi = inverse(Q)
    cols = transpose(Qi)
    split = FiberSplitting(eta, k_basis=cols[r:], g_basis=cols[:r])
    return eta, split


def random_skew(rng: random.Random, n: int, span: int = 3) -> Matrix:
    M = zeros(n)
    for i in range(n):
        for j in range(i + 1, n):
            q = Fraction(rng.randint(-span, span), rng.randint(1, 2))
            M[j][i] = q
            M[i][j] = -q
    return M


def random_horizontal(rng: random.Random, split: FiberSplitting,
                      span: int = 3) -> Matrix:
    """Random skew form whose restriction to K vanishes."""
    n, r = split.n, split.rank
    ad = random_skew(rng, n, span)
    for i in range(r, n):
        for j in range(r, n):
            ad[i][j] = _F0
    return split.from_adapted(ad)

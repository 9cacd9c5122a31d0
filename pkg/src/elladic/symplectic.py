"""Alternating traces, the square-zero Steinberg extension, and 2-forms.

A matrix over V = R^r is a d x d nested tuple whose entries are length-r
tuples.  Elements of the second exterior power are antisymmetric r x r
tensors, with v ^ w standing for (v (x) w - w (x) v) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bar import BarChain, MatrixRep, boundary, check_cocycle, cup_pair
from .errors import Degenerate, DeterminantMismatch, NonUnit, NotACocycle, NotACycle, ShapeMismatch, ValidationError
from .padic_core import INF, PadicScalar
from .regulator import as_matrix, det_mod, mat_inv_mod, mat_mul, mat_reduce
from .series import DiffForm, TruncSeries, VectorField, dlog, wedge


# ---------------------------------------------------------------------------
# matrices over V

def vmat(entries, r, mod):
    """Normalize a nested d x d x r list."""
    out = []
    for row in entries:
        out.append(tuple(tuple(int(x) % mod for x in e) for e in row))
    d = len(out)
    if any(len(row) != d for row in out) or any(len(e) != r for row in out for e in row):
        raise ShapeMismatch("expected a square matrix with entries in R^r")
    return tuple(out)


def vmat_zero(d, r):
    return tuple(tuple((0,) * r for _ in range(d)) for _ in range(d))


def vmat_from_scalar(m, mod):
    """Rank-one embedding R -> V = R."""
    return tuple(tuple((x % mod,) for x in row) for row in m)


def vmat_add(a, b, mod):
    return tuple(tuple(tuple((x + y) % mod for x, y in zip(ea, eb)) for ea, eb in zip(ra, rb))
                 for ra, rb in zip(a, b))


def vmat_neg(a, mod):
    return tuple(tuple(tuple(-x % mod for x in e) for e in row) for row in a)


def vmat_conj(g, m, mod, ginv=None):
    """g^-1 m g for g over R and m over V."""
    d = len(g)
    r = len(m[0][0])
    ginv = ginv or mat_inv_mod(g, mod)
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = [0] * r
            for a in range(d):
                if not ginv[i][a]:
                    continue
                for b in range(d):
                    f = ginv[i][a] * g[b][j]
                    if f:
                        e = m[a][b]
                        for p in range(r):
                            acc[p] += f * e[p]
            row.append(tuple(x % mod for x in acc))
        out.append(tuple(row))
    return tuple(out)


def vmat_trace(m, mod):
    r = len(m[0][0])
    return tuple(sum(m[i][i][p] for i in range(len(m))) % mod for p in range(r))


def wedge_zero(r):
    return tuple(tuple(0 for _ in range(r)) for _ in range(r))


def wedge_add(a, b, mod):
    return tuple(tuple((x + y) % mod for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def wedge_scale(a, c, mod):
    return tuple(tuple(c * x % mod for x in row) for row in a)


def tr_alt(X, Y, mod):
    """Alternating trace (Tr(X (x) Y) - Tr(Y (x) X)) / 2 as an antisymmetric tensor."""
    d = len(X)
    if len(Y) != d or len(X[0][0]) != len(Y[0][0]):
        raise ShapeMismatch("tr_alt needs matrices of the same size over the same module")
    r = len(X[0][0])
    T = [[0] * r for _ in range(r)]
    for i in range(d):
        for j in range(d):
            x, y = X[i][j], Y[j][i]
            for p in range(r):
                if x[p]:
                    for q in range(r):
                        T[p][q] += x[p] * y[q]
    half = pow(2, -1, mod)
    return tuple(tuple((T[p][q] - T[q][p]) * half % mod for q in range(r)) for p in range(r))


# ---------------------------------------------------------------------------
# the extension S(A)

@dataclass(frozen=True)
class SElement:
    """(gamma, m, w): gamma in SL_d(R), m trace-free over V, w an antisymmetric tensor."""
    sl_part: tuple
    m_part: tuple
    omega_part: tuple
    mod: int

    @classmethod
    def make(cls, sl, m, w, mod, check=True):
        sl = mat_reduce(as_matrix(sl), mod)
        r = len(w)
        m = vmat(m, r, mod)
        w = tuple(tuple(int(x) % mod for x in row) for row in w)
        if check:
            if det_mod(sl, mod) != 1 % mod:
                raise ValidationError("first coordinate must have determinant 1")
            if any(vmat_trace(m, mod)):
                raise ValidationError("second coordinate must be trace free")
            if any((w[p][q] + w[q][p]) % mod for p in range(r) for q in range(r)):
                raise ValidationError("third coordinate must be antisymmetric")
        return cls(sl, m, w, mod)

    @classmethod
    def identity(cls, d, r, mod):
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)), vmat_zero(d, r), wedge_zero(r), mod)

    def inverse(self):
        mod = self.mod
        ginv = mat_inv_mod(self.sl_part, mod)
        # (g, m, w)^-1 = (g^-1, -g m g^-1, -w): the correction term vanishes since tr_alt(m, m) = 0
        m = vmat_neg(vmat_conj(ginv, self.m_part, mod, self.sl_part), mod)
        return SElement(ginv, m, wedge_scale(self.omega_part, -1, mod), mod)

    def __mul__(self, other):
        return s_group_mul(self, other)


def s_group_mul(a: SElement, b: SElement) -> SElement:
    """(g,m,w)(g',m',w') = (g g', g'^-1 m g' + m', w + w' + tr_alt(g'^-1 m g', m'))."""
    if a.mod != b.mod or len(a.sl_part) != len(b.sl_part) or len(a.omega_part) != len(b.omega_part):
        raise ShapeMismatch("elements live in different groups")
    mod = a.mod
    moved = vmat_conj(b.sl_part, a.m_part, mod)
    w = wedge_add(wedge_add(a.omega_part, b.omega_part, mod), tr_alt(moved, b.m_part, mod), mod)
    return SElement(mat_mul(a.sl_part, b.sl_part, mod), vmat_add(moved, b.m_part, mod), w, mod)


# ---------------------------------------------------------------------------
# deformation cocycles

class DeformationCocycle:
    """rho(g) = rho0(g)(1 + c(g)) with c trace free over V = R^r."""

    def __init__(self, rep0: MatrixRep, c, r, mod=None):
        self.rep0 = rep0
        self.mod = mod or rep0.ell ** rep0.P
        self.r = r
        self.c = tuple(vmat(x, r, self.mod) for x in c)
        G = rep0.group
        if len(self.c) != G.order:
            raise ShapeMismatch("one matrix per group element is required")
        for g, x in enumerate(self.c):
            if any(vmat_trace(x, self.mod)):
                raise ValidationError("cocycle values must be trace free", element=g)
        self._inv = [mat_inv_mod(rep0(g), self.mod) for g in range(G.order)]
        for a in range(G.order):
            for b in range(G.order):
                rhs = vmat_add(self.c[b], self.adjoint(b, self.c[a]), self.mod)
                if self.c[G.op(a, b)] != rhs:
                    raise NotACocycle("adjoint cocycle law fails", pair=[a, b])

    @classmethod
    def from_scalar(cls, rep0, c, mod=None):
        mod = mod or rep0.ell ** rep0.P
        return cls(rep0, [vmat_from_scalar(as_matrix(x), mod) for x in c], 1, mod)

    @classmethod
    def combine(cls, parts):
        """Stack rank-one cocycles into one cocycle over V = R^len(parts)."""
        rep0, mod = parts[0].rep0, parts[0].mod
        r = len(parts)
        G = rep0.group
        d = rep0.d
        c = []
        for g in range(G.order):
            c.append(tuple(tuple(tuple(p.c[g][i][j][0] for p in parts) for j in range(d)) for i in range(d)))
        return cls(rep0, c, r, mod)

    def adjoint(self, g, m):
        return vmat_conj(self.rep0(g), m, self.mod, self._inv[g])

    def kappa(self, g1, g2):
        """The second-exterior-power part of the extension 2-cocycle."""
        return tr_alt(self.adjoint(g2, self.c[g1]), self.c[g2], self.mod)

    def lift(self, g):
        return SElement(self.rep0(g), self.c[g], wedge_zero(self.r), self.mod)

    def kappa_by_group_law(self, g1, g2):
        """s(rho(g1)) s(rho(g2)) s(rho(g1 g2))^-1 computed in S(A).

        Its last coordinate is kappa(g1, g2); the reversed product
        s(g1 g2) s(g2)^-1 s(g1)^-1 is the inverse and carries the opposite sign.
        """
        G = self.rep0.group
        return self.lift(g1) * self.lift(g2) * self.lift(G.op(g1, g2)).inverse()


def omega_from_deformation(data: DeformationCocycle, fundamental: BarChain):
    """Evaluate the extension 2-cocycle on a 2-cycle."""
    if fundamental.degree != 2:
        raise ShapeMismatch("fundamental chain must have degree 2")
    if not boundary(fundamental).is_zero():
        raise NotACycle("fundamental chain is not a cycle")
    mod = data.mod
    total = wedge_zero(data.r)
    for (g1, g2), a in fundamental.terms.items():
        total = wedge_add(total, wedge_scale(data.kappa(g1, g2), a, mod), mod)
    return total


def omega_vs_cup(c1, c2, rep0: MatrixRep, fundamental: BarChain, trace=None):
    """Both sides of <c1, c2> = omega(c1, c2) for scalar cocycles c1, c2."""
    mod = fundamental.mod
    c1 = check_cocycle(rep0, c1, mod)
    c2 = check_cocycle(rep0, c2, mod)
    pairing = cup_pair(c1, c2, fundamental, rep0, trace)
    data = DeformationCocycle.combine([DeformationCocycle.from_scalar(rep0, c1, mod),
                                       DeformationCocycle.from_scalar(rep0, c2, mod)])
    w = omega_from_deformation(data, fundamental)
    omega = PadicScalar.from_int(pairing.ring, w[0][1], prec=fundamental.k)
    diff = pairing - omega
    return {
        "pairing": str(pairing),
        "omega": str(omega),
        "difference": str(diff),
        "equal": diff.val == INF,
    }


# ---------------------------------------------------------------------------
# symbols, determinants and brackets

def dlog_symbols(symbols) -> DiffForm:
    """sum of e * dlog f ^ dlog g over a list of (f, g, e)."""
    total = None
    for f, g, e in symbols:
        for h in (f, g):
            if h.constant().val != 0:
                raise NonUnit("symbol entries must be units")
        term = wedge(dlog(f), dlog(g))
        if e != 1:
            term = term.scale(e)
        total = term if total is None else total + term
    if total is None:
        raise ValidationError("empty symbol list")
    return total


def rho_plus(rho: MatrixRep, eps) -> MatrixRep:
    """rho (+) eps^-1, which has determinant 1."""
    mod = rho.ell ** rho.P
    eps = [int(x) % mod for x in eps]
    G = rho.group
    if len(eps) != G.order:
        raise ShapeMismatch("one character value per group element is required")
    d = rho.d
    images = []
    for g in range(G.order):
        m = rho(g)
        if det_mod(m, mod) != eps[g]:
            raise DeterminantMismatch("det rho differs from the character", element=g)
        inv = pow(eps[g], -1, mod)
        big = [list(row) + [0] for row in m] + [[0] * d + [inv]]
        images.append(big)
    out = MatrixRep(G, images, rho.ell, rho.P, det_char=[1] * G.order)
    return out


def _solve_series(A, b):
    """Solve A x = b over the truncated series ring; A must be invertible mod m."""
    size = len(A)
    A = [list(row) for row in A]
    b = list(b)
    for col in range(size):
        piv = None
        for r in range(col, size):
            if A[r][col].constant().val == 0:
                piv = r
                break
        if piv is None:
            raise Degenerate("form is degenerate at the origin")
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        inv = A[col][col].inverse()
        A[col] = [x * inv for x in A[col]]
        b[col] = b[col] * inv
        for r in range(size):
            if r != col and not A[r][col].is_zero():
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
                b[r] = b[r] - f * b[col]
    return b


def hamiltonian_field(f: TruncSeries, omega: DiffForm) -> VectorField:
    """X with X contracted into omega equal to df."""
    if omega.degree != 2:
        raise ShapeMismatch("need a 2-form")
    m = omega.m
    if m % 2:
        raise Degenerate("odd dimension admits no nondegenerate 2-form")
    zero = TruncSeries.zero(omega.ring, m, omega.n)
    # (X -| omega)_j = sum_i X_i g(i, j): the system matrix is the transpose
    A = [[omega.g(i, j) if i != j else zero for i in range(m)] for j in range(m)]
    return VectorField(_solve_series(A, [f.deriv(j) for j in range(m)]))


def poisson_bracket(f: TruncSeries, g: TruncSeries, omega: DiffForm) -> TruncSeries:
    """{f, g} = omega(X_f, X_g)."""
    Xf = hamiltonian_field(f, omega)
    Xg = hamiltonian_field(g, omega)
    m = omega.m
    total = TruncSeries.zero(omega.ring, m, omega.n)
    for i in range(m):
        for j in range(m):
            if i != j:
                total = total + Xf.components[i] * omega.g(i, j) * Xg.components[j]
    return total

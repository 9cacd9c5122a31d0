"""The l-adic regulator cocycle on congruence subgroups and its transfer.

For a tuple g_0..g_s in K_1 (all g_i = 1 mod l) the cocycle is the simplex
integral of Tr((nu^-1 d nu)^s) with nu = sum z_i g_i, expanded as a power
series in the simplex coordinates and truncated at total degree `cutoff`.

The fast path eliminates z_s: with Y_i = g_s^-1 g_i - 1 and
mu = 1 + sum_{i<s} z_i Y_i one has nu^-1 d nu = sum_j M_j dz_j where
M_j = mu^-1 Y_j.  For odd s the trace of the top form is
s * sum_{p in S_{s-1}} sign(p) Tr(M_0 M_p(1) ... M_p(s-1)), and the integral
of z^a over the simplex is a! / (|a| + s)!.  Arithmetic runs in numpy
int64 modulo l^W; the rational weights are applied exactly at the end.

Only unramified scalars (e = 1) are supported here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DepthZero, NotInK1, PrecisionExhausted, ShapeMismatch, TooLarge, ValidationError
from .padic_core import INF, PadicScalar, RingSpec, digit_stats, factorial_valuation, teichmuller_int, vl

_INT64_MAX = 2 ** 63 - 1


# ---------------------------------------------------------------------------
# small exact matrix helpers (tuples of tuples of ints)

def as_matrix(m):
    rows = tuple(tuple(int(x) for x in row) for row in m)
    d = len(rows)
    if d == 0 or any(len(r) != d for r in rows):
        raise ShapeMismatch("matrices must be square and non-empty")
    return rows


def mat_mul(a, b, mod=None):
    d = len(a)
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            x = sum(a[i][k] * b[k][j] for k in range(d))
            row.append(x % mod if mod else x)
        out.append(tuple(row))
    return tuple(out)


def mat_identity(d):
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def mat_sub_identity(a):
    return tuple(tuple(x - (i == j) for j, x in enumerate(row)) for i, row in enumerate(a))


def mat_inv_mod(a, mod):
    """Inverse modulo mod (a prime power) by Gauss-Jordan elimination."""
    d = len(a)
    aug = [list(row) + [int(i == j) for j in range(d)] for i, row in enumerate(a)]
    for col in range(d):
        piv = None
        for r in range(col, d):
            if math.gcd(aug[r][col] % mod, mod) == 1:
                piv = r
                break
        if piv is None:
            raise ValidationError("matrix is not invertible modulo the working modulus")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], -1, mod)
        aug[col] = [(x * inv) % mod for x in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] % mod:
                f = aug[r][col]
                aug[r] = [(x - f * y) % mod for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[d:]) for row in aug)


def mat_depth(a, ell, cap=INF):
    """min v_l over the entries of a (cap for the zero matrix)."""
    best = cap
    for row in a:
        for x in row:
            if x:
                best = min(best, vl(x, ell))
    return best


def mat_reduce(a, mod):
    return tuple(tuple(x % mod for x in row) for row in a)


# ---------------------------------------------------------------------------
# weights and tail bounds

@lru_cache(maxsize=None)
def _min_factorial_split(ell, k, parts):
    """min over a_1 + ... + a_parts = k of sum v_l(a_i!)."""
    if parts == 1:
        return factorial_valuation(ell, k)
    return min(factorial_valuation(ell, j) + _min_factorial_split(ell, k - j, parts - 1) for j in range(k + 1))


def weight_valuation_floor(ell: int, s: int, k: int, method: str = "legendre"):
    """Lower bound for v_l(a!/(k+s)!) over a in N^(s+1) with a_s = 0, |a| = k.

    'lemma' uses the digit-count bound; 'legendre' the exact minimum.
    """
    if method == "lemma":
        return -factorial_valuation(ell, s) - (s + 1) * digit_stats(ell, k + s)[1]
    return _min_factorial_split(ell, k, s) - factorial_valuation(ell, k + s)


def _envelope(ell, s, depth, k, method, extra):
    """Lower bound for the degree-j term valid for every j >= k."""
    x = k + s
    if method == "lemma":
        return depth * x - factorial_valuation(ell, s) - (s + 1) * (math.log(x, ell) + 1) + extra
    return depth * x - Fraction(x - 1, ell - 1) + extra


def _envelope_increasing(ell, s, depth, k, method):
    if method == "lemma":
        return float(depth) * (k + s) * math.log(ell) > s + 1
    return depth > Fraction(1, ell - 1)


def tail_bound(ell: int, s: int, depth, cutoff: int, method: str = "legendre", extra=0):
    """Certified lower bound on the valuation of every dropped term |a| > cutoff.

    A degree-k term has valuation >= depth*(k+s) + weight floor + extra.
    """
    depth = Fraction(depth)
    if depth <= Fraction(1, ell - 1):
        raise PrecisionExhausted("depth too small for a convergent tail estimate", depth=str(depth))
    best = None
    k = cutoff + 1
    while True:
        t = depth * (k + s) + weight_valuation_floor(ell, s, k, method) + extra
        best = t if best is None else min(best, t)
        if _envelope_increasing(ell, s, depth, k + 1, method) and \
                _envelope(ell, s, depth, k + 1, method, extra) >= best:
            return best
        k += 1


def minimal_cutoff(ell: int, s: int, depth, target, method: str = "lemma") -> int:
    """Smallest cutoff whose tail bound reaches `target` (l-adic digits)."""
    target = Fraction(target)
    c = 0
    while True:
        if tail_bound(ell, s, depth, c, method) >= target:
            return c
        c += 1
        if c > 10000:
            raise PrecisionExhausted("no cutoff reaches the requested precision")


# ---------------------------------------------------------------------------
# monomials and polynomial products in numpy

@lru_cache(maxsize=None)
def _monomial_table(nvars, top):
    mons = []
    for deg in range(top + 1):
        for c in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for v in c:
                e[v] += 1
            mons.append(tuple(e))
    index = {m: i for i, m in enumerate(mons)}
    degs = np.array([sum(m) for m in mons], dtype=np.int64)
    # shift table: index of m + e_v (or -1 beyond top)
    shift = np.full((len(mons), nvars), -1, dtype=np.int64)
    for i, m in enumerate(mons):
        for v in range(nvars):
            if degs[i] < top:
                mm = list(m)
                mm[v] += 1
                shift[i, v] = index[tuple(mm)]
    return mons, index, degs, shift


@lru_cache(maxsize=None)
def _pair_table(nvars, top):
    """Pairs (i, j) with deg_i + deg_j <= top, grouped by target monomial."""
    mons, index, degs, _ = _monomial_table(nvars, top)
    I, J, K = [], [], []
    for i, a in enumerate(mons):
        da = degs[i]
        for j, b in enumerate(mons):
            if da + degs[j] > top:
                continue
            I.append(i)
            J.append(j)
            K.append(index[tuple(x + y for x, y in zip(a, b))])
    I, J, K = np.array(I), np.array(J), np.array(K)
    order = np.argsort(K, kind="stable")
    I, J, K = I[order], J[order], K[order]
    starts = np.flatnonzero(np.r_[True, K[1:] != K[:-1]])
    return I, J, K[starts], starts


class _Poly:
    """Truncated polynomials in the simplex coordinates with matrix coefficients."""

    def __init__(self, nvars, top, d, mod, use_object):
        self.nvars, self.top, self.d, self.mod = nvars, top, d, mod
        self.dtype = object if use_object else np.int64
        self.mons, self.index, self.degs, self.shift = _monomial_table(nvars, top)

    def zeros(self):
        return np.zeros((len(self.mons), self.d, self.d), dtype=self.dtype)

    def inverse_of_one_plus_linear(self, Y):
        """(1 + sum z_v Y_v)^-1 degree by degree."""
        out = self.zeros()
        for a in range(self.d):
            out[0, a, a] = 1
        mod = self.mod
        # degree-k part = -sum_v Y_v * (degree-(k-1) part) shifted by e_v
        for deg in range(1, self.top + 1):
            src = np.flatnonzero(self.degs == deg - 1)
            for v in range(self.nvars):
                tgt = self.shift[src, v]
                prod = np.einsum("ab,pbc->pac", Y[v], out[src]) % mod
                np.subtract.at(out, tgt, prod)
            cur = np.flatnonzero(self.degs == deg)
            out[cur] %= mod
        return out % mod

    def mul(self, A, B):
        I, J, targets, starts = _pair_table(self.nvars, self.top)
        prod = np.einsum("pab,pbc->pac", A[I], B[J]) % self.mod
        out = self.zeros()
        out[targets] = np.add.reduceat(prod, starts, axis=0) % self.mod
        return out

    def trace_pairing(self, A, B):
        """Coefficients of Tr(A B) as a scalar polynomial."""
        I, J, targets, starts = _pair_table(self.nvars, self.top)
        tr = np.einsum("pab,pba->p", A[I], B[J]) % self.mod
        out = np.zeros(len(self.mons), dtype=self.dtype)
        out[targets] = np.add.reduceat(tr, starts) % self.mod
        return out


def _sign_of(seq):
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _alternating_products(poly, M, indices):
    """sum over orderings p of `indices` of sign(p) M_p1 ... M_pk."""
    memo = {}

    def alt(S):
        if len(S) == 1:
            return M[S[0]]
        if S in memo:
            return memo[S]
        total = poly.zeros()
        for pos, j in enumerate(S):
            rest = S[:pos] + S[pos + 1:]
            term = poly.mul(M[j], alt(rest))
            total = total + term if pos % 2 == 0 else total - term
        total %= poly.mod
        memo[S] = total
        return total

    return alt(tuple(indices))


# ---------------------------------------------------------------------------
# results

VALUE_DIGITS = 48


@lru_cache(maxsize=None)
def value_ring(ell: int) -> RingSpec:
    """Scalar ring used for regulator values (ample relative precision)."""
    return RingSpec(ell, VALUE_DIGITS)


@dataclass(frozen=True)
class RegulatorValue:
    value: PadicScalar
    certified_error: object
    cutoff: int
    depth: object = None

    def agrees_with(self, other, slack=0) -> bool:
        """Difference vanishes to the joint certified precision."""
        return (self.value - other.value).lower_val() >= min(self.certified_error, other.certified_error) - slack

    def is_negligible(self) -> bool:
        return self.value.lower_val() >= self.certified_error

    def to_json(self):
        err = self.certified_error
        return {"value": str(self.value), "certified_error": "inf" if err == INF else str(err),
                "cutoff": self.cutoff}


def _zero_value(ell, cutoff, prec=INF):
    return RegulatorValue(PadicScalar.zero(value_ring(ell), prec), prec, cutoff, INF)


def _finish(ell, q: Fraction, err, cutoff, depth=None) -> RegulatorValue:
    err = INF if err == INF else math.floor(err)
    if q == 0:
        return RegulatorValue(PadicScalar.zero(value_ring(ell), err), err, cutoff, depth)
    value = PadicScalar.from_fraction(value_ring(ell), q)
    return RegulatorValue(value.with_prec(err), err, cutoff, depth)


def combine(terms, ell: int, cutoff: int, coefficient_modulus=None) -> RegulatorValue:
    """sum c_i * value_i with exact integer coefficients.

    Coefficients known only modulo l^k (coefficient_modulus = k) add the
    ambiguity k + val(value_i) to the certified error.
    """
    ring = value_ring(ell)
    total = PadicScalar.zero(ring)
    err = INF
    for c, v in terms:
        c = int(c)
        if c == 0:
            continue
        err = min(err, v.certified_error + vl(c, ell))
        if coefficient_modulus is not None and not v.value.is_zero():
            err = min(err, coefficient_modulus + v.value.val)
        if not v.value.is_zero():
            total = total + PadicScalar.make(ring, v.value.val, v.value.unit, INF) * c
    if err != INF:
        total = total.with_prec(err)
    return RegulatorValue(total, err, cutoff)


# ---------------------------------------------------------------------------
# the cocycle on K_1

def _working_exponent(ell, d):
    W = 1
    while d * (ell ** (W + 1)) ** 2 < _INT64_MAX:
        W += 1
    return W


def _check_ring(ring):
    if isinstance(ring, RingSpec):
        if ring.e != 1:
            raise ValidationError("the regulator is implemented for unramified scalars only")
        return ring.ell
    return int(ring)


def phi_s(X, s: int, cutoff: int, ell=3, input_prec=INF, working_exponent=None) -> RegulatorValue:
    """Regulator cocycle of the tuple g_i = 1 + X_i (X_i integer matrices)."""
    X = [as_matrix(x) for x in X]
    g = [tuple(tuple(v + (i == j) for j, v in enumerate(row)) for i, row in enumerate(x)) for x in X]
    return _phi_of_group_tuple(g, s, cutoff, _check_ring(ell), input_prec, working_exponent)


def phi_tilde(g, s: int, cutoff: int, ell=3, input_prec=INF, working_exponent=None) -> RegulatorValue:
    ell = _check_ring(ell)
    g = [as_matrix(x) for x in g]
    for x in g:
        if mat_depth(mat_sub_identity(x), ell, INF) < 1:
            raise NotInK1("tuple entry is not congruent to the identity mod l")
    return _phi_of_group_tuple(g, s, cutoff, ell, input_prec, working_exponent)


def _check_shape(g, s):
    if s < 3 or s % 2 == 0:
        raise ValidationError("s must be odd and >= 3", s=s)
    if len(g) != s + 1:
        raise ShapeMismatch("tuple must have s+1 entries", expected=s + 1, got=len(g))
    d = len(g[0])
    if any(len(x) != d for x in g):
        raise ShapeMismatch("tuple entries have different sizes")
    return d


def _phi_of_group_tuple(g, s, cutoff, ell, input_prec, working_exponent):
    _check_shape(g, s)
    if cutoff < 0:
        raise ValidationError("cutoff must be >= 0")
    for x in g:
        if mat_depth(mat_sub_identity(x), ell, INF) < 1:
            raise DepthZero("tuple entry has depth 0")
    # repeated entries: the alternating form vanishes identically
    if len(set(g)) < len(g):
        return _zero_value(ell, cutoff)
    return _phi_cached(tuple(g), s, cutoff, ell, input_prec, working_exponent)


@lru_cache(maxsize=200000)
def _phi_cached(g, s, cutoff, ell, input_prec, working_exponent):
    d = len(g[0])
    W = working_exponent or _working_exponent(ell, d)
    use_object = d * (ell ** W) ** 2 >= _INT64_MAX
    mod = ell ** W
    gs_inv = mat_inv_mod(mat_reduce(g[s], mod), mod)
    Y = [mat_reduce(mat_sub_identity(mat_mul(gs_inv, mat_reduce(g[i], mod), mod)), mod) for i in range(s)]
    depth = min(min(mat_depth(y, ell, W) for y in Y), W, input_prec)
    poly = _Poly(s, cutoff, d, mod, use_object)
    Yarr = np.array(Y, dtype=poly.dtype)
    inv = poly.inverse_of_one_plus_linear(Yarr)
    M = [np.einsum("pab,bc->pac", inv, Yarr[j]) % mod for j in range(s)]
    alt = _alternating_products(poly, M, list(range(1, s)))
    traces = poly.trace_pairing(M[0], alt)
    # exact assembly: (-1)^s * s * sum_a a!/(|a|+s)! * trace_a
    vs = vl(s, ell)
    total = Fraction(0)
    vmin = INF
    input_term = INF
    for idx, a in enumerate(poly.mons):
        k = sum(a)
        weight = Fraction(math.prod(math.factorial(x) for x in a), math.factorial(k + s))
        vw = vl(weight.numerator, ell) - vl(weight.denominator, ell)
        vmin = min(vmin, vw)
        if input_prec != INF:
            input_term = min(input_term, input_prec + depth * (k + s - 1) + vw + vs)
        t = int(traces[idx])
        if t:
            total += weight * t
    total *= (-1) ** s * s
    err = min(tail_bound(ell, s, depth, cutoff, "legendre", extra=vs), W + vmin + vs, input_term)
    return _finish(ell, total, err, cutoff, depth)


# ---------------------------------------------------------------------------
# exact reference expansion in all s+1 simplex coordinates

def t_expansion(X, s: int, cutoff: int):
    """Coefficients T[(a, u)] of (nu^-1 d nu)^s, nu = 1 + sum z_i X_i.

    T[(a, u)] multiplies z^a dz_0 ^ ... (dz_u omitted) ... ^ dz_s.  Exact
    integer matrices; degree |a| <= cutoff.
    """
    X = [as_matrix(x) for x in X]
    if len(X) != s + 1:
        raise ShapeMismatch("tuple must have s+1 entries")
    d = len(X[0])
    nv = s + 1
    if all(all(v == 0 for row in x for v in row) for x in X):
        return {}

    def add(a, b):
        return tuple(tuple(x + y for x, y in zip(r1, r2)) for r1, r2 in zip(a, b))

    def neg(a):
        return tuple(tuple(-x for x in r) for r in a)

    # nu^-1 = sum_k (-L)^k with L = sum z_i X_i
    inv = {(0,) * nv: mat_identity(d)}
    layer = dict(inv)
    for deg in range(1, cutoff + 1):
        nxt = {}
        for mono, c in layer.items():
            for i in range(nv):
                mm = list(mono)
                mm[i] += 1
                mm = tuple(mm)
                p = neg(mat_mul(X[i], c))
                nxt[mm] = add(nxt[mm], p) if mm in nxt else p
        layer = nxt
        for k, v in layer.items():
            inv[k] = v

    def pmul(A, B):
        out = {}
        for ka, va in A.items():
            da = sum(ka)
            for kb, vb in B.items():
                if da + sum(kb) > cutoff:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                p = mat_mul(va, vb)
                out[k] = add(out[k], p) if k in out else p
        return out

    factors = [{k: mat_mul(v, X[j]) for k, v in inv.items()} for j in range(nv)]
    T = {}
    for u in range(nv):
        rest = [j for j in range(nv) if j != u]
        acc = {}
        for perm in itertools.permutations(rest):
            sign = _sign_of(perm)
            prod = factors[perm[0]]
            for j in perm[1:]:
                prod = pmul(prod, factors[j])
            for k, v in prod.items():
                v = v if sign > 0 else neg(v)
                acc[k] = add(acc[k], v) if k in acc else v
        for k, v in acc.items():
            if any(x for row in v for x in row):
                T[(k, u)] = v
    return T


def phi_from_expansion(T, s: int):
    """sum_a a!/(|a|+s)! sum_u (-1)^u Tr T[(a,u)] as an exact Fraction."""
    total = Fraction(0)
    for (a, u), v in T.items():
        weight = Fraction(math.prod(math.factorial(x) for x in a), math.factorial(sum(a) + s))
        total += weight * (-1) ** u * sum(v[i][i] for i in range(len(v)))
    return total


def expansion_membership(T, depth: int, s: int, ell: int) -> bool:
    """Every T[(a,u)] lies in Mat(m^(depth (|a|+s)))."""
    for (a, u), v in T.items():
        if mat_depth(v, ell, INF) < depth * (sum(a) + s):
            return False
    return True


# ---------------------------------------------------------------------------
# transfer to the full group

_GUARD = {3: 3, 5: 2, 7: 2}


@lru_cache(maxsize=None)
def gl_residue_group(d: int, ell: int):
    """All elements of GL_d(F_l) as tuples of tuples."""
    if d > _GUARD.get(ell, 1):
        raise TooLarge("GL_d(F_l) is too large for the transfer average", d=d, ell=ell)
    out = []
    for entries in itertools.product(range(ell), repeat=d * d):
        m = tuple(tuple(entries[i * d:(i + 1) * d]) for i in range(d))
        if det_mod(m, ell):
            out.append(m)
    return tuple(out)


def det_mod(m, mod):
    d = len(m)
    if d == 1:
        return m[0][0] % mod
    total = 0
    for j in range(d):
        minor = tuple(tuple(row[k] for k in range(d) if k != j) for row in m[1:])
        total += (-1) ** j * m[0][j] * det_mod(minor, mod)
    return total % mod


def teichmuller_matrix(m, ell, k):
    """Entrywise Teichmuller lift modulo l^k (0 lifts to 0)."""
    return tuple(tuple(teichmuller_int(ell, x, k) if x % ell else 0 for x in row) for row in m)


def psi_transfer(g, s: int, cutoff: int, ell=3, input_prec=INF, working_exponent=None) -> RegulatorValue:
    """Average of the K_1 cocycle over GL_d(F_l) through Teichmuller lifts."""
    ell = _check_ring(ell)
    g = [as_matrix(x) for x in g]
    d = _check_shape(g, s)
    if all(mat_depth(mat_sub_identity(x), ell, INF) >= 1 for x in g):
        return phi_tilde(g, s, cutoff, ell, input_prec, working_exponent)
    if len(set(g)) < len(g):
        return _zero_value(ell, cutoff)
    W = working_exponent or _working_exponent(ell, d)
    mod = ell ** W
    bars = [mat_reduce(x, ell) for x in g]
    for b in bars:
        if det_mod(b, ell) == 0:
            raise ValidationError("tuple entry is not invertible mod l")
    group = gl_residue_group(d, ell)
    # the shifted tuples are only known modulo l^W
    prec = W if input_prec == INF else min(W, input_prec)
    terms = []
    for h in group:
        lift_h = teichmuller_matrix(h, ell, W)
        shifted = []
        for x, xb in zip(g, bars):
            right = mat_inv_mod(teichmuller_matrix(mat_mul(h, xb, ell), ell, W), mod)
            shifted.append(mat_mul(mat_mul(lift_h, mat_reduce(x, mod), mod), right, mod))
        terms.append((1, _phi_of_group_tuple(shifted, s, cutoff, ell, prec, working_exponent)))
    summed = combine(terms, ell, cutoff)
    order = len(group)
    value = summed.value * PadicScalar.from_fraction(value_ring(ell), Fraction(1, order))
    err = summed.certified_error - vl(order, ell)
    return RegulatorValue(value.with_prec(err), err, cutoff)


# ---------------------------------------------------------------------------
# chains

def homogenize(tup):
    """[g_1|...|g_n] -> (1, g_1, g_1 g_2, ..., g_1 ... g_n)."""
    tup = [as_matrix(x) for x in tup]
    cur = mat_identity(len(tup[0]))
    out = [cur]
    for x in tup:
        cur = mat_mul(cur, x)
        out.append(cur)
    return out


def evaluate_chain(chain, cutoff: int, ell=3, input_prec=INF, working_exponent=None,
                   coefficient_modulus=None) -> RegulatorValue:
    """Regulator of an inhomogeneous 3-chain {tuple of matrices: coefficient}.

    Each tuple is homogenized, reduced modulo l^W and fed to the transfer.
    """
    ell = _check_ring(ell)
    terms = chain.terms if hasattr(chain, "terms") else chain
    if coefficient_modulus is None:
        coefficient_modulus = getattr(chain, "k", None)
    out = []
    for tup, c in sorted(terms.items()):
        if len(tup) != 3:
            raise ShapeMismatch("evaluate_chain expects a 3-chain")
        hom = homogenize(tup)
        W = working_exponent or _working_exponent(ell, len(hom[0]))
        hom = [mat_reduce(x, ell ** W) for x in hom]
        out.append((c, psi_transfer(hom, 3, cutoff, ell, input_prec, working_exponent)))
    if not out:
        return _zero_value(ell, cutoff)
    return combine(out, ell, cutoff, coefficient_modulus)

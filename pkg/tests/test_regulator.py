import itertools
import math
import random
from fractions import Fraction

import pytest

from elladic.bar import BarChain, MatrixGroup, boundary, homotopy_F, inn
from elladic.errors import NotInK1, ShapeMismatch, ValidationError
from elladic.padic_core import INF, vl
from elladic.regulator import (combine, evaluate_chain, homogenize, mat_inv_mod, mat_mul, minimal_cutoff,
                               phi_from_expansion, phi_s, phi_tilde, psi_transfer, t_expansion, tail_bound,
                               weight_valuation_floor)

MOD = 3 ** 20


def congruence_matrix(rng, d=2, P=6):
    mod = 3 ** P
    return tuple(tuple((int(i == j) + 3 * rng.randrange(3 ** (P - 1))) % mod for j in range(d)) for i in range(d))


def _mm(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) % MOD for j in range(n)] for i in range(n)]


def _sign(p):
    return (-1) ** sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])


def simplex_oracle(g, s, cutoff):
    """Integral of Tr((nu^-1 dnu)^s) over the simplex with z_0 eliminated.

    nu = g_0 (1 + sum_{i>=1} z_i Y_i), Y_i = g_0^-1 g_i - 1, so
    nu^-1 dnu = sum_j (1 + L)^-1 Y_j dz_j.  Dense dictionaries of integer
    matrices modulo 3^20, full sum over orderings.
    """
    d = len(g[0])
    g0inv = [list(r) for r in mat_inv_mod(g[0], MOD)]
    Y = []
    for i in range(1, s + 1):
        y = _mm(g0inv, [list(r) for r in g[i]])
        for k in range(d):
            y[k][k] -= 1
        Y.append(y)
    zero = (0,) * s
    ident = [[int(i == j) for j in range(d)] for i in range(d)]
    inv = {zero: ident}
    layer = {zero: ident}
    for _ in range(cutoff):
        nxt = {}
        for mono, c in layer.items():
            for v in range(s):
                m = list(mono)
                m[v] += 1
                m = tuple(m)
                p = _mm(Y[v], c)
                acc = nxt.setdefault(m, [[0] * d for _ in range(d)])
                for a in range(d):
                    for b in range(d):
                        acc[a][b] = (acc[a][b] - p[a][b]) % MOD
        layer = nxt
        inv.update(layer)
    M = [{k: _mm(v, Y[j]) for k, v in inv.items()} for j in range(s)]

    def pmul(A, B):
        out = {}
        for ka, va in A.items():
            da = sum(ka)
            for kb, vb in B.items():
                if da + sum(kb) > cutoff:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                p = _mm(va, vb)
                acc = out.setdefault(k, [[0] * d for _ in range(d)])
                for a in range(d):
                    for b in range(d):
                        acc[a][b] = (acc[a][b] + p[a][b]) % MOD
        return out

    traces = {}
    for perm in itertools.permutations(range(s)):
        prod = M[perm[0]]
        for j in perm[1:]:
            prod = pmul(prod, M[j])
        sg = _sign(perm)
        for k, v in prod.items():
            traces[k] = traces.get(k, 0) + sg * sum(v[i][i] for i in range(d))
    total = Fraction(0)
    for a, t in traces.items():
        total += Fraction(math.prod(math.factorial(x) for x in a), math.factorial(sum(a) + s)) * (t % MOD)
    return total


def agrees_with_fraction(result, q):
    diff = result.value - result.value.__class__.from_fraction(result.value.ring, q)
    return diff.lower_val() >= result.certified_error


def test_cutoff_helper():
    assert minimal_cutoff(3, 3, 1, 4, "lemma") == 13
    assert tail_bound(3, 3, 1, 12, "lemma") < 4 <= tail_bound(3, 3, 1, 13, "lemma")


@pytest.mark.parametrize("ell,s", [(3, 3), (5, 3), (3, 5)])
def test_weight_floor_against_brute_force(ell, s):
    for k in range(0, 12):
        exact = min(vl(math.prod(math.factorial(x) for x in a), ell) - vl(math.factorial(k + s), ell)
                    for a in itertools.product(range(k + 1), repeat=s) if sum(a) == k)
        assert weight_valuation_floor(ell, s, k, "legendre") == exact
        assert weight_valuation_floor(ell, s, k, "lemma") <= exact


def test_zero_and_repeated_entries():
    z = ((0, 0), (0, 0))
    v = phi_s([z] * 4, 3, 6)
    assert v.value.is_zero() and v.certified_error == INF
    rng = random.Random(1)
    a, b, c = (congruence_matrix(rng) for _ in range(3))
    assert phi_tilde([a, b, b, c], 3, 6, input_prec=6).is_negligible()
    ident = ((1, 0), (0, 1))
    assert psi_transfer([ident] * 4, 3, 6).is_negligible()


@pytest.mark.parametrize("seed", range(3))
def test_fast_path_matches_simplex_oracle(seed):
    rng = random.Random(seed)
    g = [congruence_matrix(rng) for _ in range(4)]
    cutoff = 6
    fast = phi_tilde(g, 3, cutoff, input_prec=6)
    assert fast.certified_error >= 3
    assert agrees_with_fraction(fast, simplex_oracle(g, 3, cutoff))


def test_fast_path_matches_full_coordinate_expansion():
    rng = random.Random(9)
    g = [congruence_matrix(rng) for _ in range(4)]
    X = [tuple(tuple(v - (i == j) for j, v in enumerate(row)) for i, row in enumerate(x)) for x in g]
    fast = phi_tilde(g, 3, 6, input_prec=6)
    assert agrees_with_fraction(fast, phi_from_expansion(t_expansion(X, 3, 6), 3))


def test_alternation():
    rng = random.Random(4)
    g = [congruence_matrix(rng) for _ in range(4)]
    cutoff = 13
    base = phi_tilde(g, 3, cutoff, input_prec=6)
    for perm in ((1, 0, 2, 3), (1, 2, 3, 0), (3, 2, 1, 0)):
        sign = _sign(perm)
        other = phi_tilde([g[i] for i in perm], 3, cutoff, input_prec=6)
        assert combine([(1, other), (-sign, base)], 3, cutoff).is_negligible()


def test_transfer_on_k1_is_the_cocycle():
    rng = random.Random(5)
    g = [congruence_matrix(rng) for _ in range(4)]
    a = phi_tilde(g, 3, 8, input_prec=6)
    b = psi_transfer(g, 3, 8, input_prec=6)
    assert a.agrees_with(b)


def _random_invertible(rng, mod):
    while True:
        x = tuple(tuple(rng.randrange(mod) for _ in range(2)) for _ in range(2))
        if (x[0][0] * x[1][1] - x[0][1] * x[1][0]) % 3:
            return x


def test_transfer_is_invariant_under_monomial_teichmuller_conjugation():
    rng = random.Random(6)
    mod = 3 ** 8
    g = [_random_invertible(rng, mod) for _ in range(4)]
    base = psi_transfer(g, 3, 8, input_prec=8)
    for h in (((0, 1), (1, 0)), ((-1, 0), (0, 1)), ((0, -1), (1, 0))):
        hinv = mat_inv_mod(h, mod)
        conj = [mat_mul(mat_mul(h, x, mod), hinv, mod) for x in g]
        assert base.agrees_with(psi_transfer(conj, 3, 8, input_prec=8))


def test_conjugation_defect_is_the_homotopy_term():
    # inn_h(c) - c = d F_h(c) + F_h(dc) and the cocycle kills boundaries
    rng = random.Random(6)
    P, cutoff = 8, 8
    G = MatrixGroup(2, 3, P)
    c = BarChain.basis(G, tuple(_random_invertible(rng, 3 ** P) for _ in range(3)), 3, P)
    h = G.coerce(((2, 1), (1, 1)))
    defect = combine([(1, evaluate_chain(inn(c, h), cutoff, input_prec=P)),
                      (-1, evaluate_chain(c, cutoff, input_prec=P))], 3, cutoff)
    assert not defect.is_negligible()
    homotopy = evaluate_chain(homotopy_F(boundary(c), h), cutoff, input_prec=P)
    assert defect.agrees_with(homotopy)


def test_chain_evaluation():
    G = MatrixGroup(2, 3, 6)
    assert evaluate_chain(BarChain.zero(G, 3, 3, 6), 13).is_negligible()
    rng = random.Random(7)
    four = BarChain.basis(G, tuple(congruence_matrix(rng) for _ in range(4)), 3, 6)
    assert evaluate_chain(boundary(four), 13, input_prec=6).is_negligible()


def test_homogenize():
    a, b = ((1, 3), (0, 1)), ((1, 0), (3, 1))
    assert homogenize([a, b]) == [((1, 0), (0, 1)), a, mat_mul(a, b)]


def test_input_validation():
    ident = ((1, 0), (0, 1))
    with pytest.raises(NotInK1):
        phi_tilde([((2, 0), (0, 1))] + [ident] * 3, 3, 6)
    with pytest.raises(ShapeMismatch):
        phi_tilde([ident] * 3, 3, 6)
    with pytest.raises(ValidationError):
        phi_tilde([ident] * 3, 2, 6)


def test_json_shape():
    rng = random.Random(8)
    v = phi_tilde([congruence_matrix(rng) for _ in range(4)], 3, 6, input_prec=6)
    out = v.to_json()
    assert set(out) == {"value", "certified_error", "cutoff"} and out["cutoff"] == 6

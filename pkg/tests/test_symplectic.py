import random

import pytest

from elladic.bar import BarChain, FiniteGroup, MatrixRep, coboundary, cocycle_basis, homomorphism_cocycle
from elladic.errors import DeterminantMismatch, NotACocycle, ValidationError
from elladic.padic_core import RingSpec
from elladic.series import DiffForm, TruncSeries
from elladic.symplectic import (DeformationCocycle, SElement, dlog_symbols, hamiltonian_field, omega_from_deformation,
                                omega_vs_cup, poisson_bracket, rho_plus, s_group_mul, tr_alt, vmat, wedge_add)

MOD = 3 ** 4
HALF = pow(2, -1, MOD)


def e(i, r=2):
    return tuple(int(k == i) for k in range(r))


def zero_v(r=2):
    return (0,) * r


def unit_vmat(i, j, v, d=2, r=2):
    return tuple(tuple(v if (a, b) == (i, j) else zero_v(r) for b in range(d)) for a in range(d))


def random_vmat(rng, d=2, r=2, trace_free=False):
    m = [[tuple(rng.randrange(MOD) for _ in range(r)) for _ in range(d)] for _ in range(d)]
    if trace_free:
        m[d - 1][d - 1] = tuple(-sum(m[i][i][p] for i in range(d - 1)) % MOD for p in range(r))
    return vmat(m, r, MOD)


def random_sl(rng, d=2):
    while True:
        a, b, c = (rng.randrange(MOD) for _ in range(3))
        if a % 3:
            return ((a, b), (c, (1 + b * c) * pow(a, -1, MOD) % MOD))


def random_element(rng):
    w01 = rng.randrange(MOD)
    return SElement.make(random_sl(rng), random_vmat(rng, trace_free=True), ((0, w01), (-w01, 0)), MOD)


def test_tr_alt_examples():
    rng = random.Random(1)
    X = random_vmat(rng)
    assert tr_alt(X, X, MOD) == ((0, 0), (0, 0))
    got = tr_alt(unit_vmat(0, 1, e(0)), unit_vmat(1, 0, e(1)), MOD)
    assert got == ((0, HALF), (-HALF % MOD, 0))


def test_tr_alt_is_bilinear_and_antisymmetric():
    rng = random.Random(2)
    X, Y, Z = (random_vmat(rng) for _ in range(3))
    XY = tr_alt(X, Y, MOD)
    YX = tr_alt(Y, X, MOD)
    assert wedge_add(XY, YX, MOD) == ((0, 0), (0, 0))
    XpZ = tuple(tuple(tuple((a + b) % MOD for a, b in zip(x, z)) for x, z in zip(rx, rz)) for rx, rz in zip(X, Z))
    assert tr_alt(XpZ, Y, MOD) == wedge_add(XY, tr_alt(Z, Y, MOD), MOD)


def test_group_law():
    rng = random.Random(3)
    one = SElement.identity(2, 2, MOD)
    for _ in range(10):
        a, b, c = (random_element(rng) for _ in range(3))
        assert a * one == a and one * a == a
        assert (a * b) * c == a * (b * c)
        assert a * a.inverse() == one and a.inverse() * a == one
    with pytest.raises(ValidationError):
        SElement.make(((2, 0), (0, 1)), unit_vmat(0, 1, e(0)), ((0, 0), (0, 0)), MOD)
    assert s_group_mul(one, one) == one


def rotation_setup():
    z3 = FiniteGroup.cyclic(3)
    G = FiniteGroup.product(z3, z3)
    a, b = G.index("(1,0)"), G.index("(0,1)")
    C = ((0, -1), (1, -1))
    rho0 = MatrixRep.from_generators(G, [a, b], [C, ((1, 0), (0, 1))], 3, 4)
    z = BarChain(G, 2, {(a, b): 1, (b, a): -1}, 3, 4)
    return G, rho0, z


def trivial_setup():
    H = FiniteGroup.product(FiniteGroup.cyclic(9), FiniteGroup.cyclic(9))
    a, b = H.index("(1,0)"), H.index("(0,1)")
    I2 = ((1, 0), (0, 1))
    rho0 = MatrixRep.from_generators(H, [a, b], [I2, I2], 3, 2)
    z = BarChain(H, 2, {(a, b): 1, (b, a): -1}, 3, 2)
    return H, (a, b), rho0, z


def test_kappa_matches_group_law():
    G, rho0, z = rotation_setup()
    cocs = cocycle_basis(rho0)
    data = DeformationCocycle.combine([DeformationCocycle.from_scalar(rho0, c) for c in cocs[:2]])
    for g1 in range(G.order):
        for g2 in range(G.order):
            assert data.kappa_by_group_law(g1, g2).omega_part == data.kappa(g1, g2)


def test_omega_equals_cup_on_nonzero_pairings():
    H, (a, b), rho0, z = trivial_setup()
    E, F, O = ((0, 1), (0, 0)), ((0, 0), (1, 0)), ((0, 0), (0, 0))
    c1 = homomorphism_cocycle(H, [a, b], (E, O), 9)
    c2 = homomorphism_cocycle(H, [a, b], (O, F), 9)
    r = omega_vs_cup(c1, c2, rho0, z)
    assert r["equal"] and not r["pairing"].startswith("w:inf")
    assert omega_vs_cup(c1, c1, rho0, z)["pairing"].startswith("w:inf")
    zero = homomorphism_cocycle(H, [a, b], (O, O), 9)
    assert omega_vs_cup(zero, c1, rho0, z)["omega"].startswith("w:inf")


def test_coboundary_gives_zero_omega():
    G, rho0, z = rotation_setup()
    cob = coboundary(rho0, ((1, 2), (4, -1)), MOD)
    for c in cocycle_basis(rho0):
        r = omega_vs_cup(cob, c, rho0, z)
        assert r["equal"] and r["omega"].startswith("w:inf")
    data = DeformationCocycle.from_scalar(rho0, [((0, 0), (0, 0))] * G.order)
    assert omega_from_deformation(data, z) == ((0,),)


def test_deformation_rejects_non_cocycles():
    G, rho0, z = rotation_setup()
    with pytest.raises(NotACocycle):
        DeformationCocycle.from_scalar(rho0, [((1, 0), (0, -1))] * G.order)


def test_rho_plus():
    z3 = FiniteGroup.cyclic(3)
    rho = MatrixRep.from_generators(z3, [1], [((4, 0), (0, 1))], 3, 2)
    eps = [pow(4, k, 9) for k in range(3)]
    plus = rho_plus(rho, eps)
    assert plus(1) == ((4, 0, 0), (0, 1, 0), (0, 0, 7))
    assert all(d == 1 for d in plus.determinants())
    with pytest.raises(DeterminantMismatch):
        rho_plus(rho, [1, 1, 1])
    trivial = MatrixRep.from_generators(z3, [1], [((1, 0), (0, 1))], 3, 2)
    assert rho_plus(trivial, [1, 1, 1])(1) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


R = RingSpec(3, 10)


def plane(n=8):
    return TruncSeries.var(R, 2, n, 0), TruncSeries.var(R, 2, n, 1), TruncSeries.one(R, 2, n)


def test_dlog_symbol_examples():
    x1, x2, one = plane()
    form = dlog_symbols([(one + x1, one + x2, 1)])
    expected = (one + x1).inverse() * (one + x2).inverse()
    assert form.components[(0, 1)].equals(expected)
    f, g = one + x1 * 3 + x2, one - x1 * x2
    assert dlog_symbols([(f, f, 1)]).is_zero()
    assert dlog_symbols([(f, g, 1), (g, f, 1)]).is_zero()


def test_poisson_bracket_examples():
    x1, x2, one = plane()
    omega = DiffForm.two_form(R, 2, 8, {(0, 1): one})
    assert poisson_bracket(x1, x2, omega).equals(one)
    Xf = hamiltonian_field(x1, omega)
    assert Xf.components[0].is_zero() and Xf.components[1].equals(-one)
    f = one + x1 * x2 + x2 ** 3
    assert poisson_bracket(f, f, omega).is_zero()
    assert poisson_bracket(f, one * 5, omega).is_zero()

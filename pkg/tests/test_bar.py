import json
import random

import pytest

from elladic.bar import (BarChain, FiniteGroup, GroupAutomorphism, MatrixRep, boundary, coboundary, cocycle_basis,
                         cup_pair, cycle_basis, homology_divisors, homomorphism_cocycle, homotopy_F, inn, is_boundary,
                         map_chain, parse_modulus, push, solve_boundary)
from elladic.errors import NotABoundary, NotACocycle, NotACycle, ShapeMismatch, TooLarge, ValidationError

Z3 = FiniteGroup.cyclic(3)
Z3Z3 = FiniteGroup.product(Z3, Z3)
S3 = FiniteGroup.symmetric(3)


def gens(G):
    return G.index("(1,0)"), G.index("(0,1)")


def commutator_cycle(G, ell=3, k=2):
    a, b = gens(G)
    return BarChain(G, 2, {(a, b): 1, (b, a): -1}, ell, k)


def random_chain(rng, G, degree, k=2, terms=6):
    return BarChain(G, degree, {tuple(rng.randrange(G.order) for _ in range(degree)): rng.randrange(1, 3 ** k)
                                for _ in range(terms)}, 3, k)


def test_group_axioms():
    for G in (Z3, Z3Z3, S3, FiniteGroup.cyclic(9), FiniteGroup.trivial()):
        G.check_axioms()
    assert Z3Z3.is_abelian() and not S3.is_abelian()
    assert FiniteGroup.from_json(json.loads(json.dumps(S3.to_json()))).order == 6


def test_boundary_of_a_basis_two_chain():
    g, h = 1, 2
    got = boundary(BarChain.basis(S3, (g, h), 3, 2))
    expected = BarChain(S3, 1, {(h,): 1, (S3.op(g, h),): -1, (g,): 1}, 3, 2)
    assert got == expected


def test_commutator_is_a_cycle_and_d_squared_vanishes():
    assert boundary(commutator_cycle(Z3Z3)).is_zero()
    rng = random.Random(1)
    for G in (Z3Z3, S3):
        for degree in (2, 3, 4):
            assert boundary(boundary(random_chain(rng, G, degree))).is_zero()


def test_homotopy_on_degree_one():
    for g in range(S3.order):
        for h in range(S3.order):
            hinv = S3.inverse(h)
            expected = (BarChain.basis(S3, (hinv, S3.conj(h, g)), 3, 2)
                        - BarChain.basis(S3, (g, hinv), 3, 2))
            assert homotopy_F(BarChain.basis(S3, (g,), 3, 2), h) == expected


def test_homotopy_identity_on_random_chains():
    rng = random.Random(2)
    for degree in (1, 2, 3):
        c = random_chain(rng, S3, degree)
        for h in range(S3.order):
            lhs = inn(c, h) - c
            rhs = boundary(homotopy_F(c, h)) + homotopy_F(boundary(c), h)
            assert lhs == rhs


def test_homotopy_of_centralized_cycle_is_a_cycle():
    z = commutator_cycle(Z3Z3)
    for h in range(Z3Z3.order):
        assert boundary(homotopy_F(z, h)).is_zero()


def test_solve_boundary():
    G = Z3Z3
    assert solve_boundary(BarChain.zero(G, 2, 3, 2)).is_zero()
    rng = random.Random(3)
    d0 = random_chain(rng, G, 3)
    z = boundary(d0)
    assert boundary(solve_boundary(z)) == z
    with pytest.raises(NotABoundary):
        solve_boundary(commutator_cycle(G, 3, 1))
    assert not is_boundary(commutator_cycle(G, 3, 1))
    assert is_boundary(commutator_cycle(G, 3, 1).scale(3))
    with pytest.raises(NotACycle):
        solve_boundary(BarChain.basis(G, (1, 2), 3, 2))


@pytest.mark.parametrize("G,degree,k,expected", [
    (Z3, 2, 2, []),
    (Z3Z3, 2, 2, [3]),
    (FiniteGroup.trivial(), 1, 2, []),
    (FiniteGroup.trivial(), 3, 2, []),
    (FiniteGroup.cyclic(9), 1, 2, [9]),
    (FiniteGroup.cyclic(9), 1, 1, [3]),
    (S3, 1, 2, []),
    (S3, 2, 2, []),
    (S3, 3, 2, [3]),
    (Z3Z3, 1, 2, [3, 3]),
    (Z3Z3, 3, 2, [3, 3, 3]),
])
def test_homology_matches_known_groups(G, degree, k, expected):
    assert homology_divisors(G, degree, 3, k) == expected


def test_homology_guards():
    with pytest.raises(ValidationError):
        homology_divisors(Z3, 0, 3, 2)
    with pytest.raises(TooLarge):
        homology_divisors(FiniteGroup.symmetric(5), 4, 3, 1)


def test_cycle_basis_elements_are_cycles():
    for z in cycle_basis(S3, 2, 3, 2):
        assert boundary(z).is_zero()


def test_automorphisms_act_on_chains():
    a, b = gens(Z3Z3)
    swap = GroupAutomorphism.from_generators(Z3Z3, [a, b], [b, a])
    z = commutator_cycle(Z3Z3)
    assert swap.apply(z) == -z
    assert swap.compose(swap).apply(z) == z
    inner = GroupAutomorphism.inner(S3, 1)
    c = BarChain.basis(S3, (2, 3), 3, 2)
    assert inner.apply(c) == inn(c, 1)
    assert push(c, lambda x: x) == c


def test_representation_pushes_chains():
    a, b = gens(Z3Z3)
    C = ((0, -1), (1, -1))
    rho = MatrixRep.from_generators(Z3Z3, [a, b], [C, ((1, 0), (0, 1))], 3, 2)
    image = map_chain(rho, commutator_cycle(Z3Z3))
    assert set(image.terms) == {(rho(a), rho(b)), (rho(b), rho(a))}
    ident = MatrixRep.from_generators(Z3, [1], [((1,),)], 3, 2)
    assert len(map_chain(ident, BarChain.basis(Z3, (1, 2), 3, 2)).terms) == 1


def test_cup_pairing_properties():
    H = FiniteGroup.product(FiniteGroup.cyclic(9), FiniteGroup.cyclic(9))
    a, b = gens(H)
    I2 = ((1, 0), (0, 1))
    rho0 = MatrixRep.from_generators(H, [a, b], [I2, I2], 3, 2)
    E, F, O = ((0, 1), (0, 0)), ((0, 0), (1, 0)), ((0, 0), (0, 0))
    c1 = homomorphism_cocycle(H, [a, b], (E, O), 9)
    c2 = homomorphism_cocycle(H, [a, b], (O, F), 9)
    zero = homomorphism_cocycle(H, [a, b], (O, O), 9)
    z = commutator_cycle(H, 3, 2)
    assert cup_pair(zero, c1, z, rho0).is_zero()
    p12, p21 = cup_pair(c1, c2, z, rho0), cup_pair(c2, c1, z, rho0)
    assert p12.element(2) == 1
    assert (p12 + p21).is_zero()
    assert cup_pair(c1, c1, z, rho0).is_zero()


def test_coboundaries_pair_to_zero():
    a, b = gens(Z3Z3)
    C = ((0, -1), (1, -1))
    rho0 = MatrixRep.from_generators(Z3Z3, [a, b], [C, ((1, 0), (0, 1))], 3, 2)
    z = commutator_cycle(Z3Z3, 3, 2)
    cob = coboundary(rho0, ((1, 2), (0, -1)), 9)
    for c in cocycle_basis(rho0, 9):
        assert cup_pair(cob, c, z, rho0).is_zero()
    bad = [((1, 0), (0, 0))] * Z3Z3.order
    with pytest.raises(NotACocycle):
        cup_pair(bad, bad, z, rho0)


def test_parse_modulus():
    assert parse_modulus("3^4") == (3, 4)
    assert parse_modulus("81") == (3, 4)
    with pytest.raises(ValidationError):
        parse_modulus("12")


def test_chain_json_round_trip():
    z = commutator_cycle(Z3Z3)
    assert BarChain.from_json(json.loads(json.dumps(z.to_json())), Z3Z3) == z
    with pytest.raises(ShapeMismatch):
        BarChain(Z3Z3, 2, {(1,): 1}, 3, 2)

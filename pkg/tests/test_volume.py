import pytest

from elladic.bar import BarChain, FiniteGroup, GroupAutomorphism, MatrixRep, boundary, cycle_basis, map_chain
from elladic.errors import BadExponent, MathematicalFailure, NoRoot, NotCompatible, ValidationError
from elladic.regulator import det_mod, mat_identity, mat_mul
from elladic.verify import restriction_setup, swap_setup
from elladic.volume import (ConjugationDatum, VolumeSetup, cocycle_audit, defect_chain, intertwiner,
                            normalize_determinant, restriction_audit, twist_defect)

P = 4
MOD = 3 ** P
SWAP = ((0, 1), (1, 0))
ROT = ((0, -1), (1, -1))


def s3_setup(k=2):
    G = FiniteGroup.symmetric(3)
    t = next(g for g in range(G.order) if g and G.op(g, g) == 0)
    r = next(g for g in range(G.order) if g and G.op(G.op(g, g), g) == 0)
    rho = MatrixRep.from_generators(G, [t, r], [SWAP, ROT], 3, P)
    c = cycle_basis(G, 2, 3, k)[0]
    return G, rho, c, t, r


def test_normalize_determinant_examples():
    h, a = normalize_determinant(((4, 0), (0, 1)), 1, 2, 3, 2)
    assert (h, a) == (((7, 0), (0, 4)), 4)
    assert det_mod(h, 9) == 1
    same, a = normalize_determinant(((2, 1), (1, 1)), 1, 2, 3, 4)
    assert (same, a) == (((2, 1), (1, 1)), 1)
    with pytest.raises(BadExponent):
        normalize_determinant(((1, 0, 0), (0, 1, 0), (0, 0, 1)), 1, 3, 3, 2)
    with pytest.raises(NoRoot):
        normalize_determinant(((2, 0), (0, 1)), 1, 2, 3, 2)


def test_intertwiner_examples():
    G, rho, c, t, r = s3_setup()
    h = intertwiner(rho, GroupAutomorphism.identity(G))
    for g in range(G.order):
        assert mat_mul(h, rho(g), MOD) == mat_mul(rho(g), h, MOD)
    h = intertwiner(rho, GroupAutomorphism.inner(G, r))
    # an intertwiner for conjugation by r is rho(r) times a scalar
    prod = mat_mul(h, rho(G.inverse(r)), MOD)
    assert prod[0][1] == prod[1][0] == 0 and prod[0][0] == prod[1][1]


def test_intertwiner_failure_for_non_conjugate_images():
    z3 = FiniteGroup.cyclic(3)
    G = FiniteGroup.product(z3, z3)
    a, b = G.index("(1,0)"), G.index("(0,1)")
    rho = MatrixRep.from_generators(G, [a, b], [ROT, mat_identity(2)], 3, P)
    swap = GroupAutomorphism.from_generators(G, [a, b], [b, a])
    with pytest.raises(MathematicalFailure):
        intertwiner(rho, swap)


def test_setup_validation():
    G, rho, c, t, r = s3_setup()
    bad = ConjugationDatum(GroupAutomorphism.inner(G, r), mat_identity(2), 1, "bad")
    with pytest.raises(ValidationError):
        VolumeSetup(rho, c, [bad])
    with pytest.raises(ValidationError):
        VolumeSetup(rho, c, [ConjugationDatum(GroupAutomorphism.identity(G), mat_identity(2), 3, "a=3")])


def test_identity_datum_has_zero_defect():
    G, rho, c, t, r = s3_setup()
    ident = ConjugationDatum(GroupAutomorphism.identity(G), mat_identity(2), 1, "id")
    setup = VolumeSetup(rho, c, [ident])
    d, A = defect_chain(setup, ident)
    assert boundary(d).is_zero()
    assert twist_defect(setup, ident, 6).value.is_negligible()
    report = cocycle_audit(setup, [(ident, ident)], 6)
    assert report[0]["pass"] and report[0]["residual"]["value"].startswith("w:inf")


def test_inner_datum_defect_is_a_cycle_with_small_value():
    G, rho, c, t, r = s3_setup()
    inner = ConjugationDatum(GroupAutomorphism.inner(G, r), rho(r), 1, "inner")
    setup = VolumeSetup(rho, c, [inner])
    d, A = defect_chain(setup, inner)
    assert boundary(A).is_zero()
    result = twist_defect(setup, inner, 6, ambiguity=True)
    assert result.value.value.lower_val() >= min(result.value.certified_error, result.ambiguity_valuation())


def test_swap_setup_defect():
    setup, datum, (a, b), Cu = swap_setup(P=4, k=2)
    assert datum.sigma.apply(setup.c) == -setup.c
    d, A = defect_chain(setup, datum)
    assert d.is_zero()
    # the homotopy identity gives boundary(A) = (a^-1 - 1) rho(c), here -2 rho(c)
    assert boundary(A) == map_chain(setup.rho, setup.c).scale(-2)
    out = twist_defect(setup, datum, 6).to_json()
    assert set(out) >= {"value", "chosen_d"}


def test_restriction_index_one_is_exact():
    setup, datum, _, _ = swap_setup(P=4, k=2)
    whole = list(range(setup.group.order))
    c_whole = BarChain(None, 2, setup.c.terms, 3, 2)
    report = restriction_audit(setup, whole, c_whole, 1, [datum], 6)
    assert report[0]["pass"]
    assert report[0]["subgroup_value"] == report[0]["group_value"]


def test_restriction_rejects_incompatible_input():
    setup, datum, sub, c_sub = restriction_setup(P=4, k=2)
    G = setup.group
    a, b = G.index("(1,0)"), G.index("(0,1)")
    a3 = G.op(G.op(a, a), a)
    # b -> a^3 b fixes rho (rho(a)^3 = 1) but moves <b> to <a^3 b>
    shear = GroupAutomorphism.from_generators(G, [a, b], [a, G.op(a3, b)])
    moved = ConjugationDatum(shear, mat_identity(2), 1, "shear")
    setup.check_datum(moved)
    b_sub = [0] + sorted({b, G.op(b, b)})
    empty = BarChain(None, 2, {}, 3, 2)
    with pytest.raises(NotCompatible):
        restriction_audit(setup, b_sub, empty, 9, [moved], 6)
    with pytest.raises(NotCompatible):
        restriction_audit(setup, [0, a], empty, 13, [datum], 6)

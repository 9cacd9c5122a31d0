"""The volume 1-cocycle at finite level.

For an automorphism s of the group with intertwiner h (rho(s g) = h rho(g) h^-1)
and sign a (s acts on the fundamental class by a), the twisted defect chain

    A_s(c) = rho(d) - a^-1 F_h(rho(c)),   boundary(d) = a^-1 s(c) - c,

is fed to the regulator.  The regulator is a cocycle, so the value only
depends on A_s(c) modulo boundaries; the freedom in d is a 3-cycle of the
group, which is reported as the ambiguity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .bar import (BarChain, FiniteGroup, GroupAutomorphism, MatrixRep, boundary, cycle_basis, homotopy_F,
                  map_chain, push, solve_boundary)
from .errors import (BadExponent, NoIntertwiner, NonInvertibleOnly, NoRoot, NotABoundary, NotACycle, NotCompatible,
                     ShapeMismatch, ValidationError)
from .modlinalg import Elimination
from .padic_core import INF, PadicScalar, RingSpec, hensel_root
from .regulator import RegulatorValue, as_matrix, combine, det_mod, evaluate_chain, mat_inv_mod, mat_mul, mat_reduce


# ---------------------------------------------------------------------------
# intertwiners and determinants

def intertwiner(rho: MatrixRep, sigma: GroupAutomorphism, phi=None, generators=None, seed=0):
    """An invertible h with h phi(rho(g)) = rho(sigma(g)) h on the generators."""
    G, d, ell, P = rho.group, rho.d, rho.ell, rho.P
    mod = ell ** P
    phi = phi or (lambda m: m)
    gens = generators or getattr(G, "generators", None) or range(G.order)
    cols = {c: {} for c in range(d * d)}
    eq = 0
    for g in gens:
        A = mat_reduce(as_matrix(phi(rho(g))), mod)
        B = rho(sigma(g))
        # (h A)_ij - (B h)_ij = sum_k h_ik A_kj - B_ik h_kj
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    if A[k][j]:
                        cols[i * d + k][eq] = (cols[i * d + k].get(eq, 0) + A[k][j]) % mod
                    if B[i][k]:
                        cols[k * d + j][eq] = (cols[k * d + j].get(eq, 0) - B[i][k]) % mod
                eq += 1
    kernel = Elimination(cols, ell, P).kernel()
    if not kernel:
        raise NoIntertwiner("no nonzero solution of the intertwining equations")

    def as_mat(x):
        return tuple(tuple(x.get(i * d + j, 0) % mod for j in range(d)) for i in range(d))

    candidates = [as_mat(x) for x in kernel]
    rng = random.Random(seed)
    tries = list(candidates)
    for _ in range(200):
        coeffs = [rng.randrange(ell) for _ in candidates]
        tries.append(tuple(tuple(sum(c * m[i][j] for c, m in zip(coeffs, candidates)) % mod for j in range(d))
                           for i in range(d)))
    for h in tries:
        if det_mod(h, ell):
            return h
    raise NonInvertibleOnly("intertwiners exist but none is invertible")


def normalize_determinant(h, target, d, ell, P):
    """a h with det(a h) = target; a is a d-th root congruent to 1 when possible."""
    if d % ell == 0:
        raise BadExponent("dimension divisible by ell", d=d)
    mod = ell ** P
    h = mat_reduce(as_matrix(h), mod)
    if len(h) != d:
        raise ShapeMismatch("matrix size differs from d")
    D = det_mod(h, mod)
    if D % ell == 0:
        raise ValidationError("matrix is not invertible")
    q = target * pow(D, -1, mod) % mod
    if q == 1:
        return h, 1
    residues = [r for r in range(1, ell) if pow(r, d, ell) == q % ell]
    ring = RingSpec(ell, P)
    if not residues:
        raise NoRoot("det(h)/target is not a d-th power mod ell")
    a = hensel_root(d, PadicScalar.from_int(ring, q, prec=P), residues[0]).element(P) % mod
    return tuple(tuple(a * x % mod for x in row) for row in h), a


# ---------------------------------------------------------------------------
# setups

@dataclass
class ConjugationDatum:
    sigma: GroupAutomorphism
    h: tuple
    a: int
    name: str = ""
    phi: object = None
    chi: object = None

    def phi_matrix(self, m):
        return m if self.phi is None else self.phi(m)


class VolumeSetup:
    def __init__(self, rho: MatrixRep, c: BarChain, data=(), check=True):
        self.rho = rho
        self.group = rho.group
        self.c = c
        self.data = list(data)
        if c.degree != 2:
            raise ShapeMismatch("fundamental chain must have degree 2")
        if rho.d % rho.ell == 0:
            raise BadExponent("dimension divisible by ell", d=rho.d)
        if not boundary(c).is_zero():
            raise NotACycle("fundamental chain is not a cycle")
        if check:
            for datum in self.data:
                self.check_datum(datum)

    @property
    def mod(self):
        return self.rho.ell ** self.rho.P

    def check_datum(self, datum: ConjugationDatum):
        mod = self.mod
        if datum.a % self.rho.ell == 0:
            raise ValidationError("a must be a unit", datum=datum.name)
        h = mat_reduce(as_matrix(datum.h), mod)
        hinv = mat_inv_mod(h, mod)
        for g in range(self.group.order):
            lhs = self.rho(datum.sigma(g))
            rhs = mat_mul(mat_mul(h, datum.phi_matrix(self.rho(g)), mod), hinv, mod)
            if lhs != rhs:
                raise ValidationError("intertwining condition fails", datum=datum.name, element=g)

    def compose(self, s: ConjugationDatum, t: ConjugationDatum) -> ConjugationDatum:
        """Datum of s after t, with h = h_s phi_s(h_t)."""
        h = mat_mul(s.h, s.phi_matrix(t.h), self.mod)
        phi = None
        if s.phi is not None or t.phi is not None:
            phi = lambda m: s.phi_matrix(t.phi_matrix(m))  # noqa: E731
        return ConjugationDatum(s.sigma.compose(t.sigma), h, s.a * t.a, f"{s.name}*{t.name}", phi)


@dataclass
class VolumeResult:
    value: RegulatorValue
    chosen_d: BarChain
    chain: BarChain
    ambiguity: list = field(default_factory=list)

    def ambiguity_valuation(self):
        """Valuation generating the ambiguity lattice (inf if none)."""
        vals = [min(v.value.lower_val(), v.certified_error) for v in self.ambiguity]
        return min(vals, default=INF)

    def to_json(self):
        out = {"value": self.value.to_json(), "chosen_d": self.chosen_d.to_json()}
        if self.ambiguity:
            out["ambiguity"] = [v.to_json() for v in self.ambiguity]
            lv = self.ambiguity_valuation()
            out["ambiguity_valuation"] = "inf" if lv == INF else str(lv)
        return out


def defect_chain(setup: VolumeSetup, datum: ConjugationDatum, c=None):
    """(d, A) for the twisted defect of c."""
    c = c if c is not None else setup.c
    k = c.k
    ainv = pow(datum.a, -1, c.ell ** k)
    target = datum.sigma.apply(c).scale(ainv) - c
    d = solve_boundary(target)
    rho = setup.rho
    moved = push(map_chain(rho, c), lambda m: mat_reduce(as_matrix(datum.phi_matrix(m)), setup.mod))
    h = mat_reduce(as_matrix(datum.h), setup.mod)
    A = map_chain(rho, d) - homotopy_F(moved, h).scale(ainv)
    return d, A


def regulator_of(setup: VolumeSetup, chain: BarChain, cutoff: int) -> RegulatorValue:
    return evaluate_chain(chain, cutoff, setup.rho.ell, input_prec=setup.rho.P, coefficient_modulus=chain.k)


def homology3_representatives(group: FiniteGroup, ell: int, k: int):
    """Kernel generators of the degree-3 boundary that are not boundaries themselves."""
    out = []
    for z in cycle_basis(group, 3, ell, k):
        try:
            solve_boundary(z)
        except NotABoundary:
            out.append(z)
    return out


def twist_defect(setup: VolumeSetup, datum: ConjugationDatum, cutoff: int, ambiguity=False) -> VolumeResult:
    d, A = defect_chain(setup, datum)
    value = regulator_of(setup, A, cutoff)
    amb = []
    if ambiguity:
        for z in homology3_representatives(setup.group, setup.c.ell, setup.c.k):
            amb.append(regulator_of(setup, map_chain(setup.rho, z), cutoff))
    return VolumeResult(value, d, A, amb)


def _difference(x: RegulatorValue, y: RegulatorValue, ell, cutoff, cy=1):
    return combine([(1, x), (-cy, y)], ell, cutoff)


def within(value: RegulatorValue, slack_valuation=INF):
    """Residual below its certified error, or inside the ambiguity lattice."""
    return value.value.lower_val() >= min(value.certified_error, slack_valuation)


# ---------------------------------------------------------------------------
# audits

def cocycle_audit(setup: VolumeSetup, pairs, cutoff: int, lattice=INF):
    """B_{st} - s(B_t) - a_t B_s for each pair, with B = a * value."""
    ell = setup.rho.ell
    report = []
    for s, t in pairs:
        st = setup.compose(s, t)
        vals = {}
        for key, datum in (("s", s), ("t", t), ("st", st)):
            vals[key] = twist_defect(setup, datum, cutoff).value
        # B_x = a_x A_x; the coefficient action on values is trivial for phi = id
        terms = [(st.a, vals["st"]), (-t.a, vals["t"]), (-t.a * s.a, vals["s"])]
        residual = combine(terms, ell, cutoff)
        report.append({"pair": [s.name, t.name], "residual": residual.to_json(),
                       "pass": within(residual, lattice)})
    return report


def h_independence(setup: VolumeSetup, datum: ConjugationDatum, z, cutoff: int, lattice=INF):
    """Replace h by h z for z commuting with the image."""
    mod = setup.mod
    z = mat_reduce(as_matrix(z), mod)
    for g in range(setup.group.order):
        if mat_mul(z, setup.rho(g), mod) != mat_mul(setup.rho(g), z, mod):
            raise ValidationError("z does not centralize the image")
    other = ConjugationDatum(datum.sigma, mat_mul(datum.h, z, mod), datum.a, datum.name + "*z", datum.phi)
    v1 = twist_defect(setup, datum, cutoff).value
    v2 = twist_defect(setup, other, cutoff).value
    diff = _difference(v1, v2, setup.rho.ell, cutoff)
    return {"values": [v1.to_json(), v2.to_json()], "difference": diff.to_json(), "pass": within(diff, lattice)}


def lift_independence(setup: VolumeSetup, datum: ConjugationDatum, delta, cutoff: int, lattice=INF):
    """Replace s by inn(delta) s and h by rho(delta) h."""
    G = setup.group
    inner = GroupAutomorphism.inner(G, delta)
    other = ConjugationDatum(inner.compose(datum.sigma), mat_mul(setup.rho(delta), datum.h, setup.mod),
                             datum.a, f"inn{delta}*{datum.name}", datum.phi)
    setup.check_datum(other)
    v1 = twist_defect(setup, datum, cutoff).value
    v2 = twist_defect(setup, other, cutoff).value
    diff = _difference(v1, v2, setup.rho.ell, cutoff)
    return {"values": [v1.to_json(), v2.to_json()], "difference": diff.to_json(), "pass": within(diff, lattice)}


def chain_independence(setup: VolumeSetup, datum: ConjugationDatum, e: BarChain, cutoff: int, lattice=INF):
    """Replacing c by c + boundary(e) shifts the value by (a^-1 s - 1)(r rho(e))."""
    v1 = twist_defect(setup, datum, cutoff).value
    c2 = setup.c + boundary(e)
    _, A2 = defect_chain(setup, datum, c2)
    v2 = regulator_of(setup, A2, cutoff)
    shift = regulator_of(setup, map_chain(setup.rho, e), cutoff)
    # times a, with phi acting trivially on values: a v2 - a v1 + (a - 1) r(rho e) = 0
    a = datum.a
    residual = combine([(a, v2), (-a, v1), (a - 1, shift)], setup.rho.ell, cutoff)
    return {"residual": residual.to_json(), "pass": within(residual, lattice)}


def restriction_audit(setup: VolumeSetup, sub_elements, c_sub: BarChain, index: int, data, cutoff: int,
                      lattice=INF):
    """Compare the volume over a subgroup with index times the volume over the group.

    sub_elements lists the subgroup inside the group (identity first);
    c_sub is a 2-cycle of the subgroup (in subgroup indices) whose image is
    index * c up to a boundary e.  Both sides are computed independently;
    the comparison allows for the coboundary (a^-1 s - 1) r(rho(e)).
    """
    G = setup.group
    sub_elements = list(sub_elements)
    if sub_elements[0] != 0:
        raise ValidationError("subgroup list must start with the identity")
    pos = {g: i for i, g in enumerate(sub_elements)}
    table = []
    for x in sub_elements:
        row = []
        for y in sub_elements:
            p = G.op(x, y)
            if p not in pos:
                raise NotCompatible("elements do not form a subgroup")
            row.append(pos[p])
        table.append(row)
    H = FiniteGroup(table)
    c_sub = BarChain(H, 2, c_sub.terms, c_sub.ell, c_sub.k)
    if G.order != index * H.order:
        raise NotCompatible("index does not match the subgroup order")
    image = push(c_sub, lambda i: sub_elements[i])
    image = BarChain(G, 2, image.terms, c_sub.ell, c_sub.k)
    try:
        e = solve_boundary(image - setup.c.scale(index))
    except NotABoundary as exc:
        raise NotCompatible("image of the subgroup cycle is not index * c") from exc
    rho_sub = MatrixRep(H, [setup.rho(g) for g in sub_elements], setup.rho.ell, setup.rho.P)
    sub_data = []
    for datum in data:
        perm = []
        for g in sub_elements:
            img = datum.sigma(g)
            if img not in pos:
                raise NotCompatible("automorphism does not preserve the subgroup", datum=datum.name)
            perm.append(pos[img])
        sub_data.append(ConjugationDatum(GroupAutomorphism(H, perm), datum.h, datum.a, datum.name, datum.phi))
    sub_setup = VolumeSetup(rho_sub, c_sub, sub_data)
    ell = setup.rho.ell
    report = []
    for datum, sdatum in zip(data, sub_data):
        big = twist_defect(setup, datum, cutoff).value
        small = twist_defect(sub_setup, sdatum, cutoff).value
        shift = regulator_of(setup, map_chain(setup.rho, e), cutoff)
        # a * (small - index * big) = (1 - a) r(rho e)  when phi acts trivially on values
        residual = combine([(datum.a, small), (-datum.a * index, big), (datum.a - 1, shift)], ell, cutoff)
        report.append({"datum": datum.name, "subgroup_value": small.to_json(), "group_value": big.to_json(),
                       "residual": residual.to_json(), "pass": within(residual, lattice)})
    return report

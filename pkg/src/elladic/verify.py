"""Property suites behind `elladic verify` and the acceptance tests.

Every criterion is a function of a seeded Random returning (passed, residual
summary).  Reports list criteria in a fixed order and contain no timings
unless asked for, so reruns with the same seed are byte-identical.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .bar import (BarChain, FiniteGroup, GroupAutomorphism, MatrixGroup, MatrixRep, boundary, cocycle_basis,
                  cycle_basis, homomorphism_cocycle, homotopy_F, inn, solve_boundary)
from .errors import BudgetExceeded, NotABoundary
from .flows import (SeriesMap, certify, flow_equation_residual, flow_from_field, interpolate_iterate,
                    lie_derivative, vector_field_log)
from .padic_core import RingSpec, factorial_valuation, vl
from .regulator import (combine, evaluate_chain, mat_identity, mat_inv_mod, mat_mul, minimal_cutoff,
                        phi_tilde)
from .series import DiffForm, TruncSeries, VectorField, antiderivative, contract, exterior_d, monomials
from .symplectic import dlog_symbols, omega_vs_cup, poisson_bracket
from .volume import (ConjugationDatum, VolumeSetup, chain_independence, cocycle_audit, h_independence,
                     lift_independence, restriction_audit, twist_defect)


@dataclass(frozen=True)
class Criterion:
    number: int
    suite: str
    title: str
    limit: float
    run: Callable


CRITERIA: list[Criterion] = []


def criterion(number, suite, title, limit):
    def register(fn):
        CRITERIA.append(Criterion(number, suite, title, limit, fn))
        return fn
    return register


SUITES = ("padic", "chains", "flows", "regulator", "symplectic", "volume")


# ---------------------------------------------------------------------------
# shared fixtures

def _conjugated_rotation(mod):
    """Order-3 rotation and a swap, both conjugated off the permutation basis."""
    u = ((4, 3), (6, 7))
    uinv = mat_inv_mod(u, mod)
    C, h = ((0, -1), (1, -1)), ((0, 1), (1, 0))
    return (mat_mul(mat_mul(u, C, mod), uinv, mod), mat_mul(mat_mul(u, h, mod), uinv, mod))


def _poly(M, coeffs, mod):
    d = len(M)
    out = [[0] * d for _ in range(d)]
    power = mat_identity(d)
    for c in coeffs:
        out = [[out[i][j] + c * power[i][j] for j in range(d)] for i in range(d)]
        power = mat_mul(power, M, mod)
    return tuple(tuple(v % mod for v in row) for row in out)


def _congruence_matrix(rng, d, P):
    mod = 3 ** P
    return tuple(tuple((int(i == j) + 3 * rng.randrange(3 ** (P - 1))) % mod for j in range(d))
                 for i in range(d))


# ---------------------------------------------------------------------------
# padic

@criterion(1, "padic", "Legendre identity for l in {3,5,7}, a <= 500", 1.0)
def legendre(rng):
    bad = checked = 0
    for ell in (3, 5, 7):
        count = 0
        for a in range(0, 501):
            if a:
                count += vl(a, ell)
            checked += 1
            if factorial_valuation(ell, a) != count:
                bad += 1
    return bad == 0, f"{checked} values checked, {bad} mismatches"


# ---------------------------------------------------------------------------
# chains

@criterion(2, "chains", "homotopy identity inn_h - id = F_h d + d F_h", 30.0)
def homotopy_identity(rng):
    z3 = FiniteGroup.cyclic(3)
    groups = {"S3": FiniteGroup.symmetric(3), "(Z/3)^2": FiniteGroup.product(z3, z3)}
    bad = checked = 0
    for G in groups.values():
        for n in range(4):
            for tup in itertools.product(range(G.order), repeat=n):
                c = BarChain.basis(G, tup, 3, 2)
                dc = boundary(c) if n else None
                for h in range(G.order):
                    rhs = boundary(homotopy_F(c, h))
                    if dc is not None:
                        rhs = rhs + homotopy_F(dc, h)
                    checked += 1
                    if inn(c, h) - c != rhs:
                        bad += 1
    return bad == 0, f"{checked} (chain, h) pairs, {bad} nonzero residuals"


@criterion(3, "chains", "F-composition defect is a boundary on S3 cycles, degree <= 2", 60.0)
def f_composition(rng):
    G = FiniteGroup.symmetric(3)
    bad = checked = 0
    for n in range(3):
        cycles = [BarChain.basis(G, (), 3, 2)] if n == 0 else cycle_basis(G, n, 3, 2)
        for c in cycles:
            for h in range(G.order):
                for h2 in range(G.order):
                    D = homotopy_F(c, G.op(h, h2)) - homotopy_F(inn(c, h2), h) - homotopy_F(c, h2)
                    checked += 1
                    try:
                        d = solve_boundary(D)
                    except NotABoundary:
                        bad += 1
                        continue
                    if boundary(d) != D:
                        bad += 1
    return bad == 0, f"{checked} (cycle, h, h') triples, {bad} not certified"


# ---------------------------------------------------------------------------
# flows

def _cubic_map(n=8):
    ring = RingSpec(3, 12)
    x = TruncSeries.var(ring, 1, n, 0)
    return SeriesMap([x + x ** 3])


@criterion(4, "flows", "interpolated iterates of x + x^3 match composition", 10.0)
def iterate_agreement(rng):
    psi = _cubic_map()
    cert = certify(psi, 1)
    bad = []
    for t in (2, 9, 243):
        if not interpolate_iterate(psi, t, cert).equals(psi.power(t)):
            bad.append(t)
    return not bad, f"t in (2, 9, 243), mismatches at {bad}"


def _random_time(rng, ell, min_val=0):
    while True:
        q = Fraction(rng.randrange(-200, 200), rng.randrange(1, 40))
        if q.denominator % ell and (q == 0 or vl(q.numerator, ell) >= min_val):
            return q


@criterion(5, "flows", "one-parameter law psi^(t+t') = psi^t o psi^t'", 30.0)
def one_parameter(rng):
    ring = RingSpec(3, 12)
    x = TruncSeries.var(ring, 1, 8, 0)
    cases = [SeriesMap([x + x ** 3]), SeriesMap([x + x * x])]
    bad = checked = 0
    for psi in cases:
        cert = certify(psi, 1)
        lowest = int(cert.time_exponent) + (cert.time_exponent.denominator > 1)
        for _ in range(10):
            t, t2 = _random_time(rng, 3, lowest), _random_time(rng, 3, lowest)
            lhs = interpolate_iterate(psi, t + t2, cert)
            rhs = interpolate_iterate(psi, t, cert).compose(interpolate_iterate(psi, t2, cert))
            checked += 1
            if not lhs.equals(rhs):
                bad += 1
    return bad == 0, f"{checked} random pairs, {bad} mismatches"


def _random_tangent_map(rng, ring, m, n):
    comps = []
    for j in range(m):
        coeffs = {tuple(int(i == j) for i in range(m)): 1}
        for i in range(m):
            e = tuple(int(k == i) for k in range(m))
            coeffs[e] = coeffs.get(e, 0) + 3 * rng.randrange(-4, 5)
        for exp in monomials(m, 4):
            if sum(exp) >= 2:
                coeffs[exp] = coeffs.get(exp, 0) + rng.randrange(-4, 5)
        comps.append(TruncSeries.from_dict(ring, m, n, coeffs))
    return SeriesMap(comps)


@criterion(6, "flows", "psi = id mod m^2 gives psi^(3^n) = id mod m^(n+2)", 30.0)
def power_congruence(rng):
    ring = RingSpec(3, 10)
    m, n_trunc = 2, 8
    bad = []
    for trial in range(3):
        psi = _random_tangent_map(rng, ring, m, n_trunc)
        ident = SeriesMap.identity(ring, m, n_trunc)
        for n in range(5):
            it = psi.power(3 ** n)
            order = min((a - b).order() for a, b in zip(it.components, ident.components))
            if order < min(n + 2, n_trunc):
                bad.append((trial, n, order))
    return not bad, f"3 maps, n = 0..4, violations {bad}"


@criterion(7, "flows", "flow equation and time-one flow of the logarithm field", 30.0)
def field_consistency(rng):
    ring = RingSpec(3, 12)
    x = TruncSeries.var(ring, 1, 8, 0)
    ring2 = RingSpec(3, 10)
    x1, x2 = TruncSeries.var(ring2, 2, 6, 0), TruncSeries.var(ring2, 2, 6, 1)
    maps = {"x+x^3": SeriesMap([x + x ** 3]), "x+x^2": SeriesMap([x + x * x]),
            "2-var": SeriesMap([x1 + x2 * x2, x2 + x1 * x1 * x2])}
    bad = []
    for name, psi in maps.items():
        X = vector_field_log(psi)
        lhs, rhs = flow_equation_residual(psi, X)
        if not all(a.equals(b) for a, b in zip(lhs, rhs)):
            bad.append(name + ":d/dt")
        if not flow_from_field(X, Fraction(1, ring.e)).at(1).equals(psi):
            bad.append(name + ":flow(1)")
    return not bad, f"{len(maps)} maps, failures {bad}"


def _random_series(rng, ring, m, n, top=5, scale=1):
    coeffs = {exp: scale * rng.randrange(-9, 10) for exp in monomials(m, top)}
    return TruncSeries.from_dict(ring, m, n, coeffs)


@criterion(8, "flows", "Poincare round trips and Cartan formula on closed forms", 10.0)
def cartan(rng):
    ring = RingSpec(3, 10)
    m, n = 2, 8
    bad = []
    for trial in range(10):
        f = _random_series(rng, ring, m, n)
        f0 = f - TruncSeries.const(ring, m, n, 1).scale_scalar(f.constant())
        if not antiderivative(exterior_d(f)).equals(f0):
            bad.append((trial, "F(df)"))
        mu = exterior_d(_random_series(rng, ring, m, n))
        if not exterior_d(antiderivative(mu)).equals(mu):
            bad.append((trial, "dF(mu)"))
        X = VectorField([_random_series(rng, ring, m, n) for _ in range(m)])
        g = _random_series(rng, ring, m, n)
        omega = DiffForm.two_form(ring, m, n, {(0, 1): g})
        # on the plane L_X(g dx1^dx2) = (X(g) + g div X) dx1^dx2
        div = X.components[0].deriv(0) + X.components[1].deriv(1)
        expected = DiffForm.two_form(ring, m, n, {(0, 1): X.apply(g) + g * div})
        if not lie_derivative(X, omega).equals(expected):
            bad.append((trial, "Cartan 2-form"))
        # closed 1-forms: i_X df = X(f)
        if not contract(X, exterior_d(f)).components.equals(X.apply(f)):
            bad.append((trial, "contraction"))
    return not bad, f"10 random (X, omega), failures {bad}"


# ---------------------------------------------------------------------------
# regulator

REG_TARGET = 4


def _reg_cutoff():
    return minimal_cutoff(3, 3, 1, REG_TARGET, "lemma")


@criterion(9, "regulator", "alternating 5-term sum of Psi_3 vanishes", 300.0)
def regulator_cocycle(rng):
    cutoff = _reg_cutoff()
    bad, worst = [], None
    for trial in range(10):
        g = [_congruence_matrix(rng, 2, 6) for _ in range(5)]
        vals = [phi_tilde(g[:i] + g[i + 1:], 3, cutoff, 3, input_prec=6) for i in range(5)]
        res = combine([((-1) ** i, v) for i, v in enumerate(vals)], 3, cutoff)
        worst = res.certified_error if worst is None else min(worst, res.certified_error)
        if not res.is_negligible() or res.certified_error < REG_TARGET:
            bad.append(trial)
    return not bad, f"10 tuples at cutoff {cutoff}, certified error 3^-{worst}, failures {bad}"


@criterion(10, "regulator", "bi-invariance, conjugation invariance and alternation of Psi_3", 120.0)
def regulator_invariance(rng):
    cutoff = _reg_cutoff()
    mod = 3 ** 6
    bad = []
    for trial in range(4):
        d = 2 + trial % 2
        g = [_congruence_matrix(rng, d, 6) for _ in range(4)]
        h = _congruence_matrix(rng, d, 6)
        hinv = mat_inv_mod(h, mod)
        base = phi_tilde(g, 3, cutoff, 3, input_prec=6)
        variants = {
            "left": [mat_mul(h, x, mod) for x in g],
            "right": [mat_mul(x, h, mod) for x in g],
            "conj": [mat_mul(mat_mul(h, x, mod), hinv, mod) for x in g],
        }
        for name, tup in variants.items():
            if not base.agrees_with(phi_tilde(tup, 3, cutoff, 3, input_prec=6)):
                bad.append((trial, name))
        perm = list(range(4))
        rng.shuffle(perm)
        sign = _perm_sign(perm)
        swapped = phi_tilde([g[i] for i in perm], 3, cutoff, 3, input_prec=6)
        residual = combine([(1, swapped), (-sign, base)], 3, cutoff)
        if not residual.is_negligible():
            bad.append((trial, "alternating"))
        repeated = phi_tilde([g[0], g[1], g[1], g[2]], 3, cutoff, 3, input_prec=6)
        if not repeated.is_negligible():
            bad.append((trial, "repeated"))
    return not bad, f"4 tuples in GL_2 and GL_3, failures {bad}"


def _perm_sign(perm):
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def decomposable_configurations(rng, P=5):
    """Five (group, z, h) with z = [a|b] - [b|a] and h commuting with a and b."""
    mod = 3 ** P
    out = []
    for d, h_lead in ((2, 2), (2, 1), (3, 1), (3, 1), (3, 1)):
        M = tuple(tuple(rng.randrange(mod) for _ in range(d)) for _ in range(d))
        a = _poly(M, [1, 3], mod)
        b = _poly(M, [1, 0, 9 * rng.randrange(1, 9)], mod)
        h = _poly(M, [h_lead, 3, 3 * rng.randrange(1, 9)], mod)
        G = MatrixGroup(d, 3, P)
        out.append((G, BarChain(G, 2, {(a, b): 1, (b, a): -1}, 3, P), h))
    return out


@criterion(11, "regulator", "Psi_3 of F_h(z) vanishes for h centralizing z", 300.0)
def decomposable_vanishing(rng):
    cutoff = _reg_cutoff()
    bad, errs = [], []
    for i, (G, z, h) in enumerate(decomposable_configurations(rng)):
        if not boundary(z).is_zero():
            bad.append((i, "not a cycle"))
            continue
        value = evaluate_chain(homotopy_F(z, h), cutoff, 3, input_prec=G.P)
        errs.append(value.certified_error)
        if not value.is_negligible():
            bad.append((i, str(value.value)))
    return not bad, f"5 configurations, certified errors {errs}, failures {bad}"


# ---------------------------------------------------------------------------
# symplectic

def symplectic_suite():
    """(label, rho0, cocycles, fundamental cycle) cases over (Z/3)^2 and (Z/9)^2."""
    z3 = FiniteGroup.cyclic(3)
    G = FiniteGroup.product(z3, z3)
    a, b = G.index("(1,0)"), G.index("(0,1)")
    z = BarChain(G, 2, {(a, b): 1, (b, a): -1}, 3, 4)
    C = ((0, -1), (1, -1))
    I2 = mat_identity(2)
    cases = []
    for label, imgs in (("rotation pair", (C, mat_mul(C, C))), ("rotation, trivial", (C, I2)),
                        ("rotation twice", (C, C)),
                        ("trivial, unipotent", (I2, ((1, 27), (0, 1))))):
        rho0 = MatrixRep.from_generators(G, [a, b], list(imgs), 3, 4)
        cases.append((f"(Z/3)^2 {label}", rho0, cocycle_basis(rho0), z))
    z9 = FiniteGroup.cyclic(9)
    H = FiniteGroup.product(z9, z9)
    a, b = H.index("(1,0)"), H.index("(0,1)")
    rho0 = MatrixRep.from_generators(H, [a, b], [I2, I2], 3, 2)
    E, F, D = ((0, 1), (0, 0)), ((0, 0), (1, 0)), ((1, 0), (0, -1))
    cocs = [homomorphism_cocycle(H, [a, b], vals, 9) for vals in ((E, F), (F, D), (D, E), (E, D))]
    cases.append(("(Z/9)^2 trivial", rho0, cocs, BarChain(H, 2, {(a, b): 1, (b, a): -1}, 3, 2)))
    return cases


@criterion(12, "symplectic", "omega from the deformation equals the cup pairing", 60.0)
def symplectic_equality(rng):
    bad, pairs, nonzero = [], 0, 0
    for label, rho0, cocs, z in symplectic_suite():
        for c1 in cocs:
            for c2 in cocs:
                r = omega_vs_cup(c1, c2, rho0, z)
                pairs += 1
                nonzero += not r["pairing"].startswith("w:inf")
                if not r["equal"]:
                    bad.append(label)
    return not bad, f"{pairs} cocycle pairs ({nonzero} nonzero pairings), failures {bad}"


@criterion(13, "symplectic", "Poisson bracket: antisymmetry, Leibniz, Jacobi", 30.0)
def poisson(rng):
    ring = RingSpec(3, 10)
    m, n = 2, 8
    one = TruncSeries.one(ring, m, n)
    x1, x2 = TruncSeries.var(ring, m, n, 0), TruncSeries.var(ring, m, n, 1)
    base = DiffForm.two_form(ring, m, n, {(0, 1): one})
    symbols = [[], [(one + x1, one + x2, 1)], [(one + x1 * x2, one - x1, 1), (one + x2 * 3, one + x1 + x2, -1)]]
    bad = []
    for i, syms in enumerate(symbols):
        omega = base + dlog_symbols(syms).scale(3) if syms else base
        f, g, h = (_random_series(rng, ring, m, n, top=4) for _ in range(3))

        def pb(u, v):
            return poisson_bracket(u, v, omega)
        if not (pb(f, g) + pb(g, f)).is_zero():
            bad.append((i, "antisymmetry"))
        if not (pb(f * g, h) - f * pb(g, h) - g * pb(f, h)).is_zero():
            bad.append((i, "Leibniz"))
        if not (pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))).is_zero():
            bad.append((i, "Jacobi"))
    return not bad, f"{len(symbols)} forms, failures {bad}"


# ---------------------------------------------------------------------------
# volume

def swap_setup(P=6, k=3):
    """(Z/3)^2 with a rotation representation and the generator swap."""
    mod = 3 ** P
    z3 = FiniteGroup.cyclic(3)
    G = FiniteGroup.product(z3, z3)
    a, b = G.index("(1,0)"), G.index("(0,1)")
    Cu, hu = _conjugated_rotation(mod)
    rho = MatrixRep.from_generators(G, [a, b], [Cu, mat_mul(Cu, Cu, mod)], 3, P)
    swap = GroupAutomorphism.from_generators(G, [a, b], [b, a])
    datum = ConjugationDatum(swap, hu, -1, "swap")
    c = BarChain(G, 2, {(a, b): 1, (b, a): -1}, 3, k)
    return VolumeSetup(rho, c, [datum]), datum, (a, b), Cu


def restriction_setup(P=6, k=3):
    """Z/9 x Z/3 with the inversion of the first factor, and its index-3 subgroup <a^3, b>."""
    mod = 3 ** P
    G = FiniteGroup.product(FiniteGroup.cyclic(9), FiniteGroup.cyclic(3))
    a, b = G.index("(1,0)"), G.index("(0,1)")
    Cu, hu = _conjugated_rotation(mod)
    rho = MatrixRep.from_generators(G, [a, b], [Cu, mat_identity(2)], 3, P)
    sigma = GroupAutomorphism.from_generators(G, [a, b], [G.inverse(a), b])
    datum = ConjugationDatum(sigma, hu, -1, "invert")
    setup = VolumeSetup(rho, BarChain(G, 2, {(a, b): 1, (b, a): -1}, 3, k), [datum])
    a3 = G.op(G.op(a, a), a)
    sub = sorted({G.op(p, q) for p in (0, a3, G.op(a3, a3)) for q in (0, b, G.op(b, b))})
    ia, ib = sub.index(a3), sub.index(b)
    c_sub = BarChain(None, 2, {(ia, ib): 1, (ib, ia): -1}, 3, k)
    return setup, datum, sub, c_sub


@criterion(14, "volume", "volume audits on the swap setup and the index-3 restriction", 300.0)
def volume_audits(rng):
    cutoff = 6
    setup, datum, (a, b), Cu = swap_setup()
    mod = setup.mod
    result = twist_defect(setup, datum, cutoff, ambiguity=True)
    lattice = result.ambiguity_valuation()
    z = tuple(tuple((int(i == j) + 3 * Cu[i][j]) % mod for j in range(2)) for i in range(2))
    checks = {
        "h-independence": h_independence(setup, datum, z, cutoff, lattice)["pass"],
        "lift-independence": lift_independence(setup, datum, a, cutoff, lattice)["pass"],
        "cocycle": all(r["pass"] for r in cocycle_audit(setup, [(datum, datum)], cutoff, lattice)),
        "chain-independence": chain_independence(
            setup, datum, BarChain(setup.group, 3, {(a, a, b): 1, (b, a, b): 2}, 3, setup.c.k),
            cutoff, lattice)["pass"],
    }
    rsetup, rdatum, sub, c_sub = restriction_setup()
    checks["restriction"] = all(r["pass"] for r in restriction_audit(rsetup, sub, c_sub, 3, [rdatum], cutoff))
    failed = [k for k, ok in checks.items() if not ok]
    lat = "inf" if lattice == float("inf") else lattice
    return not failed, (f"value {result.value.value}, certified error 3^-{result.value.certified_error}, "
                        f"ambiguity lattice 3^{lat}, failures {failed}")


# ---------------------------------------------------------------------------
# driver

@dataclass
class Outcome:
    criterion: Criterion
    status: str
    detail: str
    seconds: float

    def line(self, record_time=False):
        c = self.criterion
        text = f"{self.status} {c.number:2d} [{c.suite}] {c.title}: {self.detail}"
        if record_time:
            text += f" ({self.seconds:.2f}s of {c.limit:.0f}s)"
        return text


def select(suite: str):
    if suite == "all":
        return sorted(CRITERIA, key=lambda c: c.number)
    if suite not in SUITES:
        from .errors import ValidationError
        raise ValidationError(f"unknown suite {suite!r}", choices=list(SUITES) + ["all"])
    return sorted((c for c in CRITERIA if c.suite == suite), key=lambda c: c.number)


def run_criterion(c: Criterion, seed: int = 0) -> Outcome:
    rng = random.Random(f"{seed}:{c.number}")
    start = time.perf_counter()
    try:
        ok, detail = c.run(rng)
    except Exception as exc:  # a crash is a failure, reported with its type
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if ok and elapsed > c.limit:
        ok, detail = False, detail + f"; exceeded the {c.limit:.0f}s limit"
    return Outcome(c, "PASS" if ok else "FAIL", detail, elapsed)


def run_suite(suite: str, seed: int = 0, budget=None, emit=None):
    """Run a suite, stopping with BudgetExceeded once the budget is spent.

    Outcomes gathered so far are attached to the exception as `.outcomes`.
    """
    outcomes = []
    start = time.perf_counter()
    for c in select(suite):
        if budget is not None and time.perf_counter() - start >= budget:
            exc = BudgetExceeded("time budget spent before the suite finished",
                                 completed=len(outcomes), next=c.number)
            exc.outcomes = outcomes
            raise exc
        outcome = run_criterion(c, seed)
        outcomes.append(outcome)
        if emit:
            emit(outcome)
        if budget is not None and time.perf_counter() - start > budget:
            exc = BudgetExceeded("time budget exceeded", completed=len(outcomes), last=c.number)
            exc.outcomes = outcomes
            raise exc
    return outcomes

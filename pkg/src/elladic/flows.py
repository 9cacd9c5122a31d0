"""Iterates, interpolated flows and vector fields on the polydisk.

Everything is computed modulo m^n.  For a time t in Z_l the binomial
coefficients C(t, k) are integral and Delta^k(x) lies in m^(k(N-1)+1), so
the interpolation sum is finite and exact at truncation; certificates
record the radius/time region where the analytic statements hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import (CertificateMismatch, CongruenceTooWeak, Inconclusive, NormViolation, NotContracting,
                     OutsideRegion, ShapeMismatch, VarMismatch, ValidationError)
from .padic_core import INF, PadicScalar, RingSpec, cap_N, vl, vl_fraction
from .series import DiffForm, TruncSeries, VectorField, antiderivative, closedness_residual, contract, exterior_d


class SeriesMap:
    """Self-map x -> (psi_1(x), ..., psi_m(x)) of the open polydisk."""
    __slots__ = ("components", "_N")

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ShapeMismatch("empty map")
        m = comps[0].m
        if len(comps) != m or any(c.m != m or c.ring != comps[0].ring for c in comps):
            raise ShapeMismatch("a self-map needs m components in m variables")
        for c in comps:
            if c.order() < 1:
                raise NotContracting("a component does not map the maximal ideal into itself")
        self.components = comps
        self._N = None

    @classmethod
    def identity(cls, ring: RingSpec, m: int, n: int):
        return cls([TruncSeries.var(ring, m, n, j) for j in range(m)])

    @property
    def ring(self):
        return self.components[0].ring

    @property
    def m(self):
        return len(self.components)

    @property
    def n(self):
        return min(c.n for c in self.components)

    @property
    def N(self):
        """Congruence order: psi(x) - x lies in m^N (capped at n)."""
        if self._N is None:
            n = self.n
            orders = [min((c - TruncSeries.var(self.ring, self.m, n, j)).order(), n)
                      for j, c in enumerate(self.components)]
            self._N = min(orders)
        return self._N

    def compose(self, other: "SeriesMap") -> "SeriesMap":
        """self o other."""
        if other.m != self.m or other.ring != self.ring:
            raise VarMismatch("maps of different shape")
        return SeriesMap([c.substitute(other.components) for c in self.components])

    def power(self, k: int) -> "SeriesMap":
        """k-fold composition by repeated squaring."""
        if k < 0:
            raise ValidationError("negative iterate", k=k)
        out = SeriesMap.identity(self.ring, self.m, self.n)
        base = self
        while k:
            if k & 1:
                out = out.compose(base)
            k >>= 1
            if k:
                base = base.compose(base)
        return out

    def pullback(self, f: TruncSeries) -> TruncSeries:
        return f.substitute(self.components)

    def equals(self, other) -> bool:
        return all(a.equals(b) for a, b in zip(self.components, other.components))

    def with_order(self, n):
        return SeriesMap([c.with_order(n) for c in self.components])

    def to_json(self):
        base = self.components[0].to_json()
        return {"ring": base["ring"], "m": self.m, "n": self.n, "kind": "map",
                "components": [c.to_json()["terms"] for c in self.components]}

    @classmethod
    def from_json(cls, obj):
        try:
            ring = RingSpec.from_json(obj["ring"])
            m, n = int(obj["m"]), int(obj["n"])
            comps = obj["components"]
            if isinstance(comps, dict):
                comps = [comps[f"e{i + 1}"] for i in range(m)]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad map JSON: {exc}") from None
        return cls([TruncSeries.from_json({"ring": obj["ring"], "m": m, "n": n, "terms": t}, ring)
                    for t in comps])


def field_from_json(obj) -> VectorField:
    try:
        ring = RingSpec.from_json(obj["ring"])
        m, n = int(obj["m"]), int(obj["n"])
        comps = obj["components"]
        if isinstance(comps, dict):
            comps = [comps[f"e{i + 1}"] for i in range(m)]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad field JSON: {exc}") from None
    return VectorField([TruncSeries.from_json({"ring": obj["ring"], "m": m, "n": n, "terms": t}, ring)
                        for t in comps])


# ---------------------------------------------------------------------------
# difference operator

def delta(psi: SeriesMap, h: TruncSeries) -> TruncSeries:
    """Delta_psi(h) = h o psi - h."""
    return psi.pullback(h) - h


def delta_powers(psi: SeriesMap, kmax: int):
    """[Delta^k(x) for k = 0..kmax], each an m-tuple of series."""
    ring, m, n = psi.ring, psi.m, psi.n
    cur = [TruncSeries.var(ring, m, n, j) for j in range(m)]
    out = [tuple(cur)]
    for _ in range(kmax):
        cur = [delta(psi, h) for h in cur]
        out.append(tuple(cur))
    return out


def delta_power(psi: SeriesMap, k: int):
    """Delta^k applied to the coordinates, with the order bound k(N-1)+1.

    Returns (components, bound).  The bound is verified on the result.
    """
    if k < 0:
        raise ValidationError("k must be >= 0", k=k)
    comps = delta_powers(psi, k)[k]
    bound = k * (psi.N - 1) + 1 if k else 0
    for c in comps:
        if c.order() < min(bound, c.n):
            raise CongruenceTooWeak("Delta^k order below k(N-1)+1", k=k)
    return comps, bound


def _last_useful_k(N, n):
    # Delta^k(x) has order >= k(N-1)+1; with integral coefficients nothing
    # beyond (n-1)/(N-1) survives truncation
    if N <= 1:
        raise CongruenceTooWeak("psi must be congruent to the identity mod m^2", N=N)
    return (n - 2) // (N - 1)


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class ConvergenceCertificate:
    radius_exponent: Fraction
    time_exponent: Fraction
    basis: str
    congruence_order: int
    ell: int

    def admits(self, t) -> bool:
        return _time_valuation(t, self.ell) >= self.time_exponent

    def to_json(self):
        return {"radius_exponent": str(self.radius_exponent), "time_exponent": str(self.time_exponent),
                "basis": self.basis, "congruence_order": self.congruence_order}


def certify(psi: SeriesMap, a) -> ConvergenceCertificate:
    """Time region on which psi^t converges on the polydisk of radius l^-a.

    a > 1/((l-1)(N-1)) gives every t in Z_l.  For N = 2 the region is
    v(t) >= 1/(a(l-1)).  Otherwise psi^(l^k) is congruent to the identity
    mod m^(N+k) and the first k with a > 1/((l-1)(N+k-1)) is used.
    """
    a = Fraction(a)
    ring = psi.ring
    if not 0 < a <= Fraction(1, ring.e):
        raise ValidationError("radius exponent must lie in (0, 1/e]", a=str(a))
    N = psi.N
    if N < 2:
        raise CongruenceTooWeak("psi must be congruent to the identity mod m^2", N=N)
    return certificate_for(ring.ell, N, a)


def certificate_for(ell: int, N: int, a) -> ConvergenceCertificate:
    a = Fraction(a)
    if a > Fraction(1, (ell - 1) * (N - 1)):
        return ConvergenceCertificate(a, Fraction(0), "large-radius", N, ell)
    if N == 2:
        return ConvergenceCertificate(a, 1 / (a * (ell - 1)), "quadratic-congruence", N, ell)
    k = 0
    while not a > Fraction(1, (ell - 1) * (N + k - 1)):
        k += 1
    return ConvergenceCertificate(a, Fraction(k), "power-iterate", N, ell)


def _time_valuation(t, ell):
    if isinstance(t, PadicScalar):
        return t.lower_val() / Fraction(t.ring.e) if t.lower_val() != INF else INF
    q = Fraction(t)
    return INF if q == 0 else Fraction(vl_fraction(q, ell))


def _binomials(t, kmax, ring):
    """C(t, k) for k = 0..kmax as Fractions (rational t) or PadicScalars."""
    out = []
    if isinstance(t, PadicScalar):
        c = PadicScalar.from_int(ring, 1)
        out.append(c)
        for k in range(1, kmax + 1):
            c = c * (t - (k - 1)) / k
            out.append(c)
        return out
    t = Fraction(t)
    c = Fraction(1)
    out.append(c)
    for k in range(1, kmax + 1):
        c = c * (t - (k - 1)) / k
        out.append(c)
    return out


def interpolate_iterate(psi: SeriesMap, t, cert: ConvergenceCertificate) -> SeriesMap:
    """psi^t = sum_k C(t,k) Delta^k(x)."""
    if cert.congruence_order != psi.N or cert.ell != psi.ring.ell:
        raise CertificateMismatch("certificate was issued for a different map",
                                  cert_N=cert.congruence_order, N=psi.N)
    if isinstance(t, str):
        from .padic_core import scalar
        t = scalar(psi.ring, t)
    if not cert.admits(t):
        raise OutsideRegion("time lies outside the certified region",
                            time_exponent=str(cert.time_exponent))
    if not isinstance(t, PadicScalar) and Fraction(t).denominator % psi.ring.ell == 0:
        raise OutsideRegion("time is not an l-adic integer")
    kmax = _last_useful_k(psi.N, psi.n)
    deltas = delta_powers(psi, kmax)
    coeffs = _binomials(t, kmax, psi.ring)
    comps = []
    for j in range(psi.m):
        total = None
        for k in range(kmax + 1):
            c = coeffs[k]
            if isinstance(c, PadicScalar):
                term = deltas[k][j].scale_scalar(c)
            else:
                term = deltas[k][j].scale(c)
            total = term if total is None else total + term
        comps.append(total)
    return SeriesMap(comps)


# ---------------------------------------------------------------------------
# logarithm of a map

def _log_cutoff(N, n, e, ell):
    """Smallest K with k(N-1) + 1 - e v(k) >= n for all k >= K, and the
    minimum of that quantity over k >= K."""
    def f(k):
        return k * (N - 1) + 1 - e * vl(k, ell)
    # beyond l^r with l^r (l-1)(N-1) >= e the block minima increase
    r = 0
    while not (ell ** r * (ell - 1) * (N - 1) >= e and f(ell ** r) >= n and ell ** r * (N - 1) + 1 >= n):
        r += 1
    limit = ell ** (r + 1)
    last_bad = 0
    for k in range(1, limit + 1):
        if f(k) < n:
            last_bad = k
    K = last_bad + 1
    return K, min(f(k) for k in range(K, limit + 1))


def log_norm_bound(ell: int, N: int, a):
    """Exponent w with ||X_psi||_r <= l^-w at r = l^-a."""
    a = Fraction(a)
    top, _ = cap_N(ell, 1, a * (N - 1))
    return 1 + a - top


def vector_field_log(psi: SeriesMap) -> VectorField:
    """X_psi = sum_k (-1)^(k-1) Delta^k(x) / k."""
    ring = psi.ring
    N, n = psi.N, psi.n
    if N < 2:
        raise CongruenceTooWeak("psi must be congruent to the identity mod m^2", N=N)
    if N >= n:
        return VectorField.zero(ring, psi.m, n)
    K, tail = _log_cutoff(N, n, ring.e, ring.ell)
    deltas = delta_powers(psi, K - 1)
    comps = []
    for j in range(psi.m):
        total = TruncSeries.zero(ring, psi.m, n)
        for k in range(1, K):
            total = total + deltas[k][j].scale(Fraction((-1) ** (k - 1), k))
        comps.append(total.with_order(tail))
    return VectorField(comps)


# ---------------------------------------------------------------------------
# flows of vector fields

class FieldFlow:
    """h_t(x) = sum_s c_s t^s / s! with c_0 = x and c_s = X(c_{s-1})."""

    def __init__(self, field: VectorField, coefficients, a, order):
        self.field = field
        self.coefficients = coefficients
        self.radius_exponent = a
        self.n = order
        self.time_exponent = Fraction(1, field.ring.ell - 1)

    def at(self, t) -> SeriesMap:
        ring = self.field.ring
        if isinstance(t, PadicScalar):
            if t.lower_val() < 0:
                raise OutsideRegion("time must be an l-adic integer")
            comps = []
            for j in range(self.field.m):
                total = TruncSeries.zero(ring, self.field.m, self.n)
                power = PadicScalar.from_int(ring, 1)
                for s, c in enumerate(self.coefficients):
                    if s:
                        power = power * t / s
                    total = total + c[j].scale_scalar(power)
                comps.append(total.with_order(self.n))
            return SeriesMap(comps)
        t = Fraction(t)
        if t != 0 and vl_fraction(t, ring.ell) < 0:
            raise OutsideRegion("time must be an l-adic integer")
        comps = []
        for j in range(self.field.m):
            total = TruncSeries.zero(ring, self.field.m, self.n)
            w = Fraction(1)
            for s, c in enumerate(self.coefficients):
                if s:
                    w = w * t / s
                total = total + c[j].scale(w)
            comps.append(total.with_order(self.n))
        return SeriesMap(comps)


def flow_from_field(X: VectorField, a) -> FieldFlow:
    """Formal flow of X, certified for t in Z_l at truncation.

    Requires ||X||_r <= r for r = l^-a.  When X lies in m^M with
    (M - 1) > e/(l-1), the term c_s t^s/s! has order at least
    1 + s(M-1) - e(s-1)/(l-1), which bounds the dropped tail.
    """
    a = Fraction(a)
    ring = X.ring
    for comp in X.components:
        norm = comp.gauss_norm(a)
        if norm.log_norm < a:
            raise NormViolation("||X||_r exceeds r", component_norm=str(norm.log_norm), a=str(a))
    m, n = X.m, X.n
    M = min(X.order(), n)
    e, ell = ring.e, ring.ell
    coeffs = [tuple(TruncSeries.var(ring, m, n, j) for j in range(m))]
    if X.is_zero():
        return FieldFlow(X, coeffs, a, n)
    if Fraction(M - 1) <= Fraction(e, ell - 1):
        raise NormViolation("field is not contracting enough for a certified flow", order=M)

    def bound(s):
        return 1 + s * (M - 1) - Fraction(e * (s - 1), ell - 1)

    # bound(s) increases with s: stop at the first s whose term is invisible
    S = 1
    while bound(S) < n:
        S += 1
    for _ in range(1, S):
        prev = coeffs[-1]
        coeffs.append(tuple(X.apply(c) for c in prev))
    order = min([n] + [c.n for cs in coeffs for c in cs])
    return FieldFlow(X, coeffs, a, order)


# ---------------------------------------------------------------------------
# brackets, Lie derivatives, potentials

def field_bracket(X: VectorField, Y: VectorField) -> VectorField:
    if X.m != Y.m or X.ring != Y.ring:
        raise ShapeMismatch("fields of different shape")
    return VectorField([X.apply(Yi) - Y.apply(Xi) for Xi, Yi in zip(X.components, Y.components)])


def _contract_three_form(X: VectorField, t3, ring, m, n):
    comps = {(i, j): TruncSeries.zero(ring, m, n) for i, j in combinations(range(m), 2)}
    for (i, j, k), c in t3.items():
        Xi, Xj, Xk = X.components[i], X.components[j], X.components[k]
        comps[(j, k)] = comps[(j, k)] + Xi * c
        comps[(i, k)] = comps[(i, k)] - Xj * c
        comps[(i, j)] = comps[(i, j)] + Xk * c
    return DiffForm(2, ring, m, comps)


def lie_derivative(X: VectorField, omega: DiffForm) -> DiffForm:
    """Cartan's formula L_X = d i_X + i_X d on 2-forms."""
    if omega.degree != 2:
        raise ShapeMismatch("lie_derivative expects a 2-form")
    if X.m != omega.m or X.ring != omega.ring:
        raise ShapeMismatch("field and form have different shapes")
    out = exterior_d(contract(X, omega))
    if omega.m >= 3:
        out = out + _contract_three_form(X, closedness_residual(omega), omega.ring, omega.m, out.n)
    return out


def hamiltonian_potential(X: VectorField, omega: DiffForm) -> TruncSeries:
    """V with dV = i_X omega and V(0) = 0."""
    return antiderivative(contract(X, omega))


def pullback_form(psi: SeriesMap, omega: DiffForm) -> DiffForm:
    """psi^* of a 2-form."""
    if omega.degree != 2:
        raise ShapeMismatch("pullback_form expects a 2-form")
    m = psi.m
    jac = [[c.deriv(k) for k in range(m)] for c in psi.components]
    pulled = {key: psi.pullback(g) for key, g in omega.components.items()}
    comps = {}
    for k, l in combinations(range(m), 2):
        total = None
        for (i, j), g in pulled.items():
            t = g * (jac[i][k] * jac[j][l] - jac[i][l] * jac[j][k])
            total = t if total is None else total + t
        comps[(k, l)] = total if total is not None else TruncSeries.zero(psi.ring, m, psi.n)
    return DiffForm(2, psi.ring, m, comps)


def is_critical(fields, point, digits=None):
    """Per field: does every component vanish at the point?

    A component counts as zero when it vanishes modulo pi^digits (default:
    the field's truncation order).  A value that is zero only to fewer
    digits than requested raises Inconclusive.
    """
    out = []
    for X in fields:
        need = X.n if digits is None else digits
        zero = True
        for comp in X.components:
            val = comp.evaluate(point)
            if not val.is_zero():
                zero = False
                break
            if val.prec < need:
                raise Inconclusive("component is zero only to the available precision",
                                   available=val.prec, requested=need)
        out.append(zero)
    return out


# ---------------------------------------------------------------------------
# polynomials in t with series coefficients

class TimePolynomial:
    """sum_j t^j A_j with A_j truncated series (used to differentiate in t)."""

    def __init__(self, ring, m, n, coeffs):
        self.ring, self.m, self.n = ring, m, n
        self.coeffs = {j: c for j, c in coeffs.items() if not c.is_zero()}

    @classmethod
    def constant(cls, f: TruncSeries):
        return cls(f.ring, f.m, f.n, {0: f})

    def __add__(self, other):
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out[j] + c if j in out else c
        return TimePolynomial(self.ring, self.m, min(self.n, other.n), out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, q):
        return TimePolynomial(self.ring, self.m, self.n, {j: c.scale(q) for j, c in self.coeffs.items()})

    def __mul__(self, other):
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                p = a * b
                out[i + j] = out[i + j] + p if i + j in out else p
        return TimePolynomial(self.ring, self.m, min(self.n, other.n), out)

    def times_series(self, f: TruncSeries):
        return TimePolynomial(self.ring, self.m, self.n, {j: c * f for j, c in self.coeffs.items()})

    def derivative(self):
        return TimePolynomial(self.ring, self.m, self.n,
                              {j - 1: c.scale(j) for j, c in self.coeffs.items() if j})

    def equals(self, other) -> bool:
        # coefficients may claim more digits than the polynomial as a whole
        n = min(self.n, other.n)
        keys = set(self.coeffs) | set(other.coeffs)
        zero = TruncSeries.zero(self.ring, self.m, n)
        return all(self.coeffs.get(j, zero).with_order(n).equals(other.coeffs.get(j, zero).with_order(n))
                   for j in keys)


def iterate_polynomial(psi: SeriesMap):
    """psi^t as polynomials in t, one per coordinate."""
    kmax = _last_useful_k(psi.N, psi.n)
    deltas = delta_powers(psi, kmax)
    # C(t,k) as polynomial coefficients
    binom = [[Fraction(1)]]
    for k in range(1, kmax + 1):
        prev = binom[-1]
        nxt = [Fraction(0)] * (k + 1)
        for j, c in enumerate(prev):
            nxt[j + 1] += c / k
            nxt[j] -= c * (k - 1) / k
        binom.append(nxt)
    out = []
    for j in range(psi.m):
        coeffs = {}
        for k in range(kmax + 1):
            for d, c in enumerate(binom[k]):
                if c:
                    term = deltas[k][j].scale(c)
                    coeffs[d] = coeffs[d] + term if d in coeffs else term
        out.append(TimePolynomial(psi.ring, psi.m, psi.n, coeffs))
    return out


def substitute_polynomial(f: TruncSeries, polys):
    """f(P_1, ..., P_m) for time polynomials P_j mapping m into m."""
    ring, m = f.ring, f.m
    n = min([f.n] + [p.n for p in polys])
    one = TimePolynomial.constant(TruncSeries.one(ring, m, n))
    cache = {(0,) * m: one}

    def power(i):
        if i in cache:
            return cache[i]
        j = next(k for k, x in enumerate(i) if x)
        prev = list(i)
        prev[j] -= 1
        val = power(tuple(prev)) * polys[j]
        cache[i] = val
        return val

    total = TimePolynomial(ring, m, n, {})
    for i in sorted(f.terms, key=lambda t: (sum(t), t)):
        c = f.coefficient(i)
        total = total + TimePolynomial(ring, m, n, {d: s.scale_scalar(c) for d, s in power(i).coeffs.items()})
    return total


def flow_equation_residual(psi: SeriesMap, X: VectorField | None = None):
    """(d/dt psi^t, X_psi(psi^t)) as per-coordinate time polynomials."""
    X = X or vector_field_log(psi)
    polys = iterate_polynomial(psi)
    lhs = [p.derivative() for p in polys]
    rhs = [substitute_polynomial(Xi, polys) for Xi in X.components]
    return lhs, rhs

"""Truncated power series over O_E and the exterior calculus on the polydisk.

A TruncSeries with truncation order n and shift s stands for every f with
pi^s * f in O[[x]] and pi^s * f congruent to the stored polynomial modulo
m^(n+s), where m = (pi, x_1, ..., x_m).  For integral series (s = 0) this
is exactly R / m^n.  The shift lets denominators such as 1/k appear without
giving up the integrality of the unknown tail.

Orders are counted in pi-adic units throughout: the weight of pi^c x^i
is c + |i|.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import DegreeTooHigh, NonUnit, NotClosed, NotContracting, ShapeMismatch, VarMismatch
from .padic_core import INF, PadicScalar, RingSpec, ceil_div, vl


def _deg(i):
    return sum(i)


def monomials(m: int, below: int):
    """All exponent vectors of m variables with total degree < below."""
    if m == 0:
        if below > 0:
            yield ()
        return
    for d in range(below):
        yield from _monomials_of_degree(m, d)


def _monomials_of_degree(m, d):
    if m == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _monomials_of_degree(m - 1, d - first):
            yield (first,) + rest


class TruncSeries:
    __slots__ = ("ring", "m", "n", "s", "terms")

    def __init__(self, ring: RingSpec, m: int, n: int, terms=None, s: int = 0):
        self.ring = ring
        self.m = m
        self.n = n
        self.s = s
        self.terms = _clean(ring, terms or {}, n + s)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ring, m, n):
        return cls(ring, m, n)

    @classmethod
    def const(cls, ring, m, n, c=1):
        return cls.from_dict(ring, m, n, {(0,) * m: c})

    @classmethod
    def one(cls, ring, m, n):
        return cls.const(ring, m, n, 1)

    @classmethod
    def var(cls, ring, m, n, j):
        e = [0] * m
        e[j] = 1
        return cls.from_dict(ring, m, n, {tuple(e): 1})

    @classmethod
    def from_dict(cls, ring, m, n, coeffs):
        """Build from {exponent: int | Fraction | PadicScalar}.

        Rational coefficients are exact; a PadicScalar coefficient only
        contributes the digits it certifies, which may lower n.
        """
        order = n
        shifts = [0]
        for exp, c in coeffs.items():
            if len(exp) != m:
                raise VarMismatch("exponent length differs from the number of variables", exp=list(exp))
            if isinstance(c, PadicScalar):
                if c.ring != ring:
                    raise VarMismatch("coefficient over a different ring")
                order = min(order, c.prec + _deg(exp))
                if c.val != INF:
                    shifts.append(-c.val)
            elif Fraction(c) != 0:
                q = Fraction(c)
                shifts.append(-ring.e * (vl(q.numerator, ring.ell) - vl(q.denominator, ring.ell)))
        s = max(shifts)
        return cls(ring, m, order, _exact_terms(ring, coeffs, s, order + s, m), s)

    # -- basic views --------------------------------------------------------
    @property
    def N(self):
        return self.n + self.s

    def _check(self, other):
        if not isinstance(other, TruncSeries):
            raise VarMismatch("expected a TruncSeries")
        if other.ring != self.ring or other.m != self.m:
            raise VarMismatch("series over different rings or variable counts")

    def order(self):
        """Lower bound for min(v(c_i) + |i|) over the true series."""
        ring = self.ring
        best = self.N
        for i, u in self.terms.items():
            best = min(best, ring.val(u) + _deg(i))
        return best - self.s

    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return self.s == 0 or all(self.ring.val(u) >= self.s for u in self.terms.values())

    def coefficient(self, exp) -> PadicScalar:
        exp = tuple(exp)
        u = self.terms.get(exp, self.ring.zero)
        return PadicScalar.make(self.ring, -self.s, u, self.N - _deg(exp) - self.s) if self.N - _deg(exp) > 0 \
            else PadicScalar.zero(self.ring, self.n - _deg(exp))

    def constant(self) -> PadicScalar:
        return self.coefficient((0,) * self.m)

    def rational_coefficient(self, exp):
        """Coefficient as a Fraction (e = 1): the canonical representative."""
        ring = self.ring
        u = self.terms.get(tuple(exp), 0)
        return Fraction(u, ring.pow_ell(self.s)) if ring.e == 1 else None

    def __repr__(self):
        return f"TruncSeries(m={self.m}, n={self.n}, s={self.s}, terms={dict(sorted(self.terms.items()))})"

    # -- precision control --------------------------------------------------
    def with_order(self, n):
        if n >= self.n:
            return self
        return TruncSeries(self.ring, self.m, n, self.terms, self.s)

    def _shifted(self, s):
        """Same series with a larger shift s (pure relabeling)."""
        if s == self.s:
            return self.terms
        k = s - self.s
        ring = self.ring
        return {i: ring.mul_pi(u, k) for i, u in self.terms.items()}

    # -- ring structure -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            return self + TruncSeries.const(self.ring, self.m, self.n, other)
        self._check(other)
        s = max(self.s, other.s)
        n = min(self.n, other.n)
        a, b = self._shifted(s), other._shifted(s)
        ring = self.ring
        out = dict(a)
        for i, u in b.items():
            out[i] = ring.add(out[i], u) if i in out else u
        return TruncSeries(ring, self.m, n, out, s)

    __radd__ = __add__

    def __neg__(self):
        ring = self.ring
        return TruncSeries(ring, self.m, self.n, {i: ring.neg(u) for i, u in self.terms.items()}, self.s)

    def __sub__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.const(self.ring, self.m, self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return self._mul_series(other)
        if isinstance(other, PadicScalar):
            return self.scale_scalar(other)
        return self.scale(Fraction(other))

    __rmul__ = __mul__

    def _mul_series(self, other):
        self._check(other)
        ring = self.ring
        n = min(self.n + other.order(), other.n + self.order())
        s = self.s + other.s
        N = n + s
        out = {}
        b_items = sorted(other.terms.items(), key=lambda t: _deg(t[0]))
        if ring.e == 1:
            for i, u in self.terms.items():
                di = _deg(i)
                for j, w in b_items:
                    if di + _deg(j) >= N:
                        break
                    k = tuple(x + y for x, y in zip(i, j))
                    out[k] = out.get(k, 0) + u * w
        else:
            for i, u in self.terms.items():
                di = _deg(i)
                for j, w in b_items:
                    if di + _deg(j) >= N:
                        break
                    k = tuple(x + y for x, y in zip(i, j))
                    p = ring.mul(u, w)
                    out[k] = ring.add(out[k], p) if k in out else p
        return TruncSeries(ring, self.m, n, out, s)

    def scale(self, q):
        """Multiply by an exact rational."""
        q = Fraction(q)
        ring = self.ring
        if q == 0:
            return TruncSeries.zero(ring, self.m, self.n)
        c = PadicScalar.from_fraction(ring, q, prec=INF)
        return self._scale_exact(c.val, _exact_unit(ring, q, c.val, self.N + max(0, -c.val) + 1))

    def _scale_exact(self, v, unit):
        # multiply by pi^v * unit where unit is known to full depth
        ring = self.ring
        n = self.n + v
        s = self.s - v if self.s - v >= 0 else 0
        lift = v - self.s + s  # power of pi applied to U after changing the shift
        out = {i: ring.mul_pi(ring.mul(u, unit), lift) for i, u in self.terms.items()}
        return TruncSeries(ring, self.m, n, out, s)

    def scale_scalar(self, c: PadicScalar):
        ring = self.ring
        if c.ring != ring:
            raise VarMismatch("scalar over a different ring")
        if c.val == INF:
            return TruncSeries.zero(ring, self.m, min(self.n + c.prec, c.prec + self.order()))
        n = min(self.n + c.val, c.prec + self.order())
        out = self._scale_exact(c.val, c.unit)
        return out.with_order(n)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = TruncSeries.one(self.ring, self.m, self.n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self):
        ring = self.ring
        c0 = self.constant()
        if c0.val != 0:
            raise NonUnit("constant term is not a unit")
        f = self * c0.inverse() if c0.prec != INF else self
        c0inv = c0.inverse()
        h = f - 1
        if h.order() < 1:
            raise NonUnit("series is not a unit of the Gauss-ball ring")
        n = self.n
        out = TruncSeries.one(ring, self.m, n)
        term = TruncSeries.one(ring, self.m, n)
        k = 0
        while True:
            term = -(term * h)
            if term.is_zero() or term.order() >= n:
                break
            out = out + term
            k += 1
        return (out * c0inv).with_order(min(out.n, self.n))

    def equals(self, other) -> bool:
        """Certified equality: agree on all digits known on both sides."""
        return (self - other).is_zero()

    # -- calculus -----------------------------------------------------------
    def deriv(self, j: int):
        ring = self.ring
        out = {}
        for i, u in self.terms.items():
            if i[j]:
                k = list(i)
                k[j] -= 1
                out[tuple(k)] = ring.scale(u, i[j])
        return TruncSeries(ring, self.m, self.n - 1, out, self.s)

    def integrate(self, j: int):
        """Formal antiderivative in x_j vanishing on x_j = 0."""
        ring = self.ring
        e = ring.e
        ell = ring.ell
        # the shift absorbs the worst l-power among the stored terms; the
        # unknown tail loses what _integration_order says
        N = self.N
        extra = e * max([vl(i[j] + 1, ell) for i in self.terms] + [0])
        s = self.s + extra
        out = {}
        for i, u in self.terms.items():
            k = list(i)
            k[j] += 1
            a = i[j] + 1
            va = vl(a, ell)
            unit = _exact_unit(ring, Fraction(1, a), -e * va, N + s + 1)
            out[tuple(k)] = ring.mul_pi(ring.mul(u, unit), extra - e * va)
        n = _integration_order(N, ell, e) - self.s
        return TruncSeries(ring, self.m, n, out, s)

    def set_zero(self, j: int):
        """Restrict to x_j = 0."""
        return TruncSeries(self.ring, self.m, self.n,
                           {i: u for i, u in self.terms.items() if i[j] == 0}, self.s)

    def substitute(self, psi):
        """f(psi_1, ..., psi_m); psi maps m into m."""
        comps = list(psi.components if hasattr(psi, "components") else psi)
        if len(comps) != self.m:
            raise VarMismatch("substitution needs one series per variable")
        ring = self.ring
        for p in comps:
            if p.ring != ring or p.m != comps[0].m:
                raise VarMismatch("substitution over a different ring")
            if p.order() < 1:
                raise NotContracting("a component does not map the maximal ideal into itself")
        m2 = comps[0].m
        n_psi = min(p.n for p in comps)
        lin = self.N
        for i, u in self.terms.items():
            if any(i):
                lin = min(lin, ring.val(u) + _deg(i))
        n = min(self.n, n_psi + lin - self.s - 1)
        cap = n + self.s
        powers = {(0,) * self.m: TruncSeries.one(ring, m2, cap)}

        def power(i):
            if i in powers:
                return powers[i]
            j = next(k for k, x in enumerate(i) if x)
            prev = list(i)
            prev[j] -= 1
            val = (power(tuple(prev)) * comps[j]).with_order(cap)
            powers[i] = val
            return val

        out = TruncSeries.zero(ring, m2, n)
        for i in sorted(self.terms, key=lambda t: (_deg(t), t)):
            u = self.terms[i]
            k = ring.val(u)
            v = k - self.s
            unit = ring.div_pi(u, k, self.N - _deg(i) - k)
            out = out + power(i).with_order(n - v)._scale_exact(v, unit)
        return out.with_order(n)

    def evaluate(self, point):
        """Value at a point of the open polydisk (coordinates in the maximal ideal)."""
        ring = self.ring
        if len(point) != self.m:
            raise VarMismatch("point has the wrong dimension")
        pts = [PadicScalar.coerce(ring, p) for p in point]
        for p in pts:
            if p.lower_val() < 1:
                raise NotContracting("point is not in the open unit polydisk")
        total = PadicScalar.zero(ring)
        for i in sorted(self.terms, key=lambda t: (_deg(t), t)):
            mono = PadicScalar.make(ring, -self.s, self.terms[i], INF)
            for p, k in zip(pts, i):
                if k:
                    mono = mono * p ** k
            total = total + mono
        # the unknown part lies in pi^-s m^(n+s) and evaluates into pi^n
        return total.with_prec(self.n)

    # -- norms and text -----------------------------------------------------
    def gauss_norm(self, a) -> "GaussNorm":
        return gauss_norm(self, a)

    def to_json(self):
        ring = self.ring
        items = []
        for i in sorted(self.terms, key=lambda t: (_deg(t), [-x for x in t])):
            c = self.coefficient(i)
            items.append({"exp": list(i), "w": str(c.w), "u": str(ring.unit_representative(c.unit))
                          if ring.e == 1 else ring.unit_representative(c.unit)})
        return {"ring": ring.to_json(), "m": self.m, "n": self.n, "terms": items}

    @classmethod
    def from_json(cls, obj, ring=None):
        from .padic_core import ValidationError
        try:
            ring = ring or RingSpec.from_json(obj["ring"])
            m, n = int(obj["m"]), int(obj["n"])
            coeffs = {}
            for t in obj.get("terms", []):
                w = Fraction(t["w"]) * ring.e
                if w.denominator != 1:
                    raise ValidationError("valuation not in (1/e)Z")
                u = t["u"]
                unit = tuple(int(x) for x in u) if isinstance(u, list) else ring.elem(int(u))
                coeffs[tuple(t["exp"])] = (int(w), unit)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad series JSON: {exc}") from None
        s = max([0] + [-w for w, _ in coeffs.values()])
        terms = {exp: ring.mul_pi(u, w + s) for exp, (w, u) in coeffs.items()}
        for exp in terms:
            if len(exp) != m:
                raise VarMismatch("exponent length differs from m")
        return cls(ring, m, n, terms, s)


def _clean(ring, terms, N):
    out = {}
    if ring.e == 1:
        for i, u in terms.items():
            r = N - _deg(i)
            if r <= 0:
                continue
            u %= ring.pow_ell(r)
            if u:
                out[i] = u
        return out
    for i, u in terms.items():
        r = N - _deg(i)
        if r <= 0:
            continue
        u = ring.reduce(u, r)
        if not ring.is_zero(u):
            out[i] = u
    return out


def _exact_unit(ring, q, v, K):
    """Unit u with q = pi^v u, to depth K (v = e * v_l(q))."""
    q = Fraction(q)
    a = v // ring.e
    num = q.numerator // ring.pow_ell(max(a, 0))
    den = q.denominator // ring.pow_ell(max(-a, 0))
    mod = ring.pow_ell(ceil_div(max(K, 1), ring.e))
    return ring.reduce(ring.mul(ring.elem(num * pow(den, -1, mod)), ring.ell_unit_power(a, K)), K)


def _exact_terms(ring, coeffs, s, N, m):
    terms = {}
    for exp, c in coeffs.items():
        exp = tuple(int(x) for x in exp)
        r = N - _deg(exp)
        if r <= 0:
            continue
        if isinstance(c, PadicScalar):
            if c.val == INF:
                continue
            terms[exp] = ring.mul_pi(c.unit, c.val + s)
            continue
        q = Fraction(c)
        if q == 0:
            continue
        v = ring.e * (vl(q.numerator, ring.ell) - vl(q.denominator, ring.ell))
        terms[exp] = ring.mul_pi(_exact_unit(ring, q, v, r + s + max(0, -v)), v + s)
    return terms


def _integration_order(N, ell, e):
    """Lowest order of x_j-antiderivatives of elements of m^N (pi-adic units).

    Degrees D <= N give N + 1 - e*floor(log_l(N+1)); beyond N the block
    minima sit at D + 1 = l^r and equal l^r - e*r.
    """
    best = N + 1 - e * _floor_log(N + 1, ell)
    r = _floor_log(N + 1, ell) + 1
    while True:
        val = ell ** r - e * r
        best = min(best, val)
        if ell ** r * (ell - 1) >= e and val >= best:
            break
        r += 1
    return best


def _floor_log(x, ell):
    k = 0
    while ell ** (k + 1) <= x:
        k += 1
    return k


# ---------------------------------------------------------------------------
# Gauss norms

@dataclass(frozen=True)
class GaussNorm:
    log_norm: object
    radius_exponent: Fraction
    tail_bound: object = None

    @property
    def certified(self):
        """Log norm valid for the analytic function, when the tail is controlled."""
        if self.tail_bound is None:
            return None
        return min(self.log_norm, self.tail_bound)


def gauss_norm(f: TruncSeries, a) -> GaussNorm:
    a = Fraction(a)
    ring = f.ring
    if not 0 < a <= Fraction(1, ring.e):
        from .padic_core import ValidationError
        raise ValidationError("radius exponent must lie in (0, 1/e]", a=str(a))
    best = INF
    for i, u in f.terms.items():
        best = min(best, Fraction(ring.val(u) - f.s, ring.e) + a * _deg(i))
    tail = None
    if f.s == 0:
        tail = a * f.n
    return GaussNorm(best, a, tail)


# ---------------------------------------------------------------------------
# vector fields and forms

class VectorField:
    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ShapeMismatch("empty vector field")
        m = comps[0].m
        if len(comps) != m or any(c.m != m or c.ring != comps[0].ring for c in comps):
            raise ShapeMismatch("vector field needs m components in m variables")
        self.components = comps

    @property
    def ring(self):
        return self.components[0].ring

    @property
    def m(self):
        return len(self.components)

    @property
    def n(self):
        return min(c.n for c in self.components)

    @classmethod
    def zero(cls, ring, m, n):
        return cls([TruncSeries.zero(ring, m, n)] * m)

    def apply(self, f: TruncSeries) -> TruncSeries:
        """The derivation sum_i X_i d f / d x_i."""
        out = None
        for i, X in enumerate(self.components):
            term = X * f.deriv(i)
            out = term if out is None else out + term
        return out

    def __add__(self, other):
        return VectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return VectorField([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorField([-a for a in self.components])

    def scale(self, c):
        return VectorField([a * c for a in self.components])

    def equals(self, other) -> bool:
        return all(a.equals(b) for a, b in zip(self.components, other.components))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def order(self):
        return min(c.order() for c in self.components)

    def to_json(self):
        base = self.components[0].to_json()
        return {"ring": base["ring"], "m": self.m, "n": self.n, "kind": "field",
                "components": {f"e{i + 1}": c.to_json()["terms"] for i, c in enumerate(self.components)}}


class DiffForm:
    """Differential form of degree 0, 1 or 2.

    Degree 1 stores the list of dx_j coefficients; degree 2 a dict
    {(i, j): coefficient of dx_i ^ dx_j} with i < j.
    """
    __slots__ = ("degree", "m", "ring", "components")

    def __init__(self, degree, ring, m, components):
        self.degree = degree
        self.ring = ring
        self.m = m
        if degree == 0:
            self.components = components
        elif degree == 1:
            self.components = tuple(components)
            if len(self.components) != m:
                raise ShapeMismatch("1-form needs m components")
        elif degree == 2:
            comps = dict(components)
            for (i, j) in comps:
                if not 0 <= i < j < m:
                    raise ShapeMismatch("2-form indices must satisfy i < j")
            self.components = comps
        else:
            raise DegreeTooHigh("forms of degree > 2 are internal only")

    @property
    def n(self):
        if self.degree == 0:
            return self.components.n
        vals = list(self.components if self.degree == 1 else self.components.values())
        return min([c.n for c in vals] or [INF])

    @classmethod
    def two_form(cls, ring, m, n, entries=None):
        comps = {}
        for i, j in combinations(range(m), 2):
            comps[(i, j)] = TruncSeries.zero(ring, m, n)
        for k, v in (entries or {}).items():
            comps[k] = v
        return cls(2, ring, m, comps)

    def g(self, i, j):
        """Antisymmetric coefficient matrix entry of a 2-form."""
        if i == j:
            return None
        if i < j:
            return self.components[(i, j)]
        return -self.components[(j, i)]

    def _pairs(self):
        return list(self.components.items()) if self.degree == 2 else list(enumerate(self.components))

    def __add__(self, other):
        self._same(other)
        if self.degree == 0:
            return DiffForm(0, self.ring, self.m, self.components + other.components)
        if self.degree == 1:
            return DiffForm(1, self.ring, self.m, [a + b for a, b in zip(self.components, other.components)])
        keys = set(self.components) | set(other.components)
        out = {}
        for k in keys:
            a, b = self.components.get(k), other.components.get(k)
            out[k] = a + b if a is not None and b is not None else (a if b is None else b)
        return DiffForm(2, self.ring, self.m, out)

    def __neg__(self):
        if self.degree == 0:
            return DiffForm(0, self.ring, self.m, -self.components)
        if self.degree == 1:
            return DiffForm(1, self.ring, self.m, [-a for a in self.components])
        return DiffForm(2, self.ring, self.m, {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if self.degree == 0:
            return DiffForm(0, self.ring, self.m, self.components * c)
        if self.degree == 1:
            return DiffForm(1, self.ring, self.m, [a * c for a in self.components])
        return DiffForm(2, self.ring, self.m, {k: v * c for k, v in self.components.items()})

    def _same(self, other):
        if not isinstance(other, DiffForm) or other.degree != self.degree or other.m != self.m \
                or other.ring != self.ring:
            raise VarMismatch("forms of different shape")

    def is_zero(self) -> bool:
        if self.degree == 0:
            return self.components.is_zero()
        vals = self.components if self.degree == 1 else self.components.values()
        return all(c.is_zero() for c in vals)

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    def to_json(self):
        ring = self.ring
        out = {"ring": ring.to_json(), "m": self.m, "n": self.n, "degree": self.degree}
        if self.degree == 0:
            out["components"] = {"f": self.components.to_json()["terms"]}
        elif self.degree == 1:
            out["components"] = {f"d{j + 1}": c.to_json()["terms"] for j, c in enumerate(self.components)}
        else:
            out["components"] = {f"d{i + 1}{j + 1}": c.to_json()["terms"]
                                 for (i, j), c in sorted(self.components.items())}
        return out

    @classmethod
    def from_json(cls, obj):
        from .padic_core import ValidationError
        try:
            ring = RingSpec.from_json(obj["ring"])
            m, n, degree = int(obj["m"]), int(obj["n"]), int(obj["degree"])
            comps = obj["components"]

            def series(label):
                terms = comps.get(label, [])
                return TruncSeries.from_json({"ring": obj["ring"], "m": m, "n": n, "terms": terms}, ring)

            if degree == 0:
                return cls(0, ring, m, series("f"))
            if degree == 1:
                return cls(1, ring, m, [series(f"d{j + 1}") for j in range(m)])
            if degree == 2:
                for label in comps:
                    i, j = int(label[1]) - 1, int(label[2]) - 1
                    if len(label) != 3 or not 0 <= i < j < m:
                        raise ValidationError(f"bad 2-form label {label}")
                return cls(2, ring, m, {(i, j): series(f"d{i + 1}{j + 1}")
                                        for i, j in combinations(range(m), 2)})
        except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
            raise ValidationError(f"bad form JSON: {exc}") from None
        raise DegreeTooHigh("forms of degree > 2 are internal only")


# ---------------------------------------------------------------------------
# exterior calculus

def exterior_d(x):
    if isinstance(x, TruncSeries):
        return DiffForm(1, x.ring, x.m, [x.deriv(j) for j in range(x.m)])
    if x.degree == 0:
        return exterior_d(x.components)
    if x.degree == 1:
        comps = {}
        for i, j in combinations(range(x.m), 2):
            comps[(i, j)] = x.components[j].deriv(i) - x.components[i].deriv(j)
        return DiffForm(2, x.ring, x.m, comps)
    raise DegreeTooHigh("d of a 2-form is only available through closedness_residual")


def closedness_residual(omega: DiffForm):
    """Components of d(omega) for a 2-form: {(i,j,k): series} with i<j<k."""
    if omega.degree != 2:
        raise DegreeTooHigh("closedness_residual expects a 2-form")
    out = {}
    for i, j, k in combinations(range(omega.m), 3):
        out[(i, j, k)] = (omega.components[(j, k)].deriv(i) - omega.components[(i, k)].deriv(j)
                          + omega.components[(i, j)].deriv(k))
    return out


def is_closed(form: DiffForm) -> bool:
    if form.degree == 1:
        return exterior_d(form).is_zero()
    if form.degree == 2:
        return all(v.is_zero() for v in closedness_residual(form).values())
    return exterior_d(form).is_zero()


def dlog(f: TruncSeries) -> DiffForm:
    inv = f.inverse()
    return DiffForm(1, f.ring, f.m, [inv * c for c in exterior_d(f).components])


def wedge(alpha: DiffForm, beta: DiffForm) -> DiffForm:
    if alpha.degree != 1 or beta.degree != 1:
        raise DegreeTooHigh("wedge is defined on 1-forms")
    alpha._same(beta)
    comps = {}
    for i, j in combinations(range(alpha.m), 2):
        comps[(i, j)] = alpha.components[i] * beta.components[j] - alpha.components[j] * beta.components[i]
    return DiffForm(2, alpha.ring, alpha.m, comps)


def contract(X: VectorField, omega: DiffForm) -> DiffForm:
    if X.m != omega.m or X.ring != omega.ring:
        raise ShapeMismatch("field and form have different shapes")
    if omega.degree == 1:
        total = None
        for Xi, a in zip(X.components, omega.components):
            t = Xi * a
            total = t if total is None else total + t
        return DiffForm(0, omega.ring, omega.m, total)
    if omega.degree == 2:
        comps = []
        for j in range(omega.m):
            total = None
            for i in range(omega.m):
                if i == j:
                    continue
                t = X.components[i] * omega.g(i, j)
                total = t if total is None else total + t
            comps.append(total if total is not None else TruncSeries.zero(omega.ring, omega.m, X.n))
        return DiffForm(1, omega.ring, omega.m, comps)
    raise ShapeMismatch("cannot contract into a function")


def antiderivative(mu: DiffForm) -> TruncSeries:
    """F with dF = mu and F(0) = 0, integrating the last variable first."""
    if mu.degree != 1:
        raise DegreeTooHigh("antiderivative expects a 1-form")
    m = mu.m
    for i, j in combinations(range(m), 2):
        r = mu.components[j].deriv(i) - mu.components[i].deriv(j)
        if not r.is_zero():
            raise NotClosed("1-form is not closed", pair=[i + 1, j + 1], residual=r.to_json())
    total = None
    for k in range(m - 1, -1, -1):
        c = mu.components[k]
        for later in range(k + 1, m):
            c = c.set_zero(later)
        piece = c.integrate(k)
        total = piece if total is None else total + piece
    return total

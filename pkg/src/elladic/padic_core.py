"""Scalars in O_E and E at finite precision, and the valuation estimates
used for every tail bound in the package.

O_E = Z_l[pi]/(Eisenstein polynomial).  Elements of O are plain ints when
e = 1 and coefficient tuples in the basis 1, pi, ..., pi^(e-1) otherwise.
Valuations inside the code are counted in powers of pi; the public
``w``/``error_exponent`` attributes convert to v_l units (divide by e).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import BadExponent, NonUnit, NoRoot, PrecisionExhausted, ValidationError

INF = math.inf


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def vl(n: int, ell: int):
    """l-adic valuation of an integer (INF for 0)."""
    if n == 0:
        return INF
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


def vl_fraction(q, ell: int):
    q = Fraction(q)
    if q == 0:
        return INF
    return vl(q.numerator, ell) - vl(q.denominator, ell)


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# ---------------------------------------------------------------------------
# combinatorial estimates

def digit_stats(ell: int, a: int) -> tuple[int, int]:
    """Base-ell digit sum and digit count of a (both 0 for a = 0)."""
    if a < 0:
        raise ValidationError("digit_stats needs a >= 0", a=a)
    s = d = 0
    while a:
        a, r = divmod(a, ell)
        s += r
        d += 1
    return s, d


def factorial_valuation(ell: int, a: int) -> int:
    s, _ = digit_stats(ell, a)
    return (a - s) // (ell - 1)


def multinomial_valuation_exact(ell: int, a_vec) -> int:
    n = len(a_vec) - 1
    if n < 0:
        raise ValidationError("empty multi-index")
    return sum(factorial_valuation(ell, x) for x in a_vec) - factorial_valuation(ell, sum(a_vec) + n)


def multinomial_valuation_bound(ell: int, a_vec) -> Fraction:
    """Lower bound -v(n!) - (n+1) d_l(|a|+n) for v_l(a_0!...a_n!/(|a|+n)!)."""
    n = len(a_vec) - 1
    if n < 0:
        raise ValidationError("empty multi-index")
    _, d = digit_stats(ell, sum(a_vec) + n)
    return Fraction(-factorial_valuation(ell, n) - (n + 1) * d)


def cap_N(ell: int, c, f) -> tuple[Fraction, int]:
    """sup over x >= 1 of c*d_l(x) - f*x, with the maximising x.

    On a block l^i <= x < l^(i+1) the digit count is constant, so only block
    starts matter.  Past the first l^j with c(j+2) < f l^j the block maxima
    decrease, so the search stops there.
    """
    c, f = Fraction(c), Fraction(f)
    if c <= 0 or f <= 0:
        raise ValidationError("cap_N needs c, f > 0")
    j = 0
    while not c * (j + 2) < f * ell ** j:
        j += 1
    best, arg = None, None
    for i in range(j + 1):
        val = c * (i + 1) - f * ell ** i
        if best is None or val > best:
            best, arg = val, ell ** i
    return best, arg


# ---------------------------------------------------------------------------
# the coefficient ring

@dataclass(frozen=True)
class RingSpec:
    ell: int
    P: int = 12
    e: int = 1
    eisenstein: tuple = ()

    def __post_init__(self):
        if not isinstance(self.ell, int) or self.ell == 2 or not is_prime(self.ell):
            raise ValidationError("ell must be an odd prime", ell=self.ell)
        if self.e < 1 or self.P < 1:
            raise ValidationError("e and P must be positive", e=self.e, P=self.P)
        coeffs = tuple(int(c) for c in self.eisenstein) or ((-self.ell,) if self.e == 1 else ())
        if len(coeffs) != self.e:
            raise ValidationError("need e Eisenstein coefficients c_0..c_{e-1}", e=self.e)
        if any(c % self.ell for c in coeffs) or coeffs[0] % (self.ell ** 2) == 0:
            raise ValidationError("polynomial is not Eisenstein", coeffs=list(coeffs))
        if self.e == 1 and coeffs[0] != -self.ell:
            raise ValidationError("for e = 1 the uniformizer is ell itself")
        object.__setattr__(self, "eisenstein", coeffs)

    # -- JSON ---------------------------------------------------------------
    def to_json(self):
        out = {"ell": self.ell, "e": self.e, "P": self.P}
        if self.e > 1:
            out["eisenstein"] = list(self.eisenstein)
        return out

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(int(obj["ell"]), int(obj.get("P", 12)), int(obj.get("e", 1)),
                       tuple(obj.get("eisenstein", ())))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad ring spec: {exc}") from None

    def with_precision(self, P):
        return RingSpec(self.ell, P, self.e, self.eisenstein if self.e > 1 else ())

    # -- elements of O --------------------------------------------------------
    def pow_ell(self, k: int) -> int:
        return _pow(self.ell, k)

    @property
    def zero(self):
        return 0 if self.e == 1 else (0,) * self.e

    @property
    def one(self):
        return self.elem(1)

    def elem(self, n: int):
        """The integer n as an element of O (no valuation bookkeeping)."""
        return int(n) if self.e == 1 else (int(n),) + (0,) * (self.e - 1)

    def add(self, a, b):
        if self.e == 1:
            return a + b
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        if self.e == 1:
            return a - b
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return -a if self.e == 1 else tuple(-x for x in a)

    def scale(self, a, n: int):
        return a * n if self.e == 1 else tuple(x * n for x in a)

    def mul(self, a, b):
        if self.e == 1:
            return a * b
        e = self.e
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        c = self.eisenstein
        for k in range(2 * e - 2, e - 1, -1):
            t = prod[k]
            if t:
                prod[k] = 0
                for j in range(e):
                    prod[k - e + j] -= t * c[j]
        return tuple(prod[:e])

    def reduce(self, a, K):
        """Canonical representative of a modulo pi^K."""
        if self.e == 1:
            return 0 if K <= 0 else a % _pow(self.ell, K)
        if K <= 0:
            return self.zero
        e = self.e
        return tuple(x % _pow(self.ell, ceil_div(K - j, e)) if K - j > 0 else 0
                     for j, x in enumerate(a))

    def val(self, a):
        """pi-adic valuation of an exact element (INF for 0)."""
        if self.e == 1:
            return vl(a, self.ell)
        e = self.e
        return min((e * vl(x, self.ell) + j for j, x in enumerate(a) if x), default=INF)

    def is_zero(self, a) -> bool:
        return a == 0 if self.e == 1 else not any(a)

    def residue(self, a) -> int:
        return (a if self.e == 1 else a[0]) % self.ell

    def pi_power(self, k: int):
        if self.e == 1:
            return _pow(self.ell, k)
        return _pi_power(self, k)

    def mul_pi(self, a, k: int):
        if k == 0:
            return a
        if self.e == 1:
            return a * _pow(self.ell, k)
        return self.mul(a, self.pi_power(k))

    def div_pi(self, a, k: int, K: int):
        """a / pi^k modulo pi^K; a must be divisible by pi^k."""
        if k == 0:
            return self.reduce(a, K)
        if self.e == 1:
            q, r = divmod(a, _pow(self.ell, k))
            if r:
                raise ValidationError("inexact division by the uniformizer")
            return q % _pow(self.ell, K) if K > 0 else 0
        # work e extra digits deep so the ell/pi factors stay exact mod pi^K
        work = K + k + self.e
        a = self.reduce(a, work)
        for step in range(k):
            if a[0] % self.ell:
                raise ValidationError("inexact division by the uniformizer")
            head = self.mul(self.elem(a[0] // self.ell), _ell_over_pi(self, work))
            a = self.reduce(self.add(tuple(a[1:]) + (0,), head), work - step - 1)
        return self.reduce(a, K)

    def inv(self, a, K: int):
        """Inverse of a unit modulo pi^K."""
        if self.residue(a) == 0:
            raise NonUnit("element is not a unit")
        if K <= 0:
            return self.zero
        if self.e == 1:
            return pow(a, -1, _pow(self.ell, K))
        x = self.elem(pow(self.residue(a), -1, self.ell))
        prec = 1
        while prec < K:
            prec = min(2 * prec, K)
            ax = self.reduce(self.mul(a, x), prec)
            x = self.reduce(self.mul(x, self.sub(self.elem(2), ax)), prec)
        return x

    def ell_unit_power(self, k: int, K: int):
        """(ell / pi^e)^k modulo pi^K, a unit of O."""
        if self.e == 1:
            return 1
        u = _ell_unit(self, K)
        if k < 0:
            u = self.inv(u, K)
            k = -k
        out = self.one
        for _ in range(k):
            out = self.reduce(self.mul(out, u), K)
        return out

    def unit_representative(self, a) -> object:
        """JSON-friendly form of an O element."""
        return a if self.e == 1 else list(a)


@lru_cache(maxsize=None)
def _pow(ell, k):
    return ell ** k


@lru_cache(maxsize=None)
def _pi_power(ring, k):
    out = ring.one
    pi = (0, 1) + (0,) * (ring.e - 2)
    for _ in range(k):
        out = ring.mul(out, pi)
    return out


@lru_cache(maxsize=None)
def _unit_U(ring, K):
    # pi^e = -ell * U with U = sum (c_j / ell) pi^j
    return ring.reduce(tuple(c // ring.ell for c in ring.eisenstein), K)


@lru_cache(maxsize=None)
def _ell_unit(ring, K):
    # ell / pi^e = -U^{-1}
    return ring.reduce(ring.neg(ring.inv(_unit_U(ring, K), K)), K)


@lru_cache(maxsize=None)
def _ell_over_pi(ring, K):
    return ring.reduce(ring.mul_pi(_ell_unit(ring, K + ring.e), ring.e - 1), K)


# ---------------------------------------------------------------------------
# scalars

@dataclass(frozen=True)
class ExactRational:
    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator == 0:
            raise ValidationError("zero denominator")
        q = Fraction(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", q.numerator)
        object.__setattr__(self, "denominator", q.denominator)

    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


@dataclass(frozen=True)
class PadicScalar:
    """pi^val * unit, known modulo pi^prec (val, prec in pi-adic units).

    A certified zero has val = INF; its prec says how much is known.
    Relative precision never exceeds ring.P.
    """
    ring: RingSpec
    val: object
    unit: object
    prec: object

    # -- construction -------------------------------------------------------
    @staticmethod
    def make(ring: RingSpec, v, x, prec):
        """Normalize pi^v * x (x any element of O) known modulo pi^prec."""
        if v == INF:
            return PadicScalar(ring, INF, ring.zero, prec)
        if prec != INF:
            x = ring.reduce(x, prec - v)
        k = ring.val(x)
        if k == INF:
            return PadicScalar(ring, INF, ring.zero, prec)
        v += k
        prec = min(prec, v + ring.P)
        unit = ring.div_pi(x, k, prec - v)
        return PadicScalar(ring, v, unit, prec)

    @classmethod
    def zero(cls, ring: RingSpec, prec=INF):
        return cls(ring, INF, ring.zero, prec)

    @classmethod
    def from_int(cls, ring: RingSpec, n: int, prec=INF):
        return cls.from_fraction(ring, Fraction(n), prec)

    @classmethod
    def from_fraction(cls, ring: RingSpec, q, prec=INF):
        q = Fraction(q)
        if q == 0:
            return cls.zero(ring, prec)
        a = vl_fraction(q, ring.ell)
        num = q.numerator // ring.pow_ell(max(a, 0))
        den = q.denominator // ring.pow_ell(max(-a, 0))
        v = ring.e * a
        rel = ring.P if prec == INF else min(prec - v, ring.P)
        if rel <= 0:
            return cls.zero(ring, prec)
        unit = ring.mul(ring.elem(num * pow(den, -1, ring.pow_ell(ceil_div(rel, ring.e)))),
                        ring.ell_unit_power(a, rel))
        return cls.make(ring, v, ring.reduce(unit, rel), v + rel)

    @classmethod
    def coerce(cls, ring, x):
        if isinstance(x, PadicScalar):
            if x.ring != ring:
                raise ValidationError("scalars over different rings")
            return x
        if isinstance(x, ExactRational):
            x = x.fraction()
        return cls.from_fraction(ring, x)

    # -- views --------------------------------------------------------------
    @property
    def w(self):
        return INF if self.val == INF else Fraction(self.val, self.ring.e)

    @property
    def error_exponent(self):
        return INF if self.prec == INF else Fraction(self.prec, self.ring.e)

    def is_zero(self) -> bool:
        return self.val == INF

    def is_unit(self) -> bool:
        return self.val == 0

    def lower_val(self):
        """Lower bound for the valuation of the true value."""
        return self.prec if self.val == INF else self.val

    def residue_int(self) -> int:
        """Value modulo ell^prec as an integer (e = 1, integral values)."""
        ring = self.ring
        if ring.e != 1:
            raise ValidationError("residue_int needs e = 1")
        if self.val == INF:
            return 0
        if self.val < 0:
            raise ValidationError("value is not integral")
        return (self.unit * ring.pow_ell(self.val)) % ring.pow_ell(self.prec)

    def element(self, K):
        """The value as an element of O modulo pi^K (needs val >= 0)."""
        if self.val == INF:
            return self.ring.zero
        if self.val < 0:
            raise ValidationError("value is not integral")
        return self.ring.reduce(self.ring.mul_pi(self.unit, self.val), K)

    def with_prec(self, prec):
        if prec >= self.prec:
            return self
        if self.val == INF:
            return PadicScalar(self.ring, INF, self.ring.zero, prec)
        return PadicScalar.make(self.ring, self.val, self.unit, prec)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = PadicScalar.coerce(self.ring, other)
        ring = self.ring
        prec = min(self.prec, other.prec)
        if self.val == INF:
            return other.with_prec(prec) if other.val != INF else PadicScalar.zero(ring, prec)
        if other.val == INF:
            return self.with_prec(prec)
        v = min(self.val, other.val)
        if prec <= v:
            return PadicScalar.zero(ring, prec)
        x = ring.add(ring.mul_pi(self.unit, self.val - v), ring.mul_pi(other.unit, other.val - v))
        return PadicScalar.make(ring, v, x, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.val == INF:
            return self
        return PadicScalar(self.ring, self.val, self.ring.reduce(self.ring.neg(self.unit), self.prec - self.val),
                           self.prec)

    def __sub__(self, other):
        return self + (-PadicScalar.coerce(self.ring, other))

    def __rsub__(self, other):
        return PadicScalar.coerce(self.ring, other) - self

    def __mul__(self, other):
        other = PadicScalar.coerce(self.ring, other)
        ring = self.ring
        prec = min(self.prec + other.lower_val(), other.prec + self.lower_val())
        if self.val == INF or other.val == INF:
            return PadicScalar.zero(ring, prec)
        return PadicScalar.make(ring, self.val + other.val, ring.mul(self.unit, other.unit), prec)

    __rmul__ = __mul__

    def inverse(self):
        if self.val == INF:
            raise NonUnit("division by a (certified) zero")
        rel = self.prec - self.val
        return PadicScalar(self.ring, -self.val, self.ring.inv(self.unit, rel), rel - self.val)

    def __truediv__(self, other):
        return self * PadicScalar.coerce(self.ring, other).inverse()

    def __rtruediv__(self, other):
        return PadicScalar.coerce(self.ring, other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = PadicScalar.from_int(self.ring, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def agrees(self, other) -> bool:
        """Equal in all digits certified on both sides."""
        return (self - PadicScalar.coerce(self.ring, other)).is_zero()

    # -- text form ----------------------------------------------------------
    def __str__(self):
        w = "inf" if self.val == INF else str(Fraction(self.val, self.ring.e))
        unit = self.unit if self.ring.e == 1 else "[" + ",".join(str(x) for x in self.unit) + "]"
        prec = "inf" if self.prec == INF else str(self.prec)
        return f"w:{w} u:{unit} mod l^{prec}"

    __repr__ = __str__

    @classmethod
    def parse(cls, ring: RingSpec, text: str):
        m = _SCALAR_RE.fullmatch(text.strip())
        if not m:
            raise ValidationError("bad scalar string", text=text)
        w, u, p = m.group(1), m.group(2), m.group(3)
        prec = INF if p == "inf" else int(p)
        if w == "inf":
            return cls.zero(ring, prec)
        v = Fraction(w) * ring.e
        if v.denominator != 1:
            raise ValidationError("valuation not in (1/e)Z", text=text)
        if u.startswith("["):
            x = tuple(int(t) for t in u[1:-1].split(","))
            if len(x) != ring.e:
                raise ValidationError("unit has wrong length", text=text)
        else:
            x = ring.elem(int(u))
        out = cls.make(ring, int(v), x, prec)
        if out.val != int(v) and prec != INF and prec > int(v):
            raise ValidationError("unit part is not a unit", text=text)
        return out


_SCALAR_RE = re.compile(r"w:(inf|-?\d+(?:/\d+)?)\s+u:(-?\d+|\[[-\d, ]+\])\s+mod\s+l\^(inf|-?\d+)")


def scalar(ring: RingSpec, x) -> PadicScalar:
    """Coerce ints, fractions, strings and scalars to a PadicScalar."""
    if isinstance(x, str):
        if x.startswith("w:"):
            return PadicScalar.parse(ring, x)
        return PadicScalar.from_fraction(ring, Fraction(x))
    return PadicScalar.coerce(ring, x)


# ---------------------------------------------------------------------------
# roots of unity, logarithm, Hensel

def teichmuller(ring: RingSpec, u: int) -> PadicScalar:
    ell = ring.ell
    if u % ell == 0:
        raise NonUnit("Teichmuller lift of a non-unit residue")
    mod = ring.pow_ell(ceil_div(ring.P, ring.e))
    x = u % mod
    while True:
        y = pow(x, ell, mod)
        if y == x:
            break
        x = y
    return PadicScalar.make(ring, 0, ring.elem(x), ring.P)


def teichmuller_int(ell: int, u: int, k: int) -> int:
    """Teichmuller lift of u as an integer modulo ell^k."""
    mod = ell ** k
    x = u % mod
    while True:
        y = pow(x, ell, mod)
        if y == x:
            return x
        x = y


def _log_tail_start(ell, e, vz, target):
    """First K with k*vz - e*v_l(k) >= target for every k >= K, and the
    minimum of that quantity over k >= K."""
    # block minima l^i*vz - e*i increase once l^i (l-1) vz >= e
    i = 0
    while not (ell ** i * (ell - 1) * vz >= e and ell ** i * vz - e * i >= target):
        i += 1
    limit = ell ** (i + 1)
    last_bad = 0
    for k in range(1, limit + 1):
        if k * vz - e * vl(k, ell) < target:
            last_bad = k
    start = last_bad + 1
    tail = min(k * vz - e * vl(k, ell) for k in range(start, limit + 1))
    return start, tail


def padic_log(x: PadicScalar, digits=None) -> PadicScalar:
    """Iwasawa branch of log_l on units: Teichmuller factors map to 0.

    ``digits`` is the requested absolute precision in pi-adic units; by
    default it is the input precision.
    """
    ring = x.ring
    if x.val != 0:
        raise NonUnit("padic_log needs a unit")
    target = x.prec if digits is None else digits
    if target > x.prec:
        raise PrecisionExhausted("requested digits exceed the input precision",
                                 requested=target, available=x.prec)
    omega = teichmuller(ring, ring.residue(x.unit))
    z = x / omega - 1
    if z.is_zero():
        return PadicScalar.zero(ring, z.prec)
    start, tail = _log_tail_start(ring.ell, ring.e, z.val, target)
    total = PadicScalar.zero(ring)
    power = PadicScalar.from_int(ring, 1)
    for k in range(1, start):
        power = power * z
        term = power / k
        total = total + term if k % 2 else total - term
    total = total.with_prec(tail)
    if total.prec < target:
        raise PrecisionExhausted("tail bound does not certify the requested digits",
                                 requested=target, certified=total.prec)
    return total.with_prec(target)


def hensel_root(d: int, u: PadicScalar, target_residue: int) -> PadicScalar:
    """The d-th root of the unit u congruent to target_residue mod pi."""
    ring = u.ring
    if d <= 0 or d % ring.ell == 0:
        raise BadExponent("exponent must be positive and prime to ell", d=d)
    if u.val != 0:
        raise NonUnit("hensel_root needs a unit")
    r = target_residue % ring.ell
    if r == 0 or pow(r, d, ring.ell) != ring.residue(u.unit):
        raise NoRoot("target residue is not a root mod the maximal ideal", d=d, target=target_residue)
    K = u.prec
    a = ring.elem(r)
    known = 1
    while known < K:
        known = min(2 * known, K)
        ad1 = ring.one
        for _ in range(d - 1):
            ad1 = ring.reduce(ring.mul(ad1, a), known)
        fa = ring.sub(ring.mul(ad1, a), u.unit)
        step = ring.mul(fa, ring.inv(ring.scale(ad1, d), known))
        a = ring.reduce(ring.sub(a, step), known)
    return PadicScalar.make(ring, 0, a, K)

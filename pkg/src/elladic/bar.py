"""Bar-complex chains over Z/l^k for finite groups and matrix groups.

Chains are unnormalized: tuples containing the identity are kept.
"""

from __future__ import annotations

import itertools
import random
from collections import deque

from .errors import NotACocycle, NotACycle, NoSolution, NotABoundary, ShapeMismatch, TooLarge, ValidationError
from .modlinalg import Elimination
from .padic_core import PadicScalar, RingSpec, vl
from .regulator import as_matrix, det_mod, mat_identity, mat_inv_mod, mat_mul, mat_reduce

TUPLE_LIMIT = 10 ** 7


# ---------------------------------------------------------------------------
# groups

class FiniteGroup:
    """Group given by a multiplication table on 0..order-1 with identity 0."""

    def __init__(self, mul, labels=None, check=True):
        self.mul_table = tuple(tuple(int(x) for x in row) for row in mul)
        n = len(self.mul_table)
        if n == 0 or any(len(row) != n for row in self.mul_table):
            raise ShapeMismatch("multiplication table must be square")
        self.order = n
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        inv = [None] * n
        for a in range(n):
            for b in range(n):
                if self.mul_table[a][b] == 0:
                    inv[a] = b
                    break
        self.inverse_table = tuple(inv)
        self._cache = {}
        if check:
            self.check_axioms()

    identity = 0

    def check_axioms(self, samples=20000, seed=0):
        n, t = self.order, self.mul_table
        for row in t:
            if sorted(row) != list(range(n)):
                raise ValidationError("multiplication table is not a Latin square")
        for a in range(n):
            if t[0][a] != a or t[a][0] != a:
                raise ValidationError("index 0 is not the identity")
        if n <= 64:
            triples = itertools.product(range(n), repeat=3)
        else:
            rng = random.Random(seed)
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(samples))
        for a, b, c in triples:
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise ValidationError("multiplication is not associative", triple=[a, b, c])

    def op(self, a, b):
        return self.mul_table[a][b]

    def inverse(self, a):
        return self.inverse_table[a]

    def elements(self):
        return range(self.order)

    def index(self, label):
        return self.labels.index(str(label))

    def conj(self, h, g):
        return self.op(self.op(h, g), self.inverse(h))

    def is_abelian(self):
        t = self.mul_table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    # -- constructors ----------------------------------------------------------
    @classmethod
    def cyclic(cls, n):
        return cls([[(a + b) % n for b in range(n)] for a in range(n)])

    @classmethod
    def trivial(cls):
        return cls([[0]])

    @classmethod
    def product(cls, G, H):
        """Direct product; (g, h) has index g * |H| + h."""
        m = H.order

        def split(x):
            return divmod(x, m)

        table = []
        for x in range(G.order * m):
            g1, h1 = split(x)
            table.append([G.op(g1, g2) * m + H.op(h1, h2)
                          for g2 in range(G.order) for h2 in range(m)])
        labels = [f"({a},{b})" for a in G.labels for b in H.labels]
        return cls(table, labels)

    @classmethod
    def from_closure(cls, gens, op, identity):
        """Close a set of hashable generators under op (breadth first)."""
        elems = [identity]
        seen = {identity: 0}
        queue = deque([identity])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = op(x, g)
                if y not in seen:
                    seen[y] = len(elems)
                    elems.append(y)
                    queue.append(y)
            if len(elems) > 100000:
                raise TooLarge("generated group is too large")
        table = [[seen[op(x, y)] for y in elems] for x in elems]
        group = cls(table, [str(e) for e in elems], check=len(elems) <= 64)
        group.realization = tuple(elems)
        return group

    @classmethod
    def from_permutations(cls, perms):
        perms = [tuple(int(i) for i in p) for p in perms]
        if not perms:
            return cls.trivial()
        n = len(perms[0])
        for p in perms:
            if sorted(p) != list(range(n)):
                raise ValidationError("generator is not a permutation", perm=list(p))
        # (x*y)(i) = x(y(i)): right-to-left composition
        return cls.from_closure(perms, lambda x, y: tuple(x[y[i]] for i in range(n)), tuple(range(n)))

    @classmethod
    def symmetric(cls, n):
        if n < 2:
            return cls.trivial()
        gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
        return cls.from_permutations(gens)

    @classmethod
    def from_matrices(cls, mats, mod):
        mats = [mat_reduce(as_matrix(m), mod) for m in mats]
        d = len(mats[0])
        return cls.from_closure(mats, lambda x, y: mat_mul(x, y, mod), mat_identity(d))

    @classmethod
    def from_json(cls, obj):
        if "mul" in obj:
            group = cls(obj["mul"], obj.get("labels"))
            if "order" in obj and obj["order"] != group.order:
                raise ValidationError("declared order does not match the table")
            return group
        if "presentation" in obj:
            return _from_presentation(obj["presentation"])
        if "cyclic" in obj:
            return cls.cyclic(int(obj["cyclic"]))
        if "symmetric" in obj:
            return cls.symmetric(int(obj["symmetric"]))
        if "product" in obj:
            parts = [cls.from_json(p) for p in obj["product"]]
            out = parts[0]
            for p in parts[1:]:
                out = cls.product(out, p)
            return out
        raise ValidationError("unrecognized group description")

    def to_json(self):
        return {"order": self.order, "mul": [list(r) for r in self.mul_table], "labels": list(self.labels)}


def _from_presentation(pres):
    """Finite quotient of a presentation, given by permutation images of the
    generators.  Relators are words in 1..gens and -1..-gens; each must map
    to the identity permutation."""
    ngens = int(pres["gens"])
    qm = pres.get("quotient_map") or {}
    perms = [tuple(p) for p in qm.get("perms", [])]
    if len(perms) != ngens:
        raise ValidationError("quotient_map must give one permutation per generator")
    group = FiniteGroup.from_permutations(perms)
    real = {p: i for i, p in enumerate(group.realization)}
    gen_idx = [real[p] for p in perms]
    for rel in pres.get("rels", []):
        cur = 0
        for letter in rel:
            letter = int(letter)
            if letter == 0 or abs(letter) > ngens:
                raise ValidationError("bad letter in relator", letter=letter)
            g = gen_idx[abs(letter) - 1]
            cur = group.op(cur, g if letter > 0 else group.inverse(g))
        if cur != 0:
            raise ValidationError("relator does not hold in the quotient", relator=list(rel))
    group.generators = tuple(gen_idx)
    return group


class MatrixGroup:
    """GL_d(Z/l^P) acting through hashable tuple matrices."""

    def __init__(self, d, ell, P):
        self.d, self.ell, self.P = d, ell, P
        self.mod = ell ** P
        self.identity = mat_identity(d)

    def op(self, a, b):
        return mat_mul(a, b, self.mod)

    def inverse(self, a):
        return mat_inv_mod(a, self.mod)

    def conj(self, h, g):
        return self.op(self.op(h, g), self.inverse(h))

    def coerce(self, m):
        m = mat_reduce(as_matrix(m), self.mod)
        if len(m) != self.d:
            raise ShapeMismatch("matrix has the wrong size")
        if det_mod(m, self.ell) == 0:
            raise ValidationError("matrix is not invertible")
        return m

    def __eq__(self, other):
        return isinstance(other, MatrixGroup) and (self.d, self.ell, self.P) == (other.d, other.ell, other.P)

    def __hash__(self):
        return hash((self.d, self.ell, self.P))


# ---------------------------------------------------------------------------
# chains

class BarChain:
    """A Z/l^k combination of n-tuples of group elements."""

    __slots__ = ("group", "degree", "terms", "ell", "k")

    def __init__(self, group, degree, terms, ell, k):
        self.group, self.degree, self.ell, self.k = group, int(degree), int(ell), int(k)
        mod = self.ell ** self.k
        clean = {}
        for tup, c in terms.items():
            tup = tuple(tup)
            if len(tup) != self.degree:
                raise ShapeMismatch("tuple length differs from the chain degree", tuple=list(map(str, tup)))
            c = (clean.get(tup, 0) + int(c)) % mod
            if c:
                clean[tup] = c
            else:
                clean.pop(tup, None)
        self.terms = clean

    @property
    def mod(self):
        return self.ell ** self.k

    @classmethod
    def zero(cls, group, degree, ell, k):
        return cls(group, degree, {}, ell, k)

    @classmethod
    def basis(cls, group, tup, ell, k, coeff=1):
        return cls(group, len(tup), {tuple(tup): coeff}, ell, k)

    def _like(self, terms, degree=None):
        return BarChain(self.group, self.degree if degree is None else degree, terms, self.ell, self.k)

    def _check(self, other):
        if self.degree != other.degree or (self.ell, self.k) != (other.ell, other.k):
            raise ShapeMismatch("chains live in different groups of the complex")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, 0) + c
        return self._like(out)

    def __neg__(self):
        return self._like({t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a):
        return self._like({t: a * c for t, c in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return (isinstance(other, BarChain) and self.degree == other.degree
                and self.mod == other.mod and self.terms == other.terms)

    def __repr__(self):
        return f"BarChain(degree={self.degree}, mod={self.ell}^{self.k}, terms={len(self.terms)})"

    def to_json(self):
        def enc(x):
            return [list(r) for r in x] if isinstance(x, tuple) else x

        terms = [{"tuple": [enc(x) for x in t], "coeff": c} for t, c in sorted(self.terms.items())]
        return {"degree": self.degree, "mod": f"{self.ell}^{self.k}", "terms": terms}

    @classmethod
    def from_json(cls, obj, group):
        ell, k = parse_modulus(obj["mod"])
        terms = {}
        for item in obj["terms"]:
            tup = tuple(_decode_entry(group, x) for x in item["tuple"])
            terms[tup] = terms.get(tup, 0) + int(item["coeff"])
        return cls(group, obj["degree"], terms, ell, k)


def parse_modulus(text):
    text = str(text)
    if "^" in text:
        a, b = text.split("^")
        ell, k = int(a), int(b)
    else:
        n = int(text)
        ell = next(p for p in range(2, n + 1) if n % p == 0)
        k = vl(n, ell)
        if ell ** k != n:
            raise ValidationError("modulus must be a prime power", mod=text)
    if ell < 2 or k < 1:
        raise ValidationError("bad modulus", mod=text)
    return ell, k


def _decode_entry(group, x):
    if isinstance(group, MatrixGroup):
        return group.coerce(x)
    if isinstance(x, str):
        return group.index(x)
    x = int(x)
    if not 0 <= x < group.order:
        raise ValidationError("element index out of range", index=x)
    return x


def boundary(c: BarChain) -> BarChain:
    """Alternating-sum bar differential."""
    n = c.degree
    if n < 1:
        raise ShapeMismatch("boundary needs degree at least 1")
    op = c.group.op
    out = {}
    for t, a in c.terms.items():
        faces = [(t[1:], a)]
        for i in range(n - 1):
            faces.append((t[:i] + (op(t[i], t[i + 1]),) + t[i + 2:], a if (i + 1) % 2 == 0 else -a))
        faces.append((t[:-1], a if n % 2 == 0 else -a))
        for f, s in faces:
            out[f] = out.get(f, 0) + s
    return c._like(out, n - 1)


def inn(c: BarChain, h) -> BarChain:
    """Conjugate every entry by h."""
    g = c.group
    return c._like({tuple(g.conj(h, x) for x in t): a for t, a in c.terms.items()})


def homotopy_F(c: BarChain, h) -> BarChain:
    """F_h[g_1|..|g_n] = sum_r (-1)^r [g_1|..|g_r|h^-1|h g_{r+1} h^-1|..|h g_n h^-1]."""
    g = c.group
    hinv = g.inverse(h)
    out = {}
    for t, a in c.terms.items():
        conj = tuple(g.conj(h, x) for x in t)
        for r in range(len(t) + 1):
            key = t[:r] + (hinv,) + conj[r:]
            out[key] = out.get(key, 0) + (a if r % 2 == 0 else -a)
    return c._like(out, c.degree + 1)


def push(c: BarChain, f) -> BarChain:
    """Apply an element map to every entry."""
    return c._like({tuple(f(x) for x in t): a for t, a in c.terms.items()})


# ---------------------------------------------------------------------------
# linear algebra on the full complex of a finite group

def _encode(t, n):
    code = 0
    for x in t:
        code = code * n + x
    return code


def _decode(code, n, degree):
    out = []
    for _ in range(degree):
        code, r = divmod(code, n)
        out.append(r)
    return tuple(reversed(out))


def _guard(G, degree):
    if G.order ** degree > TUPLE_LIMIT:
        raise TooLarge("bar complex is too large", order=G.order, degree=degree)


def boundary_elimination(G: FiniteGroup, degree: int, ell: int, K: int) -> Elimination:
    """Eliminated matrix of the boundary from degree `degree` to degree-1."""
    key = ("elim", degree, ell, K)
    if key not in G._cache:
        _guard(G, degree)
        n = G.order
        cols = {}
        for code in range(n ** degree):
            t = _decode(code, n, degree)
            col = {}
            for f, a in boundary(BarChain(G, degree, {t: 1}, ell, K)).terms.items():
                col[_encode(f, n)] = a
            cols[code] = col
        G._cache[key] = Elimination(cols, ell, K)
    return G._cache[key]


def _require_finite(c):
    if not isinstance(c.group, FiniteGroup):
        raise ValidationError("linear solves need a chain over a finite group")


def solve_boundary(z: BarChain) -> BarChain:
    """Some d with boundary(d) = z, or NotABoundary."""
    _require_finite(z)
    if z.degree >= 1 and not boundary(z).is_zero():
        raise NotACycle("chain has nonzero boundary")
    G, n = z.group, z.group.order
    if z.is_zero():
        return BarChain.zero(G, z.degree + 1, z.ell, z.k)
    elim = boundary_elimination(G, z.degree + 1, z.ell, z.k)
    rhs = {_encode(t, n): a for t, a in z.terms.items()}
    try:
        x = elim.solve(rhs)
    except NoSolution as exc:
        raise NotABoundary("the class of the cycle is nonzero") from exc
    return BarChain(G, z.degree + 1, {_decode(c, n, z.degree + 1): a for c, a in x.items()}, z.ell, z.k)


def is_boundary(z: BarChain) -> bool:
    try:
        solve_boundary(z)
    except NotABoundary:
        return False
    return True


def cycle_basis(G: FiniteGroup, degree: int, ell: int, k: int):
    """Generators of the cycles of the given degree over Z/l^k."""
    elim = boundary_elimination(G, degree, ell, k)
    n = G.order
    return [BarChain(G, degree, {_decode(c, n, degree): a for c, a in x.items()}, ell, k)
            for x in elim.kernel()]


def homology_divisors(G: FiniteGroup, degree: int, ell: int, k: int):
    """Elementary divisors of H_degree(G; Z) tensored with Z/l^k.

    Integral homology in positive degree is killed by |G|, so pivots are
    computed modulo l^(v(|G|)+1), which separates true divisors from zero.
    """
    if degree < 1:
        raise ValidationError("degree must be positive")
    _guard(G, degree + 1)
    K = vl(G.order, ell) + 1
    if K == 1:
        return []
    vals = boundary_elimination(G, degree + 1, ell, K).pivot_valuations()
    return [ell ** min(v, k) for v in vals if v > 0]


# ---------------------------------------------------------------------------
# automorphisms and representations

def _spread(group, gens, images):
    """Spanning tree of the Cayley graph: y -> (x, image of g) with y = x g."""
    out = [None] * group.order
    out[0] = "identity"
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for g, im in zip(gens, images):
            y = group.op(x, g)
            if out[y] is None:
                out[y] = (x, im)
                queue.append(y)
    if any(v is None for v in out):
        raise ValidationError("generators do not generate the group")
    return out


class GroupAutomorphism:
    def __init__(self, group: FiniteGroup, perm):
        self.group = group
        self.perm = tuple(int(p) for p in perm)
        n = group.order
        if sorted(self.perm) != list(range(n)):
            raise ValidationError("automorphism is not a bijection")
        for a in range(n):
            for b in range(n):
                if self.perm[group.op(a, b)] != group.op(self.perm[a], self.perm[b]):
                    raise ValidationError("map is not multiplicative", pair=[a, b])

    @classmethod
    def identity(cls, group):
        return cls(group, range(group.order))

    @classmethod
    def inner(cls, group, delta):
        return cls(group, [group.conj(delta, x) for x in range(group.order)])

    @classmethod
    def from_generators(cls, group, gens, images):
        tree = _spread(group, gens, images)
        perm = [None] * group.order
        perm[0] = 0
        order = _bfs_order(group, gens)
        for y in order[1:]:
            x, im = tree[y]
            perm[y] = group.op(perm[x], im)
        return cls(group, perm)

    def __call__(self, x):
        return self.perm[x]

    def compose(self, other):
        """self after other."""
        return GroupAutomorphism(self.group, [self.perm[other.perm[x]] for x in range(self.group.order)])

    def apply(self, c: BarChain) -> BarChain:
        return push(c, self)

    def to_json(self):
        return {"perm": list(self.perm)}


def _bfs_order(group, gens):
    seen = [False] * group.order
    seen[0] = True
    order = [0]
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = group.op(x, g)
            if not seen[y]:
                seen[y] = True
                order.append(y)
                queue.append(y)
    return order


class MatrixRep:
    """rho: G -> GL_d(Z/l^P), stored per element and checked to be a homomorphism."""

    def __init__(self, group: FiniteGroup, images, ell, P, det_char=None):
        self.group, self.ell, self.P = group, int(ell), int(P)
        self.target = None
        mod = self.ell ** self.P
        imgs = [mat_reduce(as_matrix(m), mod) for m in images]
        if len(imgs) != group.order:
            raise ShapeMismatch("one image per group element is required")
        self.d = len(imgs[0])
        self.target = MatrixGroup(self.d, self.ell, self.P)
        self.images = tuple(imgs)
        if self.images[0] != mat_identity(self.d):
            raise ValidationError("identity must map to the identity matrix")
        for a in range(group.order):
            for b in range(group.order):
                if mat_mul(imgs[a], imgs[b], mod) != imgs[group.op(a, b)]:
                    raise ValidationError("images are not multiplicative", pair=[a, b])
        self.det_char = None
        if det_char is not None:
            dc = tuple(int(x) % mod for x in det_char)
            for a in range(group.order):
                if det_mod(imgs[a], mod) != dc[a]:
                    raise ValidationError("determinant character does not match", element=a)
            self.det_char = dc

    @classmethod
    def from_generators(cls, group, gens, images, ell, P, det_char=None):
        mod = ell ** P
        images = [mat_reduce(as_matrix(m), mod) for m in images]
        d = len(images[0])
        tree = _spread(group, gens, images)
        full = [None] * group.order
        full[0] = mat_identity(d)
        for y in _bfs_order(group, gens)[1:]:
            x, im = tree[y]
            full[y] = mat_mul(full[x], im, mod)
        return cls(group, full, ell, P, det_char)

    def __call__(self, g):
        return self.images[g]

    def determinants(self):
        mod = self.ell ** self.P
        return [det_mod(m, mod) for m in self.images]

    def to_json(self):
        return {"ell": self.ell, "P": self.P, "images": [[list(r) for r in m] for m in self.images]}


def map_chain(rho: MatrixRep, c: BarChain) -> BarChain:
    """Tuple-wise image of a chain under a representation."""
    return BarChain(rho.target, c.degree, {tuple(rho(x) for x in t): a for t, a in c.terms.items()},
                    c.ell, c.k) if c.terms else BarChain.zero(rho.target, c.degree, c.ell, c.k)


# ---------------------------------------------------------------------------
# cocycles and the cup pairing

def trace_form(x, y, mod):
    d = len(x)
    return sum(x[i][j] * y[j][i] for i in range(d) for j in range(d)) % mod


def _mat_add(a, b, mod):
    return tuple(tuple((x + y) % mod for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def adjoint(rho0: MatrixRep, g, m, mod):
    """rho0(g)^-1 m rho0(g)."""
    r = rho0(g)
    return mat_mul(mat_mul(mat_inv_mod(r, mod), m, mod), r, mod)


def check_cocycle(rho0: MatrixRep, c, mod):
    """c(g1 g2) = c(g2) + rho0(g2)^-1 c(g1) rho0(g2) for all pairs."""
    G = rho0.group
    c = [mat_reduce(as_matrix(x), mod) for x in c]
    for a in range(G.order):
        for b in range(G.order):
            rhs = _mat_add(c[b], adjoint(rho0, b, c[a], mod), mod)
            if c[G.op(a, b)] != rhs:
                raise NotACocycle("adjoint cocycle law fails", pair=[a, b])
    return c


def coboundary(rho0: MatrixRep, m, mod):
    """g -> g.m - m for the right adjoint action."""
    m = mat_reduce(as_matrix(m), mod)
    neg = tuple(tuple(-x % mod for x in row) for row in m)
    return [_mat_add(adjoint(rho0, g, m, mod), neg, mod) for g in range(rho0.group.order)]


def cup_pair(c1, c2, fundamental: BarChain, rho0: MatrixRep, trace=None) -> PadicScalar:
    """Evaluate (g1, g2) -> trace(rho0(g2)^-1 c1(g1) rho0(g2), c2(g2)) on a 2-cycle."""
    mod = fundamental.mod
    if fundamental.degree != 2:
        raise ShapeMismatch("fundamental chain must have degree 2")
    if not boundary(fundamental).is_zero():
        raise NotACycle("fundamental chain is not a cycle")
    c1 = check_cocycle(rho0, c1, mod)
    c2 = check_cocycle(rho0, c2, mod)
    trace = trace or trace_form
    total = 0
    for (g1, g2), a in fundamental.terms.items():
        total += a * trace(adjoint(rho0, g2, c1[g1], mod), c2[g2], mod)
    ring = RingSpec(fundamental.ell, fundamental.k)
    return PadicScalar.from_int(ring, total % mod, prec=fundamental.k)


def trace_free_basis(d):
    out = []
    for i in range(d):
        for j in range(d):
            if i != j:
                out.append(tuple(tuple(int((a, b) == (i, j)) for b in range(d)) for a in range(d)))
    for i in range(d - 1):
        out.append(tuple(tuple(int(a == b == i) - int(a == b == d - 1) for b in range(d)) for a in range(d)))
    return out


def cocycle_basis(rho0: MatrixRep, mod=None):
    """Generators of the trace-free adjoint 1-cocycles over Z/l^k.

    Unknowns are the coordinates of c(g) for every g; equations are the
    cocycle law on every pair.
    """
    ell = rho0.ell
    mod = mod or ell ** rho0.P
    K = vl(mod, ell)
    G, d = rho0.group, rho0.d
    basis = trace_free_basis(d)
    nb = len(basis)
    moved = [[adjoint(rho0, y, m, mod) for m in basis] for y in range(G.order)]
    cols = {c: {} for c in range(G.order * nb)}
    for x in range(G.order):
        for y in range(G.order):
            base = (x * G.order + y) * d * d
            for t in range(nb):
                for g, m, sign in ((G.op(x, y), basis[t], 1), (y, basis[t], -1), (x, moved[y][t], -1)):
                    col = cols[g * nb + t]
                    for i in range(d):
                        for j in range(d):
                            if m[i][j]:
                                r = base + i * d + j
                                col[r] = (col.get(r, 0) + sign * m[i][j]) % mod
    out = []
    for x in Elimination(cols, ell, K).kernel():
        c = []
        for g in range(G.order):
            acc = [[0] * d for _ in range(d)]
            for t in range(nb):
                v = x.get(g * nb + t, 0)
                if v:
                    for i in range(d):
                        for j in range(d):
                            acc[i][j] += v * basis[t][i][j]
            c.append(tuple(tuple(v % mod for v in row) for row in acc))
        out.append(c)
    return out


def homomorphism_cocycle(group: FiniteGroup, gens, values, mod):
    """For a trivial base representation cocycles are homomorphisms; extend
    generator values additively over the group."""
    d = len(values[0])
    zero = tuple(tuple(0 for _ in range(d)) for _ in range(d))
    tree = _spread(group, gens, [mat_reduce(as_matrix(v), mod) for v in values])
    out = [None] * group.order
    out[0] = zero
    for y in _bfs_order(group, gens)[1:]:
        x, v = tree[y]
        out[y] = _mat_add(out[x], v, mod)
    return out

"""Sparse linear algebra over Z / l^K.

Elimination proceeds level by level in the valuation of the pivot: first
every unit pivot is used, then pivots of valuation 1, and so on.  Within a
level columns are scanned in increasing order and the lowest row carrying
an entry of exactly that valuation is chosen, so results are reproducible.
Row operations are recorded and can be replayed on new right-hand sides.
"""

from __future__ import annotations

from .errors import NoSolution
from .padic_core import vl


class Elimination:
    def __init__(self, columns, ell: int, K: int):
        """columns: {col: {row: value}} describing the matrix."""
        self.ell, self.K = ell, K
        self.mod = ell ** K
        mod = self.mod
        rows = {}
        colrows = {}
        for c, entries in columns.items():
            for r, v in entries.items():
                v %= mod
                if v:
                    rows.setdefault(r, {})[c] = v
                    colrows.setdefault(c, set()).add(r)
        self.columns = sorted(columns)
        active = set(rows)
        pivots = []
        ops = []
        pivoted = set()
        for level in range(K):
            scale = ell ** level
            progress = True
            while progress:
                progress = False
                for c in self.columns:
                    if c in pivoted:
                        continue
                    cand = [r for r in colrows.get(c, ()) if r in active and vl(rows[r][c], ell) == level]
                    if not cand:
                        continue
                    r = min(cand)
                    unit = rows[r][c] // scale
                    uinv = pow(unit, -1, mod)
                    prow = rows[r]
                    step = []
                    for r2 in sorted(colrows[c]):
                        if r2 == r or r2 not in active:
                            continue
                        f = (rows[r2][c] // scale) * uinv % mod
                        target = rows[r2]
                        for c2, v in prow.items():
                            nv = (target.get(c2, 0) - f * v) % mod
                            if nv:
                                if c2 not in target:
                                    colrows.setdefault(c2, set()).add(r2)
                                target[c2] = nv
                            elif c2 in target:
                                del target[c2]
                                colrows[c2].discard(r2)
                        step.append((r2, f))
                    ops.append((r, step))
                    active.discard(r)
                    pivoted.add(c)
                    pivots.append((r, c, level, unit))
                    progress = True
        self.rows = rows
        self.pivots = pivots
        self.ops = ops
        self.free_rows = active
        self.pivot_columns = pivoted

    # -- queries --------------------------------------------------------------
    def pivot_valuations(self):
        return sorted(p[2] for p in self.pivots)

    def rank(self):
        return len(self.pivots)

    def _reduce_rhs(self, b):
        mod = self.mod
        b = {r: v % mod for r, v in b.items() if v % mod}
        for r, step in self.ops:
            br = b.get(r, 0)
            if not br:
                continue
            for r2, f in step:
                nv = (b.get(r2, 0) - f * br) % mod
                if nv:
                    b[r2] = nv
                else:
                    b.pop(r2, None)
        return b

    def _back_substitute(self, b, fixed=None):
        """Solve the triangular system; None if inconsistent."""
        mod, ell = self.mod, self.ell
        x = dict(fixed or {})
        for r, c, level, unit in reversed(self.pivots):
            if c in x:
                continue
            acc = b.get(r, 0)
            for c2, v in self.rows[r].items():
                if c2 != c and c2 in x:
                    acc -= v * x[c2]
            acc %= mod
            scale = ell ** level
            if acc % scale:
                return None
            sub = ell ** (self.K - level)
            x[c] = (acc // scale) * pow(unit, -1, sub) % sub
        return {c: v for c, v in x.items() if v % mod}

    def solve(self, b):
        """Some x with A x = b, or raise NoSolution."""
        b = self._reduce_rhs(b)
        for r in self.free_rows:
            if b.get(r, 0):
                raise NoSolution("right-hand side is not in the image", row=r)
        for r in b:
            if r not in self.rows:
                raise NoSolution("right-hand side is not in the image", row=r)
        x = self._back_substitute(b)
        if x is None:
            raise NoSolution("right-hand side is not in the image")
        return x

    def kernel(self):
        """Generators of {x : A x = 0}."""
        gens = []
        free = [c for c in self.columns if c not in self.pivot_columns]
        for c in free:
            x = self._back_substitute({}, {c: 1})
            gens.append(x)
        for r, c, level, unit in self.pivots:
            if level:
                x = self._back_substitute({}, {c: self.ell ** (self.K - level)})
                gens.append(x)
        return [g for g in gens if g]


def apply(columns, x, mod):
    """A x for the column dictionary A."""
    out = {}
    for c, v in x.items():
        for r, a in columns.get(c, {}).items():
            out[r] = (out.get(r, 0) + a * v) % mod
    return {r: v for r, v in out.items() if v}

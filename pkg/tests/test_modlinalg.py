import itertools
import random

import pytest

from elladic.errors import NoSolution
from elladic.modlinalg import Elimination, apply


def random_columns(rng, rows, cols, mod, density=0.7):
    return {c: {r: rng.randrange(mod) for r in range(rows) if rng.random() < density} for c in range(cols)}


def all_vectors(cols, mod):
    for xs in itertools.product(range(mod), repeat=cols):
        yield {c: v for c, v in enumerate(xs) if v}


def key(v):
    return tuple(sorted(v.items()))


def span(gens, mod):
    seen = {()}
    frontier = [{}]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = dict(v)
                for c, a in g.items():
                    w[c] = (w.get(c, 0) + a) % mod
                w = {c: a for c, a in w.items() if a}
                if key(w) not in seen:
                    seen.add(key(w))
                    nxt.append(w)
        frontier = nxt
    return seen


@pytest.mark.parametrize("seed", range(8))
def test_solve_and_kernel_against_brute_force(seed):
    rng = random.Random(seed)
    ell, K = 3, 2
    mod = ell ** K
    rows, cols = rng.randrange(2, 4), rng.randrange(2, 4)
    A = random_columns(rng, rows, cols, mod)
    elim = Elimination(A, ell, K)
    image, kernel = set(), set()
    for x in all_vectors(cols, mod):
        y = apply(A, x, mod)
        image.add(key(y))
        if not y:
            kernel.add(key(x))
    assert span(elim.kernel(), mod) == kernel
    for b in all_vectors(rows, mod):
        if key(b) in image:
            assert apply(A, elim.solve(b), mod) == b
        else:
            with pytest.raises(NoSolution):
                elim.solve(b)


def test_valuation_levels():
    # diag(1, 3, 9) over Z/27
    A = {0: {0: 1}, 1: {1: 3}, 2: {2: 9}}
    elim = Elimination(A, 3, 3)
    assert sorted(elim.pivot_valuations()) == [0, 1, 2]
    assert apply(A, elim.solve({1: 6, 2: 18}), 27) == {1: 6, 2: 18}
    with pytest.raises(NoSolution):
        elim.solve({2: 3})


def test_reproducible_pivots():
    rng = random.Random(5)
    A = random_columns(rng, 6, 6, 27)
    a, b = Elimination(A, 3, 3), Elimination(A, 3, 3)
    assert a.pivots == b.pivots and a.kernel() == b.kernel()

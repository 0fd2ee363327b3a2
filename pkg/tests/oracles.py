"""Brute-force reference implementations used only by the tests.

Nothing here imports the package's combinatorics: crossings are checked over
all label quadruples and set partitions come from plain recursion.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def crosses(blocks) -> bool:
    owner = {x: i for i, b in enumerate(blocks) for x in b}
    labels = sorted(owner)
    for a, b, c, d in combinations(labels, 4):
        if owner[a] == owner[c] and owner[b] == owner[d] and owner[a] != owner[b]:
            return True
    return False


def canon(blocks):
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


def brute_nc(labels):
    return sorted(canon(p) for p in set_partitions(labels) if not crosses(p))


def brute_ncp(labels):
    return [p for p in brute_nc(labels) if all(len(b) == 2 for b in p)]


def catalan_recurrence(n):
    c = [1]
    for k in range(n):
        c.append(sum(c[i] * c[k - i] for i in range(k + 1)))
    return c[n]


def refines(p, q) -> bool:
    return all(any(set(b) <= set(B) for B in q) for b in p)


def brute_kreweras(pi_blocks, odds):
    """Coarsest partition of ``odds`` whose union with ``pi`` is non-crossing."""
    compatible = [s for s in brute_nc(odds) if not crosses(list(pi_blocks) + list(s))]
    maxima = [s for s in compatible if not any(t != s and refines(s, t) for t in compatible)]
    assert len(maxima) == 1, maxima
    return maxima[0]


def brute_mobius(pi, sigma, universe):
    """Moebius function of the NC lattice by recursion over the interval."""
    interval = [r for r in universe if refines(pi, r) and refines(r, sigma)]
    memo = {}

    def mu(r):
        if r in memo:
            return memo[r]
        if r == pi:
            val = 1
        else:
            val = -sum(mu(x) for x in interval if x != r and refines(x, r))
        memo[r] = val
        return val

    return mu(sigma)


def brute_moments_from_cumulants(k, order):
    """``m_n = sum_{pi in NC(n)} prod_B k_|B|`` by enumeration."""
    out = [1]
    for n in range(1, order + 1):
        total = 0
        for p in brute_nc(range(1, n + 1)):
            w = 1
            for b in p:
                w *= k.get(len(b), 0)
            total += w
        out.append(total)
    return out


def brute_cumulants(moments, order):
    """``k_n = sum_{pi in NC(n)} mu(pi, 1) prod_B m_|B|`` with the brute Moebius."""
    out = {}
    for n in range(1, order + 1):
        universe = brute_nc(range(1, n + 1))
        top = (tuple(range(1, n + 1)),)
        total = 0
        for p in universe:
            w = 1
            for b in p:
                w *= moments[len(b)]
            total += brute_mobius(p, top, universe) * w
        out[n] = total
    return out


def fraction_catalan(n):
    return Fraction(comb(2 * n, n), n + 1)

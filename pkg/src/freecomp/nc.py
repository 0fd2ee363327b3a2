"""Non-crossing partitions of ordered integer label sets.

Ground sets are strictly increasing integer labels rather than ``1..n`` so
that pairings on the even labels ``{2, 4, ..., 2n}`` and their complements on
the odd labels ``{1, 3, ..., 2n+1}`` can live side by side and be merged into
one partition of ``{1, ..., 2n+1}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

from .errors import InvalidInputError

__all__ = [
    "NCPartition",
    "catalan",
    "is_crossing",
    "enumerate_nc",
    "enumerate_nc_pairings",
    "kreweras_complement",
    "nc_mobius",
    "parse_partition",
]


def catalan(n: int) -> int:
    if n < 0:
        raise InvalidInputError("catalan index must be non-negative")
    return comb(2 * n, n) // (n + 1)


def _check_ground(ground: Iterable[int]) -> tuple[int, ...]:
    ground = tuple(int(x) for x in ground)
    if len(set(ground)) != len(ground):
        raise InvalidInputError(f"duplicate labels in ground set {list(ground)}")
    if any(a >= b for a, b in zip(ground, ground[1:])):
        raise InvalidInputError(f"ground labels must be increasing: {list(ground)}")
    return ground


def is_crossing(blocks: Sequence[Sequence[int]]) -> bool:
    """True if two blocks interleave as ``a < b < c < d`` with a, c | b, d."""
    owner = {}
    for i, block in enumerate(blocks):
        for x in block:
            owner[x] = i
    labels = sorted(owner)
    # Stack scan: a block may only reopen if nothing opened after it is still open.
    last = {}
    for pos, x in enumerate(labels):
        last[owner[x]] = pos
    stack: list[int] = []
    for pos, x in enumerate(labels):
        b = owner[x]
        if stack and stack[-1] == b:
            if last[b] == pos:
                stack.pop()
            continue
        if b in stack:
            return True
        if last[b] != pos:
            stack.append(b)
    return False


@dataclass(frozen=True)
class NCPartition:
    """A non-crossing partition; blocks are sorted tuples ordered by minimum."""

    ground: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    def __init__(self, ground: Iterable[int], blocks: Iterable[Iterable[int]]):
        ground = _check_ground(ground)
        blocks = tuple(sorted(tuple(sorted(int(x) for x in b)) for b in blocks))
        if any(len(b) == 0 for b in blocks):
            raise InvalidInputError("blocks must be non-empty")
        flat = [x for b in blocks for x in b]
        if len(flat) != len(set(flat)) or set(flat) != set(ground):
            raise InvalidInputError("blocks must cover the ground set disjointly")
        if is_crossing(blocks):
            raise InvalidInputError(f"partition {_fmt(blocks)} is crossing")
        object.__setattr__(self, "ground", ground)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def _trusted(cls, ground, blocks) -> "NCPartition":
        obj = object.__new__(cls)
        object.__setattr__(obj, "ground", ground)
        object.__setattr__(obj, "blocks", tuple(sorted(blocks)))
        return obj

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return _fmt(self.blocks)

    def is_pairing(self) -> bool:
        return all(len(b) == 2 for b in self.blocks)

    def block_of(self, label: int) -> tuple[int, ...]:
        for b in self.blocks:
            if label in b:
                return b
        raise KeyError(label)

    def refines(self, other: "NCPartition") -> bool:
        """Refinement order: every block of ``self`` sits inside a block of ``other``."""
        if self.ground != other.ground:
            return False
        owner = {x: i for i, b in enumerate(other.blocks) for x in b}
        return all(len({owner[x] for x in b}) == 1 for b in self.blocks)

    def union(self, other: "NCPartition") -> "NCPartition":
        ground = sorted(self.ground + other.ground)
        return NCPartition(ground, self.blocks + other.blocks)


def _fmt(blocks) -> str:
    return "".join("{" + ",".join(str(x) for x in b) + "}" for b in blocks)


def parse_partition(text: str, ground: Iterable[int] | None = None) -> NCPartition:
    """Inverse of ``str(NCPartition)``; the ground defaults to the union of blocks."""
    text = text.strip()
    blocks = []
    for chunk in text.split("}"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if not chunk.startswith("{"):
            raise InvalidInputError(f"cannot parse partition text {text!r}")
        body = chunk[1:].strip()
        blocks.append([int(x) for x in body.split(",") if x.strip()])
    if ground is None:
        ground = sorted(x for b in blocks for x in b)
    return NCPartition(ground, blocks)


@lru_cache(maxsize=None)
def _nc_positions(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    # Partitions of positions 0..n-1; the block holding position 0 splits the
    # rest into gaps that are partitioned independently.
    if n == 0:
        return ((),)
    out = []
    rest = list(range(1, n))
    for k in range(len(rest) + 1):
        for chosen in _subsets(rest, k):
            first = (0,) + chosen
            cuts = list(first) + [n]
            gaps = [(cuts[i] + 1, cuts[i + 1]) for i in range(len(first))]
            partials: list[tuple] = [()]
            for lo, hi in gaps:
                sub = _nc_positions(hi - lo)
                partials = [
                    acc + tuple(tuple(lo + x for x in b) for b in p)
                    for acc in partials
                    for p in sub
                ]
            out.extend((first,) + p for p in partials)
    return tuple(tuple(sorted(p)) for p in out)


def _subsets(items, k):
    from itertools import combinations

    return combinations(items, k)


@lru_cache(maxsize=None)
def _ncp_positions(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    if n % 2:
        return ()
    if n == 0:
        return ((),)
    out = []
    for j in range(1, n, 2):
        for inner in _ncp_positions(j - 1):
            for outer in _ncp_positions(n - j - 1):
                blocks = [(0, j)]
                blocks += [tuple(x + 1 for x in b) for b in inner]
                blocks += [tuple(x + j + 1 for x in b) for b in outer]
                out.append(tuple(sorted(blocks)))
    return tuple(out)


def _relabel(ground, position_partitions):
    parts = [
        NCPartition._trusted(ground, tuple(tuple(ground[i] for i in b) for b in p))
        for p in position_partitions
    ]
    parts.sort(key=lambda p: p.blocks)
    return parts


def enumerate_nc(ground: Iterable[int]) -> list[NCPartition]:
    """All non-crossing partitions of ``ground``, sorted by their block tuples."""
    ground = _check_ground(ground)
    return _relabel(ground, _nc_positions(len(ground)))


def enumerate_nc_pairings(ground: Iterable[int]) -> list[NCPartition]:
    """All non-crossing pairings; empty for an odd-size ground."""
    ground = _check_ground(ground)
    return _relabel(ground, _ncp_positions(len(ground)))


def kreweras_complement(
    pi: NCPartition, outer: Iterable[int] | None = None
) -> NCPartition:
    """Largest partition of the interleaved labels keeping ``pi`` non-crossing.

    ``outer`` must interleave ``pi.ground`` as ``y0 < x1 < y1 < ... < xn < yn``.
    It defaults to the odd labels when ``pi`` lives on ``{2, 4, ..., 2n}``.
    """
    if not isinstance(pi, NCPartition):
        raise InvalidInputError("expected an NCPartition")
    if is_crossing(pi.blocks):
        raise InvalidInputError("complement of a crossing partition requested")
    xs = pi.ground
    n = len(xs)
    if outer is None:
        if xs != tuple(range(2, 2 * n + 1, 2)):
            raise InvalidInputError(
                "outer labels are required unless the ground is {2, 4, ..., 2n}"
            )
        ys = tuple(range(1, 2 * n + 2, 2))
    else:
        ys = _check_ground(outer)
        if len(ys) != n + 1 or any(
            not (ys[i] < xs[i] < ys[i + 1]) for i in range(n)
        ):
            raise InvalidInputError("outer labels must interleave the ground set")

    # y_i continues to y_j where x_j closes the block opened at x_{i+1};
    # if x_{i+1} is not a block minimum, y_i ends its block.
    index = {x: i for i, x in enumerate(xs)}
    nxt: dict[int, int] = {}
    for i in range(n):
        block = pi.block_of(xs[i])
        if block[0] == xs[i]:
            nxt[i] = index[block[-1]] + 1
    blocks = []
    seen = set()
    for i in range(n + 1):
        if i in seen:
            continue
        chain = [i]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        seen.update(chain)
        blocks.append(tuple(ys[j] for j in chain))
    return NCPartition._trusted(ys, tuple(blocks))


def _standard_kreweras_sizes(blocks: Sequence[Sequence[int]]) -> list[int]:
    """Block sizes of the cyclic Kreweras complement of a partition of m points."""
    labels = sorted(x for b in blocks for x in b)
    m = len(labels)
    pos = {x: i for i, x in enumerate(labels)}
    pi = NCPartition._trusted(
        tuple(range(2, 2 * m + 1, 2)),
        tuple(tuple(2 * pos[x] + 2 for x in b) for b in blocks),
    )
    comp = kreweras_complement(pi)
    # The first and last outer points always share a block; on a cycle they
    # are one point.
    return [len(b) - 1 if b[0] == 1 else len(b) for b in comp.blocks]


def nc_mobius(pi: NCPartition, sigma: NCPartition) -> int:
    """Moebius function of the interval ``[pi, sigma]`` in the NC lattice."""
    if not pi.refines(sigma):
        raise InvalidInputError(f"{pi} is not below {sigma} in refinement order")
    result = 1
    for big in sigma.blocks:
        inner = [b for b in pi.blocks if b[0] in big]
        for size in _standard_kreweras_sizes(inner):
            result *= (-1) ** (size - 1) * catalan(size - 1)
    return result

"""Exact free-dimension calculus for free products and their compressions.

Algebras are finite direct sums of blocks: full matrix algebras, interpolated
free group factors ``L(F_t)``, the hyperfinite II_1 factor ``R`` and opaque
II_1 factors that are only tracked symbolically.  All weights and parameters
are exact (``Fraction`` or :class:`~freecomp.surd.Surd`); ``INF`` stands for an
infinite parameter or index set.

Free dimension only fixes the parameter of a free product, it is not claimed
to decide isomorphism of free group factors.  ``equivalent`` therefore
compares parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, ClassVar, Iterable, Sequence, Union

from .errors import (
    InvalidInputError,
    NoWitnessError,
    OutsideClassError,
    RuleNotApplicableError,
)
from .surd import INF, Surd, exact, is_inf, sqrt_exact

Number = Union[Fraction, Surd, float]

ALL_RATIONALS = "Q+"


# --------------------------------------------------------------------------
# blocks


@dataclass(frozen=True)
class MatrixBlock:
    n: int
    weight: Number = Fraction(1)
    kind: ClassVar[str] = "matrix"

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidInputError(f"matrix size must be a positive integer, got {self.n!r}")
        _check_weight(self.weight)

    def key(self):
        return (0, self.n, self.weight)

    def __str__(self):
        core = "C" if self.n == 1 else f"M_{self.n}"
        return f"{core}[{self.weight}]"


@dataclass(frozen=True)
class FreeGroupBlock:
    t: Number
    weight: Number = Fraction(1)
    kind: ClassVar[str] = "lf"

    def __post_init__(self):
        t = self.t if is_inf(self.t) else exact(self.t)
        object.__setattr__(self, "t", t)
        if not is_inf(t) and not t > 1:
            raise OutsideClassError(
                f"L(F_t) needs t in (1, inf]; got t={t} (outside interpolation range)"
            )
        _check_weight(self.weight)

    def key(self):
        return (1, self.t, self.weight)

    def __str__(self):
        t = "inf" if is_inf(self.t) else self.t
        return f"L(F_{t})[{self.weight}]"


@dataclass(frozen=True)
class HyperfiniteBlock:
    weight: Number = Fraction(1)
    kind: ClassVar[str] = "r"

    def __post_init__(self):
        _check_weight(self.weight)

    def key(self):
        return (2, 0, self.weight)

    def __str__(self):
        return f"R[{self.weight}]"


@dataclass(frozen=True)
class OpaqueFactorBlock:
    """A II_1 factor known only by name and fundamental-group generators.

    ``scale`` records a pending compression ``A_scale`` that could not be
    absorbed into the fundamental group.
    """

    name: str
    generators: Union[frozenset, str] = frozenset()
    scale: Number = Fraction(1)
    weight: Number = Fraction(1)
    kind: ClassVar[str] = "opaque"

    def __post_init__(self):
        if self.generators != ALL_RATIONALS:
            gens = frozenset(exact(g) for g in self.generators)
            if any(not isinstance(g, Fraction) or g <= 0 for g in gens):
                raise InvalidInputError("fundamental-group generators must be positive rationals")
            object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "scale", exact(self.scale))
        _check_weight(self.weight)

    def key(self):
        return (3, self.name, self.scale, self.weight)

    def __str__(self):
        sub = "" if self.scale == 1 else f"_{self.scale}"
        return f"{self.name}{sub}[{self.weight}]"


Block = Union[MatrixBlock, FreeGroupBlock, HyperfiniteBlock, OpaqueFactorBlock]


def _check_weight(w):
    w = exact(w)
    if is_inf(w) or not w > 0:
        raise InvalidInputError(f"weights must be positive and finite, got {w}")


def _diffuse(b: Block) -> bool:
    return b.kind != "matrix"


def block_fdim(b: Block):
    if b.kind == "matrix":
        return 1 - Fraction(1, b.n * b.n)
    if b.kind == "lf":
        return b.t
    if b.kind == "r":
        return Fraction(1)
    raise OutsideClassError(f"fdim undefined for opaque factors ({b.name})")


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class AlgebraExpression:
    """A weighted direct sum of blocks whose weights total one."""

    summands: tuple

    def __init__(self, summands: Iterable[Block]):
        summands = tuple(sorted(summands, key=lambda b: b.key()))
        if not summands:
            raise InvalidInputError("an algebra needs at least one summand")
        total = sum((b.weight for b in summands), Fraction(0))
        if total != 1:
            raise InvalidInputError(f"weights must sum to 1, got {total}")
        if sum(1 for b in summands if _diffuse(b)) > 1:
            raise InvalidInputError("at most one diffuse factor summand is supported")
        if any(b.kind == "opaque" for b in summands) and len(summands) > 1:
            raise InvalidInputError("opaque factors cannot appear inside direct sums")
        object.__setattr__(self, "summands", summands)

    def is_factor(self) -> bool:
        return len(self.summands) == 1 and self.summands[0].kind != "matrix"

    def is_opaque(self) -> bool:
        return any(b.kind == "opaque" for b in self.summands)

    def linear_dimension(self):
        if any(_diffuse(b) for b in self.summands):
            return INF
        return sum(b.n * b.n for b in self.summands)

    def key(self):
        return tuple(b.key() for b in self.summands)

    def __str__(self):
        if len(self.summands) == 1 and self.summands[0].weight == 1:
            return str(self.summands[0]).rsplit("[", 1)[0]
        return " + ".join(str(b) for b in self.summands)


def M(n: int, weight=1) -> MatrixBlock:
    return MatrixBlock(n, exact(weight))


def C(weight) -> MatrixBlock:
    return MatrixBlock(1, exact(weight))


def LF(t, weight=1) -> FreeGroupBlock:
    return FreeGroupBlock(t, exact(weight))


def R(weight=1) -> HyperfiniteBlock:
    return HyperfiniteBlock(exact(weight))


def opaque(name: str, generators=(), scale=1, weight=1) -> OpaqueFactorBlock:
    gens = generators if generators == ALL_RATIONALS else frozenset(generators)
    return OpaqueFactorBlock(name, gens, exact(scale), exact(weight))


def algebra(*blocks: Block) -> AlgebraExpression:
    return AlgebraExpression(blocks)


def single(block: Block) -> AlgebraExpression:
    return AlgebraExpression([replace(block, weight=Fraction(1))])


def fdim(expr: AlgebraExpression):
    """``1 - sum w_i^2 (1 - d_i)`` with block dimensions 1-1/n^2, t and 1."""
    if any(b.kind == "lf" and is_inf(b.t) for b in expr.summands):
        if expr.is_opaque():
            raise OutsideClassError("fdim undefined for opaque factors")
        return INF
    total = Fraction(1)
    for b in expr.summands:
        total = total - b.weight * b.weight * (1 - block_fdim(b))
    return total


@dataclass(frozen=True)
class FreeProductExpression:
    """``(*_{i in I} family_i) * extras``.

    With ``cardinality == INF`` the family lists representatives standing for
    infinitely many free factors.  ``extras`` are further free factors such as
    compression tails.
    """

    family: tuple
    cardinality: Union[int, float]
    extras: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "family", tuple(self.family))
        object.__setattr__(self, "extras", tuple(self.extras))
        if not self.family:
            raise InvalidInputError("a free product needs at least one family member")
        if is_inf(self.cardinality):
            pass
        elif not isinstance(self.cardinality, int) or self.cardinality != len(self.family):
            raise InvalidInputError("finite cardinality must equal the number of family members")
        elif self.cardinality + len(self.extras) < 2:
            raise InvalidInputError("a free product needs at least two components")

    @property
    def infinite(self) -> bool:
        return is_inf(self.cardinality)

    def components(self) -> tuple:
        return self.family + self.extras

    def canonical(self) -> "FreeProductExpression":
        family = tuple(sorted(self.family, key=lambda e: e.key()))
        return FreeProductExpression(family, self.cardinality, _merge_extras(self.extras))

    def same_as(self, other: "FreeProductExpression") -> bool:
        return self.canonical() == other.canonical()

    def __str__(self):
        card = "inf" if self.infinite else str(self.cardinality)
        fam = " * ".join(f"({e})" for e in self.family)
        if self.infinite:
            fam = f"*[{fam} ...]"
        tail = "".join(f" * ({e})" for e in self.extras)
        return f"{fam}{tail}  |I|={card}"


def _merge_extras(extras: Sequence[AlgebraExpression]) -> tuple:
    # Free products of interpolated free group factors and R add free dimension;
    # a trivial C summand is the unit for the free product.
    factor_dim = None
    keep = []
    for e in extras:
        b = e.summands[0]
        if len(e.summands) == 1 and b.kind == "matrix" and b.n == 1:
            continue
        if e.is_factor() and b.kind in ("lf", "r"):
            d = block_fdim(b)
            factor_dim = d if factor_dim is None else factor_dim + d
            continue
        keep.append(e)
    if factor_dim is not None:
        keep.append(_factor_with_fdim(factor_dim))
    return tuple(sorted(keep, key=lambda e: e.key()))


def _factor_with_fdim(f) -> AlgebraExpression:
    if is_inf(f) or f > 1:
        return single(LF(f))
    if f == 1:
        return single(R())
    raise OutsideClassError(f"free dimension {f} < 1 does not name a II_1 factor")


# --------------------------------------------------------------------------
# derivations

ANCHORS = {
    "free-product": "free dimension is additive; atoms survive only where two one-dimensional summands overlap",
    "compress-factor": "L(F_t) cut by gamma is L(F_{1 + (t-1)/gamma^2}); R is unchanged",
    "compress-free-product": "compression of a free product of II_1 factors adds a free tail of dimension (|I|-1)(t^-2 - 1)",
    "absorb-lf-infinity": "an infinite free product of II_1 factors absorbs L(F_inf)",
    "stickout": "cutting (A * (B0 + C)) by a central projection of trace 1/n leaves A_{1/n} * B0 * L(F_{2(n-1)})",
    "equal-fdim-substitution": "free factors of equal free dimension are interchangeable next to a II_1 factor",
    "invert-scale": "fundamental groups are closed under inverses",
    "conclude-isomorphic": "both sides reduce to the same canonical free product",
    "identity": "compression by 1 is the identity",
}


@dataclass(frozen=True)
class Step:
    rule: str
    anchor: str
    before: object
    after: object
    params: dict = field(default_factory=dict)


class Derivation:
    """Ordered audit trail of rewrites; every step can be replayed."""

    def __init__(self, steps: Iterable[Step] = ()):
        self.steps: list[Step] = list(steps)

    def record(self, rule, before, after, **params):
        self.steps.append(Step(rule, ANCHORS[rule], before, after, dict(params)))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def rules(self) -> list[str]:
        return [s.rule for s in self.steps]

    def replay(self) -> bool:
        """Re-run every rule; raise on the first step that does not reproduce."""
        for i, step in enumerate(self.steps):
            got = _REPLAY[step.rule](step.before, **step.params)
            if not _same(got, step.after):
                raise AssertionError(f"step {i} ({step.rule}) does not replay: {got} != {step.after}")
        return True

    def is_chained(self) -> bool:
        return all(
            _same(a.after, b.before) for a, b in zip(self.steps, self.steps[1:])
        )


def _same(x, y) -> bool:
    if isinstance(x, FreeProductExpression) and isinstance(y, FreeProductExpression):
        return x.same_as(y)
    return x == y


def _log(log, rule, before, after, **params):
    if log is not None:
        log.record(rule, before, after, **params)


# --------------------------------------------------------------------------
# free products of computable algebras


def _min_projection_trace(b: Block):
    return b.weight / b.n if b.kind == "matrix" else Fraction(0)


def _free_pair(a: AlgebraExpression, b: AlgebraExpression) -> AlgebraExpression:
    fa, fb = fdim(a), fdim(b)
    total = INF if is_inf(fa) or is_inf(fb) else fa + fb
    atoms = []
    for x in a.summands:
        for y in b.summands:
            s = _min_projection_trace(x) + _min_projection_trace(y)
            if s > 1:
                if x.kind == "matrix" and y.kind == "matrix" and x.n == 1 and y.n == 1:
                    atoms.append(s - 1)
                else:
                    raise OutsideClassError(
                        f"{x} * {y}: minimal projections overlap with a matrix block of "
                        "size >= 2; outside implemented class"
                    )
    atom_weight = sum(atoms, Fraction(0))
    diffuse_weight = 1 - atom_weight
    if is_inf(total):
        return AlgebraExpression([LF(INF, diffuse_weight)] + [C(w) for w in atoms])
    f = 1 - (1 - total - sum((w * w for w in atoms), Fraction(0))) / (diffuse_weight * diffuse_weight)
    if f < 1:
        raise OutsideClassError(f"computed factor parameter {f} < 1; outside implemented class")
    diffuse = R(diffuse_weight) if f == 1 else LF(f, diffuse_weight)
    return AlgebraExpression([diffuse] + [C(w) for w in atoms])


def free_product(exprs: Sequence[AlgebraExpression], log: Derivation | None = None) -> AlgebraExpression:
    """Tracial free product of algebras in the computable class."""
    exprs = list(exprs)
    if len(exprs) < 2:
        raise InvalidInputError("free_product needs at least two algebras")
    for e in exprs:
        if e.is_opaque():
            raise OutsideClassError("free products with opaque factors stay symbolic; use FreeProductExpression")
    dims = [e.linear_dimension() for e in exprs]
    if min(dims) < 2 or max(dims) < 3:
        raise OutsideClassError(
            "each algebra needs linear dimension >= 2 and one of them >= 3"
        )
    ordered = sorted(exprs, key=lambda e: -e.linear_dimension())
    acc = ordered[0]
    for e in ordered[1:]:
        acc = _free_pair(acc, e)
    _log(log, "free-product", FreeProductExpression(tuple(exprs), len(exprs)), acc)
    return acc


# --------------------------------------------------------------------------
# compressions

ONE = Fraction(1)


def in_fundamental_group(x, generators) -> bool:
    """Membership of ``x`` in the subgroup of Q+ generated by ``generators``."""
    if x == 1:
        return True
    if not isinstance(x, Fraction):
        return False
    if generators == ALL_RATIONALS:
        return True
    gens = [g for g in generators if g != 1]
    primes = sorted(set(_primes(x)).union(*(set(_primes(g)) for g in gens)))
    rows = [[_valuation(g, p) for p in primes] for g in gens]
    target = [_valuation(x, p) for p in primes]
    return _in_lattice(target, rows)


def _factorint(n: int) -> dict:
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _primes(q: Fraction):
    return list(_factorint(q.numerator)) + list(_factorint(q.denominator))


def _valuation(q: Fraction, p: int) -> int:
    return _factorint(q.numerator).get(p, 0) - _factorint(q.denominator).get(p, 0)


def _in_lattice(target: list[int], rows: list[list[int]]) -> bool:
    rows = [r[:] for r in rows if any(r)]
    target = target[:]
    for col in range(len(target)):
        live = [r for r in rows if r[col] != 0]
        rows = [r for r in rows if r[col] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                r = [ri - q * pi for ri, pi in zip(r, piv)]
                (nxt if r[col] != 0 else rows).append(r)
            live = nxt
        if live:
            piv = live[0]
            if target[col] % piv[col]:
                return False
            q = target[col] // piv[col]
            target = [ti - q * pi for ti, pi in zip(target, piv)]
        elif target[col]:
            return False
        rows = [r for r in rows if any(r)]
    return not any(target)


def compress_factor(expr: AlgebraExpression, gamma, log: Derivation | None = None) -> AlgebraExpression:
    """Corner of a single-block algebra by a projection of trace ``gamma``."""
    gamma = exact(gamma)
    if is_inf(gamma) or not gamma > 0:
        raise InvalidInputError(f"compression parameter must be positive, got {gamma}")
    if len(expr.summands) != 1:
        raise RuleNotApplicableError("compress_factor needs a single-block algebra")
    b = expr.summands[0]
    if b.kind == "lf":
        if is_inf(b.t):
            out = b
        else:
            t = 1 + (b.t - 1) / (gamma * gamma)
            if not t > 1:
                raise OutsideClassError(f"L(F_{b.t}) cut by {gamma} is outside interpolation range")
            out = LF(t)
    elif b.kind == "r":
        out = b
    elif b.kind == "matrix":
        size = b.n * gamma
        if not isinstance(size, Fraction) or size.denominator != 1:
            raise OutsideClassError(f"M_{b.n} has no corner of trace {gamma}")
        out = MatrixBlock(int(size))
    else:
        scale = b.scale * gamma
        if in_fundamental_group(scale, b.generators):
            scale = ONE
        out = replace(b, scale=scale)
    result = single(out)
    _log(log, "compress-factor", expr, result, gamma=gamma)
    return result


def corner(expr: AlgebraExpression, trace) -> AlgebraExpression:
    """Cut by a projection of trace ``trace`` that contains every atom.

    The diffuse summand receives the remaining trace; weights are renormalized.
    """
    trace = exact(trace)
    if expr.is_factor():
        return compress_factor(expr, trace)
    atoms = [b for b in expr.summands if b.kind == "matrix"]
    if any(b.n != 1 for b in atoms):
        raise OutsideClassError("corner only handles atoms beside one diffuse summand")
    diffuse = [b for b in expr.summands if b.kind != "matrix"]
    a_tot = sum((b.weight for b in atoms), Fraction(0))
    rest = trace - a_tot
    if not diffuse or not rest > 0 or trace > 1:
        raise InvalidInputError(f"no projection of trace {trace} contains the atoms of {expr}")
    d = diffuse[0]
    cut = compress_factor(single(d), rest / d.weight).summands[0]
    return AlgebraExpression(
        [replace(cut, weight=rest / trace)] + [C(b.weight / trace) for b in atoms]
    )


def _compress_components(fp: FreeProductExpression, t):
    for e in fp.components():
        if not e.is_factor():
            raise RuleNotApplicableError(
                f"component {e} is not a II_1 factor; rewrite it first (e.g. stickout)"
            )
    family = tuple(compress_factor(e, t) for e in fp.family)
    extras = tuple(compress_factor(e, t) for e in fp.extras)
    return family, extras


def compression_tail(count, t) -> AlgebraExpression | None:
    """Free tail picked up when cutting a free product of ``count`` factors by ``t``."""
    if is_inf(count):
        return single(LF(INF))
    y = (count - 1) * (1 / (t * t) - 1)
    if y > 1:
        return single(LF(y))
    if y == 1:
        return single(R())
    alpha = sqrt_exact(1 - y)
    return algebra(R(1 - alpha), C(alpha))


def _compress_fp_step(fp: FreeProductExpression, t) -> FreeProductExpression:
    t = exact(t)
    if is_inf(t) or not (0 < t < 1):
        raise InvalidInputError(f"compression parameter must lie in (0, 1), got {t}")
    family, extras = _compress_components(fp, t)
    count = INF if fp.infinite else len(fp.components())
    return FreeProductExpression(family, fp.cardinality, extras + (compression_tail(count, t),))


def compress_free_product(fp: FreeProductExpression, t, log: Derivation | None = None) -> FreeProductExpression:
    """``M_t`` for ``M`` a free product of II_1 factors.

    Finite index sets pick up the tail ``L(F_y)``, ``R`` or ``R + C_alpha``
    according to ``y = (|I|-1)(t^-2 - 1)`` against 1.  Infinite index sets
    absorb their ``L(F_inf)`` tail.
    """
    after = _compress_fp_step(fp, t)
    _log(log, "compress-free-product", fp, after, t=exact(t))
    if fp.infinite:
        after = absorb_lf_infinity(after, log=log)
    return after


def _absorb_step(fp: FreeProductExpression, add: bool = False) -> FreeProductExpression:
    if not fp.infinite:
        raise RuleNotApplicableError("L(F_inf) absorption needs an infinite index set")
    if add:
        return FreeProductExpression(fp.family, fp.cardinality, fp.extras + (single(LF(INF)),))
    extras = tuple(
        e for e in _merge_extras(fp.extras)
        if not (e.is_factor() and e.summands[0].kind == "lf" and is_inf(e.summands[0].t))
    )
    return FreeProductExpression(fp.family, fp.cardinality, extras)


def absorb_lf_infinity(fp: FreeProductExpression, add: bool = False, log: Derivation | None = None) -> FreeProductExpression:
    after = _absorb_step(fp, add)
    _log(log, "absorb-lf-infinity", fp, after, add=add)
    return after


def _parts(a) -> tuple:
    if isinstance(a, FreeProductExpression):
        return a.family, a.cardinality, a.extras
    return (a,), 1, ()


def _stickout_split(b: AlgebraExpression, n):
    if len(b.summands) != 2:
        raise InvalidInputError("stickout needs B = B0 + C with exactly two summands")
    candidates = []
    for i, c in enumerate(b.summands):
        other = b.summands[1 - i]
        if c.kind != "matrix" or c.n != 1:
            continue
        k = 1 / (1 - c.weight)
        if n is not None and k != n:
            continue
        if isinstance(k, Fraction) and k.denominator == 1 and k >= 2:
            candidates.append((other, int(k)))
    if not candidates:
        raise InvalidInputError(
            f"{b}: no one-dimensional summand of weight (n-1)/n"
            + ("" if n is None else f" for n={n}")
        )
    b0, k = candidates[0]
    if b0.weight != Fraction(1, k):
        raise InvalidInputError(f"weight of B0 is {b0.weight}, expected 1/{k}")
    return b0, k


def _stickout_step(before: FreeProductExpression, n: int) -> FreeProductExpression:
    if not before.extras:
        raise InvalidInputError("stickout needs B as the last free factor")
    b = before.extras[-1]
    b0, n = _stickout_split(b, n)
    if b0.kind == "matrix" and b0.n != 1:
        raise RuleNotApplicableError("B0 must be a factor or C")
    gamma = Fraction(1, n)
    rest = before.extras[:-1]
    if len(before.family) + len(rest) == 1 and not before.infinite:
        family, extras = (compress_factor(before.family[0], gamma),), ()
    else:
        base = _compress_fp_step(FreeProductExpression(before.family, before.cardinality, rest), gamma)
        if base.infinite:
            base = _absorb_step(base)
        family, extras = base.family, base.extras
    extras = extras + (single(b0), single(LF(2 * (n - 1))))
    return FreeProductExpression(family, before.cardinality, extras)


def stickout_rewrite(a, b: AlgebraExpression, n: int | None = None, log: Derivation | None = None) -> FreeProductExpression:
    """``(A * (B0 + C_{(n-1)/n}))_{1/n} = A_{1/n} * B0 * L(F_{2(n-1)})``.

    ``a`` is a single II_1 factor or a free product of them; ``B0`` carries
    weight ``1/n`` and is renormalized to a state.
    """
    family, card, extras = _parts(a)
    for e in family + extras:
        if not e.is_factor():
            raise RuleNotApplicableError(f"A must be a II_1 factor; {e} is not")
    b0, k = _stickout_split(b, n)
    before = FreeProductExpression(family, card, extras + (b,))
    after = _stickout_step(before, k)
    _log(log, "stickout", before, after, n=k)
    return after


def _substitute_step(before: FreeProductExpression, index: int, new: AlgebraExpression) -> FreeProductExpression:
    old = before.extras[index]
    if fdim(old) != fdim(new):
        raise RuleNotApplicableError(f"fdim({old}) != fdim({new})")
    if not any(e.is_factor() for e in before.components()):
        raise RuleNotApplicableError("substitution needs a II_1 factor elsewhere in the product")
    extras = list(before.extras)
    extras[index] = new
    return FreeProductExpression(before.family, before.cardinality, tuple(extras))


def substitute_equal_fdim(fp: FreeProductExpression, index: int, new: AlgebraExpression, log: Derivation | None = None):
    after = _substitute_step(fp, index, new)
    _log(log, "equal-fdim-substitution", fp, after, index=index, new=new)
    return after


def equivalent(x: AlgebraExpression, y: AlgebraExpression, free_factor: bool = False) -> bool:
    """Parameter equality of canonical forms.

    With ``free_factor=True`` the comparison is made for algebras sitting as a
    free factor next to a II_1 factor, where equal free dimension suffices.
    """
    if x.is_opaque() or y.is_opaque():
        raise OutsideClassError("equivalence of opaque factors is undecidable here")
    if x == y:
        return True
    if free_factor:
        return fdim(x) == fdim(y)
    return False


# --------------------------------------------------------------------------
# derived procedures


def _certifies(e: AlgebraExpression, t) -> bool:
    b = e.summands[0]
    if not e.is_factor():
        return False
    if b.kind == "r" or (b.kind == "lf" and is_inf(b.t)):
        return True
    if b.kind == "opaque":
        return b.scale == 1 and in_fundamental_group(t, b.generators)
    return t == 1


def fundamental_group_witness(fp: FreeProductExpression, t) -> Derivation:
    """Certificate that ``t`` lies in the fundamental group of an infinite free product."""
    if not fp.infinite:
        raise RuleNotApplicableError("fundamental-group witnesses need an infinite index set")
    t = exact(t)
    if is_inf(t) or not t > 0:
        raise InvalidInputError("scale must be a positive number")
    log = Derivation()
    if t == 1:
        log.record("identity", fp, fp)
        return log
    for e in fp.components():
        if not _certifies(e, t):
            raise NoWitnessError(f"no witness: component {e} cannot certify t={t}")
    s = t
    if t > 1:
        s = 1 / t
        log.record("invert-scale", fp, fp, t=t)
    cut = compress_free_product(fp, s, log=log)
    target = _absorb_step(fp)
    if not cut.same_as(target):
        raise NoWitnessError(f"no witness: {cut} differs from {target}")
    log.record("conclude-isomorphic", cut, target)
    return log


@dataclass(frozen=True)
class IrrationalCompressionData:
    n: int
    r: Fraction
    D: AlgebraExpression
    P: AlgebraExpression
    N: AlgebraExpression


def comprirrat_data(count, t) -> IrrationalCompressionData:
    """Pieces of ``M_t`` when ``1/t`` is not an integer.

    ``D = C_r + C_{1-r}`` is the amalgamating subalgebra, ``N`` the free
    product of the finite-dimensional ``B = M_{n+1} + M_n`` pieces and ``P``
    its corner.
    """
    t = exact(t)
    if not isinstance(t, Fraction) or not 0 < t < 1:
        raise InvalidInputError("t must be a rational in (0, 1)")
    inv = 1 / t
    if inv.denominator == 1:
        raise InvalidInputError("1/t is an integer; use the 1/n compression path")
    n = math.floor(inv)
    r = inv - n
    D = algebra(C(r), C(1 - r))
    if is_inf(count):
        P = N = single(LF(INF))
        return IrrationalCompressionData(n, r, D, P, N)
    if not isinstance(count, int) or count < 2:
        raise InvalidInputError("|I| must be an integer >= 2 or INF")
    k = Fraction(count)
    split = 1 - 1 / (2 * k)
    if t <= split:
        P = single(LF((k - 1) * (inv * inv - 1) + 2 * k * r * (1 - r)))
    else:
        P = algebra(
            LF(2 - (k + 1) / (2 * k - 1) ** 2, 1 - (2 * k - (2 * k - 1) * inv)),
            C(2 * k - (2 * k - 1) * inv),
        )
    if n >= 2 or t <= split:
        N = single(LF(k * (1 - t * t + 2 * t * t * r * (1 - r))))
    else:
        atom = 1 - 2 * k * (1 - t)
        N = algebra(LF(2 - 5 / (4 * k), 1 - atom), C(atom))
    return IrrationalCompressionData(n, r, D, P, N)


def irrational_piece(t) -> AlgebraExpression:
    """``B = M_{n+1}[(n+1) r t] + M_n[n (1-r) t]`` for ``1/t = n + r``."""
    t = exact(t)
    inv = 1 / t
    n = math.floor(inv)
    r = inv - n
    return algebra(MatrixBlock(n + 1, (n + 1) * r * t), MatrixBlock(n, n * (1 - r) * t))


@dataclass(frozen=True)
class ConsistencyReport:
    left: object
    right: object
    agree: bool
    note: str = ""


def shlyakhtenko_consistency(s, t, probe: AlgebraExpression) -> ConsistencyReport:
    """Compare ``(M * L(F_s))_t`` with ``M_t * L(F_{s/t^2})``."""
    s, t = exact(s), exact(t)
    if t == 1:
        return ConsistencyReport(probe, probe, True, "t = 1: identity compression")
    if is_inf(t) or not 0 < t < 1:
        raise InvalidInputError("t must lie in (0, 1]")
    if not is_inf(s) and s < 1:
        raise InvalidInputError("s must be >= 1")
    # s = 1 is the diffuse abelian algebra; only its free dimension enters.
    free_s = single(R()) if s == 1 else single(LF(s))
    left = compress_factor(free_product([probe, free_s]), t)
    right_s = INF if is_inf(s) else s / (t * t)
    right = free_product([compress_factor(probe, t), single(LF(right_s))])
    return ConsistencyReport(left, right, left == right)


@dataclass(frozen=True)
class RescalingReport:
    count: int
    t: object
    m: int
    route_direct: FreeProductExpression
    route_stepwise: FreeProductExpression
    agree: bool
    log_direct: Derivation
    log_stepwise: Derivation


def smallest_stickout_m(count, t) -> int:
    """Least m with 1 - 1/m > alpha when the tail of ``M_t`` is ``R + C_alpha``."""
    tail = compression_tail(count, exact(t))
    if tail.is_factor():
        return 2
    alpha = next(b.weight for b in tail.summands if b.kind == "matrix")
    m = 2
    while not (1 - Fraction(1, m)) > alpha:
        m += 1
    return m


def rescaling_consistency(count: int, t, m: int) -> RescalingReport:
    """Check ``(M_t)_{1/m} = M_{t/m}`` for ``M`` a free product of ``count`` opaque factors.

    The direct route cuts by ``t/m`` in one step.  The stepwise route cuts by
    ``t`` and then by ``1/m``; a tail ``R + C_alpha`` is first replaced by the
    equal-dimension ``L(F_z) + C_beta`` with ``1 - beta = 1/m`` and then cut
    via stickout.
    """
    t = exact(t)
    fp = FreeProductExpression(
        tuple(single(opaque(f"A{i}")) for i in range(1, count + 1)), count
    )
    log_a, log_b = Derivation(), Derivation()
    direct = compress_free_product(fp, t / m, log=log_a)

    cut = compress_free_product(fp, t, log=log_b)
    tail = cut.extras[-1]
    if tail.is_factor():
        stepwise = compress_free_product(cut, Fraction(1, m), log=log_b)
    else:
        alpha = next(b.weight for b in tail.summands if b.kind == "matrix")
        beta = 1 - Fraction(1, m)
        if not beta > alpha:
            raise RuleNotApplicableError(
                f"m={m} too small: need 1 - 1/m > alpha = {alpha}"
            )
        y = fdim(tail)
        z = m * m * y - 2 * m + 2
        replaced = substitute_equal_fdim(
            cut, len(cut.extras) - 1, algebra(LF(z, 1 - beta), C(beta)), log=log_b
        )
        a_part = FreeProductExpression(replaced.family, replaced.cardinality, replaced.extras[:-1])
        stepwise = stickout_rewrite(a_part, replaced.extras[-1], n=m, log=log_b)
    return RescalingReport(count, t, m, direct, stepwise, direct.same_as(stepwise), log_a, log_b)


# --------------------------------------------------------------------------
# replay registry


def _replay_free_product(before, **_):
    return free_product(list(before.family))


_REPLAY: dict[str, Callable] = {
    "free-product": _replay_free_product,
    "compress-factor": lambda before, gamma: compress_factor(before, gamma),
    "compress-free-product": lambda before, t: _compress_fp_step(before, t),
    "absorb-lf-infinity": lambda before, add=False: _absorb_step(before, add),
    "stickout": lambda before, n: _stickout_step(before, n),
    "equal-fdim-substitution": lambda before, index, new: _substitute_step(before, index, new),
    "invert-scale": lambda before, t=None: before,
    "conclude-isomorphic": lambda before: before,
    "identity": lambda before: before,
}

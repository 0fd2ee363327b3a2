"""Moments of words ``a0 X a1 X ... X an`` in the free product of a weighted
finite-dimensional algebra with a semicircular element ``X``.

The trace functional is ``phi(a) = sum_i w_i tr_i(a_i)``, ``tr_i`` the
normalized trace of block ``i``; ``phi(1)`` need not be 1.  Coefficients must
live in the corner ``p M p`` of a projection ``p``.  Weights are exact
rationals, matrix entries and moment values are floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError
from .nc import (
    NCPartition,
    catalan,
    enumerate_nc,
    enumerate_nc_pairings,
    kreweras_complement,
)

CORNER_TOL = 1e-12
MAX_WORD_LENGTH = 12


@dataclass(frozen=True)
class ModelState:
    """Direct sum of full matrix blocks with a faithful weighted trace."""

    dims: tuple
    weights: tuple
    elements: Mapping[str, tuple] = field(default_factory=dict)

    def __init__(self, dims, weights, elements=None):
        dims = tuple(int(d) for d in dims)
        weights = tuple(Fraction(w) for w in weights)
        if len(dims) != len(weights):
            raise InvalidInputError("one weight per block is required")
        if any(d < 1 for d in dims):
            raise InvalidInputError("block dimensions must be >= 1")
        if any(w <= 0 for w in weights):
            raise InvalidInputError("weights must be strictly positive")
        elems = {}
        for name, blocks in (elements or {}).items():
            if len(blocks) != len(dims):
                raise InvalidInputError(f"element {name!r} has {len(blocks)} blocks, expected {len(dims)}")
            arrs = []
            for d, b in zip(dims, blocks):
                arr = np.asarray(b, dtype=complex)
                if arr.shape != (d, d):
                    raise InvalidInputError(f"element {name!r}: block shape {arr.shape} != {(d, d)}")
                arrs.append(arr)
            elems[name] = tuple(arrs)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "elements", elems)

    @property
    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def identity(self) -> tuple:
        return tuple(np.eye(d, dtype=complex) for d in self.dims)

    def element(self, name: str) -> tuple:
        try:
            return self.elements[name]
        except KeyError:
            raise InvalidInputError(f"unknown element {name!r}") from None

    def product(self, names: Sequence[str]) -> tuple:
        out = self.identity()
        for name in names:
            out = tuple(x @ y for x, y in zip(out, self.element(name)))
        return out

    def phi(self, blocks: Sequence[np.ndarray]) -> complex:
        return complex(
            sum(float(w) * np.trace(b) / d for w, d, b in zip(self.weights, self.dims, blocks))
        )

    def phi_of(self, names: Sequence[str]) -> complex:
        return self.phi(self.product(names))

    def with_weights(self, weights) -> "ModelState":
        return ModelState(self.dims, weights, self.elements)

    def with_element(self, name: str, blocks) -> "ModelState":
        elems = dict(self.elements)
        elems[name] = blocks
        return ModelState(self.dims, self.weights, elems)

    def is_projection(self, name: str, tol: float = CORNER_TOL) -> bool:
        return all(
            np.max(np.abs(b @ b - b), initial=0) <= tol and np.max(np.abs(b - b.conj().T), initial=0) <= tol
            for b in self.element(name)
        )

    def below(self, p: str, q: str, tol: float = CORNER_TOL) -> bool:
        """Projection order ``p <= q``, i.e. ``q p = p``."""
        return all(
            np.max(np.abs(bq @ bp - bp), initial=0) <= tol
            for bp, bq in zip(self.element(p), self.element(q))
        )


@dataclass(frozen=True)
class CumulantSpec:
    """Free cumulants ``k_m`` of ``X``; absent orders are zero."""

    values: Mapping[int, float]

    def __getitem__(self, m: int) -> float:
        return self.values.get(m, 0.0)

    @classmethod
    def semicircular(cls, c) -> "CumulantSpec":
        if not c > 0:
            raise InvalidInputError("semicircular variance must be positive")
        return cls({2: c})

    def weight(self, pi: NCPartition):
        w = 1
        for b in pi.blocks:
            w = w * self[len(b)]
        return w


@dataclass(frozen=True)
class WordSpec:
    coefficients: tuple
    projection: str

    def __init__(self, coefficients: Sequence[str], projection: str):
        if len(coefficients) == 0:
            raise InvalidInputError("a word needs at least the coefficient a0")
        object.__setattr__(self, "coefficients", tuple(coefficients))
        object.__setattr__(self, "projection", projection)

    @property
    def n(self) -> int:
        return len(self.coefficients) - 1

    def with_projection(self, p: str) -> "WordSpec":
        return WordSpec(self.coefficients, p)


def _validate_word(model: ModelState, word: WordSpec, max_n: int):
    if word.n > max_n:
        raise InvalidInputError(f"word length {word.n} exceeds the configured maximum {max_n}")
    p = model.element(word.projection)
    for name in word.coefficients:
        a = model.element(name)
        for bp, ba in zip(p, a):
            if np.max(np.abs(ba - bp @ ba @ bp), initial=0) > CORNER_TOL:
                raise InvalidInputError(f"coefficient {name!r} is not in the corner of {word.projection!r}")


def _complement_value(model: ModelState, word: WordSpec, comp: NCPartition, normalizer=1.0) -> complex:
    # Odd label 2k+1 carries coefficient a_k.
    value = 1 + 0j
    for block in comp.blocks:
        value *= model.phi_of([word.coefficients[(i - 1) // 2] for i in block]) / normalizer
    return value


def _csum(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


@dataclass(frozen=True)
class MomentResult:
    value: complex
    pairings: tuple  # (pairing, complement, contribution)

    @property
    def pairing_count(self) -> int:
        return len(self.pairings)


def psi_word_detail(model: ModelState, word: WordSpec, max_n: int = MAX_WORD_LENGTH) -> MomentResult:
    _validate_word(model, word, max_n)
    n = word.n
    if n % 2:
        return MomentResult(0j, ())
    terms = []
    for pi in enumerate_nc_pairings(range(2, 2 * n + 1, 2)):
        comp = kreweras_complement(pi)
        terms.append((pi, comp, _complement_value(model, word, comp)))
    return MomentResult(_csum(t[2] for t in terms), tuple(terms))


def psi_word(model: ModelState, word: WordSpec, max_n: int = MAX_WORD_LENGTH) -> complex:
    """Sum over non-crossing pairings of the Kreweras-block products of ``phi``."""
    return psi_word_detail(model, word, max_n).value


def speicher_moment(
    model: ModelState, cum: CumulantSpec, word: WordSpec, max_n: int = MAX_WORD_LENGTH
) -> complex:
    """Cumulant-weighted sum over all of NC in the corner-normalized state.

    Each partition contributes ``k_pi * prod phi~_p(block)`` with
    ``phi~_p = phi / phi(p)``; the sum is rescaled by ``phi(p)``.
    """
    _validate_word(model, word, max_n)
    n = word.n
    c = model.phi_of([word.projection]).real
    terms = []
    for pi in enumerate_nc(range(2, 2 * n + 1, 2)):
        k = cum.weight(pi)
        if k == 0:
            continue
        comp = kreweras_complement(pi)
        terms.append(float(k) * _complement_value(model, word, comp, normalizer=c))
    return c * _csum(terms)


def semicircle_moment(k: int, c):
    """``k``-th moment of the centered semicircle law with variance ``c``."""
    if k < 0:
        raise InvalidInputError("moment order must be non-negative")
    if not c > 0:
        raise InvalidInputError("variance must be positive")
    if k % 2:
        return 0 * c
    return catalan(k // 2) * c ** (k // 2)


def moments_from_cumulants(cum: CumulantSpec, order: int) -> list:
    """``m_0..m_order`` via ``m_n = sum_s k_s sum_{i_1+..+i_s = n-s} m_{i_1}..m_{i_s}``."""
    if order < 1:
        raise InvalidInputError("order must be >= 1")
    m = [1]
    for n in range(1, order + 1):
        total = 0
        for s in range(1, n + 1):
            k = cum[s]
            if k:
                total += k * _compositions_sum(m, n - s, s)
        m.append(total)
    return m


def _compositions_sum(m, total: int, parts: int):
    # sum over (i_1..i_parts) >= 0 with sum total of prod m[i_j]
    row = [0] * (total + 1)
    row[0] = 1
    for _ in range(parts):
        row = [sum(row[j] * m[i - j] for j in range(i + 1)) for i in range(total + 1)]
    return row[total]


def cumulants_from_moments(moments: Sequence) -> CumulantSpec:
    """Invert the moment-cumulant relation; ``moments[0]`` must be 1."""
    if len(moments) < 2:
        raise InvalidInputError("order must be >= 1")
    if moments[0] != 1:
        raise InvalidInputError("moments[0] must be 1")
    m = list(moments)
    k: dict[int, object] = {}
    for n in range(1, len(m)):
        spec = CumulantSpec(dict(k))
        partial = moments_from_cumulants(spec, n)[n]
        k[n] = m[n] - partial
    return CumulantSpec(k)


@dataclass(frozen=True)
class IndependenceReport:
    value_p: complex
    value_q: complex
    difference: float
    passed: bool


def check_p_independence(model: ModelState, p: str, q: str, word: WordSpec, tol: float = 1e-10) -> IndependenceReport:
    """Evaluate the word normalized at ``p`` and at ``q >= p``; they must agree."""
    for name in (p, q):
        if not model.is_projection(name):
            raise InvalidInputError(f"{name!r} is not a projection")
    if not model.below(p, q):
        raise InvalidInputError(f"{p!r} is not below {q!r}")
    wp, wq = word.with_projection(p), word.with_projection(q)
    _validate_word(model, wp, MAX_WORD_LENGTH)
    vp = speicher_moment(model, CumulantSpec.semicircular(model.phi_of([p]).real), wp)
    vq = speicher_moment(model, CumulantSpec.semicircular(model.phi_of([q]).real), wq)
    diff = abs(vp - vq)
    return IndependenceReport(vp, vq, diff, diff < tol)


@dataclass(frozen=True)
class ScalingReport:
    lam: float
    scaled: complex
    expected: complex
    ratio: complex
    passed: bool


def scaling_covariance(model: ModelState, lam, word: WordSpec, tol: float = 1e-10) -> ScalingReport:
    """Scale the weights by ``lam`` and ``X`` by ``lam**-1/2``; expect ``lam * psi``."""
    if not lam > 0:
        raise InvalidInputError("lambda must be positive")
    scaled_model = model.with_weights([w * Fraction(lam) for w in model.weights])
    scaled = float(lam) ** (-word.n / 2) * psi_word(scaled_model, word)
    expected = float(lam) * psi_word(model, word)
    if abs(expected) < 1e-300:
        ratio = 1 + 0j if abs(scaled) < 1e-300 else complex(math.inf)
    else:
        ratio = scaled / expected
    return ScalingReport(float(lam), scaled, expected, ratio, abs(ratio - 1) < tol)


@dataclass(frozen=True)
class CompressedMomentsReport:
    variance: float
    moments: tuple
    predicted: tuple
    radius_estimates: tuple
    spectral_radius: float
    passed: bool


def compressed_semicircular_moments(c_q, order: int, max_order: int = MAX_WORD_LENGTH) -> CompressedMomentsReport:
    """Moments of ``qXq`` in the ``q``-normalized state, computed with ``psi_word``."""
    if order % 2:
        raise InvalidInputError("order must be even")
    if order > max_order:
        raise InvalidInputError(f"order {order} exceeds the configured maximum {max_order}")
    c = Fraction(c_q)
    if c <= 0:
        raise InvalidInputError("phi(q) must be positive")
    model = ModelState([1], [c], {"q": [[[1]]]})
    moments = [
        (psi_word(model, WordSpec(["q"] * (k + 1), "q"), max_n=max_order) / float(c)).real
        for k in range(order + 1)
    ]
    predicted = tuple(float(semicircle_moment(k, c)) for k in range(order + 1))
    radius = 2 * math.sqrt(c)
    roots = tuple(moments[k] ** (1 / k) for k in range(2, order + 1, 2))
    ok = all(abs(a - b) <= 1e-12 * max(1, abs(b)) for a, b in zip(moments, predicted))
    ok = ok and all(x < y for x, y in zip(roots, roots[1:])) and all(r < radius for r in roots)
    return CompressedMomentsReport(float(c), tuple(moments), predicted, roots, radius, ok)

"""Random-matrix Monte Carlo oracle for the moment engine.

Randomness contract: trial ``i`` draws from ``numpy.random.Philox`` keyed by
``seed ^ i``.  Gaussians come from Box-Muller on ``1 - Generator.random()``
so that ``log`` never sees zero.  Generators are drawn in sorted name order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError
from .moments import ModelState, WordSpec, psi_word, semicircle_moment

BIAS_BUDGET = 5.0


@dataclass(frozen=True)
class SimulationConfig:
    N: int = 1000
    trials: int = 50
    seed: int = 20240601
    max_moment_order: int = 6

    def __post_init__(self):
        if self.N < 8:
            raise InvalidInputError("matrix dimension N must be >= 8")
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        if self.max_moment_order < 2 or self.max_moment_order % 2:
            raise InvalidInputError("max_moment_order must be an even integer >= 2")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must fit in 64 unsigned bits")

    def rng(self, trial: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed ^ trial))

    @property
    def bias(self) -> float:
        return BIAS_BUDGET / self.N


def standard_normals(rng: np.random.Generator, count: int) -> np.ndarray:
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2 * math.pi * u2)
    z[1::2] = r * np.sin(2 * math.pi * u2)
    return z[:count]


def sample_gue(rng: np.random.Generator, n: int) -> np.ndarray:
    """Hermitian matrix with entry variance ``1/n``; the diagonal is real."""
    z = standard_normals(rng, 2 * n * n).reshape(2, n, n)
    g = z[0] + 1j * z[1]
    return (g + g.conj().T) / (2 * math.sqrt(n))


def sample_circular(rng: np.random.Generator, n: int) -> np.ndarray:
    return (sample_gue(rng, n) + 1j * sample_gue(rng, n)) / math.sqrt(2)


@dataclass(frozen=True)
class Generator:
    kind: str  # "gue" | "circular" | "diagonal"
    diagonal: tuple = ()

    def __post_init__(self):
        if self.kind not in ("gue", "circular", "diagonal"):
            raise InvalidInputError(f"unknown generator kind {self.kind!r}")
        if self.kind == "diagonal" and not self.diagonal:
            raise InvalidInputError("diagonal generator needs its entries")


@dataclass(frozen=True)
class EnsembleSpec:
    generators: Mapping[str, Generator] = field(default_factory=dict)

    def draw(self, rng: np.random.Generator, n: int) -> dict:
        out = {}
        for name in sorted(self.generators):
            g = self.generators[name]
            if g.kind == "gue":
                out[name] = sample_gue(rng, n)
            elif g.kind == "circular":
                out[name] = sample_circular(rng, n)
            else:
                if len(g.diagonal) != n:
                    raise InvalidInputError(f"diagonal {name!r} has {len(g.diagonal)} entries, expected {n}")
                out[name] = np.asarray(g.diagonal, dtype=complex)
        return out


def parse_word(word) -> list:
    """``"z* z"`` or ``["z*", "z"]`` to ``[("z", True), ("z", False)]``."""
    tokens = word.split() if isinstance(word, str) else list(word)
    return [(t[:-1], True) if t.endswith("*") else (t, False) for t in tokens]


def _factor(mats: dict, name: str, adjoint: bool):
    try:
        m = mats[name]
    except KeyError:
        raise InvalidInputError(f"undefined generator {name!r}") from None
    return m.conj() if m.ndim == 1 and adjoint else (m.conj().T if adjoint else m)


def _product(factors: list):
    # Diagonal factors are stored as vectors and applied by broadcasting.
    acc = None
    for f in factors:
        if acc is None:
            acc = f
        elif acc.ndim == 1 and f.ndim == 1:
            acc = acc * f
        elif acc.ndim == 1:
            acc = acc[:, None] * f
        elif f.ndim == 1:
            acc = acc * f[None, :]
        else:
            acc = acc @ f
    return acc


class _Products:
    """Memoized prefix products of token tuples for one trial's matrices."""

    def __init__(self, mats: dict):
        self.mats = mats
        self.cache: dict = {}

    def get(self, tokens: tuple):
        if tokens in self.cache:
            return self.cache[tokens]
        name, adj = tokens[-1]
        last = _factor(self.mats, name, adj)
        out = last if len(tokens) == 1 else _product([self.get(tokens[:-1]), last])
        self.cache[tokens] = out
        return out

    def trace(self, word) -> complex:
        tokens = tuple(parse_word(word))
        if not tokens:
            return 1 + 0j
        half = len(tokens) // 2
        right = self.get(tokens[half:])
        n = right.shape[0]
        if not half:
            tr = right.sum() if right.ndim == 1 else np.trace(right)
            return complex(tr) / n
        left = self.get(tokens[:half])
        if left.ndim == 1 and right.ndim == 1:
            tr = (left * right).sum()
        elif left.ndim == 1:
            tr = (left * np.diag(right)).sum()
        elif right.ndim == 1:
            tr = (np.diag(left) * right).sum()
        else:
            tr = (left * right.T).sum()
        return complex(tr) / n


def normalized_trace(mats: dict, word) -> complex:
    return _Products(mats).trace(word)


def word_traces(mats: dict, words: Sequence) -> list:
    """Real parts of normalized traces, sharing prefix products across words."""
    prods = _Products(mats)
    return [prods.trace(w).real for w in words]


@dataclass(frozen=True)
class Estimate:
    estimate: float
    stderr: float


def _summarize(samples: Sequence[float]) -> Estimate:
    x = np.asarray(samples, dtype=float)
    err = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return Estimate(float(x.mean()), err)


def run_trials(cfg: SimulationConfig, draw: Callable, statistics: Callable) -> list:
    """Per trial, ``statistics(draw(rng))`` yields a vector; returns one Estimate per entry."""
    rows = [np.asarray(statistics(draw(cfg.rng(i))), dtype=float) for i in range(cfg.trials)]
    data = np.vstack(rows)
    return [_summarize(data[:, j]) for j in range(data.shape[1])]


def empirical_word_moments(cfg: SimulationConfig, ensemble: EnsembleSpec, words: Sequence) -> list:
    for w in words:
        for name, _ in parse_word(w):
            if name not in ensemble.generators:
                raise InvalidInputError(f"undefined generator {name!r}")
    return run_trials(
        cfg,
        lambda rng: ensemble.draw(rng, cfg.N),
        lambda mats: word_traces(mats, words),
    )


def empirical_word_moment(cfg: SimulationConfig, ensemble: EnsembleSpec, word) -> tuple:
    """Mean normalized trace of the word product over trials, with its standard error."""
    e = empirical_word_moments(cfg, ensemble, [word])[0]
    return e.estimate, e.stderr


@dataclass(frozen=True)
class CheckRow:
    check: str
    name: str
    order: int
    estimate: float
    stderr: float
    prediction: float
    tolerance: float
    passed: bool

    CSV_FIELDS = ("check", "name", "order", "estimate", "stderr", "prediction", "tolerance", "pass")

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "name": self.name,
            "order": self.order,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "prediction": self.prediction,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class Report:
    check: str
    rows: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def row(self, name: str) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def _row(check, name, order, est: Estimate, prediction, tolerance) -> CheckRow:
    prediction = float(prediction)
    return CheckRow(
        check, name, order, est.estimate, est.stderr, prediction, tolerance,
        bool(abs(est.estimate - prediction) <= tolerance),
    )


def _stat_tol(cfg, est: Estimate) -> float:
    return 3 * est.stderr + cfg.bias


def gue_moments(cfg: SimulationConfig, order: int | None = None) -> Report:
    """Moments of a single GUE draw against the Catalan numbers (5% relative)."""
    order = cfg.max_moment_order if order is None else order

    def stats(mats):
        ev = np.linalg.eigvalsh(mats["s"])
        return [np.mean(ev**k) for k in range(1, order + 1)]

    ests = run_trials(cfg, lambda rng: {"s": sample_gue(rng, cfg.N)}, stats)
    rows = []
    for k, est in enumerate(ests, start=1):
        pred = semicircle_moment(k, 1)
        tol = 0.05 * pred if pred else _stat_tol(cfg, est)
        rows.append(_row("gue", f"m{k}", k, est, pred, tol))
    return Report("gue", tuple(rows))


def verify_compressed_semicircular(cfg: SimulationConfig, q_trace) -> Report:
    """Corner ``qsq`` of a GUE for a diagonal projection of trace ``q_trace``."""
    q = Fraction(q_trace)
    if not 0 < q <= 1:
        raise InvalidInputError("q_trace must lie in (0, 1]")
    k = math.floor(q * cfg.N)
    if k < 4:
        raise InvalidInputError("q_trace * N must be at least 4")
    order = cfg.max_moment_order

    def stats(mats):
        ev = np.linalg.eigvalsh(mats["s"][:k, :k])
        return [np.mean(ev**j) for j in range(1, order + 1)] + [np.max(np.abs(ev))]

    ests = run_trials(cfg, lambda rng: {"s": sample_gue(rng, cfg.N)}, stats)
    rows = []
    for j, est in enumerate(ests[:-1], start=1):
        pred = semicircle_moment(j, q)
        rows.append(_row("compressed", f"m{j}", j, est, pred, _stat_tol(cfg, est)))
    radius = 2 * math.sqrt(q)
    rows.append(_row("compressed", "norm", 0, ests[-1], radius, 0.1 * radius))
    return Report("compressed", tuple(rows))


def _block_sizes(n: int, parts: int) -> list:
    base, extra = divmod(n, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


FREENESS_VALUES = {
    "a0": (1.0, 2.0, 3.0, 4.0),
    "a1": (0.0, 1.0, 0.0, 1.0),
    "a2": (1.0, -1.0, 2.0, 0.5),
}


def freeness_model(N: int) -> tuple:
    """Four-block diagonal model and the matching length-``N`` diagonals."""
    sizes = _block_sizes(N, 4)
    weights = [Fraction(s, N) for s in sizes]
    elements = {name: [[[v]] for v in vals] for name, vals in FREENESS_VALUES.items()}
    elements["1"] = [[[1]] for _ in sizes]
    model = ModelState([1] * 4, weights, elements)
    diags = {name: tuple(np.repeat(vals, sizes)) for name, vals in FREENESS_VALUES.items()}
    return model, diags


def verify_freeness(cfg: SimulationConfig, order: int | None = None) -> Report:
    """Alternating centered words in ``s`` and a diagonal ``a`` vanish; one mixed word is predicted."""
    order = cfg.max_moment_order if order is None else order
    if order > cfg.max_moment_order:
        raise InvalidInputError("order exceeds max_moment_order")
    model, diags = freeness_model(cfg.N)
    a0 = np.asarray(diags["a0"])
    gens = {"s": Generator("gue"), "ac": Generator("diagonal", tuple(a0 - a0.mean()))}
    gens.update({k: Generator("diagonal", v) for k, v in diags.items()})
    ensemble = EnsembleSpec(gens)
    alternating = [" ".join(["s", "ac"] * (L // 2) + (["s"] if L % 2 else [])) for L in range(2, order + 1)]
    mixed = "a0 s a1 s a2"
    ests = empirical_word_moments(cfg, ensemble, alternating + [mixed])
    rows = [
        _row("freeness", w.replace(" ", "."), len(w.split()), e, 0.0, _stat_tol(cfg, e))
        for w, e in zip(alternating, ests)
    ]
    pred = psi_word(model, WordSpec(["a0", "a1", "a2"], "1")).real
    rows.append(_row("freeness", "a0.s.a1.s.a2", 2, ests[-1], pred, _stat_tol(cfg, ests[-1])))
    return Report("freeness", tuple(rows))


def assemble_Y(rng: np.random.Generator, n: int, b: int) -> np.ndarray:
    """``n x n`` block matrix: GUE blocks on the diagonal, circular ``z`` above, ``z*`` below."""
    Y = np.empty((n * b, n * b), dtype=complex)
    for i in range(n):
        Y[i * b:(i + 1) * b, i * b:(i + 1) * b] = sample_gue(rng, b)
        for j in range(i + 1, n):
            z = sample_circular(rng, b)
            Y[i * b:(i + 1) * b, j * b:(j + 1) * b] = z
            Y[j * b:(j + 1) * b, i * b:(i + 1) * b] = z.conj().T
    return Y


def Y_model(E_size: int, K: int) -> ModelState:
    """``B = M_K`` repeated ``E_size`` times with the unnormalized trace."""
    n = E_size * K
    unit = [np.zeros((K, K)) for _ in range(E_size)]
    unit[0][0, 0] = 1
    return ModelState(
        [K] * E_size, [K] * E_size,
        {"1": [np.eye(K) for _ in range(E_size)], "b": unit},
    )


def verify_Y_construction(E_size: int, K: int, cfg: SimulationConfig) -> Report:
    """Moments of ``Y`` and mixed words with ``b = g(1,1;1,1)`` under ``n^-1 (tau x Tr)``."""
    if E_size < 1 or K < 1:
        raise InvalidInputError("E_size and K must be positive")
    n = E_size * K
    if cfg.N % n:
        raise InvalidInputError(f"N={cfg.N} is not divisible by n={n}")
    b = cfg.N // n
    order = cfg.max_moment_order
    bvec = np.zeros(cfg.N)
    bvec[:b] = 1.0
    bc = bvec - 1.0 / n
    mats_fixed = {"b": bvec.astype(complex), "bc": bc.astype(complex)}
    alternating = [" ".join(["Y", "bc"] * (L // 2)) for L in range(2, order + 1, 2)]
    moment_words = [" ".join(["Y"] * k) for k in range(1, order + 1)]
    mixed = "Y b Y b"
    words = moment_words + alternating + [mixed]

    def draw(rng):
        return {"Y": assemble_Y(rng, n, b), **mats_fixed}

    ests = run_trials(cfg, draw, lambda mats: word_traces(mats, words))
    model = Y_model(E_size, K)
    rows = []
    for k, est in zip(range(1, order + 1), ests):
        pred = psi_word(model, WordSpec(["1"] * (k + 1), "1")).real / n
        tol = 0.03 if k == 2 else _stat_tol(cfg, est) + 0.05 * pred
        rows.append(_row("Y", f"m{k}", k, est, pred, tol))
    for w, est in zip(alternating, ests[order:]):
        rows.append(_row("Y", w.replace(" ", "."), len(w.split()), est, 0.0, _stat_tol(cfg, est)))
    pred = psi_word(model, WordSpec(["1", "b", "b"], "1")).real / n
    rows.append(_row("Y", "Y.b.Y.b", 2, ests[-1], pred, _stat_tol(cfg, ests[-1])))
    return Report("Y", tuple(rows))


def compression_error_trend(q_trace, dims: Sequence[int], trials: int, seeds: Sequence[int], order: int = 4) -> list:
    """Mean absolute error of the compressed corner, moments and norm, per dimension.

    Seeds should be far apart: with the ``seed ^ trial`` rule, seeds that
    differ only in low bits share trial streams.
    """
    out = []
    for N in dims:
        errs = []
        for seed in seeds:
            rep = verify_compressed_semicircular(SimulationConfig(N, trials, seed, order), q_trace)
            errs.extend(abs(r.estimate - r.prediction) for r in rep.rows)
        out.append(float(np.mean(errs)))
    return out

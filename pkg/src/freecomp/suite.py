"""Named verification cases with frozen expected values.

Expected values are literals, never recomputed by the code under test, so a
corrupted constant anywhere in the calculus turns the matching case red.
"""
from __future__ import annotations

import fnmatch
from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Callable

from .errors import InvalidInputError, NoWitnessError
from .fdim import (
    INF,
    ALL_RATIONALS,
    C,
    LF,
    M,
    R,
    FreeProductExpression,
    algebra,
    comprirrat_data,
    compress_factor,
    compress_free_product,
    fdim,
    free_product,
    fundamental_group_witness,
    opaque,
    shlyakhtenko_consistency,
    single,
)
from .moments import ModelState, WordSpec, check_p_independence, psi_word, semicircle_moment
from .nc import enumerate_nc, enumerate_nc_pairings, kreweras_complement, parse_partition
from .surd import Surd, sqrt_exact


@dataclass(frozen=True)
class Case:
    name: str
    anchor: str
    provenance: str  # "PAPER" or "DERIVED"
    run: Callable[[], object]
    expected: object
    tolerance: float = 0.0


@dataclass(frozen=True)
class CaseResult:
    name: str
    anchor: str
    provenance: str
    expected: str
    observed: str
    passed: bool


@dataclass(frozen=True)
class SuiteReport:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]


def _opaques(k):
    return FreeProductExpression(tuple(single(opaque(f"A{i}")) for i in range(1, k + 1)), k)


def _tail(k, t):
    return compress_free_product(_opaques(k), t).extras[-1]


def _stickout_source(n):
    return free_product([single(M(n)), algebra(C(Q(1, n)), C(Q(n - 1, n)))])


def _witness_rules(gens, t):
    fp = FreeProductExpression((single(opaque("A", gens)),), INF)
    try:
        return tuple(fundamental_group_witness(fp, t).rules())
    except NoWitnessError:
        return "no witness"


def _mixed_model():
    return ModelState(
        [1, 1, 1], [Q(1, 4), Q(1, 2), Q(1, 4)],
        {"p": [[[1]], [[0]], [[0]]], "q": [[[1]], [[1]], [[0]]]},
    )


def _build_cases() -> list:
    cases = []
    add = cases.append

    for k in (2, 3, 4):
        for n in (2, 3):
            add(Case(
                f"compr.one-over-n.I{k}.n{n}",
                "cutting a free product of |I| factors by 1/n adds L(F_k), k = (|I|-1)(n^2-1)",
                "PAPER", lambda k=k, n=n: _tail(k, Q(1, n)), single(LF((k - 1) * (n * n - 1))),
            ))

    add(Case("compr.irrational.I2.t2_3.P", "irrational cut, factor case for P", "PAPER",
             lambda: comprirrat_data(2, Q(2, 3)).P, single(LF(Q(9, 4)))))
    add(Case("compr.irrational.I2.t2_3.N", "irrational cut, factor case for N", "PAPER",
             lambda: comprirrat_data(2, Q(2, 3)).N, single(LF(Q(14, 9)))))
    add(Case("compr.irrational.I2.t4_5.P", "irrational cut, atomic case for P", "PAPER",
             lambda: comprirrat_data(2, Q(4, 5)).P, algebra(LF(Q(5, 3), Q(3, 4)), C(Q(1, 4)))))
    add(Case("compr.irrational.I2.t4_5.N", "irrational cut, atomic case for N", "PAPER",
             lambda: comprirrat_data(2, Q(4, 5)).N, algebra(LF(Q(11, 8), Q(4, 5)), C(Q(1, 5)))))

    for n in (2, 3, 4):
        add(Case(f"compr.stickout.n{n}.source", "M_n * (C_{1/n} + C_{(n-1)/n}) is L(F_{(n^2+2n-3)/n^2})",
                 "PAPER", lambda n=n: _stickout_source(n), single(LF(Q(n * n + 2 * n - 3, n * n)))))
        add(Case(f"compr.stickout.n{n}.tail", "its 1/n corner is L(F_{2(n-1)})", "PAPER",
                 lambda n=n: compress_factor(_stickout_source(n), Q(1, n)), single(LF(2 * (n - 1)))))

    add(Case("compr.cut-free-product.lf", "tail L(F_y) when y = (|I|-1)(t^-2 - 1) > 1", "PAPER",
             lambda: _tail(2, Q(1, 2)), single(LF(3))))
    add(Case("compr.cut-free-product.surd-boundary", "t^2 = 1/2 with |I| = 2 gives y = 1 and tail R",
             "PAPER", lambda: _tail(2, sqrt_exact(Q(1, 2))), single(R())))
    add(Case("compr.cut-free-product.atom", "y < 1 gives R + C_alpha with 1 - alpha^2 = y", "PAPER",
             lambda: _tail(2, Q(3, 4)),
             algebra(R(Surd(1, Q(-1, 3), 2)), C(Surd(0, Q(1, 3), 2)))))
    add(Case("compr.cut-free-product.infinite", "an infinite free product absorbs its L(F_inf) tail",
             "PAPER", lambda: compress_free_product(
                 FreeProductExpression((single(opaque("A")),), INF), Q(1, 3)).extras, ()))
    add(Case("compr.shlyakhtenko", "(L(F_2) * L(F_s))_t against L(F_2)_t * L(F_{s/t^2}), s=1, t=1/2",
             "PAPER", lambda: (lambda r: (r.left, r.right))(shlyakhtenko_consistency(1, Q(1, 2), single(LF(2)))),
             (single(LF(9)), single(LF(9)))))

    add(Case("fdim.free-product.M2^3", "free dimension is additive: 3 (1 - 1/4) = 9/4", "DERIVED",
             lambda: free_product([single(M(2))] * 3), single(LF(Q(9, 4)))))
    add(Case("fdim.free-product.M2-D", "M_2 * (C_1/2 + C_1/2) = L(F_{5/4})", "DERIVED",
             lambda: free_product([single(M(2)), algebra(C(Q(1, 2)), C(Q(1, 2)))]), single(LF(Q(5, 4)))))
    add(Case("fdim.two-point", "fdim(C_r + C_{1-r}) = 2r(1-r), r = 1/3", "PAPER",
             lambda: fdim(algebra(C(Q(1, 3)), C(Q(2, 3)))), Q(4, 9)))
    add(Case("fdim.atom-beside-lf", "fdim(L(F_z)[1-b] + C[b]) = 1 + (1-b)^2 (z-1) - b^2, z=3, b=1/2",
             "PAPER", lambda: fdim(algebra(LF(3, Q(1, 2)), C(Q(1, 2)))), Q(5, 4)))
    add(Case("fdim.lf-compression", "L(F_n)_{1/k} = L(F_{1+k^2(n-1)}), n=2, k=3", "PAPER",
             lambda: compress_factor(single(LF(2)), Q(1, 3)), single(LF(10))))

    add(Case("fg.witness.all-rationals", "intersection of component fundamental groups lies in F(M)",
             "PAPER", lambda: _witness_rules(ALL_RATIONALS, Q(3, 7)),
             ("compress-free-product", "absorb-lf-infinity", "conclude-isomorphic")))
    add(Case("fg.witness.inverted", "scales above one are inverted first", "PAPER",
             lambda: _witness_rules(ALL_RATIONALS, Q(5, 2)),
             ("invert-scale", "compress-free-product", "absorb-lf-infinity", "conclude-isomorphic")))
    add(Case("fg.no-witness", "generators {2} cannot produce t = 3/7", "DERIVED",
             lambda: _witness_rules([Q(2)], Q(3, 7)), "no witness"))

    add(Case("nc.count.n8", "|NC(8)| = C_8", "DERIVED", lambda: len(enumerate_nc(range(1, 9))), 1430))
    add(Case("nc.pairings.n12", "|NCP(12)| = C_6", "DERIVED",
             lambda: len(enumerate_nc_pairings(range(2, 25, 2))), 132))
    add(Case("nc.kreweras.2-4.6-8", "complement of {2,4}{6,8} on the odd labels", "DERIVED",
             lambda: str(kreweras_complement(parse_partition("{2,4}{6,8}"))), "{1,5,9}{3}{7}"))

    add(Case("moments.semicircle.m6", "semicircle moment C_3 c^3, c = 1", "PAPER",
             lambda: float(semicircle_moment(6, 1)), 5.0, 1e-12))
    add(Case("moments.pairing-sum.n6", "all a_j = p, phi(p) = 1/4: C_3 (1/4)^4", "DERIVED",
             lambda: psi_word(_mixed_model(), WordSpec(["p"] * 7, "p")).real, 5 / 256, 1e-12))
    add(Case("moments.p-independence", "psi_p and psi_q agree for p <= q", "PAPER",
             lambda: check_p_independence(_mixed_model(), "p", "q", WordSpec(["p"] * 5, "p")).difference,
             0.0, 1e-10))
    return cases


CASES = _build_cases()


def case_names() -> list:
    return [c.name for c in CASES]


def _compare(case: Case, observed) -> bool:
    if case.tolerance:
        return abs(observed - case.expected) <= case.tolerance
    return observed == case.expected


def run_case(case: Case) -> CaseResult:
    try:
        observed = case.run()
        passed = _compare(case, observed)
        shown = _show(observed)
    except Exception as exc:  # a crashing case is a failing case
        passed, shown = False, f"error: {type(exc).__name__}: {exc}"
    return CaseResult(case.name, case.anchor, case.provenance, _show(case.expected), shown, passed)


def _show(x) -> str:
    if isinstance(x, tuple):
        return "(" + ", ".join(_show(v) for v in x) + ")"
    return str(x)


def run_suite(pattern: str | None = None) -> SuiteReport:
    """Run every case whose name matches the glob ``pattern``."""
    selected = [c for c in CASES if pattern is None or fnmatch.fnmatchcase(c.name, pattern)]
    if not selected:
        raise InvalidInputError(f"no verification case matches {pattern!r}")
    return SuiteReport(tuple(run_case(c) for c in selected))

import math
from fractions import Fraction as Q

import numpy as np
import pytest
from scipy.integrate import quad

from freecomp.errors import InvalidInputError
from freecomp.moments import (
    CumulantSpec,
    ModelState,
    WordSpec,
    check_p_independence,
    compressed_semicircular_moments,
    cumulants_from_moments,
    moments_from_cumulants,
    psi_word,
    psi_word_detail,
    scaling_covariance,
    semicircle_moment,
    speicher_moment,
)

import oracles


def diag_model(weights, **diagonals):
    """1x1 blocks; each element is given by its list of block values."""
    return ModelState(
        [1] * len(weights), weights,
        {name: [[[v]] for v in vals] for name, vals in diagonals.items()},
    )


def random_model(rng, dims, p_mask):
    weights = [Q(int(rng.integers(1, 6)), int(rng.integers(1, 6))) for _ in dims]
    p = [np.eye(d) * m for d, m in zip(dims, p_mask)]
    elements = {"p": p}
    for i in range(4):
        blocks = []
        for d, m in zip(dims, p_mask):
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            blocks.append(a * m)
        elements[f"a{i}"] = blocks
    return ModelState(dims, weights, elements)


# --- semicircle law --------------------------------------------------------


def test_semicircle_examples():
    assert semicircle_moment(2, 1) == 1
    assert semicircle_moment(4, 1) == 2
    assert semicircle_moment(6, 1) == 5
    assert semicircle_moment(4, Q(1, 2)) == Q(1, 2)
    assert semicircle_moment(5, 1) == 0


@pytest.mark.parametrize("c", [1.0, 0.5, 0.3])
@pytest.mark.parametrize("k", range(0, 13))
def test_semicircle_against_quadrature(k, c):
    r = 2 * math.sqrt(c)
    val, _ = quad(lambda t: t**k * math.sqrt(max(4 * c - t * t, 0.0)), -r, r, epsabs=1e-11, epsrel=1e-11)
    assert float(semicircle_moment(k, c)) == pytest.approx(val / (2 * math.pi * c), abs=1e-8)


def test_semicircle_rejects_nonpositive_variance():
    with pytest.raises(InvalidInputError):
        semicircle_moment(2, 0)


# --- pairing sum -----------------------------------------------------------


def test_n2_word_is_phi_a0a2_times_phi_a1():
    rng = np.random.default_rng(0)
    model = random_model(rng, [2, 1, 3], [1, 1, 1])
    word = WordSpec(["a0", "a1", "a2"], "p")
    expected = model.phi_of(["a0", "a2"]) * model.phi_of(["a1"])
    assert psi_word(model, word) == pytest.approx(expected, abs=1e-12)
    detail = psi_word_detail(model, word)
    assert detail.pairing_count == 1
    assert [(str(p), str(c)) for p, c, _ in detail.pairings] == [("{2,4}", "{1,5}{3}")]


@pytest.mark.parametrize("c", [Q(1), Q(1, 3), Q(5, 2)])
def test_constant_coefficients_n4(c):
    model = diag_model([c], p=[1])
    assert psi_word(model, WordSpec(["p"] * 5, "p")).real == pytest.approx(2 * float(c) ** 3, rel=1e-14)


def test_empty_word_is_phi():
    model = diag_model([Q(1, 3), Q(2, 3)], p=[1, 1], a=[2, 5])
    assert psi_word(model, WordSpec(["a"], "p")) == pytest.approx(Q(1, 3) * 2 + Q(2, 3) * 5)


def test_odd_words_vanish():
    model = diag_model([Q(1)], p=[1])
    assert psi_word(model, WordSpec(["p"] * 4, "p")) == 0


def brute_psi(model, word):
    # Independent route: complements from the exhaustive maximality oracle.
    n = word.n
    evens, odds = list(range(2, 2 * n + 1, 2)), list(range(1, 2 * n + 2, 2))
    total = 0
    for pi in oracles.brute_ncp(evens):
        comp = oracles.brute_kreweras(pi, odds)
        term = 1
        for block in comp:
            term *= model.phi_of([word.coefficients[(i - 1) // 2] for i in block])
        total += term
    return total


@pytest.mark.parametrize("seed", range(6))
def test_pairing_sum_against_brute_complements(seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng, [1, 2], [1, 1])
    n = 2 * int(rng.integers(1, 4))
    word = WordSpec([f"a{int(i)}" for i in rng.integers(0, 4, size=n + 1)], "p")
    assert psi_word(model, word) == pytest.approx(brute_psi(model, word), abs=1e-10)


def test_coefficients_must_live_in_the_corner():
    model = diag_model([Q(1, 2), Q(1, 2)], p=[1, 0], a=[1, 1e-6])
    with pytest.raises(InvalidInputError, match="corner"):
        psi_word(model, WordSpec(["a", "a", "a"], "p"))
    tiny = diag_model([Q(1, 2), Q(1, 2)], p=[1, 0], a=[1, 1e-14])
    psi_word(tiny, WordSpec(["a", "a", "a"], "p"))


def test_word_length_cap_is_configurable():
    model = diag_model([Q(1)], p=[1])
    long = WordSpec(["p"] * 15, "p")
    with pytest.raises(InvalidInputError, match="maximum"):
        psi_word(model, long)
    assert psi_word(model, long, max_n=14).real == pytest.approx(429)


def test_model_validation():
    with pytest.raises(InvalidInputError):
        ModelState([1, 2], [Q(1, 2)])
    with pytest.raises(InvalidInputError):
        ModelState([1], [Q(0)])
    with pytest.raises(InvalidInputError, match="shape"):
        ModelState([2], [1], {"a": [[[1]]]})
    with pytest.raises(InvalidInputError, match="unknown element"):
        diag_model([1], p=[1]).phi_of(["q"])


# --- cumulant-weighted sum -------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_semicircular_speicher_sum_equals_pairing_sum(seed):
    rng = np.random.default_rng(100 + seed)
    model = random_model(rng, [1, 2, 2], [1, 1, 0])
    c = model.phi_of(["p"]).real
    n = int(rng.integers(0, 9))
    word = WordSpec([f"a{int(i)}" for i in rng.integers(0, 4, size=n + 1)], "p")
    got = speicher_moment(model, CumulantSpec.semicircular(c), word)
    assert abs(got - psi_word(model, word)) < 1e-12 * max(1, abs(got))


def test_constant_variable_cumulant():
    model = diag_model([Q(1, 4), Q(3, 4)], p=[1, 1], a=[2, 3], b=[1, -1])
    got = speicher_moment(model, CumulantSpec({1: 2.5}), WordSpec(["a", "b"], "p"))
    assert got == pytest.approx(2.5 * model.phi_of(["a", "b"]))


def test_zero_cumulants_give_zero():
    model = diag_model([Q(1)], p=[1])
    for n in (1, 2, 5):
        assert speicher_moment(model, CumulantSpec({}), WordSpec(["p"] * (n + 1), "p")) == 0


def test_semicircular_spec_needs_positive_variance():
    with pytest.raises(InvalidInputError):
        CumulantSpec.semicircular(0)


# --- moments and cumulants -------------------------------------------------


def test_semicircle_moments_invert_to_pure_variance():
    moments = [1, 0, 1, 0, 2, 0, 5, 0, 14]
    k = cumulants_from_moments(moments)
    assert {m: k[m] for m in range(1, 9)} == {m: (1 if m == 2 else 0) for m in range(1, 9)}


def test_point_mass():
    assert moments_from_cumulants(CumulantSpec({1: 1}), 8) == [1] * 9


def test_recursion_matches_nc_enumeration():
    k = {1: Q(1, 2), 2: Q(3), 3: Q(-1, 4), 5: Q(2)}
    assert moments_from_cumulants(CumulantSpec(k), 7) == oracles.brute_moments_from_cumulants(k, 7)


def test_inversion_matches_mobius_oracle():
    m = [Q(1), Q(1, 3), Q(2), Q(-1, 2), Q(5), Q(7, 3), Q(1, 9)]
    k = cumulants_from_moments(m)
    brute = oracles.brute_cumulants(m, 6)
    assert all(k[n] == brute[n] for n in range(1, 7))


@pytest.mark.parametrize("seed", range(20))
def test_random_roundtrip(seed):
    rng = np.random.default_rng(seed)
    m = [1.0] + list(rng.normal(size=8))
    back = moments_from_cumulants(cumulants_from_moments(m), 8)
    assert np.allclose(back, m, atol=1e-10, rtol=0)


def test_order_checks():
    with pytest.raises(InvalidInputError):
        moments_from_cumulants(CumulantSpec({2: 1}), 0)
    with pytest.raises(InvalidInputError):
        cumulants_from_moments([1])
    with pytest.raises(InvalidInputError):
        cumulants_from_moments([2, 0, 1])


# --- normalization independence and scaling --------------------------------


def test_identical_projections_agree_trivially():
    model = diag_model([Q(1, 2), Q(1, 2)], one=[1, 1], a=[1, 2], b=[3, -1])
    rep = check_p_independence(model, "one", "one", WordSpec(["a", "b", "a"], "one"))
    assert rep.difference == 0 and rep.passed


@pytest.mark.parametrize("seed", range(5))
def test_p_inside_q_random_words(seed):
    rng = np.random.default_rng(seed)
    vals = {f"a{i}": [rng.normal(), 0, 0] for i in range(3)}
    model = diag_model([Q(1, 4), Q(1, 4), Q(1, 2)], p=[1, 0, 0], q=[1, 1, 0], **vals)
    word = WordSpec([f"a{int(i)}" for i in rng.integers(0, 3, size=5)], "p")
    assert check_p_independence(model, "p", "q", word).passed


def test_constant_word_closed_form():
    model = diag_model([Q(1, 4), Q(1, 2), Q(1, 4)], p=[1, 0, 0], q=[1, 1, 0])
    rep = check_p_independence(model, "p", "q", WordSpec(["p"] * 7, "p"))
    assert rep.value_p == pytest.approx(5 / 256, abs=1e-15)
    assert rep.value_q == pytest.approx(5 / 256, abs=1e-15)


def test_p_must_be_below_q():
    model = diag_model([Q(1, 2), Q(1, 2)], p=[1, 0], q=[0, 1])
    with pytest.raises(InvalidInputError, match="not below"):
        check_p_independence(model, "p", "q", WordSpec(["p"], "p"))
    bad = diag_model([Q(1, 2), Q(1, 2)], p=[1, 0], q=[2, 1])
    with pytest.raises(InvalidInputError, match="projection"):
        check_p_independence(bad, "p", "q", WordSpec(["p"], "p"))


def test_scaling_identity_and_n2():
    model = diag_model([Q(1, 3), Q(2, 3)], p=[1, 1], a=[1, 2], b=[0.5, 4])
    assert scaling_covariance(model, 1, WordSpec(["a", "b", "a"], "p")).passed
    rep = scaling_covariance(model, 2, WordSpec(["a", "b", "a"], "p"))
    assert rep.ratio == pytest.approx(1, abs=1e-12)


def test_scaling_n6_random():
    rng = np.random.default_rng(3)
    model = random_model(rng, [2, 1], [1, 1])
    word = WordSpec([f"a{int(i)}" for i in rng.integers(0, 4, size=7)], "p")
    rep = scaling_covariance(model, Q(1, 3), word)
    assert abs(rep.ratio - 1) < 1e-10


def test_scaling_needs_positive_lambda():
    with pytest.raises(InvalidInputError):
        scaling_covariance(diag_model([1], p=[1]), 0, WordSpec(["p"], "p"))


# --- compressed semicircular element ---------------------------------------


def test_compressed_moments_unit_variance():
    rep = compressed_semicircular_moments(1, 8)
    assert rep.moments == pytest.approx((1, 0, 1, 0, 2, 0, 5, 0, 14))
    assert rep.passed


def test_compressed_second_moment_is_trace():
    assert compressed_semicircular_moments(Q(1, 4), 2).moments[2] == pytest.approx(0.25)


def test_compressed_m12():
    rep = compressed_semicircular_moments(1, 12)
    assert rep.moments[12] == pytest.approx(132)
    assert rep.radius_estimates[-1] < rep.spectral_radius == 2


def test_compressed_growth_toward_radius():
    rep = compressed_semicircular_moments(Q(1, 9), 12)
    assert rep.passed
    assert rep.spectral_radius == pytest.approx(2 / 3)


def test_compressed_order_checks():
    with pytest.raises(InvalidInputError, match="even"):
        compressed_semicircular_moments(1, 5)
    with pytest.raises(InvalidInputError, match="maximum"):
        compressed_semicircular_moments(1, 14)

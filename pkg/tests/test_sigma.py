import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from prony_lowrank.errors import BadLambda, DegenerateNodes, NoRealRoots, ShapeError, ZeroMass
from prony_lowrank.sigma import (
    Rejection,
    SigmaCase,
    alpha_roots,
    center_nodes,
    complement_basis,
    decompose_amplitudes,
    distance_matrix,
    m2_gap,
    m2_gap_direct,
    quad_form,
    quad_form_matrix,
    quad_tolerance,
    sample_P,
    sigma_membership,
)
from prony_lowrank.signal import Signal, moments, validate_signal

CASE2 = validate_signal([1, 1, -0.2], [0, 1, 2])
CASE1 = validate_signal([1, -2, 2, -1], [-2, -1, 1, 2])


def random_nodes(rng, d, min_gap=1e-3):
    while True:
        x = np.sort(rng.uniform(-1, 1, d))
        if d < 2 or np.min(np.diff(x)) >= min_gap:
            return x


def test_distance_matrix_example():
    np.testing.assert_array_equal(distance_matrix([0, 1, 3]), [[0, 1, 9], [1, 0, 4], [9, 4, 0]])
    distance_matrix(np.linspace(-1, 1, 7), check=True)


def test_quad_form_examples():
    assert quad_form([1, 1], [-1, 1]) == 8.0
    assert quad_form([1, 1, -0.2], [0, 1, 2]) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ShapeError):
        quad_form([1], [0, 1])


def test_quad_form_paths_agree(rng):
    for _ in range(200):
        d = int(rng.integers(2, 8))
        a, x = rng.normal(size=d), rng.uniform(-1, 1, d)
        assert quad_form(a, x) == pytest.approx(quad_form_matrix(a, x), rel=1e-12, abs=1e-14)


def test_membership_case_ii_example():
    cert = sigma_membership(CASE2)
    assert cert.member and cert.case_tag is SigmaCase.CASE_II
    assert cert.witness.amplitudes[0] == pytest.approx(1.8, abs=1e-15)
    assert cert.witness.nodes[0] == pytest.approx(1 / 3, abs=1e-15)
    assert max(abs(g) for g in cert.moment_gaps) <= 1e-9


def test_membership_case_i_example():
    cert = sigma_membership(CASE1)
    assert cert.member and cert.case_tag is SigmaCase.CASE_I
    assert cert.witness.d == 0
    assert cert.moment_gaps == (0.0, 0.0, 0.0)


def test_membership_negative_example():
    cert = sigma_membership(validate_signal([1, 1], [-1, 1]))
    assert not cert.member and cert.case_tag is SigmaCase.NOT_MEMBER
    assert cert.quad_value == 8.0


def test_membership_single_node_is_not_member():
    cert = sigma_membership(validate_signal([1], [0.3]))
    assert not cert.member and cert.witness is None


def test_membership_zero_mass_with_moments_is_not_member():
    cert = sigma_membership(validate_signal([1, -1], [0, 1]))
    assert cert.case_tag is SigmaCase.NOT_MEMBER
    assert cert.witness.d == 0


def test_certificate_json():
    obj = sigma_membership(CASE2).to_json()
    assert obj["case"] == "CaseII" and obj["member"] is True
    assert Signal.from_json(obj["witness"]).d == 1


@pytest.mark.parametrize("lam", [-3.0, -1e-3, 0.5, 7.0, 1e4])
def test_membership_homogeneity(lam, rng):
    signals = [CASE1, CASE2, validate_signal([1, 1], [-1, 1])]
    for _ in range(50):
        d = int(rng.integers(2, 6))
        signals.append(validate_signal(rng.normal(size=d), random_nodes(rng, d)))
    for F in signals:
        G = validate_signal(lam * F.amplitudes, F.nodes)
        assert sigma_membership(F).case_tag is sigma_membership(G).case_tag


def test_witness_soundness(rng):
    for _ in range(300):
        d = int(rng.integers(3, 7))
        x = random_nodes(rng, d, 1e-2)
        res = sample_P(x, int(rng.integers(1, 3)), float(rng.uniform(0.5, 2)), rng.normal(size=d - 2) * 0.1)
        if isinstance(res, Rejection):
            continue
        cert = sigma_membership(res)
        assert cert.member
        gaps = moments(res, 3) - moments(cert.witness, 3)
        assert np.max(np.abs(gaps)) <= 1e-9


@pytest.mark.parametrize("d", [2, 3])
def test_case_i_impossible_for_small_d(d, rng):
    for _ in range(200):
        x = random_nodes(rng, d, 1e-2)
        V = np.vander(x, 3, increasing=True).T
        s = np.linalg.svd(V, compute_uv=False)
        assert s.size == d and s[-1] > 0
        F = validate_signal(rng.normal(size=d), x)
        assert sigma_membership(F).case_tag is not SigmaCase.CASE_I


def test_m2_gap_example_and_paths(rng):
    assert m2_gap(CASE2) == pytest.approx(0.0, abs=1e-15)
    F = validate_signal([1, 1], [-1, 1])
    # single node (2 at 0) has m_2 = 0; F has m_2 = 2
    assert m2_gap(F) == -2.0
    assert m2_gap_direct(F) == -2.0
    for _ in range(300):
        d = int(rng.integers(2, 6))
        a = rng.normal(size=d)
        if abs(a.sum()) < 0.1:
            continue
        G = validate_signal(a, random_nodes(rng, d))
        assert m2_gap(G, check=False) == pytest.approx(m2_gap_direct(G), rel=1e-10)


def test_m2_gap_guards():
    with pytest.raises(ZeroMass):
        m2_gap(validate_signal([1, -1], [0, 1]))
    with pytest.raises(ShapeError):
        m2_gap(validate_signal([1], [0]))


def test_alpha_roots_d2_example():
    r = alpha_roots([-1, 1])
    assert r.alpha1 == pytest.approx(0.5, abs=1e-15)
    assert r.alpha2 == pytest.approx(-0.5, abs=1e-15)
    assert r.c1 == -r.c2 >= 0
    with pytest.raises(ValueError):
        r.root(3)


def test_alpha_roots_guards():
    with pytest.raises(DegenerateNodes):
        alpha_roots([0.5])
    with pytest.raises(DegenerateNodes):
        alpha_roots([0.5, 0.5])
    with pytest.raises(ShapeError):
        alpha_roots([0, 1, 2], u=[0, 0])


def test_alpha_roots_u_free_slice_is_zero(rng):
    for _ in range(500):
        d = int(rng.integers(2, 7))
        x = random_nodes(rng, d)
        r = alpha_roots(x)
        xb = center_nodes(x).centered
        for k in (1, 2):
            a = np.full(d, 1.0 / d) + r.root(k) * xb
            assert abs(quad_form(a, x)) <= quad_tolerance(a, x)


def test_alpha_roots_with_u_give_zeros(rng):
    hits = 0
    for _ in range(500):
        d = int(rng.integers(3, 7))
        x = random_nodes(rng, d)
        u = complement_basis(x) @ rng.normal(size=d - 2)
        try:
            r = alpha_roots(x, u)
        except NoRealRoots:
            continue
        hits += 1
        xb = center_nodes(x).centered
        for k in (1, 2):
            a = np.full(d, 1.0 / d) + r.root(k) * xb + u
            assert abs(quad_form(a, x)) <= quad_tolerance(a, x)
    assert hits > 250


def test_u_free_roots_miss_the_zero_set_off_the_slice():
    # the cross term 1^T D u / d is what the u-free formula leaves out
    x = np.array([0.0, 1.0, 2.0])
    u = complement_basis(x)[:, 0]
    r = alpha_roots(x)
    a = np.full(3, 1 / 3) + r.alpha1 * center_nodes(x).centered + u
    assert abs(quad_form(a, x)) > 1e-3


def test_complement_basis_properties(rng):
    for d in range(2, 9):
        x = random_nodes(rng, d)
        B = complement_basis(x)
        assert B.shape == (d, d - 2)
        np.testing.assert_allclose(B.T @ B, np.eye(d - 2), atol=1e-12)
        np.testing.assert_allclose(B.T @ np.ones(d), 0, atol=1e-12)
        np.testing.assert_allclose(B.T @ center_nodes(x).centered, 0, atol=1e-12)
        np.testing.assert_array_equal(B, complement_basis(x))


def test_sample_P_reproduces_worked_example():
    x = [0.0, 1.0, 2.0]
    lam, alpha, coeffs = decompose_amplitudes([1, 1, -0.2], x)
    assert lam == pytest.approx(1.8)
    assert alpha == pytest.approx(-1 / 3)
    F = sample_P(x, 2, lam, coeffs)
    np.testing.assert_allclose(F.amplitudes, [1, 1, -0.2], atol=1e-12)


def test_sample_P_d2_always_rejects():
    for x in ([-1, 1], [0, 0.3], [-0.9, 0.2]):
        for branch in (1, 2):
            res = sample_P(x, branch, 1.0, [])
            assert isinstance(res, Rejection)
            assert res.reason == "zero amplitude entry"


def test_sample_P_guards():
    with pytest.raises(BadLambda):
        sample_P([0, 1, 2], 1, 0.0, [0.1])
    with pytest.raises(ShapeError):
        sample_P([0, 1, 2], 1, 1.0, [0.1, 0.2])
    with pytest.raises(DegenerateNodes):
        sample_P([0, 0, 2], 1, 1.0, [0.1])


def test_sample_P_large_u_rejects_without_real_roots():
    x = np.array([0.0, 1.0, 2.0])
    B = complement_basis(x)
    sign = -np.sign(distance_matrix(x).sum(axis=0) @ B[:, 0])
    res = sample_P(x, 1, 1.0, [sign * 100.0])
    assert isinstance(res, Rejection) and "discriminant" in res.reason


def test_parametrization_completeness_d3():
    """Grid zeros of the form with nonzero mass are all reached by the sampler."""
    grid = np.linspace(-1, 1, 5)
    node_sets = [x for x in itertools.combinations(grid, 3)]
    checked = 0
    for x in node_sets:
        x = np.array(x)
        D = distance_matrix(x)
        for a1, a2 in itertools.product(np.linspace(-2, 2, 9), repeat=2):
            # solve a^T D a = 0 for a3: D33 = 0 so the form is linear in a3
            b = 2 * (a1 * D[0, 2] + a2 * D[1, 2])
            if abs(b) < 1e-9:
                continue
            a3 = -2 * a1 * a2 * D[0, 1] / b
            a = np.array([a1, a2, a3])
            if abs(a.sum()) < 1e-6 or np.any(np.abs(a) < 1e-9):
                continue
            assert abs(quad_form(a, x)) <= 1e-9
            lam, alpha, c = decompose_amplitudes(a, x)
            candidates = []
            for branch in (1, 2):
                res = sample_P(x, branch, lam, c)
                if not isinstance(res, Rejection):
                    candidates.append(np.max(np.abs(res.amplitudes - a)))
            assert candidates and min(candidates) <= 1e-6
            checked += 1
    assert checked > 100


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2), st.lists(st.floats(-3, 3), min_size=2, max_size=2))
def test_d2_never_member(x, a):
    assume(abs(x[0] - x[1]) >= 1e-3 and min(abs(a[0]), abs(a[1])) >= 1e-3)
    F = validate_signal(a, x)
    assert not sigma_membership(F).member

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from provnmf.errors import InfeasibleParamsError, InvalidParamsError, NoRobustLonersError
from provnmf.instances import gen_separable
from provnmf.robust import (cluster_rows, derive_params, is_robust_loner, one_center,
                            solve_separable_robust)


def test_derived_parameters():
    p = derive_params(0.01, 0.5)
    assert p.d == pytest.approx(5 * 0.01 / 0.5 + 2 * 0.01)
    assert p.cluster_radius == pytest.approx(2 * (p.d + 0.01))
    assert p.hull_margin == pytest.approx(0.02)
    assert p.residual_bound == pytest.approx(10 * 0.01 / 0.5 + 7 * 0.01)
    # 20 eps / alpha + 13 eps = 0.53 >= 0.5
    assert not p.feasible
    assert derive_params(0.001, 0.5).feasible


@pytest.mark.parametrize("eps,alpha", [(0.0, 0.5), (-1, 0.5), (0.1, 0.0), (0.1, 2.5)])
def test_invalid_parameters(eps, alpha):
    with pytest.raises(InvalidParamsError):
        derive_params(eps, alpha)


def test_infeasible_parameters_raise():
    m = np.eye(2)
    with pytest.raises(InfeasibleParamsError):
        solve_separable_robust(m, derive_params(0.01, 0.5))


def test_clusters_are_single_linkage_components():
    m = np.array([[0.0], [0.1], [0.2], [1.0], [1.05]])
    assert cluster_rows(m, range(5), 0.1) == [[0, 1, 2], [3, 4]]
    assert cluster_rows(m, [], 0.1) == []


def test_one_center_picks_the_middle():
    m = np.array([[0.0], [0.1], [0.2]])
    assert one_center(m, [0, 1, 2]) == 1


def test_noiseless_identity_rows_are_robust_loners():
    m = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    p = derive_params(0.001, 1.0)
    assert is_robust_loner(m, 0, p)
    assert not is_robust_loner(m, 2, p)


def test_no_robust_loners():
    # dense ring of distributions: the chord between the far neighbours of a
    # row passes within 2 eps of it, so no row is a robust loner
    center = np.ones(3) / 3
    u = np.array([1.0, -1.0, 0.0]) / np.sqrt(2)
    v = np.array([1.0, 1.0, -2.0]) / np.sqrt(6)
    th = np.linspace(0, 2 * np.pi, 60, endpoint=False)
    m = center + 0.3 * (np.cos(th)[:, None] * u + np.sin(th)[:, None] * v)
    with pytest.raises(NoRobustLonersError):
        solve_separable_robust(m, derive_params(0.01, 1.0))


def test_identical_rows_form_one_cluster():
    m = np.full((3, 2), 0.5)
    res = solve_separable_robust(m, derive_params(0.001, 1.0))
    assert res.found_r == 1


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_planted_noisy_instances_meet_the_residual_bound(r, seed):
    alpha_min = 0.5
    eps = 0.005
    inst = gen_separable(4 * r, r + 4, r, alpha_min=alpha_min, noise_eps=eps, seed=seed)
    p = derive_params(eps, alpha_min)
    res = solve_separable_robust(inst.m, p, expected_r=r)
    assert res.found_r == r
    assert not res.r_mismatch
    assert res.factorization.residual_row_l1_max <= p.residual_bound
    assert np.all(res.factorization.a >= 0)


def test_r_mismatch_is_flagged():
    inst = gen_separable(12, 6, 3, alpha_min=0.5, noise_eps=0.002, seed=1)
    res = solve_separable_robust(inst.m, derive_params(0.002, 0.5), expected_r=2)
    assert res.found_r == 3
    assert res.r_mismatch

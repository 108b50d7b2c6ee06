import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from provnmf.errors import NotNormalizedError, NotSeparableError, ZeroRowError
from provnmf.instances import gen_separable
from provnmf.separable import find_loners, solve_separable


def match_rows(found, truth):
    """Max entry error after the best row matching (greedy on l1 distance)."""
    worst = 0.0
    for row in truth:
        worst = max(worst, np.abs(found - row).max(axis=1).min())
    return worst


def test_midpoint_example():
    m = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    res = solve_separable(m, 2)
    np.testing.assert_allclose(res.w, np.eye(2))
    np.testing.assert_allclose(res.a @ res.w, m, atol=1e-12)
    assert res.loner_row_indices == [0, 1]


def test_duplicate_rows_are_one_loner():
    m = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.7]])
    assert find_loners(m) == [0, 1, 2]
    res = solve_separable(m, 2)
    assert res.loner_row_indices == [0, 2]


def test_unnormalized_rows_are_rescaled():
    m = np.array([[2.0, 0.0], [0.0, 3.0], [1.0, 1.0]])
    res = solve_separable(m, 2)
    np.testing.assert_allclose(res.a @ res.w, m, atol=1e-12)


def test_wrong_r_reports_found_count():
    m = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    with pytest.raises(NotSeparableError) as err:
        solve_separable(m, 3)
    assert err.value.found_k == 2


def test_non_separable_matrix():
    # the 4-cycle matrix: every row is a loner but rows are not generated by them
    m = np.array([[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]], float) / 2
    with pytest.raises(NotSeparableError):
        solve_separable(m, 3)


def test_errors_on_bad_input():
    with pytest.raises(NotNormalizedError):
        find_loners(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ZeroRowError):
        solve_separable(np.array([[1.0, 0.0], [0.0, 0.0]]), 1)
    with pytest.raises(ValueError):
        solve_separable(np.array([[1.0, -1.0]]), 1)


@pytest.mark.parametrize("backend", ["highs", "simplex"])
def test_backends_agree(backend):
    inst = gen_separable(12, 6, 3, alpha_min=0.3, seed=4)
    res = solve_separable(inst.m, 3, backend=backend)
    assert match_rows(res.w, inst.w_true) < 1e-7


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_planted_round_trip(r, seed):
    inst = gen_separable(3 * r, r + 3, r, alpha_min=0.2, seed=seed)
    res = solve_separable(inst.m, r)
    assert match_rows(res.w, inst.w_true) < 1e-7
    assert np.linalg.norm(inst.m - res.a @ res.w) <= 1e-7 * np.linalg.norm(inst.m)
    assert sorted(res.loner_row_indices) == sorted(inst.anchor_rows)


def test_threaded_matches_serial():
    inst = gen_separable(30, 8, 4, alpha_min=0.2, seed=2)
    a = solve_separable(inst.m, 4, n_jobs=1)
    b = solve_separable(inst.m, 4, n_jobs=3)
    np.testing.assert_array_equal(a.w, b.w)

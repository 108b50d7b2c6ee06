import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from provnmf.errors import BudgetExceededError, RankTooHighError
from provnmf.partitions import (PartitionSpec, brute_force_partitions, closed_labels,
                                enumerate_hyperplane_partitions,
                                enumerate_simplicial_partitions, hyperplane_separation)


def angular_grid_labelings(m, steps=3600):
    """Strict labelings found by sweeping unit normals in the plane."""
    th = np.linspace(0, 2 * np.pi, steps, endpoint=False)
    out = set()
    for h in np.stack([np.cos(th), np.sin(th)], axis=1):
        vals = h @ m
        if np.all(np.abs(vals) > 1e-9):
            out.add(tuple(int(v) for v in np.sign(vals)))
    return out


def test_two_unit_vectors_give_four_labelings():
    m = np.eye(2)
    got = enumerate_hyperplane_partitions(m, 2)
    assert len(got) == 4
    assert got == angular_grid_labelings(m)


def test_parallel_columns_give_two_labelings():
    m = np.outer([1.0, 2.0], [1.0, 3.0, 0.5])
    assert enumerate_hyperplane_partitions(m, 1) == {(1, 1, 1), (-1, -1, -1)}


def test_dependent_triple_excludes_two_patterns():
    m = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    got = enumerate_hyperplane_partitions(m, 2)
    assert len(got) == 6
    assert (1, 1, -1) not in got and (-1, -1, 1) not in got
    assert got == angular_grid_labelings(m)


def test_rank_too_high():
    with pytest.raises(RankTooHighError):
        enumerate_hyperplane_partitions(np.eye(3), 2)


def test_zero_columns_are_labeled_plus():
    m = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert enumerate_hyperplane_partitions(m, 1) == {(1, 1), (-1, 1)}


def test_hyperplane_separation_zero_band():
    m = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1e-12]])
    sep = hyperplane_separation(m, [0.0, 1.0])
    assert sep.labels == (0, 1, 0)
    assert closed_labels(m, [0.0, -1.0]) == (1, -1, 1)


def random_low_rank(rng, n_cols, rank, dim=4):
    m = rng.standard_normal((dim, rank)) @ rng.standard_normal((rank, n_cols))
    # sprinkle exact dependencies so degenerate zero sets are exercised
    if n_cols >= 3 and rng.uniform() < 0.5:
        m[:, -1] = m[:, 0] + m[:, 1]
    if n_cols >= 4 and rng.uniform() < 0.3:
        m[:, 2] = -2 * m[:, 0]
    return m


@pytest.mark.parametrize("seed", range(12))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(1, 4))
    m = random_low_rank(rng, int(rng.integers(2, 8)), rank)
    assert enumerate_hyperplane_partitions(m, 3) == brute_force_partitions(m)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(3, 9), st.integers(0, 10**6))
def test_count_bound(s, n_cols, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((s, n_cols))
    count = len(enumerate_hyperplane_partitions(m, s))
    assert count <= 2 * n_cols ** s


def test_labelings_come_with_witness_normals(rng):
    m = rng.standard_normal((2, 5))
    labs = enumerate_hyperplane_partitions(m, 2, return_normals=True)
    for lab, h in labs.items():
        assert np.all(np.sign(h @ m) == np.array(lab))


def test_single_column_simplicial_partitions():
    parts = enumerate_simplicial_partitions(np.ones((1, 1)), 1, 1)
    assert [p.parts for p in parts] == [(frozenset({0}), frozenset()),
                                        (frozenset(), frozenset({0}))]


def test_simplicial_contains_hyperplane_splits():
    m = np.eye(2)
    parts = {p.assignment() for p in enumerate_simplicial_partitions(m, 1, 2)}
    for lab in enumerate_hyperplane_partitions(m, 2):
        assert tuple(0 if v > 0 else 1 for v in lab) in parts


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 2), st.integers(1, 2), st.integers(2, 6), st.integers(0, 10**6))
def test_planted_partition_is_enumerated(k, s, n_cols, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((3, s)) @ rng.standard_normal((s, n_cols))
    sets = [[rng.standard_normal(3) for _ in range(s)] for _ in range(k)]
    planted = PartitionSpec.from_hyperplanes(m, sets)
    found = enumerate_simplicial_partitions(m, k, s)
    assert planted.assignment() in {p.assignment() for p in found}
    for p in found:
        cover = sorted(c for part in p.parts for c in part)
        assert cover == list(range(n_cols))


def test_budget_cap():
    rng = np.random.default_rng(0)
    with pytest.raises(BudgetExceededError):
        enumerate_simplicial_partitions(rng.standard_normal((3, 8)), 3, 2, cap=100)


def test_partition_spec_peeling():
    spec = PartitionSpec.from_q_sets(4, [{0, 1}, {1, 2}], s=1)
    assert spec.parts == (frozenset({0, 1}), frozenset({2}), frozenset({3}))
    assert spec.assignment() == (0, 0, 1, 2)

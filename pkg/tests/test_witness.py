import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermite_witness import ArgumentError, DataError, KernelConfig
from hermite_witness.hermite import kernel_value
from hermite_witness.witness import (
    LabeledDataset,
    QuerySet,
    scale_dataset,
    suggest_degree,
    top_two,
    witness_multiclass,
    witness_two_class,
)

CFG = KernelConfig(2, 16)


def test_scale_examples():
    d = scale_dataset([[2.0, 4.0], [0.0, -2.0]], 2.0, [0, 1])
    np.testing.assert_array_equal(d.points, [[1.0, 2.0], [0.0, -1.0]])
    assert d.scale == 2.0
    d1 = scale_dataset([[3.0, 1.0], [1.0, 1.0]], 1.0, [0, 1])
    np.testing.assert_array_equal(d1.points, [[3.0, 1.0], [1.0, 1.0]])


def test_scale_gaussian_identity():
    x, y, s = np.array([0.3, -1.2]), np.array([1.1, 0.4]), 1.7
    lhs = math.exp(-np.sum((x - y) ** 2) / s**2)
    rhs = math.exp(-np.sum((x / s - y / s) ** 2))
    assert lhs == pytest.approx(rhs, rel=1e-14)


@pytest.mark.parametrize("sigma", [0.0, -1.0, float("nan")])
def test_scale_rejects_sigma(sigma):
    with pytest.raises(ArgumentError):
        scale_dataset([[0.0, 0.0], [1.0, 1.0]], sigma, [0, 1])


def test_scale_rejects_nan():
    with pytest.raises(DataError):
        scale_dataset([[np.nan, 0.0], [1.0, 1.0]], 1.0, [0, 1])


def test_dataset_validation():
    with pytest.raises(DataError):
        LabeledDataset(np.zeros((3, 2)), [0, 0, 0], 2)  # empty class
    with pytest.raises(DataError):
        LabeledDataset(np.zeros((3, 2)), [0, 1], 2)
    with pytest.raises(ArgumentError):
        LabeledDataset(np.zeros((3, 2)), [0, 0, 0], 1)


def test_single_sample_per_class():
    data = LabeledDataset([[0.5, 0.0], [-0.5, 0.0]], [0, 1], 2)
    z = np.array([[0.2, 0.3], [1.0, -1.0]])
    f = witness_two_class(data, QuerySet.from_points(z), CFG).values
    for j in range(2):
        expect = (kernel_value(z[j], data.points[0], CFG) - kernel_value(z[j], data.points[1], CFG)) / 2
        assert f[j] == pytest.approx(expect, abs=1e-15)


def test_identical_multisets_vanish(line_queries):
    pts = np.random.default_rng(0).normal(size=(20, 2))
    data = LabeledDataset(np.vstack([pts, pts]), np.repeat([0, 1], 20), 2)
    f = witness_two_class(data, line_queries, CFG).values
    assert np.max(np.abs(f)) <= 1e-14


def test_label_swap_antisymmetry(two_blobs, line_queries):
    swapped = LabeledDataset(two_blobs.points, 1 - two_blobs.labels, 2)
    a = witness_two_class(two_blobs, line_queries, CFG).values
    b = witness_two_class(swapped, line_queries, CFG).values
    np.testing.assert_array_equal(a, -b)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_joint_shuffle_invariance(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(60, 2))
    labels = np.r_[np.zeros(30, int), np.ones(30, int)]
    Q = QuerySet.from_points(rng.normal(size=(15, 2)))
    a = witness_two_class(LabeledDataset(pts, labels, 2), Q, CFG).values
    perm = rng.permutation(60)
    b = witness_two_class(LabeledDataset(pts[perm], labels[perm], 2), Q, CFG).values
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_partition_identity(three_blobs, line_queries):
    per_class = witness_multiclass(three_blobs, line_queries, CFG).per_class
    total = np.array([
        np.mean([kernel_value(z, y, CFG) for y in three_blobs.points]) for z in line_queries.points[::8]
    ])
    np.testing.assert_allclose(per_class[::8].sum(axis=1), total, atol=1e-12)


def test_two_class_relation(two_blobs, line_queries):
    f = witness_two_class(two_blobs, line_queries, CFG).values
    mc = witness_multiclass(two_blobs, line_queries, CFG)
    np.testing.assert_allclose(mc.per_class[:, 0] - mc.per_class[:, 1], f, atol=1e-14)
    np.testing.assert_allclose(mc.margin, np.abs(f), atol=1e-14)


def test_three_blob_prediction(three_blobs):
    Q = QuerySet.from_points([[-1.5, 0.0], [1.5, 0.0], [0.0, 1.8]])
    wf = witness_multiclass(three_blobs, Q, KernelConfig(2, 24))
    assert wf.predicted.tolist() == [0, 1, 2]
    assert np.all(wf.margin >= 0)


def test_top_two_ties_pick_first():
    pred, margin = top_two(np.array([[0.2, 0.2, 0.1], [0.0, 0.3, 0.3]]))
    assert pred.tolist() == [0, 1]
    assert margin.tolist() == [0.0, 0.0]


def test_witness_bounded_by_kernel_diagonal(two_blobs):
    # |F(z)| <= max_y |Phi(z, y)|, and the kernel is bounded by c n^q
    cfg = KernelConfig(2, 32)
    rng = np.random.default_rng(3)
    Q = QuerySet.from_points(rng.uniform(-3, 3, (30, 2)))
    f = witness_two_class(two_blobs, Q, cfg).values
    assert np.max(np.abs(f)) <= cfg.n**2


def test_queryset_rho_exact():
    pts = np.random.default_rng(9).uniform(size=(300, 3))
    brute = min(np.linalg.norm(pts[i] - pts[j]) for i in range(300) for j in range(i))
    assert QuerySet.from_points(pts).rho == pytest.approx(brute, rel=1e-15)


def test_queryset_duplicates():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ArgumentError):
        QuerySet.from_points(pts)
    with pytest.warns(UserWarning):
        assert QuerySet.from_points(pts, coalesce=True).rho == 1.0
    with pytest.raises(ArgumentError):
        QuerySet.from_points([[1.0, 2.0]])


def test_suggest_degree_examples():
    assert suggest_degree(10000, 2, 2.0) == 6
    assert suggest_degree(2000, 2, 2.0) == 4  # n^2 ~ 4.02
    assert suggest_degree(10**6, 1, 0.5) == round((1e6 / math.log(1e6)) ** (2 / 3))
    assert suggest_degree(3, 5, 100.0) == 4


@given(st.integers(3, 10**7), st.integers(1, 4), st.floats(0.1, 5.0))
def test_suggest_degree_monotone_in_M(M, q, gamma):
    assert suggest_degree(M, q, gamma) <= suggest_degree(M * 2 + 3, q, gamma)


def test_suggest_degree_rejects_small_M():
    with pytest.raises(ArgumentError):
        suggest_degree(2, 2, 2.0)

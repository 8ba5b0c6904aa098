import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermite_witness import ArgumentError, KernelConfig, PermutationPlan, permutation_count
from hermite_witness.datagen import ToySpec, gen_circle_ellipse, ring_queries
from hermite_witness.rng import SAMPLES, Stream
from hermite_witness.significance import nearest_rank, permuted_labels, test_multiclass, test_two_class
from hermite_witness.witness import LabeledDataset, QuerySet, scale_dataset

CFG = KernelConfig(2, 16)


def test_count_p95():
    # rho = n makes the tail exactly alpha
    p, N = permutation_count(0.05, 4.0, 4.0, 2)
    assert p == pytest.approx(0.95, abs=1e-15)
    assert N == math.ceil(math.log(0.05) / math.log(0.95)) == 59


def test_count_engages_cap():
    cfg = KernelConfig(2, 32)
    p, N = permutation_count(0.05, 0.1, cfg.n, 2)
    assert p == pytest.approx(1 - 0.05 * 0.1**2 / 32, rel=1e-15)
    assert 191_000 < N < 192_000
    plan = PermutationPlan.build(0.1, cfg)
    assert plan.cap_engaged and plan.Nused == 1000 and plan.rank == 1000
    assert plan.attainable_level == pytest.approx(1 / 1001)


@pytest.mark.parametrize("alpha,rho", [(0.5, 8.0), (0.05, 100.0), (0.0, 1.0), (1.0, 1.0)])
def test_count_rejects(alpha, rho):
    with pytest.raises(ArgumentError):
        permutation_count(alpha, rho, 2.0, 2)


@given(st.floats(1e-4, 0.5), st.floats(1e-3, 1.0), st.integers(1, 3), st.integers(4, 64))
def test_plan_invariants(alpha, rho, q, deg):
    cfg = KernelConfig(q, deg)
    plan = PermutationPlan.build(rho, cfg, alpha=alpha)
    assert 0 < plan.p < 1
    assert 1 <= plan.Nused <= plan.Ncap
    assert 1 <= plan.rank <= plan.Nused
    assert plan.cap_engaged == (plan.N > plan.Ncap)


def test_nearest_rank():
    assert nearest_rank(0.95, 59) == 57
    assert nearest_rank(0.5, 10) == 5
    assert nearest_rank(0.0, 10) == 1
    assert nearest_rank(0.999, 10) == 10


def test_plan_rejects_A():
    with pytest.raises(ArgumentError):
        PermutationPlan.build(0.1, CFG, A=0.5)


def test_permuted_rows_are_multisets():
    labels = np.repeat([0, 1, 2], [5, 7, 3])
    plan = PermutationPlan.build(0.2, CFG, seed=4, ncap=50)
    rows = permuted_labels(labels, plan)
    assert rows.shape == (50, 15)
    for r in rows:
        assert np.bincount(r).tolist() == [5, 7, 3]
    np.testing.assert_array_equal(rows, permuted_labels(labels, plan))


def test_infinite_A(two_blobs, line_queries):
    plan = PermutationPlan.build(line_queries.rho, CFG, A=1e300, ncap=50)
    assert not test_two_class(two_blobs, line_queries, CFG, plan).D.any()


def test_monotone_in_A(two_blobs, line_queries):
    plan = PermutationPlan.build(line_queries.rho, CFG, A=1.0, ncap=100)
    res = test_two_class(two_blobs, line_queries, CFG, plan)
    prev = res.D
    assert prev.any()
    for A in (1.5, 2.0, 3.0, 5.0):
        cur = res.with_A(A).D
        assert np.all(cur <= prev)
        prev = cur


def test_with_A_matches_rerun(two_blobs, line_queries):
    plan = PermutationPlan.build(line_queries.rho, CFG, A=1.0, ncap=80)
    a = test_two_class(two_blobs, line_queries, CFG, plan).with_A(2.5)
    b = test_two_class(two_blobs, line_queries, CFG, plan.with_A(2.5))
    np.testing.assert_array_equal(a.D, b.D)


def test_label_swap_invariance(two_blobs, line_queries):
    plan = PermutationPlan.build(line_queries.rho, CFG, A=1.0, ncap=100)
    swapped = LabeledDataset(two_blobs.points, 1 - two_blobs.labels, 2)
    a = test_two_class(two_blobs, line_queries, CFG, plan)
    b = test_two_class(swapped, line_queries, CFG, plan)
    np.testing.assert_array_equal(a.D, b.D)
    np.testing.assert_array_equal(a.T, b.T)
    assert np.all(a.T >= 0)


def test_deterministic(two_blobs, line_queries):
    plan = PermutationPlan.build(line_queries.rho, CFG, ncap=100, seed=8)
    a = test_two_class(two_blobs, line_queries, CFG, plan)
    b = test_two_class(two_blobs, line_queries, CFG, plan)
    assert a.fhat.tobytes() == b.fhat.tobytes()
    assert a.T.tobytes() == b.T.tobytes()
    assert a.metadata == b.metadata


def test_seed_changes_threshold(two_blobs, line_queries):
    a = test_two_class(two_blobs, line_queries, CFG, PermutationPlan.build(line_queries.rho, CFG, ncap=100, seed=1))
    b = test_two_class(two_blobs, line_queries, CFG, PermutationPlan.build(line_queries.rho, CFG, ncap=100, seed=2))
    np.testing.assert_array_equal(a.fhat, b.fhat)
    assert not np.array_equal(a.T, b.T)


def test_signed_null(two_blobs, line_queries):
    base = PermutationPlan.build(line_queries.rho, CFG, ncap=100)
    signed = PermutationPlan.build(line_queries.rho, CFG, ncap=100, signed_null=True)
    a = test_two_class(two_blobs, line_queries, CFG, base)
    b = test_two_class(two_blobs, line_queries, CFG, signed)
    # the largest signed value never exceeds the largest absolute value
    assert np.all(b.T <= a.T)
    assert b.metadata["plan"]["signed_null"] is True


def test_metadata(two_blobs, line_queries):
    plan = PermutationPlan.build(line_queries.rho, CFG, ncap=20)
    meta = test_two_class(two_blobs, line_queries, CFG, plan).metadata
    assert meta["permutations_used"] == 20
    assert meta["plan"]["cap_engaged"] is True
    assert meta["class_counts"] == [150, 150]


def test_null_calibration_uncapped():
    # rho = n gives p = 0.95 and N = 59 < cap, so the designed rate is attainable
    cfg = KernelConfig(2, 16)
    rates = []
    for rep in range(30):
        z = Stream(rep, SAMPLES, 0).normal(2 * 200 * 2).reshape(400, 2)
        data = LabeledDataset(z, np.repeat([0, 1], 200), 2)
        Q = ring_queries(60, seed=rep, rho=cfg.n)
        plan = PermutationPlan.build(Q.rho, cfg, A=1.0, seed=rep)
        assert plan.Nused == 59 and plan.p == pytest.approx(0.95)
        rates.append(test_two_class(data, Q, cfg, plan).D.mean())
    n_tests = 30 * 60
    se = math.sqrt(0.05 * 0.95 / n_tests)
    assert np.mean(rates) <= 2 * 0.05 + 3 * se


def test_toy_null_fraction():
    X0, X1 = gen_circle_ellipse(ToySpec(0.0, 1000, seed=3))
    data = scale_dataset(np.vstack([X0, X1]), 0.5, np.repeat([0, 1], 1000))
    cfg = KernelConfig(2, 32)
    Q = ring_queries(300, seed=3, scale=0.5)
    res = test_two_class(data, Q, cfg, PermutationPlan.build(Q.rho, cfg, A=1.0, seed=3))
    assert res.D.mean() <= 2 * 0.05


def test_multiclass_agrees_with_two_class(two_blobs, line_queries):
    plan = PermutationPlan.build(line_queries.rho, CFG, A=1.0, ncap=200)
    a = test_two_class(two_blobs, line_queries, CFG, plan)
    b = test_multiclass(two_blobs, line_queries, CFG, plan)
    # the two-class margin is |F|, so with the absolute null the tests coincide
    np.testing.assert_allclose(b.fhat, np.abs(a.fhat), atol=1e-14)
    np.testing.assert_allclose(b.T, a.T, atol=1e-14)
    assert np.sum(a.D != b.D) <= 1


def test_single_class_rejected():
    with pytest.raises(ArgumentError):
        LabeledDataset(np.zeros((4, 2)), np.zeros(4, int), 1)
    data = LabeledDataset(np.eye(3, 2), [0, 1, 2], 3)
    Q = QuerySet.from_points(np.eye(2))
    with pytest.raises(ArgumentError):
        test_two_class(data, Q, CFG, PermutationPlan.build(Q.rho, CFG, ncap=5))


def test_three_blobs_detected(three_blobs):
    cfg = KernelConfig(2, 24)
    Q = QuerySet.from_points([[-1.5, 0.0], [1.5, 0.0], [0.0, 1.8]], rho=0.5)
    res = test_multiclass(three_blobs, Q, cfg, PermutationPlan.build(Q.rho, cfg, A=2.0, seed=1))
    assert res.field.predicted.tolist() == [0, 1, 2]
    assert res.D.tolist() == [1, 1, 1]

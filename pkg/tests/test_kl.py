import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsmix import (Distribution, InvariantError, Partition, additive_mixture, gibbs_kernel,
                      kl_divergence, kl_gibbs, kl_kernels, kl_lifted, kl_lifted_direct,
                      kl_mixture_bound, kl_report, lifted_kernel, optimal_entropy_partition,
                      optimal_lifted_partition, random_partition, random_reversible_kernel,
                      shannon_entropy,
                      stationary_kernel)
from gibbsmix.kl import KLReport
from helpers import corpus, entropy_oracle, kernels, set_partitions, two_state

ALPHAS = [round(0.1 * i, 1) for i in range(11)]


def test_kl_divergence_examples():
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
    with pytest.raises(ValueError):
        kl_divergence([1.0], [0.5, 0.5])


def test_kl_kernels_examples():
    P = two_state()
    Pi = stationary_kernel(P.pi)
    assert kl_kernels(P, P) == 0.0
    assert kl_kernels(Pi, Pi) == pytest.approx(0.0, abs=1e-15)
    G1 = gibbs_kernel(P.pi, Partition.single_block(2))
    assert kl_kernels(G1, Pi) == pytest.approx(0.0, abs=1e-15)
    eye = gibbs_kernel(P.pi, Partition.singletons(2))
    assert kl_kernels(P, eye) == math.inf
    with pytest.raises(InvariantError):
        kl_kernels(P, stationary_kernel(Distribution(np.array([0.5, 0.5]))))


def test_entropy_examples():
    assert shannon_entropy([1.0, 0.0, 0.0]) == 0.0
    assert shannon_entropy(np.full(5, 0.2)) == pytest.approx(math.log(5), abs=1e-15)
    assert shannon_entropy([1 / 3, 2 / 3]) == pytest.approx(math.log(3) - 2 / 3 * math.log(2), abs=1e-15)
    with pytest.raises(ValueError):
        shannon_entropy([0.5, 0.6])


def test_kl_gibbs_examples():
    pi = Distribution(np.array([0.1, 0.4, 0.2, 0.3]))
    assert kl_gibbs(Partition.from_blocks([[0, 1], [2, 3]]), pi) == pytest.approx(math.log(2), abs=1e-15)
    assert kl_gibbs(Partition.singletons(4), pi) == pytest.approx(shannon_entropy(pi))
    assert kl_gibbs(Partition.single_block(4), pi) == 0.0


@pytest.mark.parametrize("seed", range(100))
def test_kl_gibbs_equals_block_entropy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 13))
    pi = Distribution.from_weights(rng.exponential(size=n))
    part = random_partition(n, int(rng.integers(1, n + 1)), rng)
    direct = kl_kernels(gibbs_kernel(pi, part), stationary_kernel(pi))
    assert abs(direct - kl_gibbs(part, pi)) <= 1e-10
    assert abs(kl_gibbs(part, pi) - entropy_oracle(part.masses(pi))) <= 1e-12


def test_kl_lifted_examples():
    P = two_state()
    part = Partition.singletons(2)
    kl_p = kl_kernels(P, stationary_kernel(P.pi))
    assert kl_lifted(P, part, 1.0) == pytest.approx(kl_p)
    assert kl_lifted(P, part, 0.0) == pytest.approx(kl_gibbs(part, P.pi))
    assert kl_lifted(P, part, 0.5) == pytest.approx(0.5 * (kl_p + kl_gibbs(part, P.pi)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_lifted_identity_and_bound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 11))
    P = random_reversible_kernel(n, rng, sparsity=0.5 * rng.random())
    part = random_partition(n, int(rng.integers(1, n + 1)), rng)
    G = gibbs_kernel(P.pi, part)
    for a in ALPHAS:
        direct = kl_lifted_direct(lifted_kernel(P, G, a))
        assert abs(direct - kl_lifted(P, part, a)) <= 1e-10
        bound, actual = kl_mixture_bound(P, part, a)
        assert actual <= bound + 1e-10
        assert actual >= -1e-12 and direct >= -1e-12


def test_bound_endpoints_and_strictness():
    for P, part in corpus(20, 9, seed=1, nmin=3):
        if part.k == P.n:
            continue
        b0, a0 = kl_mixture_bound(P, part, 0.0)
        b1, a1 = kl_mixture_bound(P, part, 1.0)
        assert a0 == pytest.approx(b0, abs=1e-12) and a0 == pytest.approx(kl_gibbs(part, P.pi), abs=1e-12)
        assert a1 == pytest.approx(b1, abs=1e-12)
        gaps = [b - a for b, a in (kl_mixture_bound(P, part, x) for x in (0.2, 0.5, 0.8))]
        assert max(gaps) > 1e-8


def test_optimal_entropy_partition_examples():
    pi = Distribution(np.array([0.2, 0.3, 0.5]))
    part = optimal_entropy_partition(pi, 2)
    assert part.block_of.tolist() == [0, 1, 1]
    assert kl_gibbs(part, pi) == pytest.approx(entropy_oracle([0.2, 0.8]))
    assert optimal_entropy_partition(pi, 3).k == 3
    assert sorted(optimal_entropy_partition(pi, 3).block_of.tolist()) == [0, 1, 2]
    for k in (1, 4):
        with pytest.raises(ValueError):
            optimal_entropy_partition(pi, k)


def test_optimal_entropy_partition_unsorted_and_ties():
    pi = Distribution(np.array([0.4, 0.1, 0.1, 0.4]))
    part = optimal_entropy_partition(pi, 2)
    assert part.block_of.tolist() == [1, 0, 1, 1]
    part3 = optimal_entropy_partition(pi, 3)
    assert part3.block_of.tolist() == [2, 0, 1, 2]


@pytest.mark.parametrize("seed", range(12))
def test_optimal_entropy_partition_vs_lattice(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 7
    pi = Distribution.from_weights(rng.exponential(size=n))
    best = {}
    for labels in set_partitions(n):
        k = max(labels) + 1
        best[k] = min(best.get(k, math.inf), entropy_oracle(np.bincount(labels, weights=pi.probs)))
    for k in range(2, n + 1):
        assert kl_gibbs(optimal_entropy_partition(pi, k), pi) == pytest.approx(best[k], abs=1e-12)


def test_set_partition_oracle_counts():
    bell = [1, 2, 5, 15, 52, 203, 877, 4140]
    for n, b in enumerate(bell, start=1):
        assert sum(1 for _ in set_partitions(n)) == b
    assert sum(1 for _ in set_partitions(5, 2)) == 15


def test_entropy_partition_bounds_best_mixture():
    for P in kernels(6, range(3, 7), seed=3):
        pi = P.pi
        kl_p = kl_kernels(P, stationary_kernel(pi))
        for k in range(2, P.n + 1):
            star = optimal_lifted_partition(P, k, 0.4)
            lowest = min(kl_kernels(additive_mixture(P, gibbs_kernel(pi, Partition(np.array(lab))), 0.4),
                                    stationary_kernel(pi))
                         for lab in set_partitions(P.n, k))
            assert lowest <= 0.4 * kl_p + 0.6 * kl_gibbs(star, pi) + 1e-10
    with pytest.raises(ValueError):
        optimal_lifted_partition(P, 2, 1.0)


def test_kl_report_invariants():
    for P, part in corpus(10, 8, seed=4):
        for a in (0.0, 0.3, 1.0):
            r = kl_report(P, part, a)
            assert abs(r.kl_G - r.entropy_pbar) <= 1e-10
            assert abs(r.lifted - ((1 - a) * r.kl_G + a * r.kl_P)) <= 1e-12
            assert r.mixture_bound == pytest.approx((1 - a) * r.entropy_pbar + a * r.kl_P, abs=1e-15)
            assert tuple(r.to_row()) == KLReport.CSV_COLUMNS

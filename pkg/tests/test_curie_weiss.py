import itertools
import math

import numpy as np
import pytest

from gibbsmix import (SizeError, all_spins, coupling_matrix, energies, gibbs_distribution, glauber_kernel,
                      hamiltonian, magnetisation, magnetisation_cut, spins, tv_distance)
from gibbsmix.curie_weiss import ModelParams, magnetisations

GRID = [(T, h) for T in (2.0, 15.0) for h in (0.0, 2.0)]


def _h_naive(s, h):
    d = len(s)
    return -sum(2.0 ** -abs(i - j) * s[i] * s[j] for i in range(d) for j in range(d)) - h * sum(s)


def test_hamiltonian_examples():
    assert hamiltonian(np.array([1]), ModelParams(1, 1.0)) == -1.0
    assert hamiltonian(np.array([1, 1]), ModelParams(2, 1.0)) == -3.0
    assert hamiltonian(3, ModelParams(2, 1.0)) == -3.0


def test_spin_encoding():
    assert spins(0b0101, 4).tolist() == [1, -1, 1, -1]
    S = all_spins(3)
    assert all(S[x].tolist() == spins(x, 3).tolist() for x in range(8))
    assert np.allclose(coupling_matrix(3), [[1, .5, .25], [.5, 1, .5], [.25, .5, 1]])


@pytest.mark.parametrize("h", [0.0, 0.7, 2.0])
def test_energies_match_naive_and_symmetry(h):
    d = 4
    E = energies(ModelParams(d, 1.0, h))
    E_neg = energies(ModelParams(d, 1.0, -h))
    full = (1 << d) - 1
    for x in range(1 << d):
        s = spins(x, d)
        assert E[x] == pytest.approx(_h_naive(s, h), abs=1e-13)
        assert E[x] == pytest.approx(E_neg[full ^ x], abs=1e-13)
        if h == 0:
            assert E[x] == pytest.approx(E[full ^ x], abs=1e-13)


def test_gibbs_distribution_properties():
    d = 4
    pi = gibbs_distribution(ModelParams(d, 2.0, 0.0)).probs
    full = (1 << d) - 1
    assert np.all(pi > 0) and pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(pi, pi[full ^ np.arange(1 << d)], atol=1e-15)
    for T, h in GRID:
        p = gibbs_distribution(ModelParams(d, T, h)).probs
        rev = [int("".join(format(x, f"0{d}b"))[::-1], 2) for x in range(1 << d)]
        assert np.allclose(p, p[rev], atol=1e-15)
    hot = gibbs_distribution(ModelParams(d, 1e6, 2.0)).probs
    assert tv_distance(hot, np.full(1 << d, 1 / (1 << d))) <= 1e-4


def test_gibbs_matches_unshifted_formula():
    params = ModelParams(3, 2.0, 0.5)
    w = np.array([math.exp(-_h_naive(spins(x, 3), 0.5) / 2.0) for x in range(8)])
    assert np.allclose(gibbs_distribution(params).probs, w / w.sum(), atol=1e-15)


@pytest.mark.parametrize("T,h", GRID)
def test_glauber_kernel(T, h):
    d = 4
    params = ModelParams(d, T, h)
    P = glauber_kernel(params)
    assert P.reversible
    E = energies(params)
    M = P.matrix
    assert np.all(np.diag(M) >= 0) and np.allclose(M.sum(axis=1), 1.0, atol=1e-14)
    for x, y in itertools.product(range(1 << d), repeat=2):
        diff = bin(x ^ y).count("1")
        if diff == 1:
            expect = math.exp(-max(E[y] - E[x], 0.0) / T) / d
            assert M[x, y] == pytest.approx(expect, abs=1e-15)
            if E[y] <= E[x]:
                assert M[x, y] == 1 / d
        elif diff > 1:
            assert M[x, y] == 0.0


def test_size_limit_and_params():
    with pytest.raises(SizeError):
        glauber_kernel(ModelParams(13, 1.0))
    with pytest.raises(ValueError):
        ModelParams(0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(3, 0.0)


def test_magnetisation_examples():
    assert magnetisation(np.ones(5, dtype=int)) == 5
    assert magnetisation(np.array([1, -1, 1, -1])) == 0
    for x in range(16):
        assert magnetisation(spins(x, 4)) == -magnetisation(-spins(x, 4))
        assert magnetisation(x, 4) == magnetisations(4)[x]


def test_magnetisation_cut_sizes():
    assert len(magnetisation_cut(1)) == 1 and magnetisation_cut(1).mask == 0b10
    assert len(magnetisation_cut(2)) == 3
    assert len(magnetisation_cut(4)) == 11
    with pytest.raises(ValueError):
        magnetisation_cut(0)


@pytest.mark.parametrize("T", [2.0, 15.0, 0.5])
def test_magnetisation_cut_mass_at_zero_field(T):
    pi = gibbs_distribution(ModelParams(4, T, 0.0))
    assert magnetisation_cut(4).mass(pi) >= 0.5

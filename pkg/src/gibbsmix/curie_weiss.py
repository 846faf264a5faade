"""Curie-Weiss benchmark with geometric couplings ``2**-|i - j|``.

Configurations of ``d`` spins are encoded as integers in ``[0, 2**d)``:
bit ``b`` set means spin ``b`` is ``+1``.  The energy double sum runs over
all ordered pairs including ``i = j``; the diagonal adds the constant
``-d``, which cancels in both the Gibbs law and the Metropolis ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Cut, Distribution, Kernel, SizeError, validate_kernel

__all__ = [
    "ModelParams",
    "spins",
    "all_spins",
    "coupling_matrix",
    "hamiltonian",
    "energies",
    "gibbs_distribution",
    "glauber_kernel",
    "magnetisation",
    "magnetisation_cut",
]

MAX_SPINS = 12


@dataclass(frozen=True)
class ModelParams:
    d: int
    T: float
    h: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"need at least one spin, got d = {self.d}")
        if not self.T > 0:
            raise ValueError(f"temperature must be positive, got T = {self.T}")

    @property
    def n(self) -> int:
        return 1 << self.d


def _check_size(d: int):
    if d > MAX_SPINS:
        raise SizeError(f"d = {d} gives 2**{d} states; the dense limit is d = {MAX_SPINS}")


def spins(x: int, d: int) -> np.ndarray:
    """Spin vector in ``{-1, +1}^d`` of configuration index ``x``."""
    return np.where((int(x) >> np.arange(d)) & 1, 1, -1)


def all_spins(d: int) -> np.ndarray:
    """``2**d x d`` array; row ``x`` is ``spins(x, d)``."""
    idx = np.arange(1 << d)[:, None]
    return np.where((idx >> np.arange(d)[None, :]) & 1, 1, -1)


def coupling_matrix(d: int) -> np.ndarray:
    i = np.arange(d)
    return 2.0 ** -np.abs(i[:, None] - i[None, :])


def _as_spins(x, d: int) -> np.ndarray:
    if np.isscalar(x):
        return spins(int(x), d)
    s = np.asarray(x)
    if s.shape != (d,) or not np.all(np.abs(s) == 1):
        raise ValueError(f"expected {d} spins in {{-1, +1}}")
    return s


def hamiltonian(x, params: ModelParams) -> float:
    """Energy of one configuration, given as an index or a spin vector."""
    s = _as_spins(x, params.d).astype(float)
    return float(-s @ coupling_matrix(params.d) @ s - params.h * s.sum())


def energies(params: ModelParams) -> np.ndarray:
    _check_size(params.d)
    s = all_spins(params.d).astype(float)
    J = coupling_matrix(params.d)
    return -np.einsum("xi,ij,xj->x", s, J, s) - params.h * s.sum(axis=1)


def gibbs_distribution(params: ModelParams) -> Distribution:
    """``pi(x) ~ exp(-H(x) / T)``, normalised with a max shift."""
    logw = -energies(params) / params.T
    w = np.exp(logw - logw.max())
    return Distribution(w / w.sum())


def glauber_kernel(params: ModelParams) -> Kernel:
    """Single-spin-flip Metropolis dynamics with uniform coordinate choice."""
    d = params.d
    H = energies(params)
    n = H.size
    P = np.zeros((n, n))
    x = np.arange(n)
    for b in range(d):
        y = x ^ (1 << b)
        P[x, y] = np.exp(-np.maximum(H[y] - H[x], 0.0) / params.T) / d
    P[x, x] = 1.0 - P.sum(axis=1)
    return validate_kernel(P, gibbs_distribution(params))


def magnetisation(x, d: int | None = None) -> int:
    """Sum of spins; ``x`` is a spin vector, or an index when ``d`` is given."""
    s = spins(x, d) if d is not None else np.asarray(x)
    return int(s.sum())


def magnetisations(d: int) -> np.ndarray:
    return all_spins(d).sum(axis=1)


def magnetisation_cut(d: int) -> Cut:
    """Configurations with non-negative magnetisation."""
    if d < 1:
        raise ValueError("need at least one spin")
    return Cut.from_indicator(magnetisations(d) >= 0)

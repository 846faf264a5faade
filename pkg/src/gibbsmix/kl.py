"""Kullback-Leibler objectives for Gibbs kernels and additive mixtures.

Natural logarithms throughout, with ``0 log(0 / a) = 0``.  Divergences
that are infinite are returned as ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (Distribution, InvariantError, Kernel, LiftedKernel, Partition,
                   additive_mixture, gibbs_kernel, lifted_kernel,
                   stationary_kernel)

__all__ = [
    "KLReport",
    "kl_divergence",
    "kl_kernels",
    "kl_lifted_direct",
    "shannon_entropy",
    "kl_gibbs",
    "kl_lifted",
    "optimal_entropy_partition",
    "optimal_lifted_partition",
    "kl_mixture_bound",
    "kl_report",
]


def _xlogy_ratio(p: np.ndarray, q: np.ndarray) -> float:
    """``sum p log(p/q)`` over ``p > 0``; ``inf`` if some ``p > 0`` meets ``q = 0``."""
    pos = p > 0
    if np.any(pos & (q <= 0)):
        return math.inf
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))


def kl_divergence(mu, nu) -> float:
    mu = np.asarray(getattr(mu, "probs", mu), dtype=float)
    nu = np.asarray(getattr(nu, "probs", nu), dtype=float)
    if mu.shape != nu.shape:
        raise ValueError(f"shape mismatch {mu.shape} vs {nu.shape}")
    return _xlogy_ratio(mu, nu)


def _weighted_kl(weights: np.ndarray, P: np.ndarray, Q: np.ndarray) -> float:
    pos = (P > 0) & (weights[:, None] > 0)
    if np.any(pos & (Q <= 0)):
        return math.inf
    flow = weights[:, None] * P
    return float(np.sum(flow[pos] * np.log(P[pos] / Q[pos])))


def kl_kernels(P: Kernel, Q: Kernel) -> float:
    """``sum_{x,y} pi(x) P(x,y) log(P(x,y) / Q(x,y))``."""
    if P.n != Q.n or np.max(np.abs(P.pi.probs - Q.pi.probs)) > 1e-12:
        raise InvariantError("kernels do not share a stationary distribution")
    return _weighted_kl(P.pi.probs, P.matrix, Q.matrix)


def kl_lifted_direct(Q: LiftedKernel) -> float:
    """Divergence of the lifted chain from its rank-one stationary chain, on all ``2n`` states."""
    target = np.tile(Q.pi_tilde, (Q.pi_tilde.size, 1))
    return _weighted_kl(Q.pi_tilde, Q.matrix, target)


def shannon_entropy(p) -> float:
    p = np.asarray(getattr(p, "probs", p), dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("entropy needs a probability vector")
    pos = p > 0
    return float(-np.sum(p[pos] * np.log(p[pos])))


def kl_gibbs(part: Partition, pi: Distribution) -> float:
    """``KL_pi(G || Pi)``, which equals the entropy of the block masses."""
    masses = part.masses(pi)
    return shannon_entropy(masses / masses.sum())


def kl_lifted(P: Kernel, part: Partition, alpha: float) -> float:
    """``(1 - alpha) KL_pi(G || Pi) + alpha KL_pi(P || Pi)``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    kl_p = kl_kernels(P, stationary_kernel(P.pi))
    return (1 - alpha) * kl_gibbs(part, P.pi) + alpha * kl_p


def optimal_entropy_partition(pi: Distribution, k: int) -> Partition:
    """``k``-partition minimising the entropy of its block masses.

    The ``k - 1`` lightest states become singletons and the remaining
    ``n - k + 1`` states share the last block.  Equal masses are ordered by
    state index.
    """
    n = pi.n
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n = {n}, got k = {k}")
    order = np.argsort(pi.probs, kind="stable")
    labels = np.full(n, k - 1, dtype=np.int64)
    labels[order[:k - 1]] = np.arange(k - 1)
    return Partition(labels, k)


def optimal_lifted_partition(P: Kernel, k: int, alpha: float) -> Partition:
    """Minimiser of the lifted-chain divergence over ``k``-partitions, for ``alpha < 1``.

    At ``alpha = 1`` the Gibbs kernel carries no weight and every partition
    is optimal, so that case is rejected.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return optimal_entropy_partition(P.pi, k)


def kl_mixture_bound(P: Kernel, part: Partition, alpha: float) -> tuple[float, float]:
    """``(bound, actual)`` for ``KL_pi(A_alpha || Pi) <= (1 - alpha) H(pibar) + alpha KL_pi(P || Pi)``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    Pi = stationary_kernel(P.pi)
    bound = (1 - alpha) * kl_gibbs(part, P.pi) + alpha * kl_kernels(P, Pi)
    mix = additive_mixture(P, gibbs_kernel(P.pi, part), alpha)
    return bound, kl_kernels(mix, Pi)


@dataclass(frozen=True)
class KLReport:
    kl_P: float
    kl_G: float
    entropy_pbar: float
    lifted: float
    mixture_bound: float
    actual: float
    alpha: float

    CSV_COLUMNS = ("alpha", "kl_P", "kl_G", "entropy_pbar", "lifted", "mixture_bound", "actual")

    def to_row(self) -> dict:
        return {c: repr(getattr(self, c)) if c != "alpha" else self.alpha
                for c in self.CSV_COLUMNS}


def kl_report(P: Kernel, part: Partition, alpha: float) -> KLReport:
    Pi = stationary_kernel(P.pi)
    G = gibbs_kernel(P.pi, part)
    kl_p = kl_kernels(P, Pi)
    kl_g = kl_kernels(G, Pi)
    entropy = kl_gibbs(part, P.pi)
    bound, actual = kl_mixture_bound(P, part, alpha)
    lifted = kl_lifted_direct(lifted_kernel(P, G, alpha))
    return KLReport(kl_p, kl_g, entropy, lifted, bound, actual, float(alpha))

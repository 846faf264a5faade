"""Squared ``pi``-weighted Frobenius distance to stationarity.

``||M||_{F,pi}^2 = Tr(M* M)`` where ``M*(x, y) = pi(y) M(y, x) / pi(x)`` is
the adjoint in ``l^2(pi)``.  The direct evaluation here is valid for any
stationary kernel; the closed forms require reversibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (Cut, InvariantError, Kernel, additive_mixture,
                   gibbs_kernel, projection_chain)
from .spectral import reversible_spectrum

__all__ = [
    "FrobeniusBreakdown",
    "frobenius_distance_direct",
    "trace_p2",
    "trace_gp",
    "frobenius_mixture_formula",
    "trace_projection_two_block",
    "cut_flow",
    "g_functional",
    "h_functional",
    "optimal_alpha_zero_trace",
    "decay_bound",
    "crude_decay_bound",
]

ZERO_TRACE_TOL = 1e-10


@dataclass(frozen=True)
class FrobeniusBreakdown:
    value: float
    trace_p2: float
    trace_pbar: float
    k: int
    alpha: float

    CSV_COLUMNS = ("alpha", "k", "trace_pbar", "trace_p2", "value")

    def to_row(self) -> dict:
        return {"alpha": self.alpha, "k": self.k, "trace_pbar": repr(self.trace_pbar),
                "trace_p2": repr(self.trace_p2), "value": repr(self.value)}


def frobenius_norm_sq(M: np.ndarray, pi: np.ndarray) -> float:
    """``Tr(M* M) = sum_{x,y} pi(x) / pi(y) * M(x, y)**2``."""
    return float(np.sum((pi[:, None] / pi[None, :]) * M * M))


def frobenius_distance_direct(K: Kernel) -> float:
    """``||K - Pi||_{F,pi}^2`` through the weighted adjoint."""
    pi = K.pi.probs
    return frobenius_norm_sq(K.matrix - pi[None, :], pi)


def trace_p2(P: Kernel) -> float:
    """``Tr(P^2) = sum_{x,y} P(x, y) P(y, x)`` without forming ``P^2``."""
    return float(np.sum(P.matrix * P.matrix.T))


def trace_gp(P: Kernel, part) -> float:
    """``Tr(GP)``, evaluated as the trace of the projection chain."""
    return float(np.trace(projection_chain(P, part).matrix))


def _require_reversible(P: Kernel, what: str):
    if not P.reversible:
        raise InvariantError(f"{what} requires a reversible kernel")


def frobenius_mixture_formula(P: Kernel, part, alpha: float) -> FrobeniusBreakdown:
    """Closed form of ``||alpha P + (1 - alpha) G - Pi||^2`` for reversible ``P``."""
    _require_reversible(P, "the closed-form Frobenius distance")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    part = part.partition() if isinstance(part, Cut) else part
    tp = trace_gp(P, part)
    t2 = trace_p2(P)
    value = (2 * alpha * (1 - alpha) * tp + alpha ** 2 * t2
             + (1 - alpha) ** 2 * part.k - 1.0)
    return FrobeniusBreakdown(value, t2, tp, part.k, float(alpha))


def cut_flow(P: Kernel, S: Cut) -> float:
    """Stationary flow ``sum_{x in S, y in S'} pi(x) P(x, y)``."""
    ind = S.indicator()
    return float(P.flow[np.ix_(ind, ~ind)].sum())


def g_functional(P: Kernel, S: Cut) -> float:
    mass = S.mass(P.pi)
    return cut_flow(P, S) / (mass * (1.0 - mass))


def h_functional(P: Kernel, S: Cut) -> float:
    return cut_flow(P, S) / S.mass(P.pi)


def trace_projection_two_block(P: Kernel, S: Cut) -> float:
    """``Tr(Pbar) = 2 - g(S)`` for the partition ``S | S'``."""
    _require_reversible(P, "the two-block trace identity")
    return 2.0 - g_functional(P, S)


def optimal_alpha_zero_trace(P: Kernel, part) -> float:
    """Minimising weight ``k / (Tr(P^2) + k)`` when ``Tr(Pbar) = 0``.

    Raises ``ValueError`` if the projection chain has nonzero trace, since
    the formula does not hold there.
    """
    _require_reversible(P, "the optimal mixture weight")
    part = part.partition() if isinstance(part, Cut) else part
    tp = trace_gp(P, part)
    if abs(tp) > ZERO_TRACE_TOL:
        raise ValueError(f"optimal weight formula needs Tr(Pbar) = 0, got {tp:.3g}")
    return part.k / (trace_p2(P) + part.k)


def decay_bound(P: Kernel, part, alpha: float, l: int) -> float:
    """``(1 - alpha gamma*)^{2(l-1)} ||A_alpha - Pi||^2``, bounding ``||A_alpha^l - Pi||^2``."""
    if l < 2:
        raise ValueError("decay bound is stated for l >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    _require_reversible(P, "the decay bound")
    rate = 1.0 - alpha * reversible_spectrum(P).abs_gap
    mix = additive_mixture(P, gibbs_kernel(P.pi, part), alpha)
    return rate ** (2 * (l - 1)) * frobenius_distance_direct(mix)


def crude_decay_bound(P: Kernel, alpha: float, l: int) -> float:
    """``(n - 1)(1 - alpha gamma*)^{2l}``."""
    if l < 2:
        raise ValueError("decay bound is stated for l >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    rate = 1.0 - alpha * reversible_spectrum(P).abs_gap
    return (P.n - 1) * rate ** (2 * l)

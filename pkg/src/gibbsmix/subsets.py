"""Exhaustive sweeps over all subsets of a small state space.

Every quantity is tabulated for all ``2**n`` bitmasks at once.  Tables are
built by doubling: the masks in ``[2**j, 2**(j+1))`` are the masks of
``[0, 2**j)`` with element ``j`` added, so each table costs ``O(2**n)``
additions per state.  Index ``m`` of a table holds the value for the
subset whose bit pattern is ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SizeError

MAX_ENUM_STATES = 25


def check_enumerable(n: int, limit: int = MAX_ENUM_STATES):
    if n > limit:
        raise SizeError(f"exhaustive subset search needs n <= {limit}, got n = {n}")
    if n < 2:
        raise SizeError("subset search needs at least two states")


def subset_sums(weights) -> np.ndarray:
    """``out[m] = sum(weights[x] for x in m)``."""
    w = np.asarray(weights, dtype=float)
    out = np.zeros(1)
    for x in range(w.size):
        out = np.concatenate([out, out + w[x]])
    return out


def internal_sums(weights) -> np.ndarray:
    """``out[m] = sum(weights[x, y] for x in m for y in m)``."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    out = np.zeros(1)
    sym = w + w.T
    for x in range(n):
        # sum of w[x, y] + w[y, x] over y in the lower-bit subset
        link = subset_sums(sym[x, :x])
        out = np.concatenate([out, out + w[x, x] + link])
    return out


@dataclass(frozen=True, eq=False)
class SubsetTables:
    """Per-mask mass and flow tables for a flow matrix ``F(x, y)``.

    ``inner[m]`` is the flow within ``S``, ``outer[m]`` the flow within
    ``S'`` and ``cross[m]`` the flow from ``S`` to ``S'``.
    """

    n: int
    mass: np.ndarray
    inner: np.ndarray
    outer: np.ndarray
    cross: np.ndarray
    cross_back: np.ndarray

    @property
    def nontrivial(self) -> slice:
        return slice(1, (1 << self.n) - 1)


def flow_tables(flow: np.ndarray, pi: np.ndarray) -> SubsetTables:
    """Tables for ``flow = diag(pi) @ M`` with ``M`` a ``pi``-stationary kernel."""
    n = pi.size
    check_enumerable(n)
    mass = subset_sums(pi)
    inner = internal_sums(flow)
    # complement of m is full ^ m, i.e. the reversed index
    outer = inner[::-1].copy()
    row_out = subset_sums(flow.sum(axis=1))
    cross = row_out - inner
    col_out = subset_sums(flow.sum(axis=0))
    cross_back = col_out - inner
    return SubsetTables(n, mass, inner, outer, cross, cross_back)


def pick(values: np.ndarray, *, maximize: bool, tol: float = 1e-12,
         prefer: int | None = None) -> tuple[int, float, np.ndarray]:
    """Optimum of ``values`` over nontrivial masks with tolerant tie-breaking.

    Masks within ``tol * max(1, |best|)`` of the optimum tie.  Among ties the
    ``prefer`` mask wins if present, else the smallest mask.  Returns the
    chosen mask, its value and the full array of tying masks.  ``values`` is
    indexed by mask; entries for the empty and full sets are ignored.
    """
    n_masks = values.size
    body = np.asarray(values[1:n_masks - 1], dtype=float)
    best = body.max() if maximize else body.min()
    slack = tol * max(1.0, abs(best))
    ties = np.flatnonzero((body >= best - slack) if maximize else (body <= best + slack)) + 1
    if prefer is not None and prefer in set(ties.tolist()):
        mask = int(prefer)
    else:
        mask = int(ties[0])
    return mask, float(values[mask]), ties

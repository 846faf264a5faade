"""Spectra, spectral gaps and Cheeger constants of reversible kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Cut, InvariantError, Kernel
from .subsets import flow_tables, pick

__all__ = [
    "SpectrumReport",
    "CheegerReport",
    "reversible_spectrum",
    "cheeger_constants",
    "slem_mixture_bound",
]

SPECTRUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalues: np.ndarray
    slem: float
    gap: float
    abs_gap: float

    @property
    def abs_gap_vanishes(self) -> bool:
        """True for reducible or periodic kernels, where ``abs_gap`` is 0."""
        return self.abs_gap <= SPECTRUM_TOL


@dataclass(frozen=True)
class CheegerReport:
    classical: float
    classical_cut: Cut
    symmetrised: float
    symmetrised_cut: Cut

    CSV_COLUMNS = ("classical", "classical_cut", "symmetrised", "symmetrised_cut")

    def to_row(self) -> dict:
        return {
            "classical": repr(self.classical),
            "classical_cut": self.classical_cut.mask,
            "symmetrised": repr(self.symmetrised),
            "symmetrised_cut": self.symmetrised_cut.mask,
        }


def reversible_spectrum(P: Kernel) -> SpectrumReport:
    """Eigenvalues of a reversible kernel, sorted non-increasingly.

    The kernel is similar to the symmetric matrix ``D^{1/2} P D^{-1/2}``
    with ``D = diag(pi)``; its spectrum comes from a dense symmetric
    eigensolver, so it is real by construction.
    """
    if not P.reversible:
        raise InvariantError("spectrum requires a reversible kernel")
    root = np.sqrt(P.pi.probs)
    sym = root[:, None] * P.matrix / root[None, :]
    sym = 0.5 * (sym + sym.T)
    eig = np.linalg.eigvalsh(sym)[::-1].copy()
    if abs(eig[0] - 1.0) > SPECTRUM_TOL or eig[-1] < -1 - SPECTRUM_TOL:
        raise InvariantError(f"spectrum [{eig[-1]}, {eig[0]}] is not that of a stochastic kernel")
    eig = np.clip(eig, -1.0, 1.0)
    eig.setflags(write=False)
    if eig.size == 1:
        return SpectrumReport(eig, 0.0, 1.0, 1.0)
    slem = float(max(abs(eig[1]), abs(eig[-1])))
    return SpectrumReport(eig, slem, float(1.0 - eig[1]), 1.0 - slem)


def cheeger_constants(P: Kernel) -> CheegerReport:
    """Classical and symmetrised Cheeger constants by exhaustive enumeration.

    Only ``n <= 25`` is supported.  Ties go to the smallest bitmask.
    Reducible kernels are accepted; their constants are simply 0.
    """
    t = flow_tables(P.flow, P.pi.probs)
    n = P.n
    mass = t.mass
    with np.errstate(divide="ignore", invalid="ignore"):
        classical = t.cross / mass
        sym = t.cross / (mass * (1.0 - mass))
    classical = np.where(mass <= 0.5 + 1e-12, classical, np.inf)
    classical[0] = classical[-1] = np.inf
    sym[0] = sym[-1] = np.inf
    c_mask, c_val, _ = pick(classical, maximize=False)
    s_mask, s_val, _ = pick(sym, maximize=False)
    return CheegerReport(c_val, Cut(c_mask, n), s_val, Cut(s_mask, n))


def slem_mixture_bound(P: Kernel, alpha: float) -> float:
    """Upper bound ``1 - alpha * gamma*(P)`` on the SLEM of ``alpha P + (1 - alpha) G``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return 1.0 - alpha * reversible_spectrum(P).abs_gap

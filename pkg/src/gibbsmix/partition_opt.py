"""Search over two-block cuts ``S | S'``.

Objectives are tabulated for every nontrivial cut at once (see
:mod:`gibbsmix.subsets`), so brute force over ``2**16`` cuts is a handful
of vectorised passes.  Ties always go to the smallest bitmask.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Cut, InvariantError, Kernel, additive_mixture, gibbs_kernel
from .frobenius import (frobenius_distance_direct, g_functional,
                        h_functional, trace_p2)
from .subsets import SubsetTables, check_enumerable, flow_tables, pick

__all__ = [
    "Objective",
    "CutSearchResult",
    "MMIterate",
    "MMTrace",
    "SubmodularVerdict",
    "DecompositionTerms",
    "objective_table",
    "evaluate_cut_objective",
    "brute_force_cut",
    "singleton_argmax",
    "singleton_constrained_argmax",
    "check_submodular",
    "decomposition_terms",
    "decomposition_term_functions",
    "majorizer_zeta",
    "mm_optimize",
]

TIE_TOL = 1e-12


class Objective(str, enum.Enum):
    FROBENIUS_A = "frobenius_A"
    TRACE_GP = "trace_GP"
    TRACE_GPG = "trace_GPG"
    G_MAX = "g_max"
    G_MIN = "g_min"
    H_MAX = "h_max"

    @property
    def maximize(self) -> bool:
        return self in (Objective.G_MAX, Objective.H_MAX)


@dataclass(frozen=True)
class CutSearchResult:
    best_cut: Cut
    objective_value: float
    objective_kind: Objective
    evaluations: int

    CSV_COLUMNS = ("objective", "cut_bitmask", "objective_value", "evaluations")

    def to_row(self) -> dict:
        return {"objective": self.objective_kind.value, "cut_bitmask": self.best_cut.mask,
                "objective_value": repr(self.objective_value),
                "evaluations": self.evaluations}


def _check_open_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise ValueError(
            f"cut optimisation needs alpha in (0, 1), got {alpha}: at alpha = 0 the "
            "objective is the constant k - 1 and at alpha = 1 the cut plays no role")


def _two_block_traces(t: SubsetTables):
    mass = t.mass
    with np.errstate(divide="ignore", invalid="ignore"):
        stay_in = t.inner / mass
        stay_out = t.outer / (1.0 - mass)
        go_out = t.cross / mass
        go_in = t.cross_back / (1.0 - mass)
    return stay_in, stay_out, go_out, go_in


def objective_table(P: Kernel, kind, alpha: float = 0.5) -> np.ndarray:
    """Value of ``kind`` at every bitmask; entries 0 and ``2**n - 1`` are ``nan``."""
    kind = Objective(kind)
    n = P.n
    check_enumerable(n)
    pi = P.pi.probs
    t = flow_tables(P.flow, pi)
    mass = t.mass
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is Objective.FROBENIUS_A:
            if not P.reversible:
                raise InvariantError("Frobenius cut objective requires a reversible kernel")
            _check_open_alpha(alpha)
            stay_in, stay_out, _, _ = _two_block_traces(t)
            values = (2 * alpha * (1 - alpha) * (stay_in + stay_out)
                      + alpha ** 2 * trace_p2(P) + 2 * (1 - alpha) ** 2 - 1.0)
        elif kind is Objective.TRACE_GP:
            # Tr(P G P) = Tr(G P^2): the two-block projection trace of P^2
            p2 = P.matrix @ P.matrix
            t2 = flow_tables(pi[:, None] * p2, pi)
            values = t2.inner / mass + t2.outer / (1.0 - mass)
        elif kind is Objective.TRACE_GPG:
            # Tr(G P G P G) = Tr(Pbar^2) since G P G lifts the projection chain
            stay_in, stay_out, go_out, go_in = _two_block_traces(t)
            values = stay_in ** 2 + stay_out ** 2 + 2 * go_out * go_in
        elif kind in (Objective.G_MAX, Objective.G_MIN):
            values = t.cross / (mass * (1.0 - mass))
        else:
            values = t.cross / mass
    values = np.array(values, dtype=float)
    values[0] = values[-1] = np.nan
    return values


def evaluate_cut_objective(P: Kernel, S: Cut, kind, alpha: float = 0.5) -> float:
    """Objective at a single cut from explicit matrix products."""
    kind = Objective(kind)
    G = gibbs_kernel(P.pi, S)
    if kind is Objective.FROBENIUS_A:
        return frobenius_distance_direct(additive_mixture(P, G, alpha))
    if kind is Objective.TRACE_GP:
        return float(np.trace(P.matrix @ G.matrix @ P.matrix))
    if kind is Objective.TRACE_GPG:
        g, p = G.matrix, P.matrix
        return float(np.trace(g @ p @ g @ p @ g))
    if kind in (Objective.G_MAX, Objective.G_MIN):
        return g_functional(P, S)
    return h_functional(P, S)


def brute_force_cut(P: Kernel, alpha: float, objective_kind) -> CutSearchResult:
    """Exact optimum over all ``2**n - 2`` nontrivial cuts (``n <= 25``)."""
    kind = Objective(objective_kind)
    values = objective_table(P, kind, alpha)
    mask, value, _ = pick(values, maximize=kind.maximize, tol=TIE_TOL)
    return CutSearchResult(Cut(mask, P.n), value, kind, values.size - 2)


def optimal_cut_set(P: Kernel, alpha: float, objective_kind) -> np.ndarray:
    """All masks attaining the optimum of ``objective_kind`` (within tie tolerance)."""
    kind = Objective(objective_kind)
    values = objective_table(P, kind, alpha)
    return pick(values, maximize=kind.maximize, tol=TIE_TOL)[2]


def _argmax_lowest(values: np.ndarray) -> int:
    best = values.max()
    return int(np.flatnonzero(values >= best - TIE_TOL * max(1.0, abs(best)))[0])


def singleton_argmax(P: Kernel) -> Cut:
    """Singleton ``{x*}`` maximising ``1 - P(x, x)``; it also maximises ``h``."""
    if P.n < 2:
        raise InvariantError("need at least two states")
    return Cut(1 << _argmax_lowest(1.0 - np.diag(P.matrix)), P.n)


def singleton_constrained_argmax(P: Kernel) -> Cut:
    """Best Frobenius cut among singletons: maximises ``(1 - P(x,x)) / (1 - pi(x))``."""
    if P.n < 2:
        raise InvariantError("need at least two states")
    ratio = (1.0 - np.diag(P.matrix)) / (1.0 - P.pi.probs)
    return Cut(1 << _argmax_lowest(ratio), P.n)


@dataclass(frozen=True)
class SubmodularVerdict:
    """Outcome of an exhaustive lattice test.

    ``kind`` is one of ``modular``, ``submodular``, ``supermodular`` or
    ``neither``.  ``witness`` holds a pair ``(A, B)`` violating submodularity
    (or supermodularity, for a submodular-only verdict), else ``None``.
    ``min_slack`` and ``max_slack`` are the extremes of
    ``f(A) + f(B) - f(A & B) - f(A | B)`` over the tested pairs.
    """

    kind: str
    witness: tuple[int, int] | None
    min_slack: float
    max_slack: float
    pairs: int

    @property
    def is_submodular(self) -> bool:
        return self.kind in ("modular", "submodular")

    @property
    def is_supermodular(self) -> bool:
        return self.kind in ("modular", "supermodular")


def check_submodular(f: Callable[[int], float], n: int, *, nontrivial: bool = False,
                     tol: float = 1e-12) -> SubmodularVerdict:
    """Test ``f(A & B) + f(A | B) <= f(A) + f(B)`` on every pair of subsets.

    ``f`` maps a bitmask to a real.  With ``nontrivial=True`` only pairs
    whose four sets are all nonempty proper subsets are tested, for
    functions defined on ``0 < pi(S) < 1`` only.  Violations smaller than
    ``tol`` times the largest ``|f|`` are ignored.
    """
    if n > 10:
        raise InvariantError(f"exhaustive pair test supports n <= 10, got {n}")
    size = 1 << n
    full = size - 1
    masks = np.arange(size)
    valid = (masks > 0) & (masks < full) if nontrivial else np.ones(size, dtype=bool)
    values = np.full(size, np.nan)
    for m in np.flatnonzero(valid):
        values[m] = float(f(int(m)))
    a, b = np.meshgrid(masks, masks, indexing="ij")
    a, b = a.ravel(), b.ravel()
    lo, hi = a & b, a | b
    use = valid[a] & valid[b] & valid[lo] & valid[hi] & (a < b)
    a, b, lo, hi = a[use], b[use], lo[use], hi[use]
    slack = values[a] + values[b] - values[lo] - values[hi]
    if slack.size == 0:
        return SubmodularVerdict("modular", None, 0.0, 0.0, 0)
    scale = tol * max(1.0, float(np.nanmax(np.abs(values))))
    sub = bool(slack.min() >= -scale)
    sup = bool(slack.max() <= scale)
    if sub and sup:
        kind, witness = "modular", None
    elif sub:
        i = int(np.argmax(slack))
        kind, witness = "submodular", (int(a[i]), int(b[i]))
    elif sup:
        i = int(np.argmin(slack))
        kind, witness = "supermodular", (int(a[i]), int(b[i]))
    else:
        i = int(np.argmin(slack))
        kind, witness = "neither", (int(a[i]), int(b[i]))
    return SubmodularVerdict(kind, witness, float(slack.min()), float(slack.max()), slack.size)


@dataclass(frozen=True)
class DecompositionTerms:
    """``total = supermodular_part - concave_part``; both parts are supermodular in ``S``."""

    supermodular_part: float
    concave_part: float
    total: float


def _block_flows(P: Kernel, ind: np.ndarray):
    F = P.flow
    return float(F[np.ix_(ind, ind)].sum()), float(F[np.ix_(~ind, ~ind)].sum())


def _subtracted_constant(alpha: float, tp2: float) -> float:
    return 6 * alpha ** 2 - 4 * alpha - 1 - alpha ** 2 * tp2


def decomposition_terms(P: Kernel, S: Cut, alpha: float) -> DecompositionTerms:
    """Difference-of-supermodular split of ``||A_alpha(S) - Pi||^2``."""
    if not P.reversible:
        raise InvariantError("the decomposition requires a reversible kernel")
    ind = S.indicator()
    mass = S.mass(P.pi)
    inner, outer = _block_flows(P, ind)
    w = 2 * alpha * (1 - alpha)
    sup = w * (outer / mass + inner / (1.0 - mass))
    concave = w / (mass * (1.0 - mass)) + _subtracted_constant(alpha, trace_p2(P))
    return DecompositionTerms(sup, concave, sup - concave)


def decomposition_term_functions(P: Kernel) -> dict[str, Callable[[int], float]]:
    """The three supermodular pieces of ``g`` as bitmask oracles.

    ``g(S) = balance(S) - outer(S) - inner(S)`` with ``balance = 1/(pi(S) pi(S')) - 2``,
    ``outer = flow within S' / pi(S)`` and ``inner = flow within S / pi(S')``.
    """
    pi = P.pi.probs
    F = P.flow
    n = P.n

    def _ind(mask):
        return ((mask >> np.arange(n)) & 1).astype(bool)

    def balance(mask):
        m = pi[_ind(mask)].sum()
        return 1.0 / (m * (1.0 - m)) - 2.0

    def outer(mask):
        ind = _ind(mask)
        return F[np.ix_(~ind, ~ind)].sum() / pi[ind].sum()

    def inner(mask):
        ind = _ind(mask)
        return F[np.ix_(ind, ind)].sum() / pi[~ind].sum()

    return {"balance": balance, "outer": outer, "inner": inner}


def _tangent(mass, mass0: float):
    """Supporting line of ``t -> 1/(t(1-t))`` at ``mass0``, evaluated at ``mass``."""
    slope = (2 * mass0 - 1) / (mass0 ** 2 * (1 - mass0) ** 2)
    return 1.0 / (mass0 * (1.0 - mass0)) + slope * (mass - mass0)


def majorizer_zeta(P: Kernel, S: Cut, S0: Cut, alpha: float) -> float:
    """Modular-tangent majoriser ``zeta(S; S0)`` of ``||A_alpha(S) - Pi||^2``."""
    terms = decomposition_terms(P, S, alpha)
    w = 2 * alpha * (1 - alpha)
    lin = w * _tangent(S.mass(P.pi), S0.mass(P.pi))
    return terms.supermodular_part - lin - _subtracted_constant(alpha, trace_p2(P))


@dataclass(frozen=True)
class MMIterate:
    cut: Cut
    majorizer_value: float
    true_objective: float
    inner_exact: bool


@dataclass
class MMTrace:
    iterates: list[MMIterate] = field(default_factory=list)
    converged: bool = False

    CSV_COLUMNS = ("iteration", "bitmask", "objective", "majorizer", "inner_exact")

    @property
    def final(self) -> MMIterate:
        return self.iterates[-1]

    def to_rows(self) -> list[dict]:
        return [{"iteration": i, "bitmask": it.cut.mask, "objective": repr(it.true_objective),
                 "majorizer": repr(it.majorizer_value), "inner_exact": int(it.inner_exact)}
                for i, it in enumerate(self.iterates)]


class _FlipState:
    """Cut statistics with O(n) single-element flip updates."""

    def __init__(self, F: np.ndarray, pi: np.ndarray, ind: np.ndarray):
        self.F, self.pi = F, pi
        self.diag = np.diag(F).copy()
        self.s = ind.astype(float)
        t = 1.0 - self.s
        self.r_in, self.c_in = F @ self.s, F.T @ self.s
        self.r_out, self.c_out = F @ t, F.T @ t
        self.mass = float(pi @ self.s)
        self.inner = float(self.s @ self.r_in)
        self.outer = float(t @ self.r_out)
        self.size = int(ind.sum())

    def candidates(self):
        """Statistics after flipping each element, as arrays over elements."""
        delta = 1.0 - 2.0 * self.s
        mass = self.mass + delta * self.pi
        inner = self.inner + delta * (self.r_in + self.c_in) + self.diag
        outer = self.outer - delta * (self.r_out + self.c_out) + self.diag
        size = self.size + delta.astype(int)
        ok = (size > 0) & (size < self.s.size)
        return mass, inner, outer, ok

    def flip(self, x: int):
        d = 1.0 - 2.0 * self.s[x]
        mass, inner, outer, _ = self.candidates()
        self.mass, self.inner, self.outer = float(mass[x]), float(inner[x]), float(outer[x])
        self.s[x] += d
        self.size += int(d)
        col, row = self.F[:, x], self.F[x, :]
        self.r_in += d * col
        self.c_in += d * row
        self.r_out -= d * col
        self.c_out -= d * row

    def cut(self) -> Cut:
        return Cut.from_indicator(self.s > 0.5)


def _objective_from_stats(mass, inner, outer, alpha, tp2):
    w = 2 * alpha * (1 - alpha)
    return (w * (inner / mass + outer / (1.0 - mass))
            + alpha ** 2 * tp2 + 2 * (1 - alpha) ** 2 - 1.0)


def _zeta_from_stats(mass, inner, outer, mass0, alpha, tp2):
    w = 2 * alpha * (1 - alpha)
    sup = w * (outer / mass + inner / (1.0 - mass))
    return sup - w * _tangent(mass, mass0) - _subtracted_constant(alpha, tp2)


def _local_search(F, pi, start: Cut, mass0, alpha, tp2):
    state = _FlipState(F, pi, start.indicator())
    current = _zeta_from_stats(state.mass, state.inner, state.outer, mass0, alpha, tp2)
    while True:
        mass, inner, outer, ok = state.candidates()
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = _zeta_from_stats(mass, inner, outer, mass0, alpha, tp2)
        vals = np.where(ok, vals, np.inf)
        x = int(np.argmin(vals))
        if not vals[x] < current - TIE_TOL * max(1.0, abs(current)):
            return state.cut(), current
        state.flip(x)
        current = float(vals[x])


def mm_optimize(P: Kernel, alpha: float, S0: Cut, max_iters: int = 50,
                exact_limit: int = 20) -> MMTrace:
    """Majorise-minimise the Frobenius cut objective from ``S0``.

    Each step minimises ``zeta(.; S^{l-1})``: exhaustively when
    ``n <= exact_limit``, otherwise by best-improvement single-element flips
    started from ``S^{l-1}``.  If the previous cut ties for the minimum it is
    kept, which makes it a fixed point and stops the loop.
    """
    _check_open_alpha(alpha)
    if not P.reversible:
        raise InvariantError("MM cut optimisation requires a reversible kernel")
    if S0.n != P.n:
        raise InvariantError("starting cut and kernel sizes differ")
    n = P.n
    pi = P.pi.probs
    tp2 = trace_p2(P)
    exact = n <= exact_limit
    if exact:
        t = flow_tables(P.flow, pi)
        with np.errstate(divide="ignore", invalid="ignore"):
            objective = _objective_from_stats(t.mass, t.inner, t.outer, alpha, tp2)

        def true_obj(cut):
            return float(objective[cut.mask])
    else:
        F = P.flow

        def true_obj(cut):
            ind = cut.indicator()
            inner, outer = _block_flows(P, ind)
            return float(_objective_from_stats(cut.mass(P.pi), inner, outer, alpha, tp2))

    first = true_obj(S0)
    trace = MMTrace([MMIterate(S0, first, first, exact)])
    current = S0
    for _ in range(max_iters):
        mass0 = current.mass(P.pi)
        if exact:
            with np.errstate(divide="ignore", invalid="ignore"):
                zeta = _zeta_from_stats(t.mass, t.inner, t.outer, mass0, alpha, tp2)
            mask, zval, _ = pick(zeta, maximize=False, tol=TIE_TOL, prefer=current.mask)
            nxt = Cut(mask, n)
        else:
            nxt, zval = _local_search(F, pi, current, mass0, alpha, tp2)
        if nxt == current:
            trace.converged = True
            break
        trace.iterates.append(MMIterate(nxt, float(zval), true_obj(nxt), exact))
        current = nxt
    return trace

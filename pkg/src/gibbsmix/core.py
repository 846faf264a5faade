"""Markov-kernel data model.

Distributions, kernels, partitions and two-block cuts, together with the
constructions built on them: Gibbs kernels, projection chains, additive
mixtures ``alpha * P + (1 - alpha) * G`` and the lifted chain on
``X x {-1, +1}`` whose first-coordinate marginal is the mixture.

All matrices are dense ``numpy`` arrays.  Objects are frozen after
construction; every operation is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "InvariantError",
    "SizeError",
    "Distribution",
    "Kernel",
    "Partition",
    "Cut",
    "LiftedKernel",
    "validate_kernel",
    "stationary_kernel",
    "gibbs_kernel",
    "projection_chain",
    "additive_mixture",
    "lifted_kernel",
    "marginal_first_coordinate",
    "kernel_power",
    "tv_distance",
    "worst_case_tv",
    "tv_curve",
    "random_reversible_kernel",
    "random_partition",
    "write_matrix_csv",
    "read_matrix_csv",
]

STOCHASTIC_TOL = 1e-10
NORMALIZATION_TOL = 1e-12
MAX_STATES = 4096


class InvariantError(ValueError):
    """An input violates a structural invariant (row sums, stationarity, ...)."""


class SizeError(ValueError):
    """The requested computation exceeds the supported problem size."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Distribution:
    """Strictly positive probability vector."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(np.ravel(self.probs))
        if p.size == 0:
            raise InvariantError("distribution must have at least one state")
        bad = np.flatnonzero(~(p > 0))
        if bad.size:
            raise InvariantError(
                f"distribution entry {bad[0]} is not strictly positive ({float(p[bad[0]]):.17g})")
        total = p.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvariantError(f"distribution sums to {float(total):.17g}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_weights(cls, weights) -> "Distribution":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    @property
    def n(self) -> int:
        return self.probs.size

    def mass(self, states) -> float:
        return float(self.probs[states].sum())

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class Kernel:
    """Row-stochastic matrix together with a stationary law.

    Build through :func:`validate_kernel`, which checks the invariants and
    computes the reversibility flag.
    """

    matrix: np.ndarray
    pi: Distribution
    reversible: bool

    @property
    def n(self) -> int:
        return self.pi.n

    @property
    def flow(self) -> np.ndarray:
        """Edge flows ``pi(x) K(x, y)``."""
        return self.pi.probs[:, None] * self.matrix


def _is_reversible(matrix: np.ndarray, pi: np.ndarray, tol: float = STOCHASTIC_TOL) -> bool:
    flow = pi[:, None] * matrix
    return bool(np.max(np.abs(flow - flow.T), initial=0.0) <= tol)


def validate_kernel(matrix, pi) -> Kernel:
    """Check that ``matrix`` is a ``pi``-stationary transition matrix.

    Raises
    ------
    InvariantError
        Naming the first failed invariant (shape, negativity, row sum or
        stationarity) together with the offending index.
    """
    if not isinstance(pi, Distribution):
        pi = Distribution(pi)
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvariantError(f"kernel must be square, got shape {m.shape}")
    if m.shape[0] != pi.n:
        raise InvariantError(f"kernel has {m.shape[0]} states but pi has {pi.n}")
    if m.shape[0] > MAX_STATES:
        raise SizeError(f"{m.shape[0]} states exceeds the dense limit of {MAX_STATES}")
    if not np.all(np.isfinite(m)):
        i, j = np.argwhere(~np.isfinite(m))[0]
        raise InvariantError(f"entry ({i}, {j}) is not finite")
    low = m < -STOCHASTIC_TOL
    high = m > 1 + STOCHASTIC_TOL
    if low.any() or high.any():
        i, j = np.argwhere(low | high)[0]
        raise InvariantError(f"entry ({i}, {j}) = {float(m[i, j]):.17g} lies outside [0, 1]")
    rows = m.sum(axis=1)
    off = np.flatnonzero(np.abs(rows - 1.0) > STOCHASTIC_TOL)
    if off.size:
        raise InvariantError(f"row {off[0]} sums to {float(rows[off[0]]):.17g}")
    drift = pi.probs @ m - pi.probs
    off = np.flatnonzero(np.abs(drift) > STOCHASTIC_TOL)
    if off.size:
        raise InvariantError(
            f"pi is not stationary: (pi K - pi)[{off[0]}] = {float(drift[off[0]]):.3g}")
    m = np.clip(m, 0.0, 1.0)
    return Kernel(_frozen(m), pi, _is_reversible(m, pi.probs))


def stationary_kernel(pi) -> Kernel:
    """The rank-one kernel ``Pi`` whose rows all equal ``pi``."""
    if not isinstance(pi, Distribution):
        pi = Distribution(pi)
    return validate_kernel(np.tile(pi.probs, (pi.n, 1)), pi)


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of ``n`` states to ``k`` nonempty blocks.

    Block labels are 0-based: ``block_of[x]`` is in ``range(k)``.
    """

    block_of: np.ndarray
    k: int = field(default=-1)

    def __post_init__(self):
        b = np.array(np.ravel(self.block_of), dtype=np.int64, copy=True)
        if b.size == 0:
            raise InvariantError("partition must cover at least one state")
        k = int(b.max()) + 1 if self.k < 0 else int(self.k)
        if b.min() < 0 or b.max() >= k:
            raise InvariantError(f"block labels must lie in [0, {k})")
        counts = np.bincount(b, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            raise InvariantError(f"block {empty[0]} is empty")
        b.setflags(write=False)
        object.__setattr__(self, "block_of", b)
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.block_of.size

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        blocks = [list(b) for b in blocks]
        size = n if n is not None else sum(len(b) for b in blocks)
        labels = np.full(size, -1, dtype=np.int64)
        for i, block in enumerate(blocks):
            for x in block:
                if labels[x] != -1:
                    raise InvariantError(f"state {x} appears in two blocks")
                labels[x] = i
        if (labels < 0).any():
            raise InvariantError(f"state {int(np.argmax(labels < 0))} is not covered")
        return cls(labels, len(blocks))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n), n)

    @classmethod
    def single_block(cls, n: int) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64), 1)

    def blocks(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.block_of == i) for i in range(self.k)]

    def masses(self, pi: Distribution) -> np.ndarray:
        """Block masses ``(pi(O_1), ..., pi(O_k))``."""
        return np.bincount(self.block_of, weights=pi.probs, minlength=self.k)

    def indicator(self) -> np.ndarray:
        """``n x k`` 0/1 membership matrix."""
        e = np.zeros((self.n, self.k))
        e[np.arange(self.n), self.block_of] = 1.0
        return e


@dataclass(frozen=True)
class Cut:
    """Nontrivial subset ``S`` of the state space, stored as a bitmask.

    Bit ``x`` of ``mask`` is set iff state ``x`` belongs to ``S``.
    """

    mask: int
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvariantError("a cut needs at least two states")
        full = (1 << self.n) - 1
        if not 0 < self.mask < full:
            raise InvariantError(f"cut mask {self.mask} is empty or the full space")

    @classmethod
    def from_members(cls, members: Iterable[int], n: int) -> "Cut":
        mask = 0
        for x in members:
            if not 0 <= x < n:
                raise InvariantError(f"state {x} outside [0, {n})")
            mask |= 1 << int(x)
        return cls(mask, n)

    @classmethod
    def from_indicator(cls, indicator) -> "Cut":
        ind = np.asarray(indicator, dtype=bool)
        return cls.from_members(np.flatnonzero(ind).tolist(), ind.size)

    def indicator(self) -> np.ndarray:
        bits = np.arange(self.n)
        if self.n <= 62:
            return ((self.mask >> bits) & 1).astype(bool)
        return np.array([(self.mask >> int(b)) & 1 for b in bits], dtype=bool)

    @property
    def members(self) -> np.ndarray:
        return np.flatnonzero(self.indicator())

    def complement(self) -> "Cut":
        return Cut(((1 << self.n) - 1) ^ self.mask, self.n)

    def mass(self, pi: Distribution) -> float:
        return float(pi.probs[self.indicator()].sum())

    def partition(self) -> Partition:
        """Two-block partition with ``S`` as block 0 and ``S'`` as block 1."""
        return Partition((~self.indicator()).astype(np.int64), 2)

    def __len__(self):
        return bin(self.mask).count("1")


def _as_partition(part) -> Partition:
    return part.partition() if isinstance(part, Cut) else part


def gibbs_kernel(pi: Distribution, part) -> Kernel:
    """Block resampling kernel ``G(x, y) = pi(y) / pi(O(x))`` for ``y`` in ``O(x)``."""
    part = _as_partition(part)
    if part.n != pi.n:
        raise InvariantError(f"partition covers {part.n} states, pi has {pi.n}")
    masses = part.masses(pi)
    same = part.block_of[:, None] == part.block_of[None, :]
    g = np.where(same, pi.probs[None, :] / masses[part.block_of][:, None], 0.0)
    return validate_kernel(g, pi)


def projection_chain(P: Kernel, part) -> Kernel:
    """Chain induced on the blocks of ``part`` by stationary flow averaging."""
    part = _as_partition(part)
    if part.n != P.n:
        raise InvariantError(f"partition covers {part.n} states, kernel has {P.n}")
    e = part.indicator()
    masses = part.masses(P.pi)
    block_flow = e.T @ P.flow @ e
    pbar = block_flow / masses[:, None]
    # masses are sums of positive reals; renormalise against last-bit drift
    return validate_kernel(pbar, Distribution(masses / masses.sum()))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def _check_shared_pi(P: Kernel, G: Kernel):
    if P.n != G.n or np.max(np.abs(P.pi.probs - G.pi.probs)) > NORMALIZATION_TOL:
        raise InvariantError("kernels do not share a stationary distribution")


def additive_mixture(P: Kernel, G: Kernel, alpha: float) -> Kernel:
    """``alpha * P + (1 - alpha) * G``."""
    alpha = _check_alpha(alpha)
    _check_shared_pi(P, G)
    if alpha == 1.0:
        return P
    if alpha == 0.0:
        return G
    return validate_kernel(alpha * P.matrix + (1.0 - alpha) * G.matrix, P.pi)


@dataclass(frozen=True, eq=False)
class LiftedKernel:
    """Transition matrix on ``X x {+1, -1}``.

    State ``(x, +1)`` has index ``x`` and ``(x, -1)`` has index ``n + x``.
    The ``+1`` slice carries ``(1 - alpha) G`` and the ``-1`` slice carries
    ``alpha P``.  ``pi_tilde`` is ``pi (x) R`` and may contain zeros when
    ``alpha`` is 0 or 1.
    """

    matrix: np.ndarray
    alpha: float
    pi: Distribution
    pi_tilde: np.ndarray

    @property
    def n(self) -> int:
        return self.pi.n


def lifted_kernel(P: Kernel, G: Kernel, alpha: float) -> LiftedKernel:
    alpha = _check_alpha(alpha)
    _check_shared_pi(P, G)
    n = P.n
    block = np.hstack([(1.0 - alpha) * G.matrix, alpha * P.matrix])
    q = np.vstack([block, block])
    rows = q.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > STOCHASTIC_TOL:
        raise InvariantError("lifted kernel rows do not sum to 1")
    pi_tilde = np.concatenate([(1.0 - alpha) * P.pi.probs, alpha * P.pi.probs])
    assert q.shape == (2 * n, 2 * n)
    return LiftedKernel(_frozen(q), alpha, P.pi, _frozen(pi_tilde))


def marginal_first_coordinate(Q: LiftedKernel) -> Kernel:
    """Sum the lifted kernel over the destination's auxiliary coordinate.

    Raises :class:`InvariantError` if the rows for ``(x, +1)`` and
    ``(x, -1)`` disagree, since the lifted construction makes the move
    independent of the current auxiliary coordinate.
    """
    n = Q.n
    m = Q.matrix
    from_plus = m[:n, :n] + m[:n, n:]
    from_minus = m[n:, :n] + m[n:, n:]
    gap = np.max(np.abs(from_plus - from_minus))
    if gap > 1e-12:
        raise InvariantError(
            f"transition depends on the current auxiliary coordinate (gap {gap:.3g})")
    return validate_kernel(from_plus, Q.pi)


def kernel_power(K: Kernel, l: int) -> Kernel:
    """``K**l`` by repeated squaring."""
    l = int(l)
    if l < 1:
        raise ValueError("power must be a positive integer; use the identity for l = 0")
    result = None
    base = K.matrix
    while True:
        if l & 1:
            result = base if result is None else result @ base
        l >>= 1
        if not l:
            break
        base = base @ base
    return validate_kernel(result, K.pi)


def tv_distance(mu, nu) -> float:
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise ValueError(f"shape mismatch {mu.shape} vs {nu.shape}")
    return 0.5 * float(np.abs(mu - nu).sum())


def _worst_rows_tv(rows: np.ndarray, pi: np.ndarray) -> float:
    return 0.5 * float(np.abs(rows - pi[None, :]).sum(axis=1).max())


def worst_case_tv(K: Kernel, l: int) -> float:
    """``max_x || K^l(x, .) - pi ||_TV`` over every starting state."""
    return _worst_rows_tv(kernel_power(K, l).matrix, K.pi.probs)


def tv_curve(K: Kernel, horizons: Sequence[int]) -> list[tuple[int, float]]:
    """Worst-case TV at each horizon (non-negative, ascending), by forward products."""
    hs = [int(t) for t in horizons]
    if any(t < 0 for t in hs) or hs != sorted(hs):
        raise ValueError("horizons must be non-negative and ascending")
    pi = K.pi.probs
    out = []
    power = np.eye(K.n)
    t = 0
    for target in hs:
        while t < target:
            power = power @ K.matrix
            t += 1
        out.append((target, _worst_rows_tv(power, pi)))
    return out


def random_reversible_kernel(n: int, rng: np.random.Generator, *,
                             sparsity: float = 0.0, laziness: float = 0.0) -> Kernel:
    """Random reversible kernel from a symmetric positive weight matrix.

    ``P = D^{-1} W`` with ``W`` symmetric, so ``pi`` is proportional to the
    row sums.  ``sparsity`` zeroes a fraction of off-diagonal weights (the
    diagonal stays positive, which keeps every state reachable from itself).
    """
    w = rng.exponential(size=(n, n))
    w = np.triu(w) + np.triu(w, 1).T
    if sparsity > 0:
        keep = rng.random((n, n)) >= sparsity
        keep = np.triu(keep, 1)
        keep = keep | keep.T | np.eye(n, dtype=bool)
        w = w * keep
    rows = w.sum(axis=1)
    p = w / rows[:, None]
    if laziness > 0:
        p = laziness * np.eye(n) + (1 - laziness) * p
    return validate_kernel(p, Distribution(rows / rows.sum()))


def random_partition(n: int, k: int, rng: np.random.Generator) -> Partition:
    """Uniformly shuffled partition of ``n`` states into exactly ``k`` blocks."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    return Partition(rng.permutation(labels), k)


def write_matrix_csv(path, matrix) -> None:
    """Write a matrix (or a vector as one row) with a ``# n=<n>`` header."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w") as fh:
        fh.write(f"# n={m.shape[1]}\n")
        for row in m:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    """Read the format written by :func:`write_matrix_csv`."""
    n = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "n":
                    n = int(value)
                continue
            rows.append([float(v) for v in line.split(",")])
    m = np.array(rows, dtype=float)
    if n is not None and m.shape[1] != n:
        raise InvariantError(f"header declares n={n} but rows have {m.shape[1]} columns")
    return m

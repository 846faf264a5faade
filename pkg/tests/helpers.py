"""Shared builders and independent oracles for the test-suite."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from gibbsmix import Partition, random_partition, random_reversible_kernel, validate_kernel

TWO_STATE = [[0.5, 0.5], [0.25, 0.75]]
TWO_STATE_PI = [1 / 3, 2 / 3]


def two_state():
    from gibbsmix import Distribution
    return validate_kernel(np.array(TWO_STATE), Distribution(np.array(TWO_STATE_PI)))


def corpus(count: int, nmax: int, seed: int, nmin: int = 2, **kw):
    """``count`` pairs ``(P, partition)`` with ``nmin <= n <= nmax`` and random ``k``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(nmin, nmax + 1))
        k = int(rng.integers(1, n + 1))
        out.append((random_reversible_kernel(n, rng, **kw), random_partition(n, k, rng)))
    return out


def kernels(count: int, n_values, seed: int, **kw):
    rng = np.random.default_rng(seed)
    return [random_reversible_kernel(int(rng.choice(n_values)), rng, **kw) for _ in range(count)]


def set_partitions(n: int, k: int | None = None):
    """Every set partition of ``range(n)`` as a restricted growth string."""
    def grow(prefix, top):
        if len(prefix) == n:
            if k is None or top + 1 == k:
                yield list(prefix)
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))
    yield from grow([0], 0)


def entropy_oracle(masses) -> float:
    return -sum(m * math.log(m) for m in masses if m > 0)


def fraction_matmul(A, B):
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))]
            for i in range(len(A))]


def fraction_frobenius(K, pi) -> Fraction:
    """``||K - Pi||^2`` as an exact rational with the explicit weighted adjoint."""
    n = len(pi)
    M = [[K[x][y] - pi[y] for y in range(n)] for x in range(n)]
    return sum(pi[x] / pi[y] * M[x][y] ** 2 for x in range(n) for y in range(n))


def char_poly_roots(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a 2x2 or 3x3 matrix with real spectrum from closed-form roots."""
    n = M.shape[0]
    if n == 2:
        tr, det = M[0, 0] + M[1, 1], M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        disc = math.sqrt(max(tr * tr / 4 - det, 0.0))
        return np.array(sorted([tr / 2 + disc, tr / 2 - disc], reverse=True))
    if n == 3:
        # depressed cubic with trigonometric roots
        c2 = -np.trace(M)
        c1 = 0.5 * (np.trace(M) ** 2 - np.trace(M @ M))
        c0 = -np.linalg.det(M)
        p = c1 - c2 * c2 / 3
        q = 2 * c2 ** 3 / 27 - c2 * c1 / 3 + c0
        if abs(p) < 1e-15:
            r = np.cbrt(-q)
            roots = [r - c2 / 3] * 3
        else:
            amp = 2 * math.sqrt(-p / 3)
            arg = max(-1.0, min(1.0, 3 * q / (p * amp)))
            phi = math.acos(arg) / 3
            roots = [amp * math.cos(phi - 2 * math.pi * j / 3) - c2 / 3 for j in range(3)]
        return np.array(sorted(roots, reverse=True))
    raise ValueError("closed form only for n <= 3")


def all_cuts(n: int):
    return range(1, (1 << n) - 1)


def naive_flow(P, mask: int) -> float:
    n = P.n
    inside = [x for x in range(n) if mask >> x & 1]
    outside = [x for x in range(n) if not mask >> x & 1]
    return sum(P.pi.probs[x] * P.matrix[x, y] for x in inside for y in outside)


def partition_from_rgs(labels) -> Partition:
    return Partition(np.array(labels))


def pairs(n: int):
    return itertools.combinations(range(1 << n), 2)

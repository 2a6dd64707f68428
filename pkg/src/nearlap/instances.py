"""Reproducible instance generation.

Noisy-Laplacian instances follow the small-world protocol: undirected
Watts-Strogatz lattice, bidirectionalized, uniform edge weights, Gaussian
perturbation.  Noise is drawn only on the pattern plus the diagonal: entries
outside the pattern shift the objective by an instance constant but never
change the projection, and keeping them out preserves sparsity.

All randomness comes from numpy's seedable PCG64 generator; per-row streams
are split off the root seed with `SeedSequence.spawn`, so instances are
bitwise reproducible for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DimensionTooLarge, GraphStructure, SparseRowMatrix

# |b_d| grows like d!, so the dynamic range b_d/b_1 exhausts float64's
# exponent range (even with rescaling) shortly beyond d ~ 290
WORST_CASE_CAP = 290


@dataclass
class WSParams:
    n: int
    mean_degree: int
    rewire_p: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.mean_degree <= 0 or self.mean_degree % 2 != 0:
            raise ValueError("mean_degree must be a positive even integer")
        if self.mean_degree >= self.n:
            raise ValueError("mean_degree must be smaller than n")
        if not 0.0 <= self.rewire_p <= 1.0:
            raise ValueError("rewire_p must be in [0, 1]")


@dataclass
class NoiseParams:
    weight_scale: float = 10.0
    noise_scale: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.weight_scale <= 0:
            raise ValueError("weight_scale must be positive")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")


@dataclass
class WorstCaseSequence:
    d: int
    b: np.ndarray
    cumsum: np.ndarray


def generate_ws_graph(params: WSParams) -> GraphStructure:
    """Watts-Strogatz ring lattice with rewiring, then both directions of
    every undirected edge.  Rewiring conserves the edge count, so every
    instance has average out-degree exactly `mean_degree`."""
    n, k, p = params.n, params.mean_degree, params.rewire_p
    rng = np.random.default_rng(params.seed)
    edges: set[tuple[int, int]] = set()
    for i in range(n):
        for j in range(1, k // 2 + 1):
            edges.add((i, (i + j) % n))
    if p > 0.0:
        for i in range(n):
            for j in range(1, k // 2 + 1):
                edge = (i, (i + j) % n)
                if edge not in edges or rng.random() >= p:
                    continue
                target = int(rng.integers(n))
                # skip the rewire if it would create a self-loop or multiedge
                if target == i or (i, target) in edges or (target, i) in edges:
                    continue
                edges.discard(edge)
                edges.add((i, target))
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for i, j in sorted(edges):
        neighbors[i].append(j)
        neighbors[j].append(i)
    for row in neighbors:
        row.sort()
    return GraphStructure(n=n, neighbors=neighbors)


def generate_noisy_instance(
    g: GraphStructure, params: NoiseParams
) -> tuple[SparseRowMatrix, SparseRowMatrix]:
    """Draw uniform edge weights, build the exact Laplacian X, and perturb it
    on the pattern plus diagonal: A = X + noise.  Returns (A, X)."""
    if not g.loopless():
        raise ValueError("noisy instances are generated on loop-less graphs")
    streams = np.random.SeedSequence(params.seed).spawn(g.n)
    x_true = SparseRowMatrix.zeros(g)
    noisy = SparseRowMatrix.zeros(g)
    for i in range(g.n):
        rng = np.random.default_rng(streams[i])
        d = len(g.neighbors[i])
        weights = params.weight_scale * rng.random(d)
        x_true.offdiag[i] = -weights
        x_true.diag[i] = float(weights.sum())
        noise = params.noise_scale * rng.standard_normal(d + 1)
        noisy.diag[i] = x_true.diag[i] + noise[0]
        noisy.offdiag[i] = x_true.offdiag[i] + noise[1:]
    return noisy, x_true


# the recurrence stays exact in float64 through this index (dyadic values
# below 2^53); past it a tiny slack keeps the shrink-one-per-step property
# robust against rounding
_EXACT_PREFIX = 18
_SLACK = 1e-9


def _worst_case_shift(d: int) -> int:
    """Power-of-two downscale keeping b_d inside the normal float range.

    The construction is homogeneous in b_1 and scaling by 2^-s is exact, so
    the scaled sequence triggers bitwise-identical solver decisions.
    """
    log2_bd = (math.lgamma(d + 2) - math.lgamma(3)) / math.log(2.0)
    return max(0, math.ceil(log2_bd) - 1020)


def worst_case_sequence(d: int) -> WorstCaseSequence:
    """Equality case of the worst-case recurrence: b_1 = -1/2,
    b_k = (k+1) b_{k-1} - S_{k-1}.  Forces the active set method to shrink
    the free set by exactly one index per iteration."""
    if not 1 <= d <= WORST_CASE_CAP:
        raise DimensionTooLarge(f"worst-case length must be in [1, {WORST_CASE_CAP}]")
    b = np.empty(d)
    b[0] = -0.5 * 2.0 ** (-_worst_case_shift(d))
    s = b[0]
    for k in range(1, d):
        b[k] = (k + 2) * b[k - 1] - s
        if k >= _EXACT_PREFIX:
            b[k] *= 1.0 + _SLACK
        s += b[k]
    return WorstCaseSequence(d=d, b=b, cumsum=np.cumsum(b))


def worst_case_matrix(g: GraphStructure) -> SparseRowMatrix:
    """Matrix whose row subproblems reproduce the worst-case sequence:
    zero diagonal and A_{i,neighbor_k} = -b_k/2."""
    if not g.loopless():
        raise ValueError("worst-case instances are loop-less")
    a = SparseRowMatrix.zeros(g)
    for i in range(g.n):
        d = len(g.neighbors[i])
        if d == 0:
            continue
        a.offdiag[i] = -0.5 * worst_case_sequence(d).b
    return a

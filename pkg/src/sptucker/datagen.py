"""Synthetic tensors for benchmarks and accuracy checks.

All generators draw from ``numpy.random.Generator(PCG64(seed))`` and are
bitwise reproducible for a given seed.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_ranks, check_shape
from .tensor import CooTensor

VALUE_DISTS = ("uniform", "unit")


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class GenSpec:
    """Recipe for :func:`gen_uniform_sparse`.

    Give either ``sparsity`` (nonzero fraction in ``(0, 1]``) or an exact
    ``nnz``.  ``value_dist`` is ``"uniform"`` for values in ``(0, 1]`` or
    ``"unit"`` for all ones.
    """
    shape: tuple
    sparsity: Optional[float] = None
    nnz: Optional[int] = None
    value_dist: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape", check_shape(self.shape))
        if (self.sparsity is None) == (self.nnz is None):
            raise ValueError("give exactly one of sparsity or nnz")
        if self.sparsity is not None and not 0 < self.sparsity <= 1:
            raise ValueError(f"sparsity must lie in (0, 1], got {self.sparsity}")
        if self.value_dist not in VALUE_DISTS:
            raise ValueError(f"value_dist must be one of {VALUE_DISTS}")
        total = math.prod(self.shape)
        n = self.resolved_nnz()
        if not 1 <= n <= total:
            raise ValueError(f"nnz {n} not in [1, {total}] for shape {self.shape}")

    def resolved_nnz(self):
        if self.nnz is not None:
            return int(self.nnz)
        # round half up, at least one entry
        return max(1, math.floor(self.sparsity * math.prod(self.shape) + 0.5))


def gen_uniform_sparse(spec):
    """Exactly ``spec.resolved_nnz()`` distinct, uniformly placed nonzeros."""
    rng = _rng(spec.seed)
    total = math.prod(spec.shape)
    nnz = spec.resolved_nnz()
    lin = np.sort(rng.choice(total, size=nnz, replace=False))
    idx = np.stack(np.unravel_index(lin, spec.shape), axis=1)
    if spec.value_dist == "unit":
        vals = np.ones(nnz)
    else:
        vals = 1.0 - rng.random(nnz)
    return CooTensor(spec.shape, idx, vals)


def gen_exact_lowrank(shape, ranks, seed=0, noise=0.0):
    """Dense tensor ``G x_1 U_1 ... x_N U_N`` with a standard-normal core and
    random orthonormal factors, so its multilinear rank is at most ``ranks``.

    ``noise > 0`` adds Gaussian noise scaled to ``noise * ||X||_F``.
    """
    from .tucker import TuckerModel, reconstruct

    shape = check_shape(shape)
    ranks = check_ranks(ranks, shape)
    rng = _rng(seed)
    core = rng.standard_normal(ranks)
    factors = []
    for size, rank in zip(shape, ranks):
        q, r = np.linalg.qr(rng.standard_normal((size, rank)))
        factors.append(q * np.where(np.diag(r) < 0, -1.0, 1.0))
    x = reconstruct(TuckerModel(core, tuple(factors)))
    if noise > 0:
        e = rng.standard_normal(shape)
        x = x + (noise * np.linalg.norm(x) / np.linalg.norm(e)) * e
    return x


def gen_matmul_tensor(m, k, n):
    """Binary ``mk x kn x mn`` tensor of the classical ``(m x k)(k x n)`` product.

    Entry ``(a, b, c)`` is one when ``A`` entry ``a`` (row-major) times ``B``
    entry ``b`` (row-major) accumulates into ``C`` entry ``c``
    (column-major).
    """
    if min(m, k, n) < 1:
        raise ValueError("m, k and n must be >= 1")
    i, l, j = np.meshgrid(np.arange(m), np.arange(k), np.arange(n), indexing="ij")
    i, l, j = i.ravel(), l.ravel(), j.ravel()
    idx = np.stack([i * k + l, l * n + j, j * m + i], axis=1)
    return CooTensor((m * k, k * n, m * n), idx, np.ones(idx.shape[0]))


def gen_vessel_image(shape=(130, 150), seed=0, n_trees=3, depth=5):
    """Sparse grayscale image of branching vessel-like curves, values in [0, 1].

    Trees grow from a disc near the left third of the frame; each segment
    is a jittered straight run that splits in two with thinner, dimmer
    children.
    """
    h, w = check_shape(shape)
    rng = _rng(seed)
    img = np.zeros((h, w))
    yy, xx = np.mgrid[0:h, 0:w]
    cy, cx = 0.5 * h, 0.3 * w
    disc = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * (0.035 * min(h, w)) ** 2))
    img = np.maximum(img, 0.9 * disc * (disc > 0.2))

    def stamp(y, x, radius, level):
        y0, y1 = max(int(y - radius - 1), 0), min(int(y + radius + 2), h)
        x0, x1 = max(int(x - radius - 1), 0), min(int(x + radius + 2), w)
        if y0 >= y1 or x0 >= x1:
            return
        d2 = (yy[y0:y1, x0:x1] - y) ** 2 + (xx[y0:y1, x0:x1] - x) ** 2
        blob = level * (d2 <= radius * radius)
        img[y0:y1, x0:x1] = np.maximum(img[y0:y1, x0:x1], blob)

    def grow(y, x, angle, length, radius, level, left):
        steps = int(length)
        for _ in range(steps):
            angle += rng.normal(0.0, 0.08)
            y += np.sin(angle)
            x += np.cos(angle)
            if not (0 <= y < h and 0 <= x < w):
                return
            stamp(y, x, radius, level)
        if left > 0:
            for turn in (-1.0, 1.0):
                grow(y, x, angle + turn * rng.uniform(0.3, 0.7), length * 0.75,
                     max(radius * 0.75, 0.5), level * 0.9, left - 1)

    for t in range(n_trees):
        angle = 2.0 * np.pi * (t + rng.uniform(0.0, 1.0)) / n_trees
        grow(cy, cx, angle, 0.18 * max(h, w), 1.8, 1.0, depth)
    return np.clip(img, 0.0, 1.0)


def compression_ratio(shape, ranks):
    """Raw element count over Tucker parameter count (core plus factors)."""
    shape = check_shape(shape)
    ranks = check_ranks(ranks, shape)
    params = math.prod(ranks) + sum(i * r for i, r in zip(shape, ranks))
    return math.prod(shape) / params


def core_compression_ratio(shape, ranks):
    """Raw element count over core size, ignoring the factor matrices."""
    shape = check_shape(shape)
    ranks = check_ranks(ranks, shape)
    return math.prod(shape) / math.prod(ranks)

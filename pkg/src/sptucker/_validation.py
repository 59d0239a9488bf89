"""Input validation helpers shared by the kernels and the estimator."""
import numbers

import numpy as np

from .exceptions import RankError, ShapeError

_INDEX_MAX = np.iinfo(np.int64).max


def check_shape(dims):
    """Return ``dims`` as a tuple of positive ints.

    Raises ``ShapeError`` for an empty shape, a non-positive mode size, or an
    element count that overflows a 64-bit index.
    """
    try:
        dims = tuple(int(d) for d in dims)
    except TypeError:
        raise ShapeError(f"shape must be a sequence of ints, got {dims!r}") from None
    if len(dims) == 0:
        raise ShapeError("shape must have at least one mode")
    count = 1
    for k, d in enumerate(dims):
        if d < 1:
            raise ShapeError(f"mode {k} has size {d}; sizes must be >= 1")
        count *= d
    if count > _INDEX_MAX:
        raise ShapeError(f"element count {count} overflows a 64-bit index")
    return dims


def check_mode(mode, order):
    if not isinstance(mode, numbers.Integral) or not 0 <= mode < order:
        raise ShapeError(f"mode must be an int in [0, {order}), got {mode!r}")
    return int(mode)


def check_ranks(ranks, shape):
    """Validate a multilinear rank tuple against ``shape``."""
    shape = check_shape(shape)
    try:
        ranks = tuple(int(r) for r in ranks)
    except TypeError:
        raise RankError(f"ranks must be a sequence of ints, got {ranks!r}") from None
    if len(ranks) != len(shape):
        raise RankError(
            f"got {len(ranks)} ranks for an order-{len(shape)} tensor")
    for n, (r, i) in enumerate(zip(ranks, shape)):
        if not 1 <= r <= i:
            raise RankError(f"rank {r} for mode {n} must lie in [1, {i}]")
    return ranks


def check_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def check_tensor(x):
    """Coerce ``x`` to a CooTensor or a float64 ndarray.

    scipy sparse matrices become 2-way CooTensors; anything array-like
    becomes a dense array.
    """
    from scipy import sparse

    from .tensor import CooTensor

    if isinstance(x, CooTensor):
        return x
    if sparse.issparse(x):
        m = sparse.coo_matrix(x)
        idx = np.column_stack([m.row, m.col]).astype(np.int64)
        return CooTensor(m.shape, idx, m.data)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        raise ShapeError("expected a tensor with at least one mode, got a scalar")
    if not np.all(np.isfinite(x)):
        raise ValueError("tensor contains non-finite values")
    return x

"""Sparse COO tensors, dense unfoldings and tensor norms.

Dense tensors are plain float64 ndarrays in C (row-major) order.  The mode-n
unfolding follows the usual Kolda-Bader column ordering, where among the
remaining modes the lowest one varies fastest.  All modes and coordinates in
the Python API are 0-based; 1-based coordinates appear only at the file
boundary and in :func:`coo_from_triples`.
"""
import math

import numpy as np

from ._validation import check_matrix, check_mode, check_shape
from .exceptions import BoundsError, ShapeError


class CooTensor:
    """Immutable sparse tensor in canonical coordinate format.

    Canonical means: coordinates sorted lexicographically, no duplicates
    (duplicates are summed on construction) and no explicit zeros.

    Parameters
    ----------
    shape : sequence of int
        Mode sizes.
    indices : array-like of int, shape (nnz, order)
        0-based coordinates.
    values : array-like of float, shape (nnz,)
    """

    __slots__ = ("shape", "indices", "values")

    def __init__(self, shape, indices, values):
        shape = check_shape(shape)
        order = len(shape)
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            indices = indices.reshape(0, order)
        if indices.ndim != 2 or indices.shape[1] != order:
            raise ShapeError(
                f"indices must have shape (nnz, {order}), got {indices.shape}")
        if indices.shape[0] != values.shape[0]:
            raise ShapeError(
                f"{indices.shape[0]} coordinates but {values.shape[0]} values")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        for k, size in enumerate(shape):
            col = indices[:, k]
            bad = (col < 0) | (col >= size)
            if np.any(bad):
                first = int(np.flatnonzero(bad)[0])
                raise BoundsError(
                    f"coordinate {int(col[first]) + 1} out of range [1, {size}] "
                    f"in mode {k} (entry {first})", mode=k)
        indices, values = _canonicalize(shape, indices, values)
        indices.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("CooTensor is immutable")

    @classmethod
    def from_dense(cls, array):
        array = np.asarray(array, dtype=np.float64)
        idx = np.argwhere(array != 0)
        return cls(array.shape, idx, array[tuple(idx.T)])

    @property
    def order(self):
        return len(self.shape)

    @property
    def nnz(self):
        return int(self.values.shape[0])

    def to_dense(self):
        out = np.zeros(self.shape)
        out[tuple(self.indices.T)] = self.values
        return out

    def entries(self):
        """Yield ``(coords, value)`` pairs with 1-based coordinates."""
        for row, v in zip(self.indices, self.values):
            yield tuple(int(i) + 1 for i in row), float(v)

    def __mul__(self, alpha):
        if not isinstance(alpha, (int, float, np.floating, np.integer)):
            return NotImplemented
        return CooTensor(self.shape, self.indices, self.values * float(alpha))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CooTensor):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.shape, self.indices.tobytes(), self.values.tobytes()))

    def __repr__(self):
        dims = "x".join(map(str, self.shape))
        return f"CooTensor(shape={dims}, nnz={self.nnz})"


def _canonicalize(shape, indices, values):
    if indices.shape[0] == 0:
        return indices.copy(), values.copy()
    lin = np.ravel_multi_index(tuple(indices.T), shape)
    perm = np.argsort(lin, kind="stable")
    lin = lin[perm]
    uniq, starts = np.unique(lin, return_index=True)
    if uniq.shape[0] == lin.shape[0]:
        vals = values[perm]
    else:
        vals = np.add.reduceat(values[perm], starts)
    keep = vals != 0
    idx = np.stack(np.unravel_index(uniq[keep], shape), axis=1).astype(np.int64)
    return np.ascontiguousarray(idx), np.ascontiguousarray(vals[keep])


def coo_from_triples(shape, entries):
    """Build a canonical CooTensor from ``(coords, value)`` pairs.

    Coordinates are 1-based, as in the usual COO table layout::

        >>> t = coo_from_triples((5, 5, 5, 5), [((1, 1, 1, 1), 2.0)])
        >>> t.nnz
        1
    """
    shape = check_shape(shape)
    entries = list(entries)
    if not entries:
        return CooTensor(shape, np.zeros((0, len(shape)), np.int64), [])
    coords, values = zip(*entries)
    idx = np.asarray(coords, dtype=np.int64)
    if idx.ndim != 2 or idx.shape[1] != len(shape):
        raise ShapeError(f"every coordinate tuple must have {len(shape)} components")
    return CooTensor(shape, idx - 1, values)


def unfold_col_index(shape, mode, index):
    """Column of ``index`` in the mode-``mode`` unfolding (all 0-based).

    Among the modes other than ``mode`` the lowest varies fastest, so the
    column is ``sum_k index[k] * prod(shape[m] for m < k, m != mode)``.
    """
    shape = check_shape(shape)
    mode = check_mode(mode, len(shape))
    if len(index) != len(shape):
        raise ShapeError(f"index has {len(index)} components, shape has {len(shape)}")
    j, stride = 0, 1
    for k, (i, size) in enumerate(zip(index, shape)):
        if not 0 <= i < size:
            raise BoundsError(f"index {i} out of range for mode {k}", mode=k)
        if k == mode:
            continue
        j += i * stride
        stride *= size
    return j


def unfold(x, mode):
    """Mode-``mode`` matricization of a dense tensor, shape ``(I_n, prod others)``."""
    x = np.asarray(x, dtype=np.float64)
    mode = check_mode(mode, x.ndim)
    moved = np.moveaxis(x, mode, 0)
    return np.ascontiguousarray(np.reshape(moved, (x.shape[mode], -1), order="F"))


def fold(m, mode, shape):
    """Inverse of :func:`unfold`."""
    shape = check_shape(shape)
    mode = check_mode(mode, len(shape))
    m = check_matrix(m)
    rest = shape[:mode] + shape[mode + 1:]
    if m.shape != (shape[mode], math.prod(rest)):
        raise ShapeError(
            f"cannot fold a {m.shape[0]}x{m.shape[1]} matrix along mode {mode} "
            f"into shape {shape}")
    t = np.reshape(m, (shape[mode],) + rest, order="F")
    return np.ascontiguousarray(np.moveaxis(t, 0, mode))


def _shape_of(x):
    return x.shape if isinstance(x, CooTensor) else np.shape(x)


def inner_product(x, y):
    """Sum of elementwise products of two same-shaped tensors.

    Either operand may be a CooTensor; sparse operands are iterated over
    their nonzeros only.
    """
    sx, sy = tuple(_shape_of(x)), tuple(_shape_of(y))
    if sx != sy:
        raise ShapeError(f"shape mismatch: {sx} vs {sy}")
    if isinstance(x, CooTensor) and isinstance(y, CooTensor):
        lx = np.ravel_multi_index(tuple(x.indices.T), x.shape)
        ly = np.ravel_multi_index(tuple(y.indices.T), y.shape)
        _, ix, iy = np.intersect1d(lx, ly, assume_unique=True, return_indices=True)
        return float(np.dot(x.values[ix], y.values[iy]))
    if isinstance(y, CooTensor):
        x, y = y, x
    if isinstance(x, CooTensor):
        y = np.asarray(y, dtype=np.float64)
        return float(np.dot(x.values, y[tuple(x.indices.T)]))
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    return float(np.dot(x, y))


def frobenius_norm(x):
    return math.sqrt(inner_product(x, x))


def sparsity(x):
    """Fraction of stored nonzeros, ``nnz / prod(shape)``."""
    return x.nnz / math.prod(x.shape)


def as_dense(x):
    if isinstance(x, CooTensor):
        return x.to_dense()
    return np.asarray(x, dtype=np.float64)

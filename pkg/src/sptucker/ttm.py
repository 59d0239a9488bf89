"""Tensor-times-matrix kernels.

:func:`ttm_blocked` mirrors the batched loop nest of the FPGA TTM unit as
software cache blocking.  On hardware the ``Y`` and ``tmp`` buffers are
cyclically partitioned by 16 and ``U`` by 8, each on a single RAM port, with
``tmp`` held in registers; none of that has a software counterpart beyond
the row batching kept here.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, check_mode
from .exceptions import ShapeError
from .tensor import fold, unfold

DEFAULT_BATCH_ROWS = 32


@dataclass(frozen=True)
class TtmPlan:
    """Blocking parameters for :func:`ttm_blocked`.

    ``unfolded_rows`` is the product of all ranks but the last,
    ``inner_dim`` the last mode size and ``out_cols`` the last rank.
    """
    unfolded_rows: int
    inner_dim: int
    out_cols: int
    batch_rows: int = DEFAULT_BATCH_ROWS

    def __post_init__(self):
        for name in ("unfolded_rows", "inner_dim", "out_cols", "batch_rows"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @classmethod
    def for_operands(cls, y, u, batch_rows=DEFAULT_BATCH_ROWS):
        return cls(y.shape[0], y.shape[1], u.shape[0], batch_rows)

    @property
    def n_batches(self):
        return -(-self.unfolded_rows // self.batch_rows)


def ttm_blocked(y, u, plan=None):
    """``G = Y @ U.T`` computed one block of ``plan.batch_rows`` rows at a time.

    Each output entry is accumulated over the inner index in ascending order
    with separate multiply and add, into a zeroed per-batch buffer, so the
    result is bitwise independent of the batch size.  The last batch may be
    short.

    Parameters
    ----------
    y : ndarray, shape (l, I)
    u : ndarray, shape (R, I)
    plan : TtmPlan, optional
        Defaults to 32-row batches.
    """
    y = check_matrix(y, "y")
    u = check_matrix(u, "u")
    if plan is None:
        plan = TtmPlan.for_operands(y, u)
    ell, inner = y.shape
    if u.shape[1] != inner or (ell, inner, u.shape[0]) != (
            plan.unfolded_rows, plan.inner_dim, plan.out_cols):
        raise ShapeError(
            f"operands {y.shape} x {u.shape}^T do not match plan {plan}")
    b = plan.batch_rows
    g = np.empty((ell, plan.out_cols))
    for start in range(0, ell, b):
        rows = y[start:start + b]
        tmp = np.zeros((rows.shape[0], plan.out_cols))
        for t in range(inner):
            tmp += rows[:, t, None] * u[None, :, t]
        g[start:start + rows.shape[0]] = tmp
    return g


def ttm_naive(x, u, mode):
    """Mode-``mode`` product ``x x_n u`` via ``fold(u @ unfold(x, n))``."""
    x = np.asarray(x, dtype=np.float64)
    u = check_matrix(u, "u")
    mode = check_mode(mode, x.ndim)
    if u.shape[1] != x.shape[mode]:
        raise ShapeError(
            f"matrix has {u.shape[1]} columns but mode {mode} has size {x.shape[mode]}")
    shape = x.shape[:mode] + (u.shape[0],) + x.shape[mode + 1:]
    return fold(u @ unfold(x, mode), mode, shape)


def core_from_last_mode(y, u_last, plan=None, batch_rows=DEFAULT_BATCH_ROWS):
    """Contract the last mode of ``y`` with ``u_last`` (``I_N x R_N``).

    ``y`` is reshaped in place to ``l x I_N`` (row-major), multiplied by
    ``u_last`` with :func:`ttm_blocked`, and the ``l x R_N`` result is
    reshaped into the core tensor.
    """
    y = np.asarray(y, dtype=np.float64)
    u_last = check_matrix(u_last, "u_last")
    if u_last.shape[0] != y.shape[-1]:
        raise ShapeError(
            f"factor has {u_last.shape[0]} rows but last mode has size {y.shape[-1]}")
    y2 = y.reshape(-1, y.shape[-1])
    ut = np.ascontiguousarray(u_last.T)
    if plan is None:
        plan = TtmPlan.for_operands(y2, ut, batch_rows)
    g = ttm_blocked(y2, ut, plan)
    return g.reshape(y.shape[:-1] + (u_last.shape[1],))

"""Tucker decomposition drivers.

:func:`hooi_sparse` is the nonzero-driven HOOI: each mode update accumulates
``Y_(n)`` row by row from Kronecker products of factor rows, extracts the
new factor with a pivoted QR, and the core is formed once per sweep from
the last mode's ``Y``.  :func:`hooi_dense` is the textbook dense HOOI built
from explicit mode products and serves as its reference.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ._validation import check_mode, check_ranks, check_tensor
from .exceptions import NumericalError, ShapeError
from .linalg import kron_rows_batch, qrp_leading, svd_leading
from .tensor import CooTensor, fold, frobenius_norm, unfold
from .ttm import DEFAULT_BATCH_ROWS, core_from_last_mode, ttm_naive

SOLVERS = ("qrp", "svd")
FIT_FLOOR = 1e-300
# Above this many elements relative_error avoids densifying sparse input.
DENSE_ERROR_LIMIT = 2 ** 24
_EVAL_CHUNK = 65536


@dataclass(frozen=True)
class DecompConfig:
    """Settings for :func:`hooi_sparse` and :func:`hooi_dense`.

    ``tol`` is the relative fit-change threshold; ``tol=0`` runs exactly
    ``max_iters`` sweeps.  ``solver`` is ``"qrp"`` (pivoted QR) or ``"svd"``
    (Jacobi SVD reference).
    """
    ranks: tuple
    max_iters: int = 50
    tol: float = 1e-6
    seed: int = 0
    solver: str = "qrp"
    batch_rows: int = DEFAULT_BATCH_ROWS
    share_kron: bool = True

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.batch_rows < 1:
            raise ValueError("batch_rows must be >= 1")


@dataclass(frozen=True)
class TuckerModel:
    """Core tensor plus one ``I_n x R_n`` orthonormal factor per mode."""
    core: np.ndarray
    factors: tuple

    def __post_init__(self):
        core = np.asarray(self.core, dtype=np.float64)
        factors = tuple(np.asarray(f, dtype=np.float64) for f in self.factors)
        if core.ndim != len(factors):
            raise ShapeError(
                f"core has order {core.ndim} but {len(factors)} factors given")
        for n, f in enumerate(factors):
            if f.ndim != 2 or f.shape[1] != core.shape[n]:
                raise ShapeError(
                    f"factor {n} has shape {f.shape}, core needs {core.shape[n]} columns")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self):
        return tuple(f.shape[0] for f in self.factors)

    @property
    def ranks(self):
        return self.core.shape

    def reconstruct(self):
        return reconstruct(self)


@dataclass(frozen=True)
class DecompReport:
    iterations: int
    fits: tuple
    rel_error: float
    kron_calls: int
    kron_evaluations: int
    qrp_calls: int
    converged: bool
    timings: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "fits": list(self.fits),
            "rel_error": self.rel_error,
            "kron_calls": self.kron_calls,
            "kron_evaluations": self.kron_evaluations,
            "qrp_calls": self.qrp_calls,
            "converged": self.converged,
            "timings": dict(self.timings),
        }


def init_factors(shape, ranks, seed):
    """Random orthonormal starting factors.

    Each factor is the Q of a QR of a standard-normal ``I_n x R_n`` draw from
    numpy's PCG64 generator, with column signs fixed so ``diag(R) >= 0``.
    """
    ranks = check_ranks(ranks, shape)
    rng = np.random.Generator(np.random.PCG64(seed))
    factors = []
    for size, rank in zip(shape, ranks):
        q, r = np.linalg.qr(rng.standard_normal((size, rank)))
        signs = np.where(np.diag(r) < 0, -1.0, 1.0)
        factors.append(np.ascontiguousarray(q * signs))
    return factors


def _power_iteration(x, factors, mode, share_kron):
    shape, order = x.shape, x.order
    others = [t for t in range(order) if t != mode]
    width = math.prod(factors[t].shape[1] for t in others)
    if x.nnz == 0:
        return np.zeros((shape[mode], width)), 0
    idx = x.indices
    if not others:
        kron = np.ones((1, 1))
        col = np.zeros(x.nnz, dtype=np.int64)
    elif share_kron:
        # nonzeros sharing their off-mode coordinates reuse one product
        off_shape = tuple(shape[t] for t in others)
        lin = np.ravel_multi_index(tuple(idx[:, others].T), off_shape)
        uniq, col = np.unique(lin, return_inverse=True)
        groups = np.unravel_index(uniq, off_shape)
        kron = kron_rows_batch([factors[t][g] for t, g in zip(others, groups)])
    else:
        kron = kron_rows_batch([factors[t][idx[:, t]] for t in others])
        col = np.arange(x.nnz)
    rows = idx[:, mode]
    # stable sort keeps canonical order inside each row, so both paths sum
    # the same terms in the same order
    order_ = np.argsort(rows, kind="stable")
    indptr = np.zeros(shape[mode] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=shape[mode]), out=indptr[1:])
    acc = sparse.csr_matrix(
        (x.values[order_], col.reshape(-1)[order_], indptr),
        shape=(shape[mode], kron.shape[0]))
    return np.asarray(acc @ kron), kron.shape[0] if others else 0


def sparse_power_iteration(x, factors, mode, share_kron=True):
    """Mode-``mode`` unfolding of ``x`` times every factor but one, transposed.

    Every nonzero ``x[i]`` adds ``x[i] * kron(U_t[i_t] for t != mode)`` to row
    ``i_mode`` of the ``I_n x prod(R_t)`` result.
    """
    x = check_tensor(x)
    if not isinstance(x, CooTensor):
        x = CooTensor.from_dense(x)
    check_mode(mode, x.order)
    _check_factors(x.shape, factors, skip=mode)
    return _power_iteration(x, factors, mode, share_kron)[0]


def dense_power_iteration(x, factors, mode):
    """Dense counterpart of :func:`sparse_power_iteration` via mode products."""
    y = np.asarray(x, dtype=np.float64)
    check_mode(mode, y.ndim)
    _check_factors(y.shape, factors, skip=mode)
    for t, u in enumerate(factors):
        if t != mode:
            y = ttm_naive(y, u.T, t)
    return unfold(y, mode)


def _check_factors(shape, factors, skip=None):
    if len(factors) != len(shape):
        raise ShapeError(f"need {len(shape)} factors, got {len(factors)}")
    for t, (u, size) in enumerate(zip(factors, shape)):
        if t != skip and (u.ndim != 2 or u.shape[0] != size):
            raise ShapeError(f"factor {t} has shape {u.shape}, expected {size} rows")


def factor_update(y_unfold, rank, solver="qrp"):
    """Orthonormal ``I_n x rank`` basis for the dominant column space of ``Y_(n)``.

    ``"qrp"`` takes leading pivoted-QR columns (through the Gram matrix when
    ``Y_(n)`` is fat); ``"svd"`` takes leading left singular vectors.
    """
    if solver == "qrp":
        return qrp_leading(y_unfold, rank)
    if solver == "svd":
        return svd_leading(y_unfold, rank)
    raise ValueError(f"unknown solver {solver!r}")


def _run_hooi(x, cfg, xnorm, power, make_core):
    shape = x.shape
    order = len(shape)
    ranks = check_ranks(cfg.ranks, shape)
    timings = dict.fromkeys(("init", "power_iteration", "factor_update", "core"), 0.0)
    t0 = time.perf_counter()
    factors = init_factors(shape, ranks, cfg.seed)
    timings["init"] = time.perf_counter() - t0

    fits = []
    kron_calls = kron_evals = qrp_calls = 0
    converged = False
    core = None
    for it in range(1, cfg.max_iters + 1):
        for n in range(order):
            t0 = time.perf_counter()
            y, calls, evals = power(factors, n)
            t1 = time.perf_counter()
            factors[n] = factor_update(y, ranks[n], cfg.solver)
            t2 = time.perf_counter()
            timings["power_iteration"] += t1 - t0
            timings["factor_update"] += t2 - t1
            kron_calls += calls
            kron_evals += evals
            qrp_calls += 1
        t0 = time.perf_counter()
        y_last = fold(y, order - 1, ranks[:-1] + (shape[-1],))
        core = make_core(y_last, factors[-1])
        timings["core"] += time.perf_counter() - t0

        fit = float(np.linalg.norm(core)) / xnorm if xnorm > 0 else 0.0
        if not math.isfinite(fit):
            raise NumericalError(f"non-finite fit at iteration {it}", iteration=it)
        fits.append(fit)
        if it > 1:
            prev = fits[-2]
            if abs(fit - prev) / max(prev, FIT_FLOOR) < cfg.tol:
                converged = True
                break
    model = TuckerModel(core, tuple(factors))
    return model, fits, kron_calls, kron_evals, qrp_calls, converged, timings


def hooi_sparse(x, cfg):
    """Sparse HOOI driven by the nonzeros of ``x``.

    Parameters
    ----------
    x : CooTensor or array_like
    cfg : DecompConfig

    Returns
    -------
    (TuckerModel, DecompReport)
    """
    start = time.perf_counter()
    x = check_tensor(x)
    if not isinstance(x, CooTensor):
        x = CooTensor.from_dense(x)
    xnorm = frobenius_norm(x)
    uses_kron = x.order >= 3

    def power(factors, n):
        y, evals = _power_iteration(x, factors, n, cfg.share_kron)
        return y, (x.nnz if uses_kron else 0), (evals if uses_kron else 0)

    def make_core(y_last, u_last):
        return core_from_last_mode(y_last, u_last, batch_rows=cfg.batch_rows)

    return _finish(x, xnorm, start, *_run_hooi(x, cfg, xnorm, power, make_core))


def hooi_dense(x, cfg):
    """Dense HOOI: every ``Y`` is a chain of mode products over all other modes."""
    start = time.perf_counter()
    x = check_tensor(x)
    if isinstance(x, CooTensor):
        x = x.to_dense()
    xnorm = frobenius_norm(x)

    def power(factors, n):
        return dense_power_iteration(x, factors, n), 0, 0

    def make_core(y_last, u_last):
        return ttm_naive(y_last, u_last.T, y_last.ndim - 1)

    return _finish(x, xnorm, start, *_run_hooi(x, cfg, xnorm, power, make_core))


def _finish(x, xnorm, start, model, fits, kron_calls, kron_evals, qrp_calls,
            converged, timings):
    t0 = time.perf_counter()
    err = relative_error(x, model) if xnorm > 0 else 0.0
    timings["error"] = time.perf_counter() - t0
    timings["total"] = time.perf_counter() - start
    report = DecompReport(
        iterations=len(fits), fits=tuple(fits), rel_error=err,
        kron_calls=kron_calls, kron_evaluations=kron_evals,
        qrp_calls=qrp_calls, converged=converged, timings=timings)
    return model, report


def reconstruct(model):
    """Dense tensor ``core x_1 U_1 x_2 U_2 ... x_N U_N``."""
    out = model.core
    for n, u in enumerate(model.factors):
        out = ttm_naive(out, u, n)
    return out


def _model_values_at(model, indices):
    flat_core = model.core.ravel(order="F")
    out = np.empty(indices.shape[0])
    for s in range(0, indices.shape[0], _EVAL_CHUNK):
        chunk = indices[s:s + _EVAL_CHUNK]
        rows = kron_rows_batch([u[chunk[:, t]] for t, u in enumerate(model.factors)])
        out[s:s + chunk.shape[0]] = rows @ flat_core
    return out


def relative_error(x, model):
    """``||x - reconstruct(model)||_F / ||x||_F``.

    Sparse input larger than ``DENSE_ERROR_LIMIT`` elements is handled by
    expanding the squared norm, evaluating the model only at the nonzeros;
    this loses accuracy once the error nears ``sqrt(eps)``.
    """
    x = check_tensor(x)
    shape = x.shape
    if tuple(shape) != model.shape:
        raise ShapeError(f"tensor shape {tuple(shape)} != model shape {model.shape}")
    xnorm = frobenius_norm(x)
    if xnorm == 0.0:
        raise ZeroDivisionError("relative error undefined for a zero tensor")
    if isinstance(x, CooTensor):
        if math.prod(shape) <= DENSE_ERROR_LIMIT:
            diff = reconstruct(model)
            diff[tuple(x.indices.T)] -= x.values
            return float(np.linalg.norm(diff)) / xnorm
        cross = float(np.dot(x.values, _model_values_at(model, x.indices)))
        gnorm = float(np.linalg.norm(model.core))
        sq = max(xnorm * xnorm - 2.0 * cross + gnorm * gnorm, 0.0)
        return math.sqrt(sq) / xnorm
    return float(np.linalg.norm(x - reconstruct(model))) / xnorm

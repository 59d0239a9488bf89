"""scikit-learn style facade over :func:`hooi_sparse`."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_ranks, check_tensor
from .exceptions import ShapeError
from .tensor import CooTensor
from .ttm import DEFAULT_BATCH_ROWS, ttm_naive
from .tucker import DecompConfig, TuckerModel, hooi_dense, hooi_sparse, reconstruct


class SparseTucker(TransformerMixin, BaseEstimator):
    """Tucker decomposition of a single tensor by (sparse) HOOI.

    Unlike most transformers the "dataset" is one tensor; ``fit`` learns the
    factor matrices and ``transform`` projects a tensor of the same shape
    onto them, giving a core.

    Parameters
    ----------
    ranks : sequence of int
        Multilinear rank, one entry per mode.
    max_iter : int, default=50
        Sweep cap.
    tol : float, default=1e-6
        Relative fit-change threshold; 0 runs all ``max_iter`` sweeps.
    solver : {"qrp", "svd"}, default="qrp"
    random_state : int, default=0
        Seed for the initial factors.
    batch_rows : int, default=32
        Row batch of the core-forming TTM.
    dense : bool, default=False
        Use the dense reference HOOI instead of the nonzero-driven one.

    Attributes
    ----------
    core_ : ndarray
    factors_ : list of ndarray
    n_iter_ : int
    fit_history_ : ndarray
        Fit ``||G|| / ||X||`` after each sweep.
    report_ : DecompReport
    """

    def __init__(self, ranks=None, max_iter=50, tol=1e-6, solver="qrp",
                 random_state=0, batch_rows=DEFAULT_BATCH_ROWS, dense=False):
        self.ranks = ranks
        self.max_iter = max_iter
        self.tol = tol
        self.solver = solver
        self.random_state = random_state
        self.batch_rows = batch_rows
        self.dense = dense

    def _config(self, shape):
        if self.ranks is None:
            raise ValueError("ranks must be set before fitting")
        ranks = check_ranks(self.ranks, shape)
        return DecompConfig(ranks, max_iters=self.max_iter, tol=self.tol,
                            seed=self.random_state, solver=self.solver,
                            batch_rows=self.batch_rows)

    def fit(self, X, y=None):
        x = check_tensor(X)
        cfg = self._config(x.shape)
        model, report = (hooi_dense if self.dense else hooi_sparse)(x, cfg)
        self.core_ = model.core
        self.factors_ = list(model.factors)
        self.n_iter_ = report.iterations
        self.fit_history_ = np.asarray(report.fits)
        self.report_ = report
        self.shape_ = tuple(x.shape)
        return self

    def _check_fitted(self):
        if not hasattr(self, "factors_"):
            raise NotFittedError(
                f"This {type(self).__name__} instance is not fitted yet.")

    @property
    def model_(self):
        self._check_fitted()
        return TuckerModel(self.core_, tuple(self.factors_))

    def transform(self, X):
        """Core ``X x_1 U_1^T ... x_N U_N^T`` of ``X`` under the fitted factors."""
        self._check_fitted()
        x = check_tensor(X)
        if tuple(x.shape) != self.shape_:
            raise ShapeError(f"expected shape {self.shape_}, got {tuple(x.shape)}")
        out = x.to_dense() if isinstance(x, CooTensor) else x
        for n, u in enumerate(self.factors_):
            out = ttm_naive(out, u.T, n)
        return out

    def inverse_transform(self, G):
        """Dense tensor ``G x_1 U_1 ... x_N U_N``."""
        self._check_fitted()
        return reconstruct(TuckerModel(G, tuple(self.factors_)))

    def score(self, X, y=None):
        """Fit ``||transform(X)|| / ||X||`` (1 means exactly representable)."""
        x = check_tensor(X)
        xd = x.to_dense() if isinstance(x, CooTensor) else x
        norm = float(np.linalg.norm(xd))
        if norm == 0.0:
            return 1.0
        return float(np.linalg.norm(self.transform(xd))) / norm

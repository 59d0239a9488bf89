"""Sparse Tucker decomposition by higher-order orthogonal iteration."""
from .datagen import (GenSpec, compression_ratio, core_compression_ratio,
                      gen_exact_lowrank, gen_matmul_tensor, gen_uniform_sparse,
                      gen_vessel_image)
from .estimator import SparseTucker
from .exceptions import (BoundsError, ConvergenceError, FormatError, NumericalError,
                         RankError, ShapeError, TnsParseError)
from .io import format_tns, read_pgm, read_tns, write_pgm, write_tns
from .linalg import (QrpResult, SvdResult, gram_qrp, jacobi_svd, kron_rows,
                     kron_rows_multi, qrp, qrp_flops, svd_flops)
from .tensor import (CooTensor, coo_from_triples, fold, frobenius_norm,
                     inner_product, sparsity, unfold, unfold_col_index)
from .ttm import TtmPlan, core_from_last_mode, ttm_blocked, ttm_naive
from .tucker import (DecompConfig, DecompReport, TuckerModel, hooi_dense,
                     hooi_sparse, init_factors, reconstruct, relative_error)

__version__ = "0.1.0"

"""Length-square sampling SVD and CCA with exact baselines."""
from ._backend import BACKEND
from .cca import CcaModel, canonical_variates, cca
from .data import DatasetPair, gen_lowrank, gen_pcca, gen_pcca_quadratic, load_matrix, save_matrix
from .errors import (
    CapacityExceeded,
    DegenerateDistribution,
    DegenerateInput,
    FormatError,
    InvalidInput,
    ParseError,
    QiccaError,
)
from .features import FeatureMap, expand_second_order
from .linalg import SvdFactors, center_columns, svd
from .matrix_store import MatrixStore, SketchResult, build_store, matrix_sampling
from .metrics import EvalReport, mean_auc, recovery_score, sum_correlations
from .qi_cca import QiCcaModel, WeightDescription, dense_weights, fit_qicca, qicca, variates_from_description
from .qisvd import Description, description_entry, materialize, orthonormalize, qisvd
from .sampling_tree import SamplingTree, build_tree, sample_index, update_leaf

__version__ = "0.1.0"

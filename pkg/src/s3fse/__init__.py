"""Multi-view spectral-spatial feature selection and extraction."""

from .data import (
    HyperspectralCube,
    LabelVector,
    MultiViewDataset,
    SplitSpec,
    ViewMatrix,
    normalize_views,
    stack_views,
    stratified_split,
)
from .estimator import S3FSE, CoLGP, KNNClassifier, StackedPCA
from .evaluation import (
    ConfusionMatrix,
    class_accuracies,
    colgp_fit,
    confusion_matrix,
    kappa,
    knn_classify,
    overall_accuracy,
    pca_fit,
)
from .exceptions import InvalidInputError, NumericalError, UndefinedMetricError
from .features import DmpSpec, GaborBankSpec, dmp_features, gabor_texture, pca_images, spectral_view
from .graphs import joint_label_graph, joint_laplacian_blocks, knn_heat_graph, laplacian
from .solver import (
    ProjectionMatrix,
    S3FSEConfig,
    SolveTrace,
    assemble_h1,
    assemble_h2,
    fit_projection,
    generalized_eigensolve,
    l21_norm,
    project,
    reweight_h3,
    row_support,
)
from .synthetic import SyntheticSpec, synth_generate

__version__ = "0.1.0"

__all__ = [
    "CoLGP",
    "ConfusionMatrix",
    "DmpSpec",
    "GaborBankSpec",
    "HyperspectralCube",
    "InvalidInputError",
    "KNNClassifier",
    "LabelVector",
    "MultiViewDataset",
    "NumericalError",
    "ProjectionMatrix",
    "S3FSE",
    "S3FSEConfig",
    "SolveTrace",
    "SplitSpec",
    "StackedPCA",
    "SyntheticSpec",
    "UndefinedMetricError",
    "ViewMatrix",
    "assemble_h1",
    "assemble_h2",
    "class_accuracies",
    "colgp_fit",
    "confusion_matrix",
    "dmp_features",
    "fit_projection",
    "gabor_texture",
    "generalized_eigensolve",
    "joint_label_graph",
    "joint_laplacian_blocks",
    "kappa",
    "knn_classify",
    "knn_heat_graph",
    "l21_norm",
    "laplacian",
    "normalize_views",
    "overall_accuracy",
    "pca_fit",
    "pca_images",
    "project",
    "reweight_h3",
    "row_support",
    "spectral_view",
    "stack_views",
    "stratified_split",
    "synth_generate",
]

"""Symbolic-transfer-entropy connectivity features, consensus nested
cross-validation feature selection, and skill classification.

The heavy lifting lives in the compiled ``stec._core`` extension; this
package re-exports its surface.
"""

from ._core import (  # noqa: F401
    SENSORS,
    Model,
    StecError,
    __version__,
    cncv_select,
    crossval,
    discretize,
    ema_smooth,
    feature_names,
    features_from_manifest,
    fit,
    make_folds,
    mrmr_rank,
    mutual_information,
    ordinal_pattern,
    pca_project,
    remove_outliers,
    resample_1s,
    ste,
    ste_matrix,
)

__all__ = [
    "SENSORS",
    "Model",
    "StecError",
    "__version__",
    "cncv_select",
    "crossval",
    "discretize",
    "ema_smooth",
    "feature_names",
    "features_from_manifest",
    "fit",
    "make_folds",
    "mrmr_rank",
    "mutual_information",
    "ordinal_pattern",
    "pca_project",
    "remove_outliers",
    "resample_1s",
    "ste",
    "ste_matrix",
]

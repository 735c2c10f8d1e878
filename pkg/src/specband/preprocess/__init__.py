"""Band normalization and PCA spectral reduction."""

from .normalize import normalize
from .pca import PcaModel, jacobi_eigh, load_pca, pca_apply, pca_fit, save_pca

__all__ = ["PcaModel", "jacobi_eigh", "load_pca", "normalize", "pca_apply", "pca_fit", "save_pca"]

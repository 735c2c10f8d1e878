"""PCA spectral reduction on a cyclic Jacobi eigensolver."""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import structlog

from ..dataio.cube_io import read_array, write_array
from ..dataio.models import HyperCube, SourceKind
from ..errors import CheckpointError, ConfigurationError, RankDeficient, ShapeMismatch

logger = structlog.get_logger(__name__)


@dataclass
class PcaModel:
    """mean: c-vector; components: r×c (rows are principal axes); explained_variance: r-vector."""
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def bands(self) -> int:
        return int(self.components.shape[1])

    @property
    def reduced_bands(self) -> int:
        return int(self.components.shape[0])

    def transform(self, pixels: np.ndarray) -> np.ndarray:
        """Project an n×c pixel matrix to n×r."""
        return (np.asarray(pixels, dtype=np.float64) - self.mean) @ self.components.T

    def inverse_transform(self, projected: np.ndarray) -> np.ndarray:
        return projected @ self.components + self.mean


def jacobi_eigh(
    matrix: np.ndarray,
    tol: float = 1e-12,
    max_sweeps: int = 100,
) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Stops once the off-diagonal Frobenius norm is at most `tol` times the
    Frobenius norm of the input.

    Returns:
        (eigenvalues, eigenvectors as columns), in no particular order
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"jacobi_eigh expects a square matrix, got {a.shape}")
    n = a.shape[0]
    v = np.eye(n)
    norm = float(np.linalg.norm(a))

    for sweep in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= tol * norm:
            logger.debug("Jacobi converged", size=n, sweeps=sweep)
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0 else -1.0
                t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    raise RankDeficient(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def canonical_signs(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude coefficient is positive."""
    out = np.array(components, dtype=np.float64, copy=True)
    for row in out:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    return out


def pca_fit(pixels: np.ndarray, r: int) -> PcaModel:
    """Fit the top-r principal axes of an n×c pixel matrix.

    Covariance is the population covariance (divides by n), so the variance of
    projected coordinate j over the fit pixels equals explained_variance[j].
    """
    x = np.asarray(pixels, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch(f"pca_fit expects an n×c matrix, got {x.shape}")
    n, c = x.shape
    if not 1 <= r <= c:
        raise ConfigurationError(f"reduced band count {r} outside [1, {c}]")
    if n < r:
        raise ConfigurationError(f"pca_fit needs at least {r} pixels, got {n}")

    mean = x.mean(axis=0)
    centered = x - mean
    covariance = centered.T @ centered / n
    covariance = 0.5 * (covariance + covariance.T)
    if not np.isfinite(covariance).all():
        raise RankDeficient("covariance holds non-finite values")

    eigenvalues, eigenvectors = jacobi_eigh(covariance)
    order = np.argsort(-eigenvalues, kind="stable")[:r]
    components = canonical_signs(eigenvectors[:, order].T)
    explained = np.maximum(eigenvalues[order], 0.0)

    logger.info(
        "PCA fitted",
        pixels=n,
        bands=c,
        reduced_bands=r,
        retained_variance=float(explained.sum()),
        total_variance=float(np.trace(covariance)),
    )
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def pca_apply(model: PcaModel, cube: HyperCube) -> HyperCube:
    """Project every pixel: (x - mean) · componentsᵀ, giving an r-band cube."""
    if cube.bands != model.bands:
        raise ShapeMismatch(f"PCA model expects {model.bands} bands, cube has {cube.bands}")
    projected = model.transform(cube.pixels())
    values = projected.T.reshape(model.reduced_bands, cube.height, cube.width)
    return HyperCube(values=np.ascontiguousarray(values), source_kind=SourceKind.HSI)


def save_pca(model: PcaModel, path: Union[str, Path]) -> None:
    """Single-band f64le raster: row 0 mean, rows 1..r components, last row variances."""
    r, c = model.components.shape
    variances = np.zeros(c)
    variances[:r] = model.explained_variance
    table = np.vstack([model.mean[None, :], model.components, variances[None, :]])
    write_array(table[None, :, :], path, "f64le")


def load_pca(path: Union[str, Path]) -> PcaModel:
    header, values = read_array(path)
    if header.dtype != "f64le" or header.bands != 1 or header.height < 3:
        raise CheckpointError(f"{path}: not a PCA model raster")
    table = values[0].astype(np.float64)
    r = table.shape[0] - 2
    if r > table.shape[1]:
        raise CheckpointError(f"{path}: {r} components for {table.shape[1]} bands")
    return PcaModel(
        mean=table[0].copy(),
        components=table[1:1 + r].copy(),
        explained_variance=table[-1, :r].copy(),
    )

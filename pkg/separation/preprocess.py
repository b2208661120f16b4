from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
from scipy import linalg

from custom_logging import logging_setup
from separation.exceptions import InputException, DegenerateDataException, SingularMatrixException

log = logging_setup(__name__)

EIGEN_FLOOR = 1e-10
ORTH_FLOOR = 1e-12


@dataclass(frozen=True)
class DataMatrix:
    """
    An m x N sample matrix: rows are channels (mixtures or sources), columns are samples.
    """
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise InputException(f"A data matrix has to be two dimensional, got shape {values.shape}.")
        m, n = values.shape
        if m < 2 or n < m:
            raise InputException(f"A data matrix needs m >= 2 and N >= m, got m={m}, N={n}.")
        if not np.all(np.isfinite(values)):
            raise InputException("A data matrix must only contain finite values.")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(m={self.m}, N={self.N})"


ArrayLike = Union[DataMatrix, np.ndarray]


def as_array(X: ArrayLike) -> np.ndarray:
    """
    The plain 2-D float array behind a DataMatrix or an array.
    """
    if isinstance(X, DataMatrix):
        return X.values
    values = np.asarray(X, dtype=float)
    if values.ndim == 1:
        values = values[np.newaxis, :]
    return values


@dataclass(frozen=True)
class WhiteningModel:
    """
    The sample mean and the whitening transform V with V cov(X) V^T = I.
    """
    mean: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    eigen_floor: float = EIGEN_FLOOR

    def transform(self, X: ArrayLike) -> np.ndarray:
        """
        Map raw data to whitened coordinates.
        """
        return self.V @ (as_array(X) - self.mean[:, np.newaxis])

    def total_demixing(self, W: np.ndarray) -> np.ndarray:
        """
        The demixing map acting on raw (centered) data: W V.
        """
        return W @ self.V


def center(X: ArrayLike) -> Tuple[DataMatrix, np.ndarray]:
    """
    Subtract the per-row sample mean.

    :param X: The raw data matrix.
    :return: The centered matrix and the mean vector.
    """
    values = as_array(X)
    if not np.all(np.isfinite(values)):
        raise InputException("Cannot center data containing non-finite values.")
    mean = values.mean(axis=1)
    return DataMatrix(values - mean[:, np.newaxis]), mean


def covariance(X: ArrayLike) -> np.ndarray:
    """
    Sample covariance of centered data with the 1/N normalisation.
    """
    values = as_array(X)
    return values @ values.T / values.shape[1]


def whiten(Xc: ArrayLike, mean: np.ndarray = None) -> Tuple[DataMatrix, WhiteningModel]:
    """
    Whiten centered data with the symmetric inverse square root of its covariance, V = E diag(l^-1/2) E^T.

    :param Xc: Centered data.
    :param mean: The mean removed while centering, stored in the model. Zero when omitted.
    :return: The whitened data and the whitening model.
    """
    values = as_array(Xc)
    eigenvalues, eigenvectors = linalg.eigh(covariance(values))
    floor = EIGEN_FLOOR * max(eigenvalues.max(), 0.0)
    smallest = eigenvalues.min()
    if eigenvalues.max() <= 0 or smallest <= floor:
        raise DegenerateDataException(
            f"Covariance is rank deficient: eigenvalue {smallest:.3e} is below the floor {floor:.3e} "
            f"(largest eigenvalue {eigenvalues.max():.3e})."
        )

    V = eigenvectors @ np.diag(eigenvalues ** -0.5) @ eigenvectors.T
    if mean is None:
        mean = np.zeros(values.shape[0])
    log.debug(f"Whitening {values.shape[0]} channels, covariance condition number {eigenvalues.max() / smallest:.3e}")
    return DataMatrix(V @ values), WhiteningModel(mean=np.asarray(mean, dtype=float), V=V, eigen_floor=floor)


def center_and_whiten(X: ArrayLike) -> Tuple[DataMatrix, WhiteningModel]:
    """
    center followed by whiten, with the mean recorded in the model.
    """
    Xc, mean = center(X)
    return whiten(Xc, mean)


def sym_orth(W: np.ndarray) -> np.ndarray:
    """
    Symmetric orthogonalisation W <- (W W^T)^{-1/2} W, the orthogonal polar factor of W.

    :param W: A full-rank square matrix.
    :return: The orthogonal matrix closest to W.
    """
    W = np.asarray(W, dtype=float)
    if not np.all(np.isfinite(W)):
        raise SingularMatrixException("Cannot orthogonalise a matrix with non-finite entries.")
    eigenvalues, eigenvectors = linalg.eigh(W @ W.T)
    largest = eigenvalues.max()
    if largest <= 0 or eigenvalues.min() <= ORTH_FLOOR * largest:
        raise SingularMatrixException(
            f"Cannot orthogonalise a singular matrix, smallest eigenvalue of W W^T is {eigenvalues.min():.3e}."
        )
    return eigenvectors @ np.diag(eigenvalues ** -0.5) @ eigenvectors.T @ W

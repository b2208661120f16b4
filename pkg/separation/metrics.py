import math

import numpy as np

from separation.exceptions import DegenerateGainException, InputException


def gain_matrix(W: np.ndarray, V: np.ndarray, A: np.ndarray) -> np.ndarray:
    """
    P = W V A: the rotation found on whitened data composed with whitening, applied to the true mixing.
    """
    W, V, A = (np.asarray(M, dtype=float) for M in (W, V, A))
    if W.shape[1] != V.shape[0] or V.shape[1] != A.shape[0]:
        raise InputException(f"Shapes do not chain: W {W.shape}, V {V.shape}, A {A.shape}.")
    return W @ V @ A


def amari_error(P: np.ndarray) -> float:
    """
    Amari separation error, zero exactly when P is a scaled permutation.

        E = sum_i (sum_j |p_ij| / max_k |p_ik| - 1) + sum_j (sum_i |p_ij| / max_k |p_kj| - 1)

    Sums are exactly rounded so the value does not depend on row or column order. Scaling P by a power of two leaves
    it unchanged bit for bit; other factors round c P first and agree only to rounding.
    """
    magnitude = np.abs(np.asarray(P, dtype=float))
    if not np.all(np.isfinite(magnitude)):
        raise DegenerateGainException("Gain matrix has non-finite entries.")
    if np.any(magnitude.max(axis=1) == 0) or np.any(magnitude.max(axis=0) == 0):
        raise DegenerateGainException("Gain matrix has an all-zero row or column.")

    rows = [math.fsum(row) / row.max() - 1 for row in magnitude]
    columns = [math.fsum(column) / column.max() - 1 for column in magnitude.T]
    return math.fsum(rows + columns)

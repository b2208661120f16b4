"""
Symmetric FastICA on whitened data.
"""
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np

from custom_logging import logging_setup
from helpers.decorators import function_decorator, log_method_calls, log_time
from separation.exceptions import InputException, IterationException, SingularMatrixException
from separation.preprocess import ArrayLike, as_array, sym_orth

log = logging_setup(__name__)

INIT_ATTEMPTS = 10


@dataclass(frozen=True)
class FasticaConfig:
    k_max: int = 300
    tau: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.k_max < 1:
            raise InputException(f"k_max has to be at least 1, got {self.k_max}.")
        if not self.tau > 0:
            raise InputException(f"tau has to be positive, got {self.tau}.")


@dataclass(frozen=True)
class SeparationResult:
    W: np.ndarray = field(repr=False)
    iterations: int
    converged: bool
    elapsed: float
    max_orthogonality_error: float = 0.0


def orthogonality_error(W: np.ndarray) -> float:
    return float(np.linalg.norm(W @ W.T - np.eye(W.shape[0])))


def init_w(m: int, rng: np.random.Generator) -> np.ndarray:
    """
    Orthogonalise a standard normal m x m matrix.
    """
    if m < 2:
        raise InputException(f"Need m >= 2 to initialise a demixing matrix, got m={m}.")
    for attempt in range(INIT_ATTEMPTS):
        try:
            return sym_orth(rng.standard_normal((m, m)))
        except SingularMatrixException:
            log.debug(f"Singular Gaussian draw on attempt {attempt + 1}, drawing again")
    raise SingularMatrixException(f"No invertible Gaussian matrix in {INIT_ATTEMPTS} draws.")


def fastica_step(W: np.ndarray, X: ArrayLike, nl, iteration: int = None) -> np.ndarray:
    """
    One symmetric fixed-point update: w_k <- E[x g(w_k^T x)] - E[g'(w_k^T x)] w_k for every row, then
    W <- (W W^T)^{-1/2} W.

    :param nl: Anything with ``evaluate(y) -> (g, g')``.
    :param iteration: The iteration index reported if the update collapses.
    """
    values = as_array(X)
    G, Gprime = nl.evaluate(W @ values)
    W_new = G @ values.T / values.shape[1] - Gprime.mean(axis=1)[:, np.newaxis] * W
    try:
        return sym_orth(W_new)
    except SingularMatrixException as e:
        raise IterationException(f"FastICA update collapsed at iteration {iteration}: {e}", iteration, W) from e


def converged(W_new: np.ndarray, W_old: np.ndarray, tau: float) -> bool:
    """
    Relative Frobenius change below tau after flipping rows of W_new that point away from their predecessor.
    """
    signs = np.where(np.sum(W_new * W_old, axis=1) < 0, -1.0, 1.0)
    change = np.linalg.norm(W_new * signs[:, np.newaxis] - W_old) / np.linalg.norm(W_old)
    return bool(change < tau)


@function_decorator(log_method_calls, log_time)
def run_fastica(X: ArrayLike, nl, cfg: FasticaConfig = FasticaConfig(), w_init: np.ndarray = None) -> SeparationResult:
    """
    Iterate fastica_step until the convergence test passes or k_max updates were made.

    :param w_init: Starting matrix; a seeded Gaussian orthogonalisation when omitted.
    """
    values = as_array(X)
    start = perf_counter()
    if w_init is None:
        W = init_w(values.shape[0], np.random.default_rng(cfg.seed))
    else:
        W = sym_orth(w_init)
    worst = orthogonality_error(W)

    is_converged = False
    iterations = 0
    for k in range(cfg.k_max):
        W_new = fastica_step(W, values, nl, iteration=k)
        iterations = k + 1
        worst = max(worst, orthogonality_error(W_new))
        is_converged = converged(W_new, W, cfg.tau)
        W = W_new
        if is_converged:
            break

    elapsed = perf_counter() - start
    if not is_converged:
        log.warning(f"FastICA with {getattr(nl, 'name', nl)} did not converge in {cfg.k_max} iterations")
    log.debug(f"FastICA finished after {iterations} iterations, orthogonality error {worst:.2e}")
    return SeparationResult(W=W, iterations=iterations, converged=is_converged, elapsed=elapsed,
                            max_orthogonality_error=worst)

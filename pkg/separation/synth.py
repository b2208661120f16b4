"""
Seeded synthetic ICA problems: unit-variance sources from one marginal family, a random well-conditioned mixing
matrix and their product.

RNG scheme: every draw uses numpy's PCG64 ``Generator``. ``make_dataset`` spawns the scenario seed into two streams
with ``SeedSequence``, the first for the sources and the second for the mixing matrix.
"""
import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gamma

from custom_logging import logging_setup
from helpers import spawn_generators
from separation.exceptions import InputException, MixingException
from separation.preprocess import DataMatrix

log = logging_setup(__name__)

MAX_CONDITION = 100.0
MIXING_ATTEMPTS = 100


class FamilyKind(Enum):
    GGD = 'ggd'
    POISSON = 'poisson'


@dataclass(frozen=True)
class SourceFamily:
    kind: FamilyKind
    parameter: float

    def __post_init__(self):
        try:
            object.__setattr__(self, 'kind', FamilyKind(self.kind))
        except ValueError as e:
            raise InputException(f"Unknown source family {self.kind!r}.") from e
        if not self.parameter > 0:
            raise InputException(f"The {self.kind.value} parameter has to be positive, got {self.parameter}.")

    @classmethod
    def ggd(cls, beta: float) -> 'SourceFamily':
        return cls(FamilyKind.GGD, beta)

    @classmethod
    def poisson(cls, lam: float) -> 'SourceFamily':
        return cls(FamilyKind.POISSON, lam)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind is FamilyKind.GGD:
            return sample_ggd(self.parameter, n, rng)
        return sample_poisson_centered(self.parameter, n, rng)

    def __str__(self) -> str:
        symbol = 'beta' if self.kind is FamilyKind.GGD else 'lambda'
        return f"{self.kind.value}({symbol}={self.parameter:g})"


@dataclass(frozen=True)
class Scenario:
    family: SourceFamily
    m: int = 8
    N: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.m < 2 or self.N < self.m:
            raise InputException(f"A scenario needs m >= 2 and N >= m, got m={self.m}, N={self.N}.")


@dataclass(frozen=True)
class Dataset:
    X: DataMatrix
    A: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter((self.X, self.A, self.S))

    def checksum(self, algorithm: str = 'sha256') -> str:
        """
        Hash of the mixtures, mixing matrix and sources, used to check that paired runs saw the same data.
        """
        hasher = hashlib.new(algorithm)
        for array in (self.X.values, self.A, self.S):
            hasher.update(np.ascontiguousarray(array, dtype=float).tobytes())
        return hasher.hexdigest()


def sample_ggd(beta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Unit-variance generalised Gaussian draws, density proportional to exp(-|x/alpha|^beta) with
    alpha^2 = Gamma(1/beta) / Gamma(3/beta): sign * Gamma(1/beta, 1)^(1/beta) * alpha.
    """
    if not beta > 0 or n < 1:
        raise InputException(f"Need beta > 0 and n >= 1, got beta={beta}, n={n}.")
    alpha = np.sqrt(gamma(1 / beta) / gamma(3 / beta))
    magnitude = rng.gamma(1 / beta, 1.0, size=n) ** (1 / beta)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * magnitude * alpha


def sample_poisson_centered(lam: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Poisson(lam) draws by inversion with sequential search, centered and scaled to unit variance.
    """
    if not lam > 0 or n < 1:
        raise InputException(f"Need lambda > 0 and n >= 1, got lambda={lam}, n={n}.")
    u = rng.random(n)
    k = np.zeros(n)
    mass = np.exp(-lam)
    cdf = mass
    step = 0
    pending = u > cdf
    while np.any(pending):
        k[pending] += 1
        step += 1
        mass *= lam / step
        cdf += mass
        pending = u > cdf
        if mass == 0:
            # cdf has stalled below the largest uniforms in floating point
            break
    return (k - lam) / np.sqrt(lam)


def random_mixing(m: int, rng: np.random.Generator, max_condition: float = MAX_CONDITION,
                  attempts: int = MIXING_ATTEMPTS) -> np.ndarray:
    """
    A standard normal m x m matrix, drawn again while its condition number exceeds ``max_condition``.
    """
    if m < 2:
        raise InputException(f"Need m >= 2 for a mixing matrix, got m={m}.")
    for attempt in range(attempts):
        A = rng.standard_normal((m, m))
        if np.linalg.cond(A) <= max_condition:
            if attempt:
                log.debug(f"Mixing matrix accepted after {attempt + 1} draws")
            return A
    raise MixingException(f"No mixing matrix with condition number <= {max_condition} in {attempts} draws.")


def make_dataset(sc: Scenario) -> Dataset:
    """
    Sources S (m x N, i.i.d. rows from the scenario family), mixing A and mixtures X = A S.
    """
    source_rng, mixing_rng = spawn_generators(sc.seed, 2)
    S = np.vstack([sc.family.sample(sc.N, source_rng) for _ in range(sc.m)])
    A = random_mixing(sc.m, mixing_rng)
    return Dataset(X=DataMatrix(A @ S), A=A, S=S)

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from separation.exceptions import InputException
from separation.score import ScoreTable, eval_g


class NonlinearityKind(Enum):
    TANH = 'tanh'
    POW3 = 'pow3'
    SKEW = 'skew'
    GAUSS = 'gauss'
    PBECF = 'pbecf'

    @property
    def is_learned(self) -> bool:
        return self is NonlinearityKind.PBECF


@dataclass(frozen=True)
class Nonlinearity:
    """
    A FastICA nonlinearity g with its derivative. The fixed kinds are the classical choices; ``pbecf`` carries a
    learned ScoreTable.
    """
    kind: NonlinearityKind
    table: Optional[ScoreTable] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, 'kind', NonlinearityKind(self.kind))
        except ValueError as e:
            raise InputException(f"Unknown nonlinearity {self.kind!r}.") from e
        if self.kind.is_learned and not isinstance(self.table, ScoreTable):
            raise InputException("The learned nonlinearity needs a score table.")

    @classmethod
    def learned(cls, table: ScoreTable) -> 'Nonlinearity':
        return cls(NonlinearityKind.PBECF, table)

    @property
    def name(self) -> str:
        return self.kind.value

    def evaluate(self, y) -> Tuple[np.ndarray, np.ndarray]:
        """
        g(y) and g'(y), elementwise.
        """
        if self.kind is NonlinearityKind.PBECF:
            return eval_g(self.table, y)
        y = np.asarray(y, dtype=float)
        if self.kind is NonlinearityKind.TANH:
            g = np.tanh(y)
            gprime = 1 - g ** 2
        elif self.kind is NonlinearityKind.POW3:
            g = y ** 3
            gprime = 3 * y ** 2
        elif self.kind is NonlinearityKind.SKEW:
            g = y ** 2
            gprime = 2 * y
        else:
            bell = np.exp(-y ** 2 / 2)
            g = y * bell
            gprime = (1 - y ** 2) * bell
        if g.ndim == 0:
            return float(g), float(gprime)
        return g, gprime


def evaluate(nl: Nonlinearity, y) -> Tuple[np.ndarray, np.ndarray]:
    return nl.evaluate(y)

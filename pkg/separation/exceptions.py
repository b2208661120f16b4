class InputException(ValueError):
    pass


class DegenerateDataException(ValueError):
    pass


class SingularMatrixException(DegenerateDataException):
    pass


class FrequencyBandException(ValueError):
    pass


class DegenerateGainException(ValueError):
    pass


class MixingException(RuntimeError):
    pass


class IterationException(RuntimeError):
    """
    Raised when a FastICA update cannot be orthogonalised. Carries the iteration index and the last orthogonal
    demixing matrix so the caller can report partial diagnostics.
    """

    def __init__(self, message: str, iteration: int = None, W=None):
        super().__init__(message)
        self.iteration = iteration
        self.W = W

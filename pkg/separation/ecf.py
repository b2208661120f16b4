"""
Projection-binned empirical characteristic functions.

Each probe projects whitened data on a unit direction, standardises the projection, bins it with uniform dither and
evaluates the binned ECF on a short grid of low frequencies inside the safe band |u| h <= c, dividing out the
sinc(u h / 2) smoothing of width-h bins.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from custom_logging import logging_setup
from separation.exceptions import InputException, DegenerateDataException, FrequencyBandException
from separation.preprocess import ArrayLike, as_array

log = logging_setup(__name__)

BAND_TOLERANCE = 1e-12


class BinMode(Enum):
    EQUAL_WIDTH = 'equal_width'
    EQUAL_OCCUPANCY = 'equal_occupancy'


class DitherMode(Enum):
    SUBTRACTIVE = 'subtractive'
    NONE = 'none'


@dataclass(frozen=True)
class EcfParams:
    B: int = 128
    mode: BinMode = BinMode.EQUAL_WIDTH
    c: float = 0.3
    delta: float = 1e-3
    L: int = 5
    dither: DitherMode = DitherMode.SUBTRACTIVE

    def __post_init__(self):
        try:
            object.__setattr__(self, 'mode', BinMode(self.mode))
            object.__setattr__(self, 'dither', DitherMode(self.dither))
        except ValueError as e:
            raise InputException(str(e)) from e
        if self.B < 2:
            raise InputException(f"At least two bins are needed, got B={self.B}.")
        if not 0 < self.c < np.pi:
            raise InputException(f"The safe band constant has to lie in (0, pi), got c={self.c}.")
        if self.delta <= 0:
            raise InputException(f"The sinc floor has to be positive, got delta={self.delta}.")
        if self.L < 1:
            raise InputException(f"At least one frequency is needed, got L={self.L}.")


@dataclass(frozen=True)
class BinSpec:
    mode: BinMode
    edges: np.ndarray = field(repr=False)
    centers: np.ndarray = field(repr=False)
    h: float

    @property
    def B(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class EcfProbe:
    """
    One direction's debiased binned ECF on the retained positive frequencies. Negative frequencies follow by
    conjugation since the projected data are real.
    """
    direction: np.ndarray = field(repr=False)
    freqs: np.ndarray
    phi: np.ndarray
    taper: np.ndarray
    h: float
    standardization: Tuple[float, float]

    def symmetric_spectrum(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Frequencies, ECF values and taper weights over -u_L..-u_1, u_1..u_L.
        """
        freqs = np.concatenate([-self.freqs[::-1], self.freqs])
        phi = np.concatenate([np.conj(self.phi[::-1]), self.phi])
        taper = np.concatenate([self.taper[::-1], self.taper])
        return freqs, phi, taper


def sample_directions(m: int, R: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw R directions uniformly on the unit sphere in R^m by normalising standard normal vectors.

    :return: An R x m array, one direction per row.
    """
    if R < 1 or m < 1:
        raise InputException(f"Need m >= 1 and R >= 1, got m={m}, R={R}.")
    directions = rng.standard_normal((R, m))
    norms = np.linalg.norm(directions, axis=1)
    while np.any(norms == 0):
        redraw = norms == 0
        directions[redraw] = rng.standard_normal((int(redraw.sum()), m))
        norms = np.linalg.norm(directions, axis=1)
    return directions / norms[:, np.newaxis]


def project_standardize(X: ArrayLike, a: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """
    Project the data on ``a`` and standardise to zero mean and unit (1/N) standard deviation.

    :return: The standardised projection and the mean and std it had before standardisation.
    """
    Z = np.asarray(a, dtype=float) @ as_array(X)
    mean = float(Z.mean())
    std = float(Z.std())
    if not std > 1e-12 * max(1.0, abs(mean)):
        raise DegenerateDataException(f"Projection is constant (std={std:.3e}), it cannot be standardised.")
    return (Z - mean) / std, mean, std


def build_bins(Z: np.ndarray, B: int, mode: BinMode = BinMode.EQUAL_WIDTH) -> BinSpec:
    """
    Build B bins for the samples Z.

    Equal-width bins are centred on an even lattice from min(Z) to max(Z), so the edges reach h/2 beyond the data.
    Equal-occupancy bins have their edges at the sample quantiles k/B and a nominal width range/B.
    """
    mode = BinMode(mode)
    Z = np.asarray(Z, dtype=float)
    if B < 2 or B > len(Z):
        raise InputException(f"Need 2 <= B <= N, got B={B} for N={len(Z)}.")
    low, high = Z.min(), Z.max()
    if not high > low:
        raise DegenerateDataException("Cannot bin samples with zero range.")

    if mode is BinMode.EQUAL_WIDTH:
        h = (high - low) / (B - 1)
        edges = low - h / 2 + h * np.arange(B + 1)
    else:
        edges = np.quantile(Z, np.arange(B + 1) / B)
        if np.any(np.diff(edges) <= 0):
            raise DegenerateDataException("Tied sample quantiles, equal-occupancy bins would be empty.")
        h = (edges[-1] - edges[0]) / B

    centers = (edges[:-1] + edges[1:]) / 2
    return BinSpec(mode=mode, edges=edges, centers=centers, h=float(h))


def assign_bins(Z: np.ndarray, bins: BinSpec, rng: np.random.Generator = None,
                dither: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Add uniform dither U[-h/2, h/2] to every sample and find its bin. Samples pushed outside the edges land in the
    boundary bins.

    :return: The bin index of every sample and the dither draw that was added to it.
    """
    Z = np.asarray(Z, dtype=float)
    if dither and bins.h > 0:
        if rng is None:
            raise InputException("Dithering needs a random generator.")
        d = rng.uniform(-bins.h / 2, bins.h / 2, size=Z.shape)
    else:
        d = np.zeros_like(Z)
    index = np.searchsorted(bins.edges, Z + d, side='right') - 1
    return np.clip(index, 0, bins.B - 1), d


def dithered_histogram(Z: np.ndarray, bins: BinSpec, rng: np.random.Generator = None,
                       dither: bool = True) -> np.ndarray:
    """
    Bin probabilities p_b = count_b / N of the dithered samples.
    """
    index, _ = assign_bins(Z, bins, rng, dither)
    return np.bincount(index, minlength=bins.B) / len(index)


def binned_ecf(p: np.ndarray, centers: np.ndarray, u):
    """
    Binned ECF sum_b p_b exp(i u c_b), for a scalar frequency or an array of them.
    """
    u = np.asarray(u, dtype=float)
    values = np.exp(1j * np.multiply.outer(u, centers)) @ np.asarray(p, dtype=float)
    return complex(values) if values.ndim == 0 else values


def subtractive_ecf(index: np.ndarray, d: np.ndarray, centers: np.ndarray, u):
    """
    ECF of the subtractively dithered reconstruction c_{b(n)} - d_n. Its expectation is phi(u) sinc(u h / 2) for
    equal-width bins.
    """
    u = np.asarray(u, dtype=float)
    reconstruction = centers[index] - d
    values = np.exp(1j * np.multiply.outer(u, reconstruction)).mean(axis=-1)
    return complex(values) if values.ndim == 0 else values


def sinc(x):
    """
    Unnormalised sinc, sin(x)/x with sinc(0) = 1.
    """
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def sinc_debias(phi_raw, u, h: float, c: float, delta: float):
    """
    Divide the binned ECF by max(sinc(u h / 2), delta). Frequencies outside the safe band |u| h <= c are refused.
    """
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) * h > c + BAND_TOLERANCE):
        raise FrequencyBandException(f"Frequency {np.max(np.abs(u)):.4g} lies outside the safe band c/h={c / h:.4g}.")
    values = np.asarray(phi_raw) / np.maximum(sinc(u * h / 2), delta)
    return complex(values) if values.ndim == 0 else values


def frequency_grid(h: float, c: float, L: int) -> np.ndarray:
    """
    L evenly spaced positive frequencies u_l = l c / (h L), the last one on the band edge c/h.
    """
    if L < 1 or not h > 0:
        raise InputException(f"Need L >= 1 and h > 0, got L={L}, h={h}.")
    return np.arange(1, L + 1) * (c / (h * L))


def taper_weights(freqs: np.ndarray) -> np.ndarray:
    """
    Gaussian taper exp(-(u/T)^2) with T the largest frequency.
    """
    freqs = np.asarray(freqs, dtype=float)
    return np.exp(-(freqs / freqs.max()) ** 2)


def probe_from_projection(Z: np.ndarray, direction: np.ndarray, standardization: Tuple[float, float],
                          params: EcfParams, rng: np.random.Generator) -> EcfProbe:
    """
    Bin an already standardised projection and evaluate its debiased ECF on the retained frequencies.
    """
    bins = build_bins(Z, params.B, params.mode)
    freqs = frequency_grid(bins.h, params.c, params.L)

    if params.dither is DitherMode.SUBTRACTIVE:
        index, d = assign_bins(Z, bins, rng, dither=True)
        phi_raw = subtractive_ecf(index, d, bins.centers, freqs)
    else:
        p = dithered_histogram(Z, bins, dither=False)
        phi_raw = binned_ecf(p, bins.centers, freqs)

    phi = sinc_debias(phi_raw, freqs, bins.h, params.c, params.delta)
    return EcfProbe(
        direction=np.asarray(direction, dtype=float),
        freqs=freqs,
        phi=phi,
        taper=taper_weights(freqs),
        h=bins.h,
        standardization=standardization
    )


def make_probe(X: ArrayLike, a: np.ndarray, params: EcfParams, rng: np.random.Generator) -> EcfProbe:
    """
    Project, standardise, bin with dither and debias: one P-bECF probe along direction ``a``.
    """
    Z, mean, std = project_standardize(X, a)
    return probe_from_projection(Z, a, (mean, std), params, rng)

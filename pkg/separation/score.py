"""
Score estimation from P-bECF probes and tabulation of the learned FastICA nonlinearity g = -psi.
"""
import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from custom_logging import logging_setup
from helpers import spawn_generators
from helpers.decorators import function_decorator, log_method_calls, log_time
from separation.ecf import BinMode, DitherMode, EcfParams, EcfProbe, sample_directions, project_standardize, \
    probe_from_projection
from separation.exceptions import InputException
from separation.preprocess import ArrayLike, as_array

log = logging_setup(__name__)


@dataclass(frozen=True)
class ScoreParams:
    R: int = 12
    B: int = 128
    mode: BinMode = BinMode.EQUAL_WIDTH
    c: float = 0.3
    delta: float = 1e-3
    L: int = 5
    J: int = 64
    q: float = 0.995
    eps: float = 1e-6
    dither: DitherMode = DitherMode.SUBTRACTIVE
    include_dc: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.R < 1:
            raise InputException(f"At least one projection is needed, got R={self.R}.")
        if self.J < 4:
            raise InputException(f"The score table needs J >= 4 knots, got J={self.J}.")
        if not 0 < self.q < 1:
            raise InputException(f"The grid quantile has to lie in (0, 1), got q={self.q}.")
        if self.eps <= 0:
            raise InputException(f"The denominator floor has to be positive, got eps={self.eps}.")
        if self.workers < 1:
            raise InputException(f"Need at least one worker, got workers={self.workers}.")
        # validates the binning fields and normalises the enums
        ecf = self.ecf
        object.__setattr__(self, 'mode', ecf.mode)
        object.__setattr__(self, 'dither', ecf.dither)

    @property
    def ecf(self) -> EcfParams:
        return EcfParams(B=self.B, mode=self.mode, c=self.c, delta=self.delta, L=self.L, dither=self.dither)

    def provenance(self, seed: int) -> dict:
        return {'R': self.R, 'B': self.B, 'mode': BinMode(self.mode).value, 'L': self.L, 'c': self.c,
                'delta': self.delta, 'seed': seed}


@dataclass(frozen=True)
class ScoreTable:
    """
    The learned nonlinearity g and its derivative tabulated on a uniform grid over [-z_max, z_max].

    Written to CSV as ``#``-prefixed ``key=value`` provenance lines followed by a ``z,g,gprime`` header and one row
    per knot.
    """
    grid: np.ndarray = field(repr=False)
    g_vals: np.ndarray = field(repr=False)
    gprime_vals: np.ndarray = field(repr=False)
    z_max: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        J = len(self.grid)
        if J < 4 or len(self.g_vals) != J or len(self.gprime_vals) != J:
            raise InputException(f"A score table needs J >= 4 matching knots, got {J}.")
        if not (np.all(np.isfinite(self.g_vals)) and np.all(np.isfinite(self.gprime_vals))):
            raise InputException("Score table values must be finite.")

    @property
    def J(self) -> int:
        return len(self.grid)

    @property
    def spacing(self) -> float:
        return 2 * self.z_max / (self.J - 1)

    def evaluate(self, y) -> Tuple[np.ndarray, np.ndarray]:
        return eval_g(self, y)

    def to_csv(self, path: Union[str, os.PathLike]) -> Path:
        path = Path(path)
        with open(path, 'w', newline='', encoding='utf-8') as file:
            for key, value in self.provenance.items():
                file.write(f"# {key}={value}\n")
            file.write(f"# z_max={self.z_max!r}\n")
            writer = csv.writer(file)
            writer.writerow(['z', 'g', 'gprime'])
            for row in zip(self.grid, self.g_vals, self.gprime_vals):
                writer.writerow([repr(float(value)) for value in row])
        log.info(f"Wrote score table with {self.J} knots to {path}")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, os.PathLike]) -> 'ScoreTable':
        provenance = {}
        rows = []
        with open(path, 'r', encoding='utf-8') as file:
            for line in file:
                if line.startswith('#'):
                    key, _, value = line[1:].strip().partition('=')
                    provenance[key] = value
                elif line.strip():
                    rows.append(line)
        reader = csv.DictReader(rows)
        data = np.array([[float(row['z']), float(row['g']), float(row['gprime'])] for row in reader])
        z_max = float(provenance.pop('z_max', data[-1, 0]))
        return cls(grid=data[:, 0], g_vals=data[:, 1], gprime_vals=data[:, 2], z_max=z_max, provenance=provenance)


def score_numden(z, probe: EcfProbe, include_dc: bool = True) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    The CF-ratio sums at z over the probe's symmetric spectrum -u_L..-u_1, u_1..u_L:

        D(z)  = [1] + sum_u w(u) Re[exp(-i u z) phi(u)]
        N(z)  = sum_u u w(u) Im[exp(-i u z) phi(u)]
        N'(z) = -sum_u u^2 w(u) Re[exp(-i u z) phi(u)]

    Conjugate pairs make every sum real. The bracketed 1 is the u = 0 term (phi(0) = w(0) = 1), added when
    ``include_dc`` is set. D' = N in both cases.
    """
    z = np.asarray(z, dtype=float)
    freqs, phi, taper = probe.symmetric_spectrum()
    terms = np.exp(-1j * np.multiply.outer(z, freqs)) * phi
    D = terms.real @ taper
    if include_dc:
        D = D + 1.0
    N = terms.imag @ (freqs * taper)
    Nprime = -(terms.real @ (freqs ** 2 * taper))
    return D, N, Nprime


def _floored(D: np.ndarray, eps: float) -> np.ndarray:
    return D + eps * np.where(D < 0, -1.0, 1.0)


def score_at(z, probe: EcfProbe, eps: float, include_dc: bool = True):
    """
    psi = N / (D + eps sign D) and psi' = (N' D - N^2) / (D + eps sign D)^2.

    :param eps: The absolute denominator floor.
    """
    D, N, Nprime = score_numden(z, probe, include_dc)
    denominator = _floored(D, eps)
    psi = N / denominator
    psi_prime = (Nprime * D - N ** 2) / denominator ** 2
    if psi.ndim == 0:
        return float(psi), float(psi_prime)
    return psi, psi_prime


def probe_floor(probe: EcfProbe, grid: np.ndarray, eps: float, include_dc: bool = True) -> float:
    """
    The absolute floor eps * max_j |D(z_j)| of one probe.
    """
    D, _, _ = score_numden(grid, probe, include_dc)
    return eps * float(np.max(np.abs(D)))


def average_scores(probes: List[EcfProbe], grid: np.ndarray, eps: float = 1e-6,
                   include_dc: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projection-averaged score and derivative on the grid. ``eps`` is relative to each probe's largest |D| on the grid.
    """
    if not probes:
        raise InputException("Cannot average the scores of an empty probe list.")
    grid = np.asarray(grid, dtype=float)
    psi_bar = np.zeros_like(grid)
    psi_bar_prime = np.zeros_like(grid)
    for probe in probes:
        psi, psi_prime = score_at(grid, probe, probe_floor(probe, grid, eps, include_dc), include_dc)
        psi_bar += psi
        psi_bar_prime += psi_prime
    return psi_bar / len(probes), psi_bar_prime / len(probes)


@function_decorator(log_method_calls, log_time)
def tabulate_score(X: ArrayLike, params: ScoreParams = ScoreParams(), seed: int = 0) -> ScoreTable:
    """
    Learn g = -psi_bar from whitened data and tabulate it with g' on J knots over [-z_max, z_max], where z_max is the
    q-quantile of |Z| pooled over all standardised projections.

    The seed is split into one stream for the directions and one dither stream per direction.
    """
    values = as_array(X)
    generators = spawn_generators(seed, params.R + 1)
    directions = sample_directions(values.shape[0], params.R, generators[0])

    projections = [project_standardize(values, a) for a in directions]

    def build(r: int) -> EcfProbe:
        Z, mean, std = projections[r]
        return probe_from_projection(Z, directions[r], (mean, std), params.ecf, generators[r + 1])

    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as executor:
            probes = list(executor.map(build, range(params.R)))
    else:
        probes = [build(r) for r in range(params.R)]

    z_max = float(np.quantile(np.abs(np.concatenate([Z for Z, _, _ in projections])), params.q))
    grid = np.linspace(-z_max, z_max, params.J)
    psi_bar, psi_bar_prime = average_scores(probes, grid, params.eps, params.include_dc)
    log.debug(f"Tabulated score from {params.R} probes, z_max={z_max:.4f}, "
              f"band edges {min(p.freqs[-1] for p in probes):.3f}..{max(p.freqs[-1] for p in probes):.3f}")

    return ScoreTable(
        grid=grid,
        g_vals=-psi_bar,
        gprime_vals=-psi_bar_prime,
        z_max=z_max,
        provenance=params.provenance(seed)
    )


def eval_g(table: ScoreTable, y):
    """
    Linear interpolation of g and g' between knots, constant beyond +-z_max.
    """
    g = np.interp(y, table.grid, table.g_vals)
    gprime = np.interp(y, table.grid, table.gprime_vals)
    if np.ndim(g) == 0:
        return float(g), float(gprime)
    return g, gprime


@function_decorator(log_method_calls, log_time)
def stability_check(X: ArrayLike, params: ScoreParams = ScoreParams(), seed: int = 0) -> dict:
    """
    Rebuild the table with each of R, B, L and J doubled in turn and report the largest change of g on the part of
    the baseline grid both tables cover. A parameter whose doubled value is invalid for the data maps to None.
    """
    baseline = tabulate_score(X, params, seed)
    changes = {}
    for name in ('R', 'B', 'L', 'J'):
        settings = asdict(params)
        settings[name] *= 2
        try:
            doubled = tabulate_score(X, ScoreParams(**settings), seed)
        except InputException as e:
            log.warning(f"Cannot double {name}: {e}")
            changes[name] = None
            continue
        reach = min(baseline.z_max, doubled.z_max)
        knots = baseline.grid[np.abs(baseline.grid) <= reach]
        g_base, _ = eval_g(baseline, knots)
        g_doubled, _ = eval_g(doubled, knots)
        changes[name] = float(np.max(np.abs(g_doubled - g_base)))
        log.info(f"Doubling {name} changes g by at most {changes[name]:.4f}")
    return changes

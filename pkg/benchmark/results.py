"""
Trial records and their CSV persistence.

trials.csv has one row per trial and nonlinearity with the columns of TRIAL_COLUMNS; the last three are wall-clock
timings and are the only columns allowed to differ between reruns with the same master seed. summary.csv has one row
per (scenario, nonlinearity) with the columns of SUMMARY_COLUMNS; error statistics are over successful trials only.
"""
import csv
import math
import os
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np

from custom_logging import logging_setup

log = logging_setup(__name__)

TIMING_COLUMNS = ['tabulation_seconds', 'iteration_seconds', 'total_seconds']
TRIAL_COLUMNS = ['scenario', 'nonlinearity', 'trial', 'status', 'reason', 'amari_error', 'iterations', 'converged',
                 'orthogonality_error', 'dataset_digest'] + TIMING_COLUMNS
SUMMARY_COLUMNS = ['scenario', 'nonlinearity', 'trials', 'failures', 'median', 'q1', 'q3', 'mean',
                   'median_iterations', 'median_total_seconds', 'median_tabulation_seconds',
                   'median_iteration_seconds']

OK = 'ok'
FAILED = 'failed'


@dataclass(frozen=True)
class TrialRecord:
    scenario: str
    nonlinearity: str
    trial: int
    status: str = OK
    reason: str = ''
    amari_error: float = math.nan
    iterations: int = 0
    converged: bool = False
    orthogonality_error: float = math.nan
    dataset_digest: str = ''
    tabulation_seconds: float = 0.0
    iteration_seconds: float = 0.0
    total_seconds: float = 0.0

    @property
    def failed(self) -> bool:
        return self.status != OK

    @property
    def sort_key(self):
        return self.scenario, self.trial, self.nonlinearity

    def as_row(self) -> dict:
        row = asdict(self)
        for key, value in row.items():
            if isinstance(value, float):
                row[key] = repr(float(value))
        return row


def _median(values: List[float]) -> float:
    return float(np.median(values)) if len(values) else math.nan


def summarize(records: Iterable[TrialRecord], scenarios: List[str] = None, nonlinearities: List[str] = None) -> List[dict]:
    """
    Order statistics of the Amari error, iteration count and timings per (scenario, nonlinearity).
    """
    records = list(records)
    scenarios = scenarios or sorted({r.scenario for r in records})
    nonlinearities = nonlinearities or sorted({r.nonlinearity for r in records})
    rows = []
    for scenario in scenarios:
        for nonlinearity in nonlinearities:
            group = [r for r in records if r.scenario == scenario and r.nonlinearity == nonlinearity]
            ok = [r for r in group if not r.failed]
            errors = np.array([r.amari_error for r in ok])
            rows.append({
                'scenario': scenario,
                'nonlinearity': nonlinearity,
                'trials': len(group),
                'failures': len(group) - len(ok),
                'median': _median(errors),
                'q1': float(np.percentile(errors, 25)) if ok else math.nan,
                'q3': float(np.percentile(errors, 75)) if ok else math.nan,
                'mean': float(errors.mean()) if ok else math.nan,
                'median_iterations': _median([r.iterations for r in ok]),
                'median_total_seconds': _median([r.total_seconds for r in ok]),
                'median_tabulation_seconds': _median([r.tabulation_seconds for r in ok]),
                'median_iteration_seconds': _median([r.iteration_seconds for r in ok]),
            })
    return rows


def write_trials(records: Iterable[TrialRecord], path: Union[str, os.PathLike]) -> Path:
    path = Path(path)
    records = sorted(records, key=lambda r: r.sort_key)
    with open(path, 'w', newline='', encoding='utf-8') as file:
        writer = csv.DictWriter(file, fieldnames=TRIAL_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for record in records:
            writer.writerow(record.as_row())
    log.info(f"Wrote {len(records)} trial records to {path}")
    return path


def write_summary(rows: List[dict], path: Union[str, os.PathLike]) -> Path:
    path = Path(path)
    with open(path, 'w', newline='', encoding='utf-8') as file:
        writer = csv.DictWriter(file, fieldnames=SUMMARY_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: repr(float(value)) if isinstance(value, float) else value for key, value in row.items()})
    log.info(f"Wrote summary of {len(rows)} groups to {path}")
    return path


def read_trials(path: Union[str, os.PathLike], drop_timing: bool = False) -> List[dict]:
    """
    Rows of a trials.csv as dictionaries of strings, optionally without the timing columns.
    """
    with open(path, 'r', newline='', encoding='utf-8') as file:
        rows = list(csv.DictReader(file))
    if drop_timing:
        for row in rows:
            for column in TIMING_COLUMNS:
                row.pop(column, None)
    return rows

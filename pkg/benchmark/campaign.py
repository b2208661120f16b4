import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from time import perf_counter
from typing import List, Tuple, Union

import numpy as np

from benchmark.config import ExperimentConfig, ScenarioTemplate
from benchmark.exceptions import OutputDirectoryException
from benchmark.results import TrialRecord, FAILED, summarize, write_trials, write_summary
from custom_logging import logging_setup
from helpers import derive_seed
from helpers.decorators import class_decorator, function_decorator, log_method_calls, log_time, error_handler
from separation.fastica import FasticaConfig, init_w, run_fastica
from separation.metrics import gain_matrix, amari_error
from separation.nonlinearity import Nonlinearity, NonlinearityKind
from separation.preprocess import center_and_whiten
from separation.score import ScoreParams, tabulate_score
from separation.synth import make_dataset

log = logging_setup(__name__)


def trial_seed(master_seed: int, scenario_id: str, trial: int) -> int:
    """
    Seed of one trial. Independent of the nonlinearities, so adding one never changes the datasets.
    """
    return derive_seed(master_seed, scenario_id, trial)


@function_decorator(log_method_calls)
def run_trial(scenario: ScenarioTemplate, kind: Union[NonlinearityKind, str], params: ScoreParams, seed: int,
              fastica: FasticaConfig = FasticaConfig(), trial: int = 0) -> TrialRecord:
    """
    One end-to-end separation: synthesise, center and whiten, learn the score when the kind asks for it, run FastICA
    and score the gain matrix. The dataset, W0 and score streams derive from ``seed`` alone, so every nonlinearity of
    a trial sees the same data and starting point.

    Errors do not propagate; they come back as a failed record carrying the reason.
    """
    kind = NonlinearityKind(kind)
    record = dict(scenario=scenario.id, nonlinearity=kind.value, trial=trial)
    try:
        dataset = make_dataset(scenario.instantiate(derive_seed(seed, 'dataset')))
        record['dataset_digest'] = dataset.checksum()
        w_init = init_w(scenario.m, np.random.default_rng(derive_seed(seed, 'w0')))

        start = perf_counter()
        Xw, whitening = center_and_whiten(dataset.X)
        tabulation_seconds = 0.0
        if kind.is_learned:
            tabulation_start = perf_counter()
            nl = Nonlinearity.learned(tabulate_score(Xw, params, derive_seed(seed, 'score')))
            tabulation_seconds = perf_counter() - tabulation_start
        else:
            nl = Nonlinearity(kind)
        result = run_fastica(Xw, nl, fastica, w_init=w_init)
        total_seconds = perf_counter() - start

        error = amari_error(gain_matrix(result.W, whitening.V, dataset.A))
    except Exception as e:
        log.warning(f"Trial {trial} of {scenario.id} with {kind.value} failed: {e.__class__.__name__}: {e}")
        return TrialRecord(status=FAILED, reason=f"{e.__class__.__name__}: {e}", **record)

    return TrialRecord(
        amari_error=float(error),
        iterations=result.iterations,
        converged=result.converged,
        orthogonality_error=result.max_orthogonality_error,
        tabulation_seconds=tabulation_seconds,
        iteration_seconds=result.elapsed,
        total_seconds=total_seconds,
        **record
    )


@dataclass(frozen=True)
class CampaignResult:
    records: List[TrialRecord]
    summary: List[dict]
    trials_path: Path
    summary_path: Path


@class_decorator(log_method_calls, log_time, error_handler)
class Campaign:
    """
    A Monte-Carlo campaign over scenarios x trials x nonlinearities. Trials may run on several worker threads; the
    records are sorted before writing so the output does not depend on scheduling.
    """
    log = logging_setup(__name__)
    TRIALS_FILE = 'trials.csv'
    SUMMARY_FILE = 'summary.csv'

    def __init__(self, config: ExperimentConfig):
        self.config = config

    @property
    def output_dir(self) -> Path:
        return self.config.output_dir

    def jobs(self) -> List[Tuple[ScenarioTemplate, int, NonlinearityKind]]:
        return [(scenario, trial, kind)
                for scenario in self.config.scenarios
                for trial in range(self.config.n_trials)
                for kind in self.config.nonlinearities]

    def prepare_output(self) -> Path:
        """
        Create the output directory and prove it is writable before any computation starts.
        """
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            with tempfile.NamedTemporaryFile(dir=self.output_dir):
                pass
        except OSError as e:
            raise OutputDirectoryException(f"Output directory {self.output_dir} is not writable: {e}") from e
        return self.output_dir

    def run_job(self, job: Tuple[ScenarioTemplate, int, NonlinearityKind]) -> TrialRecord:
        scenario, trial, kind = job
        seed = trial_seed(self.config.master_seed, scenario.id, trial)
        return run_trial(scenario, kind, self.config.pbecf, seed, self.config.fastica, trial)

    def run(self) -> CampaignResult:
        self.prepare_output()
        jobs = self.jobs()
        self.log.info(f"Running {len(jobs)} separations: {len(self.config.scenarios)} scenarios x "
                      f"{self.config.n_trials} trials x {len(self.config.nonlinearities)} nonlinearities")

        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                records = list(executor.map(self.run_job, jobs))
        else:
            records = [self.run_job(job) for job in jobs]

        records = sorted(records, key=lambda r: r.sort_key)
        summary = summarize(records, self.config.scenario_ids, [k.value for k in self.config.nonlinearities])
        for row in summary:
            self.log.info(f"{row['scenario']:>10} {row['nonlinearity']:>6}: median Amari error {row['median']:.4f}, "
                          f"{row['failures']} failures, median {row['median_total_seconds'] * 1e3:.2f} ms")

        return CampaignResult(
            records=records,
            summary=summary,
            trials_path=write_trials(records, self.output_dir / self.TRIALS_FILE),
            summary_path=write_summary(summary, self.output_dir / self.SUMMARY_FILE)
        )


def run_campaign(config: ExperimentConfig) -> CampaignResult:
    return Campaign(config).run()

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import List, Tuple, Union

import yaml

from benchmark.exceptions import ConfigException
from custom_logging import logging_setup
from separation.exceptions import InputException
from separation.fastica import FasticaConfig
from separation.nonlinearity import NonlinearityKind
from separation.score import ScoreParams
from separation.synth import SourceFamily, FamilyKind, Scenario

log = logging_setup(__name__)

FAMILY_PARAMETER = {FamilyKind.GGD: 'beta', FamilyKind.POISSON: 'lambda'}


@dataclass(frozen=True)
class ScenarioTemplate:
    """
    A scenario without its seed; every trial instantiates it with a derived seed.
    """
    id: str
    family: SourceFamily
    m: int = 8
    N: int = 1000

    def instantiate(self, seed: int) -> Scenario:
        return Scenario(family=self.family, m=self.m, N=self.N, seed=seed)

    @classmethod
    def from_dict(cls, data: dict) -> 'ScenarioTemplate':
        data = dict(data)
        try:
            kind = FamilyKind(data.pop('family'))
            parameter = data.pop(FAMILY_PARAMETER[kind])
            template = cls(id=str(data.pop('id')), family=SourceFamily(kind, float(parameter)),
                           m=int(data.pop('m', 8)), N=int(data.pop('N', 1000)))
            template.instantiate(0)
        except KeyError as e:
            raise ConfigException(f"Scenario is missing the key {e}.") from e
        except (ValueError, InputException) as e:
            raise ConfigException(f"Invalid scenario {data}: {e}") from e
        if data:
            raise ConfigException(f"Unknown scenario keys: {sorted(data)}.")
        return template


def default_scenarios() -> Tuple[ScenarioTemplate, ...]:
    return (
        ScenarioTemplate('ggd', SourceFamily.ggd(1.6)),
        ScenarioTemplate('poisson', SourceFamily.poisson(0.5)),
    )


def _section(cls, data: dict, name: str, **extra):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigException(f"Unknown keys in '{name}': {sorted(unknown)}.")
    try:
        return cls(**{**data, **extra})
    except (TypeError, ValueError, InputException) as e:
        raise ConfigException(f"Invalid '{name}' section: {e}") from e


@dataclass(frozen=True)
class ExperimentConfig:
    scenarios: Tuple[ScenarioTemplate, ...] = field(default_factory=default_scenarios)
    nonlinearities: Tuple[NonlinearityKind, ...] = tuple(NonlinearityKind)
    n_trials: int = 100
    master_seed: int = 0
    pbecf: ScoreParams = ScoreParams()
    fastica: FasticaConfig = FasticaConfig()
    output_dir: Path = Path('results')
    workers: int = 1

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigException(f"n_trials has to be at least 1, got {self.n_trials}.")
        if self.workers < 1:
            raise ConfigException(f"workers has to be at least 1, got {self.workers}.")
        if not self.scenarios or not self.nonlinearities:
            raise ConfigException("A campaign needs at least one scenario and one nonlinearity.")
        ids = [scenario.id for scenario in self.scenarios]
        if len(set(ids)) != len(ids):
            raise ConfigException(f"Scenario ids must be unique, got {ids}.")
        object.__setattr__(self, 'output_dir', Path(self.output_dir))

    @classmethod
    def from_dict(cls, data: dict) -> 'ExperimentConfig':
        data = dict(data or {})
        options = {}
        if 'scenarios' in data:
            options['scenarios'] = tuple(ScenarioTemplate.from_dict(s) for s in data.pop('scenarios'))
        if 'nonlinearities' in data:
            try:
                options['nonlinearities'] = tuple(NonlinearityKind(k) for k in data.pop('nonlinearities'))
            except ValueError as e:
                raise ConfigException(f"Invalid nonlinearity: {e}") from e
        if 'pbecf' in data:
            options['pbecf'] = _section(ScoreParams, data.pop('pbecf') or {}, 'pbecf')
        if 'fastica' in data:
            options['fastica'] = _section(FasticaConfig, data.pop('fastica') or {}, 'fastica')
        for key, cast in (('n_trials', int), ('master_seed', int), ('workers', int), ('output_dir', Path)):
            if key in data:
                options[key] = cast(data.pop(key))
        if data:
            raise ConfigException(f"Unknown configuration keys: {sorted(data)}.")
        return cls(**options)

    @classmethod
    def from_yaml(cls, path: Union[str, os.PathLike]) -> 'ExperimentConfig':
        try:
            with open(path, 'r', encoding='utf-8') as file:
                data = yaml.safe_load(file)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigException(f"Cannot read configuration {path}: {e}") from e
        if data is not None and not isinstance(data, dict):
            raise ConfigException(f"Configuration {path} must be a mapping.")
        log.info(f"Loaded experiment configuration from {path}")
        return cls.from_dict(data)

    def override(self, **options) -> 'ExperimentConfig':
        """
        A copy with the given non-None options replaced, for command-line overrides.
        """
        return replace(self, **{key: value for key, value in options.items() if value is not None})

    @property
    def scenario_ids(self) -> List[str]:
        return [scenario.id for scenario in self.scenarios]

import numpy as np
import pytest
import yaml

import main
from benchmark.results import read_trials
from separation.score import ScoreTable


def test_separate_synthetic(capsys):
    assert main.main(['separate', '--m', '2', '--n', '600', '--beta', '4', '--nonlinearity', 'tanh']) == 0

    output = capsys.readouterr().out
    assert 'nonlinearity: tanh' in output
    assert 'Amari error' in output


def test_separate_learned(capsys):
    assert main.main(['separate', '--m', '3', '--n', '500', '--nonlinearity', 'pbecf']) == 0
    assert 'nonlinearity: pbecf' in capsys.readouterr().out


def test_separate_file(tmp_path, capsys):
    rng = np.random.default_rng(0)
    path = tmp_path / 'mixtures.csv'
    np.savetxt(path, rng.standard_normal((2, 2)) @ rng.laplace(size=(2, 500)), delimiter=',')

    assert main.main(['separate', '--input', str(path), '--nonlinearity', 'pow3']) == 0

    output = capsys.readouterr().out
    assert 'W V (on centered data)' in output
    assert 'Amari error' not in output


def test_separate_degenerate_file(tmp_path):
    path = tmp_path / 'duplicate.csv'
    row = np.random.default_rng(1).standard_normal(100)
    np.savetxt(path, np.vstack([row, row]), delimiter=',')

    assert main.main(['separate', '--input', str(path), '--nonlinearity', 'tanh']) == 1


def test_bench(tmp_path, capsys):
    config = tmp_path / 'bench.yaml'
    config.write_text(yaml.safe_dump({
        'scenarios': [{'id': 'tiny', 'family': 'poisson', 'lambda': 0.5, 'm': 2, 'N': 300}],
        'nonlinearities': ['skew', 'pbecf'],
        'pbecf': {'R': 3},
        'n_trials': 5,
    }))
    output = tmp_path / 'results'

    assert main.main(['bench', '--config', str(config), '--trials', '2', '--seed', '3', '--output', str(output)]) == 0

    rows = read_trials(output / 'trials.csv')
    assert len(rows) == 4
    assert {row['nonlinearity'] for row in rows} == {'skew', 'pbecf'}
    assert (output / 'summary.csv').exists()
    assert 'tiny' in capsys.readouterr().out


def test_bench_bad_config(tmp_path):
    config = tmp_path / 'bad.yaml'
    config.write_text('n_trials: 0\n')
    assert main.main(['bench', '--config', str(config)]) == 1


def test_score_dump(tmp_path):
    path = tmp_path / 'score.csv'

    assert main.main(['score-dump', '--m', '3', '--n', '800', '--output', str(path), '--score-seed', '4']) == 0

    table = ScoreTable.from_csv(path)
    assert table.J == 64
    assert table.provenance['seed'] == '4'


def test_stability(capsys):
    assert main.main(['stability', '--m', '2', '--n', '1000']) == 0
    output = capsys.readouterr().out
    for name in ('R', 'B', 'L', 'J'):
        assert f"doubling {name}" in output


def test_unknown_command():
    with pytest.raises(SystemExit):
        main.main(['unmix'])

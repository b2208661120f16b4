"""Tests for the CF-ratio score estimate and the tabulated nonlinearity."""
import numpy as np
import pytest

from separation.ecf import EcfParams, EcfProbe, DitherMode, make_probe, frequency_grid, taper_weights
from separation.exceptions import InputException
from separation.score import (ScoreParams, ScoreTable, score_numden, score_at, probe_floor, average_scores,
                              tabulate_score, eval_g, stability_check)


def single_frequency_probe(u: float) -> EcfProbe:
    return EcfProbe(direction=np.array([1.0, 0.0]), freqs=np.array([u]), phi=np.array([1.0 + 0j]),
                    taper=np.array([1.0]), h=0.1, standardization=(0.0, 1.0))


def gaussian_data(m=8, N=5000, seed=0):
    return np.random.default_rng(seed).standard_normal((m, N))


def exact_gaussian_probe(h=0.06) -> EcfProbe:
    """A noise-free probe carrying the standard normal CF on the default grid, u_l = 1..5 for h = 0.06."""
    freqs = frequency_grid(h, 0.3, 5)
    return EcfProbe(direction=np.array([1.0]), freqs=freqs, phi=np.exp(-freqs ** 2 / 2).astype(complex),
                    taper=taper_weights(freqs), h=h, standardization=(0.0, 1.0))


@pytest.fixture(scope='module')
def gaussian_table():
    return tabulate_score(gaussian_data(), ScoreParams(), seed=0)


class TestFoldedSums:

    def test_single_frequency(self):
        u = 1.3
        z = np.linspace(-2, 2, 9)

        D, N, Nprime = score_numden(z, single_frequency_probe(u), include_dc=False)

        np.testing.assert_allclose(D, 2 * np.cos(u * z), atol=1e-14)
        np.testing.assert_allclose(N, -2 * u * np.sin(u * z), atol=1e-14)
        np.testing.assert_allclose(Nprime, -2 * u ** 2 * np.cos(u * z), atol=1e-14)

    def test_dc_term(self):
        without, _, _ = score_numden(0.4, single_frequency_probe(1.3), include_dc=False)
        with_dc, _, _ = score_numden(0.4, single_frequency_probe(1.3))
        assert with_dc == pytest.approx(without + 1.0)

    def test_denominator_derivative_is_numerator(self):
        rng = np.random.default_rng(1)
        probe = make_probe(rng.standard_normal((2, 3000)), np.array([0.6, 0.8]), EcfParams(), rng)
        z = np.linspace(-1.5, 1.5, 31)
        step = 1e-5

        D_plus, _, _ = score_numden(z + step, probe)
        D_minus, _, _ = score_numden(z - step, probe)
        _, N, _ = score_numden(z, probe)

        np.testing.assert_allclose((D_plus - D_minus) / (2 * step), N, atol=1e-6)

    def test_matches_positive_frequency_fold(self):
        rng = np.random.default_rng(12)
        probe = make_probe(rng.standard_normal((2, 2000)), np.array([0.8, -0.6]), EcfParams(), rng)
        z = np.linspace(-2, 2, 17)
        terms = np.exp(-1j * np.multiply.outer(z, probe.freqs)) * probe.phi

        D, N, Nprime = score_numden(z, probe)

        np.testing.assert_allclose(D, 1 + terms.real @ (2 * probe.taper), atol=1e-12)
        np.testing.assert_allclose(N, terms.imag @ (2 * probe.freqs * probe.taper), atol=1e-12)
        np.testing.assert_allclose(Nprime, -(terms.real @ (2 * probe.freqs ** 2 * probe.taper)), atol=1e-12)


class TestScoreAt:

    def test_symmetric_data_has_zero_score_at_origin(self):
        rng = np.random.default_rng(2)
        half = rng.standard_normal((2, 1500))
        X = np.hstack([half, -half])

        probe = make_probe(X, np.array([1.0, 0.0]), EcfParams(dither=DitherMode.NONE), rng)
        psi, _ = score_at(0.0, probe, 1e-9)

        assert abs(psi) < 1e-8

    def test_gaussian_score(self):
        """Inside |z| <= 1 the band-limit bias stays below 0.08, see test_band_limited_bias."""
        rng = np.random.default_rng(3)
        probe = make_probe(rng.standard_normal((2, 50000)), np.array([1.0, 0.0]), EcfParams(), rng)
        z = np.linspace(-1, 1, 21)

        psi, _ = score_at(z, probe, probe_floor(probe, z, 1e-6))

        np.testing.assert_allclose(psi, -z, atol=0.15)

    def test_laplace_score(self):
        rng = np.random.default_rng(4)
        X = np.vstack([rng.laplace(0, 1 / np.sqrt(2), 5000), rng.standard_normal(5000)])
        probe = make_probe(X, np.array([1.0, 0.0]), EcfParams(), rng)
        z = np.array([-1.4, -1.2, -1.0, 1.0, 1.2, 1.4])

        psi, _ = score_at(z, probe, probe_floor(probe, z, 1e-6))

        np.testing.assert_allclose(psi, -np.sqrt(2) * np.sign(z), atol=0.3)

    def test_band_limited_bias(self):
        """Five tapered frequencies cannot reproduce psi = -z exactly; the gap grows with |z| and is odd."""
        z = np.array([0.5, 1.0, 1.5, 2.0])

        psi, _ = score_at(z, exact_gaussian_probe(), 1e-12)
        mirrored, _ = score_at(-z, exact_gaussian_probe(), 1e-12)

        np.testing.assert_allclose(psi + z, [0.037, 0.074, 0.112, 0.156], atol=0.005)
        np.testing.assert_allclose(mirrored, -psi, atol=1e-12)

    def test_dc_term_is_needed(self):
        z = np.linspace(-2, 2, 17)
        psi, _ = score_at(z, exact_gaussian_probe(), 1e-12, include_dc=False)
        assert np.max(np.abs(psi + z)) > 1

    def test_scalar_input(self):
        psi, psi_prime = score_at(0.2, single_frequency_probe(1.0), 1e-9)
        assert isinstance(psi, float) and isinstance(psi_prime, float)


class TestAverage:

    def test_single_probe(self):
        rng = np.random.default_rng(5)
        probe = make_probe(rng.standard_normal((2, 2000)), np.array([1.0, 0.0]), EcfParams(), rng)
        grid = np.linspace(-2, 2, 16)

        psi_bar, psi_bar_prime = average_scores([probe], grid, 1e-6)
        psi, psi_prime = score_at(grid, probe, probe_floor(probe, grid, 1e-6))

        np.testing.assert_array_equal(psi_bar, psi)
        np.testing.assert_array_equal(psi_bar_prime, psi_prime)

    def test_identical_probes(self):
        X = gaussian_data(2, 2000, seed=6)
        probes = [make_probe(X, np.array([1.0, 0.0]), EcfParams(), np.random.default_rng(7)) for _ in range(4)]
        grid = np.linspace(-2, 2, 16)

        psi_bar, _ = average_scores(probes, grid)
        psi, _ = average_scores(probes[:1], grid)

        np.testing.assert_allclose(psi_bar, psi, rtol=1e-12, atol=1e-12)

    def test_spread_shrinks_with_projections(self):
        """Four times as many projections roughly halve the spread of g across replications."""
        z = np.linspace(-2, 2, 9)
        spread = {}
        for R in (3, 12):
            values = [eval_g(tabulate_score(gaussian_data(8, 1000, seed=100 + r), ScoreParams(R=R), seed=r), z)[0]
                      for r in range(200)]
            spread[R] = np.std(values, axis=0)

        ratio = spread[12] / spread[3]

        assert 0.4 <= np.median(ratio) <= 0.6
        assert np.all((ratio > 0.3) & (ratio < 0.7))

    def test_empty(self):
        with pytest.raises(InputException):
            average_scores([], np.linspace(-1, 1, 8))


class TestTabulate:

    def test_gaussian_score_is_identity(self, gaussian_table):
        inside = np.abs(gaussian_table.grid) <= 1.5
        np.testing.assert_allclose(gaussian_table.g_vals[inside], gaussian_table.grid[inside], atol=0.2)

    def test_odd_and_increasing(self, gaussian_table):
        g = gaussian_table.g_vals
        inside = np.abs(gaussian_table.grid) <= 1.5

        assert np.all(np.abs(g + g[::-1])[inside] < 0.1)
        assert np.all(np.diff(g[inside]) > 0)

    def test_grid(self, gaussian_table):
        assert gaussian_table.J == 64
        assert 2.5 < gaussian_table.z_max < 3.1
        np.testing.assert_allclose(gaussian_table.grid, -gaussian_table.grid[::-1], atol=1e-14)
        assert gaussian_table.spacing == pytest.approx(np.diff(gaussian_table.grid)[0])

    def test_derivative_consistency(self, gaussian_table):
        """Analytic g' agrees with central differences of g at interior knots."""
        grid, g, gprime = gaussian_table.grid, gaussian_table.g_vals, gaussian_table.gprime_vals
        difference = (g[2:] - g[:-2]) / (grid[2:] - grid[:-2])
        interior = np.abs(grid[1:-1]) <= 2

        np.testing.assert_allclose(difference[interior], gprime[1:-1][interior], rtol=0.1,
                                   atol=0.1 * np.max(np.abs(gprime[1:-1][interior])))

    def test_provenance(self, gaussian_table):
        assert gaussian_table.provenance == {'R': 12, 'B': 128, 'mode': 'equal_width', 'L': 5, 'c': 0.3,
                                             'delta': 1e-3, 'seed': 0}

    def test_reproducible_across_workers(self):
        X = gaussian_data(4, 1000, seed=8)
        serial = tabulate_score(X, ScoreParams(), seed=3)
        threaded = tabulate_score(X, ScoreParams(workers=4), seed=3)

        np.testing.assert_array_equal(serial.g_vals, threaded.g_vals)
        np.testing.assert_array_equal(serial.gprime_vals, threaded.gprime_vals)

    def test_seed_changes_table(self):
        X = gaussian_data(4, 1000, seed=8)
        assert not np.array_equal(tabulate_score(X, seed=1).g_vals, tabulate_score(X, seed=2).g_vals)

    def test_equal_occupancy(self):
        table = tabulate_score(gaussian_data(4, 2000, seed=9), ScoreParams(mode='equal_occupancy'), seed=0)
        assert np.all(np.isfinite(table.g_vals))
        assert table.provenance['mode'] == 'equal_occupancy'


@pytest.mark.parametrize('options', [dict(R=0), dict(J=3), dict(q=1.0), dict(eps=0.0), dict(workers=0),
                                     dict(mode='bogus'), dict(B=1)])
def test_invalid_params(options):
    with pytest.raises(InputException):
        ScoreParams(**options)


class TestEvalG:

    @pytest.fixture
    def table(self):
        grid = np.linspace(-2, 2, 5)
        return ScoreTable(grid=grid, g_vals=grid ** 3, gprime_vals=3 * grid ** 2, z_max=2.0)

    def test_knots(self, table):
        assert eval_g(table, 1.0) == (1.0, 3.0)

    def test_midpoint(self, table):
        g, gprime = eval_g(table, 1.5)
        assert g == pytest.approx((1.0 + 8.0) / 2)
        assert gprime == pytest.approx((3.0 + 12.0) / 2)

    def test_clamped(self, table):
        assert eval_g(table, 20.0) == (8.0, 12.0)
        assert eval_g(table, -20.0) == (-8.0, 12.0)

    def test_array(self, table):
        g, gprime = table.evaluate(np.array([[0.0, 1.0], [2.0, 3.0]]))
        np.testing.assert_array_equal(g, [[0.0, 1.0], [8.0, 8.0]])
        assert gprime.shape == (2, 2)

    def test_too_few_knots(self):
        with pytest.raises(InputException):
            ScoreTable(grid=np.zeros(3), g_vals=np.zeros(3), gprime_vals=np.zeros(3), z_max=1.0)

    def test_non_finite(self):
        values = np.array([0.0, np.nan, 0.0, 0.0])
        with pytest.raises(InputException):
            ScoreTable(grid=np.linspace(-1, 1, 4), g_vals=values, gprime_vals=np.zeros(4), z_max=1.0)


def test_csv_round_trip(tmp_path, gaussian_table):
    path = gaussian_table.to_csv(tmp_path / 'score.csv')

    loaded = ScoreTable.from_csv(path)

    np.testing.assert_array_equal(loaded.grid, gaussian_table.grid)
    np.testing.assert_array_equal(loaded.g_vals, gaussian_table.g_vals)
    np.testing.assert_array_equal(loaded.gprime_vals, gaussian_table.gprime_vals)
    assert loaded.z_max == gaussian_table.z_max
    assert loaded.provenance['seed'] == '0'
    assert path.read_text().splitlines()[8] == 'z,g,gprime'


class TestStability:

    def test_reports_every_parameter(self):
        changes = stability_check(gaussian_data(4, 2000, seed=10), ScoreParams(), seed=0)
        assert set(changes) == {'R', 'B', 'L', 'J'}
        assert all(change is not None and np.isfinite(change) and change >= 0 for change in changes.values())

    def test_invalid_doubling(self):
        changes = stability_check(gaussian_data(2, 200, seed=11), ScoreParams(), seed=0)
        assert changes['B'] is None
        assert changes['R'] is not None

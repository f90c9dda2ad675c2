import math
import os

import pandas as pd
import pytest

import simulation
from Framework.JobSpec import CSV_COLUMNS, OPTIMIZE_COLUMNS, ResultRow, emit_csv, parse_grid, parse_job
from Framework.Exceptions import ConfigError, NumericalError, UsageError
from Framework.Simulator import Model
from Framework.StatusServer import Scheme


def read(path):
    return pd.read_csv(path, keep_default_na=False, na_values=[''])


class TestGrid:
    @pytest.mark.parametrize('token,expected', [
        ('0.5', (0.5,)),
        ('0.1,0.5,1', (0.1, 0.5, 1.0)),
        ('0:1:5', (0.0, 0.25, 0.5, 0.75, 1.0)),
        ('log:0.01:1:3', (0.01, 0.1, 1.0)),
        ('2:2:1', (2.0,)),
    ])
    def test_forms(self, token, expected):
        assert parse_grid(token) == pytest.approx(expected)

    @pytest.mark.parametrize('token', ['', 'a', '0:1', '0:1:0', 'log:0:1:3', '1:2:x', 'nan', '0:inf:3'])
    def test_malformed(self, token):
        with pytest.raises(Exception) as info:
            parse_grid(token)
        assert 'value' in str(info.value) or 'grid' in str(info.value)


class TestParseJob:
    def test_defaults(self):
        spec = parse_job(['analytic', '--dist', 'exp:mu=1', '--lambda', '1'])
        assert spec.scheme is Scheme.MG11
        assert spec.lambdas == (1.0,) and spec.eps_i == (0.0,) and spec.eps_b == (0.0,)
        assert spec.packets is None
        assert spec.model is Model.ORIGINAL
        assert spec.out == os.path.join('results', 'analytic.csv')

    def test_simulate_gets_default_packets(self):
        spec = parse_job(['simulate', '--dist', 'exp:mu=1', '--lambda', '1', '--model', 'equivalent'])
        assert spec.packets == 10 ** 6
        assert spec.model is Model.EQUIVALENT

    def test_grid_order(self):
        spec = parse_job(['sweep', '--scheme', 'mg12star', '--dist', 'exp:mu=1', '--lambda', '0.5,1',
                          '--eps-i', '0:1:2', '--eps-b', '0,2'])
        assert spec.grid()[:3] == [(0.5, 0.0, 0.0), (0.5, 0.0, 2.0), (0.5, 1.0, 0.0)]
        assert len(spec.grid()) == 8

    @pytest.mark.parametrize('argv,token', [
        (['analytic', '--dist', 'exp:mu=1', '--lambda', '1', '--eps-b', '1'], '--eps-b'),
        (['analytic', '--dist', 'weird', '--lambda', '1'], 'weird'),
        (['analytic', '--dist', 'exp:mu=1', '--lambda', '0'], '--lambda'),
        (['analytic', '--dist', 'exp:mu=1', '--lambda', '1', '--eps-i', '-1'], '--eps-i'),
        (['analytic', '--dist', 'exp:mu=1', '--lambda', '1', '--seed', '-3'], '-3'),
        (['sweep', '--dist', 'exp:mu=1', '--lambda', '1', '--dump-trajectory'], '--dump-trajectory'),
        (['tradeoff', '--dist', 'exp:mu=1', '--lambda', '1,2'], '--lambda'),
    ])
    def test_usage_errors_name_the_token(self, argv, token):
        with pytest.raises(UsageError) as info:
            parse_job(argv)
        assert info.value.token == token

    @pytest.mark.parametrize('argv', [
        ['analytic', '--dist', 'exp:mu=1', '--lambda', '0.5,1'],
        ['simulate', '--dist', 'exp:mu=1', '--lambda', '1', '--eps-i', '0:1:3'],
        ['analytic', '--lambda', '1'],
        ['analytic', '--dist', 'exp:mu=1'],
        ['frobnicate', '--dist', 'exp:mu=1', '--lambda', '1'],
        ['analytic', '--dist', 'exp:mu=1', '--lambda', '1', '--bogus'],
        ['analytic', '--dist', 'exp:mu=1', '--lambda', 'x'],
        ['optimize', '--dist', 'exp:mu=1', '--lambda', '1', '--w1', '0', '--w2', '0'],
    ])
    def test_usage_errors(self, argv):
        with pytest.raises(UsageError):
            parse_job(argv)

    def test_config_file(self, tmp_path):
        config = tmp_path / 'job.conf'
        config.write_text('# defaults\nscheme = mg12star\ndist=gamma:k=2,mu=1\n--lambda=0.5\neps_b = 0.25\n'
                          'verbose = yes\n')
        spec = parse_job(['analytic', '--config', str(config), '--lambda', '2'])
        assert spec.scheme is Scheme.MG12STAR
        assert spec.dist.mean() == pytest.approx(1.0)
        assert spec.lambdas == (2.0,)
        assert spec.eps_b == (0.25,)
        assert spec.verbose

    @pytest.mark.parametrize('body', ['colour=blue\n', 'dist\n', 'verbose=maybe\n'])
    def test_bad_config_file(self, tmp_path, body):
        config = tmp_path / 'job.conf'
        config.write_text(body)
        with pytest.raises(UsageError):
            parse_job(['analytic', '--config', str(config), '--dist', 'exp:mu=1', '--lambda', '1'])


class TestEmitCsv:
    def test_header_and_quoting(self, tmp_path):
        path = tmp_path / 'nested' / 'out.csv'
        rows = [ResultRow('mg11', 'gamma:k=2,mu=1', 1.0, 0.0, 0.0, 2.5, 3.0, 'analytic'),
                ResultRow('mg11', 'gamma:k=2,mu=1', 1.0, 0.0, 0.0, 2.49, 3.01, 'sim', 0.01, 0.02)]
        emit_csv(rows, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == ','.join(CSV_COLUMNS)
        assert lines[1] == 'mg11,"gamma:k=2,mu=1",1,0,0,2.5,3,analytic,,'
        assert lines[2] == 'mg11,"gamma:k=2,mu=1",1,0,0,2.49,3.01,sim,0.01,0.02'

    def test_empty(self, tmp_path):
        with pytest.raises(ConfigError):
            emit_csv([], str(tmp_path / 'out.csv'))

    def test_twelve_significant_digits_round_trip(self, tmp_path):
        path = tmp_path / 'out.csv'
        values = [1 / 3, math.pi * 1e5, 2.718281828459045e-7, 123456.789012345]
        rows = [ResultRow('mg12star', 'exp:mu=1', v, v, v, v, v, 'sim', v, v) for v in values]
        emit_csv(rows, str(path))
        frame = read(path)
        for column in ['lambda', 'eps_i', 'eps_b', 'avg_aoi', 'avg_peak_aoi', 'se_aoi', 'se_peak']:
            assert list(frame[column]) == pytest.approx(values, rel=1e-11)

    def test_non_finite_row(self):
        with pytest.raises(NumericalError):
            ResultRow('mg11', 'exp:mu=1', 1.0, 0.0, 0.0, float('inf'), 3.0, 'analytic')


class TestMain:
    def test_analytic(self, tmp_path):
        out = tmp_path / 'a.csv'
        assert simulation.main(['analytic', '--dist', 'exp:mu=1', '--lambda', '1', '--out', str(out)]) == 0
        frame = read(out)
        assert list(frame.columns) == CSV_COLUMNS
        assert frame.loc[0, 'avg_aoi'] == pytest.approx(2.5)
        assert frame.loc[0, 'avg_peak_aoi'] == pytest.approx(3.0)
        assert frame.loc[0, 'source'] == 'analytic'

    def test_sweep_with_simulation_is_reproducible(self, tmp_path):
        argv = ['sweep', '--scheme', 'mg12star', '--dist', 'exp:mu=1', '--lambda', '1', '--eps-i', '0,0.5',
                '--eps-b', '0.5', '--packets', '10000', '--batches', '10']
        first, second = tmp_path / 'one.csv', tmp_path / 'two.csv'
        assert simulation.main(argv + ['--out', str(first)]) == 0
        assert simulation.main(argv + ['--out', str(second), '--jobs', '2']) == 0
        assert first.read_bytes() == second.read_bytes()
        frame = read(first)
        assert list(frame['source']) == ['analytic', 'sim', 'analytic', 'sim']
        assert list(frame['eps_i']) == [0.0, 0.0, 0.5, 0.5]
        assert frame['se_aoi'].isna().tolist() == [True, False, True, False]

    def test_simulate_dumps_trajectory(self, tmp_path):
        out = tmp_path / 's.csv'
        status = simulation.main(['simulate', '--dist', 'exp:mu=1', '--lambda', '1', '--eps-i', '0.5',
                                  '--packets', '10000', '--batches', '10', '--dump-trajectory', '--out', str(out)])
        assert status == 0
        assert list(read(out)['source']) == ['sim']
        events = read(tmp_path / 's.trajectory.csv')
        assert list(events.columns) == ['t_event', 'event_type', 'delta_before', 'delta_after']

    def test_tradeoff_writes_pareto_sibling(self, tmp_path):
        out = tmp_path / 't.csv'
        status = simulation.main(['tradeoff', '--scheme', 'mg12star', '--dist', 'gamma:k=0.1,mu=0.1', '--lambda', '1',
                                  '--eps-i', '0:20:5', '--eps-b', '0,5', '--out', str(out)])
        assert status == 0
        assert len(read(out)) == 10
        pareto = read(tmp_path / 't.pareto.csv')
        assert 1 <= len(pareto) <= 10

    def test_optimize(self, tmp_path):
        out = tmp_path / 'o.csv'
        status = simulation.main(['optimize', '--dist', 'invgauss:alpha=0.1,mu=0.1', '--lambda', '0.1,1',
                                  '--out', str(out)])
        assert status == 0
        frame = read(out)
        assert list(frame.columns) == OPTIMIZE_COLUMNS
        assert list(frame['lambda']) == [0.1, 1.0]
        assert (frame['improvement'] >= 0.45).all()
        assert (frame['optimal_aoi'] <= frame['zero_wait_aoi']).all()
        assert frame['optimal_aoi'].tolist() == pytest.approx(frame['value_star'].tolist())

    @pytest.mark.parametrize('argv,code', [
        (['analytic', '--dist', 'nope', '--lambda', '1'], 2),
        (['simulate', '--dist', 'exp:mu=1', '--lambda', '1', '--packets', '10'], 2),
        (['simulate', '--dist', 'det:c=1', '--lambda', '10000', '--packets', '10000'], 2),
        (['analytic', '--dist', 'exp:mu=1', '--lambda', '1', '--config', '/nonexistent/job.conf'], 4),
    ])
    def test_exit_codes(self, tmp_path, argv, code):
        assert simulation.main(argv + ['--out', str(tmp_path / 'x.csv')]) == code

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / 'file'
        blocker.write_text('')
        out = blocker / 'x.csv'
        assert simulation.main(['analytic', '--dist', 'exp:mu=1', '--lambda', '1', '--out', str(out)]) == 4

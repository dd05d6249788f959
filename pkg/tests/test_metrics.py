import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynamics import COMPUTE, IDLE, MOVE_E, InitialConditions
from environment import ActionTable, EnvironmentSpec, FieldSpec
from errors import ConfigError, SimulationUsageError
from metrics import (
    Forecaster, MetricsReport, build_report, eas, euf_series, evs, forecast_horizon, forecast_series,
    mean_report, she, surplus_horizon, tri,
)
from policies import Policy, QTable
from simulation import Mode, StepRecord, Trajectory, run_episode


def imported(steps, t_crit=40.0, max_steps=200):
    """按 (action, e_in, e_out, temperature) 构造一条导入轨迹（无终态）"""
    records = []
    energy = 1.0
    for i, (action, e_in, e_out, temperature) in enumerate(steps):
        records.append(StepRecord(i, 0, 0, energy, temperature, action, e_in, e_out, Mode.ACTIVE, 0.0))
        energy = energy + (e_in - e_out)
    return Trajectory('', 0, records, None, None, max_steps, t_crit, 20.0, 5.0)


def random_world(max_steps=50):
    return EnvironmentSpec(
        width=4,
        height=4,
        harvest_field=FieldSpec.gaussian_hotspots([(3, 3, 1.5, 1.0)]),
        dissipation_field=FieldSpec.linear_gradient(0.5, 0.2, 0.2),
        max_steps=max_steps,
    )


def random_policy(spec):
    return Policy('q_learning', QTable.for_environment(spec), epsilon=1.0)


class TestEuf:
    def test_ledger_copy(self):
        assert euf_series(imported([(IDLE, 0.5, 0.2, 20.0)])) == [pytest.approx(0.3)]

    def test_zero_world_all_zero(self):
        trajectory = imported([(IDLE, 0.0, 0.0, 20.0)] * 4)
        assert euf_series(trajectory) == [0.0] * 4

    def test_empty_rejected(self):
        with pytest.raises(SimulationUsageError):
            euf_series(imported([]))


class TestSurvivalHorizon:
    """累计盈余视界取满足条件的最大 t"""

    @pytest.mark.parametrize('series, expected', [
        ([1, 1, 1], 2),
        ([1, -2, 5], 2),
        ([-1], None),
        ([1, -0.5, -0.6], 1),
        ([], None),
    ])
    def test_examples(self, series, expected):
        assert surplus_horizon(series) == expected

    @settings(max_examples=200)
    @given(st.lists(st.floats(-5, 5), max_size=20))
    def test_matches_brute_force(self, series):
        expected = None
        for t in range(len(series)):
            total = 0.0
            for tau in range(t + 1):
                total += series[tau]
            if total >= 0:
                expected = t
        assert surplus_horizon(series) == expected


class TestEvsTri:
    def test_all_idle_scores_zero(self):
        trajectory = imported([(IDLE, 0.9, 0.01, 20.0)] * 5)
        assert evs(trajectory) == 0.0
        assert build_report(trajectory).eas == 0.0

    def test_only_active_steps_count(self):
        trajectory = imported([(COMPUTE, 0.2, 0.3, 21.0), (IDLE, 0.5, 0.1, 20.5)])
        assert evs(trajectory) == pytest.approx(-0.05)

    def test_constant_active_net(self):
        trajectory = imported([(MOVE_E, 0.3, 0.1, 20.0)] * 4)
        assert evs(trajectory) == pytest.approx(0.2)

    def test_tri_counts_overheated_steps(self):
        temps = [30.0, 41.0, 35.0, 39.0]
        trajectory = imported([(COMPUTE, 0.5, 0.3, t) for t in temps])
        assert tri(trajectory, 40.0) == 0.75
        assert tri(imported([(COMPUTE, 0.5, 0.3, 45.0)] * 3), 40.0) == 0.0
        assert tri(imported([(IDLE, 0.5, 0.3, 20.0)] * 3), 40.0) == 1.0

    def test_engine_tri_counts_final_overheat(self):
        spec = random_world()
        init = InitialConditions(0, 0, 5.0, 39.0)
        trajectory = run_episode(spec, Policy('fixed_compute'), init, seed=0)
        assert trajectory.lifespan == 1
        assert tri(trajectory, spec.t_crit) == 0.0


class TestForecast:
    """剩余寿命预测"""

    def make_records(self, energies, nets):
        return [StepRecord(i, 0, 0, e, 20.0, IDLE, max(n, 0.0), max(-n, 0.0), Mode.DORMANT, 0.0)
                for i, (e, n) in enumerate(zip(energies, nets))]

    def test_deficit_extrapolation(self):
        records = self.make_records([1.2, 1.1, 1.0], [-0.1, -0.1, -0.1])
        assert forecast_horizon(Forecaster(window=10), records, 100) == pytest.approx(10.0)

    def test_surplus_is_capped(self):
        records = self.make_records([1.0, 1.2, 1.4], [0.2, 0.2, 0.2])
        assert forecast_horizon(Forecaster(), records, 100) == 98.0

    def test_no_history_is_capped(self):
        records = self.make_records([1.0], [-0.5])
        assert forecast_horizon(Forecaster(), records, 50) == 50.0

    def test_window_limits_history(self):
        records = self.make_records([2.0, 1.0, 1.0, 1.0], [-1.0, 0.0, -0.5, 0.0])
        # 窗口 2 只看第 1、2 步，均值 −0.25
        assert forecast_horizon(Forecaster(window=2), records, 100) == pytest.approx(4.0)

    def test_oracle_needs_lifespan(self):
        with pytest.raises(SimulationUsageError):
            forecast_horizon(Forecaster('oracle'), self.make_records([1.0], [0.0]), 10)

    def test_invalid_forecaster(self):
        with pytest.raises(ConfigError):
            Forecaster(window=0)
        with pytest.raises(ConfigError):
            Forecaster('crystal_ball')


class TestShe:
    def test_constant_forecast(self):
        trajectory = imported([(IDLE, 0.0, 0.1, 20.0)] * 5)
        assert she([5.0] * 5, trajectory) == 2.0

    def test_off_by_one(self):
        trajectory = imported([(IDLE, 0.0, 0.1, 20.0)] * 4)
        assert she([5.0, 4.0, 3.0, 2.0], trajectory) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(SimulationUsageError):
            she([1.0], imported([(IDLE, 0.0, 0.1, 20.0)] * 2))

    def test_larger_error_lowers_eas(self):
        trajectory = imported([(COMPUTE, 0.5, 0.1, 20.0)] * 4)
        exact = she([4.0, 3.0, 2.0, 1.0], trajectory)
        worse = she([4.0, 3.0, 2.5, 1.0], trajectory)
        assert worse > exact
        assert eas(0.4, 1.0, worse) < eas(0.4, 1.0, exact)


class TestEas:
    @pytest.mark.parametrize('parts, expected', [
        ((1.0, 1.0, 0.0), 1.0),
        ((1.0, 1.0, 1.0), 0.5),
        ((0.2, 0.9, 0.5), 0.12),
    ])
    def test_examples(self, parts, expected):
        assert eas(*parts) == pytest.approx(expected)

    @pytest.mark.parametrize('parts', [(1.0, 1.5, 0.0), (1.0, -0.1, 0.0), (1.0, 1.0, -1.0)])
    def test_preconditions(self, parts):
        with pytest.raises(SimulationUsageError):
            eas(*parts)


class TestReports:
    def test_serialized_field_names(self):
        report = build_report(imported([(COMPUTE, 0.5, 0.1, 20.0)] * 3))
        assert set(report.to_dict(with_series=False)) == {
            'evs', 'tri', 'she', 'eas', 'horizon_eq2', 'empirical_lifespan'}
        assert isinstance(report, MetricsReport)
        assert report.to_dict()['euf_series'] == report.euf_series

    def test_mean_report(self):
        reports = [
            MetricsReport(0.2, 1.0, 0.0, 0.2, 3, 4),
            MetricsReport(0.4, 0.5, 1.0, 0.1, None, 2),
        ]
        mean = mean_report(reports)
        assert mean['runs'] == 2
        assert mean['evs'] == pytest.approx(0.3)
        assert mean['horizon_eq2'] == 3
        assert mean['empirical_lifespan'] == 3
        with pytest.raises(SimulationUsageError):
            mean_report([])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32), st.floats(0.2, 3.0), st.floats(20.0, 39.0))
def test_oracle_forecast_collapses_she(seed, e0, t0):
    """oracle 预测器下 SHE = 0，EAS = EVS·TRI"""
    spec = random_world()
    trajectory = run_episode(spec, random_policy(spec), InitialConditions(0, 0, e0, t0), seed,
                             forecaster=Forecaster('oracle'))
    report = build_report(trajectory)
    assert report.she == 0.0
    assert report.eas == report.evs * report.tri
    assert 0.0 <= report.tri <= 1.0


def test_ledger_prefix_sums_on_random_episodes():
    """EUF 前缀和等于能量位移，累计盈余视界与逐前缀扫描一致"""
    spec = random_world()
    policy = random_policy(spec)
    init = InitialConditions(1, 1, 1.5, 22.0)
    for seed in range(1000):
        trajectory = run_episode(spec, policy, init, seed)
        series = euf_series(trajectory)
        energies = trajectory.energy_series()
        total = 0.0
        expected = None
        for t, net in enumerate(series):
            total += net
            assert abs(total - (energies[t + 1] - energies[0])) <= 1e-9
            if total >= 0:
                expected = t
        assert surplus_horizon(series) == expected

        report = build_report(trajectory)
        assert report.eas == report.evs * report.tri / (1.0 + report.she)
        assert 0.0 <= report.tri <= 1.0
        assert report.she >= 0.0


def test_forecast_series_length():
    records = [StepRecord(i, 0, 0, 1.0, 20.0, IDLE, 0.0, 0.0, Mode.DORMANT, 0.0) for i in range(7)]
    assert len(forecast_series(Forecaster(), records, 10)) == 7


def test_zero_cost_idle_world_survives():
    spec = EnvironmentSpec(
        width=2, height=2,
        harvest_field=FieldSpec.constant(0.0),
        dissipation_field=FieldSpec.constant(0.0),
        action_costs=ActionTable(0.0, 0.3, 0.1),
        max_steps=30,
    )
    trajectory = run_episode(spec, Policy('greedy_harvest'), InitialConditions(0, 0, 1.0, 20.0), seed=1)
    assert trajectory.lifespan == 30
    assert euf_series(trajectory) == [0.0] * 30
    assert all(r.action == IDLE for r in trajectory.steps)

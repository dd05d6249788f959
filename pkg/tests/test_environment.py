import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from environment import (
    ActionTable, EnvironmentSpec, FieldComponent, FieldSpec, Hotspot, Temporal,
    dissipation_at, potential_at, raw_grid, spec_digest,
)
from errors import BoundsError, ConfigError, SimulationUsageError


def make_spec(**overrides):
    params = dict(
        width=5,
        height=4,
        harvest_field=FieldSpec.gaussian_hotspots([(2, 1, 1.5, 1.0)]),
        dissipation_field=FieldSpec.constant(1.0),
    )
    params.update(overrides)
    return EnvironmentSpec(**params)


class TestFieldValues:
    """势场取值"""

    def test_constant_field_everywhere(self):
        spec = make_spec(harvest_field=FieldSpec.constant(0.7))
        for x in range(spec.width):
            for y in range(spec.height):
                assert potential_at(spec, x, y) == pytest.approx(0.7)

    def test_hotspot_peak_at_center(self):
        spec = make_spec()
        assert potential_at(spec, 2, 1) == pytest.approx(1.5)
        assert potential_at(spec, 3, 1) == pytest.approx(1.5 * math.exp(-0.5))
        assert potential_at(spec, 2, 1) > potential_at(spec, 0, 3)

    def test_linear_gradient(self):
        spec = make_spec(harvest_field=FieldSpec.linear_gradient(0.5, 0.25, -0.1))
        assert potential_at(spec, 0, 0) == pytest.approx(0.5)
        assert potential_at(spec, 4, 0) == pytest.approx(1.5)
        assert potential_at(spec, 0, 3) == pytest.approx(0.2)

    def test_negative_gradient_clamped_at_zero(self):
        spec = make_spec(dissipation_field=FieldSpec.linear_gradient(1.0, -1.0, 0.0))
        assert dissipation_at(spec, 0, 0) == pytest.approx(1.0)
        assert dissipation_at(spec, 3, 0) == 0.0

    def test_components_are_summed(self):
        field = FieldSpec((
            FieldComponent('constant', value=0.3),
            FieldComponent('gaussian_hotspots', hotspots=(Hotspot(1, 1, 2.0, 0.5),)),
        ))
        spec = make_spec(harvest_field=field)
        assert potential_at(spec, 1, 1) == pytest.approx(2.3)
        assert potential_at(spec, 4, 3) == pytest.approx(0.3, abs=1e-6)

    def test_grid_matches_pointwise_values(self):
        spec = make_spec()
        grid = raw_grid(spec.harvest_field, spec.width, spec.height)
        assert len(grid) == spec.height and len(grid[0]) == spec.width
        assert grid[1][3] == pytest.approx(potential_at(spec, 3, 1))


class TestTemporalModulation:
    """时间调制"""

    def test_static_field_ignores_time(self):
        spec = make_spec()
        assert potential_at(spec, 1, 1, 0) == potential_at(spec, 1, 1, 37)

    def test_sinusoidal_factor(self):
        temporal = Temporal('sinusoidal', period=20, amplitude=0.5)
        spec = make_spec(harvest_field=FieldSpec.constant(1.0, temporal))
        assert potential_at(spec, 0, 0, 0) == pytest.approx(1.0)
        assert potential_at(spec, 0, 0, 5) == pytest.approx(1.5)
        assert potential_at(spec, 0, 0, 15) == pytest.approx(0.5)

    def test_phase_shifts_cycle(self):
        temporal = Temporal('sinusoidal', period=20, amplitude=0.5, phase=5)
        spec = make_spec(harvest_field=FieldSpec.constant(1.0, temporal))
        assert potential_at(spec, 0, 0, 0) == pytest.approx(1.5)

    def test_large_amplitude_never_negative(self):
        temporal = Temporal('sinusoidal', period=4, amplitude=2.0)
        spec = make_spec(dissipation_field=FieldSpec.constant(1.0, temporal))
        for t in range(8):
            assert dissipation_at(spec, 0, 0, t) >= 0.0

    def test_negative_timestep_rejected(self):
        with pytest.raises(SimulationUsageError):
            potential_at(make_spec(), 0, 0, -1)

    def test_non_positive_period_rejected(self):
        with pytest.raises(ConfigError) as exc:
            Temporal('sinusoidal', period=0, amplitude=0.5)
        assert exc.value.key == 'period'


class TestBounds:
    """越界查询"""

    @pytest.mark.parametrize('x, y, axis', [(-1, 0, 'x'), (5, 0, 'x'), (0, -1, 'y'), (0, 4, 'y')])
    def test_out_of_bounds(self, x, y, axis):
        spec = make_spec()
        with pytest.raises(BoundsError) as exc:
            potential_at(spec, x, y)
        assert exc.value.axis == axis
        with pytest.raises(ValueError):
            dissipation_at(spec, x, y)

    def test_single_cell_grid(self):
        spec = make_spec(width=1, height=1, harvest_field=FieldSpec.constant(0.4))
        assert potential_at(spec, 0, 0) == pytest.approx(0.4)


class TestSpecValidation:
    """构造时校验，错误信息带上键名"""

    @pytest.mark.parametrize('overrides, key', [
        ({'eta': 1.5}, 'eta'),
        ({'eta': -0.1}, 'eta'),
        ({'width': 0}, 'width'),
        ({'height': 0}, 'height'),
        ({'max_steps': 0}, 'max_steps'),
        ({'alpha': -1.0}, 'alpha'),
        ({'beta': -1.0}, 'beta'),
        ({'t_crit': 20.0}, 't_crit'),
        ({'e_cap': 0.0}, 'e_cap'),
        ({'action_costs': ActionTable(-0.1, 0.3, 0.1)}, 'action_costs.idle'),
        ({'gain_factors': ActionTable(1.0, 1.2, 0.3)}, 'gain_factors.compute'),
    ])
    def test_invalid_values(self, overrides, key):
        with pytest.raises(ConfigError) as exc:
            make_spec(**overrides)
        assert exc.value.key == key
        assert key in str(exc.value)

    def test_non_positive_sigma(self):
        with pytest.raises(ConfigError):
            Hotspot(0, 0, 1.0, 0.0)

    def test_unknown_component(self):
        with pytest.raises(ConfigError):
            FieldComponent('spiral')


class TestDigest:
    def test_digest_is_stable_and_content_based(self):
        assert spec_digest(make_spec()) == spec_digest(make_spec())
        assert spec_digest(make_spec()) != spec_digest(make_spec(eta=0.8))
        assert len(spec_digest(make_spec())) == 64


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 8), st.integers(1, 8),
    st.lists(st.tuples(st.floats(-2, 10), st.floats(-2, 10), st.floats(-3, 3), st.floats(0.1, 4)),
             min_size=1, max_size=3),
    st.floats(-2, 2), st.floats(-1, 1), st.floats(-1, 1),
    st.integers(0, 50),
)
def test_fields_non_negative_everywhere(width, height, spots, base, dx, dy, t):
    """任意热点与梯度组合，截断后都不为负"""
    field = FieldSpec(
        (FieldComponent('gaussian_hotspots', hotspots=tuple(Hotspot(*s) for s in spots)),
         FieldComponent('linear_gradient', base=base, dx=dx, dy=dy)),
        Temporal('sinusoidal', period=7, amplitude=1.5),
    )
    spec = EnvironmentSpec(width, height, field, field)
    for x in range(width):
        for y in range(height):
            assert potential_at(spec, x, y, t) >= 0.0
            assert dissipation_at(spec, x, y, t) >= 0.0


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 30), st.floats(0, 2), st.floats(0, 10), st.integers(0, 100),
    st.floats(0.1, 3), st.floats(0.3, 2),
)
def test_sinusoidal_field_is_periodic(period, amplitude, phase, t, peak, sigma):
    """调制场每隔一个周期取值相同"""
    temporal = Temporal('sinusoidal', period=period, amplitude=amplitude, phase=phase)
    spec = make_spec(harvest_field=FieldSpec.gaussian_hotspots([(2, 1, peak, sigma)], temporal))
    for x, y in ((0, 0), (2, 1), (4, 3)):
        assert abs(potential_at(spec, x, y, t) - potential_at(spec, x, y, t + period)) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0, 4), st.floats(0, 3), st.floats(0, 3), st.floats(0.1, 3)),
             min_size=1, max_size=3),
    st.floats(0, 2), st.integers(0, 40),
)
def test_equal_specs_evaluate_identically(spots, base, t):
    """相同内容的两个 spec 在每个格子上取值完全一致"""
    def build():
        return make_spec(
            harvest_field=FieldSpec.gaussian_hotspots(spots),
            dissipation_field=FieldSpec.linear_gradient(base, 0.1, 0.2),
        )
    first, second = build(), build()
    assert spec_digest(first) == spec_digest(second)
    for x in range(first.width):
        for y in range(first.height):
            assert potential_at(first, x, y, t) == potential_at(second, x, y, t)
            assert dissipation_at(first, x, y, t) == dissipation_at(second, x, y, t)

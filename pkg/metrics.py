"""评估指标：EUF 序列、累计盈余视界、EVS、TRI、SHE、EAS 与寿命预测器"""
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Optional

from errors import ConfigError, SimulationUsageError

FORECASTER_KINDS = ('rate_extrapolation', 'oracle')
DIV_EPSILON = 1e-6


@dataclass(frozen=True)
class Forecaster:
    """剩余寿命预测器：按近期净能量速率外推，或直接读取真实结果 (oracle)"""
    kind: str = 'rate_extrapolation'
    window: int = 10

    def __post_init__(self):
        if self.kind not in FORECASTER_KINDS:
            raise ConfigError('forecaster.kind', f'unknown forecaster {self.kind!r}')
        if self.window < 1:
            raise ConfigError('forecaster.window', f'must be >= 1, got {self.window}')

    def to_dict(self):
        return {'kind': self.kind, 'window': self.window}


@dataclass(frozen=True)
class MetricsReport:
    """单条轨迹的评估报告"""
    evs: float
    tri: float
    she: float
    eas: float
    surplus_horizon: Optional[int]
    empirical_lifespan: int
    euf_series: list = field(default_factory=list)

    def to_dict(self, with_series=True):
        data = {
            'evs': self.evs,
            'tri': self.tri,
            'she': self.she,
            'eas': self.eas,
            'horizon_eq2': self.surplus_horizon,
            'empirical_lifespan': self.empirical_lifespan,
        }
        if with_series:
            data['euf_series'] = list(self.euf_series)
        return data


def _require_steps(trajectory):
    if not trajectory.steps:
        raise SimulationUsageError('trajectory has no steps')


def euf_series(trajectory):
    """每步净能量 E_in − E_out"""
    _require_steps(trajectory)
    return [record.e_in - record.e_out for record in trajectory.steps]


def surplus_horizon(euf):
    """前缀和保持非负的最大 t；t=0 也不满足时返回 None"""
    horizon = None
    for t, total in enumerate(accumulate(euf)):
        if total >= 0:
            horizon = t
    return horizon


def evs(trajectory):
    """活跃步（非 idle）的净能量按总步数平均；一直休眠得 0"""
    _require_steps(trajectory)
    total = 0.0
    for record in trajectory.steps:
        if record.action.kind != 'idle':
            total += record.e_in - record.e_out
    return total / len(trajectory.steps)


def tri(trajectory, t_crit):
    """温度未超过临界值的步数比例"""
    _require_steps(trajectory)
    temperatures = trajectory.step_temperatures()
    over = sum(1 for temperature in temperatures if temperature > t_crit)
    return 1.0 - over / len(temperatures)


def forecast_horizon(forecaster, prefix, max_steps, lifespan=None):
    """第 t 步的剩余寿命预测 Ĥ_t；prefix 为第 0..t 步的记录（最后一条带 e_t）"""
    t = len(prefix) - 1
    if forecaster.kind == 'oracle':
        if lifespan is None:
            raise SimulationUsageError('oracle forecaster needs the realized lifespan')
        return float(lifespan - t)

    cap = float(max_steps - t)
    history = prefix[:-1][-forecaster.window:]
    if not history:
        return cap
    mean_net = sum(r.e_in - r.e_out for r in history) / len(history)
    if mean_net >= 0:
        return cap
    return prefix[-1].energy / max(DIV_EPSILON, -mean_net)


def forecast_series(forecaster, records, max_steps, lifespan=None):
    return [forecast_horizon(forecaster, records[:t + 1], max_steps, lifespan)
            for t in range(len(records))]


def true_horizons(lifespan, length):
    """H_t = 经验终止步 − t"""
    return [lifespan - t for t in range(length)]


def she(forecasts, trajectory):
    """预测与真实剩余寿命的平均绝对误差"""
    if len(forecasts) != len(trajectory.steps):
        raise SimulationUsageError(
            f'{len(forecasts)} forecasts for {len(trajectory.steps)} steps')
    _require_steps(trajectory)
    actual = true_horizons(trajectory.lifespan, len(trajectory.steps))
    return sum(abs(f - h) for f, h in zip(forecasts, actual)) / len(actual)


def eas(evs_value, tri_value, she_value):
    """综合指标 EVS·TRI/(1+SHE)"""
    if not 0.0 <= tri_value <= 1.0:
        raise SimulationUsageError(f'tri must be in [0, 1], got {tri_value}')
    if she_value < 0:
        raise SimulationUsageError(f'she must be >= 0, got {she_value}')
    return evs_value * tri_value / (1.0 + she_value)


def build_report(trajectory):
    """用轨迹中记录的预测值计算完整报告"""
    series = euf_series(trajectory)
    evs_value = evs(trajectory)
    tri_value = tri(trajectory, trajectory.t_crit)
    she_value = she([r.forecast for r in trajectory.steps], trajectory)
    return MetricsReport(
        evs=evs_value,
        tri=tri_value,
        she=she_value,
        eas=eas(evs_value, tri_value, she_value),
        surplus_horizon=surplus_horizon(series),
        empirical_lifespan=trajectory.lifespan,
        euf_series=series,
    )


def mean_report(reports):
    """多个种子的报告取平均，用于估计期望意义下的指标"""
    if not reports:
        raise SimulationUsageError('no reports to average')
    n = len(reports)
    horizons = [r.surplus_horizon for r in reports if r.surplus_horizon is not None]
    return {
        'runs': n,
        'evs': sum(r.evs for r in reports) / n,
        'tri': sum(r.tri for r in reports) / n,
        'she': sum(r.she for r in reports) / n,
        'eas': sum(r.eas for r in reports) / n,
        'horizon_eq2': sum(horizons) / len(horizons) if horizons else None,
        'empirical_lifespan': sum(r.empirical_lifespan for r in reports) / n,
    }

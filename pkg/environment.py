"""世界定义：二维网格上的采能势场 P、散热势场 D 以及能量/热学常数"""
import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from errors import BoundsError, ConfigError, SimulationUsageError

ACTION_KINDS = ('idle', 'compute', 'move')
COMPONENT_KINDS = ('constant', 'gaussian_hotspots', 'linear_gradient')
TEMPORAL_KINDS = ('static', 'sinusoidal')


@dataclass(frozen=True)
class Hotspot:
    """高斯热点 (cx, cy, amplitude, sigma)"""
    cx: float
    cy: float
    amplitude: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError('sigma', f'must be > 0, got {self.sigma}')


@dataclass(frozen=True)
class FieldComponent:
    """势场分量：常数、高斯热点或线性梯度"""
    kind: str
    value: float = 0.0                  # constant
    hotspots: tuple = ()                # gaussian_hotspots
    base: float = 0.0                   # linear_gradient
    dx: float = 0.0
    dy: float = 0.0

    def __post_init__(self):
        if self.kind not in COMPONENT_KINDS:
            raise ConfigError('kind', f'unknown field variant {self.kind!r}')

    def evaluate(self, xs, ys):
        """在坐标数组上求值（未截断）"""
        if self.kind == 'constant':
            return np.full(np.broadcast(xs, ys).shape, float(self.value))
        if self.kind == 'linear_gradient':
            return self.base + self.dx * xs + self.dy * ys
        total = np.zeros(np.broadcast(xs, ys).shape)
        for spot in self.hotspots:
            dist2 = (xs - spot.cx) ** 2 + (ys - spot.cy) ** 2
            total = total + spot.amplitude * np.exp(-dist2 / (2.0 * spot.sigma ** 2))
        return total

    def to_dict(self):
        if self.kind == 'constant':
            return {'kind': 'constant', 'value': self.value}
        if self.kind == 'linear_gradient':
            return {'kind': 'linear_gradient', 'base': self.base, 'dx': self.dx, 'dy': self.dy}
        return {
            'kind': 'gaussian_hotspots',
            'hotspots': [[s.cx, s.cy, s.amplitude, s.sigma] for s in self.hotspots],
        }


@dataclass(frozen=True)
class Temporal:
    """时间调制：static 或 sinusoidal(period, amplitude, phase)"""
    kind: str = 'static'
    period: float = 1.0
    amplitude: float = 0.0  # 振幅比例
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in TEMPORAL_KINDS:
            raise ConfigError('kind', f'unknown temporal variant {self.kind!r}')
        if self.kind == 'sinusoidal' and not self.period > 0:
            raise ConfigError('period', f'must be > 0, got {self.period}')

    def factor(self, t):
        if self.kind == 'static':
            return 1.0
        return 1.0 + self.amplitude * math.sin(2.0 * math.pi * (t + self.phase) / self.period)

    def to_dict(self):
        if self.kind == 'static':
            return {'kind': 'static'}
        return {'kind': 'sinusoidal', 'period': self.period,
                'amplitude': self.amplitude, 'phase': self.phase}


@dataclass(frozen=True)
class FieldSpec:
    """标量场：各分量求和后做时间调制，再在 0 处截断"""
    components: tuple
    temporal: Temporal = field(default_factory=Temporal)

    @classmethod
    def constant(cls, value, temporal=None):
        return cls((FieldComponent('constant', value=value),), temporal or Temporal())

    @classmethod
    def gaussian_hotspots(cls, spots, temporal=None):
        hotspots = tuple(Hotspot(*spot) for spot in spots)
        return cls((FieldComponent('gaussian_hotspots', hotspots=hotspots),), temporal or Temporal())

    @classmethod
    def linear_gradient(cls, base, dx, dy, temporal=None):
        return cls((FieldComponent('linear_gradient', base=base, dx=dx, dy=dy),), temporal or Temporal())

    @property
    def is_static(self):
        return self.temporal.kind == 'static'

    def to_dict(self):
        return {
            'components': [c.to_dict() for c in self.components],
            'temporal': self.temporal.to_dict(),
        }


@lru_cache(maxsize=64)
def raw_grid(field_spec, width, height):
    """一次性求出整张网格的未调制取值，返回 [y][x] 嵌套列表"""
    ys, xs = np.mgrid[0:height, 0:width].astype(float)
    total = np.zeros((height, width))
    for component in field_spec.components:
        total = total + component.evaluate(xs, ys)
    return total.tolist()


@dataclass(frozen=True)
class ActionTable:
    """按动作类别取值的参数表 (idle / compute / move)"""
    idle: float
    compute: float
    move: float

    def of(self, kind):
        return getattr(self, kind)

    def to_dict(self):
        return {'idle': self.idle, 'compute': self.compute, 'move': self.move}


DEFAULT_COSTS = ActionTable(idle=0.01, compute=0.3, move=0.1)
DEFAULT_HEAT = ActionTable(idle=0.0, compute=2.0, move=0.5)
DEFAULT_GAINS = ActionTable(idle=1.0, compute=0.6, move=0.3)


@dataclass(frozen=True)
class EnvironmentSpec:
    """环境规格（构造后不可变，可在并发的 episode 之间共享）"""
    width: int
    height: int
    harvest_field: FieldSpec
    dissipation_field: FieldSpec
    eta: float = 0.9                # 采能效率
    alpha: float = 1.0              # 产热系数
    beta: float = 0.5               # 散热效率
    t_crit: float = 40.0            # 临界温度
    t_ambient: float = 20.0         # 环境温度
    action_costs: ActionTable = DEFAULT_COSTS
    action_heat: ActionTable = DEFAULT_HEAT
    gain_factors: ActionTable = DEFAULT_GAINS
    max_steps: int = 200
    e_cap: float = 5.0              # 能量参考容量（离散化与归一化用，不限制储能）

    def __post_init__(self):
        if self.width < 1:
            raise ConfigError('width', f'must be >= 1, got {self.width}')
        if self.height < 1:
            raise ConfigError('height', f'must be >= 1, got {self.height}')
        if self.max_steps < 1:
            raise ConfigError('max_steps', f'must be >= 1, got {self.max_steps}')
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError('eta', f'must be in [0, 1], got {self.eta}')
        if self.alpha < 0:
            raise ConfigError('alpha', f'must be >= 0, got {self.alpha}')
        if self.beta < 0:
            raise ConfigError('beta', f'must be >= 0, got {self.beta}')
        if not self.t_crit > self.t_ambient:
            raise ConfigError('t_crit', f'must exceed t_ambient ({self.t_ambient}), got {self.t_crit}')
        if not self.e_cap > 0:
            raise ConfigError('e_cap', f'must be > 0, got {self.e_cap}')
        for name in ('action_costs', 'action_heat'):
            table = getattr(self, name)
            for kind in ACTION_KINDS:
                if table.of(kind) < 0:
                    raise ConfigError(f'{name}.{kind}', f'must be >= 0, got {table.of(kind)}')
        for kind in ACTION_KINDS:
            gain = self.gain_factors.of(kind)
            if not 0.0 <= gain <= 1.0:
                raise ConfigError(f'gain_factors.{kind}', f'must be in [0, 1], got {gain}')

    @property
    def n_cells(self):
        return self.width * self.height

    def cell_index(self, x, y):
        return y * self.width + x

    def in_bounds(self, x, y):
        return 0 <= x < self.width and 0 <= y < self.height

    def to_dict(self):
        return {
            'width': self.width,
            'height': self.height,
            'harvest_field': self.harvest_field.to_dict(),
            'dissipation_field': self.dissipation_field.to_dict(),
            'eta': self.eta,
            'alpha': self.alpha,
            'beta': self.beta,
            't_crit': self.t_crit,
            't_ambient': self.t_ambient,
            'action_costs': self.action_costs.to_dict(),
            'action_heat': self.action_heat.to_dict(),
            'gain_factors': self.gain_factors.to_dict(),
            'max_steps': self.max_steps,
            'e_cap': self.e_cap,
        }


def spec_digest(spec):
    """规格内容哈希（规范化 JSON 的 sha256）"""
    canonical = json.dumps(spec.to_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _check_bounds(spec, x, y):
    if not 0 <= x < spec.width:
        raise BoundsError('x', x, spec.width)
    if not 0 <= y < spec.height:
        raise BoundsError('y', y, spec.height)


def _field_value(field_spec, spec, x, y, t):
    raw = raw_grid(field_spec, spec.width, spec.height)[y][x]
    if field_spec.temporal.kind != 'static':
        raw = raw * field_spec.temporal.factor(t)
    return raw if raw > 0.0 else 0.0


def potential_at(spec, x, y, t=0):
    """采能势 P(x, y, t)，恒 >= 0"""
    _check_bounds(spec, x, y)
    if t < 0:
        raise SimulationUsageError(f'timestep must be >= 0, got {t}')
    return _field_value(spec.harvest_field, spec, x, y, t)


def dissipation_at(spec, x, y, t=0):
    """散热势 D(x, y)，恒 >= 0；只有在配置了时间调制时才依赖 t"""
    _check_bounds(spec, x, y)
    if t < 0:
        raise SimulationUsageError(f'timestep must be >= 0, got {t}')
    return _field_value(spec.dissipation_field, spec, x, y, t)

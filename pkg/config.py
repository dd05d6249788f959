"""实验配置：严格解析 JSON 配置文件，未知键与非法取值都报出具体的键名"""
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from dynamics import InitialConditions
from environment import (
    DEFAULT_COSTS, DEFAULT_GAINS, DEFAULT_HEAT, ActionTable, EnvironmentSpec,
    FieldComponent, FieldSpec, Hotspot, Temporal,
)
from errors import ConfigError
from metrics import Forecaster
from policies import EpsilonSchedule, RewardSpec
from simulation import ModeThresholds, check_axis

SEED_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class PolicySettings:
    """策略选择器与参数；q_learning 的表从文件读取"""
    kind: str = 'fixed_compute'
    table: Optional[str] = None
    epsilon: float = 0.0


@dataclass(frozen=True)
class TrainingSettings:
    """Q-learning 训练超参数"""
    episodes: int = 2000
    learning_rate: float = 0.1
    discount: float = 0.95
    energy_bins: int = 8
    temp_bins: int = 8
    schedule: EpsilonSchedule = field(default_factory=EpsilonSchedule)


@dataclass(frozen=True)
class SweepSettings:
    """扫描范围 (min, max, count)"""
    e0: Optional[tuple] = None
    t0: Optional[tuple] = None


@dataclass(frozen=True)
class RunConfig:
    environment: EnvironmentSpec
    policy: PolicySettings = field(default_factory=PolicySettings)
    reward: RewardSpec = field(default_factory=RewardSpec)
    training: TrainingSettings = field(default_factory=TrainingSettings)
    forecaster: Forecaster = field(default_factory=Forecaster)
    init: Optional[InitialConditions] = None
    modes: ModeThresholds = field(default_factory=ModeThresholds)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    compare_table: Optional[str] = None
    evaluation_seeds: int = 1
    seed: int = 0
    output_dir: Optional[str] = None
    digest: str = ''
    base_dir: str = '.'

    def resolve(self, path):
        """相对路径按配置文件所在目录解析"""
        if path is None or os.path.isabs(path):
            return path
        return os.path.join(self.base_dir, path)

    def start(self):
        return self.init or InitialConditions(0, 0, 1.0, self.environment.t_ambient)


# ---------- 通用校验 ----------

def _strict(data, allowed, path):
    if not isinstance(data, dict):
        raise ConfigError(path, 'expected an object')
    for key in data:
        if key not in allowed:
            raise ConfigError(f'{path}.{key}' if path else key, 'unknown key')
    return data


def _number(data, key, path, default=None, integer=False):
    full = f'{path}.{key}' if path else key
    if key not in data:
        if default is None:
            raise ConfigError(full, 'missing required key')
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(full, f'expected a number, got {value!r}')
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(full, f'expected an integer, got {value!r}')
        return int(value)
    return float(value)


def _prefixed(path, build):
    """把构造函数抛出的 ConfigError 加上所在段的前缀"""
    try:
        return build()
    except ConfigError as e:
        if e.key.startswith(path + '.'):
            raise
        raise ConfigError(f'{path}.{e.key}', e.message) from None


# ---------- 各段解析 ----------

def parse_temporal(data, path):
    if data is None:
        return Temporal()
    _strict(data, {'kind', 'period', 'amplitude', 'phase'}, path)
    kind = data.get('kind', 'static')
    return _prefixed(path, lambda: Temporal(
        kind=kind,
        period=_number(data, 'period', path, 1.0),
        amplitude=_number(data, 'amplitude', path, 0.0),
        phase=_number(data, 'phase', path, 0.0),
    ))


def parse_component(data, path, allow_temporal=False):
    allowed = {'kind', 'value', 'hotspots', 'base', 'dx', 'dy'}
    _strict(data, allowed | {'temporal'} if allow_temporal else allowed, path)
    kind = data.get('kind')
    if kind == 'constant':
        return FieldComponent('constant', value=_number(data, 'value', path))
    if kind == 'linear_gradient':
        return FieldComponent('linear_gradient',
                              base=_number(data, 'base', path),
                              dx=_number(data, 'dx', path, 0.0),
                              dy=_number(data, 'dy', path, 0.0))
    if kind == 'gaussian_hotspots':
        spots = data.get('hotspots')
        if not isinstance(spots, list) or not spots:
            raise ConfigError(f'{path}.hotspots', 'expected a non-empty list of [cx, cy, amplitude, sigma]')
        hotspots = []
        for i, spot in enumerate(spots):
            spot_path = f'{path}.hotspots[{i}]'
            if not isinstance(spot, list) or len(spot) != 4:
                raise ConfigError(spot_path, 'expected [cx, cy, amplitude, sigma]')
            values = {name: v for name, v in zip(('cx', 'cy', 'amplitude', 'sigma'), spot)}
            hotspots.append(_prefixed(spot_path, lambda: Hotspot(
                *(_number(values, name, spot_path) for name in ('cx', 'cy', 'amplitude', 'sigma')))))
        return FieldComponent('gaussian_hotspots', hotspots=tuple(hotspots))
    raise ConfigError(f'{path}.kind', f'unknown field variant {kind!r}')


def parse_field(data, path):
    """单一变体 {"kind": ...} 或组合 {"components": [...]}，均可带 temporal"""
    if not isinstance(data, dict):
        raise ConfigError(path, 'expected an object')
    temporal = parse_temporal(data.get('temporal'), f'{path}.temporal')
    if 'components' in data:
        _strict(data, {'components', 'temporal'}, path)
        components = data['components']
        if not isinstance(components, list) or not components:
            raise ConfigError(f'{path}.components', 'expected a non-empty list')
        parts = tuple(parse_component(c, f'{path}.components[{i}]') for i, c in enumerate(components))
    else:
        parts = (parse_component(data, path, allow_temporal=True),)
    return FieldSpec(parts, temporal)


def parse_action_table(data, path, default):
    if data is None:
        return default
    _strict(data, {'idle', 'compute', 'move'}, path)
    return ActionTable(
        idle=_number(data, 'idle', path, default.idle),
        compute=_number(data, 'compute', path, default.compute),
        move=_number(data, 'move', path, default.move),
    )


def parse_environment(data, path='environment'):
    allowed = {'width', 'height', 'harvest_field', 'dissipation_field', 'eta', 'alpha', 'beta',
               't_crit', 't_ambient', 'action_costs', 'action_heat', 'gain_factors',
               'max_steps', 'e_cap'}
    _strict(data, allowed, path)
    for key in ('harvest_field', 'dissipation_field'):
        if key not in data:
            raise ConfigError(f'{path}.{key}', 'missing required key')
    return _prefixed(path, lambda: EnvironmentSpec(
        width=_number(data, 'width', path, integer=True),
        height=_number(data, 'height', path, integer=True),
        harvest_field=parse_field(data['harvest_field'], f'{path}.harvest_field'),
        dissipation_field=parse_field(data['dissipation_field'], f'{path}.dissipation_field'),
        eta=_number(data, 'eta', path, 0.9),
        alpha=_number(data, 'alpha', path, 1.0),
        beta=_number(data, 'beta', path, 0.5),
        t_crit=_number(data, 't_crit', path, 40.0),
        t_ambient=_number(data, 't_ambient', path, 20.0),
        action_costs=parse_action_table(data.get('action_costs'), f'{path}.action_costs', DEFAULT_COSTS),
        action_heat=parse_action_table(data.get('action_heat'), f'{path}.action_heat', DEFAULT_HEAT),
        gain_factors=parse_action_table(data.get('gain_factors'), f'{path}.gain_factors', DEFAULT_GAINS),
        max_steps=_number(data, 'max_steps', path, 200, integer=True),
        e_cap=_number(data, 'e_cap', path, 5.0),
    ))


def parse_policy(data, path='policy'):
    if data is None:
        return PolicySettings()
    _strict(data, {'kind', 'table', 'epsilon'}, path)
    kind = data.get('kind', 'fixed_compute')
    if kind not in ('fixed_compute', 'greedy_harvest', 'q_learning'):
        raise ConfigError(f'{path}.kind', f'unknown policy {kind!r}')
    epsilon = _number(data, 'epsilon', path, 0.0)
    if not 0.0 <= epsilon <= 1.0:
        raise ConfigError(f'{path}.epsilon', f'must be in [0, 1], got {epsilon}')
    table = data.get('table')
    if table is not None and not isinstance(table, str):
        raise ConfigError(f'{path}.table', 'expected a file path')
    return PolicySettings(kind, table, epsilon)


def parse_reward(data, path='reward'):
    if data is None:
        return RewardSpec()
    _strict(data, {'alive_bonus', 'compute_bonus', 'death_penalty'}, path)
    return _prefixed(path, lambda: RewardSpec(
        alive_bonus=_number(data, 'alive_bonus', path, 1.0),
        compute_bonus=_number(data, 'compute_bonus', path, 0.2),
        death_penalty=_number(data, 'death_penalty', path, 10.0),
    ))


def parse_training(data, path='training'):
    if data is None:
        return TrainingSettings()
    allowed = {'episodes', 'learning_rate', 'discount', 'energy_bins', 'temp_bins',
               'epsilon_start', 'epsilon_decay', 'epsilon_min'}
    _strict(data, allowed, path)
    episodes = _number(data, 'episodes', path, 2000, integer=True)
    if episodes < 1:
        raise ConfigError(f'{path}.episodes', f'must be >= 1, got {episodes}')
    learning_rate = _number(data, 'learning_rate', path, 0.1)
    if not 0.0 <= learning_rate <= 1.0:
        raise ConfigError(f'{path}.learning_rate', f'must be in [0, 1], got {learning_rate}')
    discount = _number(data, 'discount', path, 0.95)
    if not 0.0 < discount <= 1.0:
        raise ConfigError(f'{path}.discount', f'must be in (0, 1], got {discount}')
    energy_bins = _number(data, 'energy_bins', path, 8, integer=True)
    temp_bins = _number(data, 'temp_bins', path, 8, integer=True)
    for key, value in (('energy_bins', energy_bins), ('temp_bins', temp_bins)):
        if value < 1:
            raise ConfigError(f'{path}.{key}', f'must be >= 1, got {value}')
    schedule = _prefixed(path, lambda: EpsilonSchedule(
        start=_number(data, 'epsilon_start', path, 1.0),
        decay=_number(data, 'epsilon_decay', path, 0.99),
        minimum=_number(data, 'epsilon_min', path, 0.05),
    ))
    return TrainingSettings(episodes, learning_rate, discount, energy_bins, temp_bins, schedule)


def parse_forecaster(data, path='forecaster'):
    if data is None:
        return Forecaster()
    _strict(data, {'kind', 'window'}, path)
    return _prefixed(path, lambda: Forecaster(
        kind=data.get('kind', 'rate_extrapolation'),
        window=_number(data, 'window', path, 10, integer=True),
    ))


def parse_init(data, spec, path='init'):
    if data is None:
        return None
    _strict(data, {'x', 'y', 'energy', 'temperature'}, path)
    init = InitialConditions(
        x=_number(data, 'x', path, 0, integer=True),
        y=_number(data, 'y', path, 0, integer=True),
        energy=_number(data, 'energy', path, 1.0),
        temperature=_number(data, 'temperature', path, spec.t_ambient),
    )
    init.validate(spec)
    return init


def parse_modes(data, path='modes'):
    if data is None:
        return ModeThresholds()
    _strict(data, {'e_low', 't_high'}, path)
    return ModeThresholds(
        e_low=_number(data, 'e_low', path, 0.2),
        t_high=_number(data, 't_high', path, 0.8),
    )


def parse_range(value, path):
    """"min:max:count" 字符串或 {"min", "max", "count"} 对象 → (min, max, count)"""
    if isinstance(value, str):
        parts = value.split(':')
        if len(parts) != 3:
            raise ConfigError(path, f'expected min:max:count, got {value!r}')
        try:
            low, high, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(path, f'expected min:max:count, got {value!r}') from None
    elif isinstance(value, dict):
        _strict(value, {'min', 'max', 'count'}, path)
        low = _number(value, 'min', path)
        high = _number(value, 'max', path)
        count = _number(value, 'count', path, integer=True)
    else:
        raise ConfigError(path, 'expected min:max:count')
    if not low < high:
        raise ConfigError(path, f'min must be < max, got {low} and {high}')
    if count < 1:
        raise ConfigError(path, f'count must be >= 1, got {count}')
    return low, high, count


def range_axis(spec_range, path):
    """等距坐标轴；count = 1 时只取 min"""
    low, high, count = spec_range
    if count == 1:
        axis = [low]
    else:
        axis = [low + (high - low) * i / (count - 1) for i in range(count)]
    check_axis(path, axis)
    return axis


def parse_sweep(data, path='sweep'):
    if data is None:
        return SweepSettings()
    _strict(data, {'e0', 't0'}, path)
    e0 = parse_range(data['e0'], f'{path}.e0') if 'e0' in data else None
    t0 = parse_range(data['t0'], f'{path}.t0') if 't0' in data else None
    return SweepSettings(e0, t0)


def parse_seed(value, path='seed'):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f'expected an unsigned 64-bit integer, got {value!r}')
    if not 0 <= value <= SEED_MAX:
        raise ConfigError(path, f'expected an unsigned 64-bit integer, got {value}')
    return value


def config_digest(data):
    canonical = json.dumps(data, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def parse_config(data, base_dir='.', seed=None):
    """解析整个配置文档；seed 参数覆盖文档中的 seed"""
    allowed = {'environment', 'policy', 'reward', 'training', 'forecaster', 'init', 'modes',
               'sweep', 'compare', 'evaluation', 'seed', 'output_dir'}
    _strict(data, allowed, '')
    if 'environment' not in data:
        raise ConfigError('environment', 'missing required key')

    effective = dict(data)
    if seed is not None:
        effective['seed'] = seed
    spec = parse_environment(data['environment'])

    compare = data.get('compare')
    compare_table = None
    if compare is not None:
        _strict(compare, {'table'}, 'compare')
        compare_table = compare.get('table')
        if compare_table is not None and not isinstance(compare_table, str):
            raise ConfigError('compare.table', 'expected a file path')

    evaluation = data.get('evaluation')
    seeds = 1
    if evaluation is not None:
        _strict(evaluation, {'seeds'}, 'evaluation')
        seeds = _number(evaluation, 'seeds', 'evaluation', 1, integer=True)
        if seeds < 1:
            raise ConfigError('evaluation.seeds', f'must be >= 1, got {seeds}')

    output_dir = data.get('output_dir')
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError('output_dir', 'expected a directory path')

    return RunConfig(
        environment=spec,
        policy=parse_policy(data.get('policy')),
        reward=parse_reward(data.get('reward')),
        training=parse_training(data.get('training')),
        forecaster=parse_forecaster(data.get('forecaster')),
        init=parse_init(data.get('init'), spec),
        modes=parse_modes(data.get('modes')),
        sweep=parse_sweep(data.get('sweep')),
        compare_table=compare_table,
        evaluation_seeds=seeds,
        seed=parse_seed(effective.get('seed', 0)),
        output_dir=output_dir,
        digest=config_digest(effective),
        base_dir=base_dir,
    )


def load_config(path, seed=None):
    """读取配置文件；读取失败抛 OSError，内容错误抛 ConfigError"""
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise ConfigError('config', f'not UTF-8 text: {e}') from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError('config', f'invalid JSON: {e}') from None
    return parse_config(data, base_dir=os.path.dirname(os.path.abspath(path)), seed=seed)

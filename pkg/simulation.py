"""回合运行、轨迹记录、行为模式分类与初始条件扫描"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from dynamics import ACTIONS, AgentState, InitialConditions, apply_action, step_energy, step_thermal
from environment import dissipation_at, potential_at, spec_digest
from errors import ConfigError, SimulationUsageError
from metrics import Forecaster, eas, evs, forecast_series
from policies import select_action

logger = logging.getLogger(__name__)

REPLAY_TOLERANCE = 1e-9


class Mode(str, Enum):
    """行为模式"""
    DORMANT = 'dormant'
    ACTIVE = 'active'
    DEGRADED = 'degraded'


MODE_ORDER = (Mode.DORMANT, Mode.ACTIVE, Mode.DEGRADED)


@dataclass(frozen=True)
class ModeThresholds:
    """模式阈值：低能量比例 e_low、高温比例 t_high"""
    e_low: float = 0.2
    t_high: float = 0.8

    def __post_init__(self):
        for name in ('e_low', 't_high'):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f'modes.{name}', f'must be in (0, 1), got {value}')

    def to_dict(self):
        return {'e_low': self.e_low, 't_high': self.t_high}


@dataclass(frozen=True)
class StepRecord:
    """轨迹中的一步：步前状态、动作、收支、模式与寿命预测"""
    step: int
    x: int
    y: int
    energy: float
    temperature: float
    action: object
    e_in: float
    e_out: float
    mode: Mode
    forecast: float


@dataclass
class Trajectory:
    """按时间排序的步记录与终止原因"""
    env_digest: str
    seed: int
    steps: list
    termination: Optional[object]
    final_state: Optional[AgentState]
    max_steps: int
    t_crit: float
    t_ambient: float
    e_cap: float
    policy: str = ''

    @property
    def lifespan(self):
        return len(self.steps)

    def step_temperatures(self):
        """每一步结束时的温度；导入的日志没有终态时直接用记录值"""
        if self.final_state is None:
            return [r.temperature for r in self.steps]
        after = [r.temperature for r in self.steps[1:]]
        after.append(self.final_state.temperature)
        return after

    def energy_series(self):
        """能量序列，含初始值与终态（长度为步数 + 1）"""
        series = [r.energy for r in self.steps]
        if self.final_state is not None:
            series.append(self.final_state.energy)
        return series

    def compute_count(self):
        return sum(1 for r in self.steps if r.action.kind == 'compute')


@dataclass(frozen=True)
class HorizonMap:
    """初始能量 × 初始温度 → 经验寿命"""
    e0_axis: tuple
    t0_axis: tuple
    cells: tuple  # cells[i][j]: t0_axis[i], e0_axis[j]


@dataclass(frozen=True)
class HeatmapRow:
    step: int
    energy: float
    temperature: float
    viability: float


def classify_mode(state, action, spec, thresholds=ModeThresholds()):
    """degraded > dormant > active"""
    stressed = (
        state.energy < thresholds.e_low * spec.e_cap
        or state.temperature > spec.t_ambient + thresholds.t_high * (spec.t_crit - spec.t_ambient)
    )
    if stressed and action.kind != 'idle':
        return Mode.DEGRADED
    if action.kind == 'idle':
        return Mode.DORMANT
    return Mode.ACTIVE


def simulate(spec, policy, state, rng):
    """核心循环：返回 (各步 (state, action, outcome), 终态)"""
    steps = []
    while True:
        action = select_action(policy, state, spec, rng)
        outcome = apply_action(state, action, spec)
        steps.append((state, action, outcome))
        state = outcome.next_state
        if outcome.terminal is not None:
            return steps, outcome


def run_episode(spec, policy, init, seed, forecaster=Forecaster(), thresholds=ModeThresholds()):
    """运行一个回合直到终止，记录每步账目、模式与预测"""
    start = init.to_state(spec)
    rng = np.random.default_rng(seed)
    transitions, last = simulate(spec, policy, start, rng)

    partial = [
        StepRecord(state.step, state.x, state.y, state.energy, state.temperature, action,
                   outcome.e_in, outcome.e_out, classify_mode(state, action, spec, thresholds), 0.0)
        for state, action, outcome in transitions
    ]
    forecasts = forecast_series(forecaster, partial, spec.max_steps, lifespan=len(partial))
    records = [
        StepRecord(r.step, r.x, r.y, r.energy, r.temperature, r.action,
                   r.e_in, r.e_out, r.mode, f)
        for r, f in zip(partial, forecasts)
    ]
    trajectory = Trajectory(
        env_digest=spec_digest(spec),
        seed=seed,
        steps=records,
        termination=last.terminal,
        final_state=last.next_state,
        max_steps=spec.max_steps,
        t_crit=spec.t_crit,
        t_ambient=spec.t_ambient,
        e_cap=spec.e_cap,
        policy=policy.describe(),
    )
    logger.debug('episode seed=%s policy=%s lifespan=%d cause=%s',
                 seed, trajectory.policy, trajectory.lifespan, last.terminal.value)
    return trajectory


def episode_lifespan(spec, policy, init, seed):
    """只求寿命，不构造完整轨迹"""
    transitions, _ = simulate(spec, policy, init.to_state(spec), np.random.default_rng(seed))
    return len(transitions)


def check_axis(name, axis):
    if not axis:
        raise ConfigError(name, 'axis must not be empty')
    for a, b in zip(axis, axis[1:]):
        if not b > a:
            raise ConfigError(name, 'axis must be strictly increasing')


def sweep_horizon_map(spec, policy, e0_axis, t0_axis, base_seed, origin=(0, 0), threads=1):
    """扫描初始能量与初始温度；所有格子使用同一个种子，结果与线程数无关"""
    check_axis('sweep.e0', e0_axis)
    check_axis('sweep.t0', t0_axis)
    x, y = origin
    jobs = [InitialConditions(x, y, e0, t0) for t0 in t0_axis for e0 in e0_axis]
    for job in jobs:
        job.validate(spec)

    def lifespan(job):
        return episode_lifespan(spec, policy, job, base_seed)

    logger.info('sweep %dx%d cells, threads=%d', len(t0_axis), len(e0_axis), threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flat = list(pool.map(lifespan, jobs))
    else:
        flat = [lifespan(job) for job in jobs]

    width = len(e0_axis)
    cells = tuple(tuple(flat[i * width:(i + 1) * width]) for i in range(len(t0_axis)))
    return HorizonMap(tuple(e0_axis), tuple(t0_axis), cells)


def heatmap_channels(trajectory):
    """归一化的能量、温度与前缀 EAS（作为可行性指数），含终态一行"""
    if not trajectory.steps:
        raise SimulationUsageError('trajectory has no steps')
    span = trajectory.t_crit - trajectory.t_ambient
    states = [(r.step, r.energy, r.temperature) for r in trajectory.steps]
    if trajectory.final_state is not None:
        fs = trajectory.final_state
        states.append((fs.step, fs.energy, fs.temperature))

    after = trajectory.step_temperatures()
    rows = []
    for k, (step, energy, temperature) in enumerate(states):
        rows.append(HeatmapRow(
            step=step,
            energy=_unit(energy / trajectory.e_cap),
            temperature=_unit((temperature - trajectory.t_ambient) / span),
            viability=_unit(_prefix_eas(trajectory, k, after)),
        ))
    return rows


def _unit(value):
    return min(1.0, max(0.0, value))


def _prefix_eas(trajectory, k, after):
    """前 k 步上的 EAS；k = 0 时为 0"""
    if k == 0:
        return 0.0
    prefix = replace(trajectory, steps=trajectory.steps[:k])
    over = sum(1 for t in after[:k] if t > trajectory.t_crit)
    # 真实剩余寿命以完整轨迹为准
    errors = [abs(r.forecast - (trajectory.lifespan - r.step)) for r in prefix.steps]
    return eas(evs(prefix), 1.0 - over / k, sum(errors) / k)


def mode_transitions(trajectory):
    """3×3 模式转移计数 counts[from][to]（dormant, active, degraded 顺序）"""
    counts = [[0] * len(MODE_ORDER) for _ in MODE_ORDER]
    index = {mode: i for i, mode in enumerate(MODE_ORDER)}
    for a, b in zip(trajectory.steps, trajectory.steps[1:]):
        counts[index[a.mode]][index[b.mode]] += 1
    return counts


def mode_runs(trajectory):
    """模式序列的游程编码 [(mode, start_step, length), ...]"""
    runs = []
    for record in trajectory.steps:
        if runs and runs[-1][0] == record.mode:
            mode, start, length = runs[-1]
            runs[-1] = (mode, start, length + 1)
        else:
            runs.append((record.mode, record.step, 1))
    return runs


def phase_trajectory(trajectory):
    """能量-温度相轨迹 [(step, energy, temperature), ...]，含终态"""
    path = [(r.step, r.energy, r.temperature) for r in trajectory.steps]
    if trajectory.final_state is not None:
        fs = trajectory.final_state
        path.append((fs.step, fs.energy, fs.temperature))
    return path


def replay_check(trajectory, spec):
    """用能量/温度递推式从前一点重算每一点，返回不一致的步号"""
    path = phase_trajectory(trajectory)
    mismatches = []
    for record, (step, energy, temperature) in zip(trajectory.steps, path[1:]):
        p = potential_at(spec, record.x, record.y, record.step)
        d = dissipation_at(spec, record.x, record.y, record.step)
        e_next, _, _ = step_energy(record.energy, p, record.action, spec)
        t_next = step_thermal(record.temperature, record.action, d, spec)
        if abs(e_next - energy) > REPLAY_TOLERANCE or abs(t_next - temperature) > REPLAY_TOLERANCE:
            mismatches.append(step)
    return mismatches


def max_lifespan(spec, init):
    """确定性世界中所有动作序列能达到的最长寿命（带记忆的深度优先搜索）"""
    if not (spec.harvest_field.is_static and spec.dissipation_field.is_static):
        raise SimulationUsageError('exhaustive search needs a static world')
    memo = {}

    def explore(state):
        key = (state.x, state.y, state.energy, state.temperature, state.step)
        if key in memo:
            return memo[key]
        best = state.step
        for action in ACTIONS:
            outcome = apply_action(state, action, spec)
            if outcome.terminal is not None:
                length = outcome.next_state.step
            else:
                length = explore(outcome.next_state)
            if length > best:
                best = length
            if best == spec.max_steps:
                break
        memo[key] = best
        return best

    return explore(init.to_state(spec))

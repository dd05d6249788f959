"""合成代谢：动作执行、能量更新、温度更新与终止判定"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from environment import dissipation_at, potential_at
from errors import ConfigError, SimulationUsageError

# 方向位移 (dx, dy)，y 轴向下
DIRECTIONS = {
    'N': (0, -1),
    'E': (1, 0),
    'S': (0, 1),
    'W': (-1, 0),
}
DIRECTION_WORDS = {'N': 'north', 'E': 'east', 'S': 'south', 'W': 'west'}


@dataclass(frozen=True)
class Action:
    """动作：move(direction)、compute 或 idle"""
    kind: str
    direction: Optional[str] = None

    def __post_init__(self):
        if self.kind == 'move':
            if self.direction not in DIRECTIONS:
                raise ValueError(f'move needs a direction in N/E/S/W, got {self.direction!r}')
        elif self.kind in ('idle', 'compute'):
            if self.direction is not None:
                raise ValueError(f'{self.kind} takes no direction')
        else:
            raise ValueError(f'unknown action kind {self.kind!r}')

    @property
    def label(self):
        if self.kind == 'move':
            return f'move_{DIRECTION_WORDS[self.direction]}'
        return self.kind

    @classmethod
    def from_label(cls, label):
        for action in ACTIONS:
            if action.label == label:
                return action
        raise ValueError(f'unknown action label {label!r}')

    def __str__(self):
        return self.label


IDLE = Action('idle')
COMPUTE = Action('compute')
MOVE_N = Action('move', 'N')
MOVE_E = Action('move', 'E')
MOVE_S = Action('move', 'S')
MOVE_W = Action('move', 'W')

# 固定的平局顺序：idle < N < E < S < W < compute
ACTIONS = (IDLE, MOVE_N, MOVE_E, MOVE_S, MOVE_W, COMPUTE)
ACTION_INDEX = {action: i for i, action in enumerate(ACTIONS)}


class Termination(str, Enum):
    """终止原因"""
    ENERGY_DEPLETED = 'energy_depleted'
    OVERHEATED = 'overheated'
    MAX_STEPS = 'max_steps'

    @property
    def is_failure(self):
        return self is not Termination.MAX_STEPS


@dataclass(frozen=True)
class AgentState:
    """智能体内部状态 s_t = (e_t, T_t, a_t) 加位置与时间步"""
    x: int
    y: int
    energy: float
    temperature: float
    last_action: Optional[Action] = None
    step: int = 0


@dataclass(frozen=True)
class StepOutcome:
    """单步结果：下一状态、收支账目与终止原因"""
    next_state: AgentState
    e_in: float
    e_out: float
    terminal: Optional[Termination] = None


def step_energy(e, p_local, action, spec):
    """能量更新：e' = e + η·P·δ_a − c(a)，返回 (e', e_in, e_out)"""
    e_in = spec.eta * p_local * spec.gain_factors.of(action.kind)
    e_out = spec.action_costs.of(action.kind)
    return e + (e_in - e_out), e_in, e_out


def step_thermal(T, action, d_local, spec):
    """温度更新：T' = T + α·h(a) − β·D，不低于环境温度"""
    t_next = T + spec.alpha * spec.action_heat.of(action.kind) - spec.beta * d_local
    return max(spec.t_ambient, t_next)


def destination(x, y, action, spec):
    """动作结束后所在的格子（边界处截断）"""
    if action.kind != 'move':
        return x, y
    dx, dy = DIRECTIONS[action.direction]
    nx = min(max(x + dx, 0), spec.width - 1)
    ny = min(max(y + dy, 0), spec.height - 1)
    return nx, ny


def terminal_cause(state, spec):
    """判断状态是否已终止；能量耗尽优先于过热"""
    if state.energy <= 0:
        return Termination.ENERGY_DEPLETED
    if state.temperature > spec.t_crit:
        return Termination.OVERHEATED
    if state.step >= spec.max_steps:
        return Termination.MAX_STEPS
    return None


def apply_action(state, action, spec):
    """执行一步：在移动前的位置采样势场，然后更新位置、能量与温度"""
    if terminal_cause(state, spec) is not None:
        raise SimulationUsageError(f'cannot step terminal state at t={state.step}')

    p_local = potential_at(spec, state.x, state.y, state.step)
    d_local = dissipation_at(spec, state.x, state.y, state.step)
    e_next, e_in, e_out = step_energy(state.energy, p_local, action, spec)
    t_next = step_thermal(state.temperature, action, d_local, spec)
    nx, ny = destination(state.x, state.y, action, spec)

    next_state = replace(
        state, x=nx, y=ny, energy=e_next, temperature=t_next,
        last_action=action, step=state.step + 1,
    )
    return StepOutcome(next_state, e_in, e_out, terminal_cause(next_state, spec))


@dataclass(frozen=True)
class InitialConditions:
    """初始条件：起点位置、初始能量与初始温度"""
    x: int
    y: int
    energy: float
    temperature: float

    def validate(self, spec):
        if not spec.in_bounds(self.x, self.y):
            raise ConfigError('init.x' if not 0 <= self.x < spec.width else 'init.y',
                              f'({self.x}, {self.y}) outside {spec.width}x{spec.height} grid')
        if not self.energy > 0:
            raise ConfigError('init.energy', f'must be > 0, got {self.energy}')
        if not spec.t_ambient <= self.temperature <= spec.t_crit:
            raise ConfigError('init.temperature',
                              f'must be in [{spec.t_ambient}, {spec.t_crit}], got {self.temperature}')

    def to_state(self, spec):
        self.validate(spec)
        return AgentState(self.x, self.y, float(self.energy), float(self.temperature))

    def to_dict(self):
        return {'x': self.x, 'y': self.y, 'energy': self.energy, 'temperature': self.temperature}

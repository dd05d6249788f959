"""三种行为策略：固定计算、贪婪采能、表格 Q-learning 生存策略"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from dynamics import (
    ACTION_INDEX, ACTIONS, COMPUTE, IDLE, MOVE_E, MOVE_N, MOVE_S, MOVE_W,
    InitialConditions, apply_action, destination, terminal_cause,
)
from environment import potential_at
from errors import ConfigError, SimulationUsageError

logger = logging.getLogger(__name__)

POLICY_KINDS = ('fixed_compute', 'greedy_harvest', 'q_learning')
GREEDY_CANDIDATES = (IDLE, MOVE_N, MOVE_E, MOVE_S, MOVE_W)


@dataclass(frozen=True)
class RewardSpec:
    """生存奖励：存活奖励 w1、计算奖励 w2、死亡惩罚 w3"""
    alive_bonus: float = 1.0
    compute_bonus: float = 0.2
    death_penalty: float = 10.0

    def __post_init__(self):
        for name in ('alive_bonus', 'compute_bonus', 'death_penalty'):
            if getattr(self, name) < 0:
                raise ConfigError(name, f'must be >= 0, got {getattr(self, name)}')

    def to_dict(self):
        return {'alive_bonus': self.alive_bonus, 'compute_bonus': self.compute_bonus,
                'death_penalty': self.death_penalty}


@dataclass(frozen=True)
class EpsilonSchedule:
    """指数衰减的探索率：ε_k = max(ε_min, ε_0·decay^k)"""
    start: float = 1.0
    decay: float = 0.99
    minimum: float = 0.05

    def __post_init__(self):
        for name in ('start', 'decay', 'minimum'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f'epsilon_{name}', f'must be in [0, 1], got {value}')

    def value(self, episode):
        return max(self.minimum, self.start * self.decay ** episode)


@dataclass
class QTable:
    """离散状态 (能量档, 温度档, 格子) → 各动作价值；未访问的键返回零初始化值"""
    energy_bins: int
    temp_bins: int
    n_cells: int
    e_cap: float
    t_ambient: float
    t_crit: float
    learning_rate: float = 0.1
    discount: float = 0.95
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.energy_bins < 1:
            raise ConfigError('energy_bins', f'must be >= 1, got {self.energy_bins}')
        if self.temp_bins < 1:
            raise ConfigError('temp_bins', f'must be >= 1, got {self.temp_bins}')
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ConfigError('learning_rate', f'must be in [0, 1], got {self.learning_rate}')
        if not 0.0 < self.discount <= 1.0:
            raise ConfigError('discount', f'must be in (0, 1], got {self.discount}')

    @classmethod
    def for_environment(cls, spec, energy_bins=8, temp_bins=8, learning_rate=0.1, discount=0.95):
        return cls(energy_bins, temp_bins, spec.n_cells, spec.e_cap,
                   spec.t_ambient, spec.t_crit, learning_rate, discount)

    def discretize(self, state, spec):
        """AgentState → (能量档, 温度档, 格子编号)"""
        e_bin = int(state.energy / self.e_cap * self.energy_bins)
        e_bin = min(self.energy_bins - 1, max(0, e_bin))
        span = self.t_crit - self.t_ambient
        t_bin = int((state.temperature - self.t_ambient) / span * self.temp_bins)
        t_bin = min(self.temp_bins - 1, max(0, t_bin))
        return e_bin, t_bin, spec.cell_index(state.x, state.y)

    def check_key(self, key):
        e_bin, t_bin, cell = key
        if not (0 <= e_bin < self.energy_bins and 0 <= t_bin < self.temp_bins and 0 <= cell < self.n_cells):
            raise SimulationUsageError(f'state key {key} outside table bounds')

    def q_values(self, key):
        row = self.values.get(key)
        return row if row is not None else [0.0] * len(ACTIONS)

    def best_action(self, key):
        """按固定平局顺序取最大值"""
        row = self.q_values(key)
        best = 0
        for i in range(1, len(row)):
            if row[i] > row[best]:
                best = i
        return ACTIONS[best]

    def same_as(self, other):
        """比较两张表的取值（忽略仍为零初始化的行）"""
        keys = set(self.values) | set(other.values)
        return all(self.q_values(k) == other.q_values(k) for k in keys)

    def to_dict(self):
        return {
            'energy_bins': self.energy_bins,
            'temp_bins': self.temp_bins,
            'n_cells': self.n_cells,
            'e_cap': self.e_cap,
            't_ambient': self.t_ambient,
            't_crit': self.t_crit,
            'learning_rate': self.learning_rate,
            'discount': self.discount,
            'actions': [a.label for a in ACTIONS],
            'values': {f'{e},{t},{c}': list(row) for (e, t, c), row in sorted(self.values.items())},
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError('qtable', 'expected a JSON object')
        try:
            table = cls(
                energy_bins=int(data['energy_bins']),
                temp_bins=int(data['temp_bins']),
                n_cells=int(data['n_cells']),
                e_cap=float(data['e_cap']),
                t_ambient=float(data['t_ambient']),
                t_crit=float(data['t_crit']),
                learning_rate=float(data['learning_rate']),
                discount=float(data['discount']),
            )
        except KeyError as e:
            raise ConfigError(f'qtable.{e.args[0]}', 'missing key') from None
        except (TypeError, ValueError) as e:
            raise ConfigError('qtable', f'invalid header value: {e}') from None
        if data.get('actions', [a.label for a in ACTIONS]) != [a.label for a in ACTIONS]:
            raise ConfigError('qtable.actions', 'action order does not match this simulator')
        values = data.get('values', {})
        if not isinstance(values, dict):
            raise ConfigError('qtable.values', 'expected an object of "e,t,cell": [values]')
        for raw_key, row in values.items():
            path = f'qtable.values.{raw_key}'
            try:
                key = tuple(int(part) for part in raw_key.split(','))
            except ValueError:
                raise ConfigError(path, 'expected key "energy_bin,temp_bin,cell"') from None
            try:
                table.check_key(key)
            except (SimulationUsageError, ValueError):
                raise ConfigError(path, 'key outside table bounds') from None
            if not isinstance(row, list) or len(row) != len(ACTIONS):
                raise ConfigError(path, f'expected a list of {len(ACTIONS)} numbers')
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in row):
                raise ConfigError(path, 'values must be numbers')
            table.values[key] = [float(v) for v in row]
        return table

    def matches(self, spec):
        """表的离散化参数是否与环境一致"""
        return (self.n_cells == spec.n_cells and self.e_cap == spec.e_cap
                and self.t_ambient == spec.t_ambient and self.t_crit == spec.t_crit)


@dataclass(frozen=True)
class Policy:
    """策略选择器；q_learning 需要一张 QTable"""
    kind: str
    table: Optional[QTable] = None
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError('policy.kind', f'unknown policy {self.kind!r}')
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError('policy.epsilon', f'must be in [0, 1], got {self.epsilon}')
        if self.kind == 'q_learning' and self.table is None:
            raise ConfigError('policy.table', 'q_learning policy needs a trained table')

    def evaluation(self):
        """评估模式：强制 ε = 0"""
        return replace(self, epsilon=0.0)

    def describe(self):
        if self.kind == 'q_learning':
            return f'q_learning(epsilon={self.epsilon})'
        return self.kind


def greedy_estimate(action, state, spec):
    """贪婪采能的即时净能量估计：在动作到达的格子上 η·P·δ_a − c(a)"""
    x, y = destination(state.x, state.y, action, spec)
    p = potential_at(spec, x, y, state.step)
    return spec.eta * p * spec.gain_factors.of(action.kind) - spec.action_costs.of(action.kind)


def epsilon_greedy(table, key, epsilon, rng):
    if epsilon > 0.0 and rng.random() < epsilon:
        return ACTIONS[int(rng.integers(len(ACTIONS)))]
    return table.best_action(key)


def select_action(policy, state, spec, rng=None):
    """按策略选择动作"""
    if terminal_cause(state, spec) is not None:
        raise SimulationUsageError(f'cannot select an action for a terminal state at t={state.step}')

    if policy.kind == 'fixed_compute':
        return COMPUTE

    if policy.kind == 'greedy_harvest':
        best, best_value = None, None
        for action in GREEDY_CANDIDATES:
            value = greedy_estimate(action, state, spec)
            if best is None or value > best_value:
                best, best_value = action, value
        return best

    key = policy.table.discretize(state, spec)
    return epsilon_greedy(policy.table, key, policy.epsilon, rng)


def reward(outcome, action, rspec):
    """单步奖励：存活 + 计算奖励 − 失败惩罚；到达 max_steps 不惩罚"""
    alive = outcome.terminal is None
    failed = outcome.terminal is not None and outcome.terminal.is_failure
    value = 0.0
    if alive:
        value += rspec.alive_bonus
        if action.kind == 'compute':
            value += rspec.compute_bonus
    if failed:
        value -= rspec.death_penalty
    return value


def q_update(table, s, a, r, s_next, terminal):
    """一步 Q-learning 更新，原地修改并返回 table"""
    if table.learning_rate == 0.0:
        return table
    row = table.values.get(s)
    if row is None:
        row = [0.0] * len(ACTIONS)
        table.values[s] = row
    bootstrap = 0.0 if terminal else max(table.q_values(s_next))
    i = ACTION_INDEX[a]
    row[i] = row[i] + table.learning_rate * (r + table.discount * bootstrap - row[i])
    return table


@dataclass(frozen=True)
class EpisodeLog:
    """训练日志的一行"""
    episode: int
    length: int
    total_return: float
    cause: str
    epsilon: float


def train(env, rspec, episodes, seed, schedule=None, init=None,
          learning_rate=0.1, discount=0.95, energy_bins=8, temp_bins=8):
    """训练生存策略；给定 seed 时结果完全确定"""
    if episodes < 1:
        raise ConfigError('training.episodes', f'must be >= 1, got {episodes}')
    schedule = schedule or EpsilonSchedule()
    init = init or InitialConditions(0, 0, 1.0, env.t_ambient)
    start = init.to_state(env)

    table = QTable.for_environment(env, energy_bins, temp_bins, learning_rate, discount)
    rng = np.random.default_rng(seed)
    log = []
    report_every = max(1, episodes // 10)

    for episode in range(episodes):
        epsilon = schedule.value(episode)
        state = start
        total = 0.0
        while True:
            key = table.discretize(state, env)
            action = epsilon_greedy(table, key, epsilon, rng)
            outcome = apply_action(state, action, env)
            r = reward(outcome, action, rspec)
            failed = outcome.terminal is not None and outcome.terminal.is_failure
            q_update(table, key, action, r, table.discretize(outcome.next_state, env), failed)
            total += r
            state = outcome.next_state
            if outcome.terminal is not None:
                break
        log.append(EpisodeLog(episode, state.step, total, outcome.terminal.value, epsilon))

        if (episode + 1) % report_every == 0:
            window = log[-report_every:]
            mean_length = sum(item.length for item in window) / len(window)
            logger.info('episode %d/%d epsilon=%.3f mean_length=%.1f',
                        episode + 1, episodes, epsilon, mean_length)

    return table, log

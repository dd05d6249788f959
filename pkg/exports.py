"""产物导出：轨迹、热力图、寿命图、训练日志等 CSV 与 JSON 文件

所有浮点数统一保留 9 位有效数字，保证同样的输入得到逐字节相同的文件。
"""
import json
import math
import os

import pandas as pd

from dynamics import Action
from errors import ConfigError
from policies import QTable
from simulation import MODE_ORDER, Mode, StepRecord, Trajectory, mode_transitions, phase_trajectory

FLOAT_FORMAT = '%.9g'
TRAJECTORY_COLUMNS = ['step', 'x', 'y', 'energy', 'temperature', 'action', 'e_in', 'e_out', 'mode', 'forecast']
HORIZON_CORNER = 't0\\e0'


def fmt(value):
    """浮点数 → 9 位有效数字的字符串"""
    return format(value, '.9g')


def round_floats(data):
    """递归地把浮点数截成 9 位有效数字，整数与字符串原样保留"""
    if isinstance(data, float):
        if math.isnan(data) or math.isinf(data):
            return None
        return float(fmt(data))
    if isinstance(data, dict):
        return {key: round_floats(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [round_floats(value) for value in data]
    return data


def termination_label(cause):
    """终止原因的文字说明"""
    cause_map = {
        'energy_depleted': '能量耗尽',
        'overheated': '过热',
        'max_steps': '达到最大步数',
    }
    value = getattr(cause, 'value', cause)
    return cause_map.get(value, value)


def mode_label(mode):
    """行为模式的文字说明"""
    mode_map = {
        'dormant': '休眠',
        'active': '活跃',
        'degraded': '降级',
    }
    value = getattr(mode, 'value', mode)
    return mode_map.get(value, value)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write_frame(frame, path, **kwargs):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n', na_rep='', **kwargs)
    return path


# ---------- CSV ----------

def write_trajectory_csv(trajectory, path):
    rows = [{
        'step': r.step,
        'x': r.x,
        'y': r.y,
        'energy': r.energy,
        'temperature': r.temperature,
        'action': r.action.label,
        'e_in': r.e_in,
        'e_out': r.e_out,
        'mode': r.mode.value,
        'forecast': r.forecast,
    } for r in trajectory.steps]
    return _write_frame(pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS), path)


def read_trajectory_csv(path, spec, seed=0, env_digest=''):
    """读回轨迹 CSV；导入的轨迹没有终态，温度指标直接使用记录值"""
    frame = pd.read_csv(path, dtype={'action': str, 'mode': str})
    missing = [c for c in TRAJECTORY_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError('trajectory', f'missing columns {missing}')
    steps = []
    for row in frame.itertuples(index=False):
        try:
            action = Action.from_label(row.action)
            mode = Mode(row.mode)
        except ValueError as e:
            raise ConfigError('trajectory', str(e)) from None
        steps.append(StepRecord(
            int(row.step), int(row.x), int(row.y), float(row.energy), float(row.temperature),
            action, float(row.e_in), float(row.e_out), mode, float(row.forecast),
        ))
    return Trajectory(
        env_digest=env_digest,
        seed=seed,
        steps=steps,
        termination=None,
        final_state=None,
        max_steps=spec.max_steps,
        t_crit=spec.t_crit,
        t_ambient=spec.t_ambient,
        e_cap=spec.e_cap,
    )


def write_heatmap_csv(rows, path):
    frame = pd.DataFrame(
        [{'step': r.step, 'energy': r.energy, 'temperature': r.temperature, 'viability': r.viability}
         for r in rows],
        columns=['step', 'energy', 'temperature', 'viability'],
    )
    return _write_frame(frame, path)


def write_horizon_map_csv(horizon_map, path):
    """第一行为 e0 轴，第一列为 T0 轴"""
    frame = pd.DataFrame(
        [list(row) for row in horizon_map.cells],
        index=[fmt(t0) for t0 in horizon_map.t0_axis],
        columns=[fmt(e0) for e0 in horizon_map.e0_axis],
    )
    frame.to_csv(path, index_label=HORIZON_CORNER, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def read_horizon_map_csv(path):
    """返回 (e0 轴, T0 轴, cells)"""
    frame = pd.read_csv(path, index_col=0)
    e0_axis = [float(c) for c in frame.columns]
    t0_axis = [float(i) for i in frame.index]
    return e0_axis, t0_axis, frame.to_numpy(dtype=int).tolist()


def write_training_log_csv(log, path):
    frame = pd.DataFrame(
        [{'episode': item.episode, 'length': item.length, 'return': item.total_return,
          'cause': item.cause, 'epsilon': item.epsilon} for item in log],
        columns=['episode', 'length', 'return', 'cause', 'epsilon'],
    )
    return _write_frame(frame, path)


def write_compare_csv(series, path):
    """series: {'fixed': [...], 'greedy': [...], 'survival': [...]}；死亡之后的格子留空"""
    length = max(len(values) for values in series.values())
    columns = {'step': list(range(length))}
    for name in ('fixed', 'greedy', 'survival'):
        values = series[name]
        columns[name] = [float(v) for v in values] + [math.nan] * (length - len(values))
    frame = pd.DataFrame(columns, columns=['step', 'fixed', 'greedy', 'survival'])
    return _write_frame(frame, path)


def write_modes_csv(trajectory, path):
    counts = mode_transitions(trajectory)
    rows = [
        {'from': a.value, 'to': b.value, 'count': counts[i][j]}
        for i, a in enumerate(MODE_ORDER)
        for j, b in enumerate(MODE_ORDER)
    ]
    return _write_frame(pd.DataFrame(rows, columns=['from', 'to', 'count']), path)


def write_phase_csv(trajectory, path):
    frame = pd.DataFrame(phase_trajectory(trajectory), columns=['step', 'energy', 'temperature'])
    return _write_frame(frame, path)


# ---------- JSON ----------

def write_json(data, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(round_floats(data), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write('\n')
    return path


def read_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def write_qtable(table, path):
    """Q 表保留完整精度，截断可能改变贪婪动作"""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(table.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_qtable(path):
    try:
        data = read_json(path)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError('policy.table', f'invalid Q-table file: {e}') from None
    if not isinstance(data, dict):
        raise ConfigError('policy.table', 'expected a JSON object')
    return QTable.from_dict(data)


def final_state_dict(state):
    if state is None:
        return None
    return {'x': state.x, 'y': state.y, 'energy': state.energy,
            'temperature': state.temperature, 'step': state.step}

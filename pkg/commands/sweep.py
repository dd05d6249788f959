import os

import click
from flask import Blueprint, current_app

from commands.common import build_policy, common_options, handle_errors, manifest, prepare, record_run
from config import parse_range, range_axis
from errors import ConfigError
from exports import write_horizon_map_csv, write_json
from simulation import sweep_horizon_map

sweep_bp = Blueprint('sweep', __name__, cli_group=None)


def resolve_axis(flag_value, configured, key):
    """命令行的 min:max:count 优先于配置中的 sweep 段"""
    if flag_value is not None:
        spec_range = parse_range(flag_value, key)
    elif configured is not None:
        spec_range = configured
    else:
        raise ConfigError(key, 'missing range (min:max:count)')
    return range_axis(spec_range, key)


@sweep_bp.cli.command('sweep')
@common_options
@click.option('--e0', 'e0_range', default=None, help='初始能量范围 min:max:count')
@click.option('--t0', 't0_range', default=None, help='初始温度范围 min:max:count')
@click.option('--threads', type=click.IntRange(min=1), default=None, help='并行线程数（不影响输出）')
@handle_errors
def sweep_command(config_path, out_dir, seed, e0_range, t0_range, threads):
    """扫描初始能量 × 初始温度，导出经验寿命图"""
    cfg, out_dir = prepare(config_path, out_dir, seed)
    e0_axis = resolve_axis(e0_range, cfg.sweep.e0, 'sweep.e0')
    t0_axis = resolve_axis(t0_range, cfg.sweep.t0, 'sweep.t0')
    threads = threads or current_app.config['ENERGENTIC_THREADS']
    policy = build_policy(cfg).evaluation()
    start = cfg.start()

    current_app.logger.info('sweep: %d x %d cells, threads=%d', len(t0_axis), len(e0_axis), threads)
    horizon_map = sweep_horizon_map(cfg.environment, policy, e0_axis, t0_axis, cfg.seed,
                                    origin=(start.x, start.y), threads=threads)

    artifacts = {'horizon_map': 'horizon_map.csv'}
    write_horizon_map_csv(horizon_map, os.path.join(out_dir, artifacts['horizon_map']))
    write_json(manifest(
        'sweep', cfg, artifacts,
        policy=policy.describe(),
        e0_axis=list(e0_axis),
        t0_axis=list(t0_axis),
    ), os.path.join(out_dir, 'manifest.json'))

    record_run('sweep', cfg, out_dir, artifacts, policy=policy.describe())
    click.echo(f'sweep: {len(t0_axis)}x{len(e0_axis)} horizon map -> {out_dir}')

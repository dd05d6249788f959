import os

import click
from flask import Blueprint, current_app

from commands.common import common_options, handle_errors, load_table, manifest, prepare, record_run
from exports import write_compare_csv, write_json
from metrics import build_report
from policies import Policy
from simulation import run_episode

compare_bp = Blueprint('compare', __name__, cli_group=None)


def comparison_policies(cfg):
    """固定计算、贪婪采能与训练好的生存策略（评估时 ε = 0）"""
    path = cfg.compare_table
    key = 'compare.table'
    if path is None and cfg.policy.kind == 'q_learning':
        path, key = cfg.policy.table, 'policy.table'
    table = load_table(cfg, path, key)
    return {
        'fixed': Policy('fixed_compute'),
        'greedy': Policy('greedy_harvest'),
        'survival': Policy('q_learning', table),
    }


@compare_bp.cli.command('compare')
@common_options
@handle_errors
def compare_command(config_path, out_dir, seed):
    """三种策略在同一世界、同一初始条件下的能量曲线对比"""
    cfg, out_dir = prepare(config_path, out_dir, seed)
    policies = comparison_policies(cfg)

    series = {}
    summary = {}
    for name, policy in policies.items():
        trajectory = run_episode(cfg.environment, policy, cfg.start(), cfg.seed, cfg.forecaster, cfg.modes)
        series[name] = trajectory.energy_series()
        report = build_report(trajectory)
        summary[name] = dict(
            report.to_dict(with_series=False),
            policy=trajectory.policy,
            termination=trajectory.termination.value,
            compute_count=trajectory.compute_count(),
        )
        current_app.logger.info('compare: %s lifespan=%d cause=%s eas=%.6g',
                                name, trajectory.lifespan, trajectory.termination.value, report.eas)

    artifacts = {'compare': 'compare.csv', 'compare_metrics': 'compare_metrics.json'}
    write_compare_csv(series, os.path.join(out_dir, artifacts['compare']))
    write_json(summary, os.path.join(out_dir, artifacts['compare_metrics']))
    write_json(manifest(
        'compare', cfg, artifacts,
        policies={name: policy.describe() for name, policy in policies.items()},
    ), os.path.join(out_dir, 'manifest.json'))

    record_run('compare', cfg, out_dir, artifacts, policy='fixed,greedy,survival')
    click.echo('compare: ' + ', '.join(
        f'{name}={summary[name]["empirical_lifespan"]}' for name in policies) + f' -> {out_dir}')

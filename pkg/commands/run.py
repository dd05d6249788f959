import os

import click
from flask import Blueprint, current_app

from commands.common import build_policy, common_options, handle_errors, manifest, prepare, record_run
from exports import (
    final_state_dict, mode_label, termination_label, write_heatmap_csv, write_json, write_modes_csv,
    write_phase_csv, write_trajectory_csv,
)
from metrics import build_report, mean_report
from simulation import heatmap_channels, mode_runs, replay_check, run_episode

run_bp = Blueprint('run', __name__, cli_group=None)

SEED_MODULUS = 2 ** 64


@run_bp.cli.command('run')
@common_options
@handle_errors
def run_command(config_path, out_dir, seed):
    """运行一个回合，导出轨迹、指标、热力图通道与模式统计"""
    cfg, out_dir = prepare(config_path, out_dir, seed)
    spec = cfg.environment
    policy = build_policy(cfg)

    trajectory = run_episode(spec, policy, cfg.start(), cfg.seed, cfg.forecaster, cfg.modes)
    report = build_report(trajectory)
    current_app.logger.info('run: policy=%s lifespan=%d cause=%s (%s)',
                            trajectory.policy, trajectory.lifespan,
                            trajectory.termination.value, termination_label(trajectory.termination))

    artifacts = {
        'trajectory': 'trajectory.csv',
        'metrics': 'metrics.json',
        'heatmap': 'heatmap.csv',
        'modes': 'modes.csv',
        'phase': 'phase.csv',
    }
    write_trajectory_csv(trajectory, os.path.join(out_dir, artifacts['trajectory']))
    write_heatmap_csv(heatmap_channels(trajectory), os.path.join(out_dir, artifacts['heatmap']))
    write_modes_csv(trajectory, os.path.join(out_dir, artifacts['modes']))
    write_phase_csv(trajectory, os.path.join(out_dir, artifacts['phase']))

    runs = mode_runs(trajectory)
    current_app.logger.info('run: %d mode runs, last %s', len(runs), mode_label(runs[-1][0]))

    metrics = report.to_dict()
    metrics.update({
        'policy': trajectory.policy,
        'termination': trajectory.termination.value,
        'compute_count': trajectory.compute_count(),
        'final_state': final_state_dict(trajectory.final_state),
        'mode_runs': [[mode.value, start, length] for mode, start, length in runs],
    })
    write_json(metrics, os.path.join(out_dir, artifacts['metrics']))

    # 多种子平均，估计期望意义下的指标
    if cfg.evaluation_seeds > 1:
        reports = [report]
        for k in range(1, cfg.evaluation_seeds):
            extra = run_episode(spec, policy, cfg.start(), (cfg.seed + k) % SEED_MODULUS,
                                cfg.forecaster, cfg.modes)
            reports.append(build_report(extra))
        artifacts['metrics_mean'] = 'metrics_mean.json'
        write_json(mean_report(reports), os.path.join(out_dir, artifacts['metrics_mean']))

    mismatches = replay_check(trajectory, spec)
    if mismatches:
        current_app.logger.warning('run: replay check disagrees at steps %s', mismatches[:10])

    write_json(manifest(
        'run', cfg, artifacts,
        policy=trajectory.policy,
        lifespan=trajectory.lifespan,
        termination=trajectory.termination.value,
        viability_index='prefix_eas',
        replay_mismatches=len(mismatches),
    ), os.path.join(out_dir, 'manifest.json'))

    record_run('run', cfg, out_dir, artifacts, policy=trajectory.policy, lifespan=trajectory.lifespan,
               termination=trajectory.termination, eas=report.eas)
    click.echo(f'run: {trajectory.policy} lived {trajectory.lifespan} steps '
               f'({trajectory.termination.value}), EAS={report.eas:.6g} -> {out_dir}')

import os

import click
from flask import Blueprint, current_app

from commands.common import common_options, handle_errors, manifest, prepare, record_run
from errors import ConfigError
from exports import write_json, write_qtable, write_training_log_csv
from policies import train

train_bp = Blueprint('train', __name__, cli_group=None)

CURVE_WINDOW = 100


def curve_means(log, window=CURVE_WINDOW):
    """前 window 个与后 window 个回合的平均寿命"""
    head = log[:window]
    tail = log[-window:]
    return (sum(item.length for item in head) / len(head),
            sum(item.length for item in tail) / len(tail))


@train_bp.cli.command('train')
@common_options
@handle_errors
def train_command(config_path, out_dir, seed):
    """训练表格 Q-learning 生存策略，导出 Q 表与逐回合训练日志"""
    cfg, out_dir = prepare(config_path, out_dir, seed)
    if cfg.policy.kind != 'q_learning':
        raise ConfigError('policy.kind', f'train needs q_learning, got {cfg.policy.kind!r}')

    settings = cfg.training
    current_app.logger.info('train: %d episodes, seed=%d', settings.episodes, cfg.seed)
    table, log = train(
        cfg.environment, cfg.reward, settings.episodes, cfg.seed,
        schedule=settings.schedule,
        init=cfg.start(),
        learning_rate=settings.learning_rate,
        discount=settings.discount,
        energy_bins=settings.energy_bins,
        temp_bins=settings.temp_bins,
    )

    artifacts = {'qtable': 'qtable.json', 'training_log': 'training_log.csv'}
    write_qtable(table, os.path.join(out_dir, artifacts['qtable']))
    write_training_log_csv(log, os.path.join(out_dir, artifacts['training_log']))

    first_mean, last_mean = curve_means(log)
    write_json(manifest(
        'train', cfg, artifacts,
        episodes=settings.episodes,
        first_100_mean_lifespan=first_mean,
        last_100_mean_lifespan=last_mean,
        final_epsilon=log[-1].epsilon,
    ), os.path.join(out_dir, 'manifest.json'))

    record_run('train', cfg, out_dir, artifacts, policy='q_learning',
               lifespan=log[-1].length, termination=log[-1].cause)
    click.echo(f'train: {settings.episodes} episodes, mean lifespan {first_mean:.1f} -> {last_mean:.1f} '
               f'-> {out_dir}')

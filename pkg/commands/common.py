"""命令共用的部分：选项、错误到退出码的映射、策略装载、清单与登记"""
import functools
import json
import os

import click
from flask import current_app

from config import SEED_MAX, load_config
from environment import spec_digest
from errors import ConfigError
from exports import ensure_dir, read_qtable
from models import ExperimentRun, db
from policies import Policy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def common_options(f):
    """--config / --out / --seed"""
    f = click.option('--seed', type=click.IntRange(0, SEED_MAX), default=None,
                     help='随机种子（覆盖配置文件）')(f)
    f = click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
                     help='产物输出目录')(f)
    f = click.option('--config', 'config_path', type=click.Path(dir_okay=False), required=True,
                     help='JSON 配置文件')(f)
    return f


def handle_errors(f):
    """配置错误退出码 2，I/O 错误退出码 3"""
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return f(*args, **kwargs)
        except ConfigError as e:
            current_app.logger.error('配置错误: %s', e)
            click.echo(f'config error: {e}', err=True)
            ctx.exit(EXIT_CONFIG)
        except OSError as e:
            current_app.logger.error('I/O 错误: %s', e)
            click.echo(f'I/O error: {e}', err=True)
            ctx.exit(EXIT_IO)
    return wrapper


def prepare(config_path, out_dir, seed):
    """读取配置并确定输出目录：--out > 配置中的 output_dir > ENERGENTIC_OUTPUT_DIR"""
    cfg = load_config(config_path, seed=seed)
    if out_dir is None:
        out_dir = cfg.resolve(cfg.output_dir) if cfg.output_dir else current_app.config['ENERGENTIC_OUTPUT_DIR']
    return cfg, ensure_dir(out_dir)


def load_table(cfg, path, key):
    """读取训练好的 Q 表；文件缺失或与环境不匹配都算配置错误"""
    if path is None:
        raise ConfigError(key, 'q_learning needs a trained table')
    resolved = cfg.resolve(path)
    if not os.path.isfile(resolved):
        raise ConfigError(key, f'trained table not found: {path}')
    table = read_qtable(resolved)
    if not table.matches(cfg.environment):
        raise ConfigError(key, 'table was trained on a different grid or thermal range')
    return table


def build_policy(cfg):
    """按配置构造策略；保留配置中的 ε，评估型命令自行调用 evaluation()"""
    settings = cfg.policy
    table = None
    if settings.kind == 'q_learning':
        table = load_table(cfg, settings.table, 'policy.table')
    return Policy(settings.kind, table, settings.epsilon)


def manifest(command, cfg, artifacts, **extra):
    """清单只记录配置摘要，不记录配置文件路径"""
    data = {
        'command': command,
        'config_digest': cfg.digest,
        'env_digest': spec_digest(cfg.environment),
        'seed': cfg.seed,
        'artifacts': artifacts,
    }
    data.update(extra)
    return data


def record_run(command, cfg, out_dir, artifacts, policy=None, lifespan=None, termination=None, eas=None):
    """写入实验登记；失败只记日志，不影响退出码"""
    if not current_app.config.get('ENERGENTIC_RECORD_RUNS', True):
        return None
    try:
        run = ExperimentRun(
            command=command,
            config_digest=cfg.digest,
            env_digest=spec_digest(cfg.environment),
            seed=str(cfg.seed),
            policy=policy,
            lifespan=lifespan,
            termination=getattr(termination, 'value', termination),
            eas=eas,
            output_dir=out_dir,
            artifacts=json.dumps(artifacts, sort_keys=True),
        )
        db.session.add(run)
        db.session.commit()
        return run
    except Exception as e:
        db.session.rollback()
        current_app.logger.warning('实验登记失败: %s', e)
        return None

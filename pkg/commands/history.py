import json

import click
from flask import Blueprint

from models import ExperimentRun

history_bp = Blueprint('history', __name__, cli_group=None)


@history_bp.cli.command('history')
@click.option('--limit', type=click.IntRange(min=1), default=20, help='最多显示的条数')
@click.option('--command', 'command_name', default=None, help='只看某个命令的记录')
def history_command(limit, command_name):
    """按时间倒序列出实验登记，每行一个 JSON"""
    query = ExperimentRun.query
    if command_name:
        query = query.filter_by(command=command_name)
    runs = query.order_by(ExperimentRun.created_at.desc(), ExperimentRun.id.desc()).limit(limit).all()
    for run in runs:
        click.echo(json.dumps(run.to_dict(), sort_keys=True, ensure_ascii=False))

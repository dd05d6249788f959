import logging
import os

from dotenv import load_dotenv
from flask import Flask
from flask.cli import FlaskGroup

from models import db

# 加载环境变量
load_dotenv()


def _flag(value):
    return str(value).strip().lower() in ('1', 'true', 'yes', 'on')


def create_app(test_config=None):
    """创建应用：读取环境配置、初始化登记库、注册命令蓝图"""
    app = Flask(__name__)

    # 数据库配置：设置了 DATABASE_URL 时使用 PostgreSQL，本地默认 SQLite
    if os.getenv('DATABASE_URL'):
        database_url = os.getenv('DATABASE_URL')
        # 确保使用 postgresql:// 前缀
        database_url = database_url.replace('postgres://', 'postgresql://')
        database_url = database_url.replace('postgresql://', 'postgresql+pg8000://')
        app.config['SQLALCHEMY_DATABASE_URI'] = database_url
    else:
        app.config['SQLALCHEMY_DATABASE_URI'] = 'sqlite:///energentic.db'

    app.config['SQLALCHEMY_TRACK_MODIFICATIONS'] = False

    # 实验相关配置
    app.config['ENERGENTIC_OUTPUT_DIR'] = os.getenv('ENERGENTIC_OUTPUT_DIR', 'output')
    app.config['ENERGENTIC_THREADS'] = int(os.getenv('ENERGENTIC_THREADS', '1'))
    app.config['ENERGENTIC_LOG_LEVEL'] = os.getenv('ENERGENTIC_LOG_LEVEL', 'INFO').upper()
    app.config['ENERGENTIC_RECORD_RUNS'] = _flag(os.getenv('ENERGENTIC_RECORD_RUNS', 'true'))

    if test_config:
        app.config.update(test_config)

    level = app.config['ENERGENTIC_LOG_LEVEL']
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)
    app.logger.setLevel(level)

    # 初始化数据库
    db.init_app(app)

    # 注册命令蓝图
    from commands.run import run_bp
    from commands.train import train_bp
    from commands.sweep import sweep_bp
    from commands.compare import compare_bp
    from commands.history import history_bp

    app.register_blueprint(run_bp)
    app.register_blueprint(train_bp)
    app.register_blueprint(sweep_bp)
    app.register_blueprint(compare_bp)
    app.register_blueprint(history_bp)

    # 创建登记表
    with app.app_context():
        db.create_all()

    return app


cli = FlaskGroup(
    name='energentic',
    help='能量/热学生存智能体的网格世界仿真',
    create_app=create_app,
    add_default_commands=False,
)


if __name__ == '__main__':
    cli()

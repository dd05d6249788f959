import json
import os

import pytest

from app import create_app
from config import load_config
from dynamics import InitialConditions
from environment import ActionTable, EnvironmentSpec, FieldSpec
from models import db

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')
CALIBRATED = os.path.join(CONFIG_DIR, 'calibrated.json')
SWEEP_FIXED = os.path.join(CONFIG_DIR, 'sweep_fixed.json')


@pytest.fixture
def app(tmp_path):
    app = create_app({
        'TESTING': True,
        'SQLALCHEMY_DATABASE_URI': 'sqlite://',
        'ENERGENTIC_OUTPUT_DIR': str(tmp_path / 'default_out'),
        'ENERGENTIC_RECORD_RUNS': True,
    })
    with app.app_context():
        db.create_all()
    yield app
    with app.app_context():
        db.session.remove()
        db.drop_all()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture(scope='session')
def calibrated_config():
    return load_config(CALIBRATED)


@pytest.fixture(scope='session')
def calibrated_world(calibrated_config):
    return calibrated_config.environment


@pytest.fixture(scope='session')
def sweep_config():
    return load_config(SWEEP_FIXED)


def tiny_world_spec(max_steps=6):
    """2×2 世界：左列无能量，右列 P = 1；原地不动会在第 3 步耗尽"""
    return EnvironmentSpec(
        width=2,
        height=2,
        harvest_field=FieldSpec.linear_gradient(0.0, 1.0, 0.0),
        dissipation_field=FieldSpec.constant(1.0),
        eta=1.0,
        alpha=1.0,
        beta=0.5,
        t_crit=40.0,
        t_ambient=20.0,
        action_costs=ActionTable(idle=0.1, compute=0.3, move=0.1),
        action_heat=ActionTable(idle=0.0, compute=2.0, move=0.5),
        gain_factors=ActionTable(idle=1.0, compute=0.6, move=0.3),
        max_steps=max_steps,
        e_cap=2.0,
    )


@pytest.fixture
def tiny_world():
    return tiny_world_spec()


@pytest.fixture
def tiny_init():
    return InitialConditions(0, 0, 0.25, 20.0)


@pytest.fixture
def write_config(tmp_path):
    """把配置字典写成临时 JSON 文件"""
    def _write(data, name='config.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return _write


@pytest.fixture
def calibrated_data():
    with open(CALIBRATED, encoding='utf-8') as f:
        data = json.load(f)
    data.pop('output_dir', None)
    return data


@pytest.fixture
def sweep_data():
    with open(SWEEP_FIXED, encoding='utf-8') as f:
        data = json.load(f)
    data.pop('output_dir', None)
    return data

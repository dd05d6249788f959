import json
from datetime import datetime

from flask_sqlalchemy import SQLAlchemy

db = SQLAlchemy()


class ExperimentRun(db.Model):
    """实验登记：每次命令执行一行，只做记录，不参与产物"""
    __tablename__ = 'experiment_runs'

    id = db.Column(db.Integer, primary_key=True)
    command = db.Column(db.String(20), nullable=False, index=True)  # run, train, sweep, compare
    config_digest = db.Column(db.String(64), nullable=False)
    env_digest = db.Column(db.String(64), nullable=False)
    seed = db.Column(db.String(20), nullable=False)  # 64 位无符号整数，按字符串保存
    policy = db.Column(db.String(100))

    # 结果摘要
    lifespan = db.Column(db.Integer)
    termination = db.Column(db.String(30))
    eas = db.Column(db.Float)

    output_dir = db.Column(db.String(500))
    artifacts = db.Column(db.Text)  # JSON: 产物名 → 文件名

    created_at = db.Column(db.DateTime, default=datetime.utcnow)

    def get_artifacts(self):
        """解析产物列表"""
        if self.artifacts:
            try:
                return json.loads(self.artifacts)
            except (TypeError, ValueError):
                return {}
        return {}

    def to_dict(self):
        return {
            'id': self.id,
            'command': self.command,
            'config_digest': self.config_digest,
            'env_digest': self.env_digest,
            'seed': int(self.seed),
            'policy': self.policy,
            'lifespan': self.lifespan,
            'termination': self.termination,
            'eas': self.eas,
            'output_dir': self.output_dir,
            'artifacts': self.get_artifacts(),
            'created_at': self.created_at.strftime('%Y-%m-%d %H:%M:%S') if self.created_at else None,
        }

    def __repr__(self):
        return f'<ExperimentRun {self.command} seed={self.seed}>'

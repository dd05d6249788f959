"""异常定义：配置错误、越界访问与错误用法"""


class EnergenticError(Exception):
    """所有模拟器异常的基类"""


class ConfigError(EnergenticError):
    """配置错误 - CLI 以退出码 2 报告，消息中包含出错的键"""

    def __init__(self, key, message):
        self.key = key
        self.message = message
        super().__init__(f'{key}: {message}')


class BoundsError(EnergenticError, ValueError):
    """网格坐标越界"""

    def __init__(self, axis, value, limit):
        self.axis = axis
        self.value = value
        self.limit = limit
        super().__init__(f'{axis}={value} out of bounds [0, {limit})')


class SimulationUsageError(EnergenticError):
    """错误用法：对终止状态继续步进、空轨迹、长度不匹配等"""

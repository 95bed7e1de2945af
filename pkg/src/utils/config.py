"""运行配置加载

优先级：命令行参数 > 环境变量 > YAML配置文件 > 默认值。
"""

import logging
import os
from dataclasses import fields
from typing import Any, Dict, Mapping, Optional

import yaml

from src.core.data_models import Config
from src.utils.error_handler import ConfigError


logger = logging.getLogger(__name__)


ENV_VARIABLES = {
    'NAMEVO_CACHE_DIR': 'cache_dir',
    'NAMEVO_OFFLINE': 'offline',
    'NAMEVO_SOURCE_DIR': 'source_dir',
    'NAMEVO_WORKERS': 'workers',
}

# 可由命令行参数覆盖的字段（argparse 的 dest 名称与字段名一致）
FLAG_FIELDS = ('cache_dir', 'offline', 'workers', 'rate_limit', 'source_dir', 'abbreviations_path')

TRUE_VALUES = frozenset({'1', 'true', 'yes', 'on'})
FALSE_VALUES = frozenset({'0', 'false', 'no', 'off', ''})


def _coerce(name: str, value: Any, default: Any) -> Any:
    """将配置值转换为字段类型

    Raises:
        ValueError: 值无法转换
    """
    if value is None:
        return None
    try:
        if isinstance(default, bool):
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in TRUE_VALUES:
                return True
            if text in FALSE_VALUES:
                return False
            raise ValueError(value)
        if isinstance(default, int):
            if isinstance(value, bool):
                raise ValueError(value)
            return int(value)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"配置项 {name} 的值无效: {value!r}")
    return str(value)


def read_config_file(path: str) -> Dict[str, Any]:
    """读取YAML配置文件

    Raises:
        FileNotFoundError: 文件不存在
        ValueError: 文件内容不是映射或包含未知配置项
    """
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"配置文件格式错误: {path} ({e})") from e
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件顶层必须是映射: {path}")

    known = {f.name for f in fields(Config)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"配置文件包含未知配置项: {', '.join(unknown)}")
    return data


def load_config(args: Optional[Any] = None, environ: Optional[Mapping[str, str]] = None) -> Config:
    """合并各来源的配置

    Args:
        args: argparse 命名空间（可为None）；值为None的参数视为未设置
        environ: 环境变量映射，默认为 os.environ

    Returns:
        Config: 已验证的配置

    Raises:
        ValueError: 某个值无效或配置验证失败
    """
    environ = os.environ if environ is None else environ
    defaults = Config()
    values: Dict[str, Any] = {}

    config_path = getattr(args, 'config', None)
    if config_path:
        values.update(read_config_file(config_path))
        logger.debug("读取配置文件 %s", config_path)

    for variable, name in ENV_VARIABLES.items():
        if variable in environ:
            values[name] = environ[variable]

    for name in FLAG_FIELDS:
        value = getattr(args, name, None)
        # store_true 的默认值 False 不覆盖低优先级来源
        if value is None or (name == 'offline' and value is False):
            continue
        values[name] = value

    kwargs = {}
    for f in fields(Config):
        if f.name in values:
            kwargs[f.name] = _coerce(f.name, values[f.name], getattr(defaults, f.name))
    config = Config(**kwargs)

    is_valid, error_msg = config.validate()
    if not is_valid:
        raise ConfigError(f"配置无效: {error_msg}")
    return config

# config.py - 配置加载与校验
import copy
import os
from typing import Any, Dict, Optional

import yaml

from src.logger_config import get_logger

ENV_THREADS = "PLANAR_MOMENTS_THREADS"
ENV_LOG_LEVEL = "PLANAR_MOMENTS_LOG_LEVEL"
ENV_LOG_DIR = "PLANAR_MOMENTS_LOG_DIR"

_LOG_LEVELS = ("production", "normal", "debug", "trace")
_FORMATS = ("text", "json", "csv")


def load_env_files():
    """按顺序查找 .env，找到第一个即加载；没有任何变量是必需的"""
    try:
        from dotenv import load_dotenv
    except ImportError:
        return None
    for env_path in [".env", "../.env", "../../.env"]:
        if os.path.exists(env_path):
            load_dotenv(env_path)
            return env_path
    return None


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    加载配置文件，找不到或格式错误时使用默认配置
    查找顺序: src/config.yaml, ./config.yaml, ./planar_moments.yaml
    """
    logger = get_logger()
    if config_path is None:
        possible_paths = [
            os.path.join(os.path.dirname(__file__), "config.yaml"),
            os.path.join(os.getcwd(), "config.yaml"),
            os.path.join(os.getcwd(), "planar_moments.yaml"),
        ]
        config_path = next((path for path in possible_paths if os.path.exists(path)), None)
        if not config_path:
            logger.warning("未找到配置文件，使用默认配置")
            return get_default_config()

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or {}
        if not isinstance(config, dict):
            raise yaml.YAMLError("顶层必须是映射")
        validated = validate_config(config)
        logger.debug(f"成功加载配置文件: {config_path}")
        return validated
    except FileNotFoundError:
        logger.warning(f"配置文件不存在: {config_path}，使用默认配置")
    except yaml.YAMLError as e:
        logger.warning(f"配置文件格式错误: {e}，使用默认配置")
    return get_default_config()


def get_default_config() -> Dict[str, Any]:
    return {
        "exact": {
            "factorial_cache_cap": 4096,
        },
        "oracle": {
            "n_radial": 96,
            "n_angular": 128,
            "hermite_extra_mass": 40,
            "refinement_check": True,
            "refinement_tolerance": 1e-9,
            "tolerance": {
                "hermite": 1e-7,
                "gegenbauer": 1e-7,
                "laguerre": 1e-5,
                "mp_law": 1e-5,
            },
        },
        "cli": {
            "threads": 1,
            "auto_crosscheck_max_order": 6,
            "format": "text",
        },
        "verify": {
            "suites": ["a-coefficients", "cross-formula", "closed-forms", "hermitian-limits",
                       "scaling", "asymptotics", "elliptic-law", "genus", "limits",
                       "wishart-asymptotics", "oracle"],
            "a_coefficients": {"p_max": 6, "k_max": 20, "composition_k_max": 12},
            "complex_cross": {"order_max": 8, "N_max": 12},
            "symplectic_cross": {"order_max": 8, "N_max": 8},
            "closed_forms": {"order_max": 8, "N_max": 10},
            "wishart": {"N_list": [50, 100, 200], "symplectic_N_list": [25, 50], "order_max": 3},
            "oracle": {"order_max": 4, "N_max": 6, "N_values": None},
        },
        "logging": {
            "level": "normal",
            "log_dir": None,
            "save_debug_data": False,
        },
    }


def _merge_defaults(section: Dict[str, Any], defaults: Dict[str, Any], path: str):
    logger = get_logger()
    for key, default_value in defaults.items():
        if key not in section:
            section[key] = copy.deepcopy(default_value)
            logger.debug(f"配置中缺少 '{path}{key}'，使用默认值: {default_value}")
        elif isinstance(default_value, dict):
            if not isinstance(section[key], dict):
                logger.warning(f"{path}{key} 应为映射，当前值: {section[key]}")
                section[key] = copy.deepcopy(default_value)
            else:
                _merge_defaults(section[key], default_value, f"{path}{key}.")
        elif default_value is not None and not isinstance(default_value, bool) \
                and isinstance(default_value, (int, float)):
            if isinstance(section[key], bool) or not isinstance(section[key], (int, float)):
                logger.warning(f"{path}{key} 应为数字，当前值: {section[key]}")
                section[key] = default_value
        elif isinstance(default_value, bool) and not isinstance(section[key], bool):
            logger.warning(f"{path}{key} 应为布尔值，当前值: {section[key]}")
            section[key] = default_value
        elif isinstance(default_value, list) and not isinstance(section[key], list):
            logger.warning(f"{path}{key} 应为列表，当前值: {section[key]}")
            section[key] = copy.deepcopy(default_value)


def validate_config(config: Dict[str, Any]) -> Dict[str, Any]:
    """补全缺失项、纠正类型并限制取值范围"""
    logger = get_logger()
    _merge_defaults(config, get_default_config(), "")

    oracle = config["oracle"]
    for key in ("n_radial", "n_angular"):
        if oracle[key] < 32:
            logger.warning(f"oracle.{key} 不能小于 32，设置为 32")
            oracle[key] = 32
        oracle[key] = int(oracle[key])
    for family, tol in list(oracle["tolerance"].items()):
        if tol <= 0:
            default_tol = get_default_config()["oracle"]["tolerance"].get(family, 1e-7)
            logger.warning(f"容差必须为正: oracle.tolerance.{family}={tol}")
            oracle["tolerance"][family] = default_tol
    if oracle["refinement_tolerance"] <= 0:
        oracle["refinement_tolerance"] = 1e-9

    oracle_suite = config["verify"]["oracle"]
    n_values = oracle_suite["N_values"]
    if n_values is not None and (
            not isinstance(n_values, list)
            or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in n_values)):
        logger.warning(f"verify.oracle.N_values 应为正整数列表，当前值: {n_values}，改为检查全部 N")
        oracle_suite["N_values"] = None

    cli = config["cli"]
    if cli["threads"] < 1:
        logger.warning("线程数不能小于 1，设置为 1")
        cli["threads"] = 1
    cli["threads"] = int(cli["threads"])
    if cli["format"] not in _FORMATS:
        logger.warning(f"未知的输出格式: {cli['format']}，使用 text")
        cli["format"] = "text"

    logging_cfg = config["logging"]
    if str(logging_cfg["level"]).lower() not in _LOG_LEVELS:
        logger.warning(f"未知的日志级别: {logging_cfg['level']}，使用 normal")
        logging_cfg["level"] = "normal"
    logging_cfg["level"] = str(logging_cfg["level"]).lower()

    return config


def apply_env_overrides(config: Dict[str, Any]) -> Dict[str, Any]:
    """环境变量覆盖（可选）"""
    threads = os.getenv(ENV_THREADS)
    if threads:
        try:
            config["cli"]["threads"] = max(1, int(threads))
        except ValueError:
            get_logger().warning(f"{ENV_THREADS} 不是整数: {threads}")
    level = os.getenv(ENV_LOG_LEVEL)
    if level and level.lower() in _LOG_LEVELS:
        config["logging"]["level"] = level.lower()
    log_dir = os.getenv(ENV_LOG_DIR)
    if log_dir:
        config["logging"]["log_dir"] = log_dir
    return config


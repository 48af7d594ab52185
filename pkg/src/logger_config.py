# logger_config.py - 统一日志管理系统
"""
控制台输出走 stderr，保证 stdout 上的 CSV / JSON 可以直接被管道消费。
结构化调试数据在会话结束时写入 <log_dir>/debug_session_<id>.json
"""
import functools
import json
import logging
import os
import shutil
import sys
import threading
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional


class LogLevel(Enum):
    PRODUCTION = "production"    # 只输出警告和错误
    NORMAL = "normal"           # 标准信息
    DEBUG = "debug"             # 详细调试
    TRACE = "trace"             # 最详细（逐表、逐公式）


_CONSOLE_LEVELS = {
    LogLevel.PRODUCTION: logging.WARNING,
    LogLevel.NORMAL: logging.INFO,
    LogLevel.DEBUG: logging.DEBUG,
    LogLevel.TRACE: logging.DEBUG,
}


class MomentLogger:
    def __init__(self, level: LogLevel = LogLevel.NORMAL, save_debug_data: bool = False,
                 log_dir: Optional[str] = None):
        self.level = level
        self.save_debug_data = save_debug_data
        self.log_dir = log_dir
        self.debug_data: List[Dict[str, Any]] = []
        self.session_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.log_file: Optional[str] = None

        if self.log_dir:
            os.makedirs(self.log_dir, exist_ok=True)

        self._setup_python_logging()

        self.debug("日志系统初始化", {
            "session_id": self.session_id,
            "log_level": self.level.value,
            "debug_data_enabled": self.save_debug_data,
            "log_dir": self.log_dir,
        })

    def _setup_python_logging(self):
        self.python_logger = logging.getLogger(f"planar_moments_{self.session_id}_{id(self)}")
        self.python_logger.setLevel(logging.DEBUG)
        self.python_logger.propagate = False
        self.python_logger.handlers.clear()

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(_CONSOLE_LEVELS[self.level])
        console_handler.setFormatter(logging.Formatter('[%(levelname)s] %(message)s'))
        self.python_logger.addHandler(console_handler)

        if self.log_dir:
            self.log_file = os.path.join(self.log_dir, f"session_{self.session_id}.log")
            file_handler = logging.FileHandler(self.log_file, encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            self.python_logger.addHandler(file_handler)

    @property
    def verbose(self) -> bool:
        return self.level in (LogLevel.DEBUG, LogLevel.TRACE)

    def info(self, message: str, data: Optional[Dict] = None):
        self.python_logger.info(message)
        if data and self.verbose:
            self._log_data("INFO", message, data)

    def success(self, message: str, data: Optional[Dict] = None):
        self.python_logger.info(f"✅ {message}")
        if data and self.verbose:
            self._log_data("SUCCESS", message, data)

    def warning(self, message: str, data: Optional[Dict] = None):
        self.python_logger.warning(message)
        if data:
            self._log_data("WARNING", message, data)

    def error(self, message: str, data: Optional[Dict] = None, exception: Optional[Exception] = None):
        self.python_logger.error(message)

        error_data = dict(data or {})
        if exception:
            error_data.update({
                "exception_type": type(exception).__name__,
                "exception_message": str(exception),
            })
            error_data.update(getattr(exception, "details", {}) or {})

        self._log_data("ERROR", message, error_data)

    def debug(self, message: str, data: Optional[Dict] = None):
        if self.verbose:
            self.python_logger.debug(message)
            if data:
                self._log_data("DEBUG", message, data)

    def trace(self, message: str, data: Optional[Dict] = None):
        if self.level == LogLevel.TRACE:
            self.python_logger.debug(f"TRACE: {message}")
            if data:
                self._log_data("TRACE", message, data)

    def _log_data(self, level: str, message: str, data: Dict):
        if self.save_debug_data:
            self.debug_data.append({
                "timestamp": datetime.now().isoformat(),
                "level": level,
                "message": message,
                "data": data,
                "thread": threading.current_thread().name,
            })

    def step_start(self, step_name: str, step_num: int, total_steps: int):
        step_header = f"步骤{step_num}/{total_steps}: {step_name}"
        self.python_logger.info("=" * 60)
        self.python_logger.info(f"🚀 {step_header}")
        self._log_data("STEP_START", step_header, {
            "step_number": step_num,
            "total_steps": total_steps,
            "step_name": step_name,
        })

    def step_end(self, step_name: str, success: bool, stats: Optional[Dict] = None):
        stats = stats or {}
        status = "✅ 通过" if success else "❌ 失败"
        log = self.python_logger.info if success else self.python_logger.warning
        log(f"📊 步骤完成: {step_name} - {status}")
        for key, value in stats.items():
            self.python_logger.info(f"   {key}: {value}")

        self._log_data("STEP_END_SUCCESS" if success else "STEP_END_FAILURE",
                       f"步骤完成: {step_name}", {
                           "step_name": step_name,
                           "success": success,
                           "stats": stats,
                       })

    def save_debug_session(self) -> Optional[str]:
        """保存调试会话数据，返回文件路径"""
        if not (self.debug_data and self.save_debug_data and self.log_dir):
            return None

        debug_file = os.path.join(self.log_dir, f"debug_session_{self.session_id}.json")
        try:
            with open(debug_file, 'w', encoding='utf-8') as f:
                json.dump(self.debug_data, f, ensure_ascii=False, indent=2, default=str)

            latest_link = os.path.join(self.log_dir, "debug_session_latest.json")
            if os.path.lexists(latest_link):
                os.remove(latest_link)
            try:
                os.symlink(os.path.basename(debug_file), latest_link)
            except (OSError, NotImplementedError):
                shutil.copy2(debug_file, latest_link)

            self.debug(f"调试数据已保存: {debug_file}", {"debug_entries": len(self.debug_data)})
            return debug_file
        except OSError as e:
            self.error("保存调试数据失败", {"error": str(e)}, e)
            return None

    def close(self):
        for handler in list(self.python_logger.handlers):
            handler.close()
            self.python_logger.removeHandler(handler)


_global_logger: Optional[MomentLogger] = None


def init_logger(level: LogLevel = LogLevel.NORMAL, save_debug_data: bool = False,
                log_dir: Optional[str] = None) -> MomentLogger:
    """初始化全局日志器"""
    global _global_logger
    if _global_logger is not None:
        _global_logger.close()
    _global_logger = MomentLogger(level, save_debug_data, log_dir)
    return _global_logger


def get_logger() -> MomentLogger:
    """获取全局日志器；库内调用时默认只输出警告"""
    global _global_logger
    if _global_logger is None:
        _global_logger = MomentLogger(LogLevel.PRODUCTION)
    return _global_logger


def cleanup_logger():
    """程序结束时保存调试数据并释放 handler"""
    global _global_logger
    if _global_logger:
        _global_logger.save_debug_session()
        _global_logger.close()
        _global_logger = None


def log_function_call(message: Optional[str] = None):
    """装饰器：在 TRACE 级别记录函数调用"""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger = get_logger()
            func_name = func.__name__
            log_message = message or f"调用函数: {func_name}"

            logger.trace(f"开始{log_message}", {
                "function": func_name,
                "args": [str(arg) for arg in args],
                "kwargs_keys": list(kwargs.keys()),
            })

            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(f"失败{log_message}", {"function": func_name, "error": str(e)}, e)
                raise
            logger.trace(f"完成{log_message}", {"function": func_name, "success": True})
            return result

        return wrapper
    return decorator

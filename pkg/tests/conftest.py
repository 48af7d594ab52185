# conftest.py - 测试公共夹具
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.logger_config import LogLevel, cleanup_logger, init_logger  # noqa: E402


@pytest.fixture
def quiet_logger():
    """只输出警告的全局日志器，用例结束后释放"""
    logger = init_logger(LogLevel.PRODUCTION)
    yield logger
    cleanup_logger()

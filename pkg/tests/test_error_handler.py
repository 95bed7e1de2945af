"""错误处理器测试

测试异常到退出码的映射以及命令装饰器的行为。
"""

import json

import pytest

from src.cli.commands import handles_errors
from src.utils.error_handler import (
    EXIT_ENVIRONMENT_ERROR,
    EXIT_INPUT_ERROR,
    EXIT_INTERNAL_ERROR,
    CacheError,
    ConfigError,
    EmptyInputError,
    ErrorHandler,
    InconsistentInputError,
    InvariantViolationError,
    MalformedLineError,
    OfflineCacheMissError,
    SchemaError,
    TransportError,
    UndefinedRateError,
)


class TestExitCodeFor:
    """退出码映射测试"""

    @pytest.mark.parametrize('error', [
        MalformedLineError("括号不配对", '* A (x → B'),
        SchemaError("必须是数组", 1, 'years'),
        InconsistentInputError("未知的演化链"),
        EmptyInputError("没有样本"),
        UndefinedRateError("基数为0"),
        ConfigError("配置无效"),
        FileNotFoundError(2, 'No such file', 'chains.jsonl'),
        UnicodeDecodeError('utf-8', b'\xff', 0, 1, 'invalid start byte'),
    ])
    def test_input_errors(self, error):
        """测试领域输入异常和文件读取失败映射为2"""
        assert ErrorHandler.exit_code_for(error) == EXIT_INPUT_ERROR

    @pytest.mark.parametrize('error', [
        OfflineCacheMissError('Tokyo'),
        CacheError("正文读取失败", 'cache/pages/Tokyo.txt'),
        TransportError("连接超时"),
    ])
    def test_environment_errors(self, error):
        assert ErrorHandler.exit_code_for(error) == EXIT_ENVIRONMENT_ERROR

    @pytest.mark.parametrize('error', [
        InvariantViolationError("正文中含有标记标签"),
        KeyError('resolved_title'),
        TypeError("'NoneType' object is not subscriptable"),
        ValueError("窗口起点 3 大于终点 1"),
        RuntimeError("unexpected"),
    ])
    def test_unexpected_errors_are_internal(self, error):
        """测试未预期的异常映射为4"""
        assert ErrorHandler.exit_code_for(error) == EXIT_INTERNAL_ERROR


class TestHandlesErrors:
    """命令装饰器测试"""

    def test_key_error_in_command(self, caplog):
        @handles_errors("测试命令")
        def command():
            return {}['missing']

        assert command() == EXIT_INTERNAL_ERROR
        assert '测试命令' in caplog.text

    def test_json_error_wrapped_as_schema(self):
        @handles_errors("读取记录")
        def command():
            try:
                json.loads('{not json')
            except json.JSONDecodeError as e:
                raise SchemaError(f"无效的JSON ({e.msg})", 1, '<json>') from e

        assert command() == EXIT_INPUT_ERROR

    def test_success_passthrough(self):
        @handles_errors("测试命令")
        def command():
            return 0

        assert command() == 0

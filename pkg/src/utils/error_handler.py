"""错误处理器

定义流水线使用的异常类型，并提供统一的错误消息格式化与退出码映射。
"""

import logging
from typing import Optional


logger = logging.getLogger(__name__)


# CLI 退出码
EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_ENVIRONMENT_ERROR = 3
EXIT_INTERNAL_ERROR = 4


class MalformedLineError(ValueError):
    """列表行无法解析（空名称、括号不配对或自我更名）

    Attributes:
        line: 原始行文本
        line_number: 行号（从1开始），未知时为None
        source_list: 列表页标识
    """

    def __init__(self, message: str, line: str = "", line_number: Optional[int] = None,
                 source_list: str = ""):
        self.reason = message
        self.line = line
        self.line_number = line_number
        self.source_list = source_list
        super().__init__(self._format())

    def _format(self) -> str:
        location = self.source_list or "<list>"
        if self.line_number is not None:
            location = f"{location}:{self.line_number}"
        return f"{location}: {self.reason}: {self.line.strip()!r}"

    def with_line_number(self, line_number: int) -> "MalformedLineError":
        """返回附带行号的新异常"""
        return MalformedLineError(self.reason, self.line, line_number, self.source_list)


class SchemaError(ValueError):
    """结构化记录不符合格式

    Attributes:
        record_index: 记录序号（从1开始）
        field: 出错字段名
    """

    def __init__(self, message: str, record_index: int, field: str):
        self.record_index = record_index
        self.field = field
        super().__init__(f"记录 {record_index} 字段 '{field}': {message}")


class InconsistentInputError(ValueError):
    """多个输入文件之间互相矛盾（例如摘录引用了未知的演化链）"""


class EmptyInputError(ValueError):
    """统计量需要至少一个样本"""


class UndefinedRateError(ValueError):
    """比率的分母为零"""


class ConfigError(ValueError):
    """配置项、配置文件或页面来源目录无效"""


class TransportError(OSError):
    """网络传输失败（可重试）"""


class OfflineCacheMissError(RuntimeError):
    """离线模式下缓存未命中"""

    def __init__(self, title: str):
        self.title = title
        super().__init__(f"离线模式下缓存未命中: {title}")


class CacheError(OSError):
    """缓存读写失败

    Attributes:
        path: 出错的缓存文件路径
    """

    def __init__(self, message: str, path: str):
        self.path = path
        super().__init__(f"{message}: {path}")


class InvariantViolationError(AssertionError):
    """内部不变量被破坏（程序缺陷）"""


ENVIRONMENT_ERRORS = (OfflineCacheMissError, CacheError, TransportError)
INPUT_ERRORS = (
    MalformedLineError, SchemaError, InconsistentInputError, EmptyInputError,
    UndefinedRateError, ConfigError, UnicodeDecodeError, OSError,
)


class ErrorHandler:
    """错误处理器类

    提供文件错误、解析错误的消息格式化，以及异常到CLI退出码的映射。
    """

    @staticmethod
    def handle_file_error(error: Exception, filepath: str) -> str:
        """处理文件相关错误

        Args:
            error: 捕获的异常对象
            filepath: 文件路径

        Returns:
            str: 格式化的错误消息
        """
        if isinstance(error, CacheError):
            return f"缓存读写失败: {error}"
        elif isinstance(error, FileNotFoundError):
            return f"文件未找到: {filepath}"
        elif isinstance(error, PermissionError):
            return f"无权限访问文件: {filepath}"
        elif isinstance(error, IsADirectoryError):
            return f"指定路径是目录而非文件: {filepath}"
        elif isinstance(error, UnicodeDecodeError):
            return f"文件不是有效的UTF-8文本: {filepath}"
        elif isinstance(error, OSError):
            return f"文件读取失败: {filepath} - {str(error)}"
        else:
            return f"文件处理失败: {filepath} - {str(error)}"

    @staticmethod
    def handle_parse_error(error: Exception, context: Optional[str] = None) -> str:
        """处理解析错误

        Args:
            error: 捕获的异常对象
            context: 可选的上下文信息（如"解析 cities.txt 时"）

        Returns:
            str: 格式化的错误消息
        """
        context_str = f"{context}: " if context else ""

        if isinstance(error, MalformedLineError):
            return f"{context_str}列表行格式错误 - {str(error)}"
        elif isinstance(error, SchemaError):
            return f"{context_str}记录格式错误 - {str(error)}"
        elif isinstance(error, InconsistentInputError):
            return f"{context_str}输入不一致 - {str(error)}"
        elif isinstance(error, ValueError):
            return f"{context_str}数据解析错误 - {str(error)}"
        elif isinstance(error, (KeyError, TypeError)):
            return f"{context_str}数据类型错误 - {str(error)}"
        else:
            return f"{context_str}解析失败 - {str(error)}"

    @staticmethod
    def exit_code_for(error: BaseException) -> int:
        """将异常映射为CLI退出码

        0 成功, 2 输入错误, 3 环境/缓存错误, 4 内部不变量错误。
        只有领域输入异常和文件读取失败映射为2，其他未预期的异常（包括
        KeyError、TypeError 和普通 ValueError）都视为内部错误。

        Args:
            error: 命令执行中捕获的异常

        Returns:
            int: 退出码
        """
        if isinstance(error, InvariantViolationError):
            return EXIT_INTERNAL_ERROR
        if isinstance(error, ENVIRONMENT_ERRORS):
            return EXIT_ENVIRONMENT_ERROR
        # 输入文件缺失或不可读属于输入错误
        if isinstance(error, INPUT_ERRORS):
            return EXIT_INPUT_ERROR
        return EXIT_INTERNAL_ERROR

    @staticmethod
    def report(error: BaseException, context: Optional[str] = None,
               filepath: Optional[str] = None) -> int:
        """记录错误消息并返回退出码"""
        if isinstance(error, OSError) and filepath is not None:
            message = ErrorHandler.handle_file_error(error, filepath)
        elif isinstance(error, (OfflineCacheMissError, TransportError, CacheError)):
            message = f"{context + ': ' if context else ''}{error}"
        else:
            message = ErrorHandler.handle_parse_error(error, context)
        logger.error(message)
        return ErrorHandler.exit_code_for(error)

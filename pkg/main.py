"""名称演化挖掘工具入口点

从名称变更列表页解析实体的名称演化链，获取对应的 wiki 条目，计算覆盖每次
名称变更（前名称、后名称、年份）的最小句子摘录，并汇总统计。

使用方法:
    python main.py [全局参数] <子命令> [参数]

子命令:
    parse     解析列表页 / 整理记录，写出演化链文件
    fetch     获取条目并写出解析日志
    analyze   计算最小摘录
    stats     生成统计报告
    export    导出知识库

示例:
    python main.py parse lists/*.txt -o chains.jsonl
    python main.py --source-dir corpus fetch chains.jsonl --log resolution.jsonl
    python main.py --offline analyze chains.jsonl -o excerpts.jsonl
    python main.py stats --excerpts excerpts.jsonl --chains chains.jsonl \\
        --resolutions resolution.jsonl -o report/
    python main.py export --chains chains.jsonl --excerpts excerpts.jsonl -o kb.json
"""

import argparse
import logging
import sys

from src.cli.commands import cmd_analyze, cmd_export, cmd_fetch, cmd_parse, cmd_stats
from src.core.statistics import LAYOUT_AUTO, LAYOUTS
from src.utils.config import load_config
from src.utils.error_handler import ErrorHandler


LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'


def build_parser() -> argparse.ArgumentParser:
    """构造命令行参数解析器

    Returns:
        argparse.ArgumentParser: 带子命令的解析器
    """
    parser = argparse.ArgumentParser(
        prog='name-evolution',
        description='名称演化挖掘工具 - 从 wiki 名称变更列表和条目中提取名称变更摘录',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
退出码:
  0  成功
  2  输入错误（列表行格式错误、记录格式错误、输入不一致）
  3  环境错误（离线模式缓存未命中、缓存读写失败、网络失败）
  4  内部不变量错误

环境变量:
  NAMEVO_CACHE_DIR, NAMEVO_OFFLINE, NAMEVO_SOURCE_DIR, NAMEVO_WORKERS
        """
    )
    parser.add_argument('--config', metavar='FILE', help='YAML配置文件')
    parser.add_argument('--cache-dir', dest='cache_dir', metavar='DIR', help='条目缓存目录')
    parser.add_argument('--offline', action='store_true', help='离线模式：只使用缓存，禁止网络请求')
    parser.add_argument('--workers', type=int, metavar='N', help='并行任务数')
    parser.add_argument('--rate-limit', dest='rate_limit', type=float, metavar='RPS',
                        help='每秒请求数上限')
    parser.add_argument('--source-dir', dest='source_dir', metavar='DIR',
                        help='目录形式的页面来源（代替在线 API）')
    parser.add_argument('--abbreviations', dest='abbreviations_path', metavar='FILE',
                        help='分句缩写表文件')
    parser.add_argument('-v', '--verbose', action='store_true', help='输出调试日志')
    parser.add_argument('--version', action='version', version='name-evolution 1.0.0')

    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser('parse', help='解析列表页和整理记录')
    p.add_argument('inputs', nargs='*', help='列表页（.txt）或整理记录（.jsonl）')
    p.add_argument('-o', '--out', required=True, help='输出的演化链文件')

    p = subparsers.add_parser('fetch', help='获取条目并写出解析日志')
    p.add_argument('chains', help='演化链文件')
    p.add_argument('--log', required=True, help='输出的解析日志')

    p = subparsers.add_parser('analyze', help='计算最小摘录')
    p.add_argument('chains', help='演化链文件')
    p.add_argument('-o', '--out', required=True, help='输出的摘录记录文件')

    p = subparsers.add_parser('stats', help='生成统计报告')
    p.add_argument('--excerpts', required=True, help='摘录记录文件')
    p.add_argument('--chains', required=True, help='演化链文件')
    p.add_argument('--resolutions', required=True, help='解析日志')
    p.add_argument('-o', '--out', required=True, help='报告输出目录')
    p.add_argument('--title', default='Name evolutions', help='报告标题')
    p.add_argument('--layout', choices=(LAYOUT_AUTO, *LAYOUTS), default=LAYOUT_AUTO,
                   help='报告表格结构：auto 按输入自动选择')

    p = subparsers.add_parser('export', help='导出知识库')
    p.add_argument('--chains', required=True, help='演化链文件')
    p.add_argument('--excerpts', required=True, help='摘录记录文件')
    p.add_argument('-o', '--out', required=True, help='输出的知识库文件')

    return parser


def configure_logging(verbose: bool) -> None:
    """配置根日志记录器：库模块默认 WARNING，命令摘要 INFO"""
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)
    logging.getLogger('src.cli').setLevel(logging.DEBUG if verbose else logging.INFO)


def main(argv=None) -> int:
    """主函数

    Returns:
        int: 退出码
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    if args.command == 'parse':
        return cmd_parse(args.inputs, args.out)
    if args.command == 'stats':
        return cmd_stats(args.excerpts, args.chains, args.resolutions, args.out, args.title,
                         args.layout)
    if args.command == 'export':
        return cmd_export(args.chains, args.excerpts, args.out)

    try:
        config = load_config(args)
    except (ValueError, OSError) as e:
        return ErrorHandler.report(e, "加载配置", getattr(args, 'config', None))

    if args.command == 'fetch':
        return cmd_fetch(args.chains, config, args.log)
    return cmd_analyze(args.chains, config, args.out)


if __name__ == '__main__':
    sys.exit(main())

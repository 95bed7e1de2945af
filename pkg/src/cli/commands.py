"""命令行子命令实现

各阶段通过文件衔接：parse 写演化链文件，fetch 预热缓存并写解析日志，
analyze 写摘录记录，stats 写报告，export 写知识库。每个命令返回退出码。
"""

import functools
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from src.core.article_cache import ArticleCache
from src.core.article_source import DirectorySource, LiveWikiSource, PageSource, fetch_entity_articles
from src.core.data_models import Config, EntityArticles, EvolutionChain, ExcerptRecord, ResolutionRecord
from src.core.excerpt_window import analyze_corpus, record_sort_key
from src.core.list_parser import dedupe_chains, iter_jsonl_records, parse_list_page, read_chain_file, write_chain_file
from src.core.sentence_splitter import RuleBasedSplitter
from src.core.statistics import LAYOUT_AUTO, aggregate, check_consistency, select_layout
from src.utils.converters import (
    excerpt_from_dict,
    excerpt_to_dict,
    histogram_to_csv,
    render_text_table,
    report_to_document,
    resolution_from_dict,
    resolution_to_dict,
    to_json_line,
)
from src.utils.error_handler import (
    EXIT_OK,
    ErrorHandler,
    InconsistentInputError,
    InvariantViolationError,
)


logger = logging.getLogger(__name__)


CURATED_SUFFIXES = ('.jsonl', '.json')


def handles_errors(context: str) -> Callable:
    """将命令中的异常转换为退出码"""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                return func(*args, **kwargs)
            except Exception as e:
                filepath = getattr(e, 'filename', None) or getattr(e, 'path', None)
                return ErrorHandler.report(e, context, filepath)
        return wrapper
    return decorator


def _write_lines(path, lines: Sequence[str]) -> None:
    """逐行写出文本（UTF-8，LF 换行），必要时创建父目录

    Args:
        path: 输出文件路径
        lines: 不含换行符的行
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for line in lines:
            f.write(line + '\n')


def _write_text(path, text: str) -> None:
    """原样写出文本（UTF-8，不转换换行符），必要时创建父目录

    Args:
        path: 输出文件路径
        text: 文本内容
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)


def build_page_source(config: Config) -> Optional[PageSource]:
    """根据配置构造页面来源

    Args:
        config: 运行配置

    Returns:
        Optional[PageSource]: 离线模式返回None（只读缓存）；配置了来源目录时返回
        DirectorySource，否则返回访问 wiki API 的 LiveWikiSource
    """
    if config.offline:
        return None
    if config.source_dir:
        return DirectorySource(config.source_dir)
    return LiveWikiSource(
        api_base=config.api_base,
        user_agent=config.user_agent,
        rate_limit=config.rate_limit,
        max_retries=config.max_retries,
        timeout=config.timeout,
    )


def resolve_entities(chains: Sequence[EvolutionChain], config: Config,
                     cache: ArticleCache, source: Optional[PageSource]) -> List[EntityArticles]:
    """并行解析全部实体，结果顺序与输入一致"""

    def work(chain: EvolutionChain) -> EntityArticles:
        return fetch_entity_articles(chain, source, cache, config.offline, config.max_redirects)

    progress = tqdm(total=len(chains), desc='fetch', unit='entity', disable=not sys.stderr.isatty())
    try:
        if config.workers <= 1:
            results = []
            for chain in chains:
                results.append(work(chain))
                progress.update(1)
            return results
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            futures = [executor.submit(work, chain) for chain in chains]
            results = []
            for future in futures:
                results.append(future.result())
                progress.update(1)
            return results
    finally:
        progress.close()


@handles_errors("解析列表")
def cmd_parse(inputs: Sequence[str], out: str) -> int:
    """解析列表页（.txt）和整理记录（.jsonl），去重后写出演化链文件"""
    chains: List[EvolutionChain] = []
    for path in inputs:
        path = Path(path)
        if path.suffix.lower() in CURATED_SUFFIXES:
            parsed = read_chain_file(path)
        else:
            parsed = parse_list_page(path.read_text(encoding='utf-8'), source_list=path.stem)
        logger.info("%s: %d 条演化链", path, len(parsed))
        chains.extend(parsed)

    deduped = dedupe_chains(chains)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    count = write_chain_file(out, deduped)
    logger.info("写出 %d 条演化链（去重前 %d 条）: %s", count, len(chains), out)
    return EXIT_OK


@handles_errors("获取条目")
def cmd_fetch(chains_path: str, config: Config, log_path: str) -> int:
    """解析每个实体的条目并写出解析日志（可解析实体在前）"""
    chains = read_chain_file(chains_path)
    cache = ArticleCache(config.cache_dir)
    source = build_page_source(config)
    results = resolve_entities(chains, config, cache, source)

    records = [result.to_record(chain) for chain, result in zip(chains, results)]
    resolved = sorted((r for r in records if r.resolvable), key=lambda r: (r.entity_id, r.chain_key))
    unresolved = sorted((r for r in records if not r.resolvable), key=lambda r: (r.entity_id, r.chain_key))
    _write_lines(log_path, [to_json_line(resolution_to_dict(r)) for r in resolved + unresolved])

    if source is not None:
        logger.info("请求次数: %d", source.request_count)
    logger.info("可解析实体 %d 个，不可解析 %d 个，缓存条目 %d 个",
                len(resolved), len(unresolved), len(cache))
    return EXIT_OK


@handles_errors("分析摘录")
def cmd_analyze(chains_path: str, config: Config, out: str) -> int:
    """计算每次被完整提及的变更的最小摘录并写出摘录记录"""
    chains = read_chain_file(chains_path)
    cache = ArticleCache(config.cache_dir)
    source = build_page_source(config)
    results = resolve_entities(chains, config, cache, source)

    splitter = RuleBasedSplitter(config.abbreviations_path)
    records = analyze_corpus(zip(chains, results), workers=config.workers, splitter=splitter)
    _write_lines(out, [to_json_line(excerpt_to_dict(r)) for r in records])
    logger.info("写出 %d 条摘录: %s", len(records), out)
    return EXIT_OK


def _read_excerpts(path) -> List[ExcerptRecord]:
    return [excerpt_from_dict(data, index) for index, data in enumerate(iter_jsonl_records(path), start=1)]


def _read_resolutions(path) -> List[ResolutionRecord]:
    return [resolution_from_dict(data, index) for index, data in enumerate(iter_jsonl_records(path), start=1)]


@handles_errors("生成统计报告")
def cmd_stats(excerpts_path: str, chains_path: str, resolution_log: str, out_dir: str,
              title: str = "Name evolutions", layout: str = LAYOUT_AUTO) -> int:
    """汇总统计并写出 report.json、report.txt 和 histogram.csv

    layout 为 auto 时，输入带列表链接则使用 places 表格，否则使用 products 表格。
    """
    chains = read_chain_file(chains_path)
    records = _read_excerpts(excerpts_path)
    resolutions = _read_resolutions(resolution_log)

    check_consistency(chains, records)
    known = {chain.chain_key for chain in chains}
    for resolution in resolutions:
        if resolution.chain_key not in known:
            raise InconsistentInputError(f"解析日志引用了未知的演化链: {resolution.chain_key!r}")

    report = aggregate(chains, resolutions, records)
    problems = report.violations()
    if problems:
        raise InvariantViolationError('; '.join(problems))

    if layout == LAYOUT_AUTO:
        layout = select_layout(chains)
    logger.info("报告表格结构: %s", layout)

    out = Path(out_dir)
    document = report_to_document(report, title, layout)
    table = render_text_table(report, title, layout)
    _write_text(out / 'report.json', json.dumps(document, ensure_ascii=False, indent=2) + '\n')
    _write_text(out / 'report.txt', table)
    _write_text(out / 'histogram.csv', histogram_to_csv(report.distance_histogram))
    sys.stdout.write(table)
    return EXIT_OK


def _entity_document(chain: EvolutionChain, excerpts: Dict[Tuple[str, int], ExcerptRecord]) -> dict:
    changes = []
    for position, change in enumerate(chain.changes):
        record = excerpts.get((chain.chain_key, position))
        changes.append({
            'position': position,
            'preceding': change.preceding.canonical,
            'succeeding': change.succeeding.canonical,
            'year': change.year,
            'excerpt': None if record is None else {
                'article': record.article,
                'distance': record.distance,
                'from': record.from_idx,
                'to': record.to_idx,
                'text': record.text,
                'from_current_name_article': record.from_current_name_article,
            },
        })
    return {
        'entity_id': chain.entity_id,
        'chain_key': chain.chain_key,
        'source': chain.source_list,
        'names': [
            {'name': name.canonical, 'aliases': list(name.aliases), 'link': name.link}
            for name in chain.names
        ],
        'changes': changes,
    }


@handles_errors("导出知识库")
def cmd_export(chains_path: str, excerpts_path: str, out: str) -> int:
    """导出实体演化知识库（按 entity_id、chain_key 排序）"""
    chains = read_chain_file(chains_path)
    records = _read_excerpts(excerpts_path)
    check_consistency(chains, records)

    excerpts = {(r.chain_key, r.position): r for r in sorted(records, key=record_sort_key)}
    entities = [
        _entity_document(chain, excerpts)
        for chain in sorted(chains, key=lambda c: (c.entity_id, c.chain_key))
    ]
    document = {'entities': entities}
    _write_text(out, json.dumps(document, ensure_ascii=False, indent=2) + '\n')
    logger.info("导出 %d 个实体: %s", len(entities), out)
    return EXIT_OK

"""统计汇总

将演化链、解析日志和摘录记录汇总为 StatsReport：实体、变更、摘录三组计数，
距离分布，精确的均值与中位数，以及覆盖率估计。

百分比以 Fraction 精确保存，仅在输出时按一位小数四舍五入（half-up）。
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.data_models import (
    CHANGE_COUNT_KEYS,
    ENTITY_COUNT_KEYS,
    EXCERPT_COUNT_KEYS,
    NAME_COUNT_KEYS,
    EvolutionChain,
    ExcerptRecord,
    ResolutionRecord,
    StatsReport,
)
from src.utils.error_handler import EmptyInputError, InconsistentInputError, UndefinedRateError


logger = logging.getLogger(__name__)


def distance_histogram(records: Iterable[ExcerptRecord]) -> Dict[int, int]:
    """统计每个句子距离的摘录数

    Example:
        >>> distance_histogram([])
        {}
    """
    distances = np.fromiter((r.distance for r in records), dtype=np.int64)
    if distances.size == 0:
        return {}
    values, counts = np.unique(distances, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def moments_from_histogram(histogram: Mapping[int, int]) -> Tuple[Optional[Fraction], Optional[Fraction]]:
    """由距离分布计算精确均值和中位数（偶数个时取中间两值的平均）

    Returns:
        分布为空时返回 (None, None)
    """
    items = sorted((d, c) for d, c in histogram.items() if c > 0)
    if not items:
        return None, None
    distances = np.array([d for d, _ in items], dtype=np.int64)
    counts = np.array([c for _, c in items], dtype=np.int64)
    total = int(counts.sum())
    mean = Fraction(int((distances * counts).sum()), total)

    cumulative = np.cumsum(counts)

    def nth(rank: int) -> int:
        # rank 从0开始
        return int(distances[int(np.searchsorted(cumulative, rank, side='right'))])

    if total % 2:
        median = Fraction(nth(total // 2))
    else:
        median = Fraction(nth(total // 2 - 1) + nth(total // 2), 2)
    return mean, median


def summary_moments(records: Sequence[ExcerptRecord]) -> Tuple[Fraction, Fraction]:
    """摘录距离的精确均值和中位数

    Raises:
        EmptyInputError: 没有摘录
    """
    mean, median = moments_from_histogram(distance_histogram(records))
    if mean is None:
        raise EmptyInputError("没有摘录，均值和中位数无定义")
    return mean, median


def _as_resolution_map(resolutions) -> Dict[str, ResolutionRecord]:
    if isinstance(resolutions, Mapping):
        return dict(resolutions)
    return {r.chain_key: r for r in resolutions}


def check_consistency(chains: Sequence[EvolutionChain], records: Iterable[ExcerptRecord]) -> None:
    """检查摘录记录是否都指向已知演化链中的带年份变更

    Raises:
        InconsistentInputError: 摘录引用了未知的演化链或变更位置
    """
    by_key = {chain.chain_key: chain for chain in chains}
    seen = set()
    for record in records:
        chain = by_key.get(record.chain_key)
        if chain is None:
            raise InconsistentInputError(f"摘录引用了未知的演化链: {record.chain_key!r}")
        if not 0 <= record.position < len(chain.changes):
            raise InconsistentInputError(
                f"摘录的变更位置 {record.position} 超出演化链 {record.chain_key!r} 的范围"
            )
        if (record.chain_key, record.position) in seen:
            raise InconsistentInputError(
                f"演化链 {record.chain_key!r} 的第 {record.position} 次变更有重复摘录"
            )
        seen.add((record.chain_key, record.position))


def aggregate(chains: Sequence[EvolutionChain],
              resolutions: Union[Mapping[str, ResolutionRecord], Iterable[ResolutionRecord]],
              records: Sequence[ExcerptRecord]) -> StatsReport:
    """汇总一次运行的全部计数

    Args:
        chains: 演化链
        resolutions: chain_key → 解析摘要（或解析摘要序列）；缺失的实体视为不可解析
        records: 每次被完整提及的变更一条摘录

    Returns:
        StatsReport: 空输入得到全零报告
    """
    resolution_map = _as_resolution_map(resolutions)
    entity = dict.fromkeys(ENTITY_COUNT_KEYS, 0)
    change = dict.fromkeys(CHANGE_COUNT_KEYS, 0)
    names = dict.fromkeys(NAME_COUNT_KEYS, 0)

    for chain in chains:
        resolution = resolution_map.get(chain.chain_key)
        resolvable = resolution is not None and resolution.resolvable
        dated_changes = sum(1 for c in chain.changes if c.is_dated)

        entity['total'] += 1
        entity['with_dates'] += chain.is_dated
        if resolvable:
            entity['resolvable'] += 1
            entity['current_name_resolvable'] += resolution.current_title is not None
            entity['linked_on_list'] += resolution.linked_on_list
            entity['multi_article'] += len(resolution.articles) > 1
            entity['resolvable_and_dated'] += chain.is_dated

        change['total'] += len(chain.changes)
        change['with_dates'] += dated_changes
        if resolvable:
            change['of_entities_with_articles'] += len(chain.changes)
            change['with_articles_and_dates'] += dated_changes

        distinct = len({name.key for name in chain.names})
        names['total_names'] += len(chain.names)
        names['distinct_names'] += distinct
        names['renamed_entities'] += distinct > 1

    records = list(records)
    change['mentioned'] = len(records)
    change['mentioned_in_current_article'] = sum(1 for r in records if r.in_current_article)

    histogram = distance_histogram(records)
    excerpt = {
        'total': len(records),
        'dist_lt_10': sum(c for d, c in histogram.items() if d < 10),
        'dist_lt_3': sum(c for d, c in histogram.items() if d < 3),
        'dist_eq_2': histogram.get(2, 0),
        'dist_eq_1': histogram.get(1, 0),
        'dist_eq_0': histogram.get(0, 0),
    }
    mean, median = moments_from_histogram(histogram)
    return StatsReport(
        entity_counts=entity,
        change_counts=change,
        excerpt_counts=excerpt,
        distance_histogram=histogram,
        mean_distance=mean,
        median_distance=median,
        name_counts=names,
    )


def _sum_counts(a: Mapping[str, int], b: Mapping[str, int]) -> Dict[str, int]:
    return {key: a.get(key, 0) + b.get(key, 0) for key in dict.fromkeys(list(a) + list(b))}


def merge_reports(a: StatsReport, b: StatsReport) -> StatsReport:
    """合并两个互不相交的实体分区的报告

    计数与分布逐项相加，均值和中位数由合并后的分布重新计算，因此合并满足结合律。
    """
    merged = dict(a.distance_histogram)
    for distance, count in b.distance_histogram.items():
        merged[distance] = merged.get(distance, 0) + count
    histogram = dict(sorted(merged.items()))
    mean, median = moments_from_histogram(histogram)
    return StatsReport(
        entity_counts=_sum_counts(a.entity_counts, b.entity_counts),
        change_counts=_sum_counts(a.change_counts, b.change_counts),
        excerpt_counts=_sum_counts(a.excerpt_counts, b.excerpt_counts),
        distance_histogram=histogram,
        mean_distance=mean,
        median_distance=median,
        name_counts=_sum_counts(a.name_counts, b.name_counts),
    )


def percentage(count: int, base: int) -> Optional[Fraction]:
    """精确百分比 100 * count / base；基数为0时返回None"""
    if base == 0:
        return None
    return Fraction(100 * count, base)


def format_percentage(value: Optional[Fraction]) -> str:
    """按一位小数四舍五入（half-up）格式化百分比

    Example:
        >>> format_percentage(Fraction(48800, 572))
        '85.3%'
    """
    if value is None:
        return '-'
    tenths = math.floor(Fraction(value) * 10 + Fraction(1, 2))
    sign = '-' if tenths < 0 else ''
    tenths = abs(tenths)
    return f"{sign}{tenths // 10}.{tenths % 10}%"


def coverage_product(*rates) -> Fraction:
    """各比率的乘积

    Raises:
        UndefinedRateError: 某个比率无定义（None）
    """
    product = Fraction(1)
    for rate in rates:
        if rate is None:
            raise UndefinedRateError("比率的基数为0")
        product *= Fraction(rate)
    return product


def _rate(count: int, base: int, label: str) -> Fraction:
    if base == 0:
        raise UndefinedRateError(f"{label} 的基数为0")
    return Fraction(count, base)


def coverage_estimate(report: StatsReport) -> Fraction:
    """覆盖率估计：可解析实体比率 × 完整提及比率 × 距离小于3的摘录比率

    Raises:
        UndefinedRateError: 任一比率的基数为0
    """
    entity = report.entity_counts
    change = report.change_counts
    excerpt = report.excerpt_counts
    return coverage_product(
        _rate(entity['resolvable'], entity['total'], "可解析实体比率"),
        _rate(change['mentioned'], change['with_articles_and_dates'], "完整提及比率"),
        _rate(excerpt['dist_lt_3'], excerpt['total'], "短距离摘录比率"),
    )


def entity_averages(report: StatsReport) -> Dict[str, Optional[Fraction]]:
    """每个实体的平均变更数和每个更名实体的平均不同名称数"""
    entities = report.entity_counts['total']
    renamed = report.name_counts['renamed_entities']
    return {
        'changes_per_entity': Fraction(report.change_counts['total'], entities) if entities else None,
        'names_per_renamed_entity': (
            Fraction(report.name_counts['distinct_names'], renamed) if renamed else None
        ),
    }


@dataclass(frozen=True)
class ReportRow:
    """报告表格的一行

    Attributes:
        section: entities / changes / excerpts
        key: 计数键
        label: 行标签
        level: 缩进层级
        count: 计数
        global_base: 全局百分比的基数
        nested_base: 嵌套百分比的基数（没有嵌套百分比时为None）
    """
    section: str
    key: str
    label: str
    level: int
    count: int
    global_base: int
    nested_base: Optional[int] = None

    @property
    def global_percentage(self) -> Optional[Fraction]:
        return percentage(self.count, self.global_base)

    @property
    def nested_percentage(self) -> Optional[Fraction]:
        if self.nested_base is None:
            return None
        return percentage(self.count, self.nested_base)


# (section, key, label, level, nested base key)
PLACES_LAYOUT = (
    ('entities', 'total', "Entities", 0, None),
    ('entities', 'with_dates', "annotated with change dates", 1, None),
    ('entities', 'resolvable', "resolvable to articles", 1, 'resolvable'),
    ('entities', 'current_name_resolvable', "most current name resolvable", 2, 'resolvable'),
    ('entities', 'linked_on_list', "linked on a list", 2, 'resolvable'),
    ('entities', 'multi_article', "with multiple articles", 2, 'resolvable'),
    ('entities', 'resolvable_and_dated', "annotated with change dates", 2, 'resolvable'),
    ('changes', 'total', "Name changes", 0, None),
    ('changes', 'of_entities_with_articles', "of entities with articles", 1, None),
    ('changes', 'with_dates', "annotated with dates", 1, None),
    ('changes', 'with_articles_and_dates', "of entities with articles, annotated with dates", 1,
     'with_articles_and_dates'),
    ('changes', 'mentioned', "mentioned in an article", 2, 'with_articles_and_dates'),
    ('changes', 'mentioned_in_current_article', "mentioned in the most current name's article", 2,
     'with_articles_and_dates'),
    ('excerpts', 'total', "Extracted excerpts", 0, None),
    ('excerpts', 'dist_lt_10', "sentence distance less than 10", 1, 'dist_lt_10'),
    ('excerpts', 'dist_lt_3', "sentence distance less than 3", 2, 'dist_lt_10'),
    ('excerpts', 'dist_eq_2', "sentence distance 2", 2, 'dist_lt_10'),
    ('excerpts', 'dist_eq_1', "sentence distance 1", 2, 'dist_lt_10'),
    ('excerpts', 'dist_eq_0', "sentence distance 0", 2, 'dist_lt_10'),
)

# 整理记录没有列表链接，只保留不依赖列表页的行
PRODUCT_OMITTED_ROWS = frozenset({
    ('entities', 'with_dates'),
    ('entities', 'current_name_resolvable'),
    ('entities', 'linked_on_list'),
    ('entities', 'multi_article'),
    ('changes', 'mentioned_in_current_article'),
})
PRODUCTS_LAYOUT = tuple(
    row for row in PLACES_LAYOUT if (row[0], row[1]) not in PRODUCT_OMITTED_ROWS
)

LAYOUTS = {'places': PLACES_LAYOUT, 'products': PRODUCTS_LAYOUT}
LAYOUT_AUTO = 'auto'


def select_layout(chains: Iterable[EvolutionChain]) -> str:
    """自动选择报告表格结构

    任一名称带有列表链接时说明输入来自列表页，使用完整的 places 结构；
    否则（只有人工整理记录）使用 products 结构。

    Args:
        chains: 本次运行的演化链

    Returns:
        str: 'places' 或 'products'
    """
    for chain in chains:
        if any(name.link is not None for name in chain.names):
            return 'places'
    return 'products'


def report_rows(report: StatsReport, layout: str = 'places') -> List[ReportRow]:
    """按表格结构生成报告行

    全局百分比以每节的总数为基数；嵌套百分比以该节中标记为100%的行为基数。

    Args:
        report: 统计报告
        layout: 表格结构名称，见 LAYOUTS

    Returns:
        List[ReportRow]: 表格行

    Raises:
        ValueError: 未知的表格结构
    """
    if layout not in LAYOUTS:
        raise ValueError(f"未知的报告结构: {layout!r}，可选 {sorted(LAYOUTS)}")
    sections = {
        'entities': report.entity_counts,
        'changes': report.change_counts,
        'excerpts': report.excerpt_counts,
    }
    rows = []
    for section, key, label, level, nested_key in LAYOUTS[layout]:
        counts = sections[section]
        rows.append(ReportRow(
            section=section,
            key=key,
            label=label,
            level=level,
            count=counts[key],
            global_base=counts['total'],
            nested_base=counts[nested_key] if nested_key else None,
        ))
    return rows

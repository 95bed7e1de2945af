"""数据转换工具

提供各种数据格式转换功能，包括：
- 摘录记录、解析摘要与 JSON 记录之间的转换
- 统计报告到结构化文档、对齐文本表格和直方图CSV的转换
"""

import csv
import io
import json
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional

from src.core.data_models import (
    EntityName,
    ExcerptRecord,
    NameChange,
    NameResolution,
    ResolutionRecord,
    StatsReport,
)
from src.core.statistics import (
    coverage_estimate,
    entity_averages,
    format_percentage,
    report_rows,
)
from src.utils.error_handler import SchemaError, UndefinedRateError


def to_json_line(record: Mapping[str, Any]) -> str:
    """序列化为一行JSON（键排序、保留非ASCII字符）"""
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def fraction_to_text(value: Optional[Fraction]) -> Optional[str]:
    """将分数转换为文本

    Example:
        >>> fraction_to_text(Fraction(199, 10))
        '199/10'
        >>> fraction_to_text(Fraction(1))
        '1'
    """
    if value is None:
        return None
    return str(Fraction(value))


def fraction_to_decimal(value: Optional[Fraction], digits: int = 4) -> Optional[float]:
    """将分数转换为保留指定小数位的浮点数

    Args:
        value: 精确分数，可为None
        digits: 保留的小数位数

    Returns:
        Optional[float]: 四舍五入后的小数；value 为None时返回None
    """
    if value is None:
        return None
    return round(float(value), digits)


def _require(data: Mapping[str, Any], field: str, index: int):
    """取出必需字段

    Args:
        data: 记录
        field: 字段名
        index: 记录序号（用于错误消息）

    Returns:
        字段值

    Raises:
        SchemaError: 缺少字段
    """
    if field not in data:
        raise SchemaError("缺少字段", index, field)
    return data[field]


def excerpt_to_dict(record: ExcerptRecord) -> Dict[str, Any]:
    """将摘录记录转换为可序列化的字典"""
    return {
        'entity_id': record.entity_id,
        'chain_key': record.chain_key,
        'position': record.position,
        'preceding': record.change.preceding.canonical,
        'succeeding': record.change.succeeding.canonical,
        'year': record.change.year,
        'article': record.article,
        'from': record.from_idx,
        'to': record.to_idx,
        'distance': record.distance,
        'text': record.text,
        'from_current_name_article': record.from_current_name_article,
        'in_current_article': record.in_current_article,
    }


def excerpt_from_dict(data: Mapping[str, Any], index: int = 0) -> ExcerptRecord:
    """由字典重建摘录记录

    Raises:
        SchemaError: 缺少字段或字段类型错误
    """
    if not isinstance(data, Mapping):
        raise SchemaError("记录必须是对象", index, '<record>')
    distance = _require(data, 'distance', index)
    from_idx = _require(data, 'from', index)
    to_idx = _require(data, 'to', index)
    for field, value in (('distance', distance), ('from', from_idx), ('to', to_idx)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise SchemaError("必须是非负整数", index, field)
    if to_idx - from_idx != distance:
        raise SchemaError("距离与窗口不一致", index, 'distance')

    change = NameChange(
        preceding=EntityName(_require(data, 'preceding', index)),
        succeeding=EntityName(_require(data, 'succeeding', index)),
        year=data.get('year'),
    )
    return ExcerptRecord(
        change=change,
        article=_require(data, 'article', index),
        from_idx=from_idx,
        to_idx=to_idx,
        distance=distance,
        text=_require(data, 'text', index),
        from_current_name_article=bool(data.get('from_current_name_article', False)),
        in_current_article=bool(data.get('in_current_article', False)),
        entity_id=_require(data, 'entity_id', index),
        chain_key=_require(data, 'chain_key', index),
        position=_require(data, 'position', index),
    )


def resolution_to_dict(record: ResolutionRecord) -> Dict[str, Any]:
    """将解析摘要转换为解析日志中的一行"""
    return {
        'section': 'resolved' if record.resolvable else 'unresolved',
        'entity_id': record.entity_id,
        'chain_key': record.chain_key,
        'articles': list(record.articles),
        'current_title': record.current_title,
        'linked_on_list': record.linked_on_list,
        'names': [
            {
                'name': n.name,
                'status': n.status,
                'resolved_title': n.resolved_title,
                'via': n.via,
                'error_detail': n.error_detail,
            }
            for n in record.names
        ],
    }


def resolution_from_dict(data: Mapping[str, Any], index: int = 0) -> ResolutionRecord:
    """由解析日志中的一行重建解析摘要

    Raises:
        SchemaError: 缺少字段
    """
    if not isinstance(data, Mapping):
        raise SchemaError("记录必须是对象", index, '<record>')
    articles = _require(data, 'articles', index)
    if not isinstance(articles, list):
        raise SchemaError("必须是数组", index, 'articles')
    names = tuple(
        NameResolution(
            name=n.get('name', ''),
            status=n.get('status', ''),
            resolved_title=n.get('resolved_title'),
            via=n.get('via', ''),
            error_detail=n.get('error_detail'),
        )
        for n in data.get('names', [])
    )
    return ResolutionRecord(
        entity_id=_require(data, 'entity_id', index),
        chain_key=_require(data, 'chain_key', index),
        articles=tuple(articles),
        current_title=data.get('current_title'),
        linked_on_list=bool(data.get('linked_on_list', False)),
        names=names,
    )


def report_to_document(report: StatsReport, title: str = "Name evolutions",
                       layout: str = 'places') -> Dict[str, Any]:
    """将统计报告转换为结构化文档

    文档包含表格行（计数与两列百分比）、(距离, 计数) 对形式的分布、
    精确的均值与中位数、每实体平均值和覆盖率估计。

    Args:
        report: 统计报告
        title: 报告标题
        layout: 表格结构（places 或 products）

    Returns:
        Dict[str, Any]: 可直接序列化为JSON的文档
    """
    rows = []
    for row in report_rows(report, layout):
        rows.append({
            'section': row.section,
            'key': row.key,
            'label': row.label,
            'level': row.level,
            'count': row.count,
            'percentage': format_percentage(row.global_percentage) if row.global_base else None,
            'nested_percentage': (
                format_percentage(row.nested_percentage) if row.nested_base else None
            ),
        })

    try:
        coverage = coverage_estimate(report)
    except UndefinedRateError:
        coverage = None

    averages = entity_averages(report)
    return {
        'title': title,
        'layout': layout,
        'rows': rows,
        'histogram': [[d, c] for d, c in sorted(report.distance_histogram.items())],
        'mean_distance': fraction_to_text(report.mean_distance),
        'mean_distance_decimal': fraction_to_decimal(report.mean_distance, 1),
        'median_distance': fraction_to_text(report.median_distance),
        'averages': {
            key: {'exact': fraction_to_text(value), 'decimal': fraction_to_decimal(value, 2)}
            for key, value in averages.items()
        },
        'coverage_estimate': {
            'exact': fraction_to_text(coverage),
            'decimal': fraction_to_decimal(coverage, 3),
        },
        'counts': {
            'entities': dict(report.entity_counts),
            'changes': dict(report.change_counts),
            'excerpts': dict(report.excerpt_counts),
            'names': dict(report.name_counts),
        },
    }


def render_text_table(report: StatsReport, title: str = "Name evolutions",
                      layout: str = 'places') -> str:
    """渲染终端用的对齐文本表格"""
    table_rows = report_rows(report, layout)
    lines: List[List[str]] = []
    for row in table_rows:
        label = '  ' * row.level + ('- ' if row.level else '') + row.label
        nested = format_percentage(row.nested_percentage) if row.nested_base is not None else ''
        lines.append([label, f"{row.count:,}", format_percentage(row.global_percentage), nested])

    header = ['Subject', 'Count', 'Percentage', '']
    widths = [max(len(r[i]) for r in lines + [header]) for i in range(4)]

    def fmt(cells: List[str]) -> str:
        parts = [cells[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return ' | '.join(parts).rstrip()

    separator = '-+-'.join('-' * w for w in widths)
    out = [title, fmt(header), separator]
    section = None
    for row, cells in zip(table_rows, lines):
        if section is not None and row.section != section:
            out.append(separator)
        section = row.section
        out.append(fmt(cells))
    out.append(separator)

    mean = fraction_to_decimal(report.mean_distance, 1)
    median = report.median_distance
    out.append(f"mean distance: {mean if mean is not None else '-'}")
    out.append(f"median distance: {fraction_to_text(median) if median is not None else '-'}")
    for key, value in entity_averages(report).items():
        decimal = fraction_to_decimal(value, 2)
        out.append(f"{key.replace('_', ' ')}: {decimal if decimal is not None else '-'}")
    try:
        out.append(f"coverage estimate: {format_percentage(coverage_estimate(report) * 100)}")
    except UndefinedRateError:
        out.append("coverage estimate: -")
    return '\n'.join(out) + '\n'


def histogram_to_csv(histogram: Mapping[int, int]) -> str:
    """将距离分布转换为 distance,count CSV"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['distance', 'count'])
    for distance, count in sorted(histogram.items()):
        writer.writerow([distance, count])
    return buffer.getvalue()

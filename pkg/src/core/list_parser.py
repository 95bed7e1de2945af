"""名称变更列表解析器

将半结构化的名称变更列表页（每个实体一个列表项，名称之间以箭头分隔）
以及人工整理的变更记录解析为 EvolutionChain。

列表项格式示例::

    * Kendros (Kendrisos/Kendrisia) → Odryssa → ... → Plovdiv
    * [[Edo]] → [[Tokyo]] (1868)
    * <nowiki>Georgia (country)</nowiki> → Georgia (1991)

[[...]] 链接和 <nowiki>...</nowiki> 内的括号、箭头和斜杠按字面处理。
"""

import json
import logging
import re
from collections import OrderedDict
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Tuple

from src.core.data_models import (
    Annotation,
    EntityName,
    EvolutionChain,
    ListLine,
    clean_text,
    has_digit,
    has_reserved,
    is_capital_initial,
    name_key,
    validate_chain,
)
from src.utils.error_handler import MalformedLineError, SchemaError


logger = logging.getLogger(__name__)


ARROWS = ('→', '->')

# 列表项前缀：*、#、单独的 -、以及 "1." / "1)" 形式的编号
BULLET_PATTERN = re.compile(r'^\s*(?:[*#]+|-(?!>)|\d+[.)])\s*')

# 独立的3-4位数字（不是更长数字的一部分）
YEAR_PATTERN = re.compile(r'(?<!\d)(\d{3,4})(?!\d)')

NOWIKI_OPEN = '<nowiki>'
NOWIKI_CLOSE = '</nowiki>'
NOWIKI_PATTERN = re.compile(r'<nowiki>(.*?)</nowiki>', re.DOTALL)
WIKI_LINK_PATTERN = re.compile(r'\[\[([^\[\]|]+)(?:\|(<nowiki>.*?</nowiki>|[^\[\]]*))?\]\]')
EMPHASIS_PATTERN = re.compile(r"'{2,}")
CITATION_PATTERN = re.compile(r'\[\d+\]')


def _unique_aliases(canonical: str, candidates: Iterable[str]) -> Tuple[str, ...]:
    """去除与规范名称相同或重复（大小写无关）的别名，保持顺序"""
    seen = {name_key(canonical)}
    result = []
    for alias in candidates:
        key = name_key(alias)
        if key in seen:
            continue
        seen.add(key)
        result.append(alias)
    return tuple(result)


def _is_alias(text: str) -> bool:
    return is_capital_initial(text) and not has_digit(text) and not has_reserved(text)


def _split_aliases(text: str, aliases: List[str], discarded: List[str]) -> None:
    """按 '/' 拆分文本，可作别名的部分放入 aliases，其余放入 discarded"""
    for part in text.split('/'):
        part = clean_text(part)
        if not part:
            continue
        if _is_alias(part):
            aliases.append(part)
        else:
            discarded.append(part)


def parse_annotation(bracket_text: str) -> Annotation:
    """解析一对括号内的内容

    含有3-4位数字的片段贡献一个年份（范围取第一个年份），数字前的文字仍按
    别名规则处理；其余片段按 '/' 拆分，大写字母开头且不含数字和保留字符的
    作为别名，其他内容被丢弃。

    Args:
        bracket_text: 括号内部文本（不含括号本身）

    Returns:
        Annotation: 年份、别名和丢弃内容

    Example:
        >>> parse_annotation('Kendrisos/Kendrisia').aliases
        ('Kendrisos', 'Kendrisia')
    """
    years = []
    aliases: List[str] = []
    discarded: List[str] = []

    for token in re.split(r'[,;]', bracket_text):
        token = clean_text(token)
        if not token:
            continue

        match = YEAR_PATTERN.search(token)
        if match:
            years.append(int(match.group(1)))
            # "Byzantium/Bisantium 667 BC" 同时给出年份和别名
            _split_aliases(re.split(r'\d', token, maxsplit=1)[0], aliases, discarded)
            continue

        _split_aliases(token, aliases, discarded)

    return Annotation(years=tuple(years), aliases=tuple(aliases), discarded=tuple(discarded))


def strip_bullet(line: str) -> str:
    """去除列表项前缀"""
    return BULLET_PATTERN.sub('', line, count=1)


def is_bullet(line: str) -> bool:
    return bool(BULLET_PATTERN.match(line)) and bool(line.strip())


def _opaque_end(body: str, i: int, line: str, source_list: str) -> Optional[int]:
    """若 i 处开始一个 <nowiki>...</nowiki> 或 [[...]]，返回其结束位置

    Raises:
        MalformedLineError: nowiki 未闭合
    """
    if body.startswith(NOWIKI_OPEN, i):
        end = body.find(NOWIKI_CLOSE, i + len(NOWIKI_OPEN))
        if end < 0:
            raise MalformedLineError("nowiki 未闭合", line, source_list=source_list)
        return end + len(NOWIKI_CLOSE)
    if body.startswith('[[', i):
        j = i + 2
        while j < len(body):
            if body.startswith(NOWIKI_OPEN, j):
                close = body.find(NOWIKI_CLOSE, j + len(NOWIKI_OPEN))
                if close < 0:
                    return None
                j = close + len(NOWIKI_CLOSE)
            elif body.startswith(']]', j):
                return j + 2
            else:
                j += 1
    return None


def split_list_line(line: str, source_list: str = "") -> ListLine:
    """按箭头拆分列表行，并提取每个名称后的括号内容

    括号内、链接内和 nowiki 内的箭头不作为分隔符。

    Raises:
        MalformedLineError: 括号不配对或 nowiki 未闭合
    """
    body = strip_bullet(line)
    segments = []
    current = []
    depth = 0
    i = 0
    while i < len(body):
        end = _opaque_end(body, i, line, source_list)
        if end is not None:
            current.append(body[i:end])
            i = end
            continue
        ch = body[i]
        if ch == '(':
            depth += 1
        elif ch == ')':
            depth -= 1
            if depth < 0:
                raise MalformedLineError("括号不配对", line, source_list=source_list)
        elif depth == 0:
            arrow = next((a for a in ARROWS if body.startswith(a, i)), None)
            if arrow:
                segments.append(''.join(current))
                current = []
                i += len(arrow)
                continue
        current.append(ch)
        i += 1
    if depth != 0:
        raise MalformedLineError("括号不配对", line, source_list=source_list)
    segments.append(''.join(current))

    names_with_annotations = []
    for segment in segments:
        outside = []
        brackets = []
        inside = []
        depth = 0
        i = 0
        while i < len(segment):
            end = _opaque_end(segment, i, line, source_list)
            if end is not None:
                (inside if depth > 0 else outside).append(segment[i:end])
                i = end
                continue
            ch = segment[i]
            i += 1
            if ch == '(':
                if depth > 0:
                    inside.append(ch)
                depth += 1
            elif ch == ')':
                depth -= 1
                if depth == 0:
                    brackets.append(''.join(inside))
                    inside = []
                    # 括号位置保留一个空格，避免前后文字粘连
                    outside.append(' ')
                else:
                    inside.append(ch)
            elif depth > 0:
                inside.append(ch)
            else:
                outside.append(ch)
        names_with_annotations.append((''.join(outside), tuple(brackets)))

    return ListLine(raw=line, names_with_annotations=tuple(names_with_annotations))


def _parse_label(text: str) -> Tuple[str, bool]:
    """清理链接显示文字，返回 (文字, 是否为 nowiki 字面量)"""
    literal = NOWIKI_PATTERN.fullmatch(text)
    if literal:
        return clean_text(literal.group(1)), True
    return clean_text(CITATION_PATTERN.sub('', EMPHASIS_PATTERN.sub('', text))), False


def _parse_name(text: str) -> Tuple[str, Optional[str], bool]:
    """清理名称文本

    Returns:
        Tuple[str, Optional[str], bool]: (显示名称, 链接目标, 是否为字面量)。
        字面量名称不再按 '/' 拆出别名。
    """
    stripped = clean_text(text)
    literal = NOWIKI_PATTERN.fullmatch(stripped)
    if literal:
        return clean_text(literal.group(1)), None, True

    unemphasized = clean_text(CITATION_PATTERN.sub('', EMPHASIS_PATTERN.sub('', stripped)))
    for candidate in (stripped, unemphasized):
        whole = WIKI_LINK_PATTERN.fullmatch(candidate)
        if not whole:
            continue
        target = clean_text(whole.group(1))
        if whole.group(2) is None:
            return target, target, False
        label, is_literal = _parse_label(whole.group(2))
        if not label and not is_literal:
            label = target
        return label, target, is_literal

    plain = WIKI_LINK_PATTERN.sub(lambda m: m.group(2) or m.group(1), unemphasized)
    return clean_text(plain), None, False


def _slash_aliases(canonical: str) -> List[str]:
    if '/' not in canonical:
        return []
    return [p.strip() for p in canonical.split('/')[1:] if _is_alias(p.strip())]


def parse_list_line(line: str, source_list: str = "") -> Optional[EvolutionChain]:
    """解析单个列表项

    每对以箭头分隔的相邻名称构成一次名称变更。括号中的年份属于以该名称
    结尾的变更，别名属于该名称本身。

    Args:
        line: 一个列表项（允许带 *、-、# 或编号前缀）
        source_list: 来源列表页标识

    Returns:
        Optional[EvolutionChain]: 演化链；行中没有箭头时返回None

    Raises:
        MalformedLineError: 箭头旁名称为空、括号不配对或自我更名
    """
    if not any(arrow in line for arrow in ARROWS):
        return None

    parsed = split_list_line(line, source_list)
    if len(parsed.names_with_annotations) < 2:
        return None

    names = []
    years: List[Optional[int]] = [None] * (len(parsed.names_with_annotations) - 1)

    for position, (raw_name, bracket_texts) in enumerate(parsed.names_with_annotations):
        canonical, link, literal = _parse_name(raw_name)
        if not canonical:
            raise MalformedLineError("箭头旁的名称为空", line, source_list=source_list)

        aliases = [] if literal else _slash_aliases(canonical)

        name_years = []
        for bracket_text in bracket_texts:
            annotation = parse_annotation(bracket_text)
            aliases.extend(annotation.aliases)
            name_years.extend(annotation.years)
            if annotation.discarded:
                logger.warning("%s: 丢弃括号内容 %s (名称 %r)",
                               source_list or '<list>', list(annotation.discarded), canonical)

        if name_years:
            if position == 0:
                logger.warning("%s: 第一个名称 %r 的年份 %s 不属于任何变更，已忽略",
                               source_list or '<list>', canonical, name_years)
            else:
                years[position - 1] = name_years[0]
                if len(name_years) > 1:
                    logger.warning("%s: 名称 %r 有多个年份 %s，使用 %d",
                                   source_list or '<list>', canonical, name_years, name_years[0])

        names.append(EntityName(canonical=canonical,
                                aliases=_unique_aliases(canonical, aliases),
                                link=link))

    for previous, following in zip(names, names[1:]):
        if previous.key == following.key:
            raise MalformedLineError(f"自我更名 {previous.canonical!r}", line,
                                     source_list=source_list)

    return EvolutionChain.from_names(names, years, source_list)


def parse_list_page(document: str, source_list: str = "") -> List[EvolutionChain]:
    """解析整个列表页

    对每个列表项应用 parse_list_line；非列表项以及不含箭头的行被跳过。

    Raises:
        MalformedLineError: 附带行号（从1开始）
    """
    chains = []
    for line_number, line in enumerate(document.splitlines(), start=1):
        if not is_bullet(line):
            continue
        try:
            chain = parse_list_line(line, source_list)
        except MalformedLineError as e:
            raise e.with_line_number(line_number) from e
        if chain is not None:
            chains.append(chain)
    logger.debug("%s: 解析得到 %d 条演化链", source_list or '<list>', len(chains))
    return chains


def dedupe_chains(chains: Iterable[EvolutionChain]) -> List[EvolutionChain]:
    """合并重复的演化链

    名称序列（大小写无关）相同的演化链视为重复；保留第一次出现的演化链，
    并合并所有重复项的年份、别名和链接。同一变更年份冲突时保留第一个。
    """
    merged: "OrderedDict[Tuple[str, ...], dict]" = OrderedDict()

    for chain in chains:
        key = chain.sequence_key
        state = merged.get(key)
        if state is None:
            merged[key] = {
                'source_list': chain.source_list,
                'canonicals': [name.canonical for name in chain.names],
                'aliases': [list(name.aliases) for name in chain.names],
                'links': [name.link for name in chain.names],
                'years': list(chain.years),
            }
            continue

        for i, name in enumerate(chain.names):
            state['aliases'][i].extend(name.aliases)
            if state['links'][i] is None and name.link is not None:
                state['links'][i] = name.link
        for i, year in enumerate(chain.years):
            if year is None:
                continue
            if state['years'][i] is None:
                state['years'][i] = year
            elif state['years'][i] != year:
                logger.warning("重复演化链 %s 的第 %d 次变更年份冲突: 保留 %d，忽略 %d (%s)",
                               chain.chain_key, i, state['years'][i], year, chain.source_list)

    result = []
    for state in merged.values():
        names = [
            EntityName(canonical=canonical,
                       aliases=_unique_aliases(canonical, aliases),
                       link=link)
            for canonical, aliases, link in zip(state['canonicals'], state['aliases'], state['links'])
        ]
        result.append(EvolutionChain.from_names(names, state['years'], state['source_list']))
    return result


def _needs_literal(text: str) -> bool:
    """判断名称按原样写出后能否被解析回自身"""
    if any(ch in text for ch in '()') or any(arrow in text for arrow in ARROWS):
        return True
    # 未闭合的 "[[" 会与后面名称里的 "]]" 拼成链接
    if '[[' in text:
        return True
    if strip_bullet(text) != text:
        return True
    return _parse_name(text) != (text, None, False)


def _label_needs_literal(label: str) -> bool:
    return '[' in label or ']' in label or _parse_label(label) != (label, False)


def _name_token(name: EntityName, literal: bool) -> str:
    if name.link is None:
        return f"{NOWIKI_OPEN}{name.canonical}{NOWIKI_CLOSE}" if literal else name.canonical
    if literal:
        return f"[[{name.link}|{NOWIKI_OPEN}{name.canonical}{NOWIKI_CLOSE}]]"
    if name.link == name.canonical:
        return f"[[{name.link}]]"
    return f"[[{name.link}|{name.canonical}]]"


def normalize_chain_line(chain: EvolutionChain) -> str:
    """将演化链序列化为规范的列表行

    格式: "Name1 (Alias1/Alias2) → Name2 (Year) → ..."。无法按原样写出的名称
    （含括号、箭头、列表前缀或链接语法，或斜杠拆分结果与别名不一致）用
    <nowiki> 包裹。对任何通过 validate_chain 的演化链满足
    parse_list_line(normalize_chain_line(c)) == c。

    Raises:
        ValueError: 演化链未通过验证
    """
    problems = validate_chain(chain)
    if problems:
        raise ValueError(f"无法规范化无效的演化链: {'; '.join(problems)}")

    parts = []
    for position, name in enumerate(chain.names):
        if name.link is None:
            literal = _needs_literal(name.canonical)
        else:
            literal = _label_needs_literal(name.canonical)

        aliases = list(name.aliases)
        if not literal:
            implied = _unique_aliases(name.canonical, _slash_aliases(name.canonical))
            if tuple(aliases[:len(implied)]) == implied:
                aliases = aliases[len(implied):]
            else:
                literal = True

        token = _name_token(name, literal)
        if aliases:
            token += f" ({'/'.join(aliases)})"
        if position > 0 and chain.changes[position - 1].year is not None:
            token += f" ({chain.changes[position - 1].year:03d})"
        parts.append(token)
    return " → ".join(parts)


def chain_to_record(chain: EvolutionChain) -> dict:
    """将演化链转换为人工整理记录格式"""
    record = {
        'names': [name.canonical for name in chain.names],
        'years': list(chain.years),
        'aliases': [list(name.aliases) for name in chain.names],
        'source': chain.source_list,
    }
    if any(name.link is not None for name in chain.names):
        record['links'] = [name.link for name in chain.names]
    return record


def _require_list(record: Mapping, field: str, index: int, length: Optional[int]) -> list:
    value = record.get(field)
    if not isinstance(value, list):
        raise SchemaError("必须是数组", index, field)
    if length is not None and len(value) != length:
        raise SchemaError(f"长度应为 {length}，实际为 {len(value)}", index, field)
    return value


def _record_to_chain(record: Mapping, index: int) -> EvolutionChain:
    if not isinstance(record, Mapping):
        raise SchemaError("记录必须是对象", index, '<record>')

    raw_names = _require_list(record, 'names', index, None)
    if len(raw_names) < 2:
        raise SchemaError("至少需要两个名称", index, 'names')
    if not all(isinstance(n, str) and n.strip() for n in raw_names):
        raise SchemaError("名称必须是非空文本", index, 'names')
    count = len(raw_names)

    years = _require_list(record, 'years', index, count - 1)
    for year in years:
        if year is None:
            continue
        if isinstance(year, bool) or not isinstance(year, int) or not 1 <= year <= 9999:
            raise SchemaError(f"无效年份 {year!r}", index, 'years')

    raw_aliases = record.get('aliases')
    if raw_aliases is None:
        raw_aliases = [[] for _ in raw_names]
    else:
        raw_aliases = _require_list(record, 'aliases', index, count)
    raw_links = record.get('links')
    if raw_links is None:
        raw_links = [None] * count
    else:
        raw_links = _require_list(record, 'links', index, count)

    source = record.get('source', '')
    if not isinstance(source, str):
        raise SchemaError("必须是文本", index, 'source')

    names = []
    for canonical, aliases, link in zip(raw_names, raw_aliases, raw_links):
        if not isinstance(aliases, list) or not all(isinstance(a, str) for a in aliases):
            raise SchemaError("别名必须是文本数组", index, 'aliases')
        if link is not None and not (isinstance(link, str) and link.strip()):
            raise SchemaError("链接必须是非空文本或null", index, 'links')
        name = EntityName(canonical=clean_text(canonical),
                          aliases=tuple(clean_text(a) for a in aliases),
                          link=clean_text(link) if link is not None else None)
        for field, problems in (('names', name.canonical_violations()),
                                ('aliases', name.alias_violations()),
                                ('links', name.link_violations())):
            if problems:
                raise SchemaError('; '.join(problems), index, field)
        names.append(name)

    chain = EvolutionChain.from_names(names, years, source)
    problems = validate_chain(chain)
    if problems:
        raise SchemaError('; '.join(problems), index, 'names')
    return chain


def load_curated_changes(records: Iterable[Mapping]) -> List[EvolutionChain]:
    """加载人工整理的变更记录

    每条记录包含 names（从旧到新）、years（长度为 len(names)-1，整数或null）、
    aliases（长度为 len(names)）、source，以及可选的 links。

    Raises:
        SchemaError: 指出出错的记录序号（从1开始）和字段
    """
    return [_record_to_chain(record, index) for index, record in enumerate(records, start=1)]


def iter_jsonl_records(path) -> Iterable[dict]:
    """逐行读取 JSON Lines 文件，跳过空行

    Raises:
        SchemaError: 某行不是有效的JSON
    """
    with open(path, 'r', encoding='utf-8') as f:
        index = 0
        for line in f:
            if not line.strip():
                continue
            index += 1
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"无效的JSON ({e.msg})", index, '<json>') from e


def read_chain_file(path) -> List[EvolutionChain]:
    """读取记录格式的演化链文件"""
    return load_curated_changes(iter_jsonl_records(path))


def write_chain_file(path, chains: Iterable[EvolutionChain]) -> int:
    """以记录格式写出演化链，返回写出的条数"""
    count = 0
    with open(Path(path), 'w', encoding='utf-8', newline='\n') as f:
        for chain in chains:
            f.write(json.dumps(chain_to_record(chain), ensure_ascii=False, sort_keys=True))
            f.write('\n')
            count += 1
    return count

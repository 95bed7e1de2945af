"""数据模型定义

包含名称演化链、文章、提及索引、摘录记录、统计报告和运行配置的数据类。
除配置外的所有模型在构造后不可变，可以在并发任务之间安全共享。
"""

import re
import unicodedata
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple


WHITESPACE_RUN = re.compile(r'\s+')

# 别名中不允许出现的字符：列表行语法中的分隔符和括号
ALIAS_RESERVED = frozenset('/,;()[]<>→')
# wiki 标题不允许的字符
TITLE_FORBIDDEN = frozenset('[]{}|<>')
NOWIKI_MARKERS = ('<nowiki>', '</nowiki>')


def clean_text(text: str) -> str:
    """NFC规范化并合并空白

    Example:
        >>> clean_text('  Léopoldville\\n  City ')
        'Léopoldville City'
    """
    return WHITESPACE_RUN.sub(' ', unicodedata.normalize('NFC', text)).strip()


def name_key(text: str) -> str:
    """返回名称的比较键（NFC规范化、去除首尾空白、大小写折叠）

    Example:
        >>> name_key('  Edo ') == name_key('EDO')
        True
    """
    return unicodedata.normalize('NFC', text).strip().casefold()


def is_capital_initial(text: str) -> bool:
    """判断文本是否以大写字母（Unicode类别Lu）开头"""
    return bool(text) and unicodedata.category(text[0]) == 'Lu'


def has_digit(text: str) -> bool:
    """判断文本是否包含数字"""
    return any(ch.isdigit() for ch in text)


def has_reserved(text: str) -> bool:
    """判断文本是否含有别名不允许的保留字符（含 '->' 箭头）"""
    return '->' in text or any(ch in ALIAS_RESERVED for ch in text)


@dataclass(frozen=True)
class EntityName:
    """实体名称

    Attributes:
        canonical: 列表上出现的名称（NFC规范化，空白已合并）
        aliases: 别名，例如拼写变体或其他语言的名称
        link: 列表页上该名称链接到的条目标题（没有链接时为None）
    """
    canonical: str
    aliases: Tuple[str, ...] = ()
    link: Optional[str] = None

    @property
    def key(self) -> str:
        return name_key(self.canonical)

    def all_names(self) -> Tuple[str, ...]:
        """返回规范名称和全部别名"""
        return (self.canonical,) + tuple(self.aliases)

    def canonical_violations(self) -> List[str]:
        """检查规范名称"""
        if not self.canonical or not self.canonical.strip():
            return ["规范名称为空"]
        problems = []
        if self.canonical != clean_text(self.canonical):
            problems.append(f"规范名称未规范化（首尾或连续空白）: {self.canonical!r}")
        if any(marker in self.canonical for marker in NOWIKI_MARKERS):
            problems.append(f"规范名称含有 nowiki 标记: {self.canonical!r}")
        return problems

    def alias_violations(self) -> List[str]:
        """检查别名：非空、大写字母开头、不含数字和保留字符、互不重复"""
        problems = []
        seen = set()
        for alias in self.aliases:
            if not alias or not alias.strip():
                problems.append(f"名称 {self.canonical!r} 含有空别名")
                continue
            if alias != clean_text(alias):
                problems.append(f"别名 {alias!r} 未规范化")
            if not is_capital_initial(alias):
                problems.append(f"别名 {alias!r} 不是大写字母开头")
            if has_digit(alias):
                problems.append(f"别名 {alias!r} 含有数字")
            if has_reserved(alias):
                problems.append(f"别名 {alias!r} 含有保留字符")
            alias_key = name_key(alias)
            if alias_key == self.key:
                problems.append(f"别名 {alias!r} 与规范名称相同")
            if alias_key in seen:
                problems.append(f"别名 {alias!r} 重复")
            seen.add(alias_key)
        return problems

    def link_violations(self) -> List[str]:
        """检查链接目标是否是合法的条目标题"""
        if self.link is None:
            return []
        if not self.link.strip() or self.link != clean_text(self.link):
            return [f"链接 {self.link!r} 为空或未规范化"]
        if any(ch in TITLE_FORBIDDEN for ch in self.link):
            return [f"链接 {self.link!r} 含有标题不允许的字符"]
        return []

    def violations(self) -> List[str]:
        """检查名称不变量，返回违规描述列表"""
        return self.canonical_violations() + self.alias_violations() + self.link_violations()


@dataclass(frozen=True)
class NameChange:
    """一次名称变更：前名称 → 后名称（可选的变更年份）"""
    preceding: EntityName
    succeeding: EntityName
    year: Optional[int] = None

    @property
    def is_dated(self) -> bool:
        return self.year is not None

    def violations(self) -> List[str]:
        problems = []
        if self.preceding.key == self.succeeding.key:
            problems.append(f"自我更名: {self.preceding.canonical!r}")
        if self.year is not None and not 1 <= self.year <= 9999:
            problems.append(f"年份 {self.year} 超出范围 [1, 9999]")
        return problems


@dataclass(frozen=True)
class EvolutionChain:
    """实体的名称演化链

    Attributes:
        entity_id: 最新名称的规范形式
        names: 从最早到最新排列的名称
        changes: 相邻名称之间的变更，长度为 len(names) - 1
        source_list: 来源列表页标识
    """
    entity_id: str
    names: Tuple[EntityName, ...]
    changes: Tuple[NameChange, ...]
    source_list: str = ""

    @classmethod
    def from_names(cls, names, years, source_list: str = "") -> "EvolutionChain":
        """由名称序列和年份序列构造演化链

        Args:
            names: EntityName 序列
            years: 每次变更的年份（可为None），长度为 len(names) - 1
            source_list: 来源列表页标识
        """
        names = tuple(names)
        years = list(years)
        changes = tuple(
            NameChange(names[i], names[i + 1], years[i] if i < len(years) else None)
            for i in range(len(names) - 1)
        )
        entity_id = names[-1].canonical if names else ""
        return cls(entity_id=entity_id, names=names, changes=changes, source_list=source_list)

    @property
    def chain_key(self) -> str:
        """演化链的唯一标识：以箭头连接的规范名称"""
        return " → ".join(name.canonical for name in self.names)

    @property
    def sequence_key(self) -> Tuple[str, ...]:
        """大小写无关的名称序列，用于去重"""
        return tuple(name.key for name in self.names)

    @property
    def years(self) -> Tuple[Optional[int], ...]:
        return tuple(change.year for change in self.changes)

    @property
    def is_dated(self) -> bool:
        """至少一次变更带有年份"""
        return any(change.is_dated for change in self.changes)


def validate_chain(chain: EvolutionChain) -> List[str]:
    """检查演化链的所有不变量

    纯函数，从不抛出异常。

    Returns:
        List[str]: 违规描述列表；为空表示演化链有效
    """
    problems = []
    if len(chain.names) < 2:
        problems.append(f"名称数量 {len(chain.names)} 少于2")
    if len(chain.changes) != max(len(chain.names) - 1, 0):
        problems.append(
            f"变更数量 {len(chain.changes)} 与名称数量 {len(chain.names)} 不匹配"
        )
    for i, change in enumerate(chain.changes):
        if i + 1 < len(chain.names):
            if change.preceding != chain.names[i] or change.succeeding != chain.names[i + 1]:
                problems.append(f"第 {i} 次变更与名称序列不一致")
        problems.extend(f"第 {i} 次变更: {p}" for p in change.violations())
    for name in chain.names:
        problems.extend(name.violations())
    if chain.names and chain.entity_id != chain.names[-1].canonical:
        problems.append(f"entity_id {chain.entity_id!r} 不是最新名称")
    return problems


_MARKUP_TAG = re.compile(r'<[A-Za-z/]')


@dataclass(frozen=True)
class Article:
    """已解析的纯文本条目

    Attributes:
        requested_title: 请求的标题
        resolved_title: 解析（跟随重定向）后的标题
        redirected: 是否经过重定向
        body: 去除标记后的正文
        fetched_at: 获取时间（ISO 8601）
    """
    requested_title: str
    resolved_title: str
    redirected: bool
    body: str
    fetched_at: str = ""

    def validate(self) -> tuple[bool, str]:
        if _MARKUP_TAG.search(self.body):
            return False, "正文中含有标记标签"
        if self.redirected != (self.requested_title != self.resolved_title):
            return False, "redirected 标志与标题不一致"
        return True, ""


STATUS_RESOLVED = 'resolved'
STATUS_REDIRECTED = 'redirected'
STATUS_MISSING = 'missing'
STATUS_ERROR = 'error'
FETCH_STATUSES = (STATUS_RESOLVED, STATUS_REDIRECTED, STATUS_MISSING, STATUS_ERROR)


@dataclass(frozen=True)
class FetchOutcome:
    """一个标题的解析结果

    Attributes:
        status: resolved / redirected / missing / error
        article: 成功时的条目
        error_detail: 错误说明
        requested_title: 请求的标题
        via: 候选来源：link（列表链接）、name（规范名称）或 alias（别名）
    """
    status: str
    article: Optional[Article] = None
    error_detail: Optional[str] = None
    requested_title: str = ""
    via: str = ""

    @property
    def succeeded(self) -> bool:
        return self.status in (STATUS_RESOLVED, STATUS_REDIRECTED)

    def validate(self) -> tuple[bool, str]:
        if self.status not in FETCH_STATUSES:
            return False, f"未知状态: {self.status}"
        if self.succeeded != (self.article is not None):
            return False, "条目存在性与状态不一致"
        if self.article is not None:
            return self.article.validate()
        return True, ""


@dataclass(frozen=True)
class CacheEntry:
    """缓存条目：规范化标题 → 解析结果"""
    key: str
    outcome: FetchOutcome
    stored_at: str


@dataclass(frozen=True)
class NameResolution:
    """单个名称的解析摘要（写入解析日志）"""
    name: str
    status: str
    resolved_title: Optional[str] = None
    via: str = ""
    error_detail: Optional[str] = None


@dataclass(frozen=True)
class ResolutionRecord:
    """实体解析摘要，可序列化为解析日志中的一行"""
    entity_id: str
    chain_key: str
    articles: Tuple[str, ...]
    current_title: Optional[str]
    linked_on_list: bool
    names: Tuple[NameResolution, ...] = ()

    @property
    def resolvable(self) -> bool:
        return bool(self.articles)


@dataclass(frozen=True)
class EntityArticles:
    """实体全部名称的解析结果

    Attributes:
        outcomes: 每个名称一个结果，顺序与演化链一致
        articles: 去重后的条目（按名称位置排列）
        current_title: 最新名称对应条目的标题
    """
    entity_id: str
    chain_key: str
    outcomes: Tuple[FetchOutcome, ...]
    articles: Tuple[Article, ...]
    current_title: Optional[str] = None

    @property
    def resolvable(self) -> bool:
        return bool(self.articles)

    @property
    def linked_on_list(self) -> bool:
        return any(o.succeeded and o.via == 'link' for o in self.outcomes)

    def to_record(self, chain: EvolutionChain) -> ResolutionRecord:
        names = tuple(
            NameResolution(
                name=name.canonical,
                status=outcome.status,
                resolved_title=outcome.article.resolved_title if outcome.article else None,
                via=outcome.via,
                error_detail=outcome.error_detail,
            )
            for name, outcome in zip(chain.names, self.outcomes)
        )
        return ResolutionRecord(
            entity_id=self.entity_id,
            chain_key=self.chain_key,
            articles=tuple(a.resolved_title for a in self.articles),
            current_title=self.current_title,
            linked_on_list=self.linked_on_list,
            names=names,
        )


@dataclass(frozen=True)
class ListLine:
    """列表页中的一行：箭头分隔的名称及其括号内容"""
    raw: str
    names_with_annotations: Tuple[Tuple[str, Tuple[str, ...]], ...]


@dataclass(frozen=True)
class Annotation:
    """括号内容的解析结果"""
    years: Tuple[int, ...] = ()
    aliases: Tuple[str, ...] = ()
    discarded: Tuple[str, ...] = ()


@dataclass(frozen=True)
class SentenceList:
    """分句结果

    Attributes:
        sentences: 句子文本
        offsets: 每个句子在原文中的 (start, end) 字符偏移
    """
    sentences: Tuple[str, ...]
    offsets: Tuple[Tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class MentionIndex:
    """一次变更三个组成部分的句子索引"""
    preceding_idx: Tuple[int, ...]
    succeeding_idx: Tuple[int, ...]
    date_idx: Tuple[int, ...]

    def components(self) -> List[Tuple[int, ...]]:
        return [self.preceding_idx, self.succeeding_idx, self.date_idx]


@dataclass(frozen=True)
class Window:
    """句子窗口 [from_idx, to_idx]（闭区间）"""
    from_idx: int
    to_idx: int

    def __post_init__(self):
        if self.from_idx > self.to_idx:
            raise ValueError(f"窗口起点 {self.from_idx} 大于终点 {self.to_idx}")

    @property
    def distance(self) -> int:
        return self.to_idx - self.from_idx


@dataclass(frozen=True)
class ExcerptRecord:
    """一次被完整提及的变更的最小摘录

    Attributes:
        change: 名称变更
        article: 来源条目的 resolved_title
        from_idx / to_idx: 最小窗口的句子索引
        distance: to_idx - from_idx
        text: 窗口内句子以空格连接
        from_current_name_article: 最佳摘录是否来自最新名称的条目
        in_current_article: 最新名称的条目是否也完整提及了该变更
        entity_id / chain_key / position: 所属演化链与变更位置
    """
    change: NameChange
    article: str
    from_idx: int
    to_idx: int
    distance: int
    text: str
    from_current_name_article: bool = False
    in_current_article: bool = False
    entity_id: str = ""
    chain_key: str = ""
    position: int = 0


ENTITY_COUNT_KEYS = (
    'total', 'with_dates', 'resolvable', 'current_name_resolvable',
    'linked_on_list', 'multi_article', 'resolvable_and_dated',
)
CHANGE_COUNT_KEYS = (
    'total', 'of_entities_with_articles', 'with_dates', 'with_articles_and_dates',
    'mentioned', 'mentioned_in_current_article',
)
EXCERPT_COUNT_KEYS = (
    'total', 'dist_lt_10', 'dist_lt_3', 'dist_eq_2', 'dist_eq_1', 'dist_eq_0',
)
NAME_COUNT_KEYS = ('total_names', 'distinct_names', 'renamed_entities')


def _zero_counts(keys) -> Dict[str, int]:
    return {key: 0 for key in keys}


@dataclass(frozen=True)
class StatsReport:
    """统计报告：实体、变更、摘录三组计数以及距离分布

    百分比不存储，按需由计数和基数计算。
    """
    entity_counts: Dict[str, int] = field(default_factory=lambda: _zero_counts(ENTITY_COUNT_KEYS))
    change_counts: Dict[str, int] = field(default_factory=lambda: _zero_counts(CHANGE_COUNT_KEYS))
    excerpt_counts: Dict[str, int] = field(default_factory=lambda: _zero_counts(EXCERPT_COUNT_KEYS))
    distance_histogram: Dict[int, int] = field(default_factory=dict)
    mean_distance: Optional[Fraction] = None
    median_distance: Optional[Fraction] = None
    name_counts: Dict[str, int] = field(default_factory=lambda: _zero_counts(NAME_COUNT_KEYS))

    def violations(self) -> List[str]:
        """检查报告的嵌套不变量"""
        problems = []
        ex = self.excerpt_counts
        if ex['dist_eq_0'] + ex['dist_eq_1'] + ex['dist_eq_2'] != ex['dist_lt_3']:
            problems.append("距离0/1/2的计数之和不等于距离<3的计数")
        if not ex['dist_lt_3'] <= ex['dist_lt_10'] <= ex['total']:
            problems.append("摘录计数不满足嵌套单调性")
        if sum(self.distance_histogram.values()) != ex['total']:
            problems.append("直方图计数之和不等于摘录总数")
        ch = self.change_counts
        if ch['mentioned_in_current_article'] > ch['mentioned']:
            problems.append("最新名称条目中的提及数大于总提及数")
        return problems


@dataclass
class Config:
    """运行配置

    Attributes:
        cache_dir: 缓存目录
        api_base: wiki API 地址
        user_agent: HTTP User-Agent
        rate_limit: 每秒请求数上限
        workers: 并行任务数
        offline: 离线模式，禁止任何网络请求
        abbreviations_path: 缩写表文件路径（None 使用内置表）
        source_dir: 目录形式的页面来源（设置后不访问网络）
        max_retries: 429/5xx 的最大重试次数
        timeout: 单次请求超时（秒）
        max_redirects: 最大重定向跳数
    """
    cache_dir: str = '.namevo-cache'
    api_base: str = 'https://en.wikipedia.org/w/api.php'
    user_agent: str = 'name-evolution-miner/1.0 (+https://github.com/example/name-evolution-miner)'
    rate_limit: float = 1.0
    workers: int = 1
    offline: bool = False
    abbreviations_path: Optional[str] = None
    source_dir: Optional[str] = None
    max_retries: int = 3
    timeout: float = 30.0
    max_redirects: int = 5

    def validate(self) -> tuple[bool, str]:
        """验证配置参数的有效性

        Returns:
            tuple[bool, str]: (是否有效, 错误消息)
        """
        if not self.cache_dir:
            return False, "cache_dir 不能为空"

        if not self.api_base.startswith(('http://', 'https://')):
            return False, f"api_base 必须是 HTTP(S) 地址: {self.api_base}"

        if not self.user_agent.strip():
            return False, "user_agent 不能为空"

        if self.rate_limit <= 0:
            return False, "rate_limit 必须为正数"

        if self.workers <= 0:
            return False, "workers 必须为正整数"

        if self.max_retries < 0:
            return False, "max_retries 不能为负数"

        if self.timeout <= 0:
            return False, "timeout 必须为正数"

        if self.max_redirects < 0:
            return False, "max_redirects 不能为负数"

        return True, ""

"""条目来源与名称解析

PageSource 回答 "标题 → 页面 | 重定向目标 | 不存在"。提供两种实现：
访问 wiki HTTP API 的 LiveWikiSource 和读取夹具目录的 DirectorySource。
在此之上，resolve_article 依次尝试列表链接、规范名称和别名，跟随重定向，
返回第一个成功的结果。
"""

import dataclasses
import logging
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, List, Optional, Tuple
from urllib.parse import unquote

import requests

from src.core.article_cache import ArticleCache, ensure_valid, normalize_title
from src.core.data_models import (
    STATUS_ERROR,
    STATUS_MISSING,
    STATUS_REDIRECTED,
    STATUS_RESOLVED,
    Article,
    CacheEntry,
    EntityArticles,
    EntityName,
    EvolutionChain,
    FetchOutcome,
)
from src.core.markup import strip_markup
from src.utils.error_handler import ConfigError, OfflineCacheMissError, TransportError


logger = logging.getLogger(__name__)


DEFAULT_MAX_REDIRECTS = 5
REDIRECT_LOOP = "redirect loop"

PAGE = 'page'
REDIRECT = 'redirect'
MISSING = 'missing'


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


@dataclass(frozen=True)
class PageResponse:
    """页面来源对单个标题的回答

    Attributes:
        kind: page / redirect / missing
        title: 页面标题
        markup: 页面标记（kind 为 page 时）
        target: 重定向目标（kind 为 redirect 时）
    """
    kind: str
    title: str
    markup: str = ""
    target: str = ""

    @classmethod
    def page(cls, title: str, markup: str) -> "PageResponse":
        return cls(PAGE, title, markup=markup)

    @classmethod
    def redirect(cls, title: str, target: str) -> "PageResponse":
        return cls(REDIRECT, title, target=target)

    @classmethod
    def missing(cls, title: str) -> "PageResponse":
        return cls(MISSING, title)


class PageSource(ABC):
    """页面来源抽象基类

    Attributes:
        request_count: 已执行的 fetch 次数
    """

    def __init__(self):
        self.request_count = 0
        self._count_lock = threading.Lock()

    def _count_request(self) -> None:
        with self._count_lock:
            self.request_count += 1

    @abstractmethod
    def fetch(self, title: str) -> PageResponse:
        """获取单个标题

        Raises:
            TransportError: 网络传输失败
        """


class DirectorySource(PageSource):
    """目录形式的页面来源，用于测试和离线验收

    目录布局::

        <root>/pages/<Title>.html | .txt   页面（文件名中下划线表示空格，可URL编码）
        <root>/redirects.tsv               每行 "来源标题<TAB>目标标题"
    """

    PAGE_SUFFIXES = ('.html', '.htm', '.txt')

    def __init__(self, root):
        """
        Raises:
            FileNotFoundError: 目录不存在
            ValueError: 重定向文件格式错误
        """
        super().__init__()
        self.root = Path(root)
        if not self.root.is_dir():
            raise FileNotFoundError(f"页面来源目录不存在: {self.root}")

        self._pages = {}
        pages_dir = self.root / 'pages'
        if pages_dir.is_dir():
            for path in sorted(pages_dir.iterdir()):
                if path.suffix.lower() in self.PAGE_SUFFIXES:
                    title = unquote(path.stem).replace('_', ' ')
                    self._pages[normalize_title(title)] = (title, path)

        self._redirects = {}
        redirects_path = self.root / 'redirects.tsv'
        if redirects_path.exists():
            with open(redirects_path, 'r', encoding='utf-8') as f:
                for line_number, line in enumerate(f, start=1):
                    if not line.strip() or line.startswith('#'):
                        continue
                    parts = line.rstrip('\n').split('\t')
                    if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                        raise ConfigError(f"重定向文件格式错误: {redirects_path}:{line_number}")
                    self._redirects[normalize_title(parts[0])] = parts[1].strip()

    def fetch(self, title: str) -> PageResponse:
        self._count_request()
        key = normalize_title(title)
        if key in self._redirects:
            return PageResponse.redirect(title, self._redirects[key])
        if key in self._pages:
            page_title, path = self._pages[key]
            return PageResponse.page(page_title, path.read_text(encoding='utf-8'))
        return PageResponse.missing(title)


class RateLimiter:
    """全局请求速率限制（线程安全）"""

    def __init__(self, rate: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("速率必须为正数")
        self._interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._next_slot = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        with self._lock:
            now = self._clock()
            if self._next_slot > now:
                self._sleep(self._next_slot - now)
                now = self._next_slot
            self._next_slot = now + self._interval


class LiveWikiSource(PageSource):
    """wiki HTTP API 客户端

    使用 action=parse 获取页面HTML，重定向由服务器解析（redirects=1）。
    对 429 和 5xx 响应按指数退避重试。
    """

    RETRY_STATUS = frozenset({429, 500, 502, 503, 504})
    MISSING_CODES = frozenset({'missingtitle', 'invalidtitle'})

    def __init__(self, api_base: str, user_agent: str, rate_limit: float = 1.0,
                 max_retries: int = 3, timeout: float = 30.0, backoff: float = 1.0,
                 session: Optional[requests.Session] = None,
                 sleep: Callable[[float], None] = time.sleep):
        super().__init__()
        self.api_base = api_base
        self.max_retries = max_retries
        self.timeout = timeout
        self.backoff = backoff
        self._sleep = sleep
        self._limiter = RateLimiter(rate_limit, sleep=sleep)
        self._session = session if session is not None else requests.Session()
        self._session.headers.update({'User-Agent': user_agent})

    def _get(self, params: dict) -> dict:
        params = dict(params, format='json', formatversion=2)
        error: Optional[TransportError] = None
        for attempt in range(self.max_retries + 1):
            self._limiter.wait()
            self._count_request()
            try:
                response = self._session.get(self.api_base, params=params, timeout=self.timeout)
            except requests.RequestException as e:
                error = TransportError(f"请求失败: {e}")
            else:
                if response.status_code not in self.RETRY_STATUS:
                    try:
                        response.raise_for_status()
                        return response.json()
                    except (requests.HTTPError, ValueError) as e:
                        raise TransportError(f"无效的API响应: {e}") from e
                error = TransportError(f"HTTP {response.status_code}")

            if attempt < self.max_retries:
                delay = self.backoff * (2 ** attempt)
                logger.warning("%s，%.1f 秒后重试 (%d/%d)", error, delay, attempt + 1, self.max_retries)
                self._sleep(delay)
        raise error

    def fetch(self, title: str) -> PageResponse:
        data = self._get({
            'action': 'parse',
            'page': title,
            'prop': 'text',
            'redirects': 1,
            'disableeditsection': 1,
            'disabletoc': 1,
        })
        if 'error' in data:
            code = data['error'].get('code', '')
            if code in self.MISSING_CODES:
                return PageResponse.missing(title)
            raise TransportError(f"API错误 {code}: {data['error'].get('info', '')}")

        parse = data.get('parse', {})
        redirects = parse.get('redirects') or []
        if redirects:
            return PageResponse.redirect(title, redirects[-1]['to'])
        logger.debug("获取页面 %s", parse.get('title', title))
        return PageResponse.page(parse.get('title', title), parse.get('text', ''))


def resolve_title(title: str, source: PageSource,
                  max_redirects: int = DEFAULT_MAX_REDIRECTS) -> FetchOutcome:
    """解析单个标题，跟随重定向

    超过 max_redirects 跳或出现环时返回 "redirect loop" 错误结果。
    传输失败时返回 error 结果。

    Raises:
        InvariantViolationError: 生成的条目违反不变量（例如正文仍含标记）
    """
    visited = {normalize_title(title)}
    current = title
    hops = 0
    while True:
        try:
            response = source.fetch(current)
        except TransportError as e:
            logger.warning("获取 %r 失败: %s", current, e)
            return FetchOutcome(STATUS_ERROR, error_detail=str(e), requested_title=title)

        if response.kind == MISSING:
            return FetchOutcome(STATUS_MISSING, requested_title=title)

        if response.kind == REDIRECT:
            hops += 1
            target_key = normalize_title(response.target)
            if hops > max_redirects or target_key in visited:
                logger.warning("标题 %r 的重定向链过长或成环", title)
                return FetchOutcome(STATUS_ERROR, error_detail=REDIRECT_LOOP, requested_title=title)
            visited.add(target_key)
            current = response.target
            continue

        resolved_title = title if hops == 0 else (response.title or current)
        article = Article(
            requested_title=title,
            resolved_title=resolved_title,
            redirected=resolved_title != title,
            body=strip_markup(response.markup),
            fetched_at=utc_timestamp(),
        )
        status = STATUS_REDIRECTED if article.redirected else STATUS_RESOLVED
        return ensure_valid(FetchOutcome(status, article=article, requested_title=title),
                            f"标题 {title!r}")


def _candidates(name: EntityName) -> List[Tuple[str, str]]:
    candidates = []
    if name.link:
        candidates.append((name.link, 'link'))
    candidates.append((name.canonical, 'name'))
    candidates.extend((alias, 'alias') for alias in name.aliases)

    seen = set()
    unique = []
    for title, via in candidates:
        key = normalize_title(title)
        if key and key not in seen:
            seen.add(key)
            unique.append((title, via))
    return unique


def _resolve_candidate(title: str, fetcher: Optional[PageSource], cache: Optional[ArticleCache],
                       offline: bool, max_redirects: int) -> FetchOutcome:
    key = normalize_title(title)
    if cache is not None:
        entry = cache.get(key)
        if entry is not None:
            return entry.outcome
    if offline or fetcher is None:
        raise OfflineCacheMissError(title)

    outcome = resolve_title(title, fetcher, max_redirects)
    # 传输错误可重试，不写入缓存；重定向环是确定的结果
    if cache is not None and (outcome.status != STATUS_ERROR or outcome.error_detail == REDIRECT_LOOP):
        cache.put(CacheEntry(key=key, outcome=outcome, stored_at=utc_timestamp()))
    return outcome


def resolve_article(name: EntityName, fetcher: Optional[PageSource],
                    cache: Optional[ArticleCache] = None, offline: bool = False,
                    max_redirects: int = DEFAULT_MAX_REDIRECTS) -> FetchOutcome:
    """将实体名称解析为条目

    依次尝试列表链接、规范名称和各个别名，返回第一个成功的结果。
    全部不存在时返回 missing；没有成功且有候选出错时返回 error。

    Args:
        name: 实体名称
        fetcher: 页面来源；离线模式下可以为None
        cache: 可选的条目缓存
        offline: 离线模式，缓存未命中时抛出异常

    Raises:
        OfflineCacheMissError: 离线模式下缓存未命中
    """
    first_error: Optional[FetchOutcome] = None
    for title, via in _candidates(name):
        outcome = dataclasses.replace(
            _resolve_candidate(title, fetcher, cache, offline, max_redirects), via=via)
        if outcome.succeeded:
            return outcome
        if outcome.status == STATUS_ERROR and first_error is None:
            first_error = outcome
    if first_error is not None:
        return first_error
    return FetchOutcome(STATUS_MISSING, requested_title=name.canonical, via='name')


def fetch_entity_articles(chain: EvolutionChain, fetcher: Optional[PageSource],
                          cache: Optional[ArticleCache] = None, offline: bool = False,
                          max_redirects: int = DEFAULT_MAX_REDIRECTS) -> EntityArticles:
    """解析演化链中每个名称对应的条目

    解析到相同标题的条目只保留一份；最新名称对应的条目记录在 current_title 中。
    所有名称都无法解析时 articles 为空（实体不可解析）。
    """
    outcomes = tuple(
        resolve_article(name, fetcher, cache, offline, max_redirects) for name in chain.names
    )

    articles = []
    titles_by_key = {}
    for outcome in outcomes:
        if not outcome.succeeded:
            continue
        key = normalize_title(outcome.article.resolved_title)
        if key not in titles_by_key:
            titles_by_key[key] = outcome.article.resolved_title
            articles.append(outcome.article)

    current_title = None
    if outcomes and outcomes[-1].succeeded:
        current_title = titles_by_key[normalize_title(outcomes[-1].article.resolved_title)]

    if not articles:
        logger.info("实体 %r 没有可解析的名称", chain.entity_id)
    return EntityArticles(
        entity_id=chain.entity_id,
        chain_key=chain.chain_key,
        outcomes=outcomes,
        articles=tuple(articles),
        current_title=current_title,
    )

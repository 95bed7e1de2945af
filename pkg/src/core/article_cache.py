"""条目缓存

磁盘缓存布局::

    <cache_dir>/manifest          JSON Lines，每行一个缓存记录（后写覆盖先写）
    <cache_dir>/pages/<key>.txt   去除标记后的正文

缓存完整时，整个流水线可以在不访问网络的情况下重新运行。
"""

import json
import logging
import os
import re
import threading
import unicodedata
from pathlib import Path
from typing import Dict, List, Optional
from urllib.parse import quote

from src.core.data_models import Article, CacheEntry, FetchOutcome
from src.utils.error_handler import CacheError, InvariantViolationError


logger = logging.getLogger(__name__)


def normalize_title(title: str) -> str:
    """规范化条目标题，作为缓存键

    NFC规范化、空白与下划线统一为下划线、首字母大写（wiki标题规则）。

    Example:
        >>> normalize_title('new  amsterdam')
        'New_Amsterdam'
    """
    title = unicodedata.normalize('NFC', title)
    title = re.sub(r'[\s_]+', ' ', title).strip()
    if title:
        title = title[0].upper() + title[1:]
    return title.replace(' ', '_')


def ensure_valid(outcome: FetchOutcome, origin: str) -> FetchOutcome:
    """检查解析结果及其条目的不变量

    Args:
        outcome: 解析结果
        origin: 出错时写入消息的来源说明

    Returns:
        FetchOutcome: 原样返回

    Raises:
        InvariantViolationError: 状态与条目不一致、正文含标记或重定向标志错误
    """
    is_valid, message = outcome.validate()
    if not is_valid:
        raise InvariantViolationError(f"{origin}: {message}")
    return outcome


class ArticleCache:
    """条目缓存

    读操作可以并发；同一个键的写操作串行化，清单文件的追加由全局锁保护。

    Attributes:
        root: 缓存根目录
    """

    MANIFEST_NAME = 'manifest'
    PAGES_DIR = 'pages'

    def __init__(self, cache_dir):
        """初始化缓存，必要时创建目录并加载清单

        Raises:
            CacheError: 目录无法创建或清单无法读取
        """
        self.root = Path(cache_dir)
        self._pages_dir = self.root / self.PAGES_DIR
        self._manifest_path = self.root / self.MANIFEST_NAME
        try:
            self._pages_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise CacheError(f"无法创建缓存目录 ({e.strerror})", str(self.root)) from e

        self._lock = threading.Lock()
        self._key_locks: Dict[str, threading.Lock] = {}
        self._index: Dict[str, dict] = {}
        self._load_manifest()

    def _load_manifest(self) -> None:
        if not self._manifest_path.exists():
            return
        try:
            with open(self._manifest_path, 'r', encoding='utf-8') as f:
                for line_number, line in enumerate(f, start=1):
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                        self._index[record['key']] = record
                    except (json.JSONDecodeError, KeyError, TypeError):
                        # 中断的写入只会损坏最后一行
                        logger.warning("跳过损坏的清单记录 %s:%d", self._manifest_path, line_number)
        except OSError as e:
            raise CacheError(f"清单读取失败 ({e.strerror})", str(self._manifest_path)) from e

    def _key_lock(self, key: str) -> threading.Lock:
        with self._lock:
            lock = self._key_locks.get(key)
            if lock is None:
                lock = self._key_locks[key] = threading.Lock()
            return lock

    def page_path(self, key: str) -> Path:
        """返回键对应的正文文件路径"""
        return self._pages_dir / (quote(normalize_title(key), safe='') + '.txt')

    def get(self, key: str) -> Optional[CacheEntry]:
        """读取缓存条目

        Returns:
            Optional[CacheEntry]: 未缓存时返回None

        Raises:
            CacheError: 正文文件读取失败
        """
        key = normalize_title(key)
        with self._lock:
            record = self._index.get(key)
        if record is None:
            return None

        article = None
        if record.get('resolved_title') is not None:
            path = self.page_path(key)
            try:
                with open(path, 'r', encoding='utf-8', newline='') as f:
                    body = f.read()
            except OSError as e:
                raise CacheError(f"正文读取失败 ({e.strerror})", str(path)) from e
            article = Article(
                requested_title=record['requested_title'],
                resolved_title=record['resolved_title'],
                redirected=record['redirected'],
                body=body,
                fetched_at=record.get('fetched_at', ''),
            )

        outcome = FetchOutcome(
            status=record['status'],
            article=article,
            error_detail=record.get('error_detail'),
            requested_title=record.get('requested_title', ''),
            via=record.get('via', ''),
        )
        ensure_valid(outcome, f"缓存条目 {key}")
        return CacheEntry(key=key, outcome=outcome, stored_at=record.get('stored_at', ''))

    def put(self, entry: CacheEntry) -> None:
        """写入缓存条目（后写覆盖先写）

        Raises:
            CacheError: 写入失败
        """
        key = normalize_title(entry.key)
        outcome = entry.outcome
        article = outcome.article
        record = {
            'key': key,
            'status': outcome.status,
            'requested_title': article.requested_title if article else outcome.requested_title,
            'resolved_title': article.resolved_title if article else None,
            'redirected': article.redirected if article else False,
            'via': outcome.via,
            'error_detail': outcome.error_detail,
            'fetched_at': article.fetched_at if article else '',
            'stored_at': entry.stored_at,
        }

        with self._key_lock(key):
            if article is not None:
                path = self.page_path(key)
                tmp_path = path.with_name(path.name + '.tmp')
                try:
                    with open(tmp_path, 'w', encoding='utf-8', newline='') as f:
                        f.write(article.body)
                    os.replace(tmp_path, path)
                except OSError as e:
                    raise CacheError(f"正文写入失败 ({e.strerror})", str(path)) from e

            line = json.dumps(record, ensure_ascii=False, sort_keys=True)
            with self._lock:
                try:
                    with open(self._manifest_path, 'a', encoding='utf-8', newline='\n') as f:
                        f.write(line + '\n')
                except OSError as e:
                    raise CacheError(f"清单写入失败 ({e.strerror})", str(self._manifest_path)) from e
                self._index[key] = record
        logger.debug("缓存写入 %s (%s)", key, outcome.status)

    def keys(self) -> List[str]:
        with self._lock:
            return sorted(self._index)

    def __contains__(self, key: str) -> bool:
        with self._lock:
            return normalize_title(key) in self._index

    def __len__(self) -> int:
        with self._lock:
            return len(self._index)


def cache_get(cache: ArticleCache, key: str) -> Optional[CacheEntry]:
    """读取缓存条目"""
    return cache.get(key)


def cache_put(cache: ArticleCache, entry: CacheEntry) -> bool:
    """写入缓存条目，成功时返回True"""
    cache.put(entry)
    return True

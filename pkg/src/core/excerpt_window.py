"""最小摘录窗口

对一次名称变更，前名称、后名称和年份分别出现在若干句子中。最小窗口是
覆盖三个组成部分的最短连续句子区间，其长度（to - from）即句子距离。
"""

import heapq
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Iterable, List, Optional, Sequence, Tuple

from src.core.data_models import (
    Article,
    EntityArticles,
    EvolutionChain,
    ExcerptRecord,
    NameChange,
    SentenceList,
    Window,
)
from src.core.sentence_splitter import SentenceSplitter, build_mention_index, split_sentences


logger = logging.getLogger(__name__)


def min_window(components: Sequence[Sequence[int]]) -> Optional[Window]:
    """计算覆盖每个索引列表至少一个元素的最小窗口

    在k个有序列表上做堆扫描：每一步窗口为 [堆顶, 当前最大头]，然后推进堆顶
    所在的列表。终止条件：当堆顶所在的列表已没有下一个元素时立即停止，
    不会走满 N 步（N 为元素总数）；之后的窗口仍须包含该元素，不会更短。
    最坏情况 O(N log k)。距离相同时返回起点最小的窗口。

    Args:
        components: k 个严格递增的索引列表

    Returns:
        Optional[Window]: 没有列表或任一列表为空时返回None

    Example:
        >>> min_window([[2], [1, 2], [0, 1]])
        Window(from_idx=1, to_idx=2)
    """
    if not components or any(len(c) == 0 for c in components):
        return None

    heap = [(c[0], i, 0) for i, c in enumerate(components)]
    heapq.heapify(heap)
    hi = max(c[0] for c in components)
    best: Optional[Tuple[int, int]] = None

    while True:
        lo, list_idx, pos = heap[0]
        if best is None or hi - lo < best[1] - best[0]:
            best = (lo, hi)
        pos += 1
        component = components[list_idx]
        if pos >= len(component):
            break
        value = component[pos]
        heapq.heapreplace(heap, (value, list_idx, pos))
        if value > hi:
            hi = value

    return Window(*best)


def min_distance(components: Sequence[Sequence[int]]) -> Optional[int]:
    """最小窗口的句子距离；不存在窗口时返回None"""
    window = min_window(components)
    return window.distance if window is not None else None


def extract_excerpt(sentences: SentenceList, window: Window) -> str:
    """以空格连接窗口内的句子"""
    return ' '.join(sentences.sentences[window.from_idx:window.to_idx + 1])


def analyze_change(article: Article, change: NameChange,
                   sentences: Optional[SentenceList] = None,
                   splitter: Optional[SentenceSplitter] = None) -> Optional[ExcerptRecord]:
    """在一篇条目中查找变更的最小摘录

    Returns:
        Optional[ExcerptRecord]: 任一组成部分未被提及时返回None

    Raises:
        ValueError: 变更没有年份
    """
    if sentences is None:
        sentences = split_sentences(article.body, splitter)
    index = build_mention_index(article, change, sentences=sentences)
    window = min_window(index.components())
    if window is None:
        return None
    return ExcerptRecord(
        change=change,
        article=article.resolved_title,
        from_idx=window.from_idx,
        to_idx=window.to_idx,
        distance=window.distance,
        text=extract_excerpt(sentences, window),
    )


def analyze_entity(chain: EvolutionChain, articles: Sequence[Article],
                   current_title: Optional[str] = None,
                   splitter: Optional[SentenceSplitter] = None) -> List[ExcerptRecord]:
    """分析实体的所有带年份变更

    每次变更在所有条目中查找，保留距离最小的记录；距离相同时优先最新名称的
    条目，其次按 resolved_title 字典序。没有年份的变更不产生记录。
    """
    split = [(article, split_sentences(article.body, splitter)) for article in articles]

    def rank(record: ExcerptRecord):
        return (record.distance, record.article != current_title, record.article)

    records = []
    for position, change in enumerate(chain.changes):
        if change.year is None:
            continue
        found = [
            record for record in (
                analyze_change(article, change, sentences=sentences)
                for article, sentences in split
            )
            if record is not None
        ]
        if not found:
            continue
        best = min(found, key=rank)
        records.append(replace(
            best,
            from_current_name_article=current_title is not None and best.article == current_title,
            in_current_article=current_title is not None and any(r.article == current_title for r in found),
            entity_id=chain.entity_id,
            chain_key=chain.chain_key,
            position=position,
        ))
    return records


def record_sort_key(record: ExcerptRecord) -> Tuple[str, str, int]:
    return (record.entity_id, record.chain_key, record.position)


def analyze_corpus(items: Iterable[Tuple[EvolutionChain, EntityArticles]], workers: int = 1,
                   splitter: Optional[SentenceSplitter] = None) -> List[ExcerptRecord]:
    """并行分析多个实体

    结果与 workers 无关：按 (entity_id, chain_key, position) 排序。

    Args:
        items: (演化链, 解析结果) 序列
        workers: 线程数
    """
    items = list(items)

    def work(item):
        chain, entity_articles = item
        return analyze_entity(chain, entity_articles.articles,
                              entity_articles.current_title, splitter)

    if workers <= 1:
        results = [work(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(work, items))

    records = [record for batch in results for record in batch]
    records.sort(key=record_sort_key)
    logger.info("分析 %d 个实体，得到 %d 条摘录", len(items), len(records))
    return records

"""分句与提及索引

RuleBasedSplitter 是确定性的规则分句器：句子在 '.'、'!'、'?'（可跟右引号或
右括号）之后、空白之后是大写字母或左引号/左括号时结束；缩写表中的词和首字母
缩写不结束句子；空行总是结束句子。

任何提供 split(text) -> SentenceList 方法的对象都可以替换默认分句器。
"""

import logging
import re
import unicodedata
from functools import lru_cache
from pathlib import Path
from typing import FrozenSet, List, Optional, Protocol, Tuple

from src.core.data_models import Article, EntityName, MentionIndex, NameChange, SentenceList


logger = logging.getLogger(__name__)


DEFAULT_ABBREVIATIONS_PATH = Path(__file__).resolve().parent.parent / 'resources' / 'abbreviations.txt'

BLOCK_BREAK_PATTERN = re.compile(r'\n[ \t\r\f\v]*\n\s*')
BOUNDARY_PATTERN = re.compile(r'''([.!?]+)(["'”’»)\]]*)(\s+)(?=\S)''')
OPENING_CHARS = frozenset('"\'“‘«([')
INITIALS_PATTERN = re.compile(r'(?:[^\W\d_]\.)+')
LEADING_OPENERS = '"\'“‘«(['


class SentenceSplitter(Protocol):
    def split(self, text: str) -> SentenceList:
        ...


@lru_cache(maxsize=8)
def load_abbreviations(path: Optional[str] = None) -> FrozenSet[str]:
    """读取缩写表（每行一个，'#' 开头为注释）

    Raises:
        FileNotFoundError: 文件不存在
    """
    source = Path(path) if path else DEFAULT_ABBREVIATIONS_PATH
    with open(source, 'r', encoding='utf-8') as f:
        entries = frozenset(
            line.strip() for line in f
            if line.strip() and not line.lstrip().startswith('#')
        )
    logger.debug("加载 %d 个缩写: %s", len(entries), source)
    return entries


class RuleBasedSplitter:
    """基于规则和缩写表的分句器

    Example:
        >>> splitter = RuleBasedSplitter()
        >>> splitter.split('He visited St. Petersburg. Then he left.').sentences
        ('He visited St. Petersburg.', 'Then he left.')
    """

    def __init__(self, abbreviations_path: Optional[str] = None):
        self.abbreviations = load_abbreviations(
            str(abbreviations_path) if abbreviations_path else None
        )

    def _suppressed(self, block: str, punct_start: int, punct: str) -> bool:
        """句点前的词是缩写或首字母时不断句"""
        if punct != '.':
            return False
        match = re.search(r'\S+$', block[:punct_start + 1])
        if match is None:
            return False
        token = match.group(0).lstrip(LEADING_OPENERS)
        if token in self.abbreviations:
            return True
        return INITIALS_PATTERN.fullmatch(token) is not None

    def _block_spans(self, text: str, start: int, end: int) -> List[Tuple[int, int]]:
        block = text[start:end]
        spans = []
        sentence_start = 0
        for match in BOUNDARY_PATTERN.finditer(block):
            next_char = block[match.end()]
            if not (next_char.isupper() or next_char in OPENING_CHARS):
                continue
            if self._suppressed(block, match.start(1), match.group(1)):
                continue
            spans.append((sentence_start, match.end(2)))
            sentence_start = match.end()
        spans.append((sentence_start, len(block)))

        result = []
        for s, e in spans:
            segment = block[s:e]
            stripped = segment.strip()
            if not stripped:
                continue
            lead = len(segment) - len(segment.lstrip())
            result.append((start + s + lead, start + s + lead + len(stripped)))
        return result

    def split(self, text: str) -> SentenceList:
        spans = []
        block_start = 0
        for match in BLOCK_BREAK_PATTERN.finditer(text):
            spans.extend(self._block_spans(text, block_start, match.start()))
            block_start = match.end()
        spans.extend(self._block_spans(text, block_start, len(text)))
        return SentenceList(
            sentences=tuple(text[s:e] for s, e in spans),
            offsets=tuple(spans),
        )


_default_splitter: Optional[RuleBasedSplitter] = None


def default_splitter() -> RuleBasedSplitter:
    global _default_splitter
    if _default_splitter is None:
        _default_splitter = RuleBasedSplitter()
    return _default_splitter


def split_sentences(text: str, splitter: Optional[SentenceSplitter] = None) -> SentenceList:
    """将纯文本切分为句子

    Args:
        text: 去除标记后的文本
        splitter: 可选的分句器，默认使用内置缩写表的 RuleBasedSplitter
    """
    return (splitter or default_splitter()).split(text)


def _name_pattern(name: EntityName) -> Optional[re.Pattern]:
    terms = {unicodedata.normalize('NFC', term.strip()) for term in name.all_names()}
    terms = sorted((t for t in terms if t), key=lambda t: (-len(t), t))
    if not terms:
        return None
    alternatives = '|'.join(re.escape(term) for term in terms)
    return re.compile(r'(?<!\w)(?:%s)(?!\w)' % alternatives, re.IGNORECASE)


def index_name_mentions(sentences: SentenceList, name: EntityName) -> Tuple[int, ...]:
    """返回包含名称（规范名称或任一别名）的句子索引

    大小写无关，匹配必须位于词边界上（"Ulpia" 不匹配 "Ulpiana"）。
    """
    pattern = _name_pattern(name)
    if pattern is None:
        return ()
    return tuple(
        i for i, sentence in enumerate(sentences.sentences)
        if pattern.search(unicodedata.normalize('NFC', sentence))
    )


def index_year_mentions(sentences: SentenceList, year: int) -> Tuple[int, ...]:
    """返回以独立数字形式包含年份的句子索引（"19975" 不匹配 1997）"""
    pattern = re.compile(r'(?<!\d)%d(?!\d)' % year)
    return tuple(i for i, sentence in enumerate(sentences.sentences) if pattern.search(sentence))


def build_mention_index(article: Article, change: NameChange,
                        splitter: Optional[SentenceSplitter] = None,
                        sentences: Optional[SentenceList] = None) -> MentionIndex:
    """为一次名称变更构建三个组成部分的句子索引

    Args:
        article: 条目
        change: 带年份的名称变更
        splitter: 可选的分句器
        sentences: 已切分的句子，提供时不再重新分句

    Raises:
        ValueError: 变更没有年份
    """
    if change.year is None:
        raise ValueError(
            f"变更 {change.preceding.canonical} → {change.succeeding.canonical} 没有年份"
        )
    if sentences is None:
        sentences = split_sentences(article.body, splitter)
    return MentionIndex(
        preceding_idx=index_name_mentions(sentences, change.preceding),
        succeeding_idx=index_name_mentions(sentences, change.succeeding),
        date_idx=index_year_mentions(sentences, change.year),
    )

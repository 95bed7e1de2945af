"""页面标记清理

将 parse API 返回的条目HTML转换为纯文本：删除表格、参考文献、导航框、编辑链接和
引用标记，保留正文段落（段落之间以一个空行分隔）。
"""

import re

from bs4 import BeautifulSoup, Comment


PARSER = 'lxml'

# 整个元素（连同内容）删除
DISCARD_ELEMENTS = (
    'script', 'style', 'noscript', 'table', 'math', 'figure', 'gallery',
    'h1', 'h2', 'h3', 'h4', 'h5', 'h6', 'audio', 'video', 'map',
)

# class 含有以下关键字的元素整体删除
BOILERPLATE_CLASSES = (
    'navbox', 'vertical-navbox', 'reflist', 'references', 'mw-references-wrap',
    'toc', 'hatnote', 'mw-editsection', 'thumb', 'metadata', 'noprint',
    'reference', 'sistersitebox', 'portal', 'catlinks', 'mw-empty-elt',
    'shortdescription', 'infobox', 'ambox',
)
BOILERPLATE_SELECTOR = ', '.join('.' + name for name in BOILERPLATE_CLASSES)

# 前后插入段落分隔的块级标签
BLOCK_TAGS = (
    'p', 'div', 'li', 'ul', 'ol', 'dl', 'dd', 'dt', 'blockquote', 'section',
    'tr', 'center', 'pre',
)

CITATION_MARKER_PATTERN = re.compile(
    r'\[(?:\d+|[a-z]|note \d+|nb \d+|citation needed|clarification needed|'
    r'dubious[^\]]*|when\?|who\?|which\?|edit)\]',
    re.IGNORECASE,
)
INLINE_SPACE_PATTERN = re.compile(r'[ \t\r\f\v\u00a0\u2009\u202f]+')
PARAGRAPH_BREAK_PATTERN = re.compile(r'\n\s*\n')
# 正文里紧跟名称字符的 '<' 再次解析时会被当成标签
LOOSE_ANGLE_PATTERN = re.compile(r'<(?=[A-Za-z/!?])')

MAX_PASSES = 8


def drop_elements(soup: BeautifulSoup, selector: str) -> int:
    """删除与CSS选择器匹配的元素及其内容

    嵌套的匹配元素随外层一起删除，不会重复处理。

    Args:
        soup: 解析后的文档
        selector: CSS选择器，如 "table" 或 ".navbox, .reflist"

    Returns:
        int: 实际删除的元素个数
    """
    removed = 0
    for element in soup.select(selector):
        if element.decomposed:
            continue
        element.decompose()
        removed += 1
    return removed


def _mark_blocks(soup: BeautifulSoup) -> None:
    """在块级元素前后插入空行，并把 <br> 换成换行

    Args:
        soup: 解析后的文档（原地修改）
    """
    for br in soup.find_all('br'):
        br.replace_with('\n')
    for element in soup.find_all(list(BLOCK_TAGS)):
        element.insert_before('\n\n')
        element.insert_after('\n\n')


def _normalize_paragraphs(text: str) -> str:
    """合并段内空白，段落之间保留一个空行

    Args:
        text: 带任意换行的纯文本

    Returns:
        str: 规范化后的文本，首尾无空白
    """
    paragraphs = []
    for block in PARAGRAPH_BREAK_PATTERN.split(text):
        block = INLINE_SPACE_PATTERN.sub(' ', block.replace('\n', ' ')).strip()
        if block:
            paragraphs.append(block)
    return '\n\n'.join(paragraphs)


def _strip_once(raw: str) -> str:
    """执行一遍清理：解析、删除注释和无关元素、取文本、去引用标记

    Args:
        raw: 条目HTML或上一遍的输出

    Returns:
        str: 规范化段落后的纯文本
    """
    soup = BeautifulSoup(raw, PARSER)
    for comment in soup.find_all(string=lambda s: isinstance(s, Comment)):
        comment.extract()
    drop_elements(soup, ', '.join(DISCARD_ELEMENTS))
    drop_elements(soup, BOILERPLATE_SELECTOR)
    _mark_blocks(soup)

    text = soup.get_text()
    # "[[1]]" 之类的嵌套标记删除一层后会露出下一层
    while True:
        cleaned = CITATION_MARKER_PATTERN.sub('', text)
        if cleaned == text:
            break
        text = cleaned
    text = LOOSE_ANGLE_PATTERN.sub('< ', text)
    return _normalize_paragraphs(text)


def strip_markup(raw: str) -> str:
    """去除页面标记，只保留正文纯文本

    实体由解析器解码，属性内容不会进入正文。尽力而为，从不抛出异常；
    对自身输出幂等。

    Args:
        raw: 条目HTML（也接受纯文本）

    Returns:
        str: 以空行分隔段落的纯文本

    Example:
        >>> strip_markup('<p>Hello <b>world</b></p>')
        'Hello world'
    """
    if not raw or not raw.strip():
        return ''

    text = _strip_once(raw)
    # 解码后的实体可能重新拼出标记，重复到结果稳定
    for _ in range(MAX_PASSES):
        again = _strip_once(text) if text else text
        if again == text:
            break
        text = again
    return text

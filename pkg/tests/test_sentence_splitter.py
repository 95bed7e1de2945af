"""分句与提及索引测试"""

import pytest
from hypothesis import assume, given, settings, strategies as st

from src.core.data_models import EntityName, NameChange, SentenceList
from src.core.sentence_splitter import (
    RuleBasedSplitter,
    build_mention_index,
    index_name_mentions,
    index_year_mentions,
    load_abbreviations,
    split_sentences,
)
from tests.conftest import SWINDON_PASSAGE, make_article


THAMESDOWN_CHANGE = NameChange(EntityName('Thamesdown'), EntityName('Swindon'), 1997)


def sentences_of(*texts) -> SentenceList:
    return SentenceList(sentences=tuple(texts), offsets=tuple((0, len(t)) for t in texts))


class TestRuleBasedSplitter:
    """规则分句器测试"""

    def test_swindon_passage(self):
        sentences = split_sentences(SWINDON_PASSAGE)
        assert len(sentences) == 3
        assert sentences.sentences[1] == 'It adopted the name Swindon on 24 April 1997.'

    def test_abbreviation(self):
        result = split_sentences('He visited St. Petersburg. Then he left.')
        assert result.sentences == ('He visited St. Petersburg.', 'Then he left.')

    def test_hand_marked_fixture(self, fixtures_dir):
        """测试人工标注的50个句子"""
        expected = (fixtures_dir / 'sentences.txt').read_text(encoding='utf-8').splitlines()
        assert len(expected) == 50
        result = split_sentences(' '.join(expected))
        assert list(result.sentences) == expected

    @pytest.mark.parametrize('text, count', [
        ('Is it Edo? It is Tokyo!', 2),
        ('The U.S. Army left. Others stayed.', 2),
        ('J. R. R. Tolkien wrote it.', 1),
        ('It ended (in 1868.) Then peace.', 2),
        ('He said "It is over." Then he left.', 2),
        ('version 2.0 was released', 1),
        ('lower case after. the period', 1),
        ('', 0),
        ('   ', 0),
    ])
    def test_boundaries(self, text, count):
        assert len(split_sentences(text)) == count

    def test_paragraph_break_ends_sentence(self):
        """测试空行总是结束句子"""
        result = split_sentences('A heading without period\n\nThe body starts here.')
        assert result.sentences == ('A heading without period', 'The body starts here.')

    def test_offsets(self):
        text = '  First one.  Second one.\n\nThird'
        result = split_sentences(text)
        assert [text[s:e] for s, e in result.offsets] == list(result.sentences)

    def test_deterministic(self):
        assert split_sentences(SWINDON_PASSAGE) == split_sentences(SWINDON_PASSAGE)

    def test_custom_abbreviations(self, tmp_path):
        path = tmp_path / 'abbr.txt'
        path.write_text('# custom\nBlvd.\n', encoding='utf-8')
        splitter = RuleBasedSplitter(path)
        assert len(splitter.split('Go to Sunset Blvd. Then stop.')) == 1
        assert len(splitter.split('See Dr. Jones.')) == 2

    def test_default_abbreviations(self):
        abbreviations = load_abbreviations()
        assert 'St.' in abbreviations
        assert 'Jan.' in abbreviations
        assert not any(a.startswith('#') for a in abbreviations)

    def test_missing_abbreviation_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            RuleBasedSplitter(tmp_path / 'absent.txt')


class TestMentionIndex:
    """提及索引测试"""

    def test_swindon(self):
        """测试 Thamesdown → Swindon (1997) 的三个索引"""
        index = build_mention_index(make_article('Swindon', SWINDON_PASSAGE), THAMESDOWN_CHANGE)
        assert index.preceding_idx == (2,)
        assert index.succeeding_idx == (1, 2)
        assert index.date_idx == (0, 1)

    def test_case_insensitive(self):
        sentences = sentences_of('SWINDON is large.', 'swindon is green.')
        assert index_name_mentions(sentences, EntityName('Swindon')) == (0, 1)

    def test_word_boundaries(self):
        """测试 Ulpia 不匹配 Ulpiana"""
        sentences = sentences_of('Ulpiana was nearby.', 'It was called Ulpia.', "Ulpia's walls stood.")
        assert index_name_mentions(sentences, EntityName('Ulpia')) == (1, 2)

    def test_aliases_count_as_mentions(self):
        sentences = sentences_of('Edo was small.', 'Yedo grew.', 'Tokyo is large.')
        name = EntityName('Edo', aliases=('Yedo',))
        assert index_name_mentions(sentences, name) == (0, 1)

    def test_multiword_name(self):
        sentences = sentences_of('Saint Petersburg is old.', 'Petersburg alone.')
        assert index_name_mentions(sentences, EntityName('Saint Petersburg')) == (0,)

    def test_slash_name_matches_alias(self):
        sentences = sentences_of('It was called Ploudin.', 'Paldin/Ploudin in lists.')
        name = EntityName('Paldin/Ploudin', aliases=('Ploudin',))
        assert index_name_mentions(sentences, name) == (0, 1)

    def test_year_standalone(self):
        """测试年份必须是独立的数字"""
        sentences = sentences_of('In 19975 nothing.', 'In 1997 something.', 'Ref 11997.', '(1997–2001)')
        assert index_year_mentions(sentences, 1997) == (1, 3)

    def test_year_in_range(self):
        sentences = sentences_of('Meiji era (1868–1912).')
        assert index_year_mentions(sentences, 1868) == (0,)

    def test_indices_strictly_increasing(self):
        index = build_mention_index(make_article('Swindon', SWINDON_PASSAGE), THAMESDOWN_CHANGE)
        for component in index.components():
            assert list(component) == sorted(set(component))
            assert all(i < 3 for i in component)

    def test_undated_change(self):
        change = NameChange(EntityName('Kampuchea'), EntityName('Cambodia'))
        with pytest.raises(ValueError, match="没有年份"):
            build_mention_index(make_article('Cambodia', 'Cambodia.'), change)


FILLER_WORDS = ['the', 'city', 'was', 'renamed', 'in', 'river', 'port', 'old', 'tokyoite', 'edoan']
NAME_WORDS = ['Edo', 'Tokyo', 'Yedo', 'EDO', 'tokyo', 'New', 'Amsterdam']
YEAR_WORDS = ['1868', '1869', '18680', '868']
EDO_NEW_AMSTERDAM = NameChange(EntityName('Edo', aliases=('Yedo',)), EntityName('New Amsterdam'), 1868)

SENTENCE_WORDS = st.lists(st.sampled_from(FILLER_WORDS + NAME_WORDS + YEAR_WORDS), max_size=8)
SYNTHETIC_SENTENCES = st.lists(
    SENTENCE_WORDS.map(lambda words: ' '.join(['The'] + words + ['today.'])),
    min_size=1, max_size=8,
)


def naive_name_scan(sentences, name):
    """逐句按单词序列查找名称（大小写无关）"""
    hits = []
    for i, sentence in enumerate(sentences):
        words = sentence.rstrip('.').casefold().split()
        for term in name.all_names():
            target = term.casefold().split()
            if any(words[j:j + len(target)] == target for j in range(len(words))):
                hits.append(i)
                break
    return tuple(hits)


def naive_year_scan(sentences, year):
    return tuple(i for i, s in enumerate(sentences) if str(year) in s.rstrip('.').split())


class TestMentionOracle:
    """提及索引与朴素扫描的对照测试"""

    @given(st.lists(st.text(alphabet='abcdeEDOTKY .,!?()-\'', max_size=30), max_size=5),
           st.text(alphabet='abcdeEDOTKY -', min_size=1, max_size=6))
    @settings(max_examples=300)
    def test_mentions_within_substring_scan(self, texts, term):
        """测试名称命中的句子都包含大小写无关的子串"""
        assume(term.strip())
        name = EntityName(term.strip())
        sentences = sentences_of(*texts)
        folded = {i for i, text in enumerate(texts) if term.strip().casefold() in text.casefold()}
        assert set(index_name_mentions(sentences, name)) <= folded

    @given(SYNTHETIC_SENTENCES)
    @settings(max_examples=200)
    def test_synthetic_article_matches_naive_scan(self, generated):
        """测试随机合成条目的分句和三个索引与逐句朴素扫描一致"""
        article = make_article('New Amsterdam', ' '.join(generated))
        assert split_sentences(article.body).sentences == tuple(generated)

        index = build_mention_index(article, EDO_NEW_AMSTERDAM)
        assert index.preceding_idx == naive_name_scan(generated, EDO_NEW_AMSTERDAM.preceding)
        assert index.succeeding_idx == naive_name_scan(generated, EDO_NEW_AMSTERDAM.succeeding)
        assert index.date_idx == naive_year_scan(generated, 1868)


class TestSplitJoin:
    """分句结果重新切分与拼接测试"""

    def test_fixture_sentences_resplit_unchanged(self, fixtures_dir):
        """测试每个句子单独再切分时保持不变"""
        text = (fixtures_dir / 'sentences.txt').read_text(encoding='utf-8')
        for sentence in split_sentences(text).sentences:
            assert split_sentences(sentence).sentences == (sentence,)

    def test_join_and_resplit(self):
        first = split_sentences(SWINDON_PASSAGE)
        again = split_sentences(' '.join(first.sentences))
        assert again.sentences == first.sentences

    @given(SYNTHETIC_SENTENCES)
    @settings(max_examples=100)
    def test_offsets_slice_text(self, generated):
        text = '\n\n'.join(generated)
        result = split_sentences(text)
        assert result.sentences == tuple(generated)
        assert all(text[s:e] == sentence for (s, e), sentence in zip(result.offsets, result.sentences))

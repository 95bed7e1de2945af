"""数据模型测试

测试演化链验证、名称比较键和窗口等基础类型。
"""

import pytest

from src.core.data_models import (
    Article,
    EntityName,
    EvolutionChain,
    FetchOutcome,
    NameChange,
    Window,
    name_key,
    validate_chain,
)


EDO = EntityName('Edo')
TOKYO = EntityName('Tokyo')


class TestValidateChain:
    """validate_chain 测试"""

    def test_valid_chain(self):
        """测试有效演化链没有违规"""
        chain = EvolutionChain.from_names([EDO, TOKYO], [1868], 'places')
        assert validate_chain(chain) == []
        assert chain.entity_id == 'Tokyo'

    def test_single_name(self):
        """测试只有一个名称的演化链"""
        chain = EvolutionChain(entity_id='Edo', names=(EDO,), changes=())
        problems = validate_chain(chain)
        assert len(problems) == 1
        assert '少于2' in problems[0]

    def test_broken_linkage(self):
        """测试变更与名称序列不一致"""
        change = NameChange(EDO, EntityName('Kyoto'), 1868)
        chain = EvolutionChain(entity_id='Tokyo', names=(EDO, TOKYO), changes=(change,))
        problems = validate_chain(chain)
        assert len(problems) == 1
        assert '不一致' in problems[0]

    def test_self_rename(self):
        """测试大小写无关的自我更名"""
        chain = EvolutionChain.from_names([EDO, EntityName('EDO')], [None])
        assert any('自我更名' in p for p in validate_chain(chain))

    def test_year_out_of_range(self):
        """测试年份超出范围"""
        chain = EvolutionChain.from_names([EDO, TOKYO], [10000])
        assert any('超出范围' in p for p in validate_chain(chain))

    def test_bad_aliases(self):
        """测试小写别名和重复别名"""
        name = EntityName('Edo', aliases=('yedo', 'Yedo', 'YEDO'))
        chain = EvolutionChain.from_names([name, TOKYO], [1868])
        problems = validate_chain(chain)
        assert any('大写字母' in p for p in problems)
        assert any('重复' in p for p in problems)

    def test_alias_equal_to_canonical(self):
        """测试别名与规范名称相同"""
        chain = EvolutionChain.from_names([EntityName('Edo', aliases=('EDO',)), TOKYO], [None])
        assert any('相同' in p for p in validate_chain(chain))

    @pytest.mark.parametrize('alias, message', [
        ('Route 66', '数字'),
        ('Foo/Bar', '保留字符'),
        ('Foo (bar)', '保留字符'),
        ('Foo -> Bar', '保留字符'),
    ])
    def test_alias_reserved_or_digit(self, alias, message):
        """测试别名不能含数字或列表语法字符"""
        name = EntityName('Edo', aliases=(alias,))
        assert any(message in p for p in name.alias_violations())
        assert name.canonical_violations() == []

    def test_link_with_forbidden_character(self):
        name = EntityName('Edo', link='Edo|Yedo')
        assert any('标题不允许' in p for p in name.link_violations())

    def test_canonical_not_normalized(self):
        assert EntityName(' Edo').canonical_violations()
        assert EntityName('<nowiki>Edo</nowiki>').canonical_violations()
        assert EntityName('Georgia (country)').violations() == []

    def test_validate_is_pure(self):
        """测试验证不修改输入且结果确定"""
        chain = EvolutionChain.from_names([EDO, TOKYO], [1868])
        assert validate_chain(chain) == validate_chain(chain)
        assert chain.changes[0].year == 1868


class TestChainProperties:
    """演化链属性测试"""

    def test_chain_key(self):
        chain = EvolutionChain.from_names([EDO, TOKYO], [1868])
        assert chain.chain_key == 'Edo → Tokyo'

    def test_sequence_key_case_insensitive(self):
        """测试名称序列键大小写无关"""
        a = EvolutionChain.from_names([EDO, TOKYO], [1868])
        b = EvolutionChain.from_names([EntityName('EDO'), EntityName('tokyo')], [None])
        assert a.sequence_key == b.sequence_key

    def test_is_dated(self):
        assert EvolutionChain.from_names([EDO, TOKYO], [1868]).is_dated
        assert not EvolutionChain.from_names([EDO, TOKYO], [None]).is_dated

    def test_name_key_normalizes(self):
        """测试NFC规范化和空白去除"""
        assert name_key('  Léopoldville ') == name_key('LÉOPOLDVILLE')


class TestArticleAndOutcome:
    """条目与解析结果测试"""

    def test_article_with_markup_is_invalid(self):
        article = Article('Swindon', 'Swindon', False, 'Text <b>bold</b>')
        is_valid, message = article.validate()
        assert not is_valid
        assert '标记' in message

    def test_article_redirect_flag(self):
        """测试 redirected 标志必须与标题一致"""
        assert Article('Thamesdown', 'Swindon', True, 'x').validate()[0]
        assert not Article('Thamesdown', 'Swindon', False, 'x').validate()[0]

    def test_outcome_article_presence(self):
        """测试成功状态必须带条目"""
        assert not FetchOutcome('resolved').validate()[0]
        assert FetchOutcome('missing').validate()[0]
        assert not FetchOutcome('unknown').validate()[0]


class TestWindow:
    """窗口测试"""

    def test_distance(self):
        assert Window(1, 3).distance == 2

    def test_inverted_window(self):
        """测试起点大于终点"""
        with pytest.raises(ValueError, match="大于"):
            Window(3, 1)

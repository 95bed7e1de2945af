"""统计汇总测试

计数示例取自名称演化统计表（地理实体与产品两组数据）。
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.core.data_models import (
    EntityName,
    EvolutionChain,
    ExcerptRecord,
    NameChange,
    ResolutionRecord,
    StatsReport,
)
from src.core.statistics import (
    aggregate,
    check_consistency,
    coverage_estimate,
    coverage_product,
    distance_histogram,
    entity_averages,
    format_percentage,
    merge_reports,
    moments_from_histogram,
    percentage,
    report_rows,
    summary_moments,
)
from src.utils.error_handler import EmptyInputError, InconsistentInputError, UndefinedRateError


CHANGE = NameChange(EntityName('Edo'), EntityName('Tokyo'), 1868)


def excerpt(distance: int, chain_key: str = 'Edo → Tokyo', position: int = 0,
            in_current_article: bool = False) -> ExcerptRecord:
    return ExcerptRecord(change=CHANGE, article='Tokyo', from_idx=0, to_idx=distance,
                         distance=distance, text='', in_current_article=in_current_article,
                         entity_id='Tokyo', chain_key=chain_key, position=position)


def excerpts_from_histogram(histogram):
    return [excerpt(d) for d, count in histogram.items() for _ in range(count)]


def build_entity(index: int, years, resolvable: bool, current: bool = True,
                 linked: bool = False, articles: int = 1):
    names = [EntityName(f'Name {index} {j}') for j in range(len(years) + 1)]
    chain = EvolutionChain.from_names(names, years, 'synthetic')
    titles = tuple(f'Article {index} {j}' for j in range(articles)) if resolvable else ()
    resolution = ResolutionRecord(
        entity_id=chain.entity_id,
        chain_key=chain.chain_key,
        articles=titles,
        current_title=titles[0] if titles and current else None,
        linked_on_list=linked and resolvable,
    )
    return chain, resolution


GEOGRAPHIC_HISTOGRAM = {0: 226, 1: 118, 2: 45, 5: 99, 50: 84}
PRODUCT_HISTOGRAM = {0: 14, 1: 6, 2: 2, 7: 11, 40: 3}


class TestDistanceHistogram:
    """距离分布测试"""

    def test_small(self):
        assert distance_histogram([excerpt(d) for d in [0, 0, 1, 2]]) == {0: 2, 1: 1, 2: 1}

    def test_empty(self):
        assert distance_histogram([]) == {}

    def test_geographic_counts(self):
        histogram = distance_histogram(excerpts_from_histogram(GEOGRAPHIC_HISTOGRAM))
        assert histogram == GEOGRAPHIC_HISTOGRAM
        assert sum(histogram.values()) == 572


class TestSummaryMoments:
    """均值与中位数测试"""

    @pytest.mark.parametrize('distances, mean, median', [
        ([1], 1, 1),
        ([0, 1, 1, 2, 96], 20, 1),
        ([0, 2], 1, 1),
        ([0, 1, 4, 10], Fraction(15, 4), Fraction(5, 2)),
    ])
    def test_moments(self, distances, mean, median):
        assert summary_moments([excerpt(d) for d in distances]) == (mean, median)

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            summary_moments([])

    def test_histogram_moments_match(self):
        records = excerpts_from_histogram(GEOGRAPHIC_HISTOGRAM)
        assert moments_from_histogram(distance_histogram(records)) == summary_moments(records)

    def test_empty_histogram(self):
        assert moments_from_histogram({}) == (None, None)


class TestPercentages:
    """百分比测试"""

    @pytest.mark.parametrize('count, base, expected', [
        (488, 572, '85.3%'),
        (389, 572, '68.0%'),
        (389, 488, '79.7%'),
        (45, 572, '7.9%'),
        (118, 572, '20.6%'),
        (226, 572, '39.5%'),
        (33, 36, '91.7%'),
        (22, 36, '61.1%'),
        (22, 33, '66.7%'),
        (1, 8, '12.5%'),
        (1, 16, '6.3%'),
        (5, 5, '100.0%'),
        (0, 5, '0.0%'),
    ])
    def test_format(self, count, base, expected):
        assert format_percentage(percentage(count, base)) == expected

    def test_undefined(self):
        assert percentage(3, 0) is None
        assert format_percentage(None) == '-'

    @given(st.integers(0, 10000), st.integers(1, 10000))
    @settings(max_examples=200)
    def test_rounding_error_bound(self, count, base):
        """测试输出百分比与精确值之差不超过0.05"""
        text = format_percentage(percentage(count, base))
        assert abs(Fraction(text[:-1]) - Fraction(100 * count, base)) <= Fraction(1, 20)


class TestAggregate:
    """汇总测试"""

    def test_empty(self):
        report = aggregate([], [], [])
        assert all(v == 0 for v in report.entity_counts.values())
        assert all(v == 0 for v in report.change_counts.values())
        assert report.mean_distance is None
        assert report.median_distance is None
        assert report.violations() == []

    def test_geographic_excerpt_rows(self):
        """测试摘录计数与嵌套百分比"""
        report = aggregate([], [], excerpts_from_histogram(GEOGRAPHIC_HISTOGRAM))
        counts = report.excerpt_counts
        assert counts == {'total': 572, 'dist_lt_10': 488, 'dist_lt_3': 389,
                          'dist_eq_2': 45, 'dist_eq_1': 118, 'dist_eq_0': 226}
        rows = {row.key: row for row in report_rows(report) if row.section == 'excerpts'}
        assert format_percentage(rows['dist_lt_10'].global_percentage) == '85.3%'
        assert format_percentage(rows['dist_lt_3'].global_percentage) == '68.0%'
        assert format_percentage(rows['dist_lt_3'].nested_percentage) == '79.7%'
        assert rows['total'].nested_percentage is None

    def test_product_excerpt_rows(self):
        report = aggregate([], [], excerpts_from_histogram(PRODUCT_HISTOGRAM))
        rows = {row.key: row for row in report_rows(report) if row.section == 'excerpts'}
        assert report.excerpt_counts['total'] == 36
        assert rows['dist_lt_10'].count == 33
        assert format_percentage(rows['dist_lt_10'].global_percentage) == '91.7%'
        assert format_percentage(rows['dist_lt_3'].global_percentage) == '61.1%'
        assert format_percentage(rows['dist_lt_3'].nested_percentage) == '66.7%'

    def test_entity_and_change_counts(self):
        entities = [
            build_entity(0, [1868], resolvable=True, linked=True),
            build_entity(1, [None, 1924], resolvable=True, current=False, articles=2),
            build_entity(2, [None], resolvable=True),
            build_entity(3, [1500], resolvable=False),
        ]
        chains = [c for c, _ in entities]
        resolutions = [r for _, r in entities]
        records = [excerpt(0, chains[0].chain_key, in_current_article=True),
                   excerpt(3, chains[1].chain_key, position=1)]
        report = aggregate(chains, resolutions, records)

        assert report.entity_counts == {
            'total': 4, 'with_dates': 3, 'resolvable': 3, 'current_name_resolvable': 2,
            'linked_on_list': 1, 'multi_article': 1, 'resolvable_and_dated': 2,
        }
        assert report.change_counts == {
            'total': 5, 'of_entities_with_articles': 4, 'with_dates': 3,
            'with_articles_and_dates': 2, 'mentioned': 2, 'mentioned_in_current_article': 1,
        }
        assert report.name_counts == {'total_names': 9, 'distinct_names': 9, 'renamed_entities': 4}
        assert report.mean_distance == Fraction(3, 2)

    def test_missing_resolution_is_unresolvable(self):
        chain, _ = build_entity(0, [1868], resolvable=True)
        report = aggregate([chain], {}, [])
        assert report.entity_counts['resolvable'] == 0

    def test_resolution_mapping_accepted(self):
        chain, resolution = build_entity(0, [1868], resolvable=True)
        assert aggregate([chain], {chain.chain_key: resolution}, []) == aggregate([chain], [resolution], [])

    def test_repeated_name_counts_once(self):
        chain = EvolutionChain.from_names(
            [EntityName('Oslo'), EntityName('Christiania'), EntityName('Kristiania'), EntityName('Oslo')],
            [1624, 1877, 1925])
        report = aggregate([chain], [], [])
        assert report.name_counts == {'total_names': 4, 'distinct_names': 3, 'renamed_entities': 1}

    def test_averages(self):
        entities = [build_entity(0, [1868], True), build_entity(1, [1, 2, 3], True)]
        report = aggregate([c for c, _ in entities], [r for _, r in entities], [])
        averages = entity_averages(report)
        assert averages['changes_per_entity'] == 2
        assert averages['names_per_renamed_entity'] == 3

    def test_averages_empty(self):
        assert entity_averages(StatsReport()) == {'changes_per_entity': None,
                                                  'names_per_renamed_entity': None}


class TestConsistency:
    """输入一致性测试"""

    def test_unknown_chain(self):
        chain, _ = build_entity(0, [1868], True)
        with pytest.raises(InconsistentInputError, match="未知的演化链"):
            check_consistency([chain], [excerpt(0, 'Nowhere → Somewhere')])

    def test_position_out_of_range(self):
        chain, _ = build_entity(0, [1868], True)
        with pytest.raises(InconsistentInputError, match="超出"):
            check_consistency([chain], [excerpt(0, chain.chain_key, position=1)])

    def test_duplicate(self):
        chain, _ = build_entity(0, [1868], True)
        records = [excerpt(0, chain.chain_key), excerpt(1, chain.chain_key)]
        with pytest.raises(InconsistentInputError, match="重复"):
            check_consistency([chain], records)


class TestCoverage:
    """覆盖率估计测试"""

    def test_product(self):
        value = coverage_product(Fraction('0.985'), Fraction('0.623'), Fraction('0.680'))
        assert abs(value - Fraction('0.417')) < Fraction('0.001')

    def test_all_ones(self):
        assert coverage_product(1, 1, 1) == 1

    def test_zero_rate(self):
        assert coverage_product(Fraction(1, 2), 0, 1) == 0

    def test_undefined_rate(self):
        with pytest.raises(UndefinedRateError):
            coverage_product(Fraction(1, 2), None)

    def test_estimate(self):
        entities = [build_entity(0, [1868], True), build_entity(1, [1900], False)]
        records = [excerpt(1, entities[0][0].chain_key)]
        report = aggregate([c for c, _ in entities], [r for _, r in entities], records)
        assert coverage_estimate(report) == Fraction(1, 2)

    def test_estimate_undefined(self):
        with pytest.raises(UndefinedRateError):
            coverage_estimate(StatsReport())


entity_specs = st.lists(
    st.tuples(
        st.lists(st.one_of(st.none(), st.integers(100, 2020)), min_size=1, max_size=4),
        st.booleans(),
        st.booleans(),
        st.lists(st.integers(0, 30), max_size=4),
    ),
    max_size=12,
)


def build_run(specs, offset=0):
    chains, resolutions, records = [], [], []
    for i, (years, resolvable, current, distances) in enumerate(specs, start=offset):
        chain, resolution = build_entity(i, years, resolvable, current=current)
        chains.append(chain)
        resolutions.append(resolution)
        dated = [p for p, year in enumerate(years) if year is not None]
        if resolvable:
            for position, distance in zip(dated, distances):
                records.append(excerpt(distance, chain.chain_key, position, in_current_article=current))
    return chains, resolutions, records


class TestMergeReports:
    """分区合并测试"""

    @given(entity_specs, entity_specs, entity_specs)
    @settings(max_examples=200)
    def test_partition_associativity(self, a, b, c):
        """测试互不相交分区的报告合并等于整体报告"""
        runs = [build_run(a, 0), build_run(b, 100), build_run(c, 200)]
        reports = [aggregate(*run) for run in runs]
        whole = aggregate(*(sum((list(run[i]) for run in runs), []) for i in range(3)))

        left = merge_reports(merge_reports(reports[0], reports[1]), reports[2])
        right = merge_reports(reports[0], merge_reports(reports[1], reports[2]))
        assert left == right == whole
        assert whole.violations() == []

    @given(entity_specs)
    @settings(max_examples=200)
    def test_invariants(self, specs):
        report = aggregate(*build_run(specs))
        excerpts = report.excerpt_counts
        assert excerpts['dist_eq_0'] <= excerpts['dist_lt_3'] <= excerpts['dist_lt_10'] <= excerpts['total']
        assert sum(report.distance_histogram.values()) == excerpts['total']
        changes = report.change_counts
        assert changes['mentioned_in_current_article'] <= changes['mentioned']
        assert changes['mentioned'] <= changes['with_articles_and_dates']

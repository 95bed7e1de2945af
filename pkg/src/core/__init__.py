"""Core pipeline logic for Name Evolution Miner"""

from .data_models import (
    Article,
    Config,
    EntityName,
    EvolutionChain,
    ExcerptRecord,
    NameChange,
    StatsReport,
    validate_chain,
)
from .list_parser import dedupe_chains, normalize_chain_line, parse_list_line, parse_list_page
from .excerpt_window import min_distance, min_window

__all__ = [
    'Article',
    'Config',
    'EntityName',
    'EvolutionChain',
    'ExcerptRecord',
    'NameChange',
    'StatsReport',
    'validate_chain',
    'dedupe_chains',
    'normalize_chain_line',
    'parse_list_line',
    'parse_list_page',
    'min_distance',
    'min_window',
]

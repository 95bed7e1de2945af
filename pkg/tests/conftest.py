"""共享测试夹具"""

from pathlib import Path

import pytest

from src.core.data_models import Article


FIXTURES_DIR = Path(__file__).parent / 'fixtures'

SWINDON_PASSAGE = (
    "On 1 April 1997 it was made administratively independent of Wiltshire County Council, "
    "with its council becoming a new unitary authority. It adopted the name Swindon on "
    "24 April 1997. The former Thamesdown name and logo are still used by the main local "
    "bus company of Swindon, called Thamesdown Transport Limited."
)


def make_article(title: str, body: str, requested: str = None) -> Article:
    requested = requested or title
    return Article(requested_title=requested, resolved_title=title,
                   redirected=requested != title, body=body)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def corpus_dir():
    return FIXTURES_DIR / 'corpus'


@pytest.fixture
def list_pages():
    return sorted((FIXTURES_DIR / 'lists').glob('*.txt'))


@pytest.fixture
def products_path():
    return FIXTURES_DIR / 'products.jsonl'


@pytest.fixture
def swindon_article():
    return make_article('Swindon', SWINDON_PASSAGE)

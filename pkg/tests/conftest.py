import pytest

from symrel.corpus import Article
from symrel.vocab import Vocabulary

from helpers import concept


@pytest.fixture
def small_vocabulary() -> Vocabulary:
    return Vocabulary(
        [
            concept("D1", "disease", "influenza", "flu", "grippe"),
            concept("D2", "disease", "migraine", "migraine disorder"),
            concept("S1", "symptom", "fever", "pyrexia", "high fever"),
            concept("S2", "symptom", "headache", "head ache"),
            concept("S3", "symptom", "cough"),
        ]
    )


@pytest.fixture
def miner_articles() -> list[Article]:
    """Three articles giving co-occurrence counts that are easy to hand-check."""
    return [
        Article(
            article_id="A1",
            title="seasonal outbreaks",
            keywords=["influenza", "fever"],
            body="patients reported fever and cough",
        ),
        Article(
            article_id="A2",
            title="case series",
            keywords=["flu", "pyrexia", "headache"],
            body="fever with headache",
        ),
        Article(
            article_id="A3",
            title="migraine management",
            keywords=["migraine", "fever"],
            body="headache without fever",
        ),
    ]

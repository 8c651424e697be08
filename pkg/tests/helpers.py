"""Shared builders for test vocabularies, corpora, and files."""

import json
import random
from pathlib import Path

from symrel.corpus import Article
from symrel.vocab import Concept, ConceptKind, Vocabulary


def concept(concept_id: str, kind: str, canonical: str, *extra_synonyms: str) -> Concept:
    return Concept(
        id=concept_id,
        kind=ConceptKind(kind),
        canonical_name=canonical,
        synonyms=frozenset({canonical, *extra_synonyms}),
    )


def write_vocab(path: Path, concepts: list[Concept]) -> Path:
    lines = []
    for item in concepts:
        lines.append(
            "\t".join(
                [item.id, item.kind.value, item.canonical_name, "|".join(sorted(item.synonyms))]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_corpus(path: Path, articles: list[Article]) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for article in articles:
            handle.write(
                json.dumps(
                    {
                        "id": article.article_id,
                        "title": article.title,
                        "keywords": list(article.keywords),
                        "text": article.body,
                    }
                )
                + "\n"
            )
    return path


def random_vocabulary(rng: random.Random, n_diseases: int, n_symptoms: int) -> Vocabulary:
    """Concepts with single-word synonyms plus occasional two-word ones."""
    concepts = []
    for i in range(n_diseases):
        synonyms = [f"dis{i}", f"malady{i}"]
        if rng.random() < 0.3:
            synonyms.append(f"dis{i} type {rng.randint(1, 3)}")
        concepts.append(concept(f"D{i}", "disease", synonyms[0], *synonyms[1:]))
    for i in range(n_symptoms):
        synonyms = [f"sym{i}", f"sign{i}"]
        if rng.random() < 0.3:
            synonyms.append(f"sym{i} of note")
        concepts.append(concept(f"S{i}", "symptom", synonyms[0], *synonyms[1:]))
    return Vocabulary(concepts)


def random_articles(rng: random.Random, vocabulary: Vocabulary, count: int) -> list[Article]:
    """Articles whose sections drop concept synonyms into filler text."""
    surface_forms = sorted(
        synonym for item in vocabulary.concepts.values() for synonym in item.synonyms
    )
    filler = ["the", "patient", "presented", "with", "chronic", "acute", "notes"]

    def sentence() -> str:
        words = []
        for _ in range(rng.randint(3, 12)):
            if rng.random() < 0.4:
                words.append(rng.choice(surface_forms))
            else:
                words.append(rng.choice(filler))
        return " ".join(words)

    articles = []
    for i in range(count):
        n_keywords = rng.randint(0, 5)
        keywords = [rng.choice(surface_forms) for _ in range(n_keywords)]
        if keywords and rng.random() < 0.3:
            keywords[0] = keywords[0] + "/diagnosis"
        articles.append(
            Article(
                article_id=f"A{i}",
                title=sentence(),
                keywords=keywords,
                body=" ".join(sentence() for _ in range(rng.randint(1, 4))),
            )
        )
    return articles

"""Disease/symptom vocabulary: the universe of concepts the pipeline can see.

A vocabulary is loaded from a TSV file (one concept per line) and indexes
every normalized synonym back to its owning concept. Synonyms must be
unambiguous: the same surface form under two concept ids is rejected at
load time, because silently picking one would corrupt every downstream
co-occurrence count.
"""

import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import (
    DuplicateId,
    DuplicateSynonym,
    EmptySynonym,
    MalformedRow,
    UnknownKind,
)


class ConceptKind(str, Enum):
    """Concept role: disease (the query side) or symptom (the ranked side)."""

    DISEASE = "disease"
    SYMPTOM = "symptom"


def normalize_term(raw: str) -> str:
    """Collapse a raw surface form into its canonical matching form.

    NFC-normalize, lowercase, replace punctuation with spaces -- keeping
    hyphens that sit between alphanumerics ("x-linked") -- then collapse
    whitespace runs and trim. Total and idempotent; may return "".
    """
    text = unicodedata.normalize("NFC", raw).lower()
    last = len(text) - 1
    kept = []
    for i, ch in enumerate(text):
        if ch.isalnum():
            kept.append(ch)
        elif ch == "-" and 0 < i < last and text[i - 1].isalnum() and text[i + 1].isalnum():
            kept.append(ch)
        else:
            kept.append(" ")
    return " ".join("".join(kept).split())


@dataclass(frozen=True)
class Concept:
    """One disease or symptom with a stable id and its normalized synonyms.

    ``synonyms`` always contains ``canonical_name``.
    """

    id: str
    kind: ConceptKind
    canonical_name: str
    synonyms: frozenset[str]


class Vocabulary:
    """Concept registry with a normalized synonym -> concept index."""

    def __init__(self, concepts: Iterable[Concept]):
        self.concepts: dict[str, Concept] = {}
        self.synonym_index: dict[str, str] = {}
        for concept in concepts:
            if concept.id in self.concepts:
                raise DuplicateId(f"concept id {concept.id!r} defined twice")
            if not concept.synonyms:
                raise EmptySynonym(f"concept {concept.id!r} has no synonyms")
            self.concepts[concept.id] = concept
        for concept in self.concepts.values():
            for synonym in sorted(concept.synonyms):
                normalized = normalize_term(synonym)
                if not normalized:
                    raise EmptySynonym(
                        f"concept {concept.id!r} synonym {synonym!r} is empty once normalized"
                    )
                owner = self.synonym_index.get(normalized)
                if owner is not None and owner != concept.id:
                    raise DuplicateSynonym(
                        f"synonym {normalized!r} claimed by both {owner!r} and {concept.id!r}"
                    )
                self.synonym_index[normalized] = concept.id
        self.disease_ids = frozenset(
            c.id for c in self.concepts.values() if c.kind is ConceptKind.DISEASE
        )
        self.symptom_ids = frozenset(
            c.id for c in self.concepts.values() if c.kind is ConceptKind.SYMPTOM
        )

    @property
    def disease_count(self) -> int:
        return len(self.disease_ids)

    @property
    def symptom_count(self) -> int:
        return len(self.symptom_ids)

    def lookup(self, surface: str) -> Concept | None:
        """Exact match of the normalized surface form against all synonyms."""
        concept_id = self.synonym_index.get(normalize_term(surface))
        return self.concepts[concept_id] if concept_id is not None else None

    def __len__(self) -> int:
        return len(self.concepts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.concepts == other.concepts

    def __repr__(self) -> str:
        return (
            f"Vocabulary({self.disease_count} diseases, "
            f"{self.symptom_count} symptoms)"
        )


def load_vocabulary(path) -> Vocabulary:
    """Parse a concept TSV: id, kind, canonical name, pipe-joined synonyms.

    Lines starting with ``#`` and blank lines are ignored. The canonical
    name counts as a synonym; all surface forms are stored normalized.
    """
    path = Path(path)
    concepts: list[Concept] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw_line in enumerate(handle, 1):
            line = raw_line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MalformedRow(
                    path, lineno, f"expected 4 tab-separated fields, got {len(fields)}"
                )
            concept_id, kind_field, canonical_raw, synonyms_field = fields
            if not concept_id.strip():
                raise MalformedRow(path, lineno, "empty concept id")
            try:
                kind = ConceptKind(kind_field)
            except ValueError:
                raise UnknownKind(
                    f"{path}:{lineno}: unknown kind {kind_field!r} "
                    f"(expected 'disease' or 'symptom')"
                ) from None
            canonical = normalize_term(canonical_raw)
            if not canonical:
                raise EmptySynonym(
                    f"{path}:{lineno}: canonical name {canonical_raw!r} is empty "
                    f"after normalization"
                )
            synonyms = {canonical}
            if synonyms_field:
                for raw_synonym in synonyms_field.split("|"):
                    normalized = normalize_term(raw_synonym)
                    if not normalized:
                        raise EmptySynonym(
                            f"{path}:{lineno}: synonym {raw_synonym!r} is empty "
                            f"after normalization"
                        )
                    synonyms.add(normalized)
            concepts.append(Concept(concept_id, kind, canonical, frozenset(synonyms)))
    if not concepts:
        raise MalformedRow(path, 0, "file contains no concept rows")
    return Vocabulary(concepts)


def save_vocabulary(vocabulary: Vocabulary, path) -> None:
    """Write a vocabulary back to TSV; loading the result round-trips."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for concept in sorted(vocabulary.concepts.values(), key=lambda c: c.id):
            synonyms = "|".join(sorted(concept.synonyms))
            handle.write(
                f"{concept.id}\t{concept.kind.value}\t{concept.canonical_name}\t{synonyms}\n"
            )

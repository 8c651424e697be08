"""Exception types shared across the toolkit.

Everything raised on bad input or bad state derives from SymrelError so
the command-line layer can report one categorized error line and exit
nonzero instead of dumping a traceback.
"""


class SymrelError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SymrelError):
    """Invalid or incomplete pipeline configuration."""


class MalformedRow(SymrelError):
    """A row of a delimited text file that does not parse."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


# vocabulary
class DuplicateId(SymrelError):
    """The same concept id is defined twice."""


class DuplicateSynonym(SymrelError):
    """One normalized surface form is claimed by two concepts."""


class EmptySynonym(SymrelError):
    """A synonym or canonical name normalizes to the empty string."""


class UnknownKind(SymrelError):
    """Concept kind other than disease or symptom."""


# corpus
class MalformedRecord(SymrelError):
    """A corpus JSONL record that does not parse or fails the schema."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


class DuplicateArticleId(SymrelError):
    """Two corpus records share an article id."""


# miner
class VocabularyMismatch(SymrelError):
    """Tags, snapshots, or partial indexes disagree with the vocabulary."""


class UndefinedISF(SymrelError):
    """Inverse symptom frequency requested for a symptom no disease co-occurs with."""


class UnknownConcept(SymrelError):
    """A concept id outside the vocabulary (or with the wrong role)."""


# embedding
class DimensionMismatch(SymrelError):
    """A vector row does not match the declared dimension."""


class MissingVector(SymrelError):
    """No embedding vector for the requested concept."""

    def __init__(self, concept_id: str):
        super().__init__(f"no vector for concept {concept_id!r}")
        self.concept_id = concept_id


class ZeroNormVector(SymrelError):
    """Cosine similarity is undefined against an all-zero vector."""

    def __init__(self, concept_id: str):
        super().__init__(f"vector for concept {concept_id!r} has zero norm")
        self.concept_id = concept_id


# collection
class MalformedCollection(SymrelError):
    """A collection JSON document that fails the schema."""


class DuplicateDisease(SymrelError):
    """Two collection entries share a disease id."""


class DuplicateSymptomInEntry(SymrelError):
    """One disease entry judges the same symptom twice."""


class InvalidGrade(SymrelError):
    """A judgment grade outside {1, 2}."""


class EvenPanel(SymrelError):
    """An annotator panel that cannot break ties by strict majority."""


class MissingAnnotator(SymrelError):
    """A judged pair lacks a vote from part of the panel."""


class DuplicateAnnotation(SymrelError):
    """The same annotator rated the same pair twice."""


class UnequalPanelSizes(SymrelError):
    """Agreement statistics need every item rated by the same number of annotators."""


class PairListMismatch(SymrelError):
    """Annotation records reference pairs outside the agreed pair list."""


# metrics
class NoJudgments(SymrelError):
    """A metric that conditions on judged symptoms got an empty judgment set."""


class LengthMismatch(SymrelError):
    """Paired samples of unequal length."""


class TooFewPairs(SymrelError):
    """Fewer than two pairs; a paired test has no degrees of freedom."""

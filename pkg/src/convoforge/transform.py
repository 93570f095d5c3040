"""Transformer contract and sequential pipelines.

A Transformer learns from a corpus in fit(), annotates the same corpus in
place in transform() (returning it for chaining), and reports what it
computed in summarize(). Annotations live in metadata tables under one
documented key per transformer; only transformers flagged as structural may
change the utterance tree itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import MissingAnnotationError, NotFittedError, PipelineStageError
from .model import Corpus

logger = logging.getLogger(__name__)


def format_value(value) -> str:
    """Render one table cell. Floats are pinned to 6 significant digits so
    command output is byte-stable across runs."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


@dataclass
class SummaryTable:
    """Rows of labelled values with a fixed column order."""

    columns: list[str]
    rows: list[tuple[str, list]] = field(default_factory=list)
    label_header: str = "item"

    def add_row(self, label: str, values: list) -> None:
        if len(values) != len(self.columns):
            raise ValueError(
                f"row {label!r} has {len(values)} values for {len(self.columns)} columns"
            )
        self.rows.append((label, list(values)))

    def to_delimited(self, delimiter: str = "\t") -> str:
        lines = [delimiter.join([self.label_header] + self.columns)]
        for label, values in self.rows:
            lines.append(delimiter.join([label] + [format_value(v) for v in values]))
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.to_delimited()


class Transformer:
    """Base class; subclasses override _fit/_transform/summarize as needed.

    ``requires_fit`` gates transform() behind a successful fit();
    ``structural`` marks transformers allowed to alter the utterance tree.
    """

    name = "transformer"
    requires_fit = False
    structural = False

    def __init__(self, **config):
        self.config = config
        self.fitted = not self.requires_fit

    def fit(self, corpus: Corpus) -> "Transformer":
        """Learn whatever state transform() needs; never modifies the corpus."""
        self._fit(corpus)
        self.fitted = True
        return self

    def transform(self, corpus: Corpus) -> Corpus:
        """Annotate the corpus in place and return the same object."""
        if self.requires_fit and not self.fitted:
            raise NotFittedError(f"{self.name}: transform() called before fit()")
        self._transform(corpus)
        return corpus

    def fit_transform(self, corpus: Corpus) -> Corpus:
        return self.fit(corpus).transform(corpus)

    def summarize(self, corpus: Corpus) -> SummaryTable:
        raise NotImplementedError(f"{self.name} does not implement summarize()")

    def _fit(self, corpus: Corpus) -> None:
        pass

    def _transform(self, corpus: Corpus) -> None:
        raise NotImplementedError

    @staticmethod
    def _annotate(meta: dict, key: str, value, owner: str) -> None:
        # Overwriting a previous run's annotation is allowed but noisy.
        if key in meta:
            logger.warning("overwriting %r annotation on %s", key, owner)
        meta[key] = value


@dataclass
class Pipeline:
    """Applies transformers strictly in order on one corpus."""

    stages: list[Transformer]

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValueError("pipeline needs at least one stage")

    def run(self, corpus: Corpus, fit_first: bool = True) -> Corpus:
        for index, stage in enumerate(self.stages):
            try:
                if fit_first:
                    stage.fit(corpus)
                corpus = stage.transform(corpus)
            except PipelineStageError:
                raise
            except Exception as exc:
                raise PipelineStageError(index, stage.name, exc) from exc
        return corpus


class SpeakerMixAnnotator(Transformer):
    """Marks each conversation with whether its speakers span more than one
    value of a speaker metadata key (e.g. mixed-gender casts)."""

    name = "speaker_mix"

    def __init__(self, speaker_key: str, output_key: str = "mixed"):
        super().__init__(speaker_key=speaker_key, output_key=output_key)
        self.speaker_key = speaker_key
        self.output_key = output_key

    def _transform(self, corpus: Corpus) -> None:
        for convo in corpus.conversations.values():
            values = set()
            for uid in convo.utterance_ids:
                utt = corpus.utterances[uid]
                value = corpus.speakers[utt.speaker_id].meta.get(self.speaker_key)
                if value is not None:
                    values.add(value)
            self._annotate(convo.meta, self.output_key, len(values) >= 2,
                           f"conversation {convo.id}")

    def summarize(self, corpus: Corpus) -> SummaryTable:
        table = SummaryTable(columns=[self.output_key], label_header="conversation")
        for convo in corpus.conversations.values():
            if self.output_key not in convo.meta:
                raise MissingAnnotationError(
                    f"conversation {convo.id!r} lacks {self.output_key!r}; run transform first"
                )
            table.add_row(convo.id, [convo.meta[self.output_key]])
        return table

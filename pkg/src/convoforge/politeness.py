"""Politeness strategy counts per utterance.

Strategies are lexical markers (gratitude, apologies, hedges, sentence-
initial question words, ...) counted over lowercased tokens. The inventory
and every marker list live in data/politeness_markers.txt; its section
order fixes the key order of every extracted vector, and the file declares
per-strategy matching scope (anywhere / sentence-initial / utterance-
initial / non-initial).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Optional

from .errors import EmptySelectionError, MissingAnnotationError
from .model import Corpus, Utterance
from .transform import SummaryTable, Transformer

ANNOTATION_KEY = "politeness_strategies"

_SCOPES = ("anywhere", "sentence_initial", "utterance_initial", "non_initial")


@dataclass(frozen=True)
class Strategy:
    name: str
    scope: str
    entries: tuple[tuple[str, ...], ...]  # each entry is a token sequence


def _parse_inventory(text: str) -> tuple[Strategy, ...]:
    strategies: list[Strategy] = []
    name: Optional[str] = None
    scope = ""
    entries: list[tuple[str, ...]] = []

    def flush() -> None:
        if name is not None:
            strategies.append(Strategy(name, scope, tuple(entries)))

    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            flush()
            header = line[1:-1].split()
            if len(header) != 2 or header[1] not in _SCOPES:
                raise ValueError(f"bad marker section header: {line!r}")
            name, scope = header[0], header[1]
            entries = []
        else:
            if name is None:
                raise ValueError("marker entry before any section header")
            entries.append(tuple(line.lower().split()))
    flush()
    return tuple(strategies)


@lru_cache(maxsize=1)
def inventory() -> tuple[Strategy, ...]:
    """The canonical strategy inventory, loaded from the bundled data file."""
    text = resources.files("convoforge.data").joinpath("politeness_markers.txt").read_text(
        encoding="utf-8"
    )
    return _parse_inventory(text)


def strategy_names() -> list[str]:
    return [s.name for s in inventory()]


def _matches_at(tokens: list[str], position: int, entry: tuple[str, ...]) -> bool:
    if position + len(entry) > len(tokens):
        return False
    return all(tokens[position + k] == entry[k] for k in range(len(entry)))


def _count_strategy(sentences: list[list[str]], strategy: Strategy) -> int:
    count = 0
    for index, sentence in enumerate(sentences):
        if strategy.scope == "utterance_initial" and index > 0:
            break
        for entry in strategy.entries:
            if strategy.scope in ("sentence_initial", "utterance_initial"):
                if _matches_at(sentence, 0, entry):
                    count += 1
            elif strategy.scope == "anywhere":
                for pos in range(len(sentence)):
                    if _matches_at(sentence, pos, entry):
                        count += 1
            else:  # non_initial
                for pos in range(1, len(sentence)):
                    if _matches_at(sentence, pos, entry):
                        count += 1
    return count


def extract_strategies(utterance: Utterance) -> dict[str, int]:
    """Count each politeness strategy in one tokenized utterance.

    Requires the "tokens" annotation; counts are occurrences, not presence.
    """
    stored = utterance.meta.get("tokens")
    if stored is None:
        raise MissingAnnotationError(
            f"utterance {utterance.id!r} has no 'tokens' annotation; run a tokenizer first"
        )
    sentences = [[tok.lower() for tok in sentence] for sentence in stored]
    return {s.name: _count_strategy(sentences, s) for s in inventory()}


def summarize_politeness(
    corpus: Corpus, selector: Optional[Callable[[Utterance], bool]] = None
) -> SummaryTable:
    """Mean count of each strategy over the selected annotated utterances."""
    selected = [
        u for u in corpus.utterances.values() if selector is None or selector(u)
    ]
    if not selected:
        raise EmptySelectionError("no utterances selected")
    for utt in selected:
        if ANNOTATION_KEY not in utt.meta:
            raise MissingAnnotationError(
                f"utterance {utt.id!r} lacks {ANNOTATION_KEY!r}; run transform first"
            )
    table = SummaryTable(columns=["mean"], label_header="strategy")
    n = len(selected)
    for name in strategy_names():
        total = sum(u.meta[ANNOTATION_KEY][name] for u in selected)
        table.add_row(name, [total / n])
    return table


class PolitenessStrategies(Transformer):
    """Annotates every utterance with its strategy-count vector."""

    name = "politeness"

    def _transform(self, corpus: Corpus) -> None:
        for utt in corpus.utterances.values():
            self._annotate(utt.meta, ANNOTATION_KEY, extract_strategies(utt),
                           f"utterance {utt.id}")

    def summarize(self, corpus: Corpus) -> SummaryTable:
        return summarize_politeness(corpus)

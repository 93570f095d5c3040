"""Per-speaker linguistic diversity across conversations.

A speaker's diversity is the mean Jensen-Shannon divergence (natural log,
so bounded by ln 2) over all unordered pairs of their per-conversation
lowercased unigram distributions. Identical language in every conversation
scores 0; fully disjoint vocabularies score ln 2. Speakers active in fewer
than two eligible conversations get a null score.
"""

from __future__ import annotations

import math
from typing import Optional

from .errors import MissingAnnotationError
from .model import Corpus
from .transform import SummaryTable, Transformer

ANNOTATION_KEY = "convo_diversity"

LN2 = math.log(2.0)


def jensen_shannon(p: dict[str, float], q: dict[str, float]) -> float:
    """JSD between two distributions given as term -> probability maps."""
    divergence = 0.0
    for dist, other in ((p, q), (q, p)):
        for term, prob in dist.items():
            if prob <= 0.0:
                continue
            mid = (prob + other.get(term, 0.0)) / 2.0
            divergence += 0.5 * prob * math.log(prob / mid)
    return divergence


def _unigram_distribution(counts: dict[str, int]) -> dict[str, float]:
    total = float(sum(counts.values()))
    return {term: count / total for term, count in counts.items()}


def speaker_distributions(
    corpus: Corpus, speaker_id: str, min_tokens_per_convo: int = 1
) -> list[dict[str, float]]:
    """One unigram distribution per conversation the speaker spoke in,
    skipping conversations where they produced fewer than
    min_tokens_per_convo tokens. Requires the "tokens" annotation."""
    per_convo: dict[str, dict[str, int]] = {}
    for utt in corpus.utterances.values():
        if utt.speaker_id != speaker_id:
            continue
        stored = utt.meta.get("tokens")
        if stored is None:
            raise MissingAnnotationError(
                f"utterance {utt.id!r} has no 'tokens' annotation; run a tokenizer first"
            )
        counts = per_convo.setdefault(utt.conversation_id, {})
        for sentence in stored:
            for tok in sentence:
                tok = tok.lower()
                counts[tok] = counts.get(tok, 0) + 1
    return [
        _unigram_distribution(counts)
        for counts in per_convo.values()
        if sum(counts.values()) >= min_tokens_per_convo
    ]


def compute_diversity(corpus: Corpus, min_tokens_per_convo: int = 1) -> Corpus:
    """Annotate every speaker with their diversity score under
    "convo_diversity": {"value": float or None, "n_conversations": int}."""
    for speaker in corpus.speakers.values():
        distributions = speaker_distributions(corpus, speaker.id, min_tokens_per_convo)
        n = len(distributions)
        value: Optional[float] = None
        if n >= 2:
            total = 0.0
            pairs = 0
            for i in range(n):
                for j in range(i + 1, n):
                    total += jensen_shannon(distributions[i], distributions[j])
                    pairs += 1
            value = total / pairs
        speaker.meta[ANNOTATION_KEY] = {"value": value, "n_conversations": n}
    return corpus


class SpeakerDiversity(Transformer):
    """Transformer wrapper around compute_diversity()."""

    name = "speaker_diversity"

    def __init__(self, min_tokens_per_convo: int = 1):
        super().__init__(min_tokens_per_convo=min_tokens_per_convo)
        self.min_tokens_per_convo = min_tokens_per_convo

    def _transform(self, corpus: Corpus) -> None:
        compute_diversity(corpus, self.min_tokens_per_convo)

    def summarize(self, corpus: Corpus) -> SummaryTable:
        rows = []
        for speaker in corpus.speakers.values():
            score = speaker.meta.get(ANNOTATION_KEY)
            if score is None:
                raise MissingAnnotationError(
                    f"speaker {speaker.id!r} lacks {ANNOTATION_KEY!r}; run transform first"
                )
            rows.append((speaker.id, score["value"], score["n_conversations"]))
        # Highest diversity first; unscored speakers last, ties by id.
        rows.sort(key=lambda r: (r[1] is None, -(r[1] or 0.0), r[0]))
        table = SummaryTable(columns=["diversity", "n_conversations"], label_header="speaker")
        for speaker_id, value, n in rows:
            table.add_row(speaker_id, [value, n])
        return table

"""Class-distinctive vocabulary via z-scored log-odds with a Dirichlet prior.

Two utterance classes are compared term by term. For term w with class
counts y1_w, y2_w, class totals n1, n2, per-term prior a_w and prior total
a0 = sum(a_w):

    delta_w  = ln((y1_w + a_w) / (n1 + a0 - y1_w - a_w))
             - ln((y2_w + a_w) / (n2 + a0 - y2_w - a_w))
    sigma2_w = 1 / (y1_w + a_w) + 1 / (y2_w + a_w)
    z_w      = delta_w / sqrt(sigma2_w)

Positive z marks class-1-associated terms. Natural logarithm throughout.
The prior keeps every z finite; by default it is uniform (alpha per term),
optionally proportional to term frequency in a background corpus.
"""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EmptyClassError, EmptyVocabularyError, NotFittedError
from .filters import build_meta_predicate
from .model import Corpus, Utterance
from .textprep import utterance_tokens
from .transform import SummaryTable, Transformer

logger = logging.getLogger(__name__)

_PUNCT = frozenset(string.punctuation)


def _word_tokens(utt: Utterance) -> list[str]:
    # Lowercased, with pure-punctuation tokens dropped.
    out = []
    for sentence in utterance_tokens(utt):
        for tok in sentence:
            if not all(ch in _PUNCT for ch in tok):
                out.append(tok.lower())
    return out


def _ngrams(tokens: list[str], ngram_max: int) -> list[str]:
    grams = []
    for n in range(1, ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            grams.append(" ".join(tokens[i:i + n]))
    return grams


@dataclass
class FwModel:
    """Fitted comparison state: aligned per-term arrays over a sorted vocab."""

    vocab: list[str]
    y1: np.ndarray
    y2: np.ndarray
    n1: int
    n2: int
    alpha: np.ndarray
    alpha0: float
    deltas: np.ndarray
    zscores: np.ndarray
    index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {term: i for i, term in enumerate(self.vocab)}

    def zscore(self, term: str) -> float:
        return float(self.zscores[self.index[term]])

    def ranking(self) -> list[tuple[str, int, int, float]]:
        """Full ranking, most class-1-associated first; ties lexicographic."""
        order = sorted(range(len(self.vocab)),
                       key=lambda i: (-self.zscores[i], self.vocab[i]))
        return [
            (self.vocab[i], int(self.y1[i]), int(self.y2[i]), float(self.zscores[i]))
            for i in order
        ]


def _count_class(utterances: list[Utterance], ngram_max: int) -> dict[str, int]:
    counts: dict[str, int] = {}
    for utt in utterances:
        for gram in _ngrams(_word_tokens(utt), ngram_max):
            counts[gram] = counts.get(gram, 0) + 1
    return counts


def fit_fw(
    corpus: Corpus,
    class1: Callable[[Utterance], bool],
    class2: Callable[[Utterance], bool],
    ngram_max: int = 1,
    min_count: int = 1,
    alpha: float = 0.01,
    background: Optional[Corpus] = None,
    alpha_total: Optional[float] = None,
) -> FwModel:
    """Count both classes and score every vocabulary term.

    The vocabulary is all lowercased 1..ngram_max-grams (punctuation tokens
    excluded) whose combined count reaches min_count. With a background
    corpus, per-term priors are add-one background frequencies normalized to
    alpha_total (default: alpha per vocab term); otherwise the prior is
    uniform alpha.
    """
    utts1 = [u for u in corpus.utterances.values() if class1(u)]
    utts2 = [u for u in corpus.utterances.values() if class2(u)]
    if not utts1:
        raise EmptyClassError("class 1 selects no utterances")
    if not utts2:
        raise EmptyClassError("class 2 selects no utterances")
    overlap = {u.id for u in utts1} & {u.id for u in utts2}
    if overlap:
        logger.warning("fighting words: %d utterances fall in both classes", len(overlap))

    counts1 = _count_class(utts1, ngram_max)
    counts2 = _count_class(utts2, ngram_max)
    if not counts1:
        raise EmptyClassError("class 1 selects utterances but no word tokens")
    if not counts2:
        raise EmptyClassError("class 2 selects utterances but no word tokens")
    vocab = sorted(
        term
        for term in set(counts1) | set(counts2)
        if counts1.get(term, 0) + counts2.get(term, 0) >= min_count
    )
    if len(vocab) < 2:
        # With one term the rest-of-vocabulary mass is exactly zero and the
        # log-odds degenerate to +/-inf; there is nothing to contrast.
        raise EmptyVocabularyError(
            f"{len(vocab)} term(s) reach min_count; need at least two for a contrast"
        )

    y1 = np.array([counts1.get(t, 0) for t in vocab], dtype=float)
    y2 = np.array([counts2.get(t, 0) for t in vocab], dtype=float)
    n1 = float(y1.sum())
    n2 = float(y2.sum())

    if background is not None:
        bg_counts: dict[str, int] = {}
        for utt in background.utterances.values():
            for gram in _ngrams(_word_tokens(utt), ngram_max):
                bg_counts[gram] = bg_counts.get(gram, 0) + 1
        # Add-one smoothing keeps every prior strictly positive.
        raw = np.array([bg_counts.get(t, 0) + 1 for t in vocab], dtype=float)
        total = alpha_total if alpha_total is not None else alpha * len(vocab)
        alpha_vec = raw * (total / raw.sum())
    else:
        alpha_vec = np.full(len(vocab), alpha, dtype=float)
    alpha0 = float(alpha_vec.sum())

    deltas = (
        np.log((y1 + alpha_vec) / (n1 + alpha0 - y1 - alpha_vec))
        - np.log((y2 + alpha_vec) / (n2 + alpha0 - y2 - alpha_vec))
    )
    sigma2 = 1.0 / (y1 + alpha_vec) + 1.0 / (y2 + alpha_vec)
    zscores = deltas / np.sqrt(sigma2)

    return FwModel(
        vocab=vocab, y1=y1, y2=y2, n1=int(n1), n2=int(n2),
        alpha=alpha_vec, alpha0=alpha0, deltas=deltas, zscores=zscores,
    )


def summarize_fw(model: Optional[FwModel], top_k: int = 10) -> SummaryTable:
    """Top class-1 terms (descending z) then top class-2 terms (ascending z)."""
    if model is None:
        raise NotFittedError("fighting words model is not fitted")
    by_class1 = sorted(range(len(model.vocab)),
                       key=lambda i: (-model.zscores[i], model.vocab[i]))
    by_class2 = sorted(range(len(model.vocab)),
                       key=lambda i: (model.zscores[i], model.vocab[i]))
    table = SummaryTable(columns=["class", "y1", "y2", "zscore"], label_header="term")
    for i in by_class1[:top_k]:
        table.add_row(model.vocab[i],
                      ["class1", int(model.y1[i]), int(model.y2[i]), float(model.zscores[i])])
    for i in by_class2[:top_k]:
        table.add_row(model.vocab[i],
                      ["class2", int(model.y1[i]), int(model.y2[i]), float(model.zscores[i])])
    return table


class FightingWords(Transformer):
    """Transformer wrapper: fit() learns the comparison, transform() tags
    each utterance's class membership under "fw_class".

    class1/class2 may be utterance predicates or metadata filter expressions
    (see filters module), e.g. FightingWords(class1="mixed=true",
    class2="mixed=false").
    """

    name = "fighting_words"
    requires_fit = True

    def __init__(self, class1, class2, ngram_max: int = 1, min_count: int = 1,
                 alpha: float = 0.01, top_k: int = 10):
        super().__init__(ngram_max=ngram_max, min_count=min_count, alpha=alpha, top_k=top_k)
        self._class1 = class1
        self._class2 = class2
        self.ngram_max = ngram_max
        self.min_count = min_count
        self.alpha = alpha
        self.top_k = top_k
        self.model: Optional[FwModel] = None

    def _predicates(self, corpus: Corpus):
        class1 = self._class1
        class2 = self._class2
        if isinstance(class1, str):
            class1 = build_meta_predicate(corpus, class1)
        if isinstance(class2, str):
            class2 = build_meta_predicate(corpus, class2)
        return class1, class2

    def _fit(self, corpus: Corpus) -> None:
        class1, class2 = self._predicates(corpus)
        self.model = fit_fw(corpus, class1, class2, ngram_max=self.ngram_max,
                            min_count=self.min_count, alpha=self.alpha)

    def _transform(self, corpus: Corpus) -> None:
        class1, class2 = self._predicates(corpus)
        for utt in corpus.utterances.values():
            in1, in2 = class1(utt), class2(utt)
            label = "both" if in1 and in2 else "class1" if in1 else "class2" if in2 else "none"
            self._annotate(utt.meta, "fw_class", label, f"utterance {utt.id}")

    def summarize(self, corpus: Corpus) -> SummaryTable:
        return summarize_fw(self.model, top_k=self.top_k)

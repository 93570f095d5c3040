"""Preprocessing: web-text cleaning, tokenization, and merging of
consecutive same-speaker utterances.

clean_text applies, in order: markup stripping with entity decoding, URL and
email replacement by the sentinel tokens <url> and <email>, compatibility
Unicode normalization with transliteration to ASCII (unmappable symbols are
dropped), and whitespace collapsing. The markup and sentinel passes are
re-applied after transliteration because compatibility normalization can
materialize ASCII markup (e.g. fullwidth brackets); this keeps the function
idempotent, which downstream pipelines rely on when re-run over their own
output.
"""

from __future__ import annotations

import html
import logging
import re
import string
import unicodedata
from dataclasses import dataclass

from .model import Corpus, Utterance, traverse
from .transform import SummaryTable, Transformer

logger = logging.getLogger(__name__)

URL_SENTINEL = "<url>"
EMAIL_SENTINEL = "<email>"

# Strip anything tag-shaped except the sentinels themselves.
_TAG_RE = re.compile(r"<(?!(?:url|email)>)[^<>]+>")
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_EMAIL_RE = re.compile(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+")
_WS_RE = re.compile(r"\s+")

# Trailing periods on these words do not end a sentence.
ABBREVIATIONS = frozenset(
    ["mr.", "mrs.", "dr.", "st.", "vs.", "e.g.", "i.e.", "etc."]
)

_PUNCT = frozenset(string.punctuation)


@dataclass
class TokenAnnotation:
    """Sentences as token lists; no sentence or token is ever empty."""

    sentences: list[list[str]]

    @property
    def tokens(self) -> list[str]:
        return [tok for sentence in self.sentences for tok in sentence]


def _strip_markup(text: str) -> str:
    # Tag stripping and entity decoding feed each other ("&lt;b&gt;" decodes
    # to a tag), so iterate to a fixed point.
    for _ in range(25):
        stripped = html.unescape(_TAG_RE.sub(" ", text))
        if stripped == text:
            break
        text = stripped
    return text


def _replace_sentinels(text: str) -> str:
    text = _URL_RE.sub(URL_SENTINEL, text)
    return _EMAIL_RE.sub(EMAIL_SENTINEL, text)


def clean_text(raw: str) -> str:
    """Normalize dirty web text to a single-spaced ASCII string."""
    text = _strip_markup(raw)
    text = _replace_sentinels(text)
    text = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode("ascii")
    text = _strip_markup(text)
    text = _replace_sentinels(text)
    return _WS_RE.sub(" ", text).strip()


def _split_sentences(text: str) -> list[str]:
    sentences = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in ".!?" and i + 1 < n and text[i + 1].isspace():
            if ch == ".":
                # Word ending at this period, e.g. "dr." or "e.g."
                j = i
                while j > start and not text[j - 1].isspace():
                    j -= 1
                if text[j:i + 1].lower() in ABBREVIATIONS:
                    i += 1
                    continue
            sentences.append(text[start:i + 1])
            i += 1
            while i < n and text[i].isspace():
                i += 1
            start = i
            continue
        i += 1
    if start < n:
        sentences.append(text[start:])
    return [s for s in sentences if s.strip()]


def _split_tokens(chunk: str) -> list[str]:
    leading = []
    while chunk and chunk[0] in _PUNCT:
        leading.append(chunk[0])
        chunk = chunk[1:]
    trailing = []
    while chunk and chunk[-1] in _PUNCT:
        trailing.append(chunk[-1])
        chunk = chunk[:-1]
    tokens = leading
    if chunk:
        tokens.append(chunk)
    tokens.extend(reversed(trailing))
    return tokens


def tokenize(text: str) -> TokenAnnotation:
    """Split into sentences on terminal punctuation (with a fixed
    abbreviation list exempted), then into tokens on whitespace with
    leading/trailing punctuation peeled off as separate tokens. Case is
    preserved; lowercasing is the consumer's decision."""
    sentences = []
    for sentence in _split_sentences(text):
        tokens: list[str] = []
        for chunk in sentence.split():
            tokens.extend(_split_tokens(chunk))
        if tokens:
            sentences.append(tokens)
    return TokenAnnotation(sentences=sentences)


def utterance_tokens(utt: Utterance) -> list[list[str]]:
    """Token sentences for an utterance: stored annotation if present,
    otherwise tokenized on the fly from clean_text meta or raw text."""
    stored = utt.meta.get("tokens")
    if stored is not None:
        return stored
    return tokenize(utt.meta.get("clean_text", utt.text)).sentences


class TextCleaner(Transformer):
    """Annotates each utterance with its cleaned text under "clean_text".

    With overwrite_text=True the utterance text itself is replaced instead
    of only annotated.
    """

    name = "text_cleaner"

    def __init__(self, overwrite_text: bool = False):
        super().__init__(overwrite_text=overwrite_text)
        self.overwrite_text = overwrite_text

    def _transform(self, corpus: Corpus) -> None:
        for utt in corpus.utterances.values():
            cleaned = clean_text(utt.text)
            self._annotate(utt.meta, "clean_text", cleaned, f"utterance {utt.id}")
            if self.overwrite_text:
                utt.text = cleaned


class Tokenizer(Transformer):
    """Annotates each utterance with sentence/token lists under "tokens".

    Prefers the "clean_text" annotation when a cleaner ran earlier.
    """

    name = "tokenizer"

    def _transform(self, corpus: Corpus) -> None:
        for utt in corpus.utterances.values():
            source = utt.meta.get("clean_text", utt.text)
            self._annotate(utt.meta, "tokens", tokenize(source).sentences,
                           f"utterance {utt.id}")


def _merge_pair(corpus: Corpus, parent: Utterance, child: Utterance) -> None:
    parent.text = parent.text + "\n" + child.text
    for key, value in child.meta.items():
        if key in parent.meta:
            if parent.meta[key] != value:
                logger.warning(
                    "merge_consecutive: keeping %r's value for meta key %r, dropping %r's",
                    parent.id, key, child.id,
                )
        else:
            parent.meta[key] = value
    stamps = [t for t in (parent.timestamp, child.timestamp) if t is not None]
    parent.timestamp = min(stamps) if stamps else None
    for utt in corpus.utterances.values():
        if utt.reply_to == child.id:
            utt.reply_to = parent.id
    convo = corpus.conversations[child.conversation_id]
    convo.utterance_ids.remove(child.id)
    del corpus.utterances[child.id]


def merge_consecutive(corpus: Corpus) -> Corpus:
    """Fold every utterance that is its parent's only child and shares the
    parent's speaker into that parent, repeatedly, until no pair is left.

    Texts join with a newline, the child's children re-parent, metadata
    merges key-wise with the parent winning, and the earliest timestamp is
    kept. Branch points never merge. Structural: utterances are removed.
    """
    for conversation_id in list(corpus.conversations):
        while True:
            merged = False
            for utt in traverse(corpus, conversation_id, "bfs"):
                children = [
                    corpus.utterances[uid]
                    for uid in corpus.conversations[conversation_id].utterance_ids
                    if corpus.utterances[uid].reply_to == utt.id
                ]
                if len(children) == 1 and children[0].speaker_id == utt.speaker_id:
                    _merge_pair(corpus, utt, children[0])
                    merged = True
                    break
            if not merged:
                break
    return corpus


class MergeConsecutive(Transformer):
    """Structural transformer wrapping merge_consecutive()."""

    name = "merge_consecutive"
    structural = True

    def _transform(self, corpus: Corpus) -> None:
        merge_consecutive(corpus)

    def summarize(self, corpus: Corpus) -> SummaryTable:
        table = SummaryTable(columns=["utterances"], label_header="conversation")
        for convo in corpus.conversations.values():
            table.add_row(convo.id, [len(convo.utterance_ids)])
        return table

"""Bundled example corpora.

toy_movie: 14 fictional dialog utterances across four conversations, with a
"gender" key on every speaker. The token "alpha" appears only in the two
mixed-cast conversations and "ledger" only in the single-cast ones, so the
corpus has a known planted signal for language-comparison demos and tests.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .corpus_io import load
from .model import Corpus


def toy_movie_path() -> Path:
    """Directory of the bundled toy movie-dialog corpus."""
    return Path(str(resources.files("convoforge.data").joinpath("toy_movie")))


def load_toy_movie() -> Corpus:
    return load(toy_movie_path())

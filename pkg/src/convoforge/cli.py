"""The convoforge command line.

Subcommands operate on a corpus directory given with the global --corpus
flag: validate, stats, run (pipeline config), fightingwords, politeness,
hyperconvo, diversity, export. Tables go to standard output as tab-
separated text with floats pinned to 6 significant digits, so output is
byte-stable and diffable. Exit codes: 0 success, 1 domain failure, 2
usage or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus_io
from .diversity import SpeakerDiversity
from .errors import (
    ConvoForgeError,
    CountMismatchError,
    IntegrityViolationError,
    IoFailureError,
    MalformedRecordError,
    MissingColumnError,
    MissingFileError,
    PipelineStageError,
    UnsupportedVersionError,
)
from .fightingwords import fit_fw, summarize_fw
from .filters import build_meta_predicate
from .hyperconvo import HyperConvo
from .model import check_integrity, traverse
from .politeness import PolitenessStrategies
from .registry import create_transformer
from .textprep import Tokenizer
from .transform import Pipeline, format_value

USAGE_ERRORS = (
    MissingFileError,
    MalformedRecordError,
    CountMismatchError,
    UnsupportedVersionError,
    IoFailureError,
    MissingColumnError,
)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_corpus(args):
    if not args.corpus:
        raise MissingFileError("no corpus directory given; use --corpus DIR")
    return corpus_io.load(args.corpus)


def _ensure_tokens(corpus) -> None:
    if any("tokens" not in u.meta for u in corpus.utterances.values()):
        Tokenizer().transform(corpus)


def _emit_table(table, export_path=None, delimiter="\t") -> None:
    print(table.to_delimited())
    if export_path:
        Path(export_path).write_text(table.to_delimited(delimiter) + "\n", encoding="utf-8")


def cmd_validate(args) -> int:
    if not args.corpus:
        raise MissingFileError("no corpus directory given; use --corpus DIR")
    try:
        corpus = corpus_io.load(args.corpus)
    except IntegrityViolationError as exc:
        for violation in exc.violations:
            print(violation)
        return 1
    report = check_integrity(corpus)
    if not report.ok:
        for violation in report.violations:
            print(violation)
        return 1
    if not args.quiet:
        print("ok")
    return 0


def cmd_stats(args) -> int:
    corpus = _load_corpus(args)
    depths = []
    sizes = []
    for convo in corpus.conversations.values():
        sizes.append(len(convo.utterance_ids))
        by_id = {u.id: u for u in corpus.utterances_in(convo.id)}
        depth = {}
        longest = 0
        for utt in traverse(corpus, convo.id, "bfs"):
            depth[utt.id] = 1 if utt.reply_to is None else depth[by_id[utt.reply_to].id] + 1
            longest = max(longest, depth[utt.id])
        depths.append(longest)
    n = len(sizes)
    rows = [
        ("speakers", len(corpus.speakers)),
        ("conversations", len(corpus.conversations)),
        ("utterances", len(corpus.utterances)),
        ("mean_conversation_size", sum(sizes) / n if n else 0.0),
        ("mean_conversation_depth", sum(depths) / n if n else 0.0),
    ]
    print("metric\tvalue")
    for name, value in rows:
        print(f"{name}\t{format_value(value)}")
    return 0


def cmd_run(args) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        return _fail(f"no such config file: {config_path}", 2)
    try:
        config = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        return _fail(f"config is not valid JSON: {exc.msg}", 2)

    stages_config = config.get("stages")
    if not isinstance(stages_config, list) or not stages_config:
        return _fail("config needs a non-empty 'stages' list", 2)
    stages = []
    for index, stage in enumerate(stages_config):
        name = stage.get("name") if isinstance(stage, dict) else None
        if not name:
            return _fail(f"stage {index}: missing transformer name", 2)
        params = stage.get("params", {})
        if not isinstance(params, dict):
            return _fail(f"stage {index} ({name}): params must be an object", 2)
        try:
            stages.append(create_transformer(name, params))
        except (ValueError, TypeError) as exc:
            return _fail(f"stage {index} ({name}): {exc}", 2)

    input_path = args.corpus or config.get("input")
    output_path = config.get("output")
    if not input_path:
        return _fail("no input corpus: set 'input' in the config or pass --corpus", 2)
    if not output_path:
        return _fail("config needs an 'output' corpus path", 2)

    corpus = corpus_io.load(input_path)
    try:
        corpus = Pipeline(stages).run(corpus, fit_first=True)
    except PipelineStageError as exc:
        return _fail(str(exc), 1)
    corpus_io.save(corpus, output_path)
    if not args.quiet:
        print(f"wrote {output_path}")
    return 0


def cmd_fightingwords(args) -> int:
    corpus = _load_corpus(args)
    class1 = build_meta_predicate(corpus, args.class1)
    class2 = build_meta_predicate(corpus, args.class2)
    model = fit_fw(corpus, class1, class2, ngram_max=args.ngram_max,
                   min_count=args.min_count, alpha=args.alpha)
    print(summarize_fw(model, top_k=args.top_k).to_delimited())
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            fh.write(args.delimiter.join(["term", "y1", "y2", "zscore"]) + "\n")
            for term, y1, y2, z in model.ranking():
                fh.write(args.delimiter.join(
                    [term, str(y1), str(y2), format_value(z)]) + "\n")
    return 0


def _run_annotator(args, transformer) -> int:
    corpus = _load_corpus(args)
    if transformer.name in ("politeness", "speaker_diversity"):
        _ensure_tokens(corpus)
    transformer.fit(corpus)
    transformer.transform(corpus)
    _emit_table(transformer.summarize(corpus), args.export, args.delimiter)
    if args.output:
        corpus_io.save(corpus, args.output)
        if not args.quiet:
            print(f"wrote {args.output}", file=sys.stderr)
    return 0


def cmd_politeness(args) -> int:
    return _run_annotator(args, PolitenessStrategies())


def cmd_hyperconvo(args) -> int:
    return _run_annotator(args, HyperConvo())


def cmd_diversity(args) -> int:
    return _run_annotator(args, SpeakerDiversity(min_tokens_per_convo=args.min_tokens))


def cmd_export(args) -> int:
    corpus = _load_corpus(args)
    meta_columns = [c for c in (args.meta_columns or "").split(",") if c]
    corpus_io.export_tabular(corpus, args.output, delimiter=args.delimiter,
                             meta_columns=meta_columns)
    if not args.quiet:
        print(f"wrote {args.output}", file=sys.stderr)
    return 0


def _add_global_flags(parser: argparse.ArgumentParser, trailing: bool) -> None:
    # Registered on the root parser and again on every subcommand so they
    # are accepted in either position; the trailing copies use SUPPRESS
    # defaults so they never clobber values parsed before the subcommand.
    suppress = {"default": argparse.SUPPRESS} if trailing else {}
    parser.add_argument("--corpus", help="corpus directory to operate on",
                        **(suppress or {"default": None}))
    parser.add_argument("--quiet", action="store_true",
                        help="suppress informational output",
                        **(suppress or {"default": False}))
    parser.add_argument("--seed", type=int,
                        help="reserved; current commands are deterministic",
                        **(suppress or {"default": None}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convoforge",
        description="Analyze threaded conversational corpora.",
    )
    _add_global_flags(parser, trailing=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_command(name: str, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, help=help_text)
        _add_global_flags(command, trailing=True)
        return command

    add_command("validate", "check corpus integrity").set_defaults(func=cmd_validate)
    add_command("stats", "corpus-level counts").set_defaults(func=cmd_stats)

    run = add_command("run", "execute a pipeline config")
    run.add_argument("config", help="pipeline config JSON file")
    run.set_defaults(func=cmd_run)

    fw = add_command("fightingwords", "compare two metadata-defined classes")
    fw.add_argument("--class1", required=True, help="filter, e.g. mixed=true")
    fw.add_argument("--class2", required=True, help="filter, e.g. mixed=false")
    fw.add_argument("--top-k", type=int, default=10, dest="top_k")
    fw.add_argument("--ngram-max", type=int, default=1, dest="ngram_max")
    fw.add_argument("--min-count", type=int, default=1, dest="min_count")
    fw.add_argument("--alpha", type=float, default=0.01)
    fw.add_argument("--export", help="write the full ranking to this file")
    fw.add_argument("--delimiter", default=",", help="delimiter for --export")
    fw.set_defaults(func=cmd_fightingwords)

    for name, func, extra in (
        ("politeness", cmd_politeness, None),
        ("hyperconvo", cmd_hyperconvo, None),
        ("diversity", cmd_diversity, "min_tokens"),
    ):
        cmd = add_command(name, f"run the {name} analyzer and print its summary")
        cmd.add_argument("--export", help="write the summary table to this file")
        cmd.add_argument("--delimiter", default="\t", help="delimiter for --export")
        cmd.add_argument("--output", help="save the annotated corpus to this directory")
        if extra == "min_tokens":
            cmd.add_argument("--min-tokens", type=int, default=1, dest="min_tokens")
        cmd.set_defaults(func=func)

    export = add_command("export", "write utterances as a delimited table")
    export.add_argument("--output", required=True)
    export.add_argument("--delimiter", default=",")
    export.add_argument("--meta-columns", dest="meta_columns",
                        help="comma-separated utterance meta keys to include")
    export.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr,
                        level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        return _fail(str(exc), 2)
    except ValueError as exc:
        return _fail(str(exc), 2)
    except ConvoForgeError as exc:
        # Domain failures (empty class, missing annotation, ...) exit 1.
        return _fail(str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())

"""Disk format, corpus merging, and tabular import/export.

On-disk layout of a corpus directory (all files UTF-8):

    manifest.json        format version, object counts, corpus metadata
    utterances.jsonl     one record per line, fixed key order:
                         id, conversation_id, reply_to, speaker, timestamp, text, meta
    speakers.json        map speaker id -> {"meta": {...}}
    conversations.json   map conversation id -> {"meta": {...}}

Records are written in corpus insertion order, which makes output bytes
stable across runs and lets load() reconstruct an equal corpus. Numbers in
metadata keep their integer/float identity through the JSON round trip.
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    CountMismatchError,
    IntegrityViolationError,
    IoFailureError,
    IrreconcilableCollisionError,
    MalformedRecordError,
    MissingColumnError,
    MissingFileError,
    UnsupportedVersionError,
)
from .model import Conversation, Corpus, Speaker, Utterance, build_corpus, check_integrity

FORMAT_VERSION = "1.0"

MANIFEST_FILE = "manifest.json"
UTTERANCES_FILE = "utterances.jsonl"
SPEAKERS_FILE = "speakers.json"
CONVERSATIONS_FILE = "conversations.json"

# Canonical field names understood by the tabular importer/exporter.
TABULAR_FIELDS = ("id", "speaker_id", "conversation_id", "reply_to", "timestamp", "text")
MANDATORY_TABULAR_FIELDS = ("id", "speaker_id", "conversation_id", "text")


@dataclass
class CorpusManifest:
    format_version: str
    utterance_count: int
    conversation_count: int
    speaker_count: int
    corpus_meta: dict = field(default_factory=dict)


@dataclass
class ImportMapping:
    """Maps canonical utterance fields to source column names.

    id, speaker_id, conversation_id, and text are mandatory; reply_to and
    timestamp are optional. ``meta_columns`` are copied into utterance
    metadata as strings.
    """

    column_for: dict[str, str]
    meta_columns: list[str] = field(default_factory=list)
    delimiter: str = ","

    def __post_init__(self) -> None:
        for name in MANDATORY_TABULAR_FIELDS:
            if name not in self.column_for:
                raise MissingColumnError(f"mapping for mandatory field {name!r} is missing")
        unknown = set(self.column_for) - set(TABULAR_FIELDS)
        if unknown:
            raise MissingColumnError(f"unknown mapped fields: {sorted(unknown)}")


@dataclass(frozen=True)
class MergeConflict:
    """A metadata key that differed between the two merged corpora."""

    kind: str  # corpus_meta | speaker_meta | conversation_meta | utterance_meta
    object_id: str
    key: str
    kept: object
    discarded: object


def _utterance_record(utt: Utterance) -> dict:
    # Key order is part of the format; do not reorder.
    return {
        "id": utt.id,
        "conversation_id": utt.conversation_id,
        "reply_to": utt.reply_to,
        "speaker": utt.speaker_id,
        "timestamp": utt.timestamp,
        "text": utt.text,
        "meta": utt.meta,
    }


def save(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus directory; refuses to persist an invalid corpus."""
    report = check_integrity(corpus)
    if not report.ok:
        raise IntegrityViolationError(
            f"refusing to save corpus with {len(report.violations)} integrity violations",
            violations=report.violations,
        )
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {
            "format_version": FORMAT_VERSION,
            "utterance_count": len(corpus.utterances),
            "conversation_count": len(corpus.conversations),
            "speaker_count": len(corpus.speakers),
            "corpus_meta": corpus.meta,
        }
        (directory / MANIFEST_FILE).write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        with open(directory / UTTERANCES_FILE, "w", encoding="utf-8", newline="\n") as fh:
            for utt in corpus.utterances.values():
                fh.write(json.dumps(_utterance_record(utt), ensure_ascii=False,
                                    separators=(",", ":")))
                fh.write("\n")
        speakers = {sid: {"meta": spk.meta} for sid, spk in corpus.speakers.items()}
        (directory / SPEAKERS_FILE).write_text(
            json.dumps(speakers, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        conversations = {cid: {"meta": convo.meta} for cid, convo in corpus.conversations.items()}
        (directory / CONVERSATIONS_FILE).write_text(
            json.dumps(conversations, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailureError(f"cannot write corpus to {directory}: {exc}") from exc


def _require_file(directory: Path, name: str) -> Path:
    target = directory / name
    if not target.is_file():
        raise MissingFileError(f"missing corpus file: {target}")
    return target


def _parse_utterance_line(line: str, line_number: int) -> Utterance:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(
            f"line {line_number}: invalid JSON ({exc.msg})", line_number=line_number
        ) from exc
    if not isinstance(record, dict):
        raise MalformedRecordError(f"line {line_number}: record is not an object",
                                   line_number=line_number)
    missing = [k for k in ("id", "conversation_id", "reply_to", "speaker",
                           "timestamp", "text", "meta") if k not in record]
    if missing:
        raise MalformedRecordError(
            f"line {line_number}: missing keys {missing}", line_number=line_number
        )
    uid = record["id"]
    if not isinstance(uid, str) or not uid:
        raise MalformedRecordError(f"line {line_number}: bad utterance id",
                                   line_number=line_number)
    reply_to = record["reply_to"]
    if reply_to is not None and not isinstance(reply_to, str):
        raise MalformedRecordError(f"line {line_number}: bad reply_to", line_number=line_number)
    timestamp = record["timestamp"]
    if timestamp is not None and (isinstance(timestamp, bool) or not isinstance(timestamp, int)):
        raise MalformedRecordError(f"line {line_number}: bad timestamp", line_number=line_number)
    if not isinstance(record["speaker"], str) or not isinstance(record["conversation_id"], str):
        raise MalformedRecordError(f"line {line_number}: bad speaker or conversation id",
                                   line_number=line_number)
    if not isinstance(record["text"], str) or not isinstance(record["meta"], dict):
        raise MalformedRecordError(f"line {line_number}: bad text or meta",
                                   line_number=line_number)
    return Utterance(
        id=uid,
        speaker_id=record["speaker"],
        conversation_id=record["conversation_id"],
        text=record["text"],
        reply_to=reply_to,
        timestamp=timestamp,
        meta=record["meta"],
    )


def load(path: str | Path) -> Corpus:
    """Read a corpus directory; verifies manifest counts and integrity."""
    directory = Path(path)
    if not directory.is_dir():
        raise MissingFileError(f"not a corpus directory: {directory}")

    manifest_path = _require_file(directory, MANIFEST_FILE)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(f"{MANIFEST_FILE}: invalid JSON ({exc.msg})") from exc
    version = str(manifest.get("format_version", ""))
    major = version.split(".", 1)[0]
    if major != FORMAT_VERSION.split(".", 1)[0]:
        raise UnsupportedVersionError(f"unsupported corpus format version: {version!r}")

    corpus = Corpus(meta=manifest.get("corpus_meta", {}))

    speakers_path = _require_file(directory, SPEAKERS_FILE)
    try:
        speakers = json.loads(speakers_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(f"{SPEAKERS_FILE}: invalid JSON ({exc.msg})") from exc
    for sid, payload in speakers.items():
        corpus.speakers[sid] = Speaker(id=sid, meta=payload.get("meta", {}))

    conversations_path = _require_file(directory, CONVERSATIONS_FILE)
    try:
        conversations = json.loads(conversations_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(f"{CONVERSATIONS_FILE}: invalid JSON ({exc.msg})") from exc
    for cid, payload in conversations.items():
        corpus.conversations[cid] = Conversation(id=cid, meta=payload.get("meta", {}))

    utterances_path = _require_file(directory, UTTERANCES_FILE)
    with open(utterances_path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            utt = _parse_utterance_line(line, line_number)
            if utt.id in corpus.utterances:
                raise MalformedRecordError(
                    f"line {line_number}: duplicate utterance id {utt.id!r}",
                    line_number=line_number,
                )
            corpus.utterances[utt.id] = utt
            convo = corpus.conversations.get(utt.conversation_id)
            if convo is not None:
                convo.utterance_ids.append(utt.id)

    for label, declared, actual in (
        ("utterance", manifest.get("utterance_count"), len(corpus.utterances)),
        ("conversation", manifest.get("conversation_count"), len(corpus.conversations)),
        ("speaker", manifest.get("speaker_count"), len(corpus.speakers)),
    ):
        if declared != actual:
            raise CountMismatchError(
                f"manifest declares {declared} {label}s but payload has {actual}"
            )

    report = check_integrity(corpus)
    if not report.ok:
        raise IntegrityViolationError(
            f"loaded corpus fails integrity checks ({len(report.violations)} violations)",
            violations=report.violations,
        )
    return corpus


def _merge_meta(kind: str, object_id: str, base: dict, incoming: dict,
                log: list) -> dict:
    merged = dict(base)
    for key, value in incoming.items():
        if key in merged and merged[key] != value:
            log.append(MergeConflict(kind, object_id, key, kept=value,
                                     discarded=merged[key]))
        merged[key] = value
    return merged


def merge(a: Corpus, b: Corpus) -> Corpus:
    """Union of two corpora. Metadata conflicts resolve in b's favor and are
    recorded in the result's merge_log; differing structural fields on a
    shared utterance id are irreconcilable.
    """
    log: list[MergeConflict] = []
    result = Corpus(meta=_merge_meta("corpus_meta", "", a.meta, b.meta, log))

    for sid, spk in a.speakers.items():
        result.speakers[sid] = Speaker(id=sid, meta=copy.deepcopy(spk.meta))
    for sid, spk in b.speakers.items():
        if sid in result.speakers:
            result.speakers[sid].meta = _merge_meta(
                "speaker_meta", sid, result.speakers[sid].meta, spk.meta, log
            )
        else:
            result.speakers[sid] = Speaker(id=sid, meta=copy.deepcopy(spk.meta))

    for cid, convo in a.conversations.items():
        result.conversations[cid] = Conversation(
            id=cid, utterance_ids=list(convo.utterance_ids), meta=copy.deepcopy(convo.meta)
        )
    for cid, convo in b.conversations.items():
        if cid in result.conversations:
            target = result.conversations[cid]
            target.meta = _merge_meta("conversation_meta", cid, target.meta, convo.meta, log)
            known = set(target.utterance_ids)
            target.utterance_ids.extend(u for u in convo.utterance_ids if u not in known)
        else:
            result.conversations[cid] = Conversation(
                id=cid, utterance_ids=list(convo.utterance_ids), meta=copy.deepcopy(convo.meta)
            )

    for uid, utt in a.utterances.items():
        result.utterances[uid] = copy.deepcopy(utt)
    for uid, utt in b.utterances.items():
        existing = result.utterances.get(uid)
        if existing is None:
            result.utterances[uid] = copy.deepcopy(utt)
            continue
        structural = ("speaker_id", "conversation_id", "reply_to", "timestamp", "text")
        for fname in structural:
            if getattr(existing, fname) != getattr(utt, fname):
                raise IrreconcilableCollisionError(
                    f"utterance {uid!r} differs in {fname} between the merged corpora"
                )
        existing.meta = _merge_meta("utterance_meta", uid, existing.meta, utt.meta, log)

    result.merge_log = log
    report = check_integrity(result)
    if not report.ok:
        raise IntegrityViolationError(
            "merge produced an invalid corpus", violations=report.violations
        )
    return result


def import_tabular(path: str | Path, mapping: ImportMapping) -> Corpus:
    """Build a corpus from a delimited file with a header row.

    Each row becomes one utterance. Without a reply_to mapping every row is
    its own conversation root. Quoting follows RFC 4180 conventions.
    """
    source = Path(path)
    if not source.is_file():
        raise MissingFileError(f"no such file: {source}")

    utterances: list[Utterance] = []
    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=mapping.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRecordError("empty file: no header row") from None
        index: dict[str, int] = {}
        for field_name, column in mapping.column_for.items():
            if column not in header:
                raise MissingColumnError(f"column {column!r} (for {field_name}) not in header")
            index[field_name] = header.index(column)
        meta_index: dict[str, int] = {}
        for column in mapping.meta_columns:
            if column not in header:
                raise MissingColumnError(f"meta column {column!r} not in header")
            meta_index[column] = header.index(column)

        for row in reader:
            line_number = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRecordError(
                    f"line {line_number}: expected {len(header)} fields, got {len(row)}",
                    line_number=line_number,
                )
            uid = row[index["id"]]
            if not uid:
                raise MalformedRecordError(f"line {line_number}: empty id cell",
                                           line_number=line_number)
            reply_to: Optional[str] = None
            if "reply_to" in index and row[index["reply_to"]]:
                reply_to = row[index["reply_to"]]
            timestamp: Optional[int] = None
            if "timestamp" in index and row[index["timestamp"]]:
                try:
                    timestamp = int(row[index["timestamp"]])
                except ValueError:
                    raise MalformedRecordError(
                        f"line {line_number}: timestamp is not an integer",
                        line_number=line_number,
                    ) from None
            meta = {column: row[pos] for column, pos in meta_index.items()}
            utterances.append(
                Utterance(
                    id=uid,
                    speaker_id=row[index["speaker_id"]],
                    conversation_id=row[index["conversation_id"]],
                    text=row[index["text"]],
                    reply_to=reply_to,
                    timestamp=timestamp,
                    meta=meta,
                )
            )
    return build_corpus(utterances)


def export_tabular(corpus: Corpus, path: str | Path, delimiter: str = ",",
                   meta_columns: Optional[list[str]] = None) -> None:
    """Write utterances as one delimited row each; inverse of import_tabular
    under the identity mapping (meta columns export as strings).
    """
    meta_columns = meta_columns or []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(list(TABULAR_FIELDS) + meta_columns)
        for utt in corpus.utterances.values():
            row = [
                utt.id,
                utt.speaker_id,
                utt.conversation_id,
                utt.reply_to if utt.reply_to is not None else "",
                str(utt.timestamp) if utt.timestamp is not None else "",
                utt.text,
            ]
            row.extend(str(utt.meta.get(col, "")) for col in meta_columns)
            writer.writerow(row)


def identity_mapping(delimiter: str = ",", with_optional: bool = True) -> ImportMapping:
    """Mapping matching export_tabular's header, for lossless re-import."""
    fields = TABULAR_FIELDS if with_optional else MANDATORY_TABULAR_FIELDS
    return ImportMapping(column_for={name: name for name in fields}, delimiter=delimiter)

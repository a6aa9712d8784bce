"""Corpora, evaluation sets, origin provenance, and rating files.

A corpus is an ordered list of segments; position ``i`` in every parallel
stream refers to the same item, so blank lines are legal segments and are
preserved (alignment beats hygiene).

Every segment carries an origin tag saying whether the underlying sentence
was authored in the source language (and forward-translated) or in the
target language (and translated back).  Joint test sets concatenate one half
of each kind; keeping the tag per segment makes the joint set first-class
and lets the halves be recovered by filtering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import AlignmentError, ConfigError, FormatError


class Origin(str, Enum):
    SOURCE_ORIGINAL = "source-original"
    TARGET_ORIGINAL = "target-original"
    UNKNOWN = "unknown"

    def swapped(self) -> "Origin":
        if self is Origin.SOURCE_ORIGINAL:
            return Origin.TARGET_ORIGINAL
        if self is Origin.TARGET_ORIGINAL:
            return Origin.SOURCE_ORIGINAL
        return Origin.UNKNOWN


@dataclass(frozen=True)
class Segment:
    id: int
    text: str
    origin: Origin = Origin.UNKNOWN

    def __post_init__(self) -> None:
        if "\n" in self.text or "\r" in self.text:
            raise FormatError(f"segment {self.id}: text contains a line break")


@dataclass(frozen=True)
class Corpus:
    segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        for i, seg in enumerate(self.segments):
            if seg.id != i:
                raise FormatError(f"segment ids must be dense 0..N-1; position {i} has id {seg.id}")

    @classmethod
    def from_texts(
        cls, texts: Iterable[str], origin: Origin | Sequence[Origin] = Origin.UNKNOWN
    ) -> "Corpus":
        texts = list(texts)
        if isinstance(origin, Origin):
            origins: Sequence[Origin] = [origin] * len(texts)
        else:
            origins = list(origin)
            if len(origins) != len(texts):
                raise AlignmentError(
                    f"{len(origins)} origin tags for {len(texts)} segments"
                )
        return cls(tuple(Segment(i, t, o) for i, (t, o) in enumerate(zip(texts, origins))))

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def __getitem__(self, idx: int) -> Segment:
        return self.segments[idx]

    @property
    def texts(self) -> list[str]:
        return [seg.text for seg in self.segments]

    @property
    def origins(self) -> list[Origin]:
        return [seg.origin for seg in self.segments]


def _read_lines(path: str | Path) -> list[str]:
    """UTF-8 lines of an LF-terminated file; decode errors cite the line number."""
    data = Path(path).read_bytes()
    if not data:
        return []
    if data.endswith(b"\n"):
        data = data[:-1]
    lines = []
    for lineno, raw in enumerate(data.split(b"\n"), start=1):
        if raw.endswith(b"\r"):  # tolerate CRLF input
            raw = raw[:-1]
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: line {lineno}: invalid UTF-8 ({exc.reason})") from exc
    return lines


def load_plaintext(path: str | Path, origin: Origin = Origin.UNKNOWN) -> Corpus:
    """One segment per line.  An empty file is an empty corpus, not an error."""
    return Corpus.from_texts(_read_lines(path), origin)


def dumps_plaintext(corpus: Corpus) -> str:
    return "".join(seg.text + "\n" for seg in corpus)


def emit_plaintext(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dumps_plaintext(corpus), encoding="utf-8")


def load_origins(path: str | Path) -> list[Origin]:
    tags = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        try:
            tags.append(Origin(line.strip()))
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: unknown origin tag {line.strip()!r}") from exc
    return tags


def emit_origins(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text("".join(seg.origin.value + "\n" for seg in corpus), encoding="utf-8")


@dataclass(frozen=True)
class EvalSet:
    """Aligned sources plus one or more named reference corpora."""

    name: str
    sources: Corpus
    reference_sets: dict[str, Corpus]

    def __post_init__(self) -> None:
        if not self.reference_sets:
            raise ConfigError(f"eval set {self.name!r} has no reference sets")
        for ref_name, refs in self.reference_sets.items():
            if len(refs) != len(self.sources):
                raise AlignmentError(
                    f"eval set {self.name!r}: reference set {ref_name!r} has "
                    f"{len(refs)} segments, sources have {len(self.sources)}"
                )

    def __len__(self) -> int:
        return len(self.sources)


def swap_direction(source: Corpus, target: Corpus) -> tuple[Corpus, Corpus]:
    """Exchange source and target streams, flipping origin tags."""
    if len(source) != len(target):
        raise AlignmentError(f"source has {len(source)} segments, target has {len(target)}")
    new_source = Corpus.from_texts(target.texts, [s.origin.swapped() for s in target])
    new_target = Corpus.from_texts(source.texts, [s.origin.swapped() for s in source])
    return new_source, new_target


def _retag(corpus: Corpus, origin: Origin) -> list[Origin]:
    return [origin] * len(corpus)


def assemble_joint(set_fwd: EvalSet, set_rev_swapped: EvalSet, name: str | None = None) -> EvalSet:
    """Concatenate a forward-translated set with an already-swapped reverse set.

    Forward segments are tagged source-original, swapped-reverse segments
    target-original.  Both inputs must offer the same reference-set names.
    """
    fwd_names = set(set_fwd.reference_sets)
    rev_names = set(set_rev_swapped.reference_sets)
    if fwd_names != rev_names:
        raise ConfigError(
            "reference-set names differ between inputs: "
            f"{sorted(fwd_names)} vs {sorted(rev_names)}"
        )
    sources = Corpus.from_texts(
        set_fwd.sources.texts + set_rev_swapped.sources.texts,
        _retag(set_fwd.sources, Origin.SOURCE_ORIGINAL)
        + _retag(set_rev_swapped.sources, Origin.TARGET_ORIGINAL),
    )
    reference_sets = {}
    for ref_name in set_fwd.reference_sets:
        fwd_refs = set_fwd.reference_sets[ref_name]
        rev_refs = set_rev_swapped.reference_sets[ref_name]
        reference_sets[ref_name] = Corpus.from_texts(
            fwd_refs.texts + rev_refs.texts,
            _retag(fwd_refs, Origin.SOURCE_ORIGINAL) + _retag(rev_refs, Origin.TARGET_ORIGINAL),
        )
    return EvalSet(
        name=name or f"{set_fwd.name}+{set_rev_swapped.name}",
        sources=sources,
        reference_sets=reference_sets,
    )


def filter_by_origin(eval_set: EvalSet, origin: Origin, name: str | None = None) -> EvalSet:
    """Subset of segments with the given origin, ids re-densified, refs in lockstep."""
    keep = [i for i, seg in enumerate(eval_set.sources) if seg.origin == origin]
    sources = Corpus.from_texts(
        [eval_set.sources[i].text for i in keep], [eval_set.sources[i].origin for i in keep]
    )
    reference_sets = {
        ref_name: Corpus.from_texts(
            [refs[i].text for i in keep], [refs[i].origin for i in keep]
        )
        for ref_name, refs in eval_set.reference_sets.items()
    }
    return EvalSet(name=name or eval_set.name, sources=sources, reference_sets=reference_sets)


RATING_KINDS = ("quality", "fluency")
FLUENCY_PREFERENCES = ("A", "B", "equal")
QUALITY_MIN, QUALITY_MAX = 0, 6
RATINGS_HEADER = ("item_id", "kind", "system_or_preference", "score")


@dataclass(frozen=True)
class RatingRecord:
    """One human judgment: a 0..6 quality rating or an A/B/equal fluency preference."""

    item_id: int
    kind: str
    system: str | None = None
    quality_score: int | None = None
    preference: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "quality":
            if self.system is None or self.quality_score is None or self.preference is not None:
                raise FormatError(f"item {self.item_id}: quality record needs system and score only")
            if not QUALITY_MIN <= self.quality_score <= QUALITY_MAX:
                raise FormatError(
                    f"item {self.item_id}: quality score {self.quality_score} outside "
                    f"{QUALITY_MIN}..{QUALITY_MAX}"
                )
        elif self.kind == "fluency":
            if self.preference is None or self.system is not None or self.quality_score is not None:
                raise FormatError(f"item {self.item_id}: fluency record needs a preference only")
            if self.preference not in FLUENCY_PREFERENCES:
                raise FormatError(
                    f"item {self.item_id}: preference {self.preference!r} not in {FLUENCY_PREFERENCES}"
                )
        else:
            raise FormatError(f"item {self.item_id}: unknown rating kind {self.kind!r}")


def load_ratings(path: str | Path) -> list[RatingRecord]:
    """Rating records from a TSV file with the standard header row."""
    lines = _read_lines(path)
    header = "\t".join(RATINGS_HEADER)
    if not lines or lines[0] != header:
        raise FormatError(f"{path}: expected header {header!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        try:
            if len(fields) < 3:
                raise FormatError("expected at least 3 tab-separated fields")
            item_id = int(fields[0])
            kind = fields[1]
            if kind == "quality":
                if len(fields) != 4:
                    raise FormatError("quality rows need 4 fields")
                records.append(
                    RatingRecord(item_id, "quality", system=fields[2], quality_score=int(fields[3]))
                )
            elif kind == "fluency":
                if len(fields) == 4 and fields[3] != "":
                    raise FormatError("fluency rows carry no score")
                if len(fields) > 4:
                    raise FormatError("too many fields")
                records.append(RatingRecord(item_id, "fluency", preference=fields[2]))
            else:
                raise FormatError(f"unknown rating kind {kind!r}")
        except (ValueError, FormatError) as exc:
            raise FormatError(f"{path}: row {lineno}: {exc}") from exc
    return records


def emit_ratings(records: Sequence[RatingRecord], path: str | Path) -> None:
    out = ["\t".join(RATINGS_HEADER)]
    for rec in records:
        if rec.kind == "quality":
            out.append(f"{rec.item_id}\tquality\t{rec.system}\t{rec.quality_score}")
        else:
            out.append(f"{rec.item_id}\tfluency\t{rec.preference}")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def load_evalset_manifest(path: str | Path) -> EvalSet:
    """An eval set described by a small JSON manifest.

    Keys: ``name`` (default: file stem), ``sources`` (path), ``references``
    (name -> path, at least one), optional ``origin`` (single tag) or
    ``origins`` (path to a tag-per-line file).  Relative paths resolve
    against the manifest's directory.
    """
    path = Path(path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable manifest: {exc}") from exc
    if not isinstance(cfg, dict) or "sources" not in cfg or "references" not in cfg:
        raise FormatError(f"{path}: manifest needs 'sources' and 'references' keys")
    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    origin = Origin(cfg.get("origin", "unknown"))
    sources = load_plaintext(resolve(cfg["sources"]), origin)
    if "origins" in cfg:
        tags = load_origins(resolve(cfg["origins"]))
        sources = Corpus.from_texts(sources.texts, tags)
    references = {
        ref_name: load_plaintext(resolve(ref_path), origin)
        for ref_name, ref_path in cfg["references"].items()
    }
    return EvalSet(name=cfg.get("name", path.stem), sources=sources, reference_sets=references)

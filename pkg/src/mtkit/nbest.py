"""N-best lists in the Moses-style wire format.

One entry per line::

    <segment_id> ||| <hypothesis text> ||| <f1> <f2> ... <fK> ||| <model_score>

Segment ids are 0-based, contiguous, and non-decreasing; the feature width K
is constant across a file.  Emission renders floats with ``repr``, so
``emit(load(x))`` is byte-identical for files in that canonical form and
``emit . load`` is idempotent for any well-formed file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import _read_lines
from .errors import FormatError

_DELIM = " ||| "


@dataclass(frozen=True)
class NBestEntry:
    segment_id: int
    rank: int
    text: str
    features: tuple[float, ...]
    model_score: float


def load_nbest(
    path: str | Path, expected_feature_count: int | None = None
) -> list[list[NBestEntry]]:
    """Parse a file into per-segment entry lists, beam order preserved."""
    lists: list[list[NBestEntry]] = []
    current: list[NBestEntry] = []
    current_id = 0
    width = expected_feature_count

    for lineno, line in enumerate(_read_lines(path), start=1):
        fields = line.split(_DELIM)
        if len(fields) != 4:
            raise FormatError(f"{path}: line {lineno}: expected 4 '|||'-separated fields")
        try:
            segment_id = int(fields[0])
            features = tuple(float(x) for x in fields[2].split())
            model_score = float(fields[3])
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc

        if width is None:
            width = len(features)
        if len(features) != width:
            raise FormatError(
                f"{path}: segment {segment_id}: expected {width} features, found {len(features)}"
            )

        if segment_id == current_id + 1 and current:
            lists.append(current)
            current = []
            current_id = segment_id
        if segment_id != current_id:
            raise FormatError(
                f"{path}: line {lineno}: segment ids must be 0-based, contiguous and "
                f"non-decreasing; saw {segment_id} after "
                f"{current_id if (current or lists) else 'start of file'}"
            )
        current.append(
            NBestEntry(segment_id, rank=len(current), text=fields[1], features=features,
                       model_score=model_score)
        )
    if current:
        lists.append(current)
    return lists


def dumps_nbest(lists: Sequence[Sequence[NBestEntry]]) -> str:
    out = []
    for entries in lists:
        for entry in entries:
            feats = " ".join(repr(float(f)) for f in entry.features)
            out.append(
                f"{entry.segment_id}{_DELIM}{entry.text}{_DELIM}{feats}{_DELIM}"
                f"{repr(float(entry.model_score))}\n"
            )
    return "".join(out)


def emit_nbest(lists: Sequence[Sequence[NBestEntry]], path: str | Path) -> None:
    Path(path).write_text(dumps_nbest(lists), encoding="utf-8")


def feature_width(lists: Sequence[Sequence[NBestEntry]]) -> int:
    for entries in lists:
        for entry in entries:
            return len(entry.features)
    raise FormatError("empty n-best data has no feature width")


def load_weights(path: str | Path) -> tuple[float, ...]:
    """Whitespace-separated floats (conventionally one line)."""
    try:
        values = tuple(float(x) for x in Path(path).read_text(encoding="utf-8").split())
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not values:
        raise FormatError(f"{path}: empty weights file")
    return values


def save_weights(weights: Sequence[float], path: str | Path) -> None:
    Path(path).write_text(" ".join(repr(float(w)) for w in weights) + "\n", encoding="utf-8")

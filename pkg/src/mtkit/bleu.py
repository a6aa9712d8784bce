"""Corpus and sentence BLEU over additive sufficient statistics.

One code path serves scoring against standard and against paraphrased
reference sets; the latter is just a different reference corpus, labelled by
the caller.  Per-sentence statistics are plain integer counts, so corpus
scores can be recomputed from any partition of the data (the property the
MERT sweep and the randomization test rely on).

Numerical conventions match the sacreBLEU/mteval lineage exactly:

* clipped n-gram matches against the per-n-gram maximum over references,
* effective reference length = closest to the hypothesis length, ties going
  to the shorter reference,
* ``exp`` smoothing: the k-th zero-match order contributes a precision of
  ``100 / (2^k * total)``,
* brevity penalty ``exp(1 - ref_len / hyp_len)`` when the hypothesis side is
  shorter.

A hypothesis corpus with zero tokens overall scores 0.0 with the brevity
penalty pinned to 1.0 and ``degenerate_hypothesis`` set.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .errors import AlignmentError, ConfigError
from .tokenizers import TokenizerConfig, tokenize
from .version import TOOLKIT, VERSION

NGRAM_ORDER = 4

# Stand-in for log(0), matching the reference scorer.
_LOG_FLOOR = -9999999999

_T = TypeVar("_T")
_R = TypeVar("_R")


def _map(fn: Callable[[_T], _R], items: Sequence[_T], threads: int | None) -> list[_R]:
    # Ordered map, so reductions are identical at any worker count.
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


@dataclass(frozen=True)
class BleuConfig:
    """Metric settings: tokenization scheme/case, smoothing, language label."""

    tokenizer: TokenizerConfig = TokenizerConfig()
    smooth: str = "exp"
    lang: str | None = "ende"

    def __post_init__(self) -> None:
        if self.smooth != "exp":
            raise ConfigError(f"unsupported smoothing {self.smooth!r}; only 'exp' is implemented")


def signature(config: BleuConfig, numrefs: int, set_name: str | None = None) -> str:
    """Plus-delimited signature identifying how a score was produced."""
    parts = ["BLEU", f"case.{config.tokenizer.case_label}"]
    if config.lang:
        parts.append(f"lang.{config.lang}")
    parts.append(f"numrefs.{numrefs}")
    parts.append(f"smooth.{config.smooth}")
    if set_name:
        parts.append(set_name)
    parts.append(f"tok.{config.tokenizer.scheme}")
    parts.append(f"version.{TOOLKIT}-{VERSION}")
    return "+".join(parts)


@dataclass(frozen=True)
class BleuStats:
    """Additive sufficient statistics of BLEU for a sentence or a corpus."""

    match: tuple[int, int, int, int]
    total: tuple[int, int, int, int]
    hyp_len: int
    ref_len: int

    def __post_init__(self) -> None:
        for n in range(NGRAM_ORDER):
            if not 0 <= self.match[n] <= self.total[n]:
                raise ValueError(f"match[{n + 1}]={self.match[n]} outside 0..total={self.total[n]}")
        if self.hyp_len < 0 or self.ref_len < 0:
            raise ValueError("negative length")

    @classmethod
    def zero(cls) -> "BleuStats":
        return cls((0, 0, 0, 0), (0, 0, 0, 0), 0, 0)

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(a + b for a, b in zip(self.match, other.match)),
            tuple(a + b for a, b in zip(self.total, other.total)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    def as_row(self) -> np.ndarray:
        """Stats as an int64 row [m1..m4, t1..t4, hyp_len, ref_len]."""
        return np.array(self.match + self.total + (self.hyp_len, self.ref_len), dtype=np.int64)

    @classmethod
    def from_row(cls, row: Sequence[int]) -> "BleuStats":
        rown = [int(x) for x in row]
        return cls(tuple(rown[0:4]), tuple(rown[4:8]), rown[8], rown[9])


@dataclass(frozen=True)
class BleuScore:
    """A computed corpus score plus everything needed to report it."""

    score: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    signature: str
    stats: BleuStats
    degenerate_hypothesis: bool = False

    def summary(self) -> str:
        precisions = "/".join(f"{p:.1f}" for p in self.precisions)
        ratio = self.hyp_len / self.ref_len if self.ref_len else float("inf")
        return (
            f"BLEU = {self.score:.1f} {precisions} "
            f"(BP = {self.brevity_penalty:.3f} ratio = {ratio:.3f} "
            f"hyp_len = {self.hyp_len} ref_len = {self.ref_len}) {self.signature}"
        )


def ngram_counts(tokens: Sequence[str], max_order: int = NGRAM_ORDER) -> Counter:
    """Counts of all n-grams (as token tuples) for 1 <= n <= max_order."""
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        counts.update(zip(*(tokens[i:] for i in range(n))))
    return counts


def sentence_stats(
    hyp_tokens: Sequence[str], ref_token_lists: Sequence[Sequence[str]]
) -> BleuStats:
    """Clipped-match statistics of one hypothesis against one or more references."""
    if not ref_token_lists:
        raise ConfigError("at least one reference is required")
    hyp_len = len(hyp_tokens)

    closest_diff: int | None = None
    closest_len = 0
    max_ref_counts: Counter = Counter()
    for ref in ref_token_lists:
        ref_len = len(ref)
        diff = abs(hyp_len - ref_len)
        if closest_diff is None or diff < closest_diff:
            closest_diff = diff
            closest_len = ref_len
        elif diff == closest_diff and ref_len < closest_len:
            closest_len = ref_len
        for gram, count in ngram_counts(ref).items():
            if count > max_ref_counts[gram]:
                max_ref_counts[gram] = count

    match = [0] * NGRAM_ORDER
    total = [0] * NGRAM_ORDER
    for gram, count in ngram_counts(hyp_tokens).items():
        n = len(gram)
        total[n - 1] += count
        clip = max_ref_counts.get(gram, 0)
        if clip:
            match[n - 1] += min(count, clip)
    return BleuStats(tuple(match), tuple(total), hyp_len, closest_len)


def _score_components(
    match: Sequence[int], total: Sequence[int], hyp_len: int, ref_len: int
) -> tuple[list[float], float, float, bool]:
    """(precisions, brevity penalty, score, degenerate flag) from summed stats."""
    precisions = [0.0] * NGRAM_ORDER
    smooth = 1.0
    for n in range(NGRAM_ORDER):
        if total[n] == 0:
            break
        if match[n] == 0:
            smooth *= 2
            precisions[n] = 100.0 / (smooth * total[n])
        else:
            precisions[n] = 100.0 * match[n] / total[n]
    if hyp_len == 0:
        return precisions, 1.0, 0.0, True
    brevity_penalty = 1.0
    if hyp_len < ref_len:
        brevity_penalty = math.exp(1 - ref_len / hyp_len)
    log_sum = sum((math.log(p) if p > 0.0 else _LOG_FLOOR) for p in precisions)
    score = brevity_penalty * math.exp(log_sum / NGRAM_ORDER)
    return precisions, brevity_penalty, score, False


def score_value(match: Sequence[int], total: Sequence[int], hyp_len: int, ref_len: int) -> float:
    """Just the BLEU score for summed stats (the MERT/sweep hot path)."""
    return _score_components(match, total, hyp_len, ref_len)[2]


def score_value_from_row(row: Sequence[int]) -> float:
    return score_value(row[0:4], row[4:8], int(row[8]), int(row[9]))


def score_from_stats(
    stats: BleuStats,
    config: BleuConfig = BleuConfig(),
    numrefs: int = 1,
    set_name: str | None = None,
) -> BleuScore:
    precisions, brevity_penalty, score, degenerate = _score_components(
        stats.match, stats.total, stats.hyp_len, stats.ref_len
    )
    return BleuScore(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=brevity_penalty,
        hyp_len=stats.hyp_len,
        ref_len=stats.ref_len,
        signature=signature(config, numrefs, set_name),
        stats=stats,
        degenerate_hypothesis=degenerate,
    )


def _check_aligned(
    hypotheses: Sequence[str], reference_sets: Sequence[Sequence[str]]
) -> None:
    if not reference_sets:
        raise ConfigError("at least one reference corpus is required")
    for idx, refs in enumerate(reference_sets):
        if len(refs) != len(hypotheses):
            raise AlignmentError(
                f"reference corpus {idx} has {len(refs)} segments, hypotheses have {len(hypotheses)}"
            )


def sentence_stats_rows(
    hypotheses: Sequence[str],
    reference_sets: Sequence[Sequence[str]],
    config: BleuConfig = BleuConfig(),
    threads: int | None = None,
) -> np.ndarray:
    """Per-segment stats rows, shape (N, 10); the cacheable unit for resampling."""
    _check_aligned(hypotheses, reference_sets)
    tok = config.tokenizer

    def row(i: int) -> np.ndarray:
        hyp_tokens = tokenize(hypotheses[i].rstrip(), tok)
        ref_tokens = [tokenize(refs[i].rstrip(), tok) for refs in reference_sets]
        return sentence_stats(hyp_tokens, ref_tokens).as_row()

    rows = _map(row, range(len(hypotheses)), threads)
    if not rows:
        return np.zeros((0, 10), dtype=np.int64)
    return np.stack(rows)


def corpus_stats(
    hypotheses: Sequence[str],
    reference_sets: Sequence[Sequence[str]],
    config: BleuConfig = BleuConfig(),
    threads: int | None = None,
) -> BleuStats:
    rows = sentence_stats_rows(hypotheses, reference_sets, config, threads)
    return BleuStats.from_row(rows.sum(axis=0)) if len(rows) else BleuStats.zero()


def corpus_bleu(
    hypotheses: Sequence[str],
    reference_sets: Sequence[Sequence[str]],
    config: BleuConfig = BleuConfig(),
    set_name: str | None = None,
    threads: int | None = None,
) -> BleuScore:
    """Corpus BLEU of a hypothesis corpus against one or more reference corpora."""
    stats = corpus_stats(hypotheses, reference_sets, config, threads)
    return score_from_stats(stats, config, numrefs=len(reference_sets), set_name=set_name)


def scores_from_stat_rows(rows: np.ndarray) -> np.ndarray:
    """Vectorized scores for an (N, 10) array of *summed* stats rows.

    Mirrors :func:`score_value` but may differ from it in the last ulp
    (libm vs numpy rounding); callers that need exact agreement re-score
    their argmax candidates with the scalar function.
    """
    rows = np.asarray(rows, dtype=np.float64)
    match = rows[:, 0:4]
    total = rows[:, 4:8]
    hyp_len = rows[:, 8]
    ref_len = rows[:, 9]

    valid = np.logical_and.accumulate(total > 0, axis=1)
    zero = (match == 0) & valid
    smooth = np.exp2(np.cumsum(zero, axis=1))
    denom = np.where(valid, total, 1.0)
    precision = np.where(
        valid, np.where(zero, 100.0 / (smooth * denom), 100.0 * match / denom), 0.0
    )
    log_precision = np.where(
        precision > 0.0, np.log(np.where(precision > 0.0, precision, 1.0)), float(_LOG_FLOOR)
    )
    safe_hyp = np.maximum(hyp_len, 1.0)
    brevity = np.where(hyp_len >= ref_len, 1.0, np.exp(1.0 - ref_len / safe_hyp))
    with np.errstate(under="ignore"):
        score = brevity * np.exp(log_precision.sum(axis=1) / NGRAM_ORDER)
    return np.where(hyp_len > 0, score, 0.0)

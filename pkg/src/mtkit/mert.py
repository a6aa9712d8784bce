"""Minimum Error Rate Training for linear n-best rerankers.

For a weight vector ``w`` and a search direction ``d``, the combined score of
hypothesis ``h`` at step size ``gamma`` is the line

    score(gamma) = (w + gamma * d) . f(h) = w.f(h) + gamma * (d.f(h)),

so each segment's 1-best as a function of gamma is the upper envelope of its
score lines, and corpus BLEU is piecewise constant in gamma.  A line search
therefore needs only: build one envelope per segment, merge all breakpoints,
sweep the intervals while applying integer stat deltas, and score each
interval from summed statistics.  Per-entry sentence statistics against the
tuning references are precomputed once, which makes every sweep pure integer
bookkeeping plus one vectorized scoring pass.

The optimizer runs restarts of greedy coordinate/random-direction descent.
Updates are accepted only when corpus BLEU improves by more than the
configured epsilon, so the per-iteration trace is non-decreasing within a
restart by construction.  Everything is deterministic given the seed and
independent of worker count.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bleu
from .errors import AlignmentError, ConfigError, DataError
from .nbest import NBestEntry
from .rerank import WeightVector
from .tokenizers import tokenize

DIRECTION_MODES = ("axes", "axes+random")

# Candidate intervals within this relative margin of the vectorized maximum
# are re-scored with the scalar metric before the final argmax.
_CANDIDATE_MARGIN = 1e-9


@dataclass(frozen=True)
class MertConfig:
    rng_seed: int
    num_restarts: int = 20
    directions: str = "axes+random"
    num_random_directions: int = 8
    convergence_epsilon: float = 1e-4
    max_iterations: int = 30

    def __post_init__(self) -> None:
        if self.num_restarts < 1:
            raise ConfigError("num_restarts must be >= 1")
        if self.directions not in DIRECTION_MODES:
            raise ConfigError(f"directions must be one of {DIRECTION_MODES}")
        if self.convergence_epsilon <= 0:
            raise ConfigError("convergence_epsilon must be > 0")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed must be a non-negative integer")


@dataclass(frozen=True)
class ScoreLine:
    slope: float
    intercept: float
    hyp_index: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise ConfigError("score lines must have finite slope and intercept")


@dataclass(frozen=True)
class Envelope:
    """Upper envelope of score lines: m breakpoints delimiting m+1 intervals."""

    breakpoints: tuple[float, ...]
    winners: tuple[int, ...]

    def winner_at(self, gamma: float) -> int:
        """Winning hypothesis index at gamma; exact breakpoint hits tie-break low."""
        i = bisect_left(self.breakpoints, gamma)
        if i < len(self.breakpoints) and self.breakpoints[i] == gamma:
            return min(self.winners[i], self.winners[i + 1])
        return self.winners[i]


def _envelope_arrays(slopes: Sequence[float], intercepts: Sequence[float]) -> tuple[list[float], list[int]]:
    """(breakpoints, winners) of the upper envelope of lines (slope, intercept)."""
    # Parallel lines: only the highest can win; exact duplicates keep the
    # smallest index so ties resolve like a brute-force argmax.
    best_by_slope: dict[float, int] = {}
    for idx, (a, b) in enumerate(zip(slopes, intercepts)):
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ConfigError("score lines must have finite slope and intercept")
        keep = best_by_slope.get(a)
        if keep is None or b > intercepts[keep]:
            best_by_slope[a] = idx
    order = sorted(best_by_slope.values(), key=lambda i: slopes[i])

    hull: list[int] = []
    starts: list[float] = []
    for idx in order:
        start = -math.inf
        while hull:
            top = hull[-1]
            # slopes strictly increase along `order`, so the division is safe
            x = (intercepts[top] - intercepts[idx]) / (slopes[idx] - slopes[top])
            if x <= starts[-1]:
                hull.pop()
                starts.pop()
                continue
            start = x
            break
        hull.append(idx)
        starts.append(start)
    return starts[1:], hull


def upper_envelope(lines: Sequence[ScoreLine]) -> Envelope:
    """Exact upper envelope; collinear duplicates collapse to the smallest index."""
    if not lines:
        raise DataError("cannot build an envelope from zero lines")
    slopes = [ln.slope for ln in lines]
    intercepts = [ln.intercept for ln in lines]
    hyp_index = [ln.hyp_index for ln in lines]
    breaks, winner_positions = _envelope_arrays(slopes, intercepts)
    return Envelope(tuple(breaks), tuple(hyp_index[i] for i in winner_positions))


@dataclass(frozen=True)
class LineSearchResult:
    gamma: float
    score: float


def line_search(
    features: Sequence[np.ndarray],
    stats: Sequence[np.ndarray],
    weights: np.ndarray,
    direction: np.ndarray,
) -> LineSearchResult:
    """Best step size along ``direction`` and the corpus BLEU reached there.

    ``features[s]`` is the (n_hyps x K) feature matrix of segment ``s`` and
    ``stats[s]`` the matching (n_hyps x 10) per-hypothesis stat rows against
    the tuning references.  The returned gamma is the midpoint of the best
    interval (finite endpoint +-1 for unbounded ones); among intervals with
    exactly equal BLEU the one with the smallest |gamma| wins, then the
    smaller gamma.
    """
    base = np.zeros(10, dtype=np.int64)
    event_gammas: list[float] = []
    event_rows: list[np.ndarray] = []
    for mat, stat_rows in zip(features, stats):
        slopes = mat @ direction
        inters = mat @ weights
        breaks, winners = _envelope_arrays(slopes.tolist(), inters.tolist())
        base += stat_rows[winners[0]]
        for g, prev, nxt in zip(breaks, winners, winners[1:]):
            if not math.isfinite(g):  # crossing beyond float range: never realized
                break
            event_gammas.append(g)
            event_rows.append(stat_rows[nxt] - stat_rows[prev])

    if not event_gammas:
        return LineSearchResult(0.0, bleu.score_value_from_row(base))

    gammas = np.array(event_gammas)
    order = np.argsort(gammas, kind="stable")
    gammas = gammas[order]
    deltas = np.stack(event_rows)[order]

    # interval i spans (left[i], right[i]); stats are cumulative over events
    interval_stats = np.vstack([base, base + np.cumsum(deltas, axis=0)])
    left = np.concatenate([[-np.inf], gammas])
    right = np.concatenate([gammas, [np.inf]])
    widths_ok = left < right  # zero-width intervals from simultaneous events

    midpoints = np.empty(len(interval_stats))
    midpoints[0] = gammas[0] - 1.0
    midpoints[-1] = gammas[-1] + 1.0
    if len(interval_stats) > 2:
        midpoints[1:-1] = (left[1:-1] + right[1:-1]) / 2.0

    vec_scores = bleu.scores_from_stat_rows(interval_stats)
    vec_scores[~widths_ok] = -np.inf
    best_vec = vec_scores.max()
    margin = max(_CANDIDATE_MARGIN, abs(best_vec) * _CANDIDATE_MARGIN)
    candidates = np.flatnonzero(vec_scores >= best_vec - margin)

    best_idx = -1
    best_key: tuple[float, float, float] | None = None
    for i in candidates:
        exact = bleu.score_value_from_row(interval_stats[i])
        key = (-exact, abs(midpoints[i]), midpoints[i])
        if best_key is None or key < best_key:
            best_key = key
            best_idx = int(i)
    return LineSearchResult(float(midpoints[best_idx]), -best_key[0])


def entry_stats(
    lists: Sequence[Sequence[NBestEntry]],
    reference_sets: Sequence[Sequence[str]],
    config: bleu.BleuConfig = bleu.BleuConfig(),
    threads: int | None = None,
) -> list[np.ndarray]:
    """Per-entry sentence stats vs the tuning references, one (n_hyps x 10) array per segment."""
    if not reference_sets:
        raise ConfigError("at least one tuning reference corpus is required")
    for idx, refs in enumerate(reference_sets):
        if len(refs) != len(lists):
            raise AlignmentError(
                f"reference corpus {idx} has {len(refs)} segments, n-best data has {len(lists)}"
            )
    tok = config.tokenizer

    def segment_rows(s: int) -> np.ndarray:
        ref_tokens = [tokenize(refs[s].rstrip(), tok) for refs in reference_sets]
        rows = [
            bleu.sentence_stats(tokenize(e.text.rstrip(), tok), ref_tokens).as_row()
            for e in lists[s]
        ]
        return np.stack(rows)

    return bleu._map(segment_rows, range(len(lists)), threads)


def feature_matrices(lists: Sequence[Sequence[NBestEntry]]) -> list[np.ndarray]:
    mats = []
    for s, entries in enumerate(lists):
        if not entries:
            raise DataError(f"segment {s}: empty n-best list")
        mats.append(np.array([e.features for e in entries], dtype=np.float64))
    width = {m.shape[1] for m in mats}
    if len(width) > 1:
        raise ConfigError(f"inconsistent feature widths across segments: {sorted(width)}")
    if not mats or mats[0].shape[1] == 0:
        raise ConfigError("zero-width feature vectors cannot be tuned")
    return mats


@dataclass(frozen=True)
class AcceptedMove:
    restart: int
    iteration: int
    direction: str
    gamma: float
    score: float


@dataclass(frozen=True)
class MertResult:
    weights: WeightVector
    trace: tuple[float, ...]
    final_score: float
    restart_index: int
    restart_scores: tuple[float, ...]
    moves: tuple[AcceptedMove, ...]


def _selection_rows(
    features: Sequence[np.ndarray], stats: Sequence[np.ndarray], weights: np.ndarray
) -> np.ndarray:
    total = np.zeros(10, dtype=np.int64)
    for mat, stat_rows in zip(features, stats):
        total += stat_rows[int(np.argmax(mat @ weights))]
    return total


def _l1_normalize(vector: np.ndarray) -> np.ndarray:
    norm = np.abs(vector).sum()
    if norm == 0.0:
        raise ConfigError("cannot l1-normalize an all-zero weight vector")
    return vector / norm


def optimize(
    lists: Sequence[Sequence[NBestEntry]],
    tuning_reference_sets: Sequence[Sequence[str]],
    config: MertConfig,
    metric: bleu.BleuConfig = bleu.BleuConfig(),
    threads: int | None = None,
) -> MertResult:
    """Tune reranker weights to maximize corpus BLEU on the tuning references."""
    features = feature_matrices(lists)
    stats = entry_stats(lists, tuning_reference_sets, metric, threads)
    width = features[0].shape[1]
    axes = np.eye(width)

    seeds = np.random.SeedSequence(config.rng_seed).spawn(config.num_restarts)
    best: tuple[float, int] | None = None  # (-score, restart)
    best_weights: np.ndarray | None = None
    best_trace: list[float] = []
    restart_scores: list[float] = []
    moves: list[AcceptedMove] = []

    for restart in range(config.num_restarts):
        rng = np.random.default_rng(seeds[restart])
        if restart == 0:
            w = np.full(width, 1.0 / width)
        else:
            w = rng.uniform(-1.0, 1.0, size=width)
            while not np.abs(w).sum():  # pragma: no cover - measure zero
                w = rng.uniform(-1.0, 1.0, size=width)
            w = _l1_normalize(w)

        current = bleu.score_value_from_row(_selection_rows(features, stats, w))
        trace = [current]
        for iteration in range(config.max_iterations):
            directions: list[tuple[str, np.ndarray]] = [
                (f"axis:{k}", axes[k]) for k in range(width)
            ]
            if config.directions == "axes+random":
                for j in range(config.num_random_directions):
                    vec = rng.standard_normal(width)
                    norm = np.linalg.norm(vec)
                    if norm:
                        vec = vec / norm
                    else:  # pragma: no cover - measure zero
                        vec = axes[j % width]
                    directions.append((f"rand:{j}", vec))

            improved = False
            for label, d in directions:
                found = line_search(features, stats, w, d)
                if found.score <= current + config.convergence_epsilon:
                    continue
                candidate = _l1_normalize(w + found.gamma * d)
                # re-score the normalized update so the accepted value is the
                # same number external rescoring would produce
                candidate_score = bleu.score_value_from_row(
                    _selection_rows(features, stats, candidate)
                )
                if candidate_score > current + config.convergence_epsilon:
                    w = candidate
                    current = candidate_score
                    improved = True
                    moves.append(
                        AcceptedMove(restart, iteration, label, found.gamma, candidate_score)
                    )
            trace.append(current)
            if not improved:
                break

        if any(b < a for a, b in zip(trace, trace[1:])):  # internal invariant
            raise RuntimeError("non-monotone BLEU trace within a restart")
        restart_scores.append(current)
        key = (-current, restart)
        if best is None or key < best:
            best = key
            best_weights = w
            best_trace = trace

    assert best is not None and best_weights is not None
    return MertResult(
        weights=WeightVector.l1_unit(best_weights.tolist()),
        trace=tuple(best_trace),
        final_score=-best[0],
        restart_index=best[1],
        restart_scores=tuple(restart_scores),
        moves=tuple(moves),
    )

"""Scott-Knott ranking gated by a bootstrap test and the A12 effect size.

Treatments are sorted by median and split recursively at the cut that
maximises the expected squared shift of the group means. A cut is kept only
when a pooled-shift bootstrap finds the two halves' means different *and* the
A12 effect is not small.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SMALL_EFFECT = 0.6
FAST_RATIO = 10.0  # rank-1 treatments within this factor of the quickest are flagged fast


def a12(xs, ys) -> float:
    """Probability that a value drawn from ``xs`` exceeds one from ``ys`` (ties count half)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("a12 needs two nonempty samples")
    gt = (x[:, None] > y[None, :]).sum()
    eq = (x[:, None] == y[None, :]).sum()
    return float((gt + 0.5 * eq) / (x.size * y.size))


def bootstrap_significant(xs, ys, resamples: int = 1000, confidence: float = 0.95, seed=0) -> bool:
    """Two-sided bootstrap test of a difference in means.

    Both samples are shifted onto the pooled mean (the null), resampled with
    replacement, and the share of resampled mean gaps at least as large as
    the observed one is compared against ``1 - confidence``.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("bootstrap needs two nonempty samples")
    if resamples < 100:
        raise ValueError("use at least 100 resamples")
    observed = abs(x.mean() - y.mean())
    if observed == 0:
        return False
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pooled = np.concatenate([x, y]).mean()
    x0, y0 = x - x.mean() + pooled, y - y.mean() + pooled
    bx = x0[rng.integers(0, x.size, size=(resamples, x.size))].mean(axis=1)
    by = y0[rng.integers(0, y.size, size=(resamples, y.size))].mean(axis=1)
    # small slack so rounding in the shifted means cannot count as "as extreme"
    hits = np.count_nonzero(np.abs(bx - by) >= observed * (1 - 1e-12))
    return hits / resamples < 1 - confidence


@dataclass(frozen=True)
class TreatmentSamples:
    token: str
    scores: tuple[float, ...]
    runtime_seconds: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if not self.scores:
            raise ValueError(f"{self.token}: no scores")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError(f"{self.token}: scores must be finite")

    @property
    def median(self) -> float:
        return float(np.median(self.scores))

    @property
    def iqr(self) -> float:
        q25, q75 = np.percentile(self.scores, [25, 75])
        return float(q75 - q25)


def expected_delta(groups: Sequence[TreatmentSamples], cut: int) -> float:
    """E(delta) for splitting ``groups`` before index ``cut``, weighting by measurement counts."""
    left = np.concatenate([g.scores for g in groups[:cut]])
    right = np.concatenate([g.scores for g in groups[cut:]])
    mu = np.concatenate([left, right]).mean()
    n = left.size + right.size
    return left.size / n * (left.mean() - mu) ** 2 + right.size / n * (right.mean() - mu) ** 2


def best_cut(groups: Sequence[TreatmentSamples]) -> tuple[int, float]:
    """First cut with the largest E(delta)."""
    best, best_e = 1, -np.inf
    for cut in range(1, len(groups)):
        e = expected_delta(groups, cut)
        if e > best_e * (1 + 1e-12) + 1e-300:
            best, best_e = cut, e
    return best, best_e


@dataclass(frozen=True)
class RankEntry:
    rank: int
    token: str
    median: float
    iqr: float
    fast: bool
    runtime_seconds: float
    scores: tuple[float, ...]


@dataclass(frozen=True)
class RankTable:
    entries: tuple[RankEntry, ...]
    larger_is_better: bool = False

    def ranks(self) -> dict[str, int]:
        return {e.token: e.rank for e in self.entries}

    def winners(self) -> list[str]:
        return [e.token for e in self.entries if e.rank == 1]

    def to_text(self, percent: bool = False, width: int = 20) -> str:
        """Aligned table with a quartile glyph over 0..100.

        ``percent=True`` multiplies scores by 100 (for fractions such as MRE).
        """
        scale = 100.0 if percent else 1.0
        name_w = max([len("treatment")] + [len(e.token) for e in self.entries])
        lines = [f"{'rank':>4}  {'treatment':<{name_w}}  {'median':>8}  {'IQR':>8}  {'glyph':<{width + 2}}  fast"]
        for e in self.entries:
            lines.append(
                f"{e.rank:>4}  {e.token:<{name_w}}  {e.median * scale:>8.1f}  {e.iqr * scale:>8.1f}  "
                f"{glyph(np.asarray(e.scores) * scale, width)}  {'*' if e.fast else ''}".rstrip()
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "treatment", "median", "iqr", "fast", "runtime_seconds", "scores"])
        for e in self.entries:
            w.writerow([e.rank, e.token, repr(e.median), repr(e.iqr), int(e.fast),
                        repr(e.runtime_seconds), ";".join(repr(s) for s in e.scores)])
        return buf.getvalue()

    @staticmethod
    def groups_from_csv(text: str) -> list[TreatmentSamples]:
        rows = csv.DictReader(io.StringIO(text))
        return [TreatmentSamples(r["treatment"], tuple(float(s) for s in r["scores"].split(";")),
                                 float(r["runtime_seconds"])) for r in rows]


def glyph(values, width: int = 20) -> str:
    """``[``, quartile bar over 0..100 (``-`` for 25th-75th, ``*`` at the median), ``]``.

    Values beyond the axis are pinned to the edge and flagged with ``<`` or ``>``.
    """
    v = np.asarray(values, dtype=float)
    q25, q50, q75 = np.percentile(v, [25, 50, 75])
    pos = lambda x: int(np.clip(np.floor(x / 100.0 * (width - 1) + 0.5), 0, width - 1))
    cells = [" "] * width
    for i in range(pos(q25), pos(q75) + 1):
        cells[i] = "-"
    cells[pos(q50)] = "*"
    left = "<" if v.min() < 0 else "["
    right = ">" if v.max() > 100 else "]"
    return left + "".join(cells) + right


def scott_knott(groups: Sequence[TreatmentSamples], seed=0, larger_is_better: bool = False,
                resamples: int = 1000, confidence: float = 0.95, small_effect: float = SMALL_EFFECT,
                fast_ratio: float = FAST_RATIO) -> RankTable:
    """Rank treatments; rank 1 is best (smallest median unless ``larger_is_better``)."""
    if not groups:
        raise ValueError("nothing to rank")
    sign = -1.0 if larger_is_better else 1.0
    order = sorted(range(len(groups)), key=lambda i: sign * groups[i].median)  # stable on ties
    ordered = [groups[i] for i in order]
    rng = np.random.default_rng(seed)
    labels = [0] * len(ordered)
    next_rank = [1]

    def split(lo: int, hi: int):
        window = ordered[lo:hi]
        if len(window) > 1:
            cut, _ = best_cut(window)
            left = np.concatenate([g.scores for g in window[:cut]])
            right = np.concatenate([g.scores for g in window[cut:]])
            effect = a12(left, right)
            if max(effect, 1 - effect) >= small_effect and bootstrap_significant(
                    left, right, resamples, confidence, rng):
                split(lo, lo + cut)
                split(lo + cut, hi)
                return
        for i in range(lo, hi):
            labels[i] = next_rank[0]
        next_rank[0] += 1

    split(0, len(ordered))
    top = [g.runtime_seconds for g, r in zip(ordered, labels) if r == 1]
    fastest = min(top)
    entries = tuple(
        RankEntry(r, g.token, g.median, g.iqr,
                  r == 1 and g.runtime_seconds <= fast_ratio * fastest,
                  g.runtime_seconds, g.scores)
        for g, r in zip(ordered, labels)
    )
    return RankTable(entries, larger_is_better)

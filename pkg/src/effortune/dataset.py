"""Loading, cleaning, scaling and fold planning for effort datasets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

DATASETS = (
    "kemerer",
    "albrecht",
    "isbsg10",
    "finnish",
    "miyazaki",
    "maxwell",
    "desharnais",
    "kitchenham",
    "china",
)


class DatasetError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MinMax:
    """Per-column min-max scaling fitted on a training table.

    Constant columns map to 0 and values outside the fitted range are
    clamped into [0, 1].
    """

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, rows) -> "MinMax":
        rows = np.asarray(rows, dtype=float)
        return cls(_frozen(rows.min(axis=0)), _frozen(rows.max(axis=0)))

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def transform(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        span = self.span
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (rows - self.lo) / safe, 0.0)
        return np.clip(out, 0.0, 1.0)

    def inverse(self, scaled) -> np.ndarray:
        return self.lo + np.asarray(scaled, dtype=float) * self.span


@dataclass(frozen=True)
class Dataset:
    """A table of projects: numeric features plus one effort value per row.

    ``codebooks`` maps a feature name to the text -> integer code table used
    when that column held text; those columns are flagged in ``categorical``.
    """

    name: str
    feature_names: tuple[str, ...]
    rows: np.ndarray
    efforts: np.ndarray
    codebooks: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    scaling: MinMax | None = None

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        rows = _frozen(self.rows).reshape(len(self.efforts), -1) if len(self.efforts) else _frozen(self.rows)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "efforts", _frozen(self.efforts))
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DatasetError(f"{self.name}: duplicate feature names")
        if rows.ndim != 2 or rows.shape[1] != len(self.feature_names):
            raise DatasetError(f"{self.name}: row arity does not match feature names")
        if rows.shape[0] != len(self.efforts):
            raise DatasetError(f"{self.name}: {rows.shape[0]} rows but {len(self.efforts)} efforts")
        if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(self.efforts))):
            raise DatasetError(f"{self.name}: non-finite values")
        if np.any(self.efforts < 0):
            raise DatasetError(f"{self.name}: negative effort")

    def __len__(self) -> int:
        return len(self.efforts)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def categorical(self) -> tuple[bool, ...]:
        return tuple(n in self.codebooks for n in self.feature_names)

    def subset(self, index) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return replace(self, rows=self.rows[index], efforts=self.efforts[index])


def _parse_float(text: str) -> float | None:
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(
    path,
    effort: str | None = None,
    name: str | None = None,
    codebooks: Mapping[str, Mapping[str, int]] | None = None,
) -> Dataset:
    """Read a header-first CSV with one project per row.

    The effort column is ``effort`` when given, else a column named "effort"
    (any case), else the last column. Text columns are integer-coded in order
    of first appearance unless ``codebooks`` supplies a fixed coding, in which
    case an unknown text cell is an error.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"missing file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        table = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not table:
        raise DatasetError(f"{path}: zero rows")
    header = [h.strip() for h in table[0]]
    body = table[1:]
    if not body:
        raise DatasetError(f"{path}: zero rows")
    if len(set(header)) != len(header):
        raise DatasetError(f"{path}: duplicate header names")

    if effort is not None:
        if effort not in header:
            raise DatasetError(f"{path}: no effort column {effort!r}")
        ecol = header.index(effort)
    else:
        lowered = [h.lower() for h in header]
        ecol = lowered.index("effort") if "effort" in lowered else len(header) - 1

    fixed = {k: dict(v) for k, v in (codebooks or {}).items()}
    books: dict[str, dict[str, int]] = {}
    cols = []
    for j, h in enumerate(header):
        cells = []
        for i, r in enumerate(body):
            if len(r) != len(header):
                raise DatasetError(f"{path}: line {i + 2} has {len(r)} cells, expected {len(header)}")
            cells.append(r[j].strip())
        values = [_parse_float(c) for c in cells]
        if all(v is not None for v in values):
            cols.append(values)
            continue
        if j == ecol:
            raise DatasetError(f"{path}: non-numeric effort cell")
        if h in fixed:
            book = fixed[h]
            for c in cells:
                if c not in book:
                    raise DatasetError(f"{path}: column {h!r} value {c!r} has no codebook entry")
        else:
            book = {}
            for c in cells:
                book.setdefault(c, len(book))
        books[h] = book
        cols.append([book[c] for c in cells])

    data = np.array(cols, dtype=float).T
    feats = [h for j, h in enumerate(header) if j != ecol]
    rows = np.delete(data, ecol, axis=1)
    return Dataset(name or path.stem, feats, rows, data[:, ecol], books)


def clean(d: Dataset, drop: Sequence[str]) -> Dataset:
    unknown = [c for c in drop if c not in d.feature_names]
    if unknown:
        raise DatasetError(f"{d.name}: unknown feature(s) {unknown}")
    keep = [j for j, n in enumerate(d.feature_names) if n not in set(drop)]
    names = tuple(d.feature_names[j] for j in keep)
    books = {k: v for k, v in d.codebooks.items() if k in names}
    return replace(d, feature_names=names, rows=d.rows[:, keep], codebooks=books, scaling=None)


def normalize_minmax(d: Dataset, scaling: MinMax | None = None) -> Dataset:
    """Scale every feature column into [0, 1]; effort is left alone.

    Pass ``scaling`` to map test rows with statistics fitted on training rows.
    The statistics used are kept on the returned dataset.
    """
    if len(d) == 0:
        raise DatasetError(f"{d.name}: cannot normalize an empty dataset")
    scaling = scaling or MinMax.fit(d.rows)
    return replace(d, rows=scaling.transform(d.rows), scaling=scaling)


def drop_list(name: str) -> list[str]:
    """Columns removed from the named dataset before any modelling."""
    text = resources.files("effortune.data.clean").joinpath(f"{name}.txt").read_text()
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def load_bundled(name: str, data_dir=None, cleaned: bool = True) -> Dataset:
    """Load one of the nine named datasets.

    With ``data_dir`` the CSV ``<data_dir>/<name>.csv`` is read; otherwise the
    synthetic stand-in shipped with the package is used.
    """
    if name not in DATASETS:
        raise DatasetError(f"unknown dataset {name!r}")
    if data_dir is None:
        with resources.as_file(resources.files("effortune.data.standin").joinpath(f"{name}.csv")) as p:
            d = load_csv(p, name=name)
    else:
        d = load_csv(Path(data_dir) / f"{name}.csv", name=name)
    return clean(d, drop_list(name)) if cleaned else d


@dataclass(frozen=True)
class FoldPlan:
    repeat_index: int
    seed: int
    bin_of_row: tuple[int, ...]

    @property
    def n_bins(self) -> int:
        return max(self.bin_of_row) + 1

    def split(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(train, test) row indices when bin ``i`` is held out."""
        b = np.asarray(self.bin_of_row)
        return np.flatnonzero(b != i), np.flatnonzero(b == i)


def make_folds(d: Dataset | int, repeats: int, bins: int, seed: int) -> list[FoldPlan]:
    n = d if isinstance(d, int) else len(d)
    if repeats < 1:
        raise DatasetError("repeats must be >= 1")
    if bins < 2:
        raise DatasetError("bins must be >= 2")
    if bins > n:
        raise DatasetError(f"{bins} bins but only {n} rows")
    plans = []
    for r in range(repeats):
        order = np.random.default_rng([seed, r]).permutation(n)
        bin_of_row = np.empty(n, dtype=int)
        bin_of_row[order] = np.arange(n) % bins
        plans.append(FoldPlan(r, seed, tuple(int(b) for b in bin_of_row)))
    return plans

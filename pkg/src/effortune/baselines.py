"""Untuned reference estimators.

* ATLM: ordinary least squares on skew-reducing transforms of the numeric
  columns plus dummy-coded categorical columns.
* LP4EE: intercept-free linear model minimising the sum of absolute
  residuals, solved as a linear program.
* The sample-mean model and the random-guess MAE used by standardized
  accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import skew

from .dataset import Dataset
from .simplex import LPResult, solve

TRANSFORMS = ("identity", "sqrt", "log")  # preference order on skewness ties


def apply_transform(name: str, x):
    x = np.asarray(x, dtype=float)
    if name == "identity":
        return x
    if name == "sqrt":
        return np.sqrt(np.maximum(x, 0.0))
    if name == "log":
        return np.log1p(np.maximum(x, 0.0))
    raise ValueError(name)


def pick_transform(column) -> str:
    """Transform with the smallest absolute adjusted sample skewness."""
    column = np.asarray(column, dtype=float)
    if np.ptp(column) == 0:
        return "identity"
    best, best_skew = "identity", np.inf
    for name in TRANSFORMS:
        if name != "identity" and column.min() < 0:
            continue
        s = abs(skew(apply_transform(name, column), bias=False))
        if np.isfinite(s) and s < best_skew - 1e-12:
            best, best_skew = name, s
    return best


@dataclass(frozen=True)
class AtlmModel:
    transforms: tuple[str | None, ...]  # None for categorical columns
    levels: tuple[tuple[float, ...] | None, ...]  # dummy levels (reference level dropped)
    coef: np.ndarray  # intercept first

    def design(self, rows) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != len(self.transforms):
            raise ValueError(f"expected {len(self.transforms)} features, got {rows.shape[1]}")
        cols = [np.ones(len(rows))]
        for j, (tr, lv) in enumerate(zip(self.transforms, self.levels)):
            if tr is not None:
                cols.append(apply_transform(tr, rows[:, j]))
            else:
                cols.extend((rows[:, j] == v).astype(float) for v in lv)
        return np.column_stack(cols)

    def predict(self, rows) -> np.ndarray:
        return self.design(rows) @ self.coef


def atlm_fit(train: Dataset, categorical_mask: Sequence[bool] | None = None) -> AtlmModel:
    if categorical_mask is None:
        categorical_mask = train.categorical
    if len(categorical_mask) != train.n_features:
        raise ValueError("categorical_mask length must match the feature count")
    transforms, levels = [], []
    for j, cat in enumerate(categorical_mask):
        if cat:
            seen = np.unique(train.rows[:, j])
            transforms.append(None)
            levels.append(tuple(float(v) for v in seen[1:]))
        else:
            transforms.append(pick_transform(train.rows[:, j]))
            levels.append(None)
    shell = AtlmModel(tuple(transforms), tuple(levels), np.zeros(0))
    x = shell.design(train.rows)
    p = x.shape[1] - 1
    if len(train) < p + 2:
        raise ValueError(f"ATLM needs at least {p + 2} rows for {p} terms, got {len(train)}")
    # lstsq returns the minimum-norm solution when dummies are collinear
    coef, *_ = np.linalg.lstsq(x, train.efforts, rcond=None)
    return AtlmModel(shell.transforms, shell.levels, coef)


def atlm_predict(m: AtlmModel, row) -> float:
    return float(m.predict(np.asarray(row, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class Lp4eeModel:
    coef: np.ndarray
    lp: LPResult

    @property
    def sar(self) -> float:
        return self.lp.fun

    def predict(self, rows) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != len(self.coef):
            raise ValueError(f"expected {len(self.coef)} features, got {rows.shape[1]}")
        return rows @ self.coef


def lad_fit(x, y, max_iter: int = 100_000) -> tuple[np.ndarray, LPResult]:
    """Coefficients minimising sum |y - x @ a| with free-signed ``a``.

    Variables are ``[a+, a-, u, w]`` with ``x(a+ - a-) + u - w = y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m, p = x.shape
    a_eq = np.hstack([x, -x, np.eye(m), -np.eye(m)])
    c = np.concatenate([np.zeros(2 * p), np.ones(2 * m)])
    res = solve(c, a_eq, y, max_iter=max_iter)
    return res.x[:p] - res.x[p : 2 * p], res


def lp4ee_fit(train: Dataset) -> Lp4eeModel:
    if len(train) < 1:
        raise ValueError("LP4EE needs at least one row")
    coef, res = lad_fit(train.rows, train.efforts)
    return Lp4eeModel(coef, res)


def lp4ee_predict(m: Lp4eeModel, row) -> float:
    return float(m.predict(np.asarray(row, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class MeanModel:
    value: float

    def predict(self, rows) -> np.ndarray:
        return np.full(len(np.atleast_2d(rows)), self.value)


def mean_predictor(train: Dataset | Sequence[float]) -> MeanModel:
    efforts = train.efforts if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    if len(efforts) == 0:
        raise ValueError("empty effort list")
    return MeanModel(float(np.mean(efforts)))


def random_guess_mae(train_efforts, test_actuals, runs: int = 1000, seed: int = 0) -> float:
    """Mean MAE over ``runs`` rounds of guessing each test effort with a random training effort."""
    train_efforts = np.asarray(train_efforts, dtype=float)
    test_actuals = np.asarray(test_actuals, dtype=float)
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if len(train_efforts) == 0 or len(test_actuals) == 0:
        raise ValueError("empty effort list")
    rng = np.random.default_rng(seed)
    total, done = 0.0, 0
    chunk = max(1, 2_000_000 // len(test_actuals))
    while done < runs:
        k = min(chunk, runs - done)
        picks = train_efforts[rng.integers(0, len(train_efforts), size=(k, len(test_actuals)))]
        total += np.abs(picks - test_actuals).mean(axis=1).sum()
        done += k
    return float(total / runs)

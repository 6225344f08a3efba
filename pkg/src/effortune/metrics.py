"""Error measures for effort predictions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 0.0  # actual efforts at or below this are left out of MRE summaries


def mre(actual: float, predicted: float) -> float:
    """Magnitude of relative error ``|actual - predicted| / actual``."""
    if actual <= 0:
        raise ValueError(f"MRE is undefined for actual effort {actual}")
    return abs(actual - predicted) / actual


def mae(actuals, predictions) -> float:
    a = np.asarray(actuals, dtype=float)
    p = np.asarray(predictions, dtype=float)
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    return float(np.abs(a - p).mean())


def sa(mae_model: float, mae_guess: float) -> float:
    """Standardized accuracy in percent: 100 is perfect, 0 is no better than guessing."""
    if mae_guess <= 0:
        raise ValueError("random-guess MAE is zero; SA is undefined for this data")
    return float((1.0 - mae_model / mae_guess) * 100.0)


def median_mre(actuals, predictions) -> float:
    """Median MRE over rows whose actual effort is positive (nan if there are none)."""
    a = np.asarray(actuals, dtype=float)
    p = np.asarray(predictions, dtype=float)
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {p.shape}")
    keep = a > EPS
    if not keep.any():
        return float("nan")
    return float(np.median(np.abs(a[keep] - p[keep]) / a[keep]))


@dataclass(frozen=True)
class FoldScore:
    treatment: str
    dataset: str
    repeat: int
    fold: int
    mdmre: float
    sa: float
    seconds: float

    def __post_init__(self):
        for name in ("mdmre", "sa", "seconds"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "repeat", int(self.repeat))
        object.__setattr__(self, "fold", int(self.fold))
        if self.sa > 100 + 1e-9:
            raise ValueError(f"SA above 100: {self.sa}")
        if self.mdmre < 0:
            raise ValueError(f"negative median MRE: {self.mdmre}")

    @property
    def key(self) -> tuple:
        return (self.dataset, self.treatment, self.repeat, self.fold)

    def scores(self) -> tuple:
        """Every field except wall-clock time."""
        return (self.treatment, self.dataset, self.repeat, self.fold, self.mdmre, self.sa)

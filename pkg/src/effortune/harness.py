"""M x N cross-validation runs of every treatment, with a file-backed result store.

Every stochastic step draws from a seed hashed out of the master seed and
the cell it belongs to, so results do not depend on execution order or on
how cells are spread over worker processes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy

from . import __version__
from .abe import ABE0, AbeConfig, abe_fit
from .baselines import atlm_fit, lp4ee_fit, random_guess_mae
from .cart import CartParams, cart_fit, rf_fit
from .configspace import Candidate, load_space
from .dataset import DATASETS, Dataset, load_bundled, make_folds
from .metrics import FoldScore, mae, median_mre, sa
from .optimizers import DeParams, FlashParams, Objective, de_optimize, flash_optimize, random_search
from .stats import RankTable, TreatmentSamples, scott_knott

TREATMENTS = ("ABE0", "ABEN_RD", "ABEN_DE", "CART", "CART_RD", "CART_DE", "CART_FLASH", "RF", "ATLM", "LP4EE")
TUNED = {
    "ABEN_RD": ("aben", "rd"),
    "ABEN_DE": ("aben", "de"),
    "CART_RD": ("cart", "rd"),
    "CART_DE": ("cart", "de"),
    "CART_FLASH": ("cart", "flash"),
}
METRICS = ("mre", "sa")
QUICK_REPEATS = 3
GUESS_RUNS = 1000
SCORE_FIELDS = ("treatment", "dataset", "repeat", "fold", "mdmre", "sa", "seconds")


def cell_seed(master: int, *parts) -> int:
    """64-bit seed derived from the master seed and a cell address."""
    text = "/".join(str(p) for p in (master, *parts))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


@dataclass(frozen=True)
class ExperimentPlan:
    datasets: tuple[str, ...]
    treatments: tuple[str, ...]
    repeats: int = 20
    bins: int = 3
    seed: int = 0
    out: str | None = None
    data_dir: str | None = None
    metrics: tuple[str, ...] = METRICS
    workers: int = 1
    write_traces: bool = True

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "treatments", tuple(self.treatments))
        if not self.treatments:
            raise ValueError("plan needs at least one treatment")
        if not self.datasets:
            raise ValueError("plan needs at least one dataset")
        for t in self.treatments:
            if t not in TREATMENTS:
                raise ValueError(f"unknown treatment {t!r}; choose from {TREATMENTS}")
        for d in self.datasets:
            if d not in DATASETS:
                raise ValueError(f"unknown dataset {d!r}")
        if self.repeats < 1 or self.bins < 2:
            raise ValueError("need repeats >= 1 and bins >= 2")

    def cells(self) -> list[tuple[str, str, int, int]]:
        return [(d, t, r, f) for d in self.datasets for t in self.treatments
                for r in range(self.repeats) for f in range(self.bins)]

    def manifest(self) -> dict:
        return {
            "plan": {k: v for k, v in asdict(self).items() if k not in ("out", "workers")},
            "fold_seeds": {d: cell_seed(self.seed, d, "folds") for d in self.datasets},
            "versions": {"effortune": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "python": platform.python_version()},
        }


@lru_cache(maxsize=None)
def _dataset(name: str, data_dir: str | None) -> Dataset:
    return load_bundled(name, data_dir)


@lru_cache(maxsize=None)
def _folds(name: str, data_dir: str | None, repeats: int, bins: int, master: int):
    return make_folds(_dataset(name, data_dir), repeats, bins, cell_seed(master, name, "folds"))


@lru_cache(maxsize=None)
def _space(name: str):
    return load_space(name)


def fold_indices(plan: ExperimentPlan, dataset: str, repeat: int, fold: int) -> tuple[np.ndarray, np.ndarray]:
    """(train, test) row indices; identical for every treatment."""
    return _folds(dataset, plan.data_dir, plan.repeats, plan.bins, plan.seed)[repeat].split(fold)


def inner_split(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded 2:1 build/validate split of ``n`` training rows."""
    perm = np.random.default_rng(seed).permutation(n)
    n_build = min(n - 1, max(2, round(2 * n / 3)))
    return np.sort(perm[:n_build]), np.sort(perm[n_build:])


def cart_params(c: Candidate) -> CartParams:
    return CartParams(float(c["max_features"]), int(c["max_depth"]),
                      int(c["min_sample_split"]), int(c["min_samples_leaf"]))


def abe_config(c: Candidate) -> AbeConfig:
    return AbeConfig(**c.as_dict())


def _fitter(space_name: str, cand: Candidate, seed: int, keys):
    if space_name == "cart":
        params = cart_params(cand)
        return lambda d, k: cart_fit(d, params, seed)
    cfg = abe_config(cand)
    return lambda d, k: abe_fit(d, cfg, seed, keys=k)


def tune(treatment: str, train: Dataset, train_idx: np.ndarray, seed: int, inner_seed: int):
    """Run the treatment's optimizer on an inner split; returns (winner, objective)."""
    space_name, opt = TUNED[treatment]
    space = _space(space_name)
    build_i, valid_i = inner_split(len(train), inner_seed)
    build, valid = train.subset(build_i), train.subset(valid_i)

    def score(c: Candidate) -> float:
        try:
            model = _fitter(space_name, c, seed, None)(build, train_idx[build_i])
            s = median_mre(valid.efforts, model.predict(valid.rows))
        except (ValueError, np.linalg.LinAlgError):
            return np.inf
        return s if np.isfinite(s) else np.inf

    obj = Objective(score)
    if opt == "rd":
        best = random_search(space, obj, seed=seed)
    elif opt == "de":
        best = de_optimize(space, obj, DeParams(), seed=seed)
    else:
        best = flash_optimize(space, obj, FlashParams(), seed=seed)
    return best, obj


@dataclass
class CellResult:
    score: FoldScore | None
    failure: tuple | None = None
    trace: list = field(default_factory=list)
    winner: str | None = None


def run_cell(plan: ExperimentPlan, dataset: str, treatment: str, repeat: int, fold: int) -> CellResult:
    """Fit and score one treatment on one fold; exceptions become failure records."""
    t0 = time.perf_counter()
    try:
        d = _dataset(dataset, plan.data_dir)
        train_i, test_i = fold_indices(plan, dataset, repeat, fold)
        train, test = d.subset(train_i), d.subset(test_i)
        seed = cell_seed(plan.seed, dataset, treatment, repeat, fold)
        trace, winner = [], None
        if treatment in TUNED:
            best, obj = tune(treatment, train, train_i, seed, cell_seed(plan.seed, dataset, "inner", repeat, fold))
            trace, winner = obj.trace, best.token
            model = _fitter(TUNED[treatment][0], best, seed, None)(train, train_i)
        elif treatment == "ABE0":
            model = abe_fit(train, ABE0, seed, keys=train_i)
        elif treatment == "CART":
            model = cart_fit(train, CartParams(), seed)
        elif treatment == "RF":
            model = rf_fit(train, seed=seed)
        elif treatment == "ATLM":
            model = atlm_fit(train)
        else:
            model = lp4ee_fit(train)
        pred = model.predict(test.rows)
        guess = random_guess_mae(train.efforts, test.efforts, GUESS_RUNS,
                                 cell_seed(plan.seed, dataset, "guess", repeat, fold))
        score = FoldScore(treatment, dataset, repeat, fold, median_mre(test.efforts, pred),
                          sa(mae(test.efforts, pred), guess), time.perf_counter() - t0)
        return CellResult(score, None, trace, winner)
    except Exception as e:  # recorded, never dropped silently
        msg = f"{type(e).__name__}: {e}".replace("\n", " ")
        return CellResult(None, (treatment, dataset, repeat, fold, msg, traceback.format_exc(limit=3)))


def _run_packed(args):
    return run_cell(*args)


class ResultStore:
    """Directory holding ``manifest.json``, ``scores.csv``, ``failures.csv`` and ``traces/``."""

    def __init__(self, path):
        self.path = Path(path)

    @property
    def manifest(self) -> dict:
        return json.loads((self.path / "manifest.json").read_text())

    def write(self, manifest: dict, results: Sequence[CellResult]) -> None:
        self.path.mkdir(parents=True, exist_ok=True)
        (self.path / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        scores = sorted((r.score for r in results if r.score), key=lambda s: s.key)
        with open(self.path / "scores.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SCORE_FIELDS)
            for s in scores:
                w.writerow([s.treatment, s.dataset, s.repeat, s.fold, repr(s.mdmre), repr(s.sa), f"{s.seconds:.6f}"])
        with open(self.path / "failures.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["treatment", "dataset", "repeat", "fold", "error"])
            for f in sorted((r.failure for r in results if r.failure), key=lambda f: (f[1], f[0], f[2], f[3])):
                w.writerow(f[:5])
        winners = [(r.score, r.winner) for r in results if r.score and r.winner]
        if winners:
            with open(self.path / "winners.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["treatment", "dataset", "repeat", "fold", "winner"])
                for s, tok in sorted(winners, key=lambda x: x[0].key):
                    w.writerow([s.treatment, s.dataset, s.repeat, s.fold, tok])

    def write_trace(self, score: FoldScore, trace) -> Path:
        p = self.path / "traces" / score.dataset / f"{score.treatment}_r{score.repeat}_f{score.fold}.csv"
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eval", "token", "score"])
            for i, tok, s in trace:
                w.writerow([i, tok, repr(s)])
        return p

    def records(self) -> list[FoldScore]:
        with open(self.path / "scores.csv", newline="") as fh:
            return [FoldScore(r["treatment"], r["dataset"], int(r["repeat"]), int(r["fold"]),
                              float(r["mdmre"]), float(r["sa"]), float(r["seconds"]))
                    for r in csv.DictReader(fh)]

    def failures(self) -> list[dict]:
        p = self.path / "failures.csv"
        if not p.exists():
            return []
        with open(p, newline="") as fh:
            return list(csv.DictReader(fh))

    def datasets(self) -> list[str]:
        seen = {r.dataset for r in self.records()}
        return [d for d in DATASETS if d in seen] + sorted(seen - set(DATASETS))


def run_experiment(plan: ExperimentPlan, progress=None) -> ResultStore | list[CellResult]:
    """Run every cell of the plan. Writes a ResultStore when ``plan.out`` is set,
    otherwise returns the raw cell results."""
    cells = plan.cells()
    args = [(plan, *c) for c in cells]
    results = []
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            for i, r in enumerate(pool.map(_run_packed, args, chunksize=1)):
                results.append(r)
                if progress:
                    progress(i + 1, len(cells), r)
    else:
        for i, a in enumerate(args):
            results.append(_run_packed(a))
            if progress:
                progress(i + 1, len(cells), results[-1])
    if plan.out is None:
        return results
    store = ResultStore(plan.out)
    store.write(plan.manifest(), results)
    if plan.write_traces:
        for r in results:
            if r.score and r.trace:
                store.write_trace(r.score, r.trace)
    return store


# ------------------------------------------------------------ reports

def rank_table(records: Iterable[FoldScore], dataset: str, metric: str, seed: int = 0) -> RankTable:
    """Scott-Knott table of one dataset's per-fold scores under one metric."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    scores: dict[str, list[float]] = {}
    runtime: dict[str, float] = {}
    for r in records:
        if r.dataset != dataset:
            continue
        v = r.mdmre if metric == "mre" else r.sa
        runtime[r.treatment] = runtime.get(r.treatment, 0.0) + r.seconds
        if np.isfinite(v):
            scores.setdefault(r.treatment, []).append(v)
    if not scores:
        raise ValueError(f"no records for dataset {dataset!r}")
    groups = [TreatmentSamples(t, scores[t], runtime[t]) for t in sorted(scores, key=_treatment_order)]
    return scott_knott(groups, seed=cell_seed(seed, dataset, metric, "rank"), larger_is_better=metric == "sa")


def _treatment_order(t: str):
    return (TREATMENTS.index(t) if t in TREATMENTS else len(TREATMENTS), t)


def render_report(store: ResultStore, dataset: str, metric: str) -> tuple[str, str]:
    """(aligned text, CSV) rank table for one dataset and metric."""
    seed = store.manifest["plan"]["seed"]
    table = rank_table(store.records(), dataset, metric, seed)
    title = f"{dataset} / {'median MRE (%)' if metric == 'mre' else 'SA (%)'}"
    return title + "\n" + table.to_text(percent=metric == "mre"), table.to_csv()


def summarize_wins(tables: Iterable[RankTable], treatments: Sequence[str] = TREATMENTS) -> dict[str, tuple[int, int]]:
    """Rank-1 appearances per treatment as ``(wins, tables)``."""
    tables = list(tables)
    wins = {t: 0 for t in treatments}
    for tab in tables:
        for t in tab.winners():
            wins[t] = wins.get(t, 0) + 1
    return {t: (w, len(tables)) for t, w in sorted(wins.items(), key=lambda kv: (-kv[1], _treatment_order(kv[0])))}


def store_tables(stores: Iterable[ResultStore]) -> list[RankTable]:
    tables = []
    for store in stores:
        records = store.records()
        seed = store.manifest["plan"]["seed"]
        for d in store.datasets():
            for m in METRICS:
                tables.append(rank_table(records, d, m, seed))
    return tables


def wins_text(wins: dict[str, tuple[int, int]]) -> str:
    w = max(len(t) for t in wins)
    return "\n".join(f"{t:<{w}}  {n}/{of}" for t, (n, of) in wins.items())


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)

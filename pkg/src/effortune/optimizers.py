"""Random search, differential evolution and FLASH over a ``Space``.

All three minimise an ``Objective`` and spend their budget on distinct
candidates: a repeated candidate is answered from the cache and never counts
as an evaluation, so the default settings cost exactly 220 true evaluations
each.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cart import CartParams, build_tree
from .configspace import Candidate, Space, SpaceError

DEFAULT_BUDGET = 220
FLASH_POOL_SAMPLES = 5000
_RETRIES = 30


class Objective:
    """Cached, counted wrapper around ``fn(candidate) -> score`` (lower is better)."""

    def __init__(self, fn: Callable[[Candidate], float]):
        self.fn = fn
        self.cache: dict[str, float] = {}
        self.evaluations = 0
        self.trace: list[tuple[int, str, float]] = []

    def __call__(self, c: Candidate) -> float:
        key = c.token
        if key not in self.cache:
            score = float(self.fn(c))
            if np.isnan(score):
                score = np.inf
            self.cache[key] = score
            self.evaluations += 1
            self.trace.append((self.evaluations, key, score))
        return self.cache[key]

    def seen(self, c: Candidate) -> bool:
        return c.token in self.cache

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eval", "token", "score"])
            for i, tok, s in self.trace:
                w.writerow([i, tok, repr(s)])


def _unseen_sample(space: Space, obj: Objective, rng, exclude=()) -> Candidate | None:
    for _ in range(10_000):
        c = space.sample_valid(rng)
        if not obj.seen(c) and c not in exclude:
            return c
    return None


def _argmin(cands, scores) -> Candidate:
    return cands[int(np.argmin(scores))]  # first wins ties


def random_search(space: Space, obj: Objective, evals: int = DEFAULT_BUDGET, seed=0) -> Candidate:
    """Best of ``evals`` distinct valid random samples."""
    if evals < 1:
        raise ValueError("evals must be >= 1")
    rng = np.random.default_rng(seed)
    cands, scores = [], []
    while len(cands) < evals:
        c = _unseen_sample(space, obj, rng, exclude=set(cands))
        if c is None:  # space exhausted
            break
        cands.append(c)
        scores.append(obj(c))
    return _argmin(cands, scores)


@dataclass(frozen=True)
class DeParams:
    np: int = 20
    f: float = 0.75
    cr: float = 0.3
    gen: int = 10

    def __post_init__(self):
        if self.np < 4:
            raise ValueError("DE needs a population of at least 4")
        if not 0 < self.cr <= 1 or self.f <= 0 or self.gen < 0:
            raise ValueError("need 0 < cr <= 1, f > 0, gen >= 0")


def mutate(target, a, b, c, f: float, cr: float, boolean_mask, rng) -> np.ndarray:
    """DE/rand/1/bin trial vector on [0, 1] encodings.

    Each coordinate is taken from ``a + f * (b - c)`` with probability ``cr``
    (one randomly chosen coordinate always is). Boolean coordinates flip the
    target's value instead.
    """
    d = len(target)
    take = rng.random(d) < cr
    take[rng.integers(d)] = True
    y = np.clip(a + f * (b - c), 0.0, 1.0)
    y = np.where(boolean_mask, 1.0 - target, y)
    return np.where(take, y, target)


def de_optimize(space: Space, obj: Objective, p: DeParams = DeParams(), seed=0,
                on_generation: Callable | None = None) -> Candidate:
    """Differential evolution; ``on_generation(g, population, scores)`` is called after
    initialisation (g=0) and after every generation."""
    rng = np.random.default_rng(seed)
    booleans = np.array([q.kind == "boolean" for q in space.params])
    pop: list[Candidate] = []
    while len(pop) < p.np:
        c = _unseen_sample(space, obj, rng, exclude=set(pop))
        if c is None:
            raise SpaceError("space too small for the DE population")
        pop.append(c)
    scores = [obj(c) for c in pop]
    if on_generation:
        on_generation(0, list(pop), list(scores))

    for g in range(1, p.gen + 1):
        for i in range(p.np):
            trial = None
            for _ in range(_RETRIES):
                a, b, c = rng.choice([j for j in range(p.np) if j != i], size=3, replace=False)
                v = mutate(pop[i].encoding, pop[a].encoding, pop[b].encoding, pop[c].encoding,
                           p.f, p.cr, booleans, rng)
                cand = space.decode(v)
                if not obj.seen(cand):
                    trial = cand
                    break
            if trial is None:
                # keep the budget honest when the neighbourhood is already explored
                trial = _unseen_sample(space, obj, rng)
                if trial is None:
                    continue
            s = obj(trial)
            if s < scores[i]:
                pop[i], scores[i] = trial, s
        if on_generation:
            on_generation(g, list(pop), list(scores))
    return _argmin(pop, scores)


@dataclass(frozen=True)
class FlashParams:
    b: int = 200
    n: int = 20
    surrogate: CartParams = CartParams()

    def __post_init__(self):
        if self.b < 0 or self.n < 2:
            raise ValueError("need b >= 0 and n >= 2")


def flash_pool(space: Space, seed=0, samples: int = FLASH_POOL_SAMPLES) -> list[Candidate]:
    """Full valid enumeration for finite spaces, else distinct seeded samples."""
    if all(q.kind != "continuous" for q in space.params):
        return list(space.enumerate())
    rng = np.random.default_rng(seed)
    pool, seen = [], set()
    for _ in range(samples):
        c = space.sample_valid(rng)
        if c.token not in seen:
            seen.add(c.token)
            pool.append(c)
    return pool


def flash_optimize(space: Space, obj: Objective, p: FlashParams = FlashParams(), seed=0,
                   pool: list[Candidate] | None = None) -> Candidate:
    """Sequential model-based search with a regression-tree surrogate.

    Starts from ``n`` random pool members, then ``b`` times fits the surrogate
    to every evaluated (encoding, score) pair and evaluates the unevaluated pool
    member with the lowest prediction (pool order breaks ties).
    """
    rng = np.random.default_rng(seed)
    if pool is None:
        pool = flash_pool(space, seed)
    if len(pool) < p.n:
        raise ValueError(f"pool of {len(pool)} is smaller than n={p.n}")
    enc = np.array([c.encoding for c in pool])
    done = np.zeros(len(pool), dtype=bool)
    start = rng.choice(len(pool), size=p.n, replace=False)
    archive = [int(i) for i in start]
    scores = [obj(pool[i]) for i in archive]
    done[archive] = True
    for _ in range(p.b):
        if done.all():
            break
        y = np.array(scores)
        finite = np.isfinite(y)
        fill = y[finite].max() if finite.any() else 0.0
        tree = build_tree(enc[archive], np.where(finite, y, fill), p.surrogate, seed=0)
        open_idx = np.flatnonzero(~done)
        pick = int(open_idx[np.argmin(tree.predict(enc[open_idx]))])
        archive.append(pick)
        scores.append(obj(pool[pick]))
        done[pick] = True
    return _argmin([pool[i] for i in archive], scores)

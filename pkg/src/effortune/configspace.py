"""Mixed-type search spaces with cross-tree rules and a [0, 1] encoding.

Spaces are read from small declarative manifests::

    space cart
    param max_depth mandatory integer 1 12
    param subset_selection optional boolean remove_nothing:all outlier_prune:prune
    param similarity mandatory categorical weighted_euclidean:wEuclid ...
    rule: feature_weighting in gain_ratio,chi_squared => discretization in equal_frequency,equal_width ; repair discretization=equal_frequency

Every parameter maps to one coordinate in [0, 1]. Continuous values scale
linearly, integers round half-up, and choice-valued parameters (categorical
or boolean) take the cell ``floor(v * n)``. Decoded assignments that break a
rule are repaired with the rule's repair value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

KINDS = ("continuous", "integer", "categorical", "boolean")
MAX_REJECTIONS = 10_000


class SpaceError(ValueError):
    pass


def _atom(text: str):
    """Choice values that look like integers are stored as ints."""
    return int(text) if text.lstrip("-").isdigit() else text


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    lo: float = 0.0
    hi: float = 1.0
    choices: tuple = ()
    labels: tuple[str, ...] = ()
    mandatory: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpaceError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind in ("continuous", "integer") and not self.lo < self.hi:
            raise SpaceError(f"{self.name}: need lo < hi, got [{self.lo}, {self.hi}]")
        if self.kind in ("categorical", "boolean"):
            if not self.choices:
                raise SpaceError(f"{self.name}: no choices")
            if self.kind == "boolean" and len(self.choices) != 2:
                raise SpaceError(f"{self.name}: a boolean has exactly two choices (false, true)")
            if not self.labels:
                object.__setattr__(self, "labels", tuple(str(c) for c in self.choices))

    @property
    def is_choice(self) -> bool:
        return self.kind in ("categorical", "boolean")

    def decode(self, v: float):
        v = min(1.0, max(0.0, float(v)))
        if self.kind == "continuous":
            return self.lo + v * (self.hi - self.lo)
        if self.kind == "integer":
            return int(self.lo + math.floor(v * (self.hi - self.lo) + 0.5))
        n = len(self.choices)
        return self.choices[min(int(v * n), n - 1)]

    def encode(self, value) -> float:
        if self.kind == "continuous":
            return (float(value) - self.lo) / (self.hi - self.lo)
        if self.kind == "integer":
            return (int(value) - self.lo) / (self.hi - self.lo)
        # centre of the choice's cell, so decode(encode(x)) is exact
        return (self.choices.index(value) + 0.5) / len(self.choices)

    def label(self, value) -> str:
        if self.is_choice:
            return self.labels[self.choices.index(value)]
        return f"{value:.6g}" if self.kind == "continuous" else str(value)

    def contains(self, value) -> bool:
        if self.is_choice:
            return value in self.choices
        return self.lo <= value <= self.hi

    def draw(self, rng: np.random.Generator):
        if self.kind == "continuous":
            return float(rng.uniform(self.lo, self.hi))
        if self.kind == "integer":
            return int(rng.integers(int(self.lo), int(self.hi) + 1))
        return self.choices[int(rng.integers(len(self.choices)))]

    def finite_values(self) -> tuple:
        if self.is_choice:
            return self.choices
        if self.kind == "integer":
            return tuple(range(int(self.lo), int(self.hi) + 1))
        raise SpaceError(f"{self.name}: continuous parameters cannot be enumerated")


@dataclass(frozen=True)
class Rule:
    """``if when in when_values then target in allowed``; broken rules set ``target = repair``."""

    when: str
    when_values: frozenset
    target: str
    allowed: frozenset
    repair: object

    def holds(self, values: dict) -> bool:
        return values[self.when] not in self.when_values or values[self.target] in self.allowed

    def __str__(self):
        fmt = lambda vs: ",".join(sorted(map(str, vs)))
        return f"{self.when} in {fmt(self.when_values)} => {self.target} in {fmt(self.allowed)}"


@dataclass(frozen=True, eq=False)
class Candidate:
    """A full assignment plus its [0, 1] encoding. Equality looks at values only."""

    space: "Space" = field(repr=False)
    values: tuple
    encoding: np.ndarray = field(repr=False)

    def __eq__(self, other):
        return isinstance(other, Candidate) and self.space.name == other.space.name and self.values == other.values

    def __hash__(self):
        return hash((self.space.name, self.values))

    def __getitem__(self, name):
        return self.values[self.space.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.space.names, self.values))

    @property
    def token(self) -> str:
        return "|".join(p.label(v) for p, v in zip(self.space.params, self.values))


@dataclass(frozen=True)
class Space:
    name: str
    params: tuple[ParamSpec, ...]
    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise SpaceError("duplicate parameter names")
        by_name = dict(zip(names, self.params))
        for r in self.rules:
            for n in (r.when, r.target):
                if n not in by_name:
                    raise SpaceError(f"rule mentions unknown parameter {n!r}")
            if r.repair not in r.allowed or not by_name[r.target].contains(r.repair):
                raise SpaceError(f"repair value {r.repair!r} does not satisfy rule {r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    @property
    def dim(self) -> int:
        return len(self.params)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def violations(self, values) -> list[str]:
        d = dict(zip(self.names, values))
        return [str(r) for r in self.rules if not r.holds(d)]

    def is_valid(self, values) -> bool:
        return not self.violations(values)

    def repair(self, values) -> tuple:
        d = dict(zip(self.names, values))
        for _ in range(len(self.rules) + 1):
            broken = [r for r in self.rules if not r.holds(d)]
            if not broken:
                return tuple(d[n] for n in self.names)
            d[broken[0].target] = broken[0].repair
        raise SpaceError("repair rules do not converge")

    def candidate(self, values, encoding=None) -> Candidate:
        """Validated candidate from raw values (no repair).

        ``encoding`` may supply the coordinates of continuous parameters;
        other coordinates always use their canonical cell centre.
        """
        values = tuple(values)
        if len(values) != self.dim:
            raise SpaceError(f"expected {self.dim} values, got {len(values)}")
        for p, v in zip(self.params, values):
            if not p.contains(v):
                raise SpaceError(f"{p.name}={v!r} out of range")
        if not self.is_valid(values):
            raise SpaceError(f"invalid assignment: {self.violations(values)}")
        enc = np.array([p.encode(v) for p, v in zip(self.params, values)])
        if encoding is not None:
            cont = np.array([p.kind == "continuous" for p in self.params])
            enc[cont] = np.asarray(encoding, dtype=float)[cont]
        enc.setflags(write=False)
        # snap continuous values onto their encoding so decode(encode(c)) is bit-exact
        values = tuple(p.decode(e) if p.kind == "continuous" else v for p, v, e in zip(self.params, values, enc))
        return Candidate(self, values, enc)

    def from_dict(self, d: dict) -> Candidate:
        return self.candidate(d[n] for n in self.names)

    def encode(self, c: Candidate) -> np.ndarray:
        return np.array(c.encoding)

    def decode(self, v) -> Candidate:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise SpaceError(f"expected a vector of length {self.dim}, got shape {v.shape}")
        v = np.clip(v, 0.0, 1.0)
        raw = tuple(p.decode(x) for p, x in zip(self.params, v))
        return self.candidate(self.repair(raw), encoding=v)

    def raw_size(self) -> int:
        return math.prod(len(p.finite_values()) for p in self.params)

    def enumerate_raw(self):
        """Every point of the raw cross-product as a value tuple, valid or not."""
        return itertools.product(*(p.finite_values() for p in self.params))

    def enumerate(self):
        """Every valid candidate, in cross-product order."""
        for values in self.enumerate_raw():
            if self.is_valid(values):
                yield self.candidate(values)

    def sample_valid(self, seed) -> Candidate:
        """Uniform draw from the raw product, rejecting invalid points.

        ``seed`` may be an int or a ``numpy.random.Generator`` (advanced in place).
        """
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        for _ in range(MAX_REJECTIONS):
            values = tuple(p.draw(rng) for p in self.params)
            if self.is_valid(values):
                return self.candidate(values)
        raise SpaceError(f"no valid sample in {MAX_REJECTIONS} draws; space looks over-constrained")


def sample_valid(space: Space, seed) -> Candidate:
    return space.sample_valid(seed)


def encode(c: Candidate) -> np.ndarray:
    return c.space.encode(c)


def decode(space: Space, v) -> Candidate:
    return space.decode(v)


# ------------------------------------------------------------ manifests

def _parse_choices(words):
    choices, labels = [], []
    for w in words:
        value, _, label = w.partition(":")
        choices.append(_atom(value))
        labels.append(label or value)
    return tuple(choices), tuple(labels)


def parse_space(text: str) -> Space:
    name, params, rule_lines = None, [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "space":
                (name,) = rest
            elif head == "param":
                pname, group, kind, *args = rest
                if group not in ("mandatory", "optional"):
                    raise SpaceError(f"expected mandatory/optional, got {group!r}")
                mandatory = group == "mandatory"
                if kind in ("continuous", "integer"):
                    lo, hi = (float(a) for a in args)
                    params.append(ParamSpec(pname, kind, lo, hi, mandatory=mandatory))
                else:
                    choices, labels = _parse_choices(args)
                    params.append(ParamSpec(pname, kind, choices=choices, labels=labels, mandatory=mandatory))
            elif head == "rule:":
                rule_lines.append(line[len("rule:"):])
            else:
                raise SpaceError(f"unknown directive {head!r}")
        except (ValueError, TypeError) as e:
            raise SpaceError(f"line {lineno}: {e}") from None
    if name is None:
        raise SpaceError("manifest has no 'space' line")
    rules = []
    for body in rule_lines:
        try:
            cond, repair = (s.strip() for s in body.split(";"))
            lhs, rhs = (s.strip() for s in cond.split("=>"))
            when, _, wv = lhs.partition(" in ")
            target, _, av = rhs.partition(" in ")
            key, _, rv = repair.removeprefix("repair").strip().partition("=")
            if key.strip() != target.strip():
                raise SpaceError("repair must set the rule's target")
            rules.append(Rule(
                when.strip(),
                frozenset(_atom(v.strip()) for v in wv.split(",")),
                target.strip(),
                frozenset(_atom(v.strip()) for v in av.split(",")),
                _atom(rv.strip()),
            ))
        except ValueError as e:
            raise SpaceError(f"bad rule {body.strip()!r}: {e}") from None
    return Space(name, tuple(params), tuple(rules))


def load_space(name_or_path) -> Space:
    """Bundled space by name (``"aben"``, ``"cart"``) or a manifest path."""
    p = Path(name_or_path)
    if p.suffix == ".space" or p.exists():
        return parse_space(p.read_text())
    bundled = resources.files("effortune.data.spaces") / f"{name_or_path}.space"
    if not bundled.is_file():
        raise SpaceError(f"no bundled space {name_or_path!r}")
    return parse_space(bundled.read_text())

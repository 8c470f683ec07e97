"""Shared vocabulary: schemas, instances, group/label codes and seeded randomness."""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional, Sequence

import numpy as np

# group codes
UNPROTECTED = 0
PROTECTED = 1
# label codes
NEGATIVE = 0
POSITIVE = 1

NOMINAL = "nominal"
NUMERIC = "numeric"


class SchemaError(ValueError):
    """A value or column does not conform to the stream schema."""


class ConfigError(ValueError):
    """Invalid configuration or parameter value."""


class UndefinedStatisticError(ValueError):
    """A statistic was requested on an empty accumulator."""


def cell_index(group: int, label: int) -> int:
    """Index of the (group, label) fairness cell: u_neg, u_pos, p_neg, p_pos."""
    return 2 * group + label


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str
    domain: tuple = ()

    def __post_init__(self):
        if self.kind not in (NOMINAL, NUMERIC):
            raise SchemaError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == NOMINAL:
            if not self.domain:
                raise SchemaError(f"nominal attribute {self.name!r} has an empty domain")
            if len(set(self.domain)) != len(self.domain):
                raise SchemaError(f"nominal attribute {self.name!r} has duplicate domain values")

    @property
    def is_nominal(self) -> bool:
        return self.kind == NOMINAL

    def encode(self, value: str) -> int:
        try:
            return self._index[value]
        except KeyError:
            raise SchemaError(f"value {value!r} not in domain of {self.name!r}") from None

    def decode(self, index: int) -> str:
        return self.domain[index]

    @property
    def _index(self) -> dict:
        # cached lazily; frozen dataclass so go through __dict__
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {v: i for i, v in enumerate(self.domain)}
            object.__setattr__(self, "_index_cache", idx)
        return idx


@dataclass(frozen=True)
class StreamSchema:
    """Column layout of a discriminated binary stream.

    ``attributes`` lists every column including the class column. The
    feature vector of an :class:`Instance` holds one entry per non-class
    column, in schema order, so the sensitive attribute is part of it.
    """

    attributes: tuple
    sensitive_attribute: str
    sensitive_value: str
    class_attribute: str
    positive_label: str
    _pos: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        if self.sensitive_attribute == self.class_attribute:
            raise SchemaError("sensitive and class attribute must differ")
        pos = {n: i for i, n in enumerate(names)}
        for role, name in (("sensitive", self.sensitive_attribute), ("class", self.class_attribute)):
            if name not in pos:
                raise SchemaError(f"{role} attribute {name!r} is not a column")
        for name, value in ((self.sensitive_attribute, self.sensitive_value),
                            (self.class_attribute, self.positive_label)):
            spec = self.attributes[pos[name]]
            if not spec.is_nominal or len(spec.domain) != 2:
                raise SchemaError(f"attribute {name!r} must be nominal with exactly two values")
            if value not in spec.domain:
                raise SchemaError(f"{value!r} is not in the domain of {name!r}")
        object.__setattr__(self, "_pos", pos)

    @property
    def features(self) -> tuple:
        return tuple(a for a in self.attributes if a.name != self.class_attribute)

    @property
    def n_features(self) -> int:
        return len(self.attributes) - 1

    def feature_index(self, name: str) -> int:
        for i, a in enumerate(self.features):
            if a.name == name:
                return i
        raise SchemaError(f"unknown feature {name!r}")

    @property
    def sensitive_index(self) -> int:
        return self.feature_index(self.sensitive_attribute)

    def column(self, name: str) -> AttributeSpec:
        try:
            return self.attributes[self._pos[name]]
        except KeyError:
            raise SchemaError(f"unknown column {name!r}") from None

    def to_dict(self) -> dict:
        cols = []
        for a in self.attributes:
            col = {"name": a.name, "kind": a.kind}
            if a.is_nominal:
                col["domain"] = list(a.domain)
            cols.append(col)
        return {
            "columns": cols,
            "sensitive_attribute": self.sensitive_attribute,
            "sensitive_value": self.sensitive_value,
            "class_attribute": self.class_attribute,
            "positive_label": self.positive_label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StreamSchema":
        attrs = tuple(
            AttributeSpec(c["name"], c["kind"], tuple(c.get("domain", ()))) for c in d["columns"]
        )
        return cls(attrs, d["sensitive_attribute"], d["sensitive_value"],
                   d["class_attribute"], d["positive_label"])


class Instance(NamedTuple):
    """One stream element.

    ``values`` holds floats for numeric features and domain indices for
    nominal ones; ``None`` marks a missing value.
    """

    values: tuple
    group: int
    label: int
    t: int = 0


def group_of(value: Any, schema: StreamSchema) -> int:
    spec = schema.column(schema.sensitive_attribute)
    if value not in spec.domain:
        raise SchemaError(f"sensitive value {value!r} not in {spec.domain}")
    return PROTECTED if value == schema.sensitive_value else UNPROTECTED


def label_of(value: Any, schema: StreamSchema) -> int:
    spec = schema.column(schema.class_attribute)
    if value not in spec.domain:
        raise SchemaError(f"class value {value!r} not in {spec.domain}")
    return POSITIVE if value == schema.positive_label else NEGATIVE


def validate_instance(inst: Instance, schema: StreamSchema) -> None:
    feats = schema.features
    if len(inst.values) != len(feats):
        raise SchemaError(f"instance has {len(inst.values)} values, schema expects {len(feats)}")
    for v, a in zip(inst.values, feats):
        if v is None:
            continue
        if a.is_nominal and not (isinstance(v, (int, np.integer)) and 0 <= v < len(a.domain)):
            raise SchemaError(f"nominal index {v!r} outside domain of {a.name!r}")
    if inst.group not in (UNPROTECTED, PROTECTED) or inst.label not in (NEGATIVE, POSITIVE):
        raise SchemaError("group and label must be binary codes")


_POISSON_TABLES: dict = {}


def poisson_cdf(lam: float) -> list:
    """Cached cumulative Poisson(lam) table; ``bisect_right(table, u)`` is a draw."""
    table = _POISSON_TABLES.get(lam)
    if table is None:
        table, p, k, acc = [], math.exp(-lam), 0, 0.0
        # stop once the remaining tail is below double precision
        while acc < 1.0 - 1e-16 and k < 1000:
            acc += p
            table.append(acc)
            k += 1
            p *= lam / k
        _POISSON_TABLES[lam] = table
    return table


class RandomSource:
    """Seeded generator with deterministic child derivation.

    Child sources are derived from ``(seed, key)`` through numpy's
    ``SeedSequence`` so parallel consumers never share a stream.
    """

    __slots__ = ("seed", "_rng")

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._rng = random.Random(self.seed)

    def random(self) -> float:
        return self._rng.random()

    def poisson(self, lam: float) -> int:
        # inversion on a cached cdf; exact for the table range
        table = poisson_cdf(lam)
        return bisect.bisect_right(table, self._rng.random())

    def sample(self, population: Sequence, k: int) -> list:
        return self._rng.sample(population, k)

    def spawn(self, key: int) -> "RandomSource":
        ss = np.random.SeedSequence([self.seed & 0xFFFFFFFF, self.seed >> 32, int(key)])
        return RandomSource(int(ss.generate_state(1, np.uint64)[0]))

    def getstate(self):
        return self.seed, self._rng.getstate()

    def setstate(self, state) -> None:
        self.seed, st = state
        self._rng.setstate(st)

    def __getstate__(self):
        return self.getstate()

    def __setstate__(self, state):
        self._rng = random.Random()
        self.setstate(state)

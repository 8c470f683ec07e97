"""Stream ingestion: CSV against a JSON schema, ordering, and synthetic streams."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .core import (
    NOMINAL, NUMERIC, AttributeSpec, ConfigError, Instance, NEGATIVE, POSITIVE, PROTECTED,
    RandomSource, SchemaError, StreamSchema, UNPROTECTED,
)

log = logging.getLogger(__name__)

DATA_DIR_ENV = "FARF_DATA_DIR"


class LoadError(Exception):
    """The dataset could not be read against its schema."""


@dataclass
class DatasetConfig:
    """Where a stream lives and how to read it.

    ``schema`` may leave nominal domains empty; they are then inferred
    from the file in sorted order. ``paths`` are read in sequence and
    concatenated. ``aliases`` maps raw cell text to canonical values per
    column (e.g. ``">50K."`` to ``">50K"`` in the Adult test split).
    """

    paths: list
    schema: dict
    format: str = "csv"
    header: bool = False
    missing_token: str = "?"
    comment_prefix: Optional[str] = None
    order_by: Optional[str] = None
    order_direction: str = "asc"
    strict: bool = False
    aliases: dict = field(default_factory=dict)
    exclude: list = field(default_factory=list)
    base_dir: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.paths, (str, os.PathLike)):
            self.paths = [self.paths]
        self.paths = [str(p) for p in self.paths]
        if self.format != "csv":
            raise ConfigError(f"unsupported format {self.format!r}")
        if self.order_direction not in ("asc", "desc", "as-is"):
            raise ConfigError(f"order_direction must be asc, desc or as-is")
        cols = [c["name"] for c in self.schema["columns"]]
        if self.order_by is not None and self.order_by not in cols:
            raise ConfigError(f"order_by column {self.order_by!r} is not in the schema")
        for name in self.exclude:
            if name not in cols:
                raise ConfigError(f"excluded column {name!r} is not in the schema")
            if name in (self.schema["sensitive_attribute"], self.schema["class_attribute"]):
                raise ConfigError("the sensitive and class columns cannot be excluded")

    @classmethod
    def from_json(cls, path) -> "DatasetConfig":
        path = Path(path)
        with open(path) as fh:
            d = json.load(fh)
        d = dict(d)
        d.pop("description", None)
        if "path" in d:
            d["paths"] = d.pop("path")
        d.setdefault("base_dir", str(path.parent.resolve()))
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "paths": list(self.paths), "schema": self.schema, "format": self.format,
            "header": self.header, "missing_token": self.missing_token,
            "comment_prefix": self.comment_prefix, "order_by": self.order_by,
            "order_direction": self.order_direction, "strict": self.strict,
            "aliases": self.aliases, "exclude": list(self.exclude),
        }

    def resolve(self, p: str, data_dir: Optional[str] = None) -> Path:
        cand = Path(p)
        if cand.is_absolute():
            return cand
        roots = [data_dir, os.environ.get(DATA_DIR_ENV), self.base_dir, os.getcwd(),
                 os.path.join(os.getcwd(), "data")]
        for root in roots:
            if root and (Path(root) / cand).exists():
                return Path(root) / cand
        raise LoadError(f"data file {p!r} not found (searched {[r for r in roots if r]}; "
                        f"set ${DATA_DIR_ENV} or --data-dir)")


@dataclass
class StreamData:
    """Loaded, ordered instances plus their schema and rejected rows."""

    schema: StreamSchema
    instances: list
    rejected: list = field(default_factory=list)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __len__(self) -> int:
        return len(self.instances)

    def __getitem__(self, i):
        return self.instances[i]


def _read_rows(cfg: DatasetConfig, data_dir: Optional[str]):
    n_cols = len(cfg.schema["columns"])
    for p in cfg.paths:
        path = cfg.resolve(p, data_dir)
        with open(path, newline="") as fh:
            reader = csv.reader(fh, skipinitialspace=True)
            first = True
            for lineno, row in enumerate(reader, start=1):
                if not row or all(not c.strip() for c in row):
                    continue
                if cfg.comment_prefix and row[0].startswith(cfg.comment_prefix):
                    continue
                if first and cfg.header:
                    first = False
                    names = [c.strip() for c in row]
                    want = [c["name"] for c in cfg.schema["columns"]]
                    if names != want:
                        raise LoadError(f"{path}: header {names} does not match schema {want}")
                    continue
                first = False
                if len(row) != n_cols:
                    raise LoadError(f"{path}:{lineno}: expected {n_cols} columns, got {len(row)}")
                yield f"{path.name}:{lineno}", [c.strip() for c in row]


def infer_domains(cfg: DatasetConfig, data_dir: Optional[str] = None) -> dict:
    """Schema dict with every empty nominal domain filled from the data (sorted)."""
    cols = cfg.schema["columns"]
    todo = {i for i, c in enumerate(cols) if c["kind"] == NOMINAL and not c.get("domain")}
    seen = {i: set() for i in todo}
    if todo:
        for _, row in _read_rows(cfg, data_dir):
            for i in todo:
                v = cfg.aliases.get(cols[i]["name"], {}).get(row[i], row[i])
                if v != cfg.missing_token:
                    seen[i].add(v)
    out = json.loads(json.dumps(cfg.schema))
    for i in todo:
        out["columns"][i]["domain"] = sorted(seen[i])
    return out


def load_stream(cfg: DatasetConfig, data_dir: Optional[str] = None) -> StreamData:
    schema_dict = infer_domains(cfg, data_dir)
    cols = schema_dict["columns"]
    keep = [i for i, c in enumerate(cols) if c["name"] not in cfg.exclude]
    schema = StreamSchema.from_dict({**schema_dict, "columns": [cols[i] for i in keep]})
    names = [cols[i]["name"] for i in keep]
    sens_col = names.index(schema.sensitive_attribute)
    cls_col = names.index(schema.class_attribute)
    specs = [schema.column(n) for n in names]
    order_raw = [c["name"] for c in cols].index(cfg.order_by) if cfg.order_by else None
    order_numeric = order_raw is not None and cols[order_raw]["kind"] == NUMERIC
    missing = cfg.missing_token

    rows, rejected = [], []
    for where, raw in _read_rows(cfg, data_dir):
        cells = [raw[i] for i in keep]
        cells = [cfg.aliases.get(n, {}).get(v, v) for n, v in zip(names, cells)]
        sv, cv = cells[sens_col], cells[cls_col]
        if sv not in specs[sens_col].domain or cv not in specs[cls_col].domain:
            rejected.append((where, f"unparseable sensitive/class value {sv!r}/{cv!r}"))
            continue
        values = []
        for j, (spec, v) in enumerate(zip(specs, cells)):
            if j == cls_col:
                continue
            if v == missing or v == "":
                values.append(None)
            elif spec.kind == NUMERIC:
                try:
                    x = float(v)
                except ValueError:
                    raise LoadError(f"{where}: column {spec.name!r}: {v!r} is not a number") from None
                values.append(x if math.isfinite(x) else None)
            else:
                idx = spec._index.get(v)
                if idx is None:
                    if cfg.strict:
                        raise LoadError(f"{where}: {v!r} is not declared for column {spec.name!r}")
                    rejected.append((where, f"undeclared value {v!r} in {spec.name!r} read as missing"))
                values.append(idx)
        group = PROTECTED if sv == schema.sensitive_value else UNPROTECTED
        label = POSITIVE if cv == schema.positive_label else NEGATIVE
        key = None
        if order_raw is not None:
            key = raw[order_raw]
            if order_numeric:
                key = float(key) if key != missing else math.inf
        rows.append((key, tuple(values), group, label))

    if cfg.order_by and cfg.order_direction != "as-is":
        # stable: equal keys keep file order
        rows.sort(key=lambda r: r[0], reverse=False)
        if cfg.order_direction == "desc":
            rows = _stable_desc(rows)
    instances = [Instance(v, g, y, t) for t, (_, v, g, y) in enumerate(rows)]
    if rejected:
        log.warning("%d rows rejected or adjusted while loading", len(rejected))
    return StreamData(schema, instances, rejected)


def _stable_desc(rows):
    # group runs of equal keys from an ascending stable sort, reverse the runs only
    runs, cur = [], []
    for r in rows:
        if cur and cur[-1][0] != r[0]:
            runs.append(cur)
            cur = []
        cur.append(r)
    if cur:
        runs.append(cur)
    return [r for run in reversed(runs) for r in run]


def iter_stream(cfg: DatasetConfig, data_dir: Optional[str] = None) -> Iterator[Instance]:
    """Single-pass pull iterator over the loaded stream."""
    yield from load_stream(cfg, data_dir).instances


# --- synthetic streams ------------------------------------------------------------

@dataclass
class Segment:
    """A stationary stretch of a synthetic stream.

    Labels are a noise-free threshold concept on feature ``feature``:
    positive iff ``x >= threshold`` (``x < threshold`` when ``flip``).
    Group-conditional positive rates are realized through the feature
    distribution, so the concept itself never looks at the group.
    """

    length: int
    protected_fraction: float = 0.5
    pos_rate_unprotected: float = 0.5
    pos_rate_protected: float = 0.5
    feature: int = 0
    threshold: float = 0.5
    flip: bool = False

    def validate(self, n_features: int) -> None:
        for name in ("protected_fraction", "pos_rate_unprotected", "pos_rate_protected", "threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"segment {name}={v} outside [0, 1]")
        if self.length < 0:
            raise ConfigError("segment length must be >= 0")
        if not 0 <= self.feature < n_features:
            raise ConfigError("segment feature index out of range")


@dataclass
class SynthSpec:
    segments: Sequence[Segment]
    n_features: int = 3
    seed: int = 0


def synth_schema(n_features: int) -> StreamSchema:
    attrs = [AttributeSpec(f"x{i}", NUMERIC) for i in range(n_features)]
    attrs.append(AttributeSpec("group", NOMINAL, ("unprotected", "protected")))
    attrs.append(AttributeSpec("label", NOMINAL, ("neg", "pos")))
    return StreamSchema(tuple(attrs), "group", "protected", "label", "pos")


def synth_stream(spec: SynthSpec) -> StreamData:
    for s in spec.segments:
        s.validate(spec.n_features)
    schema = synth_schema(spec.n_features)
    rng = RandomSource(spec.seed)
    rand = rng.random
    out = []
    t = 0
    for seg in spec.segments:
        c, th = seg.feature, seg.threshold
        for _ in range(seg.length):
            group = PROTECTED if rand() < seg.protected_fraction else UNPROTECTED
            rate = seg.pos_rate_protected if group == PROTECTED else seg.pos_rate_unprotected
            label = POSITIVE if rand() < rate else NEGATIVE
            xs = [rand() for _ in range(spec.n_features)]
            u = rand()
            # place the concept feature on the side of the threshold that yields ``label``
            upper = (label == POSITIVE) != seg.flip
            xs[c] = th + u * (1.0 - th) if upper else u * th
            if not upper and xs[c] >= th:
                xs[c] = math.nextafter(th, -math.inf)
            if upper and xs[c] < th:
                xs[c] = th
            values = tuple(xs) + (group,)
            out.append(Instance(values, group, label, t))
            t += 1
    return StreamData(schema, out)

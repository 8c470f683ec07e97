"""Incremental Hoeffding tree split on fair information gain.

Every leaf keeps weighted (value x group x class) counts for a random
subset of candidate attributes. Split candidates are scored with
information gain multiplied by the fairness gain of the partition, and
the tree never prunes.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfigError, Instance, NEGATIVE, POSITIVE, RandomSource, StreamSchema

FG_ZERO_TOL = 1e-12


@dataclass
class SplitConfig:
    delta: float = 1e-7
    tie_threshold: float = 0.05
    grace_period: float = 200.0
    subspace_size: Optional[int] = None  # None -> ceil(sqrt(#candidates))
    numeric_bins: int = 32
    leaf_smoothing: float = 1.0
    use_fairness_gain: bool = True
    exclude_sensitive: bool = False

    def validate(self, n_candidates: Optional[int] = None) -> None:
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.tie_threshold < 0:
            raise ConfigError("tie_threshold must be >= 0")
        if self.grace_period < 1:
            raise ConfigError("grace_period must be >= 1")
        if self.numeric_bins < 2 or self.numeric_bins % 2:
            raise ConfigError("numeric_bins must be an even number >= 2")
        if self.leaf_smoothing < 0:
            raise ConfigError("leaf_smoothing must be >= 0")
        if self.subspace_size is not None:
            if self.subspace_size < 1 or (n_candidates is not None and self.subspace_size > n_candidates):
                raise ConfigError("subspace_size must lie in [1, #features]")


# --- split scoring -----------------------------------------------------------

def entropy(pos: float, neg: float) -> float:
    """Binary Shannon entropy in bits."""
    n = pos + neg
    if n <= 0:
        return 0.0
    h = 0.0
    for c in (pos, neg):
        if c > 0:
            p = c / n
            h -= p * math.log2(p)
    return h


def _entropy_vec(pos, neg):
    n = pos + neg
    with np.errstate(divide="ignore", invalid="ignore"):
        pp = np.where(n > 0, pos / n, 0.0)
        pn = np.where(n > 0, neg / n, 0.0)
        h = -(np.where(pp > 0, pp * np.log2(np.where(pp > 0, pp, 1.0)), 0.0)
              + np.where(pn > 0, pn * np.log2(np.where(pn > 0, pn, 1.0)), 0.0))
    return h


def _partition_disc(cells):
    # cells[..., :] = (u_neg, u_pos, p_neg, p_pos); zero when a group is absent
    nu = cells[..., 0] + cells[..., 1]
    np_ = cells[..., 2] + cells[..., 3]
    both = (nu > 0) & (np_ > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(both, cells[..., 1] / np.where(nu > 0, nu, 1.0)
                     - cells[..., 3] / np.where(np_ > 0, np_, 1.0), 0.0)
    return d


def split_scores(parts, use_fairness_gain: bool = True):
    """Score candidate splits.

    ``parts`` has shape (n_candidates, n_partitions, 4) holding the
    (u_neg, u_pos, p_neg, p_pos) weights of each partition. Returns the
    arrays (ig, fg, fig), one entry per candidate.
    """
    parts = np.asarray(parts, dtype=float)
    if parts.ndim == 2:
        parts = parts[None]
    pos = parts[..., 1] + parts[..., 3]
    neg = parts[..., 0] + parts[..., 2]
    n_part = pos + neg
    n = n_part.sum(axis=1)
    parent = parts.sum(axis=1)
    h_parent = _entropy_vec(parent[:, 1] + parent[:, 3], parent[:, 0] + parent[:, 2])
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(n[:, None] > 0, n_part / np.where(n > 0, n, 1.0)[:, None], 0.0)
    ig = h_parent - (frac * _entropy_vec(pos, neg)).sum(axis=1)
    nonempty = (n_part > 0).sum(axis=1)
    ig = np.where(nonempty >= 2, np.maximum(ig, 0.0), 0.0)
    if use_fairness_gain:
        fg = np.abs(_partition_disc(parent)) - np.abs(_partition_disc(parts)).sum(axis=1)
    else:
        fg = np.zeros_like(ig)
    fig_ = np.where(np.abs(fg) < FG_ZERO_TOL, ig, ig * fg)
    return ig, fg, fig_


def fig(ig: float, fg: float) -> float:
    if ig < 0:
        raise ValueError("information gain must be non-negative")
    return ig if abs(fg) < FG_ZERO_TOL else ig * fg


def hoeffding_bound(value_range: float, delta: float, n: float) -> float:
    if n <= 0:
        raise ValueError("hoeffding bound needs n > 0")
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


# --- split specs ---------------------------------------------------------------

@dataclass(frozen=True)
class NominalSplit:
    """Multiway split: one branch per observed value."""


@dataclass(frozen=True)
class NumericSplit:
    threshold: float  # left branch takes x < threshold


# --- per-leaf statistics -------------------------------------------------------

class NumericStats:
    """Group/class counts over a numeric attribute.

    Distinct values are kept exactly until there are more than ``bins``
    of them; then counts move into an equal-width histogram whose range
    doubles (merging bin pairs) when a value falls outside it. Bins are
    half-open ``[edge_i, edge_{i+1})``, so a threshold at an edge
    partitions raw values and bins identically.
    """

    __slots__ = ("bins", "exact", "edges", "counts")

    def __init__(self, bins: int = 32):
        self.bins = bins
        self.exact = {}
        self.edges = None
        self.counts = None

    def add(self, value: float, cell: int, weight: float) -> None:
        exact = self.exact
        if exact is not None:
            c = exact.get(value)
            if c is None:
                c = exact[value] = [0.0, 0.0, 0.0, 0.0]
                c[cell] += weight
                if len(exact) > self.bins:
                    self._to_histogram()
                return
            c[cell] += weight
            return
        edges = self.edges
        if value < edges[0] or value >= edges[-1]:
            self._expand(value)
            edges = self.edges
        b = bisect.bisect_right(edges, value) - 1
        self.counts[4 * b + cell] += weight

    def _to_histogram(self) -> None:
        exact, self.exact = self.exact, None
        lo, hi = min(exact), max(exact)
        width = (hi - lo) / self.bins
        edges = [lo + k * width for k in range(self.bins + 1)]
        edges[0] = lo
        if edges[-1] <= hi:
            edges[-1] = math.nextafter(hi, math.inf)
        self.edges = edges
        self.counts = [0.0] * (4 * self.bins)
        for v, c in exact.items():
            b = bisect.bisect_right(edges, v) - 1
            for j in range(4):
                self.counts[4 * b + j] += c[j]

    def _expand(self, value: float) -> None:
        half = self.bins // 2
        while value < self.edges[0] or value >= self.edges[-1]:
            edges, counts = self.edges, self.counts
            merged = [counts[8 * i + j] + counts[8 * i + 4 + j] for i in range(half) for j in range(4)]
            kept = edges[::2]
            step = kept[1] - kept[0]
            if value < edges[0]:
                low = [kept[0] - step * j for j in range(half, 0, -1)]
                self.edges = low + kept
                self.counts = [0.0] * (4 * half) + merged
            else:
                step = kept[-1] - kept[-2]
                high = [kept[-1] + step * j for j in range(1, half + 1)]
                self.edges = kept + high
                self.counts = merged + [0.0] * (4 * half)

    def rows(self):
        """(thresholds, per-bucket cells) with buckets ordered by value."""
        if self.exact is not None:
            keys = sorted(self.exact)
            return keys[1:], np.array([self.exact[k] for k in keys], dtype=float).reshape(-1, 4)
        return self.edges[1:-1], np.array(self.counts, dtype=float).reshape(-1, 4)

    def candidate_parts(self):
        thresholds, rows = self.rows()
        if len(rows) < 2:
            return [], np.zeros((0, 2, 4))
        left = np.cumsum(rows, axis=0)[:-1]
        right = np.cumsum(rows[::-1], axis=0)[::-1][1:]
        return thresholds, np.stack([left, right], axis=1)

    def partition(self, threshold: float) -> np.ndarray:
        thresholds, rows = self.rows()
        keys = sorted(self.exact) if self.exact is not None else self.edges[:-1]
        out = np.zeros((2, 4))
        for k, row in zip(keys, rows):
            # bucket starting at k lies wholly on one side of an admissible threshold
            out[0 if k < threshold else 1] += row
        return out


class LeafStats:
    """Statistics held by one leaf."""

    __slots__ = ("cells", "attrs", "nominal", "numeric", "used", "seen", "n_seen", "last_attempt",
                 "neg", "pos", "depth", "kind")

    def __init__(self, attrs, schema_features, bins, used=frozenset(), prior=(0.0, 0.0), depth=0):
        self.kind = 0
        self.cells = [0.0, 0.0, 0.0, 0.0]
        self.attrs = tuple(attrs)
        self.nominal = []
        self.numeric = []
        for a in self.attrs:
            spec = schema_features[a]
            if spec.is_nominal:
                self.nominal.append((a, [0.0] * (4 * len(spec.domain))))
            else:
                self.numeric.append((a, NumericStats(bins)))
        self.used = used
        self.seen = 0.0
        # instances (not weight) drive the grace period
        self.n_seen = 0
        self.last_attempt = 0
        self.neg, self.pos = float(prior[0]), float(prior[1])
        self.depth = depth

    def counts(self) -> tuple:
        """(u_pos, u_neg, p_pos, p_neg) over everything routed to this leaf."""
        c = self.cells
        return c[1], c[0], c[3], c[2]

    def stats_for(self, attribute: int):
        for a, flat in self.nominal:
            if a == attribute:
                return flat
        for a, hist in self.numeric:
            if a == attribute:
                return hist
        raise ValueError(f"attribute {attribute} is not tracked by this leaf")

    def partitions(self, attribute: int, spec) -> np.ndarray:
        st = self.stats_for(attribute)
        if isinstance(st, NumericStats):
            if not isinstance(spec, NumericSplit):
                raise ValueError("numeric attribute needs a NumericSplit")
            return st.partition(spec.threshold)
        if not isinstance(spec, NominalSplit):
            raise ValueError("nominal attribute needs a NominalSplit")
        return np.array(st, dtype=float).reshape(-1, 4)


def info_gain(leaf: LeafStats, attribute: int, spec) -> float:
    return float(split_scores(leaf.partitions(attribute, spec))[0][0])


def fairness_gain(leaf: LeafStats, attribute: int, spec) -> float:
    return float(split_scores(leaf.partitions(attribute, spec))[1][0])


# --- tree nodes ----------------------------------------------------------------

class _NumericNode:
    __slots__ = ("kind", "attr", "threshold", "left", "right", "missing", "depth")

    def __init__(self, attr, threshold, left, right, missing, depth):
        self.kind = 1
        self.attr = attr
        self.threshold = threshold
        self.left, self.right, self.missing = left, right, missing
        self.depth = depth


class _NominalNode:
    __slots__ = ("kind", "attr", "children", "missing", "depth", "used")

    def __init__(self, attr, children, missing, depth, used):
        self.kind = 2
        self.used = used  # nominal attributes already tested, for new children
        self.attr = attr
        self.children = children
        self.missing = missing
        self.depth = depth


@dataclass
class SplitDecision:
    attribute: int
    spec: object
    ig: float
    fg: float
    fig: float
    parts: np.ndarray


class FairTree:
    """Hoeffding tree scored by fair information gain."""

    def __init__(self, schema: StreamSchema, config: Optional[SplitConfig] = None,
                 rng: Optional[RandomSource] = None):
        self.schema = schema
        self.config = config or SplitConfig()
        self.rng = rng if rng is not None else RandomSource(0)
        self._features = schema.features
        sens = schema.sensitive_index
        self._candidates = tuple(
            i for i in range(len(self._features)) if not (self.config.exclude_sensitive and i == sens)
        )
        self.config.validate(len(self._candidates))
        self.weight_seen = 0.0
        self.n_splits = 0
        self.root = self._new_leaf(frozenset(), (0.0, 0.0), 0)

    # structure

    def _new_leaf(self, used, prior, depth) -> LeafStats:
        pool = [a for a in self._candidates if a not in used]
        size = self.config.subspace_size or math.ceil(math.sqrt(len(self._candidates)))
        size = min(size, len(pool))
        attrs = sorted(self.rng.sample(pool, size)) if size else []
        return LeafStats(attrs, self._features, self.config.numeric_bins, used, prior, depth)

    def _sort(self, values, grow: bool):
        node = self.root
        while node.kind:
            v = values[node.attr]
            if node.kind == 1:
                if v is None:
                    node = node.missing
                else:
                    node = node.left if v < node.threshold else node.right
            else:
                if v is None:
                    node = node.missing
                    continue
                child = node.children.get(v)
                if child is None:
                    if not grow:
                        node = node.missing
                        continue
                    child = self._new_leaf(node.used, (0.0, 0.0), node.depth + 1)
                    node.children[v] = child
                node = child
        return node

    def _path_to(self, target):
        stack = [(self.root, [])]
        while stack:
            node, path = stack.pop()
            path = path + [node]
            if node is target:
                return path
            if node.kind == 1:
                stack.extend([(node.left, path), (node.right, path)])
            elif node.kind == 2:
                stack.extend((c, path) for c in node.children.values())
        return []

    # learning

    def learn_one(self, inst: Instance, weight: float = 1.0) -> None:
        if weight <= 0:
            if weight < 0:
                raise ValueError("negative weight")
            return
        values = inst.values
        leaf = self._sort(values, True)
        cell = 2 * inst.group + inst.label
        leaf.cells[cell] += weight
        if inst.label:
            leaf.pos += weight
        else:
            leaf.neg += weight
        for a, flat in leaf.nominal:
            v = values[a]
            if v is not None:
                flat[4 * v + cell] += weight
        for a, hist in leaf.numeric:
            v = values[a]
            if v is not None:
                hist.add(v, cell, weight)
        self.weight_seen += weight
        leaf.seen += weight
        leaf.n_seen += 1
        if leaf.attrs and leaf.n_seen - leaf.last_attempt >= self.config.grace_period:
            leaf.last_attempt = leaf.n_seen
            decision = self.try_split(leaf)
            if decision is not None:
                self._apply_split(leaf, decision)

    def candidate_splits(self, leaf: LeafStats) -> list:
        """Best split per tracked attribute, in descending FIG order."""
        out = []
        use_fg = self.config.use_fairness_gain
        for a, flat in leaf.nominal:
            parts = np.array(flat, dtype=float).reshape(-1, 4)
            ig, fg, fg_ = split_scores(parts, use_fg)
            out.append(SplitDecision(a, NominalSplit(), float(ig[0]), float(fg[0]), float(fg_[0]), parts))
        for a, hist in leaf.numeric:
            thresholds, parts = hist.candidate_parts()
            if len(thresholds) == 0:
                continue
            ig, fg, fg_ = split_scores(parts, use_fg)
            j = int(np.argmax(fg_))
            out.append(SplitDecision(a, NumericSplit(float(thresholds[j])), float(ig[j]),
                                     float(fg[j]), float(fg_[j]), parts[j]))
        out.sort(key=lambda d: -d.fig)
        return out

    def try_split(self, leaf: LeafStats) -> Optional[SplitDecision]:
        ranked = self.candidate_splits(leaf)
        if not ranked:
            return None
        best = ranked[0]
        second = ranked[1].fig if len(ranked) > 1 else 0.0
        if best.fig <= 0:
            return None
        n = leaf.seen
        eps = hoeffding_bound(1.0, self.config.delta, n)
        if best.fig - second > eps or eps < self.config.tie_threshold:
            return best
        return None

    def _apply_split(self, leaf: LeafStats, d: SplitDecision) -> None:
        depth = leaf.depth + 1
        parts = d.parts
        if isinstance(d.spec, NumericSplit):
            kids = []
            for p in parts:
                kids.append(self._new_leaf(leaf.used, (p[0] + p[2], p[1] + p[3]), depth))
            heavy = kids[0] if parts[0].sum() >= parts[1].sum() else kids[1]
            node = _NumericNode(d.attribute, d.spec.threshold, kids[0], kids[1], heavy, leaf.depth)
        else:
            used = leaf.used | {d.attribute}
            children = {}
            heavy, heavy_w = None, -1.0
            for v, p in enumerate(parts):
                w = p.sum()
                if w <= 0:
                    continue
                child = self._new_leaf(used, (p[0] + p[2], p[1] + p[3]), depth)
                children[v] = child
                if w > heavy_w:
                    heavy, heavy_w = child, w
            node = _NominalNode(d.attribute, children, heavy, leaf.depth, used)
        self._replace(leaf, node)
        self.n_splits += 1

    def _replace(self, old, new) -> None:
        if self.root is old:
            self.root = new
            return
        path = self._path_to(old)
        parent = path[-2]
        if parent.kind == 1:
            if parent.left is old:
                parent.left = new
            if parent.right is old:
                parent.right = new
        else:
            for k, c in parent.children.items():
                if c is old:
                    parent.children[k] = new
        if parent.missing is old:
            parent.missing = new

    # prediction

    def leaf_for(self, inst: Instance) -> LeafStats:
        return self._sort(inst.values, False)

    def predict(self, inst: Instance):
        """(label, (score_negative, score_positive)) with Laplace smoothing."""
        leaf = self._sort(inst.values, False)
        s = self.config.leaf_smoothing
        tot = leaf.neg + leaf.pos + 2 * s
        if tot <= 0:
            return NEGATIVE, (0.5, 0.5)
        sn, sp = (leaf.neg + s) / tot, (leaf.pos + s) / tot
        return (POSITIVE if sp > sn else NEGATIVE), (sn, sp)

    def predict_one(self, inst: Instance) -> int:
        node = self.root
        values = inst.values
        while node.kind:
            v = values[node.attr]
            if v is None:
                node = node.missing
            elif node.kind == 1:
                node = node.left if v < node.threshold else node.right
            else:
                node = node.children.get(v) or node.missing
        return POSITIVE if node.pos > node.neg else NEGATIVE

    # introspection

    def _walk(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.kind == 1:
                stack.extend([node.right, node.left])
            elif node.kind == 2:
                stack.extend(reversed(list(node.children.values())))

    @property
    def n_nodes(self) -> int:
        return sum(1 for _ in self._walk())

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self._walk() if n.kind == 0)

    @property
    def depth(self) -> int:
        return max(n.depth for n in self._walk())

    def dump(self) -> str:
        """Indented text rendering of the tree with leaf counts."""
        lines = []
        feats = self._features

        def rec(node, indent, label):
            pad = "  " * indent
            if node.kind == 0:
                c = node.cells
                lines.append(f"{pad}{label}leaf u+={c[1]:g} u-={c[0]:g} s+={c[3]:g} s-={c[2]:g} "
                             f"pred={'+' if node.pos > node.neg else '-'}")
                return
            name = feats[node.attr].name
            if node.kind == 1:
                lines.append(f"{pad}{label}split {name} < {node.threshold:g}")
                rec(node.left, indent + 1, "[yes] ")
                rec(node.right, indent + 1, "[no] ")
            else:
                lines.append(f"{pad}{label}split {name}")
                for v, child in sorted(node.children.items()):
                    rec(child, indent + 1, f"[{feats[node.attr].decode(v)}] ")

        rec(self.root, 0, "")
        return "\n".join(lines)

"""Fair and adaptive random forest: fair trees, standby learners, fairness-weighted vote."""

from __future__ import annotations

import pickle
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    ConfigError, Instance, NEGATIVE, POSITIVE, RandomSource, StreamSchema, poisson_cdf,
)
from .drift import Adwin
from .metrics import DiscTracker
from .sampling import SamplingPolicy
from .tree import FairTree, SplitConfig

SNAPSHOT_HEADER = b"FARF-SNAPSHOT 1\n"

FAIRNESS = "fairness"
ACCURACY = "accuracy"


@dataclass
class StepReport:
    prediction: int
    score: tuple
    multiplier: float
    drifts: list = field(default_factory=list)
    standbys: list = field(default_factory=list)
    replacements: list = field(default_factory=list)


class EnsembleMember:
    __slots__ = ("index", "tree", "standby", "acc_detector", "fair_detectors", "member_disc",
                 "standby_disc", "rng", "generation", "hits", "seen", "standby_hits", "standby_seen")

    def __init__(self, index: int, tree: FairTree, rng: RandomSource, delta_acc: float,
                 delta_fair: float, fairness_detectors: bool):
        self.index = index
        self.tree = tree
        self.standby: Optional[FairTree] = None
        self.acc_detector = Adwin(delta_acc)
        # one detector per group, fed the member's positive-prediction indicator
        self.fair_detectors = (Adwin(delta_fair), Adwin(delta_fair)) if fairness_detectors else None
        self.member_disc = DiscTracker()
        self.standby_disc: Optional[DiscTracker] = None
        self.rng = rng
        self.generation = 0
        self.hits = self.seen = 0.0
        self.standby_hits = self.standby_seen = 0.0

    def reset_detectors(self) -> None:
        self.acc_detector.reset()
        if self.fair_detectors is not None:
            for d in self.fair_detectors:
                d.reset()


class FarfEnsemble:
    """M fair Hoeffding trees trained on fairness-aware Poisson weights.

    ``predict_one`` followed by ``learn_one`` on the same instance is the
    prequential step; member predictions made by ``predict_one`` are
    reused by ``learn_one`` so every decision logged for ``x_t`` comes
    before any training on ``x_t``.
    """

    def __init__(self, schema: StreamSchema, n_members: int = 10,
                 policy: Optional[SamplingPolicy] = None, split_config: Optional[SplitConfig] = None,
                 seed: int = 0, delta_acc: float = 0.002, delta_fair: float = 0.002,
                 fairness_detectors: bool = True, vote_floor: float = 0.01,
                 criterion: str = FAIRNESS, disc_source: str = "prediction",
                 acc_trigger: str = "degrade"):
        if n_members < 1:
            raise ConfigError("ensemble needs at least one member")
        if criterion not in (FAIRNESS, ACCURACY):
            raise ConfigError(f"unknown replacement criterion {criterion!r}")
        if not 0 < vote_floor <= 1:
            raise ConfigError("vote_floor must lie in (0, 1]")
        self.schema = schema
        self.policy = policy or SamplingPolicy()
        self.split_config = split_config or SplitConfig()
        self.seed = seed
        self.delta_acc = delta_acc
        self.delta_fair = delta_fair
        self.fairness_detectors = fairness_detectors
        self.vote_floor = vote_floor
        self.criterion = criterion
        if disc_source not in ("prediction", "label"):
            raise ConfigError(f"unknown disc source {disc_source!r}")
        self.disc_source = disc_source
        if acc_trigger not in ("degrade", "any"):
            raise ConfigError(f"unknown accuracy trigger {acc_trigger!r}")
        # "degrade": an accuracy cut only counts when the window mean fell
        self.acc_trigger = acc_trigger
        self.global_disc = DiscTracker(from_labels=disc_source == "label")
        self._root_rng = RandomSource(seed)
        self.members = []
        for i in range(n_members):
            rng = self._root_rng.spawn(i)
            tree = FairTree(schema, self.split_config, self._tree_rng(i, 0))
            self.members.append(EnsembleMember(i, tree, rng, delta_acc, delta_fair, fairness_detectors))
        self._cache = None
        self.n_seen = 0

    def _tree_rng(self, index: int, generation: int) -> RandomSource:
        return self._root_rng.spawn(1_000_003 * (generation + 1) + index)

    @property
    def n_members(self) -> int:
        return len(self.members)

    # voting

    def vote_weight(self, member: EnsembleMember) -> float:
        if self.criterion == ACCURACY:
            w = member.hits / member.seen if member.seen else 1.0
        else:
            w = 1.0 - abs(member.member_disc.value)
        return max(self.vote_floor, w)

    def _member_predictions(self, inst: Instance) -> tuple:
        """(member predictions, (label, score)) for ``inst``, computed once per instance."""
        cache = self._cache
        if cache is not None and cache[0] is inst:
            return cache[1], cache[2]
        preds = [m.tree.predict_one(inst) for m in self.members]
        vote = self._vote(preds)
        self._cache = (inst, preds, vote)
        return preds, vote

    def _vote(self, preds) -> tuple:
        pos = neg = 0.0
        floor = self.vote_floor
        by_fairness = self.criterion == FAIRNESS
        for m, p in zip(self.members, preds):
            if by_fairness:
                w = 1.0 - abs(m.member_disc.value)
                if w < floor:
                    w = floor
            else:
                w = self.vote_weight(m)
            if p == POSITIVE:
                pos += w
            else:
                neg += w
        return (POSITIVE if pos > neg else NEGATIVE), (neg, pos)

    def predict(self, inst: Instance) -> tuple:
        return self._member_predictions(inst)[1]

    def predict_one(self, inst: Instance) -> int:
        return self._member_predictions(inst)[1][0]

    # learning

    def learn_one(self, inst: Instance) -> StepReport:
        preds, (label, score) = self._member_predictions(inst)
        group, truth = inst.group, inst.label
        self.global_disc.update(group, truth if self.global_disc.from_labels else label)
        mult = self.policy.multiplier(group, truth, self.global_disc.value)
        report = StepReport(label, score, mult)
        table = poisson_cdf(self.policy.lam)
        by_accuracy = self.criterion == ACCURACY
        any_shift = self.acc_trigger == "any"
        base = 2 * group

        for m, p in zip(self.members, preds):
            correct = p == truth
            m.member_disc.cells[base + p] += 1.0
            m.seen += 1.0
            if correct:
                m.hits += 1.0
            acc = m.acc_detector
            fired = acc.add(1.0 if correct else 0.0) and (any_shift or acc.last_shift < 0)
            if m.fair_detectors is not None:
                fired = m.fair_detectors[group].add(float(p)) or fired
            if m.standby is not None:
                sp = m.standby.predict_one(inst)
                m.standby_disc.cells[base + sp] += 1.0
                m.standby_seen += 1.0
                if sp == truth:
                    m.standby_hits += 1.0
            w = mult * bisect_right(table, m.rng.random())
            if w > 0:
                m.tree.learn_one(inst, w)
            if fired:
                report.drifts.append(m.index)
                if m.standby is None:
                    m.generation += 1
                    m.standby = FairTree(self.schema, self.split_config,
                                         self._tree_rng(m.index, m.generation))
                    m.standby_disc = DiscTracker()
                    m.standby_hits = m.standby_seen = 0.0
                    report.standbys.append(m.index)
                elif self._standby_wins(m, by_accuracy):
                    m.tree = m.standby
                    m.standby = None
                    m.standby_disc = None
                    m.member_disc = DiscTracker()
                    m.hits = m.seen = 0.0
                    m.reset_detectors()
                    report.replacements.append(m.index)
            if m.standby is not None and w > 0:
                m.standby.learn_one(inst, w)
        self.n_seen += 1
        self._cache = None
        return report

    @staticmethod
    def _standby_wins(m: EnsembleMember, by_accuracy: bool) -> bool:
        if by_accuracy:
            err = 1.0 - (m.hits / m.seen if m.seen else 1.0)
            err_s = 1.0 - (m.standby_hits / m.standby_seen if m.standby_seen else 0.0)
            return err > err_s
        return abs(m.member_disc.value) > abs(m.standby_disc.value)

    # persistence

    def snapshot(self) -> bytes:
        self._cache = None
        return SNAPSHOT_HEADER + pickle.dumps(self, protocol=4)

    @classmethod
    def restore(cls, blob: bytes) -> "FarfEnsemble":
        if not blob.startswith(SNAPSHOT_HEADER):
            raise ValueError("not a FARF snapshot (bad header)")
        obj = pickle.loads(blob[len(SNAPSHOT_HEADER):])
        if not isinstance(obj, cls):
            raise ValueError("snapshot does not hold a FarfEnsemble")
        return obj

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.snapshot())

    @classmethod
    def load(cls, path) -> "FarfEnsemble":
        with open(path, "rb") as fh:
            return cls.restore(fh.read())


class HoeffdingTreeLearner:
    """Single-tree baseline: plain information gain, unit weights."""

    def __init__(self, schema: StreamSchema, split_config: Optional[SplitConfig] = None, seed: int = 0):
        cfg = split_config or SplitConfig()
        cfg = SplitConfig(**{**cfg.__dict__, "use_fairness_gain": False, "subspace_size": None})
        n_cand = len(schema.features) - (1 if cfg.exclude_sensitive else 0)
        cfg.subspace_size = n_cand
        self.tree = FairTree(schema, cfg, RandomSource(seed))

    def predict_one(self, inst: Instance) -> int:
        return self.tree.predict_one(inst)

    def learn_one(self, inst: Instance):
        self.tree.learn_one(inst, 1.0)
        return None

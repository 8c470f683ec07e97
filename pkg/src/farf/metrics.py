"""Accumulated statistical parity, accuracy and kappa trackers (O(1) updates)."""

from __future__ import annotations

from dataclasses import dataclass

from .core import POSITIVE, PROTECTED, UndefinedStatisticError


@dataclass
class GroupCounts:
    u_pos: float = 0.0
    u_neg: float = 0.0
    p_pos: float = 0.0
    p_neg: float = 0.0

    @property
    def total(self) -> float:
        return self.u_pos + self.u_neg + self.p_pos + self.p_neg

    def add(self, group: int, outcome: int, weight: float = 1.0) -> None:
        if weight < 0:
            raise ValueError(f"negative weight {weight}")
        if group == PROTECTED:
            if outcome == POSITIVE:
                self.p_pos += weight
            else:
                self.p_neg += weight
        elif outcome == POSITIVE:
            self.u_pos += weight
        else:
            self.u_neg += weight

    def cells(self) -> tuple:
        return self.u_neg, self.u_pos, self.p_neg, self.p_pos


def disc_cells(u_pos: float, u_neg: float, p_pos: float, p_neg: float) -> float:
    """Positive rate of the unprotected group minus that of the protected group.

    A group with no members contributes a rate of 0.
    """
    nu = u_pos + u_neg
    np_ = p_pos + p_neg
    ru = u_pos / nu if nu > 0 else 0.0
    rp = p_pos / np_ if np_ > 0 else 0.0
    return ru - rp


def disc(counts: GroupCounts) -> float:
    return disc_cells(counts.u_pos, counts.u_neg, counts.p_pos, counts.p_neg)


class DiscTracker:
    """Streaming statistical-parity gap.

    By default the outcome fed to :meth:`update` is the model decision;
    with ``from_labels=True`` the tracker is meant to be fed ground truth
    and measures bias in the data itself. The arithmetic is identical.
    """

    __slots__ = ("cells", "from_labels")

    def __init__(self, from_labels: bool = False):
        # (u_neg, u_pos, p_neg, p_pos), indexed by 2 * group + outcome
        self.cells = [0.0, 0.0, 0.0, 0.0]
        self.from_labels = from_labels

    def update(self, group: int, outcome: int, weight: float = 1.0) -> None:
        if weight < 0:
            raise ValueError(f"negative weight {weight}")
        self.cells[2 * (group == PROTECTED) + (outcome == POSITIVE)] += weight

    @property
    def counts(self) -> GroupCounts:
        c = self.cells
        return GroupCounts(c[1], c[0], c[3], c[2])

    @property
    def value(self) -> float:
        un, up, pn, pp = self.cells
        nu, np_ = un + up, pn + pp
        return (up / nu if nu > 0 else 0.0) - (pp / np_ if np_ > 0 else 0.0)

    def reset(self) -> None:
        self.cells = [0.0, 0.0, 0.0, 0.0]


def update_disc(tracker: DiscTracker, group: int, outcome: int, weight: float = 1.0) -> None:
    tracker.update(group, outcome, weight)


class ConfusionTracker:
    __slots__ = ("tp", "fp", "tn", "fn")

    def __init__(self):
        self.tp = self.fp = self.tn = self.fn = 0.0

    def update(self, y_true: int, y_pred: int, weight: float = 1.0) -> None:
        if weight < 0:
            raise ValueError(f"negative weight {weight}")
        if y_true == POSITIVE:
            if y_pred == POSITIVE:
                self.tp += weight
            else:
                self.fn += weight
        elif y_pred == POSITIVE:
            self.fp += weight
        else:
            self.tn += weight

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        n = self.total
        if n <= 0:
            raise UndefinedStatisticError("accuracy of an empty confusion matrix")
        return (self.tp + self.tn) / n

    @property
    def kappa(self) -> float:
        return kappa(self)

    def reset(self) -> None:
        self.tp = self.fp = self.tn = self.fn = 0.0


def kappa(conf: ConfusionTracker) -> float:
    """Cohen's kappa of the binary confusion matrix; 0 when chance agreement is 1."""
    n = conf.total
    if n <= 0:
        raise UndefinedStatisticError("kappa of an empty confusion matrix")
    p_o = (conf.tp + conf.tn) / n
    p_e = ((conf.tp + conf.fp) * (conf.tp + conf.fn) + (conf.tn + conf.fn) * (conf.tn + conf.fp)) / (n * n)
    if p_e >= 1.0:
        return 0.0
    return (p_o - p_e) / (1.0 - p_e)


def reset(tracker) -> None:
    tracker.reset()

"""Prequential (test-then-train) evaluation, alpha sweeps and sampling ablations."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .core import ConfigError
from .dataio import DatasetConfig, Segment, StreamData, SynthSpec, load_stream, synth_stream
from .ensemble import FAIRNESS, FarfEnsemble, HoeffdingTreeLearner
from .metrics import ConfusionTracker, DiscTracker
from .sampling import CUSTOM, FAIR, OVER_AND_UNDER, OVERSAMPLE, PLAIN, SamplingPolicy
from .tree import SplitConfig

log = logging.getLogger(__name__)

LEARNERS = ("farf", "ht", "rf")
DEFAULT_ALPHAS = (0.3, 0.6, 0.9, 1.2, 1.5)
PRESETS = ("adult", "census")


@dataclass
class RunConfig:
    learner: str = "farf"
    data: Optional[str] = None
    data_dir: Optional[str] = None
    seed: int = 0
    window: int = 1000
    alpha: Optional[float] = None
    mode: str = FAIR
    m: int = 10
    delta: float = 1e-7
    tie: float = 0.05
    grace: float = 200.0
    bins: int = 32
    drift_delta: float = 0.002
    fairness_detectors: bool = True
    criterion: str = FAIRNESS
    out: Optional[str] = None
    dump_predictions: bool = False
    plot: bool = False

    def validate(self) -> None:
        if self.learner not in LEARNERS:
            raise ConfigError(f"learner must be one of {LEARNERS}")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.m < 1:
            raise ConfigError("ensemble size must be >= 1")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        self.policy()
        self.split_config().validate()

    def policy(self) -> SamplingPolicy:
        # an explicit alpha selects the custom weighting
        if self.alpha is not None:
            return SamplingPolicy(CUSTOM, alpha=self.alpha)
        return SamplingPolicy(self.mode)

    def split_config(self) -> SplitConfig:
        return SplitConfig(delta=self.delta, tie_threshold=self.tie, grace_period=self.grace,
                           numeric_bins=self.bins)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)


@dataclass
class PrequentialLog:
    windows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    predictions: Optional[list] = None


def build_learner(cfg: RunConfig, schema):
    if cfg.learner == "ht":
        return HoeffdingTreeLearner(schema, cfg.split_config(), seed=cfg.seed)
    if cfg.learner == "rf":
        return FarfEnsemble(schema, cfg.m, SamplingPolicy(PLAIN), cfg.split_config(), seed=cfg.seed,
                            delta_acc=cfg.drift_delta, delta_fair=cfg.drift_delta,
                            fairness_detectors=False, criterion=cfg.criterion)
    return FarfEnsemble(schema, cfg.m, cfg.policy(), cfg.split_config(), seed=cfg.seed,
                        delta_acc=cfg.drift_delta, delta_fair=cfg.drift_delta,
                        fairness_detectors=cfg.fairness_detectors, criterion=cfg.criterion)


# --- data resolution -------------------------------------------------------------

def preset_path(name: str) -> Path:
    return Path(str(resources.files("farf") / "presets" / f"{name}.json"))


def dataset_config_path(data: str) -> Path:
    """An existing file wins; otherwise ``adult`` / ``adult.json`` name a shipped preset."""
    path = Path(data)
    if path.exists():
        return path
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    if stem in PRESETS and path.parent == Path("."):
        return preset_path(stem)
    raise ConfigError(f"dataset config {data!r} not found")


def synthetic_preset(name: str, seed: int) -> SynthSpec:
    """Built-in synthetic streams (``synth:stationary``, ``synth:flip``)."""
    if name == "stationary":
        return SynthSpec([Segment(10_000, 0.4, 0.5, 0.5)], n_features=1, seed=seed)
    if name == "flip":
        return SynthSpec([Segment(5_000, 0.4, 0.6, 0.3),
                          Segment(3_000, 0.4, 0.5, 0.5, flip=True)], n_features=1, seed=seed)
    raise ConfigError(f"unknown synthetic preset {name!r}")


_STREAM_CACHE: dict = {}


def resolve_stream(data: str, data_dir: Optional[str] = None, seed: int = 0) -> StreamData:
    if data is None:
        raise ConfigError("no dataset given")
    if data.startswith("synth:"):
        return synth_stream(synthetic_preset(data.split(":", 1)[1], seed))
    key = (data, data_dir)
    if key not in _STREAM_CACHE:
        path = dataset_config_path(data)
        _STREAM_CACHE[key] = load_stream(DatasetConfig.from_json(path), data_dir)
    return _STREAM_CACHE[key]


# --- prequential loop ------------------------------------------------------------------

def _pct(x: float) -> float:
    return round(100.0 * x, 10)


def prequential(learner, stream, window: int = 1000, dump_predictions: bool = False) -> PrequentialLog:
    """Predict each instance, score it, then train on it."""
    disc, conf = DiscTracker(), ConfusionTracker()
    wdisc, wconf = DiscTracker(), ConfusionTracker()
    out = PrequentialLog(predictions=[] if dump_predictions else None)
    drifts = standbys = replacements = 0
    wd = ws = wr = 0
    n = 0
    for inst in stream:
        try:
            pred = learner.predict_one(inst)
            disc.update(inst.group, pred)
            conf.update(inst.label, pred)
            wdisc.update(inst.group, pred)
            wconf.update(inst.label, pred)
            report = learner.learn_one(inst)
        except Exception as exc:
            raise RuntimeError(f"learner failed at stream position {n} (t={inst.t}): {exc}") from exc
        if report is not None:
            wd += len(report.drifts)
            ws += len(report.standbys)
            wr += len(report.replacements)
        if out.predictions is not None:
            out.predictions.append((inst.t, inst.group, inst.label, pred))
        n += 1
        if n % window == 0:
            out.windows.append(_window_record(n, disc, conf, wdisc, wconf, wd, ws, wr))
            drifts, standbys, replacements = drifts + wd, standbys + ws, replacements + wr
            wd = ws = wr = 0
            wdisc, wconf = DiscTracker(), ConfusionTracker()
    if n % window:
        out.windows.append(_window_record(n, disc, conf, wdisc, wconf, wd, ws, wr))
        drifts, standbys, replacements = drifts + wd, standbys + ws, replacements + wr
    out.summary = {
        "n_instances": n,
        "disc_pct": _pct(disc.value),
        "acc_pct": _pct(conf.accuracy) if n else None,
        "kappa_pct": _pct(conf.kappa) if n else None,
        "drifts": drifts,
        "standbys": standbys,
        "replacements": replacements,
    }
    return out


def _window_record(n, disc, conf, wdisc, wconf, wd, ws, wr) -> dict:
    return {
        "t_end": n,
        "disc_pct": _pct(disc.value),
        "acc_pct": _pct(conf.accuracy),
        "kappa_pct": _pct(conf.kappa),
        "window_disc_pct": _pct(wdisc.value),
        "window_acc_pct": _pct(wconf.accuracy),
        "drifts": wd,
        "standbys": ws,
        "replacements": wr,
    }


def run(cfg: RunConfig, stream: Optional[StreamData] = None) -> PrequentialLog:
    cfg.validate()
    if stream is None:
        stream = resolve_stream(cfg.data, cfg.data_dir, cfg.seed)
    learner = build_learner(cfg, stream.schema)
    result = prequential(learner, stream, cfg.window, cfg.dump_predictions)
    result.summary = {"learner": cfg.learner, "mode": cfg.policy().mode, "alpha": cfg.alpha,
                      "seed": cfg.seed, "m": cfg.m if cfg.learner != "ht" else 1, **result.summary}
    if cfg.out:
        write_run(result, cfg, cfg.out)
    return result


# --- experiments ----------------------------------------------------------------------

def mean_summary(summaries: Sequence[dict]) -> dict:
    keys = ("disc_pct", "acc_pct", "kappa_pct", "drifts", "standbys", "replacements")
    out = {k: sum(s[k] for s in summaries) / len(summaries) for k in keys}
    out["n_instances"] = summaries[0]["n_instances"]
    out["seeds"] = [s["seed"] for s in summaries]
    return out


def run_seeds(cfg: RunConfig, seeds: Sequence[int], stream: Optional[StreamData] = None) -> dict:
    runs = [run(dataclasses.replace(cfg, seed=s, out=None), stream).summary for s in seeds]
    return mean_summary(runs)


def sweep_alpha(cfg: RunConfig, alphas: Sequence[float] = DEFAULT_ALPHAS,
                seeds: Optional[Sequence[int]] = None, stream: Optional[StreamData] = None) -> list:
    if not alphas:
        raise ConfigError("alpha sweep needs at least one alpha")
    seeds = list(seeds) if seeds else [cfg.seed]
    rows = []
    for a in alphas:
        if a <= 0:
            raise ConfigError("alpha must be positive")
        summary = run_seeds(dataclasses.replace(cfg, alpha=a, learner="farf"), seeds, stream)
        rows.append((a, summary))
    return rows


ABLATIONS = (
    ("RF", dict(learner="rf", mode=PLAIN, alpha=None)),
    ("FARFS-", dict(learner="farf", mode=OVERSAMPLE, alpha=None)),
    ("FARFS-+", dict(learner="farf", mode=OVER_AND_UNDER, alpha=None)),
    ("FARF", dict(learner="farf", mode=FAIR, alpha=None)),
)


def ablate(cfg: RunConfig, seeds: Optional[Sequence[int]] = None,
           stream: Optional[StreamData] = None) -> list:
    seeds = list(seeds) if seeds else [cfg.seed]
    return [(name, run_seeds(dataclasses.replace(cfg, **over), seeds, stream))
            for name, over in ABLATIONS]


# --- output files -------------------------------------------------------------------------

WINDOW_FIELDS = ("t_end", "disc_pct", "acc_pct", "kappa_pct", "window_disc_pct",
                 "window_acc_pct", "drifts", "standbys", "replacements")


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_run(result: PrequentialLog, cfg: RunConfig, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(dumps_json(cfg.to_dict()))
    (out / "summary.json").write_text(dumps_json(result.summary))
    with open(out / "windows.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=WINDOW_FIELDS)
        w.writeheader()
        w.writerows(result.windows)
    if result.predictions is not None:
        with open(out / "predictions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("t", "group", "label", "prediction"))
            w.writerows(result.predictions)
    if cfg.plot:
        from .report import plot_windows
        plot_windows(result.windows, out / "windows.png", title=f"{cfg.learner} on {cfg.data}")


def write_table(rows: list, key_name: str, path) -> None:
    fields = (key_name, "disc_pct", "acc_pct", "kappa_pct", "drifts", "standbys", "replacements",
              "n_instances")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for key, s in rows:
            w.writerow([key] + [s[f] for f in fields[1:]])

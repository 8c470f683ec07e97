"""Acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line with the measured numbers and
then asserts the same condition. Run ``pytest -v -s tests/test_acceptance.py``
or ``python tests/test_acceptance.py`` to see only these lines. The Adult
criteria are skipped when the UCI files are not in ``$FARF_DATA_DIR`` or
``./data``.
"""

import dataclasses
import math
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, DATA_DIR, adult_available  # noqa: E402
from test_metrics import batch_disc  # noqa: E402
from test_tree import batch_partitions, frozen_leaf, oracle_scores, random_dataset  # noqa: E402

from farf.cli import main as cli_main  # noqa: E402
from farf.core import Instance, NEGATIVE, POSITIVE, PROTECTED, RandomSource, UNPROTECTED  # noqa: E402
from farf.dataio import Segment, SynthSpec, synth_stream  # noqa: E402
from farf.drift import Adwin  # noqa: E402
from farf.harness import RunConfig, resolve_stream, run, run_seeds, sweep_alpha  # noqa: E402
from farf.metrics import ConfusionTracker, DiscTracker  # noqa: E402
from farf.sampling import FAIR, OVER_AND_UNDER, PLAIN, SamplingPolicy, fair_weight, poisson_weight  # noqa: E402
from farf.tree import FairTree, NominalSplit, NumericSplit, SplitConfig, fairness_gain, info_gain, split_scores  # noqa: E402

SEEDS5 = [0, 1, 2, 3, 4]
needs_adult = pytest.mark.skipif(not adult_available(), reason="Adult files not present")


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


# 1 -------------------------------------------------------------------------------

def test_criterion_1_metric_oracles():
    t0 = time.perf_counter()
    rng = random.Random(1)
    worst_disc = 0.0
    for _ in range(1000):
        events = [(rng.randint(0, 1), rng.randint(0, 1), rng.choice([1.0, rng.uniform(0, 5)]))
                  for _ in range(rng.randint(0, 300))]
        t = DiscTracker()
        for k, (g, o, w) in enumerate(events, start=1):
            t.update(g, o, w)
            if k % 25 == 0:
                worst_disc = max(worst_disc, abs(t.value - batch_disc(events[:k])))
        worst_disc = max(worst_disc, abs(t.value - batch_disc(events)))
    worst_kappa = 0.0
    for _ in range(1000):
        m = [[rng.randint(0, 50) for _ in range(2)] for _ in range(2)]
        if rng.random() < 0.05:
            m = [[rng.randint(1, 9), 0], [0, 0]]
        c = ConfusionTracker()
        for y in (0, 1):
            for p in (0, 1):
                for _ in range(m[y][p]):
                    c.update(y, p)
        n = sum(map(sum, m))
        if n == 0:
            continue
        po = (m[0][0] + m[1][1]) / n
        pe = sum((sum(m[k]) / n) * ((m[0][k] + m[1][k]) / n) for k in (0, 1))
        ref = 0.0 if pe == 1 else (po - pe) / (1 - pe)
        worst_kappa = max(worst_kappa, abs(c.kappa - ref))
    dt = time.perf_counter() - t0
    ok = worst_disc <= 1e-12 and worst_kappa <= 1e-12 and dt < 10
    verdict(1, ok, f"max |disc err| {worst_disc:.1e}, max |kappa err| {worst_kappa:.1e}, {dt:.1f}s")
    assert ok


# 2 -------------------------------------------------------------------------------

def test_criterion_2_split_oracles():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    worst = 0.0
    fig_ig_ok = True
    n_checked = 0
    for _ in range(100):
        schema, data = random_dataset(rng, rng.randint(10, 2000))
        _, leaf = frozen_leaf(schema, data)
        feats = schema.features
        for attr in range(schema.n_features):
            if feats[attr].is_nominal:
                specs = [NominalSplit()]
            else:
                thresholds, _ = leaf.stats_for(attr).candidate_parts()
                specs = [NumericSplit(float(x)) for x in thresholds]
            for spec in specs:
                parts = batch_partitions(data, attr, spec,
                                         len(feats[attr].domain) if feats[attr].is_nominal else None)
                ig, fg, f = oracle_scores(parts)
                got_ig = info_gain(leaf, attr, spec)
                got_fg = fairness_gain(leaf, attr, spec)
                got_f = float(split_scores(leaf.partitions(attr, spec))[2][0])
                worst = max(worst, abs(got_ig - ig), abs(got_fg - fg), abs(got_f - f))
                if abs(got_fg) < 1e-12 and got_f != got_ig:
                    fig_ig_ok = False
                n_checked += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and fig_ig_ok and dt < 30
    verdict(2, ok, f"{n_checked} candidate splits, max err {worst:.1e}, FIG=IG on FG=0: {fig_ig_ok}, {dt:.1f}s")
    assert ok


# 3 -------------------------------------------------------------------------------

def test_criterion_3_sampling_statistics():
    t0 = time.perf_counter()
    rng = RandomSource(3)
    pol = SamplingPolicy(PLAIN)
    draws = [poisson_weight(pol, rng) for _ in range(1_000_000)]
    mean = sum(draws) / len(draws)
    p0 = draws.count(0) / len(draws)
    fair = SamplingPolicy(FAIR)
    grid_ok = True
    for g in (UNPROTECTED, PROTECTED):
        for y in (NEGATIVE, POSITIVE):
            x = Instance((0.0, g), g, y)
            for d in (-0.5, 0.0, 0.01, 0.2, 1.0):
                for k in range(13):
                    expect = d * k if (g == UNPROTECTED and y == POSITIVE and d > 0) else k
                    grid_ok &= fair_weight(fair, x, d, k) == expect
    dt = time.perf_counter() - t0
    ok = 5.97 <= mean <= 6.03 and abs(p0 - math.exp(-6)) <= 0.0005 and grid_ok and dt < 10
    verdict(3, ok, f"Poisson(6) mean {mean:.4f}, P(K=0) {p0:.5f} vs {math.exp(-6):.5f}, "
                   f"grid exact: {grid_ok}, {dt:.1f}s")
    assert ok


# 4 -------------------------------------------------------------------------------

def test_criterion_4_adwin():
    t0 = time.perf_counter()
    detected = 0
    for seed in range(100):
        rng = random.Random(seed)
        d = Adwin(0.002)
        for _ in range(500):
            d.add(1.0 if rng.random() < 0.2 else 0.0)
        for i in range(120):
            if d.add(1.0 if rng.random() < 0.8 else 0.0):
                detected += 1
                break
    cuts = 0
    for seed in range(20):
        rng = random.Random(10_000 + seed)
        d = Adwin(0.002)
        rand = rng.random
        for _ in range(100_000):
            cuts += d.add(1.0 if rand() < 0.5 else 0.0)
    rate = cuts / 2e6
    dt = time.perf_counter() - t0
    ok = detected >= 99 and rate < 1e-4 and dt < 60
    verdict(4, ok, f"detected within 120 in {detected}/100, false-positive rate {rate:.1e}/instance, {dt:.1f}s")
    assert ok


# 5 -------------------------------------------------------------------------------

def test_criterion_5_tree_sanity():
    t0 = time.perf_counter()
    # same concept as the pre-flip part of the drift stream: one threshold feature plus the group
    st = synth_stream(SynthSpec([Segment(10_000, 0.4, 0.6, 0.3)], n_features=1, seed=5))
    tree = FairTree(st.schema, SplitConfig(), RandomSource(5))
    hits = 0
    for inst in st:
        hits += tree.predict_one(inst) == inst.label
        tree.learn_one(inst)
    acc = hits / len(st)
    dt = time.perf_counter() - t0
    ok = acc >= 0.9 and dt < 10
    verdict(5, ok, f"prequential accuracy {100 * acc:.2f}% over 10^4 instances, {dt:.1f}s")
    assert ok


# 6 -------------------------------------------------------------------------------

def flip_outcome(seed):
    st = resolve_stream("synth:flip", seed=seed)
    w = run(RunConfig(data="synth:flip", seed=seed, window=500), st).windows
    pre = w[9]["window_acc_pct"]                     # [4500, 5000)
    post = w[10:16]                                  # [5000, 8000)
    recovered = any(x["window_acc_pct"] >= pre - 5.0 for x in post)
    standby = w[10]["standbys"] > 0                  # created in [5000, 5500)
    return recovered, standby


def test_criterion_6_drift_adaptation():
    t0 = time.perf_counter()
    outcomes = [flip_outcome(s) for s in range(100)]
    dt = time.perf_counter() - t0
    both = sum(r and s for r, s in outcomes)
    rec = sum(r for r, _ in outcomes)
    sb = sum(s for _, s in outcomes)
    ok = both >= 95 and dt < 120
    verdict(6, ok, f"recovered and standby near flip in {both}/100 seeds "
                   f"(recovered {rec}, standby {sb}), {dt:.1f}s")
    assert ok


# 7 -------------------------------------------------------------------------------

def adult_cfg(**kw):
    return RunConfig(data="adult", data_dir=str(DATA_DIR), **kw)


@needs_adult
def test_criterion_7_sampling_ablation():
    t0 = time.perf_counter()
    st = resolve_stream("adult", str(DATA_DIR))
    rf = run_seeds(adult_cfg(learner="rf", mode=PLAIN), SEEDS5, st)
    both = run_seeds(adult_cfg(mode=OVER_AND_UNDER), SEEDS5, st)
    farf = run_seeds(adult_cfg(mode=FAIR), SEEDS5, st)
    dt = time.perf_counter() - t0
    c_a = farf["disc_pct"] < both["disc_pct"]
    c_b = farf["disc_pct"] <= 0.75 * rf["disc_pct"]
    c_c = abs(farf["acc_pct"] - rf["acc_pct"]) <= 2.0
    ok = c_a and c_b and c_c and dt < 600
    verdict(7, ok, f"Disc% FARF {farf['disc_pct']:.2f} vs FARFS-+ {both['disc_pct']:.2f} ({c_a}), "
                   f"vs 0.75*RF {0.75 * rf['disc_pct']:.2f} ({c_b}); Acc% FARF {farf['acc_pct']:.2f} "
                   f"vs RF {rf['acc_pct']:.2f} ({c_c}); {dt:.0f}s")
    assert ok


# 8 -------------------------------------------------------------------------------

@needs_adult
def test_criterion_8_alpha_trend():
    from scipy.stats import spearmanr
    t0 = time.perf_counter()
    st = resolve_stream("adult", str(DATA_DIR))
    alphas = [0.3, 0.6, 0.9, 1.2, 1.5]
    rows = sweep_alpha(adult_cfg(), alphas, SEEDS5, st)
    dt = time.perf_counter() - t0
    discs = [s["disc_pct"] for _, s in rows]
    accs = [s["acc_pct"] for _, s in rows]
    rho_d = spearmanr(alphas, discs)[0]
    rho_a = spearmanr(alphas, accs)[0]
    ok = rho_d >= 0.8 and rho_a >= 0.6 and dt < 1800
    verdict(8, ok, f"rho(alpha, Disc%) {rho_d:.2f}, rho(alpha, Acc%) {rho_a:.2f}; "
                   f"Disc% {[round(x, 2) for x in discs]}, Acc% {[round(x, 2) for x in accs]}; {dt:.0f}s")
    assert ok


# 9 -------------------------------------------------------------------------------

def test_criterion_9_reproducibility(tmp_path):
    t0 = time.perf_counter()
    data = ["--data", "adult", "--data-dir", str(DATA_DIR)] if adult_available() else ["--data", "synth:flip"]
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert cli_main(["run", *data, "--seed", "9", "--out", str(out), "--dump-predictions"]) == 0
        outs.append(out)
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
               for f in ("summary.json", "windows.csv", "predictions.csv"))
    dt = time.perf_counter() - t0
    ok = same and dt < 600
    verdict(9, ok, f"byte-identical outputs on {data[1]}: {same}, {dt:.0f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))

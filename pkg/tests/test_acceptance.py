"""Acceptance gate. Each test checks one criterion at its stated tolerance and
records a PASS/FAIL line that is echoed in the terminal summary."""

import math
import os
import time

import numpy as np
import pytest

from exploration_metrics import StateSpace
from exploration_metrics.distributions import FAMILIES
from exploration_metrics.estimators import NnrConfig, kl_knn, kl_nnr, unit_ball_volume
from exploration_metrics.harness import ExperimentSpec, run_sweep, write_csv
from exploration_metrics.metrics import x_nn, x_urel
from exploration_metrics.neighbors import BruteForceIndex, NeighborIndex

from oracles import quadrature_kl_truncated_normals, truncnorm_logpdf, truncnorm_sample

LOG2 = math.log(2)
SEED = 0
WORKERS = os.cpu_count() or 1


@pytest.fixture(scope="session")
def default_sweeps():
    """The full default sweep: 4 families x 15 scales x 10 reps x 5 metrics, d=25, n=2000."""
    start = time.perf_counter()
    results = {f: run_sweep(ExperimentSpec(f), workers=WORKERS) for f in FAMILIES}
    return results, time.perf_counter() - start


def _at(result, metric, pred):
    scales, mean, lo, hi = result.series(metric)
    keep = pred(scales)
    return scales[keep], mean[keep], lo[keep], hi[keep]


def test_c1_nested_uniforms_closed_form(report):
    rng = np.random.default_rng(SEED)
    p = 0.5 * rng.random((5000, 1))
    q = rng.random((5000, 1))
    t0 = time.perf_counter()
    knn = kl_knn(p, lambda x: np.full(len(x), LOG2), q, k=5).value
    t_knn = time.perf_counter() - t0
    t0 = time.perf_counter()
    nnr = kl_nnr(p, q, NnrConfig(k=10)).value
    t_nnr = time.perf_counter() - t0
    ok_knn = report("C1 kl_knn nested uniforms k=5", abs(knn - LOG2) <= 0.1 and t_knn < 5,
                    f"value={knn:.4f} target={LOG2:.4f} err={knn - LOG2:+.4f} t={t_knn:.2f}s")
    ok_nnr = report("C1 kl_nnr nested uniforms k=10", abs(nnr - LOG2) <= 0.1 and t_nnr < 5,
                    f"value={nnr:.4f} target={LOG2:.4f} err={nnr - LOG2:+.4f} t={t_nnr:.2f}s")
    assert ok_knn and ok_nnr


def test_c1_supplement_nnr_default_k(report):
    # not a substitute for C1: shows the NNR estimator at its library default k
    rng = np.random.default_rng(SEED)
    p, q = 0.5 * rng.random((5000, 1)), rng.random((5000, 1))
    est = kl_nnr(p, q)
    ok = report(f"C1-supplement kl_nnr nested uniforms k={est.k}", abs(est.value - LOG2) <= 0.1,
                f"value={est.value:.4f} err={est.value - LOG2:+.4f}")
    assert ok


def test_c2_truncated_normals_quadrature(report):
    truth = quadrature_kl_truncated_normals()
    rng = np.random.default_rng(SEED)
    p = truncnorm_sample(1.0, 10_000, rng)
    q = truncnorm_sample(2.0, 10_000, rng)
    knn = kl_knn(p, truncnorm_logpdf(1.0), q, k=5).value
    nnr = kl_nnr(p, q).value
    ok_knn = report("C2 kl_knn truncated normals", abs(knn - truth) <= 0.1,
                    f"value={knn:.4f} quadrature={truth:.4f} err={knn - truth:+.4f}")
    ok_nnr = report("C2 kl_nnr truncated normals", abs(nnr - truth) <= 0.1,
                    f"value={nnr:.4f} quadrature={truth:.4f} err={nnr - truth:+.4f}")
    assert ok_knn and ok_nnr


@pytest.mark.parametrize("d", [1, 2, 25])
@pytest.mark.parametrize("estimator", ["knn", "nnr"])
def test_c3_zero_divergence(report, d, estimator):
    rng = np.random.default_rng(SEED)
    data = rng.random((5000, d))
    value = x_urel(data, StateSpace.unit(d), estimator, rng=rng).value
    ok = report(f"C3 x_urel {estimator} uniform d={d}", abs(value) <= 0.15, f"value={value:+.4f}")
    assert ok


@pytest.mark.slow
def test_c4_growing_uniform_peak(report):
    res = run_sweep(ExperimentSpec("growing_uniform", (0.2, 1.0, 1.5)), workers=WORKERS)
    _, nnr, _, _ = res.series("xurel_nnr")
    ok = report("C4 xurel_nnr peaks at scale 1.0", nnr[1] > nnr[0] and nnr[1] > nnr[2],
                "means " + " ".join(f"{v:+.4f}" for v in nnr))
    for metric in ("xbin", "xbbm", "xnn"):
        _, mean, lo, hi = res.series(metric)
        band = hi[1] - lo[1]
        ok &= report(f"C4 {metric} at 1.5 >= at 1.0 minus band", mean[2] >= mean[1] - band,
                     f"mean1.0={mean[1]:.4f} mean1.5={mean[2]:.4f} band={band:.4f}")
    assert ok


@pytest.mark.slow
def test_c5_truncated_normal_converges(report, default_sweeps):
    res = default_sweeps[0]["truncated_normal"]
    ok = True
    for metric in ("xurel_knn", "xurel_nnr"):
        _, mean, _, _ = res.series(metric)
        top = mean[-3:]
        ok &= report(f"C5 {metric} increasing over top scales, last >= -0.3",
                     bool(np.all(np.diff(top) > 0)) and top[-1] >= -0.3,
                     "top3 " + " ".join(f"{v:+.4f}" for v in top))
    assert ok


@pytest.mark.slow
def test_c6_bimodal_scale_bbm_saturates(report, default_sweeps):
    res = default_sweeps[0]["bimodal_scale"]
    _, bbm, _, _ = _at(res, "xbbm", lambda s: s >= 0.2)
    ok = report("C6 xbbm > 0.95 for scales >= 0.2", bool(np.all(bbm > 0.95)), f"min={bbm.min():.4f}")
    for metric in ("xurel_knn", "xurel_nnr"):
        _, mean, _, _ = _at(res, metric, lambda s: s >= 0.2)
        change = float(np.ptp(mean))
        ok &= report(f"C6 {metric} changes by >= 0.5 over scales >= 0.2", change >= 0.5,
                     f"range={change:.4f}")
    assert ok


@pytest.mark.slow
def test_c7_bimodal_location_separation(report, default_sweeps):
    res = default_sweeps[0]["bimodal_location"]
    ok = True
    for metric in ("xbbm", "xnn"):
        _, mean, lo, hi = res.series(metric)
        noise = np.maximum(hi - lo, np.roll(hi - lo, -1))[:-1]
        drops = mean[:-1] - mean[1:]
        ok &= report(f"C7 {metric} nondecreasing within noise", bool(np.all(drops <= noise)),
                     f"worst drop minus noise={float(np.max(drops - noise)):+.4g}")
    _, knn, _, _ = res.series("xurel_knn")
    gap = float(knn.max() - knn[-1])
    ok &= report("C7 xurel_knn at max separation >= 0.5 below peak", gap >= 0.5,
                 f"peak={knn.max():+.4f} at_max_sep={knn[-1]:+.4f} gap={gap:.4f}")
    assert ok


@pytest.mark.slow
def test_c8_bin_saturation(report, default_sweeps):
    ok = True
    for family, res in default_sweeps[0].items():
        j = res.metrics.index("xbin")
        vals = res.values[res.scales >= 0.1, j, :]
        ok &= report(f"C8 xbin >= 0.95 {family}", bool(np.all(vals >= 0.95)), f"min={vals.min():.4f}")
    assert ok


def test_c9_analytic_values(report):
    value = x_nn(np.random.default_rng(SEED).random((100_000, 2)), StateSpace.unit(2)).value
    ok = report("C9 xnn uniform d=2", abs(value - 1 / 6) <= 0.05 / 6, f"value={value:.5f}")
    for d, exact in ((1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)):
        err = abs(unit_ball_volume(d) - exact)
        ok &= report(f"C9 V_{d} closed form", err <= 1e-12, f"abs err={err:.2e}")
    assert ok


def test_c10_tree_matches_brute_force(report):
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for _ in range(100):
        d = int(rng.choice([1, 2, 5, 25]))
        pts = rng.random((int(rng.integers(6, 501)), d))
        if rng.random() < 0.3:
            pts = np.round(pts * 4) / 4
        own = np.arange(len(pts))
        for k in (1, 5):
            a = NeighborIndex(pts).query(pts, k, exclude=own)
            b = BruteForceIndex(pts).query(pts, k, exclude=own)
            mismatches += not (np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]))
    ok = report("C10 tree/brute-force equivalence on 100 instances", mismatches == 0,
                f"mismatches={mismatches}")
    assert ok


@pytest.mark.slow
def test_c10_byte_identical_csv(report, tmp_path):
    spec = ExperimentSpec("bimodal_scale", (0.1, 1.0), reps=2, base_seed=7)
    write_csv(run_sweep(spec), tmp_path / "a.csv")
    write_csv(run_sweep(spec, workers=WORKERS), tmp_path / "b.csv")
    ok = report("C10 byte-identical CSV on repeated runs",
                (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes())
    assert ok


@pytest.mark.slow
def test_c10_full_sweep_runtime(report, default_sweeps):
    results, elapsed = default_sweeps
    cells = sum(r.values.size for r in results.values())
    complete = all(not np.isnan(r.values).any() for r in results.values())
    ok = report("C10 full default sweep under 600 s", elapsed < 600 and complete,
                f"elapsed={elapsed:.1f}s workers={WORKERS} values={cells} complete={complete}")
    assert ok

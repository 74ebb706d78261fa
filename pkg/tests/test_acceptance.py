"""Acceptance gate: one test per shipping criterion.

Every tolerance below is pinned, not chosen by the test; oracles are
independent of the code path under test (hand-rolled linear algebra,
scipy reference routines, or first-principles formulas).
"""

import math
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest
import scipy.stats

from brainalign.cli import main
from brainalign.csaa import OptionSet, csaa
from brainalign.encoding import layerwise_encode, mean_ci, read_results_tsv, ridge_fit, write_results_tsv
from brainalign.hrf_glm import canonical_hrf, lss_betas
from brainalign.stats import one_sample_ttest, pearson, read_stats_tsv, sign_flip_permutation_test, write_stats_tsv
from brainalign.synth import SynthSpec, default_events, gen_bold, gen_embeddings, gen_roi_response
from brainalign.tensorio import Event, EventTable, read_tensor, write_tensor


def test_permutation_exactness():
    """n=5 all-positive differences -> one-sided p = 0.03125, < 1 ms."""
    d = np.array([0.11, 0.24, 0.05, 0.30, 0.18])
    res = sign_flip_permutation_test(d, sidedness="one")
    assert res.p_value == 0.03125
    assert res.method == "sign_flip_exact"
    assert res.n == 5
    sign_flip_permutation_test(d, sidedness="one")  # warm caches
    start = time.perf_counter()
    for _ in range(20):
        sign_flip_permutation_test(d, sidedness="one")
    assert (time.perf_counter() - start) / 20 < 1e-3


def test_layer_recovery():
    """Planted layer wins in >= 95 of 100 seeds at the working point."""
    start = time.perf_counter()
    hits = 0
    for seed in range(100):
        spec = SynthSpec(seed=seed)  # N=200, L=6, D=20, snr=4
        emb = gen_embeddings(spec)
        resp, truth = gen_roi_response(spec, emb)
        scores = layerwise_encode(emb, resp, k=5, seed=0)
        hits += int(np.argmax(scores.rho) == truth.true_layer)
    elapsed = time.perf_counter() - start
    assert hits >= 95, f"recovered {hits}/100"
    assert elapsed < 60.0, f"sweep took {elapsed:.1f}s"


def _det(M):
    if M.shape[0] == 1:
        return M[0, 0]
    minor = lambda j: np.delete(np.delete(M, 0, axis=0), j, axis=1)
    return sum(
        (-1) ** j * M[0, j] * _det(minor(j)) for j in range(M.shape[0])
    )


def _cramer_solve(A, b):
    det = _det(A)
    out = np.empty(len(b))
    for j in range(len(b)):
        Aj = A.copy()
        Aj[:, j] = b
        out[j] = _det(Aj) / det
    return out


def test_ridge_oracle_equivalence():
    """Closed-form solve matches a Cramer oracle; alpha=0 matches OLS."""
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 13))
        d = int(rng.integers(1, 5))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        alpha = float(rng.choice([1e-3, 1e-1, 1.0, 10.0]))
        beta = ridge_fit(X, y, alpha).beta
        oracle = _cramer_solve(X.T @ X + alpha * np.eye(d), X.T @ y)
        worst = max(worst, float(np.max(np.abs(beta - oracle))))
    assert worst < 1e-9, f"max |dbeta| = {worst:.2e}"

    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        X = rng.normal(size=(12, 3))
        y = rng.normal(size=12)
        beta = ridge_fit(X, y, 0.0).beta
        ols = np.linalg.lstsq(X, y, rcond=None)[0]
        assert np.max(np.abs(beta - ols)) < 1e-8


def test_glm_round_trip():
    """Zero noise -> exact amplitude recovery; snr 5 -> corr > 0.9 mean."""
    # separated trials: regressors do not overlap, recovery is exact
    events = EventTable(
        [Event(f"t{i}", 40.0 * i, 0.0, "sent") for i in range(8)]
    )
    spec = SynthSpec(n=8, n_scans=160, tr=2.0)
    rng = np.random.default_rng(3)
    amps = rng.normal(size=(8, 2)) * 3.0
    bold = gen_bold(events, amps, spec)
    got = lss_betas(events, bold.values, tr=2.0).values
    assert np.max(np.abs(got - amps)) < 1e-6

    # rapid overlapping design with measurement noise at snr 5
    corrs = []
    for seed in range(50):
        spec = SynthSpec(n=30, tr=2.0, trial_spacing=8.0, seed=seed)
        events = default_events(spec)
        rng = np.random.default_rng([seed, 17])
        amps = rng.normal(size=(30, 1))
        clean = gen_bold(events, amps, spec).values
        noisy_spec = SynthSpec(n=30, tr=2.0, trial_spacing=8.0, seed=seed,
                               noise_sd=float(clean.std()) / 5.0)
        Y = gen_bold(events, amps, noisy_spec).values
        got = lss_betas(events, Y, tr=2.0).values[:, 0]
        corrs.append(float(np.corrcoef(amps[:, 0], got)[0, 1]))
    assert float(np.mean(corrs)) > 0.9, f"mean corr {np.mean(corrs):.3f}"


def test_hrf_shape():
    """h(0)=0, unit peak in [4.8, 5.2] s, matches the formula directly."""
    kernel = canonical_hrf(0.1)
    t = np.arange(321) * 0.1
    assert kernel.samples.shape == (321,)
    assert kernel.samples[0] == 0.0
    assert kernel.samples.max() == 1.0
    assert 4.8 <= t[np.argmax(kernel.samples)] <= 5.2

    def gamma_pdf(x, shape):
        if x <= 0.0:
            return 0.0
        return math.exp((shape - 1.0) * math.log(x) - x - math.lgamma(shape))

    raw = np.array([gamma_pdf(x, 6.0) - gamma_pdf(x, 16.0) / 6.0 for x in t])
    assert np.max(np.abs(kernel.samples - raw / raw.max())) < 1e-9


def test_csaa_chance_level():
    """Random options sit at chance; perfect sets and ties are exact."""
    rng = np.random.default_rng(99)
    items = [
        OptionSet(f"i{k}", rng.normal(size=8), rng.normal(size=(5, 8)))
        for k in range(5000)
    ]
    acc = csaa(items).csaa
    assert 0.17 <= acc <= 0.23, f"chance run scored {acc:.4f}"

    source = rng.normal(size=8)
    perfect = OptionSet("p", source,
                        np.vstack([source, rng.normal(size=(4, 8))]))
    assert csaa([perfect] * 3).csaa == 1.0

    tied = OptionSet("t", source,
                     np.vstack([source, source, rng.normal(size=(3, 8))]))
    assert csaa([tied]).csaa == 0.0


def test_statistics_oracles():
    """pearson, t-test, and CI agree with scipy to 1e-9; 95% coverage."""
    x = np.array([0.2, 1.4, -0.7, 2.2, 0.9, -1.3, 0.4, 1.8])
    y = np.array([0.1, 1.1, -0.2, 1.9, 1.2, -0.8, 0.0, 1.5])
    res = pearson(x, y)
    want_r, want_p = scipy.stats.pearsonr(x, y)
    assert abs(res.statistic - want_r) < 1e-9
    assert abs(res.p_value - want_p) < 1e-9

    d = np.array([0.3, -0.1, 0.5, 0.2, 0.0, 0.4, -0.2, 0.6, 0.1])
    res = one_sample_ttest(d)
    want = scipy.stats.ttest_1samp(d, 0.0)
    assert abs(res.statistic - want.statistic) < 1e-9
    assert abs(res.p_value - want.pvalue) < 1e-9

    vals = np.array([0.42, 0.55, 0.31, 0.48, 0.6, 0.37])
    m, lo, hi = mean_ci(vals)
    half = scipy.stats.t.ppf(0.975, len(vals) - 1) * scipy.stats.sem(vals)
    assert abs((hi - lo) / 2.0 - half) < 1e-9
    assert abs(m - vals.mean()) < 1e-12

    rng = np.random.default_rng(31)
    hits = sum(
        lo <= 0.3 <= hi
        for lo, hi in (
            mean_ci(rng.normal(0.3, 1.0, size=8))[1:] for _ in range(1000)
        )
    )
    assert 930 <= hits <= 970, f"coverage {hits}/1000"


def test_pipeline_determinism(tmp_path):
    """simulate -> report twice, 1 vs 8 workers: byte-identical trees."""
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[simulate]\nn = 40\ndim = 8\nsubjects = 2\nmodels = solo\n"
    )  # 2 subjects x 3 ROIs x 6 layers = 36 cells
    start = time.perf_counter()
    trees = []
    for name, threads in (("w1", "1"), ("w8", "8")):
        out = tmp_path / name
        for cmd in ("simulate", "glm", "extract-roi", "encode", "stats",
                    "report"):
            rc = main([cmd, "--config", str(ini), "--out", str(out),
                       "--seed", "12", "--threads", threads, "--quiet"])
            assert rc == 0, cmd
        trees.append({
            str(p.relative_to(out)): p.read_bytes()
            for p in sorted(out.rglob("*")) if p.is_file()
        })
    elapsed = time.perf_counter() - start
    assert len(read_results_tsv(tmp_path / "w1" / "results.tsv")) == 36
    assert trees[0] == trees[1]
    assert elapsed < 30.0, f"two runs took {elapsed:.1f}s"
    for svg in sorted((tmp_path / "w1" / "report").glob("*.svg")):
        ET.parse(svg)


def test_format_round_trips(tmp_path):
    """1000 randomized tensor and table round-trips, bitwise stable."""
    rng = np.random.default_rng(2718)
    path = tmp_path / "t.nat"
    for k in range(1000):
        shape = tuple(int(s) for s in rng.integers(1, 5, size=rng.integers(1, 5)))
        values = rng.normal(size=shape) * 10.0 ** rng.integers(-12, 13)
        if k % 20 == 0:
            values.flat[0] = np.nan
        if k % 20 == 10:
            values.flat[-1] = np.inf
        write_tensor(path, values)
        back = read_tensor(path)
        assert back.shape == values.shape
        assert back.tobytes() == values.tobytes()
        write_tensor(path, back)  # second generation, still identical
        assert read_tensor(path).tobytes() == values.tobytes()

    from brainalign.encoding import ResultRow
    from brainalign.stats import StatsRow
    rows = [
        ResultRow(f"m{i % 3}", f"s{i % 5}", "LH_IFG", i % 6,
                  float(rng.normal()), float(rng.choice([0.1, 1.0])))
        for i in range(500)
    ]
    write_results_tsv(tmp_path / "r.tsv", rows)
    assert read_results_tsv(tmp_path / "r.tsv") == rows
    srows = [
        StatsRow(f"a{i}", "subject", float(rng.normal()),
                 float(rng.uniform()), int(rng.integers(2, 30)), "two")
        for i in range(500)
    ]
    write_stats_tsv(tmp_path / "s.tsv", srows)
    assert read_stats_tsv(tmp_path / "s.tsv") == srows

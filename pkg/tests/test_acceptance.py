"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL ...`` line; the lines are
also collected into the terminal summary (see conftest.py).
"""
import json
import math
import time

import numpy as np
import pytest
from scipy.special import erf

from gocc_lab.bounds import proposition_povm_bias, tower_audit, verify_wplus_validity
from gocc_lab.cli import main
from gocc_lab.fock_oracle import (
    adaptive_cutoff,
    density_from_constellation,
    fidelity_fock,
    hs_norm_sq_fock,
    hs_norm_sq_gram,
    quantum_chernoff,
    trace_distance_fock,
    trace_distance_gram,
)
from gocc_lab.gaussian_core import CoherentConstellation, SymplecticCircuit, wigner_of_coherent, wigner_of_constellation
from gocc_lab.gocc_sim import DecisionRule, GoccProtocol, Round, run_protocol_error_prob
from gocc_lab.hiding import HidingParams, capacity_awgn, capacity_noiseless, run_hiding_experiment
from gocc_lab.protocol_io import builtin_protocol
from gocc_lab.wigner_metrics import classical_chernoff_equal_cov, classical_chernoff_mc, l1_distance_mc

RESULTS = []
PM_ALPHAS = (0.2, 0.45, 1.0, 3.0)


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    RESULTS.append(line)
    assert ok, line


def pm_pair(alpha, m=1):
    return CoherentConstellation.pure([alpha] * m), CoherentConstellation.pure([-alpha] * m)


def homodyne_all(m):
    """x-homodyne every mode, guess 0 when the outcomes sum positive."""
    return GoccProtocol(m, (Round(0, SymplecticCircuit(m, ()), m),), DecisionRule("sign", (1.0,) * m))


def random_constellation(rng, m, L, radius=2.0):
    r = radius * np.sqrt(rng.random((L, m)))
    phi = rng.uniform(0, 2 * np.pi, (L, m))
    return CoherentConstellation.uniform(r * np.exp(1j * phi))


def oracle_pairs():
    """The 20 random pairs of criterion 4: (m, r0, r1)."""
    rng = np.random.default_rng(2024)
    for _ in range(20):
        m = int(rng.integers(1, 4))
        r0 = random_constellation(rng, m, int(rng.integers(1, 5)))
        r1 = random_constellation(rng, m, int(rng.integers(1, 5)))
        yield m, r0, r1


def exercised_pairs():
    """Every coherent state pair used by criteria 2-5."""
    pairs = {"pm 0.45": pm_pair(0.45), "pm 0.5": pm_pair(0.5)}
    for k, (_, r0, r1) in enumerate(oracle_pairs()):
        pairs[f"random {k}"] = (r0, r1)
    for m in (1, 2):
        for alpha in PM_ALPHAS:
            pairs[f"pm {alpha} m={m}"] = pm_pair(alpha, m)
    return pairs


def test_criterion_01_figure_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    t0 = time.perf_counter()
    code = main(["sweep-coherent", "--alpha-min", "0", "--alpha-max", "2", "--steps", "201", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    summary = out.read_text().splitlines()[-1]
    gap = float(summary.split("max_gap=")[1].split()[0])
    at = float(summary.split("at_alpha=")[1])
    ok = code == 0 and 0.103 <= gap <= 0.123 and 0.40 <= at <= 0.50 and elapsed < 1.0
    report(1, ok, f"max gap {gap:.5f} at alpha {at:.3f} (need [0.103, 0.123] at [0.40, 0.50]), {elapsed:.3f}s")


def test_criterion_02_example_cross_checks():
    alpha = 0.45
    t0 = time.perf_counter()
    r0, r1 = pm_pair(alpha)
    td = trace_distance_gram(r0, r1)
    td_exact = math.sqrt(1 - math.exp(-4 * alpha ** 2))
    p_exact = 0.5 * (1 - erf(alpha * math.sqrt(2)))
    p, p_se = run_protocol_error_prob(builtin_protocol("homodyne_sign"), r0, r1, 100_000, seed=0)
    l1_exact = 2 * erf(alpha * math.sqrt(2))
    l1, l1_se = l1_distance_mc(wigner_of_coherent([alpha]), wigner_of_coherent([-alpha]), 100_000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = (abs(td - 0.7451) <= 1e-4 and abs(td - td_exact) < 1e-12 and abs(p - p_exact) <= 3 * p_se
          and abs(l1 - l1_exact) <= 3 * l1_se and elapsed < 30)
    report(2, ok, f"trace {td:.6f} (exact {td_exact:.6f}); p_err {p:.5f}+-{p_se:.5f} vs {p_exact:.5f}; "
                  f"L1 {l1:.5f}+-{l1_se:.5f} vs {l1_exact:.5f}; {elapsed:.1f}s")


def test_criterion_03_chernoff():
    alpha = 0.5
    t0 = time.perf_counter()
    r0, r1 = pm_pair(alpha)
    q = quantum_chernoff(density_from_constellation(r0, 25), density_from_constellation(r1, 25))
    w0, w1 = wigner_of_coherent([alpha]), wigner_of_coherent([-alpha])
    c_mc = classical_chernoff_mc(w0, w1, 100_000, seed=0)
    c_cf = classical_chernoff_equal_cov(w0.mean, w1.mean, w0.cov)
    elapsed = time.perf_counter() - t0
    ok = abs(q - 1.0) <= 0.01 and abs(c_mc - 0.5) <= 0.02 and abs(c_cf - 0.5) <= 0.02 and elapsed < 30
    report(3, ok, f"quantum {q:.6f}, classical MC {c_mc:.5f}, closed form {c_cf:.5f}; {elapsed:.1f}s")


def test_criterion_04_oracle_equivalence():
    worst_td = worst_hs = 0.0
    for m, r0, r1 in oracle_pairs():
        n_max = adaptive_cutoff(np.vstack([r0.points, r1.points]))
        f0, f1 = density_from_constellation(r0, n_max), density_from_constellation(r1, n_max)
        worst_td = max(worst_td, abs(trace_distance_gram(r0, r1) - trace_distance_fock(f0, f1)))
        delta = r0.minus(r1)
        hs_fock = hs_norm_sq_fock(density_from_constellation(delta, n_max))
        worst_hs = max(worst_hs, abs(hs_norm_sq_gram(delta) - hs_fock))
    report(4, worst_td <= 1e-5 and worst_hs <= 1e-6,
           f"max |Gram - Fock| trace {worst_td:.2e} (tol 1e-5), HS {worst_hs:.2e} (tol 1e-6)")


def test_criterion_05_proposition_suite():
    worst_min, failures = np.inf, []
    for m in (1, 2):
        for alpha in PM_ALPHAS:
            r0, r1 = pm_pair(alpha, m)
            delta = r0.minus(r1)
            eta, bias = proposition_povm_bias(delta, m)
            low = verify_wplus_validity(delta, m, eta=eta)
            worst_min = min(worst_min, low)
            l1, se = l1_distance_mc(wigner_of_constellation(r0), wigner_of_constellation(r1), 100_000, seed=m)
            if low < -1e-12 or bias > l1 + 3 * se:
                failures.append(f"alpha={alpha} m={m}: min W {low:.3g}, bias {bias:.4f} vs L1 {l1:.4f}+-{se:.4f}")
    report(5, not failures, f"min grid value {worst_min:.3e}; violations: {failures or 'none'}")


def test_criterion_06_capacity_gap():
    grid = np.geomspace(0.01, 100, 50)
    gaps = [capacity_noiseless(E) - 2 * capacity_awgn(E) for E in grid]
    ident = max(abs(capacity_noiseless(E) - (math.log1p(E) + E * math.log1p(1 / E))) for E in grid)
    ok = min(gaps) > 0 and ident <= 1e-12
    report(6, ok, f"min g - 2 C_W = {min(gaps):.4e} over 50 points; identity error {ident:.1e}")


HIDING_MS = (2, 4, 6, 8)
HIDING_SEEDS = range(5)
HIDING_SAMPLES = 20_000


@pytest.fixture(scope="module")
def hiding_runs():
    t0 = time.perf_counter()
    runs = {}
    for m in HIDING_MS:
        runs[m] = [run_hiding_experiment(HidingParams.auto(m, 1.0, 0.05, seed), HIDING_SAMPLES)
                   for seed in HIDING_SEEDS]
    return runs, time.perf_counter() - t0


def _median(values):
    return float(np.median(values))


def test_criterion_07_hiding_trend(hiding_runs):
    runs, elapsed = hiding_runs
    td = [_median([r.trace_dist_half for r in runs[m]]) for m in HIDING_MS]
    l1 = [_median([r.l1_w0_w1 for r in runs[m]]) for m in HIDING_MS]
    het8 = _median([r.heterodyne_bias for r in runs[8]])
    hom8 = _median([r.homodyne_bias for r in runs[8]])
    Ls = [runs[m][0].params["L"] for m in HIDING_MS]
    td_ok = all(b >= a for a, b in zip(td, td[1:]))
    l1_ok = all(b <= a for a, b in zip(l1, l1[1:]))
    # norm units: half the trace-norm bias is the half trace distance
    bias_ok = max(het8, hom8) < td[-1]
    ok = td_ok and l1_ok and bias_ok and elapsed < 600
    statuses = sorted({r.trace_dist_status.split(":")[0] for r in runs[8]})
    report(7, ok, f"L={Ls}; median half-trace {[round(v, 4) for v in td]}; median L1 {[round(v, 4) for v in l1]}; "
                  f"m=8 het/hom bias {het8:.3f}/{hom8:.3f}; m=8 trace status {statuses}; {elapsed:.0f}s")


def test_criterion_08_tower(hiding_runs):
    failures = []
    pairs = exercised_pairs()
    for name, (r0, r1) in pairs.items():
        try:
            tower_audit(r0, r1, homodyne_all(r0.n_modes), 20_000, 20_000, seed=0)
        except AssertionError as exc:
            failures.append(f"{name}: {exc}")
    runs, _ = hiding_runs
    n_hiding = 0
    for m in HIDING_MS:
        for r in runs[m]:
            n_hiding += 1
            for kind in ("heterodyne", "homodyne"):
                bias, err = getattr(r, f"{kind}_bias"), getattr(r, f"{kind}_bias_err")
                if not bias <= r.l1_w0_w1 + 3 * math.hypot(err, r.l1_w0_w1_err):
                    failures.append(f"m={m} seed={r.params['seed']} {kind} above L1")
                if not bias <= 2 * r.trace_dist_half + 3 * err:
                    why = "trace distance unavailable" if math.isnan(r.trace_dist_half) else "above trace norm"
                    failures.append(f"m={m} seed={r.params['seed']} {kind}: {why}")
    report(8, not failures, f"{len(pairs)} audited pairs + {n_hiding} hiding draws; "
                            f"{len(failures)} failed checks{': ' + '; '.join(failures[:4]) if failures else ''}")


def test_criterion_09_fuchs_van_de_graaf():
    rng = np.random.default_rng(77)
    worst = -np.inf
    for _ in range(20):
        m = int(rng.integers(1, 3))
        r0 = random_constellation(rng, m, int(rng.integers(1, 5)), radius=1.5)
        r1 = random_constellation(rng, m, int(rng.integers(1, 5)), radius=1.5)
        n_max = adaptive_cutoff(np.vstack([r0.points, r1.points]))
        f0, f1 = density_from_constellation(r0, n_max), density_from_constellation(r1, n_max)
        F, T = fidelity_fock(f0, f1), trace_distance_fock(f0, f1)
        worst = max(worst, (1 - F) - T, T - math.sqrt(max(0.0, 1 - F * F)))
    report(9, worst <= 1e-9, f"largest sandwich violation {worst:.2e} over 20 pairs (tol 1e-9)")


DETERMINISM_RUNS = [
    ["sweep-coherent", "--steps", "51"],
    ["chernoff", "--alpha", "0.5", "--mc-samples", "50000", "--seed", "5"],
    ["hide", "--m", "2", "--n-seeds", "2", "--mc-samples", "20000", "--seed", "5"],
    ["bounds", "--m", "3", "--E-bar", "2", "--t", "1.5"],
    ["protocol", "builtin:adaptive_two_round", "--pm-alpha", "0.45", "--trials", "50000", "--seed", "5"],
]


def test_criterion_10_determinism(tmp_path, monkeypatch):
    mismatched = []
    for args in DETERMINISM_RUNS:
        blobs = []
        for k, threads in enumerate(("1", "1", "3")):
            monkeypatch.setenv("GOCC_LAB_THREADS", threads)
            out = tmp_path / f"{args[0]}_{k}"
            assert main(args + ["--out", str(out)]) == 0
            blobs.append(out.read_bytes())
        if len(set(blobs)) != 1:
            mismatched.append(args[0])
        if args[0] != "sweep-coherent":
            json.loads(blobs[0])
    report(10, not mismatched, f"{len(DETERMINISM_RUNS)} commands x 3 runs (threads 1, 1, 3); "
                               f"mismatches: {mismatched or 'none'}")

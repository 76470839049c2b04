"""Acceptance suite: one PASS/FAIL line per criterion, each with its runtime budget."""
import io
import json
import math
import time

import numpy as np
import pytest
import scipy.linalg

from nio import cli
from nio.dynamics import MapSpec, fold
from nio.lyapunov import lyapunov_curve, lyapunov_from_density
from nio.noise import NoiseKernel
from nio.spectral import (bv_norm, coupling_time, l1_norm, stationary_density, v0_contraction_norm,
                          variation)
from nio.ulam import Partition, annealed_matrix, deterministic_matrix

NIO_GRID = ["--n", "1024", "--xi-min", "0.05", "--xi-max", "2.0", "--xi-count", "40",
            "--threads", "4"]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("NIO_SEED", raising=False)
    monkeypatch.delenv("NIO_THREADS", raising=False)


def verdict(capsys, number, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    passed = ok and in_time
    with capsys.disabled():
        print(f"\nACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} - {detail} "
              f"[{elapsed:.1f} s, budget {budget:g} s]")
    assert ok, detail
    assert in_time, f"runtime {elapsed:.1f} s exceeds {budget} s"


def run_cli(argv):
    out = io.StringIO()
    return cli.main(argv, stdout=out), out.getvalue()


def test_1_alpha_tilde_enclosure(capsys):
    t0 = time.perf_counter()
    code, out = run_cli(["tilde", "--tol", "1e-7"])
    elapsed = time.perf_counter() - t0
    line = [l for l in out.splitlines() if l.startswith("alpha_tilde")][0]
    lo, hi = (float(v) for v in line.split("[")[1].rstrip("]").split(","))
    ok = code == 0 and 2.67834 <= lo <= hi <= 2.67835 and hi - lo <= 1e-7
    verdict(capsys, 1, ok, f"enclosure [{lo!r}, {hi!r}] inside [2.67834, 2.67835]", elapsed, 1)


def test_2_exact_uniform_regime(capsys):
    t0 = time.perf_counter()
    tmap = MapSpec(5.0, 1.0)
    M = annealed_matrix(tmap, NoiseKernel.uniform(2.0), "periodic", Partition(1024))
    f = stationary_density(M)
    dist = l1_norm(f - 0.5)
    curve = lyapunov_curve(tmap, None, "periodic", 1024, [2.0])
    lam = curve.samples[0].lam
    elapsed = time.perf_counter() - t0
    target = math.log(2) + math.log(5) - 4
    ok = dist <= 1e-10 and abs(lam - target) <= 1e-6 and abs(lyapunov_from_density(tmap, f) - lam) < 1e-15
    verdict(capsys, 2, ok, f"||f - 1/2||_1 = {dist:.2e}, lambda = {lam:.9f} (target {target:.9f})",
            elapsed, 30)


def test_3_noise_induced_order(capsys):
    t0 = time.perf_counter()
    code, out = run_cli(["nio", "--alpha", "5", "--beta", "1"] + NIO_GRID)
    elapsed = time.perf_counter() - t0
    report = json.loads(out)
    cert = report["certificate"]
    ok = code == 0 and cert is not None
    detail = f"exit {code}"
    if cert is not None:
        pos, neg = report["monte_carlo"]["pos"], report["monte_carlo"]["neg"]
        ok = ok and cert["lambda_pos"] > 0 > cert["lambda_neg"] and pos["sign_agrees"] and neg["sign_agrees"]
        detail += (f"; xi1={cert['xi_pos']:.4f} lambda={cert['lambda_pos']:+.5f} "
                   f"MC={pos['mc_mean']:+.5f}+-{pos['mc_stderr']:.5f}"
                   f"; xi2={cert['xi_neg']:.4f} lambda={cert['lambda_neg']:+.5f} "
                   f"MC={neg['mc_mean']:+.5f}+-{neg['mc_stderr']:.5f}"
                   f"; MC signs resolved at 3 sigma: {pos['sign_resolved']}, {neg['sign_resolved']}")
    verdict(capsys, 3, ok, detail, elapsed, 300)


def test_4_negative_control(capsys):
    t0 = time.perf_counter()
    code, out = run_cli(["nio", "--alpha", "2", "--beta", "1"] + NIO_GRID)
    elapsed = time.perf_counter() - t0
    report = json.loads(out)
    lam_min = min(s["lambda"] for s in report["samples"] if s["lambda"] is not None)
    ok = code == 1 and report["certificate"] is None
    verdict(capsys, 4, ok, f"exit {code}, no certificate, min lambda over grid {lam_min:+.5f}",
            elapsed, 300)


def test_5_regularity_bounds(capsys):
    t0 = time.perf_counter()
    r = np.random.default_rng(2024)
    worst_var, worst_bv, failures = -np.inf, -np.inf, []
    for t in range(20):
        # beta < 0.85 with small noise sits in periodic windows where power iteration
        # is too slow to converge; those draws would only exercise NonConvergence
        alpha, beta = r.uniform(1.5, 6.0), r.uniform(0.85, 1.0)
        xi = float(np.exp(r.uniform(np.log(0.05), np.log(2.5))))
        bc = "periodic" if t % 2 == 0 else "reflecting"
        kernel = NoiseKernel.uniform(xi)
        f = stationary_density(annealed_matrix(MapSpec(alpha, beta), kernel, bc, Partition(512)),
                               check_uniqueness=False)
        gap_var = variation(f) - 1.0 / xi
        gap_bv = bv_norm(f) - kernel.bv_norm()
        worst_var, worst_bv = max(worst_var, gap_var), max(worst_bv, gap_bv)
        if gap_var > 1e-8 or gap_bv > 1e-8:
            failures.append((alpha, beta, xi, bc))
    elapsed = time.perf_counter() - t0
    verdict(capsys, 5, not failures,
            f"20 triples, max Var(f) - 1/xi = {worst_var:+.3e}, max ||f||_BV - ||rho||_BV = "
            f"{worst_bv:+.3e}, violations {failures}", elapsed, 120)


def test_6_discrete_monotonicity(capsys):
    t0 = time.perf_counter()
    tmap = MapSpec(5.0, 1.0)
    part = Partition(256)
    det = deterministic_matrix(tmap, part)
    grid = [0.2, 0.3, 0.5, 0.8]
    mats = [annealed_matrix(tmap, NoiseKernel.uniform(x), "periodic", part, det=det) for x in grid]
    kmax = max(coupling_time(M) for M in mats) + 2
    table = np.array([[v0_contraction_norm(M, k) for k in range(1, kmax + 1)] for M in mats])
    bad = [(grid[a], grid[b], k + 1) for a in range(4) for b in range(a + 1, 4) for k in range(kmax)
           if table[a, k] < 1.0 and not table[b, k] < 1.0]
    elapsed = time.perf_counter() - t0
    first = {x: int(np.argmax(row < 1.0)) + 1 for x, row in zip(grid, table)}
    verdict(capsys, 6, not bad, f"first contracting k per xi {first}, violations {bad}", elapsed, 60)


def test_7_coarse_fine_certificate(capsys):
    t0 = time.perf_counter()
    tmap = MapSpec(5.0, 1.0)
    kernel = NoiseKernel.uniform(0.5)
    rows = []
    for n in (256, 512, 1024):
        part = Partition(n)
        M = annealed_matrix(tmap, kernel, "periodic", part)
        i = coupling_time(M)
        c_i = v0_contraction_norm(M, i)
        rows.append((n, i, c_i, c_i + (2 * i + 1) * part.delta / kernel.xi))
    elapsed = time.perf_counter() - t0
    bounds = [b for *_, b in rows]
    ok = bounds[-1] < 1.0 and bounds[0] >= bounds[1] >= bounds[2]
    detail = "; ".join(f"n={n} i={i} C_i={c:.5f} bound={b:.5f}" for n, i, c, b in rows)
    verdict(capsys, 7, ok, detail, elapsed, 120)


def test_8_oracle_equivalence(capsys):
    t0 = time.perf_counter()
    tmap = MapSpec(5.0, 1.0)
    xi, samples = 0.5, 10**6
    r = np.random.default_rng(8)
    worst = {}
    for n in (8, 16):
        part = Partition(n)
        M = annealed_matrix(tmap, NoiseKernel.uniform(xi), "periodic", part)
        z = 0.0
        for i in range(n):
            # one step of the Markov kernel from a point uniform in cell i
            x = part.edges[i] + part.delta * r.random(samples)
            y = fold("periodic", tmap.evaluate(x) + xi * (2.0 * r.random(samples) - 1.0))
            j = np.minimum(((y + 1.0) / part.delta).astype(int), n - 1)
            freq = np.bincount(j, minlength=n) / samples
            sigma = np.sqrt(np.maximum(M[i] * (1.0 - M[i]), freq * (1.0 - freq)) / samples)
            with np.errstate(divide="ignore", invalid="ignore"):
                zs = np.where(sigma > 0, np.abs(freq - M[i]) / sigma, np.where(freq == M[i], 0, np.inf))
            z = max(z, float(zs.max()))
        worst[n] = z
    M128 = annealed_matrix(tmap, NoiseKernel.uniform(xi), "periodic", Partition(128))
    f = stationary_density(M128, tol=1e-13)
    w, vl = scipy.linalg.eig(M128, left=True, right=False)
    v = np.real(vl[:, np.argmin(np.abs(w - 1.0))])
    eig_err = l1_norm(f - v / v.sum() * 64)
    elapsed = time.perf_counter() - t0
    ok = all(z <= 4.0 for z in worst.values()) and eig_err <= 1e-8
    detail = (f"max |freq - M| / sigma: n=8 {worst[8]:.1f}, n=16 {worst[16]:.1f} (limit 4); "
              f"power iteration vs eigensolver at n=128: {eig_err:.2e} (limit 1e-8)")
    verdict(capsys, 8, ok, detail, elapsed, 180)


def test_9_mc_determinism(capsys, tmp_path):
    t0 = time.perf_counter()
    args = ["mc-sweep", "--alpha-list", "2,5", "--xi-list", "0.05,0.5,1.0", "--orbits", "200",
            "--length", "2000", "--seed", "2718"]
    blobs = []
    for k, threads in enumerate(["1", "1", "4", "8"]):
        path = tmp_path / f"run{k}.csv"
        code, _ = run_cli(args + ["--threads", threads, "--csv", str(path)])
        assert code == 0
        blobs.append(path.read_bytes())
    elapsed = time.perf_counter() - t0
    ok = len(set(blobs)) == 1
    verdict(capsys, 9, ok, f"{len(blobs)} runs (threads 1, 1, 4, 8), {len(set(blobs))} distinct CSV "
            f"byte strings, {len(blobs[0])} bytes each", elapsed, 120)

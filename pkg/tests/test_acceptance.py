"""The ten acceptance criteria, one test each, at their stated tolerances.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from manifold_ipm.besov import CoefficientField, shift_smoothness
from manifold_ipm.cli import main
from manifold_ipm.estimator import (
    count_inversions,
    minimum_ipm_estimate,
    radius_grid,
    rate_experiment,
    select_candidate,
    summarize_rates,
)
from manifold_ipm.interpolation import (
    ExperimentSpec,
    check_coeff_interpolation,
    fit_exponent,
    predicted_exponent,
    run_family,
)
from manifold_ipm.measures import displacement_cost, make_curve, quadrature_measure, sample_iid
from manifold_ipm.oscillation import (
    PotentialSpec,
    cost_integral,
    periodic_sobolev_norm,
    sobolev_sup,
)
from manifold_ipm.wavelets import (
    TensorIndex,
    build_family,
    filter_residuals,
    gram_errors,
    partition_of_unity_error,
    two_scale_error,
)
from test_interpolation import admissible_field

CRITERIA = {
    1: "oscillating circle exponent, beta=0, (1,2)",
    2: "oscillating circle exponent, beta=1, (1,2)",
    3: "sub-Lipschitz radius family, (0.5,1)",
    4: "cost integral scaling and closed form",
    5: "Sobolev supremum closed form and bound",
    6: "displacement cost scaling",
    7: "wavelet infrastructure",
    8: "coefficient interpolation inequality",
    9: "estimator properties",
    10: "determinism across worker counts",
}
RESULTS: dict[int, tuple[bool, str]] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = (bool(ok), detail)
    assert ok, f"criterion {k}: {detail}"


def oscillating_fit(beta):
    spec = ExperimentSpec("perturbed_circle", (4, 8, 16, 32), ((1.0, 2.0),), beta=beta,
                          J=10, nodes=512)
    start = time.perf_counter()
    fit = fit_exponent(run_family(spec))
    return fit, time.perf_counter() - start


def test_criterion_1():
    fit, secs = oscillating_fit(0.0)
    target = predicted_exponent(0.0, 1.0, 2.0)
    ok = abs(fit.slope - target) <= 0.15 and fit.r_squared >= 0.98 and secs < 120
    record(1, ok, f"slope {fit.slope:.4f} (target {target} +- 0.15), r2 {fit.r_squared:.4f}, "
                  f"{secs:.1f} s")


def test_criterion_2():
    fit, _ = oscillating_fit(1.0)
    target = predicted_exponent(1.0, 1.0, 2.0)
    ok = abs(fit.slope - target) <= 0.15
    record(2, ok, f"slope {fit.slope:.4f} (target {target:.4f} +- 0.15), r2 {fit.r_squared:.4f}")


def test_criterion_3():
    spec = ExperimentSpec("circle_radius", (0.025, 0.05, 0.1, 0.2), ((0.5, 1.0),), nodes=512)
    fit = fit_exponent(run_family(spec))
    ok = abs(fit.slope - 0.5) <= 0.05
    record(3, ok, f"slope {fit.slope:.4f} (target 0.5 +- 0.05) at J={spec.level}, "
                  f"r2 {fit.r_squared:.4f}")


def test_criterion_4():
    ns = np.arange(2, 33)
    worst = 0.0
    for beta, eta in [(0, 1), (0, 2), (1, 2)]:
        costs = [cost_integral(PotentialSpec(eta, int(n), beta), 2**14) for n in ns]
        slope = np.polyfit(np.log(ns), np.log(costs), 1)[0]
        worst = max(worst, abs(slope + (beta + eta)))
    value = cost_integral(PotentialSpec(1, 1, 0.0, bump_order=1), 2**17)
    oracle = 4 * math.sqrt(2) / math.pi**2
    ok = worst <= 0.02 and abs(value - oracle) <= 1e-8
    record(4, ok, f"max slope deviation {worst:.2e} (<= 0.02), "
                  f"closed-form error {abs(value - oracle):.2e} (<= 1e-8)")


def test_criterion_5():
    worst = 0.0
    for eta in (1, 2, 3):
        for n in range(1, 65):
            worst = max(worst, abs(sobolev_sup(n, eta) - n ** -(eta - 1) / math.sqrt(2)))
    rng = np.random.default_rng(2024)
    N = 1024
    t = np.arange(N) / N
    violations = 0
    margin = math.inf
    for _ in range(100):
        eta = int(rng.integers(1, 4))
        n = int(rng.integers(1, 65))
        # random trigonometric polynomial, rescaled onto the unit sphere
        K = 100
        k = np.arange(K + 1)
        f = rng.normal(size=K + 1) @ np.cos(2 * np.pi * np.outer(k, t)) \
            + rng.normal(size=K + 1) @ np.sin(2 * np.pi * np.outer(k, t))
        if _ % 2:
            # near-extremal: dominated by the tested mode
            f = np.sin(2 * np.pi * n * t) + 1e-3 * f
        f /= periodic_sobolev_norm(f, eta - 1)
        pairing = abs(math.fsum(f * np.sin(2 * np.pi * n * t)) / N)
        gap = sobolev_sup(n, eta) - pairing
        margin = min(margin, gap)
        violations += gap < -1e-12
    ok = worst <= 1e-12 and violations == 0
    record(5, ok, f"closed-form error {worst:.1e}, {violations}/100 bound violations, "
                  f"smallest gap {margin:.3e}")


def test_criterion_6():
    ns = [4, 8, 16, 32, 64]
    parts = []
    ok = True
    for beta in (0.0, 1.0):
        vals = [displacement_cost(quadrature_measure(make_curve("perturbed_circle", beta, n),
                                                     1024)) for n in ns]
        slope = np.polyfit(np.log(ns), np.log(vals), 1)[0]
        ok &= abs(slope + beta + 1) <= 0.05
        parts.append(f"beta={beta:g}: {slope:.4f}")
    record(6, ok, "slopes " + ", ".join(parts) + " (target -(beta+1) +- 0.05)")


def test_criterion_7():
    depth = 12
    filt = max(max(filter_residuals(build_family(N, depth).low_pass).values())
               for N in range(1, 9))
    fam = build_family(4, depth)
    pou = partition_of_unity_error(fam)
    gram = float(gram_errors(fam, 50, seed=7).max())
    two = two_scale_error(fam)
    ok = filt <= 1e-12 and pou <= 4 * 2.0**-depth and gram <= 1e-4 and two <= 1e-10
    record(7, ok, f"filter {filt:.1e}, partition {pou:.1e}, gram {gram:.1e}, "
                  f"two-scale {two:.1e}")


def test_criterion_8():
    rng = np.random.default_rng(8)
    failures = 0
    for seed in range(100):
        beta = float(rng.uniform(0, 2))
        gamma = float(rng.uniform(0.1, 2))
        alpha = gamma + float(rng.uniform(0.05, 2))
        f = admissible_field(seed, beta, p=int(rng.integers(1, 3)))
        failures += not check_coeff_interpolation(f, beta, gamma, alpha).holds
    single = CoefficientField.from_entries(2, 6, {TensorIndex(5, 1, (1, 2)): -0.8})
    worst = 0.0
    for beta, gamma, alpha in [(1, 1, 2), (0, 0.5, 1.5), (2, 1.2, 3)]:
        lhs, rhs, _ = check_coeff_interpolation(single, beta, gamma, alpha)
        expected = 6.0 ** (2 * (alpha - gamma) / (beta + alpha))
        worst = max(worst, abs(rhs / lhs / expected - 1))
    f = admissible_field(1, 1.0, p=2)
    exact = all(
        shift_smoothness(shift_smoothness(f, a, b), c, d).to_csv()
        == shift_smoothness(f, a + c, b + d).to_csv()
        for a, b, c, d in rng.uniform(-3, 3, (20, 4))
    )
    ok = failures == 0 and worst <= 1e-9 and exact
    record(8, ok, f"{failures}/100 random failures, single-entry error {worst:.1e}, "
                  f"composition exact: {exact}")


def test_criterion_9():
    fam = radius_grid(np.linspace(-0.003, 0.003, 21))
    single = radius_grid([0.002])
    truth = make_curve("circle_radius", eps=0.0)
    s_res = minimum_ipm_estimate(sample_iid(truth, 50, 1), single, 6)
    n_res = minimum_ipm_estimate(fam.measure(10), fam, 6)
    exact = s_res.chosen_index == 0 and n_res.chosen_index == 10 and abs(n_res.ipm) <= 1e-10
    scores = minimum_ipm_estimate(sample_iid(truth, 200, 2), fam, 6).scores
    invariant = all(select_candidate([s * c for s in scores]) == select_candidate(scores)
                    for c in (1e-3, 0.7, 42.0))
    rows = rate_experiment(truth, fam, [100, 400, 1600], 10, seed=0, gamma_eval=1.0, J=6)
    means = [s.mean_error for s in summarize_rates(rows)]
    inv = count_inversions(means)
    ok = exact and invariant and inv <= 1
    record(9, ok, f"exact {exact}, rescale-invariant {invariant}, mean errors "
                  f"{', '.join(f'{m:.4g}' for m in means)} ({inv} inversions)")


DETERMINISM_RUNS = {
    "fit-exponent": ["--n", "2,3,4", "--J", "5", "--nodes", "64"],
    "ipm": ["--index", "3", "--J", "5", "--nodes", "64", "--gamma", "0.5,1"],
    "example5": ["--n", "2,4,8", "--J", "5", "--nodes", "128", "--quad-nodes", "2048"],
    "estimate": ["--samples", "200", "--J", "5"],
    "rate": ["--n", "50,100,200", "--reps", "3", "--J", "5"],
    "wavelet-check": ["--pairs", "10"],
}


def test_criterion_10(tmp_path):
    mismatched = []
    for cmd, args in DETERMINISM_RUNS.items():
        blobs = []
        for w in (1, 4, 8):
            out = tmp_path / f"{cmd}-{w}"
            status = main([cmd, *args, "--workers", str(w), "--out", str(out), "--seed", "11"]
                          if cmd in ("estimate", "rate")
                          else [cmd, *args, "--workers", str(w), "--out", str(out)])
            assert status in (0, 1)
            blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if not (blobs[0] == blobs[1] == blobs[2]) or not blobs[0]:
            mismatched.append(cmd)
        json.loads(next(v for k, v in blobs[0].items() if k.endswith(".json")))
    record(10, not mismatched, f"{len(DETERMINISM_RUNS)} commands x workers 1/4/8, "
                               f"mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))

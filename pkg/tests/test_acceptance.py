"""Acceptance suite: one test per advertised guarantee, at pinned tolerances.

Each test prints through the terminal-summary hook in conftest.py as a
criterion PASS/FAIL line.  Golden analytic values are cross-checked
against an independent 40-digit mpmath computation (see test_exact1d.py);
everything discrete is compared against those values or against an
independent algebraic route.
"""

import json
import math
import time

import numpy as np
import pytest

from wrlab import exact1d
from wrlab.assembly import (
    assemble_generator,
    build_kernel_blocks,
    constant_coefficients,
)
from wrlab.cli import main
from wrlab.meshspace import Grid1D
from wrlab.orderchecks import certify_markov, check_domination, pmp_check
from wrlab.semigroup import (
    AsymptoticKind,
    asymptotic_classify,
    empirical_eventual_positivity,
    empirical_positivity,
    expm,
)
from wrlab.spectral import (
    VerdictReason,
    dissipative_regime_checks,
    eventual_positivity_spectral,
    spectral_projection_contour,
    spectrum,
)


def _build(descriptor, n, coeffs=None):
    grid = Grid1D(n)
    return assemble_generator(
        grid, coeffs or constant_coefficients(), build_kernel_blocks(grid, descriptor)
    )


def _skew_descriptor():
    # mean-zero profile against a mean-zero boundary weight pair
    return {"kind": "preset", "name": "skew",
            "f": lambda x: x - 0.5, "g": [1.0, -1.0]}


# ---------------------------------------------------------------------------
# 1. threshold constants
# ---------------------------------------------------------------------------

def test_criterion_01_thresholds(capsys):
    start = time.perf_counter()
    assert main(["thresholds"]) == 0
    doc = json.loads(capsys.readouterr().out)
    elapsed = time.perf_counter() - start

    assert doc["mu_p"] == pytest.approx(0.86033, abs=5e-4)
    assert doc["tau_p"] == pytest.approx(1.1349, abs=5e-4)
    assert doc["mu_s"] == pytest.approx(0.9307, abs=5e-4)
    assert doc["tau_s"] == pytest.approx(1.1474, abs=5e-4)
    assert doc["lambda2_0"] == pytest.approx(-1.707, abs=5e-3)
    assert doc["lambda3_0"] == pytest.approx(-13.492, abs=5e-2)
    assert doc["tau_star"] == pytest.approx(5.891, abs=5e-3)

    for name, value in doc["residuals"].items():
        assert abs(value) <= 1e-12, f"residual {name} = {value}"

    assert doc["tau_p"] == pytest.approx(
        doc["mu_p"] / math.sin(doc["mu_p"]), abs=1e-12
    )
    assert doc["tau_star"] == pytest.approx(
        0.5 * abs(doc["lambda3_0"] - doc["lambda2_0"]), abs=1e-12
    )
    assert elapsed < 1.0


# ---------------------------------------------------------------------------
# 2. ordering chain
# ---------------------------------------------------------------------------

def test_criterion_02_ordering():
    th = exact1d.compute_thresholds()
    assert 0.0 < th.tau_p < th.tau_s < th.tau_star
    assert math.sqrt(-th.lambda2_0) < math.pi / 2 < math.pi < math.sqrt(-th.lambda3_0)


# ---------------------------------------------------------------------------
# 3. discrete-analytic agreement and mesh convergence
# ---------------------------------------------------------------------------

def _analytic_top_two(tau):
    th = exact1d.compute_thresholds()
    if abs(tau) <= 1e-12:
        return np.array([0.0, th.lambda2_0], dtype=complex)
    if tau < th.tau_s:
        window = [r for r in exact1d.real_eigenvalues(tau) if r.in_window]
        return np.array([window[0].lam, window[1].lam], dtype=complex)
    lam, lam_bar = exact1d.complex_leading_pair(tau)
    return np.array([lam, lam_bar])


def test_criterion_03_discrete_agreement(make_spectrum):
    start = time.perf_counter()
    sizes = (250, 500, 1000)
    for tau in (0.0, 0.5, 1.0, 1.14, 1.2, 2.0):
        exact = _analytic_top_two(tau)
        errors = []
        for n in sizes:
            rep = make_spectrum(tau if tau else None, n, 2)
            err = np.abs(rep.eigenvalues[:2] - exact).max()
            errors.append(err)
        assert errors[-1] <= 2e-3, f"tau={tau}: n=1000 error {errors[-1]:.2e}"
        # least-squares order of convergence across the mesh doubling
        slope, _ = np.polyfit(np.log2(sizes), np.log2(errors), 1)
        assert -slope >= 1.8, f"tau={tau}: order {-slope:.2f}, errors {errors}"
    assert time.perf_counter() - start < 60.0


# ---------------------------------------------------------------------------
# 4. regime transitions
# ---------------------------------------------------------------------------

def test_criterion_04_regimes(make_spectrum):
    th = exact1d.compute_thresholds()
    Regime = exact1d.Regime

    assert exact1d.classify(0.0).regime is Regime.PositiveSemigroup
    assert exact1d.classify(1.10).regime is Regime.EventuallyStronglyPositive
    assert exact1d.classify(1.14).regime is Regime.DominantSignChanging
    for tau in (1.20, 5.0):
        result = exact1d.classify(tau)
        assert result.regime is Regime.ComplexDominantPair
        assert abs(complex(result.leading_eigenvalues[0]).imag) > 1e-4
    assert exact1d.classify(th.tau_s).regime is Regime.JordanDefect

    # independent discrete route: real pair below, conjugate pair above
    low = make_spectrum(1.10, 300, 2).eigenvalues
    assert np.abs(low.imag).max() <= 1e-8
    assert low[0] != low[1]
    high = make_spectrum(1.20, 300, 2).eigenvalues
    assert abs(high[0].imag) > 1e-4
    assert high[1] == pytest.approx(high[0].conjugate(), rel=1e-10)


# ---------------------------------------------------------------------------
# 5. eigenfunction zero structure
# ---------------------------------------------------------------------------

def test_criterion_05_eigenfunction():
    th = exact1d.compute_thresholds()

    plus = exact1d.eigenfunction(th.tau_p, th.mu_p)
    assert plus.zero_kind == "boundary"
    assert plus.zero == pytest.approx(1.0, abs=1e-8)

    minus = exact1d.eigenfunction(-th.tau_p, th.mu_p)
    assert minus.zero_kind == "boundary"
    assert minus.zero == pytest.approx(0.0, abs=1e-8)

    below = exact1d.eigenfunction(exact1d.tau_of_mu(th.mu_p - 1e-3), th.mu_p - 1e-3)
    assert below.zero_kind == "none"
    above = exact1d.eigenfunction(exact1d.tau_of_mu(th.mu_p + 1e-3), th.mu_p + 1e-3)
    assert above.zero_kind == "interior"
    assert 0.0 < above.zero < 1.0


# ---------------------------------------------------------------------------
# 6. positivity equivalence (sign pattern vs exponential)
# ---------------------------------------------------------------------------

def test_criterion_06_positivity_equivalence():
    rng = np.random.default_rng(2026)
    mismatches = []
    metzler_seen = 0
    for k in range(100):
        A = rng.uniform(-1.0, 1.0, (6, 6))
        if k % 2 == 0:
            # force the Metzler sign pattern on half the draws
            diag = np.diag(A).copy()
            A = np.abs(A)
            np.fill_diagonal(A, diag)
        metzler = pmp_check(A).passed
        metzler_seen += metzler
        exp_nonneg = all(expm(A, t).min() >= -1e-10 for t in (0.1, 1.0, 10.0))
        if metzler != exp_nonneg:
            mismatches.append(k)
    assert metzler_seen == 50
    assert mismatches == []


# ---------------------------------------------------------------------------
# 7. Markov conservation and domination
# ---------------------------------------------------------------------------

def test_criterion_07_markov_conservation():
    gen = _build({"kind": "zero"}, 500)
    cert = certify_markov(gen.coeffs, gen.coupling, gen.grid)
    assert cert.markov
    ones = np.ones(gen.size)
    for t in (0.1, 1.0, 10.0):
        assert np.abs(expm(gen.G, t) @ ones - ones).max() <= 1e-10

    top = _build({"kind": "zero"}, 100)
    low = _build({"kind": "dense", "B11": (-0.4 * np.eye(101)).tolist()}, 100)
    assert check_domination(low.G, top.G)
    for t in (0.1, 1.0, 10.0):
        e_low = expm(low.G, t)
        e_top = expm(top.G, t)
        assert e_low.min() >= -1e-10
        assert (e_top - e_low).min() >= -1e-10


# ---------------------------------------------------------------------------
# 8. asymptotic trichotomy
# ---------------------------------------------------------------------------

def test_criterion_08_trichotomy():
    markov = asymptotic_classify(_build({"kind": "zero"}, 120))
    assert markov.kind is AsymptoticKind.ConvergesToProjection
    assert markov.reference == pytest.approx(1.707, abs=5e-3)
    assert markov.relative_error <= 0.10

    decay = asymptotic_classify(
        _build({"kind": "dense", "B11": (-0.4 * np.eye(121)).tolist()}, 120)
    )
    assert decay.kind is AsymptoticKind.DecaysExponentially
    assert decay.reference < 0
    assert decay.relative_error <= 0.10

    growth = asymptotic_classify(
        _build({"kind": "separable", "f": 0.6, "g": [1.0, 1.0],
                "blocks": ["B12"]}, 120)
    )
    assert growth.kind is AsymptoticKind.GrowsExponentially
    assert growth.reference > 0
    assert growth.relative_error <= 0.10


# ---------------------------------------------------------------------------
# 9. kernel degeneracy of the boundary-difference coupling
# ---------------------------------------------------------------------------

def test_criterion_09_kernel_degeneracy():
    gen = _build({"kind": "preset", "name": "example-6.10"}, 400)
    rep = spectrum(gen, count=4)
    assert int(np.sum(np.abs(rep.all_eigenvalues) <= 1e-6)) == 2

    w = rep.weights
    kernel = rep.right_vectors[:, :2].real
    span = np.stack([np.ones(gen.size), gen.grid.nodes], axis=1)

    def m_orthonormalize(basis):
        Q = basis.astype(float).copy()
        for j in range(Q.shape[1]):
            for i in range(j):
                Q[:, j] -= ((Q[:, i] * w) @ Q[:, j]) * Q[:, i]
            Q[:, j] /= np.sqrt((Q[:, j] * w) @ Q[:, j])
        return Q

    q_kernel = m_orthonormalize(kernel)
    q_span = m_orthonormalize(span)
    cosines = np.linalg.svd(q_kernel.T @ (w[:, None] * q_span), compute_uv=False)
    angles = np.arccos(np.clip(cosines, -1.0, 1.0))
    assert angles.max() <= 1e-3


# ---------------------------------------------------------------------------
# 10. eventual positivity: spectral vs empirical routes
# ---------------------------------------------------------------------------

def test_criterion_10_eventual_positivity(make_gen, make_spectrum):
    gen, rep = make_gen(0.5, 300), make_spectrum(0.5, 300)
    verdict = eventual_positivity_spectral(gen, report=rep)
    probe = empirical_eventual_positivity(gen, report=rep)
    assert verdict.holds and probe.holds_up_to_horizon
    assert probe.t0 is not None and np.isfinite(probe.t0)

    gen, rep = make_gen(1.14, 300), make_spectrum(1.14, 300)
    verdict = eventual_positivity_spectral(gen, report=rep)
    probe = empirical_eventual_positivity(gen, report=rep)
    assert not verdict.holds and not probe.holds_up_to_horizon
    assert verdict.reason is VerdictReason.EigvecSignChanging
    assert probe.worst_tail_ratio < 0  # sign-changing tail

    gen, rep = make_gen(2.0, 300), make_spectrum(2.0, 300)
    verdict = eventual_positivity_spectral(gen, report=rep)
    probe = empirical_eventual_positivity(gen, report=rep)
    assert not verdict.holds and not probe.holds_up_to_horizon
    assert verdict.reason is VerdictReason.ComplexDominantPair

    # eventual but not immediate positivity for the skew coupling
    skew = _build(_skew_descriptor(), 120)
    assert eventual_positivity_spectral(skew).holds
    early = empirical_positivity(skew, times=(0.005, 0.01, 0.05))
    assert not early.holds


# ---------------------------------------------------------------------------
# 11. spectral projection rank over the analysis box
# ---------------------------------------------------------------------------

def test_criterion_11_projection_rank(make_gen, make_spectrum):
    box = exact1d.analysis_box()
    for tau in (0.5, 1.0, 1.2, 3.0):
        gen, rep = make_gen(tau, 150), make_spectrum(tau, 150)
        result = spectral_projection_contour(gen, box, report=rep)
        assert result.rank == 2, f"tau={tau}: rank {result.rank}"
        assert result.idempotency_residual <= 1e-6
        assert exact1d.count_zeros_in_box(tau) == 2
        assert result.count_inside == 2


# ---------------------------------------------------------------------------
# 12. dissipative regime: spectral bound and imaginary axis
# ---------------------------------------------------------------------------

def test_criterion_12_dissipative_regime(make_gen, make_spectrum):
    skew = dissipative_regime_checks(_build(_skew_descriptor(), 150))
    assert abs(skew.spectral_bound) <= 1e-8
    assert skew.coupling_kills_ones
    assert skew.ones_alignment == pytest.approx(1.0, abs=1e-6)
    assert skew.imaginary_axis_clean

    for tau in (0.5, 1.0):
        rot = dissipative_regime_checks(
            make_gen(tau, 150), report=make_spectrum(tau, 150)
        )
        assert rot.spectral_bound < -1e-6
        assert rot.imaginary_axis_clean
        assert not rot.coupling_kills_ones

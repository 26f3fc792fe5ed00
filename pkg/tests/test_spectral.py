"""Tests for the eigensolver wrapper, dominance classification,
contour projections and the spectral eventual-positivity verdict."""

from types import SimpleNamespace

import numpy as np
import pytest

from wrlab.assembly import (
    assemble_generator,
    build_kernel_blocks,
    constant_coefficients,
)
from wrlab.errors import ContourError, PreconditionError
from wrlab.exact1d import analysis_box, compute_thresholds
from wrlab.meshspace import Grid1D
from wrlab.spectral import (
    Simplicity,
    VerdictReason,
    classify_dominance,
    dissipative_regime_checks,
    eventual_positivity_spectral,
    spectral_projection_contour,
    spectrum,
)

# mpmath oracles shared with the closed-form tests
LAM1_AT_HALF = -0.08760728788542777
LAM2_AT_HALF = -1.6242978978907678
LAMBDA2_0 = -1.7070529755509225
PAIR_AT_TAU_2 = -0.8921027024552899 + 1.2214552125932868j


def _skew_gen(n=120):
    grid = Grid1D(n)
    coupling = build_kernel_blocks(
        grid,
        {"kind": "preset", "name": "skew", "f": lambda x: x - 0.5, "g": [1.0, -1.0]},
    )
    return assemble_generator(grid, constant_coefficients(), coupling)


# ---------------------------------------------------------------------------
# eigensolver paths
# ---------------------------------------------------------------------------

def test_symmetric_path_on_conservative_generator(make_spectrum):
    rep = make_spectrum(None, 200)
    assert rep.symmetric_path
    assert np.abs(rep.eigenvalues.imag).max() == 0.0
    assert rep.eigenvalues[0].real == pytest.approx(0.0, abs=1e-10)
    assert rep.eigenvalues[1].real == pytest.approx(LAMBDA2_0, abs=2e-4)
    # self-adjoint problem: the M-adjoint family coincides with the right one
    assert np.allclose(rep.left_vectors, rep.right_vectors)
    assert rep.pairing(0) == pytest.approx(1.0, abs=1e-12)


def test_sorted_descending_and_conjugates_adjacent(make_spectrum):
    rep = make_spectrum(2.0, 150)
    reals = rep.eigenvalues.real
    assert np.all(reals[:-1] >= reals[1:] - 1e-12)
    assert rep.eigenvalues[0].imag > 0
    assert rep.eigenvalues[1] == pytest.approx(
        rep.eigenvalues[0].conjugate(), rel=1e-12
    )


def test_nonsymmetric_path_matches_analytic_spectrum(make_spectrum):
    rep = make_spectrum(0.5, 200)
    assert not rep.symmetric_path
    assert rep.eigenvalues[0].real == pytest.approx(LAM1_AT_HALF, abs=2e-4)
    assert rep.eigenvalues[1].real == pytest.approx(LAM2_AT_HALF, abs=2e-4)
    assert rep.spectral_bound == pytest.approx(LAM1_AT_HALF, abs=2e-4)
    assert rep.gap == pytest.approx(LAM1_AT_HALF - LAM2_AT_HALF, abs=4e-4)
    assert rep.dominant


def test_complex_pair_matches_analytic_pair(make_spectrum):
    rep = make_spectrum(2.0, 200)
    lam = rep.eigenvalues[0]
    assert lam.real == pytest.approx(PAIR_AT_TAU_2.real, abs=2e-4)
    assert lam.imag == pytest.approx(PAIR_AT_TAU_2.imag, abs=2e-4)
    assert not rep.dominant


def test_biorthogonality_of_left_right_families(make_spectrum):
    rep = make_spectrum(0.5, 120)
    k = 4
    gram = np.array(
        [
            [rep.m_inner(rep.right_vectors[:, j], rep.left_vectors[:, i])
             for j in range(k)]
            for i in range(k)
        ]
    )
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() < 1e-8 * np.abs(np.diag(gram)).min()


def test_adjoint_coupling_has_identical_spectrum(make_gen):
    plus = spectrum(make_gen(0.7, 100), count=6)
    grid = Grid1D(100)
    minus_gen = assemble_generator(
        grid,
        constant_coefficients(),
        build_kernel_blocks(grid, {"kind": "preset", "name": "example-8.1", "tau": -0.7}),
    )
    minus = spectrum(minus_gen, count=6)
    assert np.allclose(plus.eigenvalues, minus.eigenvalues, atol=1e-10)


def test_count_is_clipped_to_size():
    grid = Grid1D(5)
    gen = assemble_generator(
        grid, constant_coefficients(), build_kernel_blocks(grid, {"kind": "zero"})
    )
    rep = spectrum(gen, count=100)
    assert rep.count == gen.size == 6
    assert rep.eigenvalues.shape == (6,)
    assert rep.all_eigenvalues.shape == (6,)


def test_right_vectors_have_unit_weighted_norm(make_spectrum):
    rep = make_spectrum(0.5, 80)
    for i in range(rep.count):
        v = rep.right_vectors[:, i]
        assert abs(rep.m_inner(v, v)) == pytest.approx(1.0, abs=1e-10)


def test_residuals_are_certified(make_spectrum):
    rep = make_spectrum(2.0, 150)
    gen_norm_scale = 1e-8
    assert rep.residual_max <= gen_norm_scale * 4 * 150**2 * 10


def test_report_serializes():
    import json

    grid = Grid1D(30)
    gen = assemble_generator(
        grid, constant_coefficients(), build_kernel_blocks(grid, {"kind": "zero"})
    )
    payload = json.dumps(spectrum(gen).to_dict())
    assert '"symmetric_path": true' in payload


# ---------------------------------------------------------------------------
# dominance / simplicity classification
# ---------------------------------------------------------------------------

def test_small_coupling_is_algebraically_simple(make_spectrum):
    result = classify_dominance(make_spectrum(0.5, 200))
    assert result.dominant
    assert result.simple is Simplicity.AlgebraicallySimple
    assert result.details["pairing"] > 0.1


def test_coalescence_is_degenerate_at_matching_cluster_tol(make_gen):
    # the discrete leading pair at the coalescence coupling splits like
    # O(h), so the cluster tolerance must sit above that splitting scale
    th = compute_thresholds()
    rep = spectrum(make_gen(th.tau_s, 200), cluster_tol=1e-2)
    result = classify_dominance(rep)
    assert not result.dominant
    assert result.simple is Simplicity.Degenerate
    assert result.details["cluster_size"] == 2
    # Jordan-type defect: the clustered eigenvectors are nearly parallel
    assert result.details["max_vector_alignment"] > 0.999
    assert result.details["pairing"] < 1e-2


def test_defective_pairing_is_geometrically_simple_only():
    G = np.array([[0.0, 1e8], [0.0, -5.0]])
    gen = SimpleNamespace(
        G=G,
        A_form=-G,
        size=2,
        grid=SimpleNamespace(n=1),
        weights=SimpleNamespace(w=np.ones(2)),
    )
    rep = spectrum(gen, count=2)
    result = classify_dominance(rep)
    assert result.details["cluster_size"] == 1
    assert result.simple is Simplicity.GeometricallySimpleOnly


# ---------------------------------------------------------------------------
# contour projection
# ---------------------------------------------------------------------------

def test_projection_rank_two_over_analysis_box(make_gen, make_spectrum):
    gen = make_gen(0.5, 120)
    rep = make_spectrum(0.5, 120)
    result = spectral_projection_contour(gen, analysis_box(), report=rep)
    assert result.rank == 2
    assert result.count_inside == 2
    assert result.idempotency_residual <= 1e-6
    assert result.consistent


def test_projection_isolates_leading_eigenvalue(make_gen, make_spectrum):
    gen = make_gen(0.5, 120)
    rep = make_spectrum(0.5, 120)
    result = spectral_projection_contour(gen, (-0.5, 0.5, -0.5, 0.5), report=rep)
    assert result.rank == 1
    assert result.count_inside == 1
    # the projection reproduces the dominant eigenvector
    v = rep.right_vectors[:, 0]
    assert np.linalg.norm(result.projection @ v - v) < 1e-6 * np.linalg.norm(v)


def test_projection_of_complex_pair(make_gen, make_spectrum):
    gen = make_gen(2.0, 120)
    rep = make_spectrum(2.0, 120)
    result = spectral_projection_contour(gen, analysis_box(), report=rep)
    assert result.rank == 2
    assert result.count_inside == 2


def test_contour_rejects_eigenvalue_on_the_path(make_gen, make_spectrum):
    gen = make_gen(0.5, 120)
    rep = make_spectrum(0.5, 120)
    lam1 = rep.all_eigenvalues[0].real
    with pytest.raises(ContourError):
        spectral_projection_contour(gen, (-1.0, lam1, -0.5, 0.5), report=rep)


def test_contour_rejects_quadrature_poisoned_by_nearby_eigenvalue(
    make_gen, make_spectrum
):
    gen = make_gen(0.5, 120)
    rep = make_spectrum(0.5, 120)
    lam1 = rep.all_eigenvalues[0].real
    # edge passes dist_tol but sits close enough to break idempotency
    with pytest.raises(ContourError):
        spectral_projection_contour(
            gen, (-1.0, lam1 + 2e-5, -0.5, 0.5), report=rep, dist_tol=1e-6
        )


def test_empty_box_has_rank_zero(make_gen, make_spectrum):
    gen = make_gen(0.5, 120)
    rep = make_spectrum(0.5, 120)
    result = spectral_projection_contour(gen, (2.0, 3.0, -0.5, 0.5), report=rep)
    assert result.rank == 0
    assert result.count_inside == 0
    assert result.consistent


# ---------------------------------------------------------------------------
# spectral eventual positivity
# ---------------------------------------------------------------------------

def test_eventual_positivity_holds_below_first_threshold(make_gen, make_spectrum):
    verdict = eventual_positivity_spectral(
        make_gen(0.5, 200), report=make_spectrum(0.5, 200)
    )
    assert verdict.holds
    assert verdict.reason is VerdictReason.DominantSimpleStrictEigvecs
    assert verdict.delta_primal > 0.3
    assert verdict.delta_dual > 0.05


def test_eventual_positivity_fails_with_sign_change(make_gen, make_spectrum):
    verdict = eventual_positivity_spectral(
        make_gen(1.14, 200), report=make_spectrum(1.14, 200)
    )
    assert not verdict.holds
    assert verdict.reason is VerdictReason.EigvecSignChanging
    assert min(verdict.delta_primal, verdict.delta_dual) < 0


def test_eventual_positivity_fails_for_complex_pair(make_gen, make_spectrum):
    verdict = eventual_positivity_spectral(
        make_gen(2.0, 200), report=make_spectrum(2.0, 200)
    )
    assert not verdict.holds
    assert verdict.reason is VerdictReason.ComplexDominantPair


def test_eventual_positivity_degrades_at_boundary_threshold(make_gen):
    th = compute_thresholds()
    gen = make_gen(th.tau_p, 200)
    verdict = eventual_positivity_spectral(gen, pos_tol=1e-3)
    assert not verdict.holds
    assert verdict.reason in (
        VerdictReason.EigvecNotStrictlyPositive,
        VerdictReason.EigvecSignChanging,
    )
    # the eigenvector is on the edge of positivity, not deep into sign change
    assert abs(min(verdict.delta_primal, verdict.delta_dual)) < 1e-2


def test_eventual_positivity_not_simple_at_coalescence(make_gen):
    th = compute_thresholds()
    rep = spectrum(make_gen(th.tau_s, 200), cluster_tol=1e-2)
    verdict = eventual_positivity_spectral(make_gen(th.tau_s, 200), report=rep)
    assert not verdict.holds
    assert verdict.reason is VerdictReason.NotAlgebraicallySimple


def test_skew_coupling_is_eventually_positive_with_flat_profile():
    gen = _skew_gen()
    verdict = eventual_positivity_spectral(gen)
    assert verdict.holds
    assert verdict.delta_primal == pytest.approx(1.0, abs=1e-6)
    assert verdict.delta_dual == pytest.approx(1.0, abs=1e-6)


def test_verdict_serializes(make_gen, make_spectrum):
    import json

    verdict = eventual_positivity_spectral(
        make_gen(0.5, 120), report=make_spectrum(0.5, 120)
    )
    payload = json.loads(json.dumps(verdict.to_dict()))
    assert payload["holds"] is True
    assert payload["reason"] == "DominantSimpleStrictEigvecs"


# ---------------------------------------------------------------------------
# dissipative regime checks
# ---------------------------------------------------------------------------

def test_skew_coupling_passes_all_dissipative_checks():
    report = dissipative_regime_checks(_skew_gen())
    assert report.all_ok
    assert report.bound_is_zero
    assert report.coupling_kills_ones
    assert report.kernel_iff_bound
    assert report.ones_alignment == pytest.approx(1.0, abs=1e-8)


def test_rotation_coupling_is_dissipative_with_negative_bound(make_gen):
    report = dissipative_regime_checks(make_gen(1.0, 150))
    assert report.all_ok
    assert report.spectral_bound < -1e-6
    assert not report.coupling_kills_ones
    assert not report.bound_is_zero
    assert report.imaginary_axis_clean
    assert report.ones_alignment is None


def test_dissipative_checks_require_driftless_form():
    grid = Grid1D(40)
    gen = assemble_generator(
        grid,
        constant_coefficients(1.0, 0.5),
        build_kernel_blocks(grid, {"kind": "zero"}),
    )
    with pytest.raises(PreconditionError):
        dissipative_regime_checks(gen)


def test_dissipative_checks_reject_expansive_coupling():
    grid = Grid1D(40)
    gen = assemble_generator(
        grid,
        constant_coefficients(),
        build_kernel_blocks(
            grid, {"kind": "separable", "f": 0.6, "g": [1.0, 1.0], "blocks": ["B12"]}
        ),
    )
    with pytest.raises(PreconditionError):
        dissipative_regime_checks(gen)

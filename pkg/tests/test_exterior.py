import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mas_lab import exterior as ex
from mas_lab import spectral
from mas_lab.common import CRITICAL, PHYSICAL, UNPHYSICAL
from mas_lab.elliptic import zigzag_fraction
from mas_lab.exceptions import ConvergenceWarning, DomainError

# 60-digit dense solves of the collocation equations (tests/oracles/compute_oracles.py)
I0_N81 = 2727.3497428492047943
MEAN_N81 = 2646.7628540839071631
I40_N81 = 2646.7496097715394081
I0_N101 = 44271.546271723388644
I0_TRAD_N81 = 80.586888765472134525
KAPPA_N81 = 5213793234134.83
KAPPA_TRAD_N81 = 3827173.17583641


def rel(a, b):
    return np.abs(np.asarray(a) - b).max() / np.abs(b).max()


@st.composite
def problems(draw, scheme=None):
    rho_cyl = draw(st.floats(1.0, 10.0))
    rho_aux = rho_cyl * draw(st.floats(0.3, 0.95))
    rho_fil = rho_cyl * draw(st.floats(1.05, 3.0))
    n = draw(st.integers(3, 41))
    return ex.ExteriorCircularProblem(rho_cyl, rho_fil, rho_aux, n, scheme or draw(st.sampled_from(ex.SCHEMES)))


# ----------------------------------------------------------- construction


@pytest.mark.parametrize("radii", [(8, 10, 8), (8, 10, 9), (8, 8, 5), (8, 7, 5), (8, 10, 0)])
def test_ordering_enforced(radii):
    rc, rf, ra = radii
    with pytest.raises(DomainError, match="rho_aux < rho_cyl < rho_fil"):
        ex.ExteriorCircularProblem(rc, rf, ra, 11)


def test_other_validation():
    with pytest.raises(DomainError):
        ex.ExteriorCircularProblem(8, 10, 5.5, 2)
    with pytest.raises(DomainError):
        ex.ExteriorCircularProblem(8, 10, 5.5, 11, scheme="other")
    with pytest.raises(DomainError):
        ex.ExteriorCircularProblem(8, 10, 5.5, 11, d_ref=0)


def test_regimes(fig2):
    assert ex.regime(fig2) == (UNPHYSICAL, pytest.approx(6.4 / 5.5))
    assert ex.regime(fig2.with_(rho_aux=7.0)).kind == PHYSICAL
    assert ex.regime(fig2.with_(rho_aux=6.4)).kind == CRITICAL


# --------------------------------------------------------------- assembly


def test_assembly_examples(fig2, fig2_trad):
    row, rhs = ex.assemble_system(fig2)
    assert row[0] == pytest.approx(2.2, rel=1e-15)
    assert rhs[0] == pytest.approx(4.0, rel=1e-15)
    row_t, rhs_t = ex.assemble_system(fig2_trad)
    np.testing.assert_array_equal(row_t - row, 1.0)
    np.testing.assert_array_equal(rhs_t, rhs)


def test_assembly_sign_convention(fig2):
    # D_p / I is rho_cyl (rho_cyl - rho_fil cos) / R^2; at p = 0 that is rho_cyl / (rho_fil - rho_cyl) in size
    _, rhs = ex.assemble_system(fig2)
    assert abs(rhs[0]) == pytest.approx(8 / (10 - 8))


def test_assembly_exactly_even_and_scale_free(fig2):
    row, rhs = ex.assemble_system(fig2)
    np.testing.assert_array_equal(row, row[(-np.arange(81)) % 81])
    np.testing.assert_array_equal(rhs, rhs[(-np.arange(81)) % 81])
    a = spectral.circulant_matrix(row)
    np.testing.assert_array_equal(a, a.T)
    r2, b2 = ex.assemble_system(fig2.with_(d_ref=7.0))
    np.testing.assert_array_equal(r2, row)
    np.testing.assert_array_equal(b2, rhs)


def test_rectangular_assembly_reduces_to_square(fig2):
    row, rhs = ex.assemble_system(fig2.with_(N=21))
    a, b = ex.assemble_rectangular(fig2.with_(N=21), 21)
    np.testing.assert_allclose(a, spectral.circulant_matrix(row), atol=1e-14)
    np.testing.assert_allclose(b, rhs, atol=1e-14)
    with pytest.raises(DomainError):
        ex.assemble_rectangular(fig2, 40)


def test_matrix_and_rhs_spectra_closed_form(fig2, fig2_trad):
    for p in (fig2, fig2_trad):
        row, rhs = ex.assemble_system(p)
        np.testing.assert_allclose(spectral.dft(row).real, ex.matrix_spectrum_exact(p), atol=1e-15 * np.abs(row).max())
        np.testing.assert_allclose(spectral.dft(rhs).real, ex.rhs_spectrum_exact(p), atol=1e-15 * np.abs(rhs).max())
    assert ex.matrix_spectrum_exact(fig2)[0] == pytest.approx(0.6875**81 / (1 - 0.6875**81), rel=1e-13)
    assert ex.matrix_spectrum_exact(fig2)[0] == pytest.approx(6.6e-14, rel=0.01)


# ---------------------------------------------------------------- spectra


def test_spectrum_examples(fig2):
    s = ex.spectrum_exact(fig2)
    assert s[1] == pytest.approx((1 / 81) * (0.8 / 0.6875), rel=1e-6)
    np.testing.assert_allclose(s, s[(-np.arange(81)) % 81], rtol=1e-15)
    assert s[0] == pytest.approx(MEAN_N81, rel=1e-11)


def test_spectrum_log10_and_overflow(fig2):
    big = fig2.with_(rho_aux=1.0, N=2001)
    lg = ex.spectrum_exact_log10(big)
    assert lg[0] > 300
    with pytest.raises(OverflowError):
        ex.spectrum_exact(big)
    np.testing.assert_allclose(10 ** ex.spectrum_exact_log10(fig2), ex.spectrum_exact(fig2), rtol=1e-13)


def test_scheme_relation(fig2, fig2_trad):
    s, st_ = ex.spectrum_exact(fig2), ex.spectrum_exact(fig2_trad)
    np.testing.assert_allclose(st_[1:], s[1:], rtol=1e-15)
    assert st_[0] / s[0] == pytest.approx((5.5 / 8) ** 81, rel=1e-12)


@given(problems())
def test_spectrum_matches_circulant_solve(p):
    row, rhs = ex.assemble_system(p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = spectral.solve_circulant(row, rhs)
    exact = ex.spectrum_exact(p)
    # each mode is computed from D^(m) / (N B^(m)); roundoff in the tiny B^(m) sets the error
    eps = np.finfo(float).eps
    scale = np.abs(exact) * np.abs(row).sum() + np.abs(rhs).sum()
    bound = 10 * eps * scale / np.abs(p.N * ex.matrix_spectrum_exact(p))
    assert np.all(np.abs(res.spectrum.real - exact) <= bound + 1e-12 * np.abs(exact))


@pytest.mark.xfail(strict=True, reason="1e-12 relative on every mode is below double-precision roundoff for B^(0) ~ 7e-14")
def test_circulant_spectrum_relative_1e12_all_modes(fig2):
    row, rhs = ex.assemble_system(fig2)
    res = spectral.solve_circulant(row, rhs)
    np.testing.assert_allclose(res.spectrum.real, ex.spectrum_exact(fig2), rtol=1e-12)


# --------------------------------------------------------------- currents


def test_currents_against_mpmath(fig2, fig2_trad):
    c = ex.currents(fig2).currents
    assert c[0] == pytest.approx(I0_N81, rel=1e-11)
    assert c[40] == pytest.approx(I40_N81, rel=1e-11)
    assert c.mean() == pytest.approx(MEAN_N81, rel=1e-11)
    assert ex.currents(fig2_trad).currents[0] == pytest.approx(I0_TRAD_N81, rel=1e-9)
    assert ex.currents(fig2.with_(N=101)).currents[0] == pytest.approx(I0_N101, rel=1e-11)


def test_solution_invariants(fig2):
    for solver in ("dft_exact", "circulant", "dense_solve"):
        sol = ex.currents(fig2, solver)
        np.testing.assert_allclose(sol.spectrum, sol.spectrum[(-np.arange(81)) % 81], rtol=1e-10)
        assert sol.currents.sum() == pytest.approx(81 * sol.spectrum[0], rel=1e-10)
    sol = ex.currents(fig2)
    np.testing.assert_allclose(spectral.dft(sol.currents).real, ex.spectrum_exact(fig2), rtol=1e-10)


@pytest.mark.parametrize("scheme", ex.SCHEMES)
@pytest.mark.parametrize("n", [11, 21, 41])
def test_solver_routes_agree(fig2, scheme, n):
    p = fig2.with_(N=n, scheme=scheme)
    ref = ex.currents(p).currents
    for solver in ("circulant", "dense_solve", "least_squares"):
        assert rel(ex.currents(p, solver).currents, ref) <= 1e-6


def test_dense_route_at_fig2(fig2):
    assert rel(ex.currents(fig2, "dense_solve").currents, ex.currents(fig2).currents) <= 1e-3


def test_dense_route_breaks_at_101(fig2):
    p = fig2.with_(N=101)
    i_dft = ex.currents(p).currents[0]
    assert i_dft == pytest.approx(4.4e4, rel=0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        i_dense = ex.currents(p, "dense_solve").currents[0]
    assert abs(i_dense / i_dft - 1) > 0.1


def test_least_squares_keeps_oscillations(fig2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = ex.currents(fig2, "least_squares", M=162)
    assert sol.extra["M"] == 162
    quarter = slice(0, 81 // 4)
    assert zigzag_fraction(sol.currents[quarter]) >= 0.9
    assert zigzag_fraction(ex.currents(fig2).currents[quarter]) >= 0.9
    # the potential is still accurate even though the mean drifts
    err, scale = ex.convergence_error(fig2, sol)
    assert err <= 1e-5 * scale


def test_unknown_solver(fig2):
    with pytest.raises(ValueError):
        ex.currents(fig2, "magic")


def test_critical_currents(fig2):
    p = fig2.with_(rho_aux=6.4, N=201)
    c = ex.currents(p).currents
    assert c[0] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(c[1:]).max() <= 1e-3
    ct = ex.currents(p.with_(scheme="traditional")).currents
    np.testing.assert_allclose(ct[1:], -1 / 201, rtol=1e-10)


def test_physical_currents_bounded(fig2):
    p = fig2.with_(rho_aux=7.0)
    c = ex.currents(p).currents
    assert np.abs(c).max() <= 4 * np.abs(ex.smooth_part(p.t, 81)).max()


def test_physical_density_converges(fig2):
    # K = N I_l / (2 pi rho_aux) sampled on a common angular grid
    p = fig2.with_(rho_aux=7.0)
    k41 = 41 * ex.currents(p.with_(N=41)).currents / (2 * math.pi * 7.0)
    k81 = 81 * ex.currents(p.with_(N=81)).currents / (2 * math.pi * 7.0)
    k161 = 161 * ex.currents(p.with_(N=161)).currents / (2 * math.pi * 7.0)
    d1 = np.abs(k81[::2][:41] - k41).max()
    d2 = np.abs(k161[::2][:81] - k81).max()
    assert d2 < d1


# ------------------------------------------------------------ asymptotics


def test_asymptotic_mean_and_agreement_bounded(fig2):
    assert ex.mean_term(fig2) == pytest.approx((6.4 / 5.5) ** 81 / 81, rel=1e-14)
    assert ex.mean_term(fig2) == pytest.approx(2.65e3, rel=0.01)
    exact = ex.currents(fig2).currents
    assert rel(ex.currents_asymptotic(fig2), exact) <= 0.02
    assert rel(ex.currents_asymptotic_full(fig2), exact) <= 0.02


@pytest.mark.xfail(strict=True, reason="traditional-scheme asymptotics deviate by 6.6%")
def test_asymptotic_agreement_traditional(fig2_trad):
    assert rel(ex.currents_asymptotic(fig2_trad), ex.currents(fig2_trad).currents) <= 0.02


def test_asymptotic_traditional_shape(fig2, fig2_trad):
    # same oscillation as the bounded scheme with the mean removed
    np.testing.assert_allclose(
        ex.currents_asymptotic(fig2_trad), ex.currents_asymptotic(fig2) - ex.mean_term(fig2), rtol=1e-9, atol=1e-9
    )
    assert ex.mean_term(fig2_trad) == pytest.approx(0.8**81 / 81, rel=1e-13)


def test_asymptotic_closed_forms_match_direct_sum():
    for t in (0.7, 1.16, 1.5):
        n = 31
        direct = ex.asymptotic_sum(t, n, 0.0)
        np.testing.assert_allclose(ex.oscillating_part(t, n) + ex.smooth_part(t, n), direct, atol=1e-12 * max(1, t ** (n / 2)))


def test_asymptotic_cases(fig2):
    phys = fig2.with_(rho_aux=7.0)
    np.testing.assert_array_equal(ex.currents_asymptotic(phys), ex.smooth_part(phys.t, 81))
    crit = fig2.with_(rho_aux=6.4)
    np.testing.assert_array_equal(ex.currents_asymptotic(crit), np.eye(81)[0])
    ct = ex.currents_asymptotic(crit.with_(scheme="traditional"))
    assert ct[0] == 1.0
    np.testing.assert_allclose(ct[1:], -1 / 81)


def test_asymptotic_even_n_not_implemented(fig2):
    with pytest.raises(NotImplementedError):
        ex.currents_asymptotic(fig2.with_(N=80))


def test_asymptotic_overflow_guard(fig2):
    with pytest.raises(OverflowError):
        ex.mean_term(fig2.with_(rho_aux=1.0, N=2001))


# -------------------------------------------------------------- potentials


def test_incident_potential(fig2):
    assert ex.potential_incident(fig2, 0.0, 1.0) == pytest.approx(-math.log(10) / (2 * math.pi))
    assert ex.potential_incident(fig2, 10.0, math.pi) == pytest.approx(-math.log(20) / (2 * math.pi))
    assert ex.potential_incident(fig2, 9.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        ex.potential_incident(fig2, 10.0, 0.0)


def test_exact_potential(fig2):
    assert ex.potential_exact(fig2, 8.0, math.pi) == pytest.approx(-math.log(14.4 / 8) / (2 * math.pi), rel=1e-14)
    assert ex.potential_exact(fig2, 8.0, math.pi) == pytest.approx(-0.09355, abs=1e-5)
    assert abs(ex.potential_exact(fig2, 8e9, 0.3)) <= 1e-8
    with pytest.raises(DomainError):
        ex.potential_exact(fig2, 6.0, 0.0)


@pytest.mark.parametrize("phi", np.linspace(0, math.pi, 7))
def test_exact_boundary_condition(fig2, phi):
    h = 1e-5
    f = lambda r: ex.potential_exact_total(fig2, r, phi)  # noqa: E731
    central = (f(8.0 + h) - f(8.0 - h)) / (2 * h)
    scale = abs(ex.potential_incident(fig2, 8.0 + h, phi) - ex.potential_incident(fig2, 8.0 - h, phi)) / (2 * h)
    assert abs(central) <= 1e-6 * max(scale, 1e-3) + 1e-9


def test_mas_potential_degenerate_single_source(fig2):
    p = fig2.with_(N=3)
    cur = np.array([1.0, 0.0, 0.0])
    r = math.hypot(12 - 5.5, 0.0)
    assert ex.potential_mas_direct(p, cur, 12.0, 0.0) == pytest.approx(-math.log(r / 12) / (2 * math.pi))


def test_mas_potential_far_field_bounded(fig2):
    sol = ex.currents(fig2)
    assert abs(ex.potential_mas_direct(fig2, sol, 8e6, 0.4)) <= 1e-4


@pytest.mark.parametrize("scheme", ex.SCHEMES)
def test_direct_vs_spectral(fig2, scheme):
    p = fig2.with_(scheme=scheme)
    sol = ex.currents(p)
    rho = np.array([8.0, 9.0, 12.0, 16.0, 24.0])
    phi = np.deg2rad([0.0, 45.0, 90.0, 135.0, 180.0])
    np.testing.assert_allclose(ex.potential_mas_spectral(p, sol, rho, phi), ex.potential_mas_direct(p, sol, rho, phi), atol=1e-8)


def test_spectral_ignores_mean_bounded(fig2):
    sol = ex.currents(fig2)
    s2 = sol.spectrum.copy()
    s2[0] += 123.0
    assert ex.potential_mas_spectral(fig2, s2, 12.0, 0.3) == ex.potential_mas_spectral(fig2, sol.spectrum, 12.0, 0.3)


def test_spectral_warnings_and_domain(fig2):
    sol = ex.currents(fig2)
    with pytest.warns(ConvergenceWarning):
        ex.potential_mas_spectral(fig2, sol, 5.52, 0.3)
    with pytest.raises(DomainError):
        ex.potential_mas_spectral(fig2, sol, 5.0, 0.3)


def test_mas_total_matches_exact_fig2b(fig2):
    sol = ex.currents(fig2)
    rho = np.linspace(1, 3, 41) * 8
    phi = math.radians(45)
    exact = ex.potential_exact_total(fig2, rho, phi)
    assert np.abs(ex.potential_mas_total(fig2, sol, rho, phi) - exact).max() <= 1e-3 * np.abs(exact).max()


@pytest.mark.parametrize("scheme", ex.SCHEMES)
def test_potential_convergence(fig2, scheme):
    p = fig2.with_(scheme=scheme)
    errs = [ex.convergence_error(p.with_(N=n))[0] for n in range(21, 82, 2)]
    assert np.all(np.diff(errs) <= 0)
    err, scale = ex.convergence_error(p)
    assert err <= 1e-6 * scale


def test_d_ref_independence(fig2, fig2_trad):
    q = fig2.with_(d_ref=3.0)
    np.testing.assert_array_equal(ex.currents(q).currents, ex.currents(fig2).currents)
    sol = ex.currents(fig2)
    assert ex.potential_mas_direct(q, sol, 12.0, 0.3) == ex.potential_mas_direct(fig2, sol, 12.0, 0.3)
    st_ = ex.currents(fig2_trad)
    shift = ex.potential_mas_direct(fig2_trad, st_, 12.0, 0.3) - ex.potential_mas_direct(fig2_trad.with_(d_ref=3.0), st_, 12.0, 0.3)
    assert abs(shift) <= 81 * abs(st_.spectrum[0]) * math.log(3.0) / (2 * math.pi) * (1 + 1e-6)


# ------------------------------------------------------- boundary checks


def test_neumann_residual(fig2):
    r = ex.neumann_residual(fig2, ex.currents(fig2))
    row, rhs = ex.assemble_system(fig2)
    x = ex.currents(fig2).currents
    np.testing.assert_allclose(r, spectral.circulant_matrix(row) @ x - rhs, atol=1e-9)
    assert np.abs(r).max() <= 1e-9 * np.abs(rhs).max() * 81


def test_self_consistency(fig2):
    assert abs(ex.self_consistency_residual(fig2)) <= 1e-12
    wide = fig2.with_(rho_fil=16.0)
    assert abs(ex.self_consistency_residual(wide)) <= 1e-12
    assert abs(ex.self_consistency_residual(wide, nodes=64)) <= 1e-10
    assert abs(ex.self_consistency_residual(wide, nodes=4096)) <= 1e-10


@given(problems())
def test_self_consistency_property(p):
    assert abs(ex.self_consistency_residual(p)) <= 1e-12


# -------------------------------------------------------------- conditioning


def test_condition_numbers(fig2, fig2_trad):
    assert ex.condition_number_computed(fig2) == pytest.approx(KAPPA_N81, rel=1e-3)
    assert ex.condition_number_exact(fig2) == pytest.approx(KAPPA_N81, rel=1e-10)
    val, lg = ex.condition_number_asymptotic(fig2)
    assert val == pytest.approx(5e12, rel=0.1)
    assert lg == pytest.approx(math.log10(val))
    assert ex.condition_number_exact(fig2_trad) == pytest.approx(KAPPA_TRAD_N81, rel=1e-10)
    assert ex.condition_number_asymptotic(fig2_trad)[0] == pytest.approx(3.9e6, rel=0.05)
    assert ex.condition_number_asymptotic(fig2.with_(N=101))[1] == pytest.approx(16, abs=0.5)


@pytest.mark.parametrize("n", [41, 61, 81])
@pytest.mark.parametrize("scheme", ex.SCHEMES)
def test_condition_asymptotic_within_factor_two(fig2, n, scheme):
    p = fig2.with_(N=n, scheme=scheme)
    ratio = ex.condition_number_asymptotic(p)[0] / ex.condition_number_exact(p)
    assert 0.5 <= ratio <= 2.0


def test_condition_log_space(fig2):
    val, lg = ex.condition_number_asymptotic(fig2.with_(rho_aux=0.5, N=2001))
    assert val == math.inf and lg > 300


# -------------------------------------------------------------- diagnostics


def test_diagnostics_fields(fig2):
    d = ex.diagnostics(ex.currents(fig2), fig2)
    assert d.regime == UNPHYSICAL and d.N == 81
    assert d.central_current == pytest.approx(-81 * MEAN_N81, rel=1e-11)
    assert d.kappa_computed == pytest.approx(KAPPA_N81, rel=1e-3)
    assert d.to_dict()["provenance"] == "dft_exact"
    assert ex.diagnostics(ex.currents(fig2.with_(rho_aux=6.4)), fig2.with_(rho_aux=6.4)).regime == CRITICAL
    dp = ex.diagnostics(ex.currents(fig2.with_(rho_aux=7.0)), fig2.with_(rho_aux=7.0))
    assert dp.regime == PHYSICAL
    assert ex.diagnostics(ex.currents(fig2.with_(scheme="traditional")), fig2.with_(scheme="traditional")).central_current is None


@pytest.mark.xfail(strict=True, reason="exact Fig. 2 currents score 0.70: alternation fades past l ~ 25")
def test_diagnostics_alternation_fig2(fig2):
    assert ex.diagnostics(ex.currents(fig2), fig2).alternation_score >= 0.95


def test_asymptotic_currents_alternate(fig2):
    from mas_lab.common import alternation_score

    assert alternation_score(ex.currents_asymptotic(fig2), ex.mean_term(fig2)) == 1.0


# ------------------------------------------------------------- insensitivity


def test_perturbation_zero_noise(fig2):
    rep = ex.perturbation_experiment(fig2, 0.0)
    assert rep.current_change == 0.0
    assert all(v == 0.0 for v in rep.potential_change.values())


def test_perturbation_insensitivity(fig2):
    rep = ex.perturbation_experiment(fig2, 1e-12, seed=0)
    assert rep.current_change >= 100 * rep.potential_change[2.0]
    assert rep.potential_change[4.0] <= rep.potential_change[1.25]
    again = ex.perturbation_experiment(fig2, 1e-12, seed=0)
    assert again.to_dict() == rep.to_dict()


def test_perturbation_validation(fig2):
    with pytest.raises(ValueError):
        ex.perturbation_experiment(fig2, -1.0)
    with pytest.raises(ValueError):
        ex.perturbation_experiment(fig2, 1e-12, solver="other")
    rep = ex.perturbation_experiment(fig2.with_(N=41), 1e-10, solver="dense_solve")
    assert rep.solver == "dense_solve"

import numpy as np
import pytest
import sympy as sp

from bfd_heat.errors import BFDError, NoSolutionError
from bfd_heat.operator import interior_blocks
from bfd_heat.stability import (
    FREE, CertificationReport, StabilityVerdict, boundary_theta_half, boundary_theta_three_halves,
    build_interior_theta, certificate_parameters, certify, certify_2d, certify_c, congruence_diagonal,
    dg_diffusion_target, global_energy_matrix, ldl_inertia, printed_choice, printed_interior_theta,
    printed_theta_half, printed_theta_three_halves, reconstruct_blocks, solve_penalty_coefficients,
)

c = sp.Symbol("c")
C2, C3, E2, E3 = sp.symbols("C2 C3 E2 E3")
C_GRID = np.linspace(-0.97, 0.97, 33)


@pytest.fixture(scope="module")
def interior():
    return solve_penalty_coefficients(c, location="interior")


@pytest.fixture(scope="module")
def boundary():
    return solve_penalty_coefficients(c, location="left_boundary")


def test_interior_family_exact(interior):
    R = sp.Rational
    expected = {
        "C1": R(7, 3), "C4": R(1, 2), "D1": -C2 - R(14, 3), "D2": R(7, 3), "D3": -R(1, 2),
        "D4": -C2 - C3 - R(7, 3), "E1": (-8 * c - 5) / 18, "E4": (-c - 1) / 18,
        "F1": -C2 - E2 - R(7, 3), "F2": (8 * c + 5) / 18, "F3": (-c - 1) / 18,
        "F4": (5 * c - 9 * C2 - 9 * C3 - 9 * E2 - 9 * E3 - 13) / 9,
    }
    for name, val in expected.items():
        assert sp.simplify(interior[name] - val) == 0, name


def test_interior_family_at_c0():
    fam = solve_penalty_coefficients(0, location="interior")
    assert fam["E1"] == sp.Rational(-5, 18)
    assert fam["F2"] == sp.Rational(5, 18)


def test_boundary_family(boundary):
    for name in ("D2", "D3", "F2", "F3"):
        assert sp.simplify(boundary[name]) == 0
    assert sp.simplify(boundary["F1"] - (-sp.Rational(47, 18) - C2 - E2 - 4 * c / 9)) == 0
    assert sp.simplify(boundary["E1"] + (8 * c + 5) / 18) == 0


def test_dg_target_is_consistent():
    fam = solve_penalty_coefficients(c, target=dg_diffusion_target(), location="interior")
    assert set(fam.free) == set(FREE)


def test_any_target_is_representable():
    # the matching system has full row rank, so even a meaningless target solves
    fam = solve_penalty_coefficients(c, target=sp.Matrix([[1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0]]))
    assert set(fam.values) >= {"C1", "F4"}


def test_pinned_coefficient_as_free_parameter_is_inconsistent():
    # C1 is forced to 7/3 by the interior blocks, so it cannot be left free
    with pytest.raises(NoSolutionError) as info:
        solve_penalty_coefficients(c, free=("C1", "C2", "C3", "E2"))
    assert info.value.residual > 0


def test_random_instantiations_rebuild_blocks(interior, rng):
    for _ in range(5):
        cv = float(rng.uniform(-0.95, 0.95))
        free = dict(zip(FREE, rng.uniform(-5, 5, 4)))
        sub = {c: cv, **{sp.Symbol(k): v for k, v in free.items()}}
        coeffs = {k: float(sp.sympify(v).subs(sub)) for k, v in interior.values.items()}
        got = reconstruct_blocks(coeffs, h=1.0)
        blk = interior_blocks(cv, 1.0)
        np.testing.assert_allclose(got, blk.stacked(), rtol=0, atol=1e-12 * np.abs(blk.stacked()).max())


def test_exact_instantiation_is_rational(interior):
    vals = interior.instantiate(exact=True, C2=-7, C3=sp.Rational(25, 6), E2=0, E3=1)
    assert vals["C1"] == sp.Rational(7, 3)
    assert sp.simplify(vals["F4"] - (5 * c + 63 - sp.Rational(75, 2) - 9 - 13) / 9) == 0


@pytest.mark.parametrize("cv", C_GRID[::4])
def test_certificate_on_grid(cv):
    rep = certify_c(float(cv))
    assert rep.passed
    assert abs(rep.interior_det) <= 1e-10
    assert rep.truncated.inertia == (3, 0, 0)


@pytest.mark.parametrize("cv", [-0.9, -4 / 13, 0.0, 0.6])
def test_forms_symmetric(cv):
    for f in (build_interior_theta(cv), boundary_theta_half(cv), boundary_theta_three_halves(cv)):
        np.testing.assert_allclose(f.M, f.M.T, atol=1e-12)


def test_constants_carry_no_interior_energy():
    for cv in (-0.5, 0.3):
        M = build_interior_theta(cv).scaled
        assert np.abs(M @ np.ones(4)).max() < 1e-10


def test_forms_scale_with_h():
    a, b = build_interior_theta(0.2, h=1.0), build_interior_theta(0.2, h=0.25)
    np.testing.assert_allclose(b.M, 4 * a.M)
    np.testing.assert_allclose(b.scaled, a.scaled)


def test_certify_zero_and_asymmetric():
    v = certify(np.zeros((3, 3)))
    assert v.non_positive and v.inertia == (0, 3, 0)
    with pytest.raises(BFDError):
        certify(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not certify(np.diag([-1.0, 1e-3])).non_positive


def test_ldl_inertia_matches_eigenvalues(rng):
    for _ in range(10):
        A = rng.standard_normal((5, 5))
        M = A + A.T
        ev = np.linalg.eigvalsh(M)
        assert ldl_inertia(M, 1e-12) == (int((ev < 0).sum()), 0, int((ev > 0).sum()))


def test_certify_2d_examples():
    assert certify_2d(0.0, n=4).non_positive
    assert certify_2d(-4 / 13, n=6).non_positive


def test_certify_2d_propagates_failure():
    good = certify_c(0.0)
    bad_half = StabilityVerdict(0.0, (1.0,), False, (0, 0, 1))
    bad = CertificationReport(0.0, good.interior, good.interior_det, good.truncated, bad_half, good.three_halves)
    assert not bad.passed
    assert not certify_2d(0.0, n=4, reports=bad).non_positive


def test_global_energy_rate_non_positive():
    for cv in (-0.9, -4 / 13, 0.0, 0.9):
        ev = np.linalg.eigvalsh(global_energy_matrix(cv, N=12))
        assert ev.max() <= 1e-9 * np.abs(ev).max()


def test_certificate_parameters_keep_constants_neutral():
    p = certificate_parameters(0.1)
    assert p["C2"] == pytest.approx(-7 / 3)
    assert p["C3"] + p["E2"] == pytest.approx((7 + 0.4) / 9)


# published matrices, taken literally


@pytest.mark.parametrize("cv", [-0.9, -0.5, -4 / 13, 0.0, 0.5, 0.9])
def test_literal_three_halves_matrix_is_nsd(cv):
    assert certify(printed_theta_three_halves(cv)).non_positive


@pytest.mark.parametrize("cv", [0.0, -4 / 13, 0.5])
def test_literal_interior_matrix_with_listed_choice(cv):
    form = printed_interior_theta(cv, **printed_choice(cv))
    M = form.scaled
    assert M[0, 0] == pytest.approx(8 * cv - 31)
    assert M[0, 1] == pytest.approx((143 - 40 * cv) / 3)
    assert abs(np.linalg.det(M)) <= 1e-10 * np.prod(np.abs(np.diag(M)))
    assert certify(form).non_positive


def test_literal_truncated_pivots():
    for cv in np.linspace(-0.95, 0.95, 9):
        M = printed_interior_theta(cv, **printed_choice(cv)).M
        d = congruence_diagonal(M[:3, :3])
        assert d[0] == pytest.approx((8 * cv - 31) / 12)
        assert np.all(d < 0)
    cv = 0.5
    assert -(32 / 9) * (8 * cv - 31) * (cv * (8 * cv + 13) - 166) < 0


def test_literal_wall_matrix_with_listed_choice_is_indefinite():
    # the listed wall parameters do not give a semidefinite form; see the notes
    v = certify(printed_theta_half(0.0, **printed_choice(0.0, "boundary")))
    assert v.inertia == (1, 0, 1)


def test_listed_interior_choice_is_indefinite_on_reconstructed_form():
    v = certify(build_interior_theta(-4 / 13, printed_choice(-4 / 13)))
    assert v.inertia == (2, 0, 2)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plurilab.domains import (
    boundary_distance,
    boundary_distance_batch,
    disc_radius,
    first_exit,
    from_config,
    make_builtin,
    omega_phi_profile,
    omega_phi_profile_inv,
    probe_table_csv,
    sample_interior,
)
from plurilab.errors import BracketError, NotInteriorError, UnknownNameError

from conftest import ball_slice_disc_radius, dense_direction_scan


# ---------------------------------------------------------------------------
# builtins
# ---------------------------------------------------------------------------


def test_make_builtin_ball_identity(ball2):
    assert float(ball2.rho(np.zeros(2))) == -1.0
    assert ball2.bounding_radius == 1.0
    assert ball2.convex and ball2.reinhardt


def test_omega_phi_interior_point(omega_phi2):
    # profile(0) + 0.75^2 - 1 = -0.4375 < 0
    z = np.array([0.0, -0.75 + 0j])
    assert float(omega_phi2.rho(z)) == pytest.approx(-0.4375, abs=1e-15)


def test_example_D_interior_point(example_D):
    # h(0.5i) = -0.25 + 0.0625 = -0.1875
    z = np.array([0.0, 0.5j])
    assert float(example_D.rho(z)) == pytest.approx(-0.1875, abs=1e-15)


def test_unknown_builtin_raises():
    with pytest.raises(UnknownNameError):
        make_builtin("banana")


def test_bad_params_raise():
    with pytest.raises(ValueError):
        make_builtin("ball", n=0)
    with pytest.raises(ValueError):
        make_builtin("strongly_convex_intersection", ellipsoids=[])


def test_empty_intersection_detected():
    from plurilab.errors import EmptyIntersectionError

    with pytest.raises(EmptyIntersectionError):
        make_builtin(
            "strongly_convex_intersection",
            ellipsoids=[((0, 0), (1, 1)), ((5.0, 0), (1, 1))],
        )


def test_config_roundtrip(omega_phi2):
    text = omega_phi2.to_config()
    dom = from_config(text)
    assert dom.name == "omega_phi"
    assert dom.params == omega_phi2.params
    z = np.array([0.1 + 0.2j, -0.3 + 0j])
    assert float(dom.rho(z)) == float(omega_phi2.rho(z))


def test_config_roundtrip_intersection(lens2):
    dom = from_config(lens2.to_config())
    z = np.array([[0.25 + 0j, 0.1 + 0j], [0.7 + 0j, 0.0]])
    assert np.allclose(dom.rho(z), lens2.rho(z))


# ---------------------------------------------------------------------------
# the profile of the weakly-flat builtin
# ---------------------------------------------------------------------------


def test_profile_closed_form_inverse():
    # on (0, 1/2): t = e^(2 - 1/x)/3  =>  x = 1/(2 - log(3t));
    # beyond: t = (4x-1)/3  =>  x = (3t+1)/4
    for t in (1e-6, 1e-3, 0.05, 0.3):
        x = omega_phi_profile_inv(t)
        assert x == pytest.approx(1.0 / (2.0 - np.log(3.0 * t)), rel=1e-10)
    for t in (0.4, 1.0, 2.5):
        x = omega_phi_profile_inv(t)
        assert x == pytest.approx((3.0 * t + 1.0) / 4.0, rel=1e-12)


def test_profile_monotone_and_continuous():
    x = np.linspace(0, 2, 4001)
    y = omega_phi_profile(x)
    assert np.all(np.diff(y) >= 0)
    # strictly increasing once exp(-1/x) is representable
    xs = x[x > 0.005]
    assert np.all(np.diff(omega_phi_profile(xs)) > 0)
    assert abs(omega_phi_profile(0.5) - 1.0 / 3.0) < 1e-12
    assert abs(omega_phi_profile(1.0) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# boundary distance
# ---------------------------------------------------------------------------


def test_distance_ball_center(ball2):
    assert boundary_distance(ball2, np.zeros(2), force_generic=True) == pytest.approx(
        1.0, abs=1e-8
    )


def test_distance_omega_phi_matches_one_plus_eps(omega_phi2):
    for eps in (-0.9, -0.75, -0.55):
        z = np.array([0.0, eps + 0j])
        d = boundary_distance(omega_phi2, z)
        assert d == pytest.approx(1.0 + eps, abs=1e-8)


def test_distance_example_D_against_dense_scan(example_D):
    z = np.array([0.0, 0.45j])
    d = boundary_distance(example_D, z)
    oracle = dense_direction_scan(example_D, z)
    assert d == pytest.approx(oracle, abs=1e-4)


def test_distance_rejects_exterior_and_boundary(ball2):
    with pytest.raises(NotInteriorError):
        boundary_distance(ball2, np.array([2.0 + 0j, 0.0]))
    with pytest.raises(NotInteriorError):
        boundary_distance(ball2, np.array([1.0 + 0j, 0.0]))


def test_distance_batch_matches_scalar(example_D):
    rng = np.random.default_rng(3)
    pts = sample_interior(example_D, 6, rng)
    d_batch, near = boundary_distance_batch(example_D, pts)
    for z, db in zip(pts, d_batch):
        assert db == pytest.approx(boundary_distance(example_D, z), rel=2e-4, abs=1e-6)
    assert np.max(np.abs(example_D.rho(near))) < 1e-10


# ---------------------------------------------------------------------------
# disc radius
# ---------------------------------------------------------------------------


def test_disc_radius_ball_center(ball2):
    pr = disc_radius(ball2, np.zeros(2), np.array([1.0 + 0j, 0.0]))
    assert pr.disc_radius == pytest.approx(1.0, abs=1e-9)
    assert pr.delta == pytest.approx(1.0, abs=1e-8)


def test_disc_radius_polydisc_slice(polydisc2):
    # the z1-slice through (0.5, 0) is a unit disc; first exit at 0.5
    pr = disc_radius(polydisc2, np.array([0.5 + 0j, 0.0]), np.array([1.0 + 0j, 0.0]))
    assert pr.disc_radius == pytest.approx(0.5, abs=1e-9)


def test_disc_radius_omega_phi_sandwich(omega_phi2):
    for eps in (-0.9, -0.6):
        z = np.array([0.0, eps + 0j])
        pr = disc_radius(omega_phi2, z, np.array([1.0 + 0j, 0.0]))
        lo = np.sqrt(omega_phi_profile_inv(1.0 + eps))
        assert lo - 1e-8 <= pr.disc_radius <= 2.0 * lo + 1e-8


def test_disc_radius_min_attained_in_table(ball2):
    pr = disc_radius(ball2, np.array([0.3 + 0.1j, 0.2j]), np.array([0.0, 1.0 + 0j]))
    assert pr.disc_radius == pytest.approx(np.min(pr.exit_radii[:, 1]), abs=1e-12)


def test_disc_radius_rejects_non_unit(ball2):
    with pytest.raises(ValueError):
        disc_radius(ball2, np.zeros(2), np.array([2.0 + 0j, 0.0]))


def test_first_exit_bracket_failure():
    # a defining function that is negative along the real-z1 axis forever
    from plurilab.domains import DomainSpec

    def rho(z):
        z = np.asarray(z, dtype=complex)
        return np.abs(z[..., 1]) ** 2 - 1.0

    fake = DomainSpec(n=2, rho=rho, witness=np.zeros(2), bounding_radius=1.0)
    with pytest.raises(BracketError):
        first_exit(fake, np.zeros(2), np.array([[1.0 + 0j, 0.0]]))


def test_probe_csv_export(ball2):
    pr = disc_radius(ball2, np.zeros(2), np.array([1.0 + 0j, 0.0]), n_theta=16)
    text = probe_table_csv(pr)
    lines = text.strip().splitlines()
    assert lines[0] == "theta,t_theta"
    assert len(lines) > 16


# ---------------------------------------------------------------------------
# invariants and properties
# ---------------------------------------------------------------------------


def test_delta_below_disc_radius_everywhere(omega_phi2):
    rng = np.random.default_rng(7)
    pts = sample_interior(omega_phi2, 5, rng)
    for z in pts:
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        pr = disc_radius(omega_phi2, z, v, n_theta=64)
        assert pr.delta <= pr.disc_radius + 1e-7
        assert pr.disc_radius <= 2.0 * omega_phi2.bounding_radius


def test_inclusion_monotonicity():
    small = make_builtin("ball", n=2, r=0.8)
    big = make_builtin("ball", n=2, r=1.3)
    z = np.array([0.2 + 0.1j, -0.3 + 0j])
    v = np.array([0.6 + 0j, 0.8j])
    v /= np.linalg.norm(v)
    r_small = disc_radius(small, z, v, n_theta=64, compute_delta=False).disc_radius
    r_big = disc_radius(big, z, v, n_theta=64, compute_delta=False).disc_radius
    assert r_small <= r_big + 1e-10


@settings(max_examples=12, deadline=None)
@given(phase=st.floats(0.0, 2 * np.pi))
def test_disc_radius_phase_invariance(phase):
    dom = make_builtin("ball", n=2)
    z = np.array([0.25 + 0.1j, -0.2 + 0j])
    v = np.array([0.8 + 0j, 0.6j])
    v /= np.linalg.norm(v)
    base = disc_radius(dom, z, v, n_theta=64, compute_delta=False).disc_radius
    rot = disc_radius(
        dom, z, np.exp(1j * phase) * v, n_theta=64, compute_delta=False
    ).disc_radius
    assert rot == pytest.approx(base, abs=1e-6)


def test_convex_support_oracle_agreement():
    # closed-form slice radii of random balls vs the phase-grid minimum
    rng = np.random.default_rng(11)
    for _ in range(10):
        c = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        R = rng.uniform(0.8, 1.6)
        dom = make_builtin("ball", n=2, r=R)
        # recentre by translating the query point instead of the domain
        z = c + 0.2 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        if float(dom.rho(z - c)) >= -0.05:
            z = c
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        got = disc_radius(dom, z - c, v, compute_delta=False).disc_radius
        want = ball_slice_disc_radius(np.zeros(2), R, z - c, v)
        assert got == pytest.approx(want, abs=1e-6)


def test_validate_catches_bad_witness():
    from plurilab.domains import DomainSpec

    def rho(z):
        z = np.asarray(z, dtype=complex)
        return np.sum(np.abs(z) ** 2, axis=-1) - 1.0

    bad = DomainSpec(
        n=2, rho=rho, witness=np.array([2.0 + 0j, 0.0]), bounding_radius=1.0
    )
    with pytest.raises(ValueError):
        bad.validate()

import math

import numpy as np
import pytest

from plurilab.domains import (
    DomainSpec,
    make_builtin,
    rho_example_Omega_piece,
    sample_interior,
)
from plurilab.errors import MajorantError, NotInteriorError
from plurilab.mappings import (
    HoloMapAnalysis,
    approach_sequence,
    boundary_extend,
    cone_probe,
    example25,
    example25_target_field,
    exponent_chain,
    extension_continuity_scan,
    hopf_fit,
    jacobian_lp_check,
    kappa_for_eps,
    lipschitz_chart_fit,
    properness_probe,
)

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


@pytest.fixture(scope="module")
def triple():
    return example25()


@pytest.fixture(scope="module")
def chart00(triple):
    _, D, _ = triple
    return lipschitz_chart_fit(D, np.zeros(2, dtype=complex), chart_radius=0.12)


@pytest.fixture(scope="module")
def chain(triple):
    F, D, Om = triple
    return exponent_chain(F, D, Om, rho_example_Omega_piece, seed=1)


def identity_map(dom):
    return HoloMapAnalysis(
        m=dom.n,
        n=dom.n,
        F=lambda z: np.asarray(z, dtype=complex),
        dF=lambda z: np.broadcast_to(
            np.eye(dom.n, dtype=complex), np.asarray(z).shape[:-1] + (dom.n, dom.n)
        ).copy(),
        source=dom,
        target=dom,
        name="identity",
    )


# ---------------------------------------------------------------------------
# map basics
# ---------------------------------------------------------------------------


def test_example25_holomorphy(triple):
    F, D, _ = triple
    rng = np.random.default_rng(0)
    pts = sample_interior(D, 6, rng)
    assert F.cr_residual(pts) < 1e-8


def test_fd_jacobian_matches_analytic(triple):
    F, D, _ = triple
    z = np.array([0.04 + 0.01j, 0.02 + 0.35j])
    J_an = F.jacobian(z)
    F_fd = HoloMapAnalysis(m=2, n=3, F=F.F, source=D)
    assert np.max(np.abs(F_fd.jacobian(z) - J_an)) < 1e-8


# ---------------------------------------------------------------------------
# properness
# ---------------------------------------------------------------------------


def test_properness_example25(triple, chart00):
    F, D, Om = triple
    seqs = []
    for zp, tt in [(0.02 + 0.01j, 0.0), (0.0 + 0.0j, 0.03)]:
        xi = chart00.boundary_point(np.array([[zp]]), np.array([tt]))
        seqs.append(approach_sequence(D, xi, chart00.inward(), N=10))
    rep = properness_probe(F, D, Om, seqs)
    assert rep.all_proper
    for t in rep.tables:
        assert t["delta_tgt"][-1] < t["delta_tgt"][0] / 10


def test_properness_identity_ball(ball2):
    F = identity_map(ball2)
    xi = np.array([1.0 + 0j, 0.0])
    seq = approach_sequence(ball2, xi, np.array([-1.0 + 0j, 0.0]), N=9)
    rep = properness_probe(F, ball2, ball2, [seq])
    assert rep.all_proper
    t = rep.tables[0]
    assert np.max(np.abs(t["delta_src"] - t["delta_tgt"])) < 1e-6


def test_properness_constant_map_fails(triple):
    F, D, Om = triple
    const = HoloMapAnalysis(
        m=2,
        n=3,
        F=lambda z: np.broadcast_to(
            np.array([1.0 + 0j, 0.4j, 0.0]), np.asarray(z).shape[:-1] + (3,)
        ).copy(),
        source=D,
        target=Om,
    )
    xi = np.zeros(2, dtype=complex)
    seq = approach_sequence(D, xi, np.array([0.0, 1j]), N=9)
    rep = properness_probe(const, D, Om, [seq])
    assert not rep.all_proper


# ---------------------------------------------------------------------------
# L^p products
# ---------------------------------------------------------------------------


def test_lp_check_identity_ball(ball2):
    F = identity_map(ball2)
    rep = jacobian_lp_check(F, ball2, p=3, budget=20_000)
    assert rep["pass"]
    # nonzero products are indicators; their L^3 norm is vol(B^4)^(1/3)
    vol = math.pi**2 / 2.0
    norms = [v["norm"] for k, v in rep["products"].items() if v["norm"] > 1e-6]
    assert np.allclose(norms, vol ** (1.0 / 3.0), rtol=0.04)


def test_lp_check_polynomial_disc():
    disc = make_builtin("ball", n=1)
    F = HoloMapAnalysis(
        m=1,
        n=2,
        F=lambda z: np.stack([np.asarray(z)[..., 0] ** 2, 0 * np.asarray(z)[..., 0]], axis=-1),
        dF=lambda z: np.stack(
            [2 * np.asarray(z)[..., 0:1], 0 * np.asarray(z)[..., 0:1]], axis=-2
        ),
        source=disc,
    )
    rep = jacobian_lp_check(F, disc, p=3, budget=20_000)
    assert rep["pass"]
    # |dF1 * conj(dF1)| = 4 r^2; its L^3 norm is (64 * 2 pi / 8)^(1/3)
    want = (16 * math.pi) ** (1.0 / 3.0)
    top = max(v["norm"] for v in rep["products"].values())
    assert top == pytest.approx(want, rel=0.05)


def test_lp_check_requires_p_above_dimension(triple):
    F, D, _ = triple
    with pytest.raises(ValueError):
        jacobian_lp_check(F, D, p=2)


# ---------------------------------------------------------------------------
# decay fits
# ---------------------------------------------------------------------------


def test_hopf_fit_ball(ball2):
    fit = hopf_fit(lambda z: norm_sq_m1(z), ball2, seed=0)
    assert fit.alpha_hopf == pytest.approx(1.0, abs=1e-6)
    assert 1.0 <= fit.c0 <= 2.0
    assert fit.holdout_pass_rate == 1.0


def norm_sq_m1(z):
    return np.sum(np.abs(np.asarray(z, dtype=complex)) ** 2, axis=-1) - 1.0


def test_hopf_fit_distance_function(ball2):
    # -delta is psh on convex domains; exact power 1 with constant 1
    fit = hopf_fit(lambda z: np.linalg.norm(np.asarray(z), axis=-1) - 1.0, ball2, seed=1)
    assert abs(fit.alpha_raw - 1.0) < 0.02
    assert 0.85 <= fit.c0 <= 1.0
    assert fit.holdout_pass_rate == 1.0


def test_hopf_fit_rejects_nonnegative(ball2):
    with pytest.raises(ValueError):
        hopf_fit(lambda z: np.ones(np.asarray(z).shape[:-1]), ball2)


def test_exponent_chain_identity_ball(ball2):
    F = identity_map(ball2)
    rep = exponent_chain(F, ball2, ball2, norm_sq_m1, s=0.2, seed=3)
    assert rep.s0 == pytest.approx(1.0, abs=0.05)
    assert rep.s_star == pytest.approx(1.0, abs=0.05)
    assert rep.holdout_distance_rate == 1.0
    assert rep.holdout_derivative_rate == 1.0
    assert rep.C1 <= 1.3


def test_exponent_chain_linear_disc_to_ball():
    disc = make_builtin("ball", n=1)
    ball = make_builtin("ball", n=2)
    F = HoloMapAnalysis(
        m=1,
        n=2,
        F=lambda z: np.stack(
            [np.asarray(z, complex)[..., 0], 0 * np.asarray(z)[..., 0]], axis=-1
        ),
        dF=lambda z: np.stack(
            [np.ones_like(np.asarray(z)[..., 0:1]), 0 * np.asarray(z)[..., 0:1]],
            axis=-2,
        ),
        source=disc,
        target=ball,
    )
    rep = exponent_chain(F, disc, ball, norm_sq_m1, s=0.2, seed=5)
    assert rep.s_star == pytest.approx(1.0, abs=0.05)


def test_exponent_chain_example25(triple, chain):
    F, D, Om = triple
    assert 0 < chain.s_tilde < 1
    assert chain.holdout_distance_rate == 1.0
    assert chain.holdout_derivative_rate == 1.0
    assert F.constants["s_tilde"] == chain.s_tilde
    assert chain.alpha_hopf >= 1.0


# ---------------------------------------------------------------------------
# boundary extension
# ---------------------------------------------------------------------------


def test_boundary_extend_polynomial_across_boundary(triple, chart00):
    _, D, _ = triple
    F = HoloMapAnalysis(
        m=2,
        n=3,
        F=lambda z: np.stack(
            [
                np.asarray(z)[..., 0] ** 2,
                np.asarray(z)[..., 1],
                np.asarray(z)[..., 0] * np.asarray(z)[..., 1],
            ],
            axis=-1,
        ),
        source=D,
    )
    xi = chart00.boundary_point(np.array([[0.03 + 0.01j]]), np.array([0.02]))
    vals, err = boundary_extend(
        F, xi, chart00.inward(), t_prime=0.05, s_tilde=0.5, tol=1e-12
    )
    want = F.eval(xi)
    assert np.max(np.abs(vals - want)) < 1e-10


def test_boundary_extend_example25(triple, chain, chart00):
    F, D, _ = triple
    rng = np.random.default_rng(6)
    v0 = chart00.inward()
    for _ in range(5):
        zp = 0.05 * (rng.standard_normal() + 1j * rng.standard_normal())
        tt = 0.05 * rng.standard_normal()
        xi = chart00.boundary_point(np.array([[zp]]), np.array([tt]))
        vals, _ = boundary_extend(F, xi, v0, t_prime=0.05)
        want = np.array([np.sqrt(xi[0] + 1.0), xi[1], 0.0])
        assert np.max(np.abs(vals - want)) < 1e-4
        vals2, _ = boundary_extend(F, xi, v0, t_prime=0.1)
        assert np.max(np.abs(vals - vals2)) < 1e-6


def test_boundary_extend_detects_blowup(triple):
    _, D, _ = triple
    bad = HoloMapAnalysis(
        m=2,
        n=1,
        F=lambda z: np.log(np.asarray(z)[..., 1:2] / 1j),
        source=None,  # skip the segment pre-check; derivative ~ 1/x on the ray
    )
    xi = np.zeros(2, dtype=complex)
    with pytest.raises(MajorantError):
        boundary_extend(bad, xi, np.array([0.0, 1j]), t_prime=0.05, s_tilde=0.5, pre_check=False)


def test_boundary_extend_requires_interior_segment(triple):
    F, D, _ = triple
    xi = np.zeros(2, dtype=complex)
    with pytest.raises(NotInteriorError):
        boundary_extend(F, xi, np.array([0.0, -1j]), t_prime=0.05, s_tilde=0.9)


# ---------------------------------------------------------------------------
# charts and cones
# ---------------------------------------------------------------------------


def _flat_bottom_domain():
    def rho(z):
        z = np.asarray(z, dtype=complex)
        return np.maximum(-np.imag(z[..., 1]), np.sum(np.abs(z) ** 2, axis=-1) - 4.0)

    return DomainSpec(
        n=2,
        rho=rho,
        witness=np.array([0.0, 0.5j]),
        bounding_radius=2.0,
        name="halfspace_model",
    )


def test_chart_halfspace_model():
    dom = _flat_bottom_domain()
    chart = lipschitz_chart_fit(dom, np.zeros(2, dtype=complex), chart_radius=0.2, seed=1)
    assert chart.C <= 1.05
    zp = np.array([[0.05 - 0.02j]])
    assert abs(chart.psi(zp, np.array([0.03]))[0]) < 1e-7


def test_chart_example_D_graph_form(triple, chart00):
    # near the origin the boundary is Im(z2) = sqrt(|z1|^2 + 2 Re(z2)^2) + O(r^2)
    rng = np.random.default_rng(2)
    for _ in range(6):
        zp = 0.04 * (rng.standard_normal() + 1j * rng.standard_normal())
        tt = 0.04 * rng.standard_normal()
        h = chart00.psi(np.array([[zp]]), np.array([tt]))[0]
        pred = math.sqrt(abs(zp) ** 2 + 2 * tt**2)
        r2 = abs(zp) ** 2 + tt**2
        assert abs(h - pred) <= 5 * r2 + 1e-4


def test_chart_sandwich_validated(chart00):
    assert chart00.report["validated"] >= 100
    assert chart00.report["max_height_ratio"] <= chart00.C + 1e-9


def test_chart_ball():
    ball = make_builtin("ball", n=2)
    chart = lipschitz_chart_fit(ball, np.array([1.0 + 0j, 0.0]), chart_radius=0.15, seed=0)
    assert 1.0 <= chart.C <= 2.0


def test_chart_requires_boundary_point(ball2):
    with pytest.raises(ValueError):
        lipschitz_chart_fit(ball2, np.zeros(2, dtype=complex))


def test_cone_probe_ball(ball2):
    cc = cone_probe(ball2, n_samples=10, r0=0.1, seed=2)
    # analytic cap: aperture limited by 2 arccos(r0 / 2)
    assert 2.6 <= cc.theta <= 2 * math.acos(0.05) + 1e-6


def test_cone_probe_halfspace_model():
    dom = _flat_bottom_domain()
    cc = cone_probe(dom, n_samples=8, r0=0.05, layer=(0.01, 0.05), seed=3)
    assert cc.theta > 2.9


def test_cone_probe_example_D(example_D):
    cc = cone_probe(example_D, n_samples=10, r0=0.05, layer=(0.01, 0.06), seed=4)
    # the graph corner at the origin keeps the aperture away from pi
    assert cc.theta < math.pi - 0.15


def test_hopf_cone_consistency_ball(ball2):
    fit = hopf_fit(norm_sq_m1, ball2, seed=0)
    cc = cone_probe(ball2, n_samples=10, r0=0.1, seed=2)
    assert fit.alpha_hopf <= math.pi / cc.theta + 0.25


# ---------------------------------------------------------------------------
# continuity scan
# ---------------------------------------------------------------------------


def test_kappa_closed_form():
    eps, M, st = 0.3, 2.0, 0.75
    kappa = kappa_for_eps(eps, M, st)
    # integral of M x^(-st) from 0 to kappa equals eps / 3
    assert M * kappa ** (1 - st) / (1 - st) == pytest.approx(eps / 3.0, rel=1e-12)
    # doubling M* halves kappa^(1-st)
    k2 = kappa_for_eps(eps, 2 * M, st)
    assert k2 ** (1 - st) == pytest.approx(0.5 * kappa ** (1 - st), rel=1e-12)


def test_extension_scan_example25(triple, chain, chart00):
    F, _, _ = triple
    rows = extension_continuity_scan(F, chart00, eps_list=(0.3, 0.1), seed=0)
    assert rows[0]["eps"] == 0.3
    for row in rows:
        assert row["kappa"] == pytest.approx(
            kappa_for_eps(row["eps"], F.constants["M_star"], F.constants["s_tilde"])
        )
        assert row["r"] > 0
    # smaller eps never admits a larger modulus radius
    assert rows[1]["r"] <= rows[0]["r"] + 1e-12


def test_scan_modulus_consistent_with_closed_form(triple, chain, chart00):
    # the pushed-in values approximate the closed-form boundary values, so the
    # empirical modulus r(eps) must be at least the closed-form safe radius
    F, _, _ = triple
    rows = extension_continuity_scan(F, chart00, eps_list=(0.3,), seed=0)
    # closed form: F* is Lipschitz near the origin patch with constant <= ~1.2
    lip = 1.2
    assert rows[0]["r"] >= (0.3 / 3.0) / lip * 0.2  # loose sanity floor

"""Upper and lower bounds for the Kobayashi metric and the ratio diagnostic.

Four bound routes are implemented:

* flat-disc embedding       upper = ||v|| / r(z; v/||v||)
* convex two-sided bracket  ||v||/(2r) <= k <= ||v||/r
* psh-certificate lower     k >= sqrt(c/alpha) ||v|| / |u(z)|^(1/2)
* modulus-of-continuity     k >= c sqrt(eps) ||v|| / omega(delta(z))^(1/2)

The ratio diagnostic tabulates r(z_nu; u_nu) / delta(z_nu)^alpha along a
boundary-approach sequence and fits a log-log growth slope; unbounded growth
for every alpha is exactly the situation in which no Holder exponent can
survive for the associated Dirichlet data.  Because the certificate and
modulus routes involve inequalities with non-constructive constants, both
exponent conventions (alpha and alpha/2) are tabulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .domains import DomainSpec, boundary_distance, disc_radius
from .errors import CertificateError
from .monge_ampere import complex_hessian

__all__ = [
    "KobayashiBound",
    "PshCertificate",
    "ModulusOfContinuity",
    "poincare_metric",
    "upper_disc",
    "graham_bounds",
    "sibony_lower",
    "ma_lower",
    "holder_divergence",
    "DivergenceReport",
    "calibrate_alpha_universal",
    "ALPHA_UNIVERSAL_DEFAULT",
]

# smallest alpha for which the certificate route stays below the exact disc
# metric with the certificate |z|^2 - 1 (see calibrate_alpha_universal)
ALPHA_UNIVERSAL_DEFAULT = 1.0


@dataclass
class KobayashiBound:
    lower: float
    upper: float
    provenance: str  # disc-embedding | graham | sibony | ma-modulus
    constants: dict = field(default_factory=dict)

    def contains(self, value):
        return self.lower - 1e-12 <= value <= self.upper + 1e-12


@dataclass
class PshCertificate:
    """A claimed negative psh function with a uniform Hessian lower bound."""

    u: Callable[[np.ndarray], np.ndarray]
    c_hessian: float
    check_report: dict = field(default_factory=dict)

    def verify(self, points, tol=1e-6, h=1e-3):
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        vals = np.asarray(self.u(points), dtype=float)
        if not np.all(vals < 0):
            raise CertificateError("certificate function is not negative at samples")
        eig_min = np.inf
        for z in points:
            H = complex_hessian(self.u, z, h=h)
            eig_min = min(eig_min, float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0]))
        if eig_min < self.c_hessian - tol:
            raise CertificateError(
                f"Hessian eigenvalue {eig_min:.6g} below claimed bound {self.c_hessian:.6g}"
            )
        self.check_report = {
            "max_value": float(vals.max()),
            "min_eigenvalue": eig_min,
            "samples": len(points),
        }
        return self.check_report


@dataclass
class ModulusOfContinuity:
    """omega(r): nondecreasing with omega(0+) = 0.

    kind "power": C r^alpha.  kind "power_log": C (log(1/r))^(-kappa) for
    r < 1/2, frozen beyond (only the behaviour near 0 matters).  kind
    "tabulated": monotone interpolation of (r_i, w_i).
    """

    kind: str = "power"
    C: float = 1.0
    alpha: float = 1.0
    kappa: float = 2.0
    r_table: Optional[np.ndarray] = None
    w_table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "tabulated":
            r = np.asarray(self.r_table, dtype=float)
            w = np.asarray(self.w_table, dtype=float)
            if np.any(np.diff(r) <= 0):
                raise ValueError("tabulated radii must be strictly increasing")
            if np.any(np.diff(w) < -1e-12):
                raise ValueError("tabulated modulus must be nondecreasing")
            self.r_table, self.w_table = r, w
        elif self.kind not in ("power", "power_log"):
            raise ValueError(f"unknown modulus family {self.kind!r}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            out = self.C * r**self.alpha
        elif self.kind == "power_log":
            rc = np.clip(r, 1e-300, 0.5)
            out = self.C * np.log(1.0 / rc) ** (-self.kappa)
            out = np.where(r <= 0, 0.0, out)
        else:
            # pin the origin so the modulus vanishes at 0+
            out = np.interp(
                r,
                np.concatenate([[0.0], self.r_table]),
                np.concatenate([[0.0], self.w_table]),
            )
        return float(out) if np.ndim(out) == 0 else out


def poincare_metric(z, v=1.0):
    """Exact invariant metric of the unit disc: |v| / (1 - |z|^2)."""
    return abs(v) / (1.0 - abs(z) ** 2)


def _norm(v):
    return float(np.linalg.norm(np.asarray(v, dtype=complex)))


def upper_disc(dom: DomainSpec, z, v, **disc_kwargs) -> KobayashiBound:
    """Upper bound from the flat disc through z in direction v."""
    nv = _norm(v)
    if nv == 0:
        return KobayashiBound(0.0, 0.0, "disc-embedding")
    vhat = np.asarray(v, dtype=complex) / nv
    pr = disc_radius(dom, z, vhat, compute_delta=False, **disc_kwargs)
    return KobayashiBound(
        lower=0.0,
        upper=nv / pr.disc_radius,
        provenance="disc-embedding",
        constants={"disc_radius": pr.disc_radius},
    )


def graham_bounds(dom: DomainSpec, z, v, **disc_kwargs) -> KobayashiBound:
    """Two-sided bracket on convex domains from the same flat-disc radius."""
    if not dom.convex:
        raise ValueError("the two-sided bracket requires the convex flag")
    nv = _norm(v)
    if nv == 0:
        return KobayashiBound(0.0, 0.0, "graham")
    vhat = np.asarray(v, dtype=complex) / nv
    pr = disc_radius(dom, z, vhat, compute_delta=False, **disc_kwargs)
    return KobayashiBound(
        lower=nv / (2.0 * pr.disc_radius),
        upper=nv / pr.disc_radius,
        provenance="graham",
        constants={"disc_radius": pr.disc_radius},
    )


def sibony_lower(
    dom: DomainSpec,
    z,
    v,
    cert: PshCertificate,
    alpha_universal=ALPHA_UNIVERSAL_DEFAULT,
    verify=True,
) -> KobayashiBound:
    """Certificate lower bound sqrt(c/alpha) ||v|| / |u(z)|^(1/2)."""
    if alpha_universal <= 0:
        raise ValueError("alpha_universal must be positive")
    z = np.asarray(z, dtype=complex)
    uz = float(cert.u(z))
    if uz >= 0:
        raise CertificateError("certificate function is nonnegative at the query point")
    if verify:
        cert.verify(z[None, :])
    nv = _norm(v)
    lower = math.sqrt(cert.c_hessian / alpha_universal) * nv / math.sqrt(-uz)
    return KobayashiBound(
        lower=lower,
        upper=np.inf,
        provenance="sibony",
        constants={"c_hessian": cert.c_hessian, "alpha_universal": alpha_universal},
    )


def ma_lower(
    dom: DomainSpec,
    z,
    v,
    mod: ModulusOfContinuity,
    epsilon,
    c_prop33=1.0,
) -> KobayashiBound:
    """Modulus-route lower bound c sqrt(eps) ||v|| / omega(delta(z))^(1/2)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    delta = boundary_distance(dom, z)
    w = float(mod(delta))
    if w <= 0:
        raise ValueError("modulus vanishes at the boundary distance of an interior point")
    nv = _norm(v)
    lower = c_prop33 * math.sqrt(epsilon) * nv / math.sqrt(w)
    return KobayashiBound(
        lower=lower,
        upper=np.inf,
        provenance="ma-modulus",
        constants={"epsilon": epsilon, "c_prop33": c_prop33, "delta": delta},
    )


def calibrate_alpha_universal(samples=100):
    """Smallest alpha keeping the certificate bound below the exact disc metric.

    Uses the unit disc with the certificate u = |z|^2 - 1 (Hessian bound 1):
    the bound sqrt(1/alpha)/sqrt(1-|z|^2) stays below 1/(1-|z|^2) on every
    sample iff alpha >= max (1 - |z|^2), so the calibrated value is 1.
    """
    r = np.linspace(0.0, 0.99, samples)
    needed = 1.0 * (1.0 - r**2)  # c * |u(z)| / poincare^2 * ... reduces to |u|
    return float(np.max(needed))


@dataclass
class DivergenceReport:
    nu: np.ndarray
    delta: np.ndarray
    disc_radii: np.ndarray
    alphas: tuple
    ratios: dict  # alpha -> array (exponent alpha on delta)
    ratios_half: dict  # alpha -> array (exponent alpha/2 on delta)
    slopes: dict
    slopes_half: dict
    verdict: dict  # alpha -> bool (growth slope above threshold)
    slope_threshold: float

    def csv(self):
        cols = ["nu", "delta", "disc_radius"]
        for a in self.alphas:
            cols.append(f"ratio_alpha_{a:g}")
        for a in self.alphas:
            cols.append(f"ratio_halfalpha_{a:g}")
        lines = [",".join(cols)]
        for i in range(len(self.nu)):
            row = [f"{self.nu[i]:d}", repr(float(self.delta[i])), repr(float(self.disc_radii[i]))]
            row += [repr(float(self.ratios[a][i])) for a in self.alphas]
            row += [repr(float(self.ratios_half[a][i])) for a in self.alphas]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def holder_divergence(
    dom: DomainSpec,
    zs,
    us,
    alphas,
    nu=None,
    slope_threshold=0.05,
    n_theta=256,
) -> DivergenceReport:
    """Tabulate r(z_nu; u_nu)/delta(z_nu)^alpha along a sequence and judge growth.

    The verdict per alpha is a least-squares slope of log ratio against
    log nu above ``slope_threshold`` (a finite-sample proxy for divergence),
    reported only when at least 12 sequence points are available.  Ratios for
    the half exponent delta^(alpha/2) are tabulated alongside.
    """
    zs = np.atleast_2d(np.asarray(zs, dtype=complex))
    us = np.atleast_2d(np.asarray(us, dtype=complex))
    alphas = tuple(float(a) for a in alphas)
    for a in alphas:
        if not 0 < a <= 1:
            raise ValueError("alpha values must lie in (0, 1]")
    N = len(zs)
    nu = np.arange(1, N + 1) if nu is None else np.asarray(nu, dtype=int)
    delta = np.empty(N)
    radii = np.empty(N)
    for i, (z, u) in enumerate(zip(zs, us)):
        u = u / np.linalg.norm(u)
        pr = disc_radius(dom, z, u, n_theta=n_theta, compute_delta=False)
        radii[i] = pr.disc_radius
        delta[i] = boundary_distance(dom, z)
    ratios = {a: radii / delta**a for a in alphas}
    ratios_half = {a: radii / delta ** (a / 2.0) for a in alphas}

    def slope(y):
        if N < 2 or np.allclose(y, y[0]):
            return 0.0
        return float(np.polyfit(np.log(nu), np.log(y), 1)[0])

    slopes = {a: slope(ratios[a]) for a in alphas}
    slopes_half = {a: slope(ratios_half[a]) for a in alphas}
    verdict = {a: bool(N >= 12 and slopes[a] > slope_threshold) for a in alphas}
    return DivergenceReport(
        nu=nu,
        delta=delta,
        disc_radii=radii,
        alphas=alphas,
        ratios=ratios,
        ratios_half=ratios_half,
        slopes=slopes,
        slopes_half=slopes_half,
        verdict=verdict,
        slope_threshold=slope_threshold,
    )


def omega_phi_sequence(n=2, ks=range(2, 17)):
    """The standard boundary-approach sequence (0, -1 + 1/(nu+2), 0, ...) with
    direction e_1, for nu = 2^k."""
    nus = np.array([2**k for k in ks], dtype=int)
    zs = np.zeros((len(nus), n), dtype=complex)
    zs[:, 1] = -1.0 + 1.0 / (nus + 2)
    us = np.zeros((len(nus), n), dtype=complex)
    us[:, 0] = 1.0
    return nus, zs, us

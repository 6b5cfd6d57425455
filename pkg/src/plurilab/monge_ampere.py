"""Complex Hessian fields, pullback coefficient fields and the MA density.

Conventions.  The coefficient a_{j kbar} of a C^2 function u is the mixed
Wirtinger derivative d^2 u / dz_j dzbar_k; with that normalisation the
density of the m-fold wedge power is f = m! * det(a), calibrated so that
u = ||z||^2 gives f = m!.  Pulling a Hermitian coefficient field b back
through a holomorphic map F gives

    a_{j kbar}(z) = sum_{mu,nu} b_{mu nubar}(F(z)) dF_mu/dz_j conj(dF_nu/dz_k).

The L^p estimator is quasi-random with a boundary-layer stratum, since the
integrands of interest blow up (if at all) only near the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import DomainSpec, _to_complex

__all__ = [
    "complex_hessian",
    "HermitianField",
    "hessian_field",
    "PullbackField",
    "pullback_matrix",
    "pullback_field",
    "ma_density",
    "LpEstimate",
    "lp_norm_estimate",
]


def complex_hessian(u, z, h=1e-3, richardson=False):
    """Matrix of mixed second Wirtinger derivatives of a real function at z.

    Central differences in the 2n underlying real coordinates; O(h^2) for
    smooth u.  With richardson=True the h and h/2 evaluations are combined
    (O(h^4)) and the discrepancy between the two levels is returned as well.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]

    def level(step):
        dirs = np.zeros((2 * n, n), dtype=complex)
        for j in range(n):
            dirs[j, j] = step
            dirs[n + j, j] = 1j * step
        # diagonal second differences
        pts = [z]
        for a in range(2 * n):
            pts.append(z + dirs[a])
            pts.append(z - dirs[a])
        # cross stencils for a < b
        pairs = [(a, b) for a in range(2 * n) for b in range(a + 1, 2 * n)]
        for a, b in pairs:
            pts.extend(
                [
                    z + dirs[a] + dirs[b],
                    z + dirs[a] - dirs[b],
                    z - dirs[a] + dirs[b],
                    z - dirs[a] - dirs[b],
                ]
            )
        vals = u(np.stack(pts))
        if not np.all(np.isfinite(vals)):
            raise ValueError("function evaluation failed near the requested point")
        u0 = vals[0]
        second = np.empty((2 * n, 2 * n))
        k = 1
        for a in range(2 * n):
            second[a, a] = (vals[k] - 2 * u0 + vals[k + 1]) / step**2
            k += 2
        for (a, b) in pairs:
            mixed = (vals[k] - vals[k + 1] - vals[k + 2] + vals[k + 3]) / (4 * step**2)
            second[a, b] = mixed
            second[b, a] = mixed
            k += 4
        H = np.empty((n, n), dtype=complex)
        for j in range(n):
            for kk in range(n):
                re = second[j, kk] + second[n + j, n + kk]
                im = second[j, n + kk] - second[n + j, kk]
                H[j, kk] = 0.25 * (re + 1j * im)
        return H

    H1 = level(h)
    if not richardson:
        return H1
    H2 = level(h / 2)
    err = float(np.max(np.abs(H1 - H2)))
    return (4.0 * H2 - H1) / 3.0, err


@dataclass
class HermitianField:
    """An evaluable Hermitian coefficient field with an essential bound."""

    n: int
    entries: Callable[[np.ndarray], np.ndarray]  # (..., n) -> (..., n, n)
    essential_bound: float

    def verify(self, points, tol=1e-10):
        """Sampled Hermitian symmetry and boundedness checks."""
        B = self.entries(np.asarray(points, dtype=complex))
        sym = float(np.max(np.abs(B - np.conj(np.swapaxes(B, -1, -2)))))
        if sym > tol:
            raise ValueError(f"field is not Hermitian on samples (residual {sym:.2e})")
        top = float(np.max(np.abs(B)))
        if top > self.essential_bound + tol:
            raise ValueError(
                f"|entries| exceed the claimed essential bound ({top:.4g} > {self.essential_bound:.4g})"
            )
        return {"hermitian_residual": sym, "max_entry": top}


def hessian_field(u, n, essential_bound, h=1e-3) -> HermitianField:
    """HermitianField whose entries are the finite-difference Hessian of u."""

    def entries(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=complex))
        out = np.stack([complex_hessian(u, z, h=h) for z in pts])
        return out if out.shape[0] > 1 else out[0]

    return HermitianField(n=n, entries=entries, essential_bound=essential_bound)


@dataclass
class PullbackField:
    """Pullback coefficients, their MA density and the integrability exponent.

    The density convention is f = m! * det(a); with a_{j kbar} equal to the
    mixed second derivatives this is forced by the wedge algebra and makes
    u = ||z||^2 give exactly m!.
    """

    m: int
    entries: Callable[[np.ndarray], np.ndarray]
    density: Callable[[np.ndarray], np.ndarray]
    exponent_p: float
    normalization: str = "f = m! * det(a); a_jk = d^2 u / dz_j dzbar_k"


def pullback_matrix(F, b: HermitianField, z) -> np.ndarray:
    """Coefficients of the pullback of the field b through F at the point z."""
    z = np.asarray(z, dtype=complex)
    w = F.eval(z)
    if hasattr(b, "domain") and b.domain is not None and not b.domain.contains(w):
        raise ValueError("F(z) lies outside the domain of the coefficient field")
    J = F.jacobian(z)  # (n, m)
    B = np.asarray(b.entries(w), dtype=complex)
    return J.T @ B @ np.conj(J)


def pullback_field(F, b: HermitianField, p) -> PullbackField:
    """Evaluable pullback field of b through F with density f = m! det(a)."""

    def entries(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=complex))
        out = np.stack([pullback_matrix(F, b, z) for z in pts])
        return out if out.shape[0] > 1 else out[0]

    def density(pts):
        a = entries(pts)
        return ma_density(a)

    return PullbackField(m=F.m, entries=entries, density=density, exponent_p=p / F.m)


def ma_density(a):
    """Density m! * det(a) of the m-fold wedge power for coefficients a.

    Accepts a single (m, m) Hermitian matrix or a batch (..., m, m); the
    determinant of a Hermitian matrix is real, so the imaginary roundoff is
    dropped.  NaNs propagate.
    """
    a = np.asarray(a, dtype=complex)
    m = a.shape[-1]
    det = np.linalg.det(a)
    out = math.factorial(m) * det.real
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# quasi-random L^p estimation
# ---------------------------------------------------------------------------


@dataclass
class LpEstimate:
    value: float
    coarse_value: float
    p: float
    n_samples: int
    layer_fraction: float
    error_bar: float

    @property
    def stability_ratio(self):
        if self.value == 0 and self.coarse_value == 0:
            return 1.0
        return self.coarse_value / self.value if self.value else np.inf


def lp_norm_estimate(g, dom: DomainSpec, p, budget=100_000, seed=0, layer_share=0.3):
    """Estimate (integral of |g|^p over the domain)^(1/p).

    Halton points in the sampling box are split into a boundary-layer stratum
    (|rho| below its empirical 15% quantile among interior hits) and a bulk
    stratum; the layer is re-sampled at higher density with its volume taken
    from the bulk stream's hit fraction.  Two-level estimates (quarter budget
    vs full) are reported for convergence assessment.
    """
    from scipy.stats import qmc

    if p < 1:
        raise ValueError("p must be >= 1")
    budget = int(budget)
    if budget < 1000:
        raise ValueError("budget must be at least 1000")
    box = dom.sampling_box()
    lo, hi = box[:, 0], box[:, 1]
    vol_box = float(np.prod(hi - lo))
    n_bulk = int(budget * (1 - layer_share))
    n_layer = budget - n_bulk

    h1 = qmc.Halton(d=2 * dom.n, seed=seed)
    x1 = h1.random(n_bulk)
    z1 = _to_complex(lo + (hi - lo) * x1)
    r1 = dom.rho(z1)
    inside1 = r1 < 0
    if not np.any(inside1):
        raise ValueError("no interior hits; sampling box appears wrong")
    tau = float(np.quantile(-r1[inside1], 0.15))
    layer1 = inside1 & (r1 > -tau)
    bulk1 = inside1 & ~layer1

    def powvals(z):
        vals = np.abs(np.asarray(g(z))) ** p
        bad = ~np.isfinite(vals)
        if np.mean(bad) > 1e-6:
            raise ValueError(f"non-finite sample fraction {np.mean(bad):.2e} exceeds 1e-6")
        vals[bad] = 0.0
        return vals

    v_bulk = powvals(z1[bulk1])

    h2 = qmc.Halton(d=2 * dom.n, seed=seed + 1)
    got = []
    draws = 0
    while sum(len(a) for a in got) < n_layer and draws < 50:
        x2 = h2.random(max(n_layer, 1024))
        z2 = _to_complex(lo + (hi - lo) * x2)
        r2 = dom.rho(z2)
        got.append(z2[(r2 < 0) & (r2 > -tau)])
        draws += 1
    z_layer = np.concatenate(got)[:n_layer] if got else np.empty((0, dom.n), complex)
    v_layer = powvals(z_layer) if len(z_layer) else np.zeros(1)

    frac_bulk = np.count_nonzero(bulk1) / n_bulk
    frac_layer = np.count_nonzero(layer1) / n_bulk

    def integral(vb, vl):
        part_bulk = vol_box * frac_bulk * (np.mean(vb) if len(vb) else 0.0)
        part_layer = vol_box * frac_layer * (np.mean(vl) if len(vl) else 0.0)
        return part_bulk + part_layer

    I_full = integral(v_bulk, v_layer)
    I_quarter = integral(v_bulk[: max(len(v_bulk) // 4, 1)], v_layer[: max(len(v_layer) // 4, 1)])
    value = I_full ** (1.0 / p)
    coarse = I_quarter ** (1.0 / p)
    sem = 0.0
    if len(v_bulk) > 1:
        sem += (vol_box * frac_bulk) * np.std(v_bulk) / math.sqrt(len(v_bulk))
    if len(v_layer) > 1:
        sem += (vol_box * frac_layer) * np.std(v_layer) / math.sqrt(len(v_layer))
    err = abs(value - coarse) + (sem ** (1.0 / p) if sem > 0 else 0.0)
    return LpEstimate(
        value=float(value),
        coarse_value=float(coarse),
        p=float(p),
        n_samples=budget,
        layer_fraction=float(frac_layer / max(frac_bulk + frac_layer, 1e-300)),
        error_bar=float(err),
    )

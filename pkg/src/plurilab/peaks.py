"""Plurisubharmonic peak functions at boundary points of convex domains.

Construction: a support hyperplane at the boundary point p gives a complex
line L through p along the normal; the orthogonal projection of the domain
onto L is a planar convex region omega with 0 on its boundary.  A numerical
conformal map psi of omega onto the unit disc, normalised by psi(0) = 1,
composes with the projection pi into the peak data

    u(z) = Re(psi(pi(z))) - 1,        g(z) = exp(psi(pi(z)) - 1),

with u = log|g| pluriharmonic along pi, u(p) = 0 and u < 0 elsewhere on the
closure whenever the complex tangent hyperplane meets the closure only at p.

The conformal map runs a conjugate-function (boundary-correspondence)
iteration about an interior anchor of the convex shadow: star-shapedness
makes the radial boundary parameterisation well defined, and the iteration
solves theta(phi) = phi + H[log rho(theta)] with H the circle conjugation
operator (FFT).  Interior evaluation inverts the spectral forward map by
Newton; a Cauchy-integral evaluator over the boundary correspondence is
available as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .domains import DomainSpec, sample_boundary, sample_interior, _to_complex
from .errors import ConvergenceError, FrameError

__all__ = [
    "SupportFrame",
    "support_frame",
    "complex_shadow",
    "RiemannMapData",
    "riemann_map",
    "PeakFunction",
    "peak_function",
]


@dataclass
class SupportFrame:
    p: np.ndarray
    v: np.ndarray
    report: dict = field(default_factory=dict)

    def pi(self, z):
        """Projection coordinate <proj_L(z) - p, v> = <z - p, v>."""
        z = np.asarray(z, dtype=complex)
        return (z - self.p) @ np.conj(self.v)

    def verify(self, dom: DomainSpec, samples=200, seed=0):
        rng = np.random.default_rng(seed)
        pts = sample_interior(dom, samples, rng)
        side = np.real(self.pi(pts))
        if not np.all(side < 0):
            raise FrameError("support side condition fails at interior samples")
        assert abs(self.pi(self.p[None, :])[0]) == 0.0
        self.report = {"max_side": float(np.max(side)), "samples": samples}
        return self.report


def support_frame(dom: DomainSpec, p, samples=200, seed=0) -> SupportFrame:
    """Support frame at a boundary point of a convex domain.

    The normal comes from the defining-function gradient (or, if degenerate,
    from a separating-direction search over interior samples).
    """
    if not dom.convex:
        raise FrameError("support frames require a convex domain")
    p = np.asarray(p, dtype=complex)
    if abs(float(dom.rho(p))) > 1e-8:
        raise FrameError("peak point must lie on the boundary")
    g = dom.gradient(p)
    ng = float(np.linalg.norm(g))
    rng = np.random.default_rng(seed)
    if ng > 1e-8:
        v = g / ng
    else:
        pts = sample_interior(dom, 400, rng)
        dirs = pts - p
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        # separating direction: maximize the worst (most positive) side value
        best, best_val = None, np.inf
        for _ in range(2000):
            w = rng.standard_normal(2 * dom.n)
            w /= np.linalg.norm(w)
            wv = _to_complex(w)
            side = np.max(np.real(dirs @ np.conj(wv)))
            if side < best_val:
                best_val, best = side, wv
        if best_val >= 0:
            raise FrameError("no separating direction found at sample tolerance")
        v = -best
    frame = SupportFrame(p=p, v=v)
    frame.verify(dom, samples=samples, seed=seed)
    return frame


def complex_shadow(dom: DomainSpec, frame: SupportFrame, budget=512, seed=0):
    """Planar convex loop of the projected domain, with 0 on its boundary.

    The loop is traced by support maximisation: for each planar direction
    e^(i alpha), the linear functional Re <z, e^(i alpha) v> is maximised
    over the domain boundary (parameterised by exit rays from the witness),
    warm-starting each angle from the previous maximiser.  A convex hull of
    the support points (plus the known boundary point 0) cleans up noise.
    Raises if 0 ends up strictly inside the hull (the frame is then not
    actually supporting, e.g. a flat face probed with a tilted normal).
    """
    from scipy.spatial import ConvexHull

    from .domains import first_exit, _to_real

    rng = np.random.default_rng(seed)
    witness = np.asarray(dom.witness, dtype=complex)
    alphas = np.linspace(0.0, 2 * math.pi, budget, endpoint=False)
    # per-angle independent cap searches, all angles batched per round
    U = _to_real(np.exp(1j * alphas)[:, None] * frame.v[None, :])
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    best_val = np.full(budget, -np.inf)
    best_pt = np.empty((budget, dom.n), dtype=complex)
    phase = np.exp(-1j * alphas)
    cap = 0.6
    per = 16
    for round_ in range(8):
        w = rng.standard_normal((budget, per, 2 * dom.n))
        w /= np.linalg.norm(w, axis=2, keepdims=True)
        cands = np.concatenate([U[:, None, :], U[:, None, :] + cap * w], axis=1)
        cands /= np.linalg.norm(cands, axis=2, keepdims=True)
        cz = _to_complex(cands.reshape(-1, 2 * dom.n))
        t = first_exit(dom, witness, cz, coarse=128, tol=1e-12)
        pts = witness[None, :] + t[:, None] * cz
        vals = np.real(frame.pi(pts) * np.repeat(phase, per + 1))
        vals = vals.reshape(budget, per + 1)
        pts = pts.reshape(budget, per + 1, dom.n)
        k = np.argmax(vals, axis=1)
        rows = np.arange(budget)
        better = vals[rows, k] > best_val
        best_val = np.where(better, vals[rows, k], best_val)
        best_pt[better] = pts[rows, k][better]
        U[better] = cands[rows, k][better]
        cap *= 0.45
    support_pts = frame.pi(best_pt)

    zeta = np.concatenate([support_pts, [0.0 + 0.0j]])
    xy = np.stack([zeta.real, zeta.imag], axis=1)
    hull = ConvexHull(xy)
    verts = zeta[hull.vertices]  # counter-clockwise per Qhull in 2-D
    # 0 must be on the hull boundary: re-anchor the loop to start at it
    k = int(np.argmin(np.abs(verts)))
    if abs(verts[k]) > 1e-7 * dom.bounding_radius:
        raise FrameError(
            "0 lies strictly inside the shadow hull; the frame is not supporting"
        )
    return np.roll(verts, -k)


# ---------------------------------------------------------------------------
# numerical conformal map of a convex loop
# ---------------------------------------------------------------------------


def _polygon_radial(verts, anchor, phis):
    """Radial distance from the anchor to the polygon along each angle."""
    a = anchor
    e = np.exp(1j * phis)
    v0 = verts
    v1 = np.roll(verts, -1)
    # solve a + t e = v0 + s (v1 - v0), t > 0, s in [0, 1]
    t_best = np.full(len(phis), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(len(verts)):
            d = v1[k] - v0[k]
            denom = e.real * d.imag - e.imag * d.real
            ok = np.abs(denom) > 1e-15
            rhs = v0[k] - a
            t = np.where(ok, (rhs.real * d.imag - rhs.imag * d.real) / denom, np.inf)
            if abs(d.real) > abs(d.imag):
                s = (t * e.real - rhs.real) / d.real if abs(d.real) > 1e-300 else -np.ones_like(t)
            else:
                s = (t * e.imag - rhs.imag) / d.imag if abs(d.imag) > 1e-300 else -np.ones_like(t)
            hit = ok & (t > 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
            t_best = np.where(hit & np.isfinite(t) & (t < t_best), t, t_best)
    if not np.all(np.isfinite(t_best)):
        raise ValueError("radial parameterisation failed; anchor not interior?")
    return t_best


def _conjugate(u):
    """Circle conjugation operator via FFT (zero mean)."""
    N = len(u)
    U = np.fft.fft(u)
    k = np.fft.fftfreq(N, d=1.0 / N)
    mult = -1j * np.sign(k)
    return np.real(np.fft.ifft(mult * U))


@dataclass
class RiemannMapData:
    anchor: complex
    nodes_w: np.ndarray  # boundary points of omega at the correspondence
    nodes_phi: np.ndarray  # disc-parameter angles
    nodes_theta: np.ndarray  # polar angles of the boundary points about the anchor
    coeffs: np.ndarray  # spectral coefficients of log((f - a)/zeta)
    rotation: complex
    quality: dict

    def forward(self, zeta):
        """The disc-to-shadow map f(zeta) = a + zeta exp(g(zeta))."""
        zeta = np.asarray(zeta, dtype=complex) / self.rotation
        gz = np.zeros_like(zeta)
        for c in self.coeffs[::-1]:
            gz = gz * zeta + c
        return self.anchor + zeta * np.exp(gz)

    def forward_derivative(self, zeta):
        zeta = np.asarray(zeta, dtype=complex) / self.rotation
        gz = np.zeros_like(zeta)
        dgz = np.zeros_like(zeta)
        for c in self.coeffs[::-1]:
            dgz = dgz * zeta + gz
            gz = gz * zeta + c
        return (np.exp(gz) + zeta * np.exp(gz) * dgz) / self.rotation

    def psi(self, w, newton_iters=50, tol=1e-13):
        """Shadow-to-disc map by Newton inversion of the spectral forward map
        (batched over all query points)."""
        w = np.asarray(w, dtype=complex)
        flat = np.atleast_1d(w).ravel()
        rel = flat - self.anchor
        theta = np.mod(np.angle(rel), 2 * math.pi)
        # initial guesses from the nearest correspondence nodes
        gap = np.abs(
            (self.nodes_theta[None, :] - theta[:, None] + math.pi) % (2 * math.pi)
            - math.pi
        )
        k = np.argmin(gap, axis=1)
        rho0 = np.abs(self.nodes_w[k] - self.anchor)
        z = (
            np.minimum(np.abs(rel) / np.maximum(rho0, 1e-300), 1.0)
            * np.exp(1j * self.nodes_phi[k])
            * self.rotation
        )
        active = np.ones(len(flat), dtype=bool)
        for _ in range(newton_iters):
            fz = self.forward(z[active]) - flat[active]
            done = np.abs(fz) < tol
            if np.all(done):
                active[np.flatnonzero(active)[done]] = False
                break
            step = fz / self.forward_derivative(z[active])
            znew = z[active] - step
            mag = np.abs(znew)
            znew = np.where(mag > 1.0, znew / np.where(mag > 0, mag, 1.0) * (1 - 1e-14), znew)
            z[active] = znew
            idx = np.flatnonzero(active)
            active[idx[done]] = False
            if not np.any(active):
                break
        mag = np.abs(z)
        z = np.where(mag > 1.0, z / np.where(mag > 0, mag, 1.0), z)
        return z.reshape(np.shape(w)) if np.ndim(w) else z[0]

    def psi_cauchy(self, w):
        """Cauchy-integral evaluator over the boundary correspondence
        (singularity-subtracted trapezoid); interior points only."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        s = self.nodes_w
        zeta = np.exp(1j * self.nodes_phi) * self.rotation
        ds = np.gradient(s, self.nodes_phi, edge_order=2)
        out = np.empty_like(w)
        for i, wi in enumerate(w):
            k = int(np.argmin(np.abs(s - wi)))
            diff = (zeta - zeta[k]) / (s - wi)
            diff[np.abs(s - wi) < 1e-14] = 0.0
            integral = np.sum(diff * ds) * (2 * math.pi / len(s)) / (2j * math.pi)
            out[i] = zeta[k] + integral
        return out if len(out) > 1 else out[0]


def riemann_map(loop, nodes=512, tol=1e-6, max_iter=200, relax=0.5) -> RiemannMapData:
    """Conformal map of a convex Jordan loop (with 0 on it) onto the disc,
    normalised to send 0 to 1.

    Runs the conjugate-function iteration for the boundary correspondence of
    the disc-to-shadow map about the hull centroid, builds the spectral
    forward map, and post-rotates so that the loop point 0 maps to 1.
    """
    verts = np.asarray(loop, dtype=complex)
    if len(verts) < 3:
        raise ValueError("loop must have at least 3 vertices")
    anchor = complex(np.mean(verts))
    phis = np.linspace(0.0, 2 * math.pi, nodes, endpoint=False)

    theta = phis.copy()
    residual = np.inf
    prev_residual = np.inf
    lam = relax
    for it in range(max_iter):
        rho = _polygon_radial(verts, anchor, np.mod(theta, 2 * math.pi))
        target = phis + _conjugate(np.log(rho))
        residual = float(np.max(np.abs(target - theta)))
        # damped fixed point: back off when corners make the plain
        # iteration oscillate, speed up while it contracts
        lam = max(0.05, 0.6 * lam) if residual > prev_residual else min(0.9, 1.05 * lam)
        prev_residual = residual
        theta = (1 - lam) * theta + lam * target
        if residual < tol:
            break
    else:
        raise ConvergenceError(
            f"boundary-correspondence iteration stalled (residual {residual:.2e})",
            residual=residual,
        )
    rho = _polygon_radial(verts, anchor, np.mod(theta, 2 * math.pi))
    w_nodes = anchor + rho * np.exp(1j * theta)

    # spectral coefficients of g = log((f - a)/zeta): at the fixed point the
    # boundary values log(rho) + i (theta - phi) extend holomorphically, so
    # the negative Fourier modes should be residual-small
    G = np.log(rho) + 1j * (theta - phis)
    Ghat = np.fft.fft(G) / nodes
    coeffs = Ghat[: nodes // 2].copy()
    neg_energy = float(np.max(np.abs(Ghat[nodes // 2 :])))

    # rotation sending the pre-image of the loop point 0 to zeta = 1
    theta_un = np.unwrap(theta)
    theta_ext = np.concatenate([theta_un, [theta_un[0] + 2 * math.pi]])
    phi_ext = np.concatenate([phis, [2 * math.pi]])
    theta_zero = float(np.angle(0.0 - anchor))
    t = theta_un[0] + (theta_zero - theta_un[0]) % (2 * math.pi)
    phi0 = float(np.interp(t, theta_ext, phi_ext))
    rotation = np.exp(-1j * phi0)

    order = np.argsort(np.mod(theta, 2 * math.pi))
    data = RiemannMapData(
        anchor=anchor,
        nodes_w=w_nodes[order],
        nodes_phi=phis[order],
        nodes_theta=np.mod(theta, 2 * math.pi)[order],
        coeffs=coeffs,
        rotation=complex(rotation),
        quality={},
    )
    # quality: correspondence residual, winding, unimodularity at fresh points
    fresh = anchor + 0.9999 * ((w_nodes + np.roll(w_nodes, -1)) / 2 - anchor)
    psi_vals = data.psi(fresh)
    unimod = float(np.max(np.abs(np.abs(psi_vals) - 1.0)))
    winding = float(
        (np.sum(np.diff(np.unwrap(np.angle(psi_vals)))) + np.angle(
            psi_vals[0] / psi_vals[-1]
        ))
        / (2 * math.pi)
    )
    psi_zero = data.psi(np.array([0.0 + 0j]))[0]
    data.quality = {
        "correspondence_residual": residual,
        "iterations": it + 1,
        "unimodularity": unimod,
        "winding": round(winding),
        "winding_raw": winding,
        "negative_mode_energy": neg_energy,
        "psi_zero_error": abs(psi_zero - 1.0),
    }
    return data


@dataclass
class PeakFunction:
    frame: SupportFrame
    mapdata: RiemannMapData
    report: dict = field(default_factory=dict)

    def u(self, z):
        """Re(psi(pi(z))) - 1: continuous psh peak data, 0 exactly at p."""
        return np.real(self.mapdata.psi(self.frame.pi(z))) - 1.0

    def g(self, z):
        """exp(psi(pi(z)) - 1): non-vanishing holomorphic peak function."""
        return np.exp(self.mapdata.psi(self.frame.pi(z)) - 1.0)

    def eta_separation(self, dom, d_fraction=0.1, samples=400, seed=0):
        """eta(d) = -max u over boundary samples at distance >= d from p."""
        rng = np.random.default_rng(seed)
        pts = sample_boundary(dom, samples, rng)
        diam = 2.0 * dom.bounding_radius
        far = np.linalg.norm(pts - self.frame.p, axis=1) >= d_fraction * diam
        vals = self.u(pts[far])
        eta = -float(np.max(vals))
        return {"eta": eta, "n_far": int(np.count_nonzero(far)), "d_fraction": d_fraction}


def peak_function(dom: DomainSpec, p, shadow_angles=512, nodes=512, seed=0) -> PeakFunction:
    """Full pipeline: support frame -> shadow hull -> conformal map -> peak."""
    frame = support_frame(dom, p, seed=seed)
    loop = complex_shadow(dom, frame, budget=shadow_angles, seed=seed)
    mapdata = riemann_map(loop, nodes=nodes)
    pk = PeakFunction(frame=frame, mapdata=mapdata)
    pk.report = {
        "u_at_p": float(pk.u(np.asarray(p, dtype=complex)[None, :])[0]),
        "map_quality": mapdata.quality,
    }
    return pk

"""Homogeneous complex MA solutions for rotation-invariant data on Reinhardt
domains in C^2, plus a brute-force grid oracle and Holder diagnostics.

Rotation-invariant psh functions on a complete Reinhardt domain are exactly
the functions U(log|z1|, log|z2|) with U convex and nondecreasing in each
variable, and the maximal psh minorant of invariant boundary data transports
to the largest such U below the transported data.  The solver computes that
envelope by iterated discrete convexification: 1-D lower convex envelopes
along grid rows, columns and both index diagonals (straight lines, since each
axis is uniformly spaced), alternated with the monotone (suffix-min) and
data-clamp projections until a fixed point.  Every projection replaces U by
the largest smaller function with its property, so the decreasing limit is
the largest function satisfying all of them.

The oracle ("perron_oracle") never uses the Reinhardt reduction: on a real
4-D grid it clamps nodes outside the domain to the data and sweeps

    u(node) <- min over sampled complex discs of the disc-boundary average,

from above.  A maximal psh function is a fixed point of that operator (it is
psh, so every average dominates it, and it is harmonic along some complex
line through each point), and the sweep limit is the discrete largest one.

Log-coordinate grids are truncated at x = x_floor (default -12) with constant
extension; monotonicity bounds the truncation error by the data oscillation
below e^(x_floor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._accel import envelope_pass, perron_sweep
from .domains import DomainSpec, first_exit, _to_complex, _to_real
from .errors import ConvergenceError

__all__ = [
    "EnvelopeSolution",
    "reinhardt_envelope_solve",
    "refine_top_band",
    "PerronSolution",
    "perron_oracle",
    "canonical_function",
    "canonical_data",
    "HolderFit",
    "holder_fit",
    "estimate_modulus",
]


# ---------------------------------------------------------------------------
# envelope solver
# ---------------------------------------------------------------------------


@dataclass
class _Level:
    x1: np.ndarray
    x2: np.ndarray
    U: np.ndarray
    clamp_mask: np.ndarray
    sweeps: int
    residual: float


@dataclass
class EnvelopeSolution:
    """Gridded solution U(x1, x2) in log coordinates with refinement bands.

    ``levels[0]`` is the base rectangle; later levels are bands hugging the
    top edge of the x2 axis at finer x2 resolution.  Evaluation picks the
    finest level containing the query point.
    """

    dom: DomainSpec
    g: Callable
    levels: list
    x_floor: float
    modulus_radii: Optional[np.ndarray] = None
    modulus_values: Optional[np.ndarray] = None
    holder_fits: list = field(default_factory=list)

    def evaluate_logx(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.empty(np.broadcast(x1, x2).shape)
        x1, x2 = np.broadcast_arrays(x1, x2)
        done = np.zeros(out.shape, dtype=bool)
        for lev in reversed(self.levels):
            sel = (
                ~done
                & (x2 >= lev.x2[0] - 1e-15)
                & (x2 <= lev.x2[-1] + 1e-15)
                & (x1 >= lev.x1[0] - 1e-15)
            )
            if np.any(sel):
                out[sel] = _bilinear(lev.x1, lev.x2, lev.U, x1[sel], x2[sel])
                done |= sel
        if not np.all(done):
            # clamp stragglers into the base rectangle (constant extension)
            lev = self.levels[0]
            xc1 = np.clip(x1[~done], lev.x1[0], lev.x1[-1])
            xc2 = np.clip(x2[~done], lev.x2[0], lev.x2[-1])
            out[~done] = _bilinear(lev.x1, lev.x2, lev.U, xc1, xc2)
        return out

    def evaluate(self, z):
        """u(z) = U(log|z1|, log|z2|) with constant extension below x_floor."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            x1 = np.log(np.abs(z[..., 0]))
            x2 = np.log(np.abs(z[..., 1]))
        x1 = np.maximum(x1, self.x_floor)
        x2 = np.maximum(x2, self.x_floor)
        base = self.levels[0]
        x1 = np.minimum(x1, base.x1[-1])
        x2 = np.minimum(x2, base.x2[-1])
        return self.evaluate_logx(x1, x2)

    @property
    def grid_spacing(self):
        lev = self.levels[0]
        return max(lev.x1[1] - lev.x1[0], lev.x2[1] - lev.x2[0])

    def validate(self, tol=1e-8):
        """Discrete convexity along grid lines, monotonicity, data domination."""
        report = {}
        for li, lev in enumerate(self.levels):
            U = lev.U
            scale = max(1.0, float(np.max(np.abs(U))))
            d2a = U[:-2, :] - 2 * U[1:-1, :] + U[2:, :]
            d2b = U[:, :-2] - 2 * U[:, 1:-1] + U[:, 2:]
            mono1 = np.diff(U, axis=0).min()
            mono2 = np.diff(U, axis=1).min()
            report[f"level{li}"] = {
                "convexity_defect": float(min(d2a.min(), d2b.min())),
                "monotonicity_defect": float(min(mono1, mono2)),
            }
            if min(d2a.min(), d2b.min()) < -tol * scale:
                raise ValueError(f"convexity violated on level {li}")
            if min(mono1, mono2) < -tol * scale:
                raise ValueError(f"monotonicity violated on level {li}")
        return report

    def csv_logx(self):
        lev = self.levels[0]
        lines = ["x1,x2,U"]
        for i, a in enumerate(lev.x1):
            for j, b in enumerate(lev.x2):
                lines.append(f"{a!r},{b!r},{lev.U[i, j]!r}")
        return "\n".join(lines) + "\n"

    def csv_moduli(self):
        lev = self.levels[0]
        lines = ["abs_z1,abs_z2,u"]
        for i, a in enumerate(lev.x1):
            for j, b in enumerate(lev.x2):
                lines.append(f"{math.exp(a)!r},{math.exp(b)!r},{lev.U[i, j]!r}")
        return "\n".join(lines) + "\n"


def _bilinear(x1, x2, U, q1, q2):
    i = np.clip(np.searchsorted(x1, q1) - 1, 0, len(x1) - 2)
    j = np.clip(np.searchsorted(x2, q2) - 1, 0, len(x2) - 2)
    t = np.clip((q1 - x1[i]) / (x1[i + 1] - x1[i]), 0.0, 1.0)
    s = np.clip((q2 - x2[j]) / (x2[j + 1] - x2[j]), 0.0, 1.0)
    return (
        (1 - t) * (1 - s) * U[i, j]
        + t * (1 - s) * U[i + 1, j]
        + (1 - t) * s * U[i, j + 1]
        + t * s * U[i + 1, j + 1]
    )


def _moduli_points(x1, x2):
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    pts = np.empty(X1.shape + (2,), dtype=complex)
    pts[..., 0] = np.exp(X1)
    pts[..., 1] = np.exp(X2)
    return pts


def _monotone_pass(U):
    # largest nondecreasing minorant along each axis: running min from the top
    U[...] = np.minimum.accumulate(U[::-1, :], axis=0)[::-1, :]
    U[...] = np.minimum.accumulate(U[:, ::-1], axis=1)[:, ::-1]


def _layer_constraints(dom, g, x1, x2, inside):
    """Boundary-data constraints for the inside boundary layer.

    For every inside node within two cells of an outside node, the boundary
    is crossed along one of the rays in the +x1, +x2 or diagonal directions
    of the log rectangle (log images of complete Reinhardt domains are
    down-closed).  Each crossing is a genuine boundary point dominating the
    node, so U(node) <= g(crossing) holds exactly for every feasible U; the
    clamp value is the minimum of g over the crossings found.
    """
    from scipy.ndimage import binary_dilation

    layer = inside & binary_dilation(~inside, iterations=2)
    h1 = x1[1] - x1[0]
    h2 = x2[1] - x2[0]
    idx = np.argwhere(layer)
    base = np.stack([x1[idx[:, 0]], x2[idx[:, 1]]], axis=-1)  # (K, 2) log coords
    vals = np.full(len(idx), np.inf)
    for d in (np.array([0.0, h2]), np.array([h1, 0.0]), np.array([h1, h2])):
        reach = 2.5
        ts = np.linspace(0.0, reach, 9)
        logpts = base[:, None, :] + ts[None, :, None] * d[None, None, :]
        zpts = np.exp(logpts).astype(complex)
        r = dom.rho(zpts)
        out = r >= 0
        out[:, 0] = False
        found = out.any(axis=1)
        if not np.any(found):
            continue
        first = np.argmax(out, axis=1)
        lo = np.where(found, ts[np.maximum(first - 1, 0)], 0.0)
        hi = np.where(found, ts[first], reach)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            zin = np.exp(base + mid[:, None] * d[None, :]).astype(complex)
            isin = dom.rho(zin) < 0
            lo = np.where(isin, mid, lo)
            hi = np.where(isin, hi, mid)
        cross = np.exp(base + (0.5 * (lo + hi))[:, None] * d[None, :]).astype(complex)
        gv = np.asarray(g(cross), dtype=float)
        vals = np.where(found, np.minimum(vals, gv), vals)
    ok = np.isfinite(vals)
    mask = np.zeros(inside.shape, dtype=bool)
    mask[idx[ok, 0], idx[ok, 1]] = True
    G = np.zeros(inside.shape)
    G[idx[ok, 0], idx[ok, 1]] = vals[ok]
    return mask, G


def _solve_rect(
    dom,
    g,
    x1,
    x2,
    init=None,
    extra_clamp=None,
    tol=1e-11,
    max_sweeps=4000,
    clamp_mode="boundary",
):
    pts = _moduli_points(x1, x2)
    inside = dom.rho(pts) < 0
    if clamp_mode == "everywhere":
        # obstacle reading: the data bounds U at every node
        clamp = np.ones(inside.shape, dtype=bool)
        G = np.asarray(g(pts), dtype=float)
    else:
        clamp, G = _layer_constraints(dom, g, x1, x2, inside)
    if not np.any(clamp):
        raise ValueError("grid does not reach the boundary; enlarge the rectangle")
    top = float(np.max(G[clamp]))
    U = np.full(G.shape, top) if init is None else np.array(init, dtype=float)
    scale = max(1.0, float(np.max(np.abs(G[clamp]))))
    residual = np.inf
    for sweep in range(1, max_sweeps + 1):
        U_prev = U.copy()
        U[clamp] = np.minimum(U[clamp], G[clamp])
        if extra_clamp is not None:
            mask, vals = extra_clamp
            U[mask] = np.minimum(U[mask], vals)
        for code in (0, 1, 2, 3):
            envelope_pass(U, code)
        _monotone_pass(U)
        residual = float(np.max(np.abs(U - U_prev)))
        if residual < tol * scale:
            break
    else:
        raise ConvergenceError(
            f"envelope iteration did not converge ({residual:.3e} after {max_sweeps} sweeps)",
            residual=residual,
        )
    return U, clamp, sweep, residual


def _check_invariant_data(g, dom, seed=0, tol=1e-9):
    rng = np.random.default_rng(seed)
    m = np.exp(rng.uniform(-3, 0, size=(64, dom.n)))
    z = m.astype(complex)
    keep = np.ones(len(z), dtype=bool)
    theta = rng.uniform(0, 2 * np.pi, size=z.shape)
    rot = z * np.exp(1j * theta)
    dv = np.max(np.abs(np.asarray(g(z[keep])) - np.asarray(g(rot[keep]))))
    if dv > tol:
        raise ValueError(f"boundary data is not rotation-invariant (deviation {dv:.2e})")


def _axis_tops(dom):
    """log of the largest modulus per coordinate axis (first exit from 0)."""
    tops = []
    for j in range(dom.n):
        e = np.zeros(dom.n, dtype=complex)
        e[j] = 1.0
        t = float(first_exit(dom, np.zeros(dom.n, dtype=complex), e[None, :], tol=1e-13)[0])
        tops.append(math.log(t))
    return tops


def reinhardt_envelope_solve(
    dom: DomainSpec,
    g,
    x_floor=-12.0,
    shape=(257, 257),
    tol=1e-11,
    max_sweeps=4000,
    check_data=True,
    clamp_mode="boundary",
) -> EnvelopeSolution:
    """Largest convex, coordinatewise-nondecreasing minorant of the data in
    log coordinates, recovered as u(z) = U(log|z1|, log|z2|).

    ``g`` must be an evaluable rotation-invariant function defined on (a
    neighbourhood of) the boundary; with clamp_mode="boundary" (the Dirichlet
    reading) its values matter only near the boundary, while
    clamp_mode="everywhere" treats the data as a global obstacle.
    """
    if dom.n != 2:
        raise ValueError("the envelope solver is implemented for n = 2")
    if not dom.reinhardt:
        raise ValueError("domain must carry the reinhardt flag")
    if check_data:
        _check_invariant_data(g, dom)
    top1, top2 = _axis_tops(dom)
    x1 = np.linspace(x_floor, top1, shape[0])
    x2 = np.linspace(x_floor, top2, shape[1])
    U, clamp, sweeps, res = _solve_rect(
        dom, g, x1, x2, tol=tol, max_sweeps=max_sweeps, clamp_mode=clamp_mode
    )
    lev = _Level(x1=x1, x2=x2, U=U, clamp_mask=clamp, sweeps=sweeps, residual=res)
    return EnvelopeSolution(dom=dom, g=g, levels=[lev], x_floor=x_floor)


def refine_top_band(sol: EnvelopeSolution, width, shape=(601, 801), tol=1e-12, max_sweeps=4000):
    """Re-solve a band hugging the top x2 edge at finer x2 resolution.

    The band bottom edge is clamped to the parent level (Dirichlet hand-off);
    the data clamp band inside the rectangle is rebuilt at the new resolution.
    Appends the level and returns the solution for chaining.
    """
    parent = sol.levels[-1]
    x2_hi = parent.x2[-1]
    x1 = np.linspace(parent.x1[0], parent.x1[-1], shape[0])
    x2 = np.linspace(x2_hi - width, x2_hi, shape[1])
    init = _bilinear(
        parent.x1, parent.x2, parent.U, *np.meshgrid(x1, x2, indexing="ij")
    )
    bottom = np.zeros((len(x1), len(x2)), dtype=bool)
    bottom[:, 0] = True
    U, clamp, sweeps, res = _solve_rect(
        sol.dom,
        sol.g,
        x1,
        x2,
        init=init,
        extra_clamp=(bottom, init[:, 0]),
        tol=tol,
        max_sweeps=max_sweeps,
    )
    sol.levels.append(
        _Level(x1=x1, x2=x2, U=U, clamp_mask=clamp, sweeps=sweeps, residual=res)
    )
    return sol


def canonical_data(z):
    """Boundary data -2 ||z||^2 as a globally evaluable function."""
    z = np.asarray(z, dtype=complex)
    return -2.0 * np.sum(np.abs(z) ** 2, axis=-1)


def canonical_function(
    dom: DomainSpec,
    solver="envelope",
    refine_widths=(),
    shape=(257, 257),
    oracle_points=11,
    **kw,
):
    """Solve the homogeneous problem with data -2||.||^2 on the boundary."""
    if solver == "envelope":
        sol = reinhardt_envelope_solve(dom, canonical_data, shape=shape, **kw)
        for w in refine_widths:
            refine_top_band(sol, w)
        return sol
    if solver == "oracle":
        return perron_oracle(dom, canonical_data, points_per_axis=oracle_points, **kw)
    raise ValueError(f"unknown solver {solver!r}")


# ---------------------------------------------------------------------------
# brute-force grid oracle
# ---------------------------------------------------------------------------


@dataclass
class PerronSolution:
    """Discrete maximal psh minorant on a real 4-D grid over C^2."""

    dom: DomainSpec
    axes: list
    values: np.ndarray  # shape (m0, m1, m2, m3), axes [Re z1, Re z2, Im z1, Im z2]
    inside: np.ndarray
    sweeps: int
    residual: float

    def interior_points(self):
        grids = np.meshgrid(*self.axes, indexing="ij")
        X = np.stack([g[self.inside] for g in grids], axis=-1)
        return _to_complex(X)

    def evaluate(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        X = _to_real(z)
        lo = np.array([a[0] for a in self.axes])
        h = np.array([a[1] - a[0] for a in self.axes])
        f = (X - lo) / h
        idx = np.clip(np.floor(f).astype(int), 0, [len(a) - 2 for a in self.axes])
        w = np.clip(f - idx, 0.0, 1.0)
        out = np.zeros(len(z))
        for c in range(16):
            bits = [(c >> (3 - ax)) & 1 for ax in range(4)]
            wt = np.ones(len(z))
            for ax in range(4):
                wt = wt * (w[:, ax] if bits[ax] else 1.0 - w[:, ax])
            out += wt * self.values[tuple(idx[:, ax] + bits[ax] for ax in range(4))]
        return out if len(out) > 1 else float(out[0])


_DISC_DIRECTIONS = np.array(
    [
        [1.0, 0.0],
        [0.0, 1.0],
        [2**-0.5, 2**-0.5],
        [2**-0.5, -(2**-0.5)],
        [2**-0.5, 1j * 2**-0.5],
        [2**-0.5, -1j * 2**-0.5],
        [2**-0.5, (0.5 + 0.5j)],
        [2**-0.5, -(0.5 + 0.5j)],
    ],
    dtype=complex,
)


def perron_oracle(
    dom: DomainSpec,
    g,
    points_per_axis=11,
    n_radii=8,
    n_angles=10,
    max_radius_cells=2.0,
    tol=1e-7,
    max_sweeps=400,
    hard_cap_factor=100.0,
) -> PerronSolution:
    """Discrete maximal psh minorant of boundary data g by disc-average sweeps.

    Nodes outside the domain near the boundary are pinned to the (evaluable)
    data; interior nodes iterate u <- min(u, min over sampled complex discs
    of the disc-boundary average), from an upper-bound start.  Desk scale:
    at most 21 points per real axis.
    """
    if dom.n != 2:
        raise ValueError("the grid oracle is implemented for n = 2")
    if points_per_axis > 21:
        raise ValueError("the oracle is a desk-scale instrument: <= 21 points per axis")
    box = dom.sampling_box()
    h_guess = float(np.max((box[:, 1] - box[:, 0]) / (points_per_axis - 1)))
    r_max = max_radius_cells * h_guess
    axes = [
        np.linspace(b[0] - r_max, b[1] + r_max, points_per_axis + 2 * 2)
        for b in box
    ]
    shape = tuple(len(a) for a in axes)
    grids = np.meshgrid(*axes, indexing="ij")
    X = np.stack(grids, axis=-1).reshape(-1, 4)
    Z = _to_complex(X)
    rho = dom.rho(Z)
    # margin keeps lattice points that coincide with the boundary (up to
    # roundoff) on the data-carrying side
    inside = (rho < -1e-10).reshape(shape)
    Gflat = np.asarray(g(Z), dtype=float)
    u = Gflat.copy()
    u[inside.reshape(-1)] = float(np.max(Gflat[~inside.reshape(-1)]))

    dirs = _DISC_DIRECTIONS / np.linalg.norm(_DISC_DIRECTIONS, axis=1, keepdims=True)
    radii = r_max * (np.arange(1, n_radii + 1) / n_radii)
    ang = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    offsets = np.empty((len(dirs) * len(radii), n_angles, 4))
    k = 0
    for v in dirs:
        for r in radii:
            circ = r * np.exp(1j * ang)[:, None] * v[None, :]  # (A, 2) complex
            offsets[k] = np.concatenate([circ.real, circ.imag], axis=1)
            k += 1

    nodes = X[inside.reshape(-1)]
    lo = np.array([a[0] for a in axes])
    h = np.array([a[1] - a[0] for a in axes])
    flat = u.copy()
    scale = max(1.0, float(np.max(np.abs(Gflat))))
    idx_inside = np.flatnonzero(inside.reshape(-1))
    residual = np.inf
    for sweep in range(1, max_sweeps + 1):
        new_vals = perron_sweep(flat, np.array(shape), lo, h, nodes, offsets)
        old_vals = flat[idx_inside]
        upd = np.minimum(old_vals, new_vals)
        residual = float(np.max(np.abs(upd - old_vals)))
        flat[idx_inside] = upd
        if residual < tol * scale:
            break
    else:
        if residual > hard_cap_factor * tol * scale:
            raise ConvergenceError(
                f"oracle sweeps did not converge (residual {residual:.3e})",
                residual=residual,
            )
    return PerronSolution(
        dom=dom,
        axes=axes,
        values=flat.reshape(shape),
        inside=inside,
        sweeps=sweep,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# Holder diagnostics
# ---------------------------------------------------------------------------


@dataclass
class HolderFit:
    xi: np.ndarray
    scales: np.ndarray
    alpha_hat: np.ndarray
    alpha_local: np.ndarray
    sup_diffs: np.ndarray
    quotients: dict

    def to_json_dict(self):
        return {
            "xi": [repr(complex(c)) for c in np.asarray(self.xi)],
            "scales": [float(s) for s in self.scales],
            "alpha_hat": [float(a) for a in self.alpha_hat],
            "alpha_local": [float(a) for a in self.alpha_local],
            "sup_diffs": [float(s) for s in self.sup_diffs],
            "quotients": {
                f"{a:g}": [float(q) for q in qs] for a, qs in self.quotients.items()
            },
        }


def _sup_diff_on_ball(sol, dom, xi, r, u_xi, nsamples, rng):
    """sup over the closed ball (intersected with the closure) of |u - u(xi)|."""
    n = dom.n
    pts = [xi[None, :]]
    # axis probes at a few fractions of r, inward and outward along each axis
    fracs = np.array([0.25, 0.5, 0.75, 1.0])
    for j in range(2 * n):
        e = np.zeros(2 * n)
        e[j] = 1.0
        for sgn in (1.0, -1.0):
            pts.append(xi[None, :] + sgn * fracs[:, None] * r * _to_complex(e)[None, :])
    x = rng.standard_normal((nsamples, 2 * n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    rad = r * rng.uniform(0, 1, size=(nsamples, 1)) ** (1.0 / (2 * n))
    pts.append(xi[None, :] + _to_complex(rad * x))
    P = np.concatenate(pts)
    keep = dom.rho(P) <= 1e-12
    P = P[keep]
    vals = sol.evaluate(P)
    return float(np.max(np.abs(vals - u_xi)))


def holder_fit(sol, xi, scales, alphas=(), nsamples=2000, seed=0) -> HolderFit:
    """Local Holder exponent estimates at a boundary point.

    With M(r) = sup_{||z-xi||<=r} |u - u(xi)|, the primary estimate is the
    apparent exponent at scale r, i.e. the slope of log M over the window
    [r, 1]:  alpha_hat(r) = log M(r) / log r.  For u = ||z-xi||^a this equals
    a at every scale, and it decays to 0 for any modulus flatter than every
    power.  alpha_local(r), the slope between adjacent dyadic scales r and
    2r, is returned as a secondary diagnostic; raw quotients M(r) / r^alpha
    are tabulated for each requested alpha.
    """
    dom = sol.dom
    xi = np.asarray(xi, dtype=complex)
    scales = np.asarray(sorted(scales, reverse=True), dtype=float)
    if np.any(scales >= 1.0):
        raise ValueError("scales must be below the unit anchor scale")
    rng = np.random.default_rng(seed)
    u_xi = float(np.asarray(sol.evaluate(xi[None, :])).ravel()[0])
    sup_r = np.empty(len(scales))
    sup_2r = np.empty(len(scales))
    for i, r in enumerate(scales):
        sup_r[i] = _sup_diff_on_ball(sol, dom, xi, r, u_xi, nsamples, rng)
        sup_2r[i] = _sup_diff_on_ball(sol, dom, xi, 2 * r, u_xi, nsamples, rng)
        if sup_r[i] <= 0:
            raise ValueError(
                f"no variation resolved at scale {r:g}; grid resolution insufficient"
            )
    alpha_hat = np.log(sup_r) / np.log(scales)
    alpha_local = (np.log(sup_2r) - np.log(sup_r)) / math.log(2.0)
    quotients = {float(a): sup_r / scales**a for a in alphas}
    fit = HolderFit(
        xi=xi,
        scales=scales,
        alpha_hat=alpha_hat,
        alpha_local=alpha_local,
        sup_diffs=sup_r,
        quotients=quotients,
    )
    if hasattr(sol, "holder_fits"):
        sol.holder_fits.append(fit)
    return fit


def estimate_modulus(sol, radii, nsamples=3000, seed=0):
    """Tabulated modulus-of-continuity estimate of an envelope solution.

    For rotation-invariant u the sup over pairs at distance <= r is attained
    at phase-aligned pairs, so sampling runs over the moduli quarter-plane.
    """
    from .kobayashi import ModulusOfContinuity

    dom = sol.dom
    rng = np.random.default_rng(seed)
    base = sol.levels[0]
    m1 = np.exp(rng.uniform(sol.x_floor, base.x1[-1], size=nsamples))
    m2 = np.exp(rng.uniform(sol.x_floor, base.x2[-1], size=nsamples))
    z = np.stack([m1, m2], axis=-1).astype(complex)
    z = z[dom.rho(z) <= 0]
    vals = sol.evaluate(z)
    radii = np.asarray(sorted(radii), dtype=float)
    out = np.zeros(len(radii))
    for i, r in enumerate(radii):
        ang = rng.uniform(0, 2 * np.pi, size=len(z))
        step = r * rng.uniform(0, 1, size=len(z))
        w = z.copy()
        w[:, 0] += step * np.cos(ang)
        w[:, 1] += step * np.sin(ang)
        w[:, 0] = np.clip(w[:, 0].real, 0, None)
        w[:, 1] = np.clip(w[:, 1].real, 0, None)
        keep = dom.rho(w) <= 0
        if not np.any(keep):
            continue
        out[i] = float(np.max(np.abs(vals[keep] - sol.evaluate(w[keep]))))
    out = np.maximum.accumulate(out)  # enforce monotonicity of the estimate
    sol.modulus_radii, sol.modulus_values = radii, out
    return ModulusOfContinuity(kind="tabulated", r_table=radii, w_table=out)

"""Explicit bounded domains in C^n and the two Euclidean measurements on them.

A domain is described by an evaluable defining function rho (negative inside,
zero on the boundary, positive outside).  On top of that this module computes

* ``boundary_distance``  -- the Euclidean distance delta(z) to the boundary,
  obtained as the minimum over directions of the first-exit radius along rays
  (for any open set the nearest boundary point lies on the ray towards it, so
  min-over-directions of the first exit equals the distance exactly);
* ``disc_radius``        -- the radius r(z; v) of the largest flat analytic
  disc z + r*D*v contained in the domain, computed as the minimum over a
  phase grid of per-ray first-exit radii, refined by golden-section search.

All defining functions are vectorised: they accept complex arrays of shape
(..., n) and return real arrays of shape (...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BracketError, EmptyIntersectionError, NotInteriorError, UnknownNameError

__all__ = [
    "DomainSpec",
    "DirectionProbe",
    "make_builtin",
    "from_config",
    "boundary_distance",
    "boundary_distance_batch",
    "disc_radius",
    "first_exit",
    "omega_phi_profile",
    "omega_phi_profile_inv",
    "h_profile",
    "rho_example_D",
    "rho_example_Omega_piece",
    "sample_interior",
    "sample_boundary",
    "probe_table_csv",
]

_BOUNDARY_EPS = 1e-14  # |rho(z)| below this counts as "on the boundary"


# ---------------------------------------------------------------------------
# domain description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """A bounded domain {rho < 0} in C^n with geometric flags.

    ``bounding_radius`` R promises rho(z) > 0 whenever ||z|| > R.  ``pieces``
    optionally lists the defining functions whose pointwise max equals rho
    (intersection domains).  ``grad`` is an optional analytic gradient in the
    Wirtinger sense, 2 * d rho / d conj(z); when absent a central difference
    is used.  ``exact_distance``, when present, is a closed-form boundary
    distance used as a fast path (the generic minimiser remains available
    through boundary_distance(..., force_generic=True)).
    """

    n: int
    rho: Callable[[np.ndarray], np.ndarray]
    witness: np.ndarray
    bounding_radius: float
    convex: bool = False
    reinhardt: bool = False
    name: str = ""
    params: dict = field(default_factory=dict)
    pieces: tuple = ()
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    exact_distance: Optional[Callable[[np.ndarray], float]] = None
    box: Optional[np.ndarray] = None  # (2n, 2) real sampling bounds; default [-R, R]

    def sampling_box(self) -> np.ndarray:
        if self.box is not None:
            return np.asarray(self.box, dtype=float)
        R = self.bounding_radius
        return np.tile([-R, R], (2 * self.n, 1))

    def contains(self, z) -> np.ndarray:
        return self.rho(np.asarray(z, dtype=complex)) < 0.0

    def gradient(self, z, h=1e-6):
        """Complex normal direction 2 * d rho / d conj(z) at z (vectorised)."""
        z = np.asarray(z, dtype=complex)
        if self.grad is not None:
            return self.grad(z)
        g = np.empty(z.shape, dtype=complex)
        for j in range(self.n):
            e = np.zeros(self.n, dtype=complex)
            e[j] = h
            dx = (self.rho(z + e) - self.rho(z - e)) / (2 * h)
            dy = (self.rho(z + 1j * e) - self.rho(z - 1j * e)) / (2 * h)
            g[..., j] = dx + 1j * dy
        return g

    def validate(self, rng_seed=0, samples=200, tol_reinhardt=1e-10):
        """Check the structural invariants by sampling; raises on violation."""
        rng = np.random.default_rng(rng_seed)
        if not np.all(self.rho(self.witness) < 0):
            raise ValueError(f"witness of {self.name!r} is not interior")
        sphere = rng.standard_normal((samples, 2 * self.n))
        sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
        far = 2.0 * self.bounding_radius * _to_complex(sphere)
        if not np.all(self.rho(far) > 0):
            raise ValueError(f"{self.name!r}: rho not positive on the 2R sphere")
        inside = sample_interior(self, samples, rng)
        if self.convex:
            t = rng.uniform(size=(samples // 2, 1))
            a, b = inside[: samples // 2], inside[samples // 2 : 2 * (samples // 2)]
            mix = t * a + (1 - t) * b
            if not np.all(self.rho(mix) < 0):
                raise ValueError(f"{self.name!r}: convexity flag fails on sampled chords")
        if self.reinhardt:
            theta = rng.uniform(0, 2 * np.pi, size=inside.shape)
            rotated = inside * np.exp(1j * theta)
            if not np.all(np.abs(self.rho(rotated) - self.rho(inside)) < tol_reinhardt):
                raise ValueError(f"{self.name!r}: rotation invariance fails")
        return True

    def to_config(self) -> str:
        """Plain key-value record for the builtin that produced this domain.

        Scalar parameters are written verbatim; structured ones (the
        ellipsoid list of intersection domains) as JSON values.
        """
        import json

        lines = [f"domain = {self.name}"]
        for k, v in sorted(self.params.items()):
            if isinstance(v, (int, float, str)):
                lines.append(f"{k} = {v}")
            else:
                lines.append(f"{k} = {json.dumps(v)}")
        return "\n".join(lines) + "\n"


@dataclass
class DirectionProbe:
    """Result of a flat-disc radius computation at (z, v).

    ``exit_radii`` tabulates (theta, t_theta) pairs, including the refined
    phases found by the golden-section polish, so the reported radius is
    always the minimum of the tabulated ones.
    """

    z: np.ndarray
    v: np.ndarray
    delta: float
    disc_radius: float
    exit_radii: np.ndarray  # shape (k, 2): columns theta, t_theta


def _to_complex(x):
    x = np.asarray(x, dtype=float)
    half = x.shape[-1] // 2
    return x[..., :half] + 1j * x[..., half:]


def _to_real(z):
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


# ---------------------------------------------------------------------------
# built-in domains
# ---------------------------------------------------------------------------


def omega_phi_profile(x, variant="example23"):
    """The strictly increasing convex profile used by the omega_phi builtin.

    variant "example23": 0 at 0, e^2*exp(-1/x)/3 on (0, 1/2), (4x-1)/3 beyond;
    it is C^2, flat to infinite order at 0, and equals 1 at x = 1.
    variant "quartic": x^2 (so the domain is |z1|^4 + sum |z_j|^2 < 1).
    """
    x = np.asarray(x, dtype=float)
    if variant == "quartic":
        return x * x
    if variant != "example23":
        raise UnknownNameError(f"unknown omega_phi variant {variant!r}")
    out = np.zeros_like(x)
    mid = (x > 0) & (x < 0.5)
    hi = x >= 0.5
    with np.errstate(divide="ignore"):
        out[mid] = np.exp(2.0 - 1.0 / x[mid]) / 3.0
    out[hi] = (4.0 * x[hi] - 1.0) / 3.0
    return out


def omega_phi_profile_inv(t, variant="example23", tol=1e-14):
    """Inverse of the profile by monotone bisection (profile is increasing)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(t < 0):
        raise ValueError("profile inverse requires nonnegative input")
    lo = np.zeros_like(t)
    hi = np.maximum(1.0, (3.0 * t + 1.0) / 4.0 + 1.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = omega_phi_profile(mid, variant) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) < tol:
            break
    out = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


def h_profile(z2):
    """2u^2 - beta(v) + v^4 for z2 = u + iv, with beta(v) = sign(v) v^2.

    Subharmonic on C; the second coordinate of the example domains runs
    through it.
    """
    z2 = np.asarray(z2, dtype=complex)
    u = z2.real
    v = z2.imag
    return 2.0 * u * u - np.sign(v) * v * v + v**4


_h_profile = h_profile


def rho_example_D(z):
    """|z1|^2 + h(z2); defines the source domain of the example map."""
    z = np.asarray(z, dtype=complex)
    return np.abs(z[..., 0]) ** 2 + h_profile(z[..., 1])


def rho_example_Omega_piece(z):
    """|w1^2 - 1|^2 + h(w2) + |w3|^2; plurisubharmonic on all of C^3.

    Its zero set has two components; the builtin target domain is the one
    with Re(w1) > 0.
    """
    z = np.asarray(z, dtype=complex)
    return (
        np.abs(z[..., 0] ** 2 - 1.0) ** 2
        + h_profile(z[..., 1])
        + np.abs(z[..., 2]) ** 2
    )


def make_builtin(name, **params) -> DomainSpec:
    """Construct one of the built-in domains.

    Known names: ball (n, r), polydisc (n), omega_phi (n, variant),
    example_D, example_Omega, strongly_convex_intersection (ellipsoids).
    """
    if name == "ball":
        n = int(params.get("n", 2))
        r = float(params.get("r", 1.0))
        if n < 1 or r <= 0:
            raise ValueError("ball requires n >= 1 and r > 0")

        def rho(z, _r=r):
            z = np.asarray(z, dtype=complex)
            return np.sum(np.abs(z) ** 2, axis=-1) - _r * _r

        def grad(z, _=None):
            return 2.0 * np.asarray(z, dtype=complex)

        def exact(z, _r=r):
            return _r - float(np.linalg.norm(z))

        return DomainSpec(
            n=n,
            rho=rho,
            witness=np.zeros(n, dtype=complex),
            bounding_radius=r,
            convex=True,
            reinhardt=True,
            name="ball",
            params={"n": n, "r": r},
            grad=grad,
            exact_distance=exact,
            box=np.tile([-r, r], (2 * n, 1)),
        )

    if name == "polydisc":
        n = int(params.get("n", 2))
        if n < 1:
            raise ValueError("polydisc requires n >= 1")

        def rho(z):
            z = np.asarray(z, dtype=complex)
            return np.max(np.abs(z) ** 2, axis=-1) - 1.0

        def exact(z):
            return float(np.min(1.0 - np.abs(np.asarray(z, dtype=complex))))

        return DomainSpec(
            n=n,
            rho=rho,
            witness=np.zeros(n, dtype=complex),
            bounding_radius=1.0,
            convex=True,
            reinhardt=True,
            name="polydisc",
            params={"n": n},
            exact_distance=exact,
            box=np.tile([-1.0, 1.0], (2 * n, 1)),
        )

    if name == "omega_phi":
        n = int(params.get("n", 2))
        variant = params.get("variant", "example23")
        if n < 2:
            raise ValueError("omega_phi requires n >= 2")
        omega_phi_profile(np.array([0.1]), variant)  # validates the variant name

        def rho(z, _v=variant):
            z = np.asarray(z, dtype=complex)
            head = omega_phi_profile(np.abs(z[..., 0]) ** 2, _v)
            tail = np.sum(np.abs(z[..., 1:]) ** 2, axis=-1)
            return head + tail - 1.0

        return DomainSpec(
            n=n,
            rho=rho,
            witness=np.zeros(n, dtype=complex),
            bounding_radius=2.0,
            convex=True,
            reinhardt=True,
            name="omega_phi",
            params={"n": n, "variant": variant},
            box=np.tile([-1.0, 1.0], (2 * n, 1)),
        )

    if name == "example_D":
        rho = rho_example_D
        return DomainSpec(
            n=2,
            rho=rho,
            witness=np.array([0.0, 0.5j]),
            bounding_radius=1.5,
            name="example_D",
            params={},
            box=np.array([[-0.55, 0.55], [-0.45, 0.45], [-0.55, 0.55], [-0.05, 1.05]]),
        )

    if name == "example_Omega":
        # the zero set of the piece function is symmetric under w1 -> -w1;
        # the max with -Re(w1) picks out the component on the Re(w1) > 0
        # side, which is the actual domain
        def rho(z):
            z = np.asarray(z, dtype=complex)
            return np.maximum(rho_example_Omega_piece(z), -z[..., 0].real)

        return DomainSpec(
            n=3,
            rho=rho,
            witness=np.array([1.0, 0.5j, 0.0]),
            bounding_radius=2.0,
            name="example_Omega",
            params={},
            box=np.array(
                [
                    [0.55, 1.35],
                    [-0.45, 0.45],
                    [-0.55, 0.55],
                    [-0.45, 0.45],
                    [-0.05, 1.05],
                    [-0.55, 0.55],
                ]
            ),
        )

    if name == "strongly_convex_intersection":
        ellipsoids = params.get("ellipsoids")
        if not ellipsoids:
            raise ValueError("strongly_convex_intersection requires a nonempty ellipsoid list")
        pieces = []
        n = None
        for center, radii in ellipsoids:
            center = np.asarray(center, dtype=complex)
            radii = np.asarray(radii, dtype=float)
            if n is None:
                n = center.shape[0]

            def piece(z, _c=center, _r=radii):
                z = np.asarray(z, dtype=complex)
                return np.sum(np.abs((z - _c) / _r) ** 2, axis=-1) - 1.0

            pieces.append(piece)

        def rho(z, _pieces=tuple(pieces)):
            vals = [p(z) for p in _pieces]
            return np.max(np.stack(vals, axis=0), axis=0)

        witness = _find_witness(rho, ellipsoids, n)
        radius = max(
            float(np.linalg.norm(c)) + float(np.max(r)) for c, r in ellipsoids
        )
        return DomainSpec(
            n=n,
            rho=rho,
            witness=witness,
            bounding_radius=radius,
            convex=True,
            name="strongly_convex_intersection",
            params={"ellipsoids": ellipsoids},
            pieces=tuple(pieces),
        )

    raise UnknownNameError(f"unknown builtin domain {name!r}")


def _find_witness(rho, ellipsoids, n, samples=4096, seed=0):
    centers = np.stack([np.asarray(c, dtype=complex) for c, _ in ellipsoids])
    cands = [centers.mean(axis=0)] + list(centers)
    rng = np.random.default_rng(seed)
    spread = max(float(np.max(np.asarray(r, float))) for _, r in ellipsoids)
    cloud = centers.mean(axis=0) + spread * _to_complex(
        rng.uniform(-1, 1, size=(samples, 2 * n))
    )
    cands = np.concatenate([np.stack(cands), cloud])
    vals = rho(cands)
    k = int(np.argmin(vals))
    if vals[k] >= 0:
        raise EmptyIntersectionError("no interior point found; intersection appears empty")
    return cands[k]


def from_config(text: str) -> DomainSpec:
    """Rebuild a builtin domain from a plain key-value record."""
    import json

    params = {}
    name = None
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key == "domain":
            name = val
        else:
            try:
                params[key] = int(val)
            except ValueError:
                try:
                    params[key] = float(val)
                except ValueError:
                    try:
                        params[key] = json.loads(val)
                    except json.JSONDecodeError:
                        params[key] = val
    if name is None:
        raise ValueError("config record lacks a 'domain' entry")
    return make_builtin(name, **params)


# ---------------------------------------------------------------------------
# first-exit machinery
# ---------------------------------------------------------------------------


def first_exit(dom: DomainSpec, z, dirs, coarse=512, tol=1e-12, t_max=None, missing="raise"):
    """First-exit radii t(u) = inf{t > 0 : z + t*u outside} for unit rays u.

    Marches a coarse grid to bracket the first sign change of rho, then
    bisects inside the bracketing cell.  dirs has shape (k, n).  Rays that do
    not exit before ``t_max`` raise a BracketError, or are reported as inf
    with missing="inf" (used by the direction searches, which cap t_max below
    the global exit bound).
    """
    z = np.asarray(z, dtype=complex)
    dirs = np.atleast_2d(np.asarray(dirs, dtype=complex))
    if t_max is None:
        t_max = float(np.linalg.norm(z)) + 2.0 * dom.bounding_radius + 1.0
    ts = np.linspace(0.0, t_max, coarse)
    pts = z[None, None, :] + ts[None, :, None] * dirs[:, None, :]
    vals = dom.rho(pts)  # (k, coarse)
    outside = vals >= 0.0
    outside[:, 0] = False
    found = outside.any(axis=1)
    if not np.all(found):
        if missing == "raise":
            raise BracketError(
                "ray never leaves the domain within the bounding radius; "
                "bounding_radius invariant violated"
            )
    idx = np.argmax(outside, axis=1)
    idx[~found] = 1
    lo = ts[idx - 1]
    hi = ts[idx]
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        inside = dom.rho(z[None, :] + mid[:, None] * dirs) < 0.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.max(hi - lo) < tol:
            break
    out = 0.5 * (lo + hi)
    out[~found] = np.inf
    return out


def _require_interior(dom, z):
    val = float(dom.rho(np.asarray(z, dtype=complex)))
    if abs(val) < _BOUNDARY_EPS:
        raise NotInteriorError(f"point lies on the boundary (rho = {val:.3e})")
    if val >= 0:
        raise NotInteriorError(f"point is not interior (rho = {val:.3e})")


def _unit_directions(n, count, rng):
    x = rng.standard_normal((count, 2 * n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    axes = np.concatenate([np.eye(2 * n), -np.eye(2 * n)])
    return _to_complex(np.concatenate([axes, x]))


def _cap_search(dom, z, seeds, seed_t, rounds, per_round, rng, coarse=256):
    """Batched local minimisation of the first-exit radius over directions.

    Each seed direction explores a shrinking angular cap; all candidates of a
    round are evaluated in a single vectorised first-exit call.
    """
    k = len(seeds)
    U = _to_real(np.asarray(seeds))
    best_t = np.asarray(seed_t, dtype=float).copy()
    cap = 0.5
    for _ in range(rounds):
        w = rng.standard_normal((k, per_round, 2 * dom.n))
        w /= np.linalg.norm(w, axis=2, keepdims=True)
        cand = U[:, None, :] + cap * w
        cand /= np.linalg.norm(cand, axis=2, keepdims=True)
        t_cap = 1.02 * float(np.max(best_t)) + 1e-9
        t = first_exit(
            dom,
            z,
            _to_complex(cand.reshape(-1, 2 * dom.n)),
            coarse=coarse,
            tol=1e-13,
            t_max=t_cap,
            missing="inf",
        ).reshape(k, per_round)
        t_min = t.min(axis=1)
        arg = t.argmin(axis=1)
        better = t_min < best_t
        best_t = np.where(better, t_min, best_t)
        U[better] = cand[better, arg[better]]
        cap *= 0.5
    return best_t, _to_complex(U)


def boundary_distance(
    dom: DomainSpec,
    z,
    tol=1e-8,
    multistarts=16,
    coarse_dirs=2048,
    force_generic=False,
    return_point=False,
    seed=0,
):
    """Distance from an interior point to the boundary.

    Minimises the first-exit radius over ray directions: a coarse pass over a
    deterministic direction cloud seeds ``multistarts`` shrinking-cap local
    searches, run batched.
    """
    z = np.asarray(z, dtype=complex)
    _require_interior(dom, z)
    if dom.exact_distance is not None and not force_generic and not return_point:
        return float(dom.exact_distance(z))
    rng = np.random.default_rng(seed)
    dirs = _unit_directions(dom.n, coarse_dirs, rng)
    t = first_exit(dom, z, dirs, coarse=512, tol=1e-12)
    order = np.argsort(t)

    # drop near-duplicate directions so the local searches explore distinct basins
    seeds, seed_t = [], []
    for k in order:
        u = dirs[k]
        if all(np.linalg.norm(u - s) > 0.15 for s in seeds):
            seeds.append(u)
            seed_t.append(t[k])
        if len(seeds) >= multistarts:
            break
    rounds = max(18, int(np.ceil(np.log2(0.5 / max(tol, 1e-12)) / 2)) + 10)
    best_t, best_u = _cap_search(dom, z, seeds, seed_t, rounds, 48, rng)
    k = int(np.argmin(best_t))
    if return_point:
        return float(best_t[k]), z + best_t[k] * best_u[k]
    return float(best_t[k])


def boundary_distance_batch(dom: DomainSpec, Z, dirs=384, seed=0, need_points=True):
    """Boundary distances (and nearest points) for many points at once.

    Shares one direction cloud across points and polishes each point's best
    few directions with a short batched cap search.  Accuracy is a few 1e-6
    relative, which is ample for the exponent fits.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if dom.exact_distance is not None and not need_points:
        return np.array([dom.exact_distance(z) for z in Z]), None
    rng = np.random.default_rng(seed)
    base = _unit_directions(dom.n, dirs, rng)
    out_d = np.empty(len(Z))
    out_p = np.empty_like(Z)
    for i, z in enumerate(Z):
        t = first_exit(dom, z, base, coarse=128, tol=1e-12)
        order = np.argsort(t)[:3]
        bt, bu = _cap_search(dom, z, base[order], t[order], 10, 16, rng, coarse=128)
        k = int(np.argmin(bt))
        out_d[i] = bt[k]
        out_p[i] = z + bt[k] * bu[k]
    if dom.exact_distance is not None:
        out_d = np.array([dom.exact_distance(z) for z in Z])
    return out_d, out_p


def disc_radius(dom: DomainSpec, z, v, n_theta=256, tol=1e-10, compute_delta=True) -> DirectionProbe:
    """Radius of the largest flat disc through z in direction v inside the domain.

    A point of the closed disc of radius r lies inside iff every ray
    z + t*exp(i theta)*v with t <= r does, so the radius is the minimum over
    phases of the per-ray first exit.  The phase grid minimum is polished by
    golden-section search and the polished samples are appended to the table.
    """
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    nv = float(np.linalg.norm(v))
    if abs(nv - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector (got norm {nv})")
    _require_interior(dom, z)
    thetas = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    rays = np.exp(1j * thetas)[:, None] * v[None, :]
    t = first_exit(dom, z, rays, coarse=512, tol=tol * 1e-2)
    k = int(np.argmin(t))

    def t_of(theta):
        u = np.exp(1j * theta) * v
        return float(first_exit(dom, z, u[None, :], coarse=512, tol=tol * 1e-2)[0])

    # golden-section polish inside the bracketing grid cell
    gold = (math.sqrt(5.0) - 1.0) / 2.0
    a = thetas[k] - 2 * np.pi / n_theta
    b = thetas[k] + 2 * np.pi / n_theta
    c = b - gold * (b - a)
    d = a + gold * (b - a)
    fc, fd = t_of(c), t_of(d)
    extra = [(c, fc), (d, fd)]
    for _ in range(60):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gold * (b - a)
            fc = t_of(c)
            extra.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + gold * (b - a)
            fd = t_of(d)
            extra.append((d, fd))
        if b - a < 1e-10:
            break
    table = np.concatenate(
        [np.column_stack([thetas, t]), np.asarray(extra, dtype=float)]
    )
    r = float(np.min(table[:, 1]))
    delta = boundary_distance(dom, z, tol=min(tol, 1e-8)) if compute_delta else np.nan
    return DirectionProbe(z=z, v=v, delta=delta, disc_radius=r, exit_radii=table)


# ---------------------------------------------------------------------------
# sampling helpers shared across modules
# ---------------------------------------------------------------------------


def sample_interior(dom: DomainSpec, count, rng, max_tries=300):
    """Quasi-uniform interior points via rejection inside the sampling box."""
    from scipy.stats import qmc

    seed = int(rng.integers(0, 2**31 - 1)) if hasattr(rng, "integers") else int(rng)
    halton = qmc.Halton(d=2 * dom.n, seed=seed)
    box = dom.sampling_box()
    lo, hi = box[:, 0], box[:, 1]
    got = []
    for _ in range(max_tries):
        x = halton.random(max(4 * count, 256))
        z = _to_complex(lo + (hi - lo) * x)
        keep = dom.rho(z) < 0
        got.append(z[keep])
        if sum(len(g) for g in got) >= count:
            break
    pts = np.concatenate(got)
    if len(pts) < count:
        raise RuntimeError(f"could not sample {count} interior points of {dom.name!r}")
    return pts[:count]


def sample_boundary(dom: DomainSpec, count, rng, origin=None):
    """Boundary points from ray bisection out of an interior origin."""
    origin = dom.witness if origin is None else np.asarray(origin, dtype=complex)
    dirs = _unit_directions(dom.n, count, rng)[: count]
    t = first_exit(dom, origin, dirs, coarse=512, tol=1e-13)
    return origin[None, :] + t[:, None] * dirs


def probe_table_csv(probe: DirectionProbe) -> str:
    """CSV text (theta, t_theta) for a direction probe."""
    lines = ["theta,t_theta"]
    order = np.argsort(probe.exit_radii[:, 0])
    for th, tt in probe.exit_radii[order]:
        lines.append(f"{th!r},{tt!r}")
    return "\n".join(lines) + "\n"

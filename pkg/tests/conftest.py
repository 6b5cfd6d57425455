import numpy as np
import pytest

from plurilab.domains import make_builtin


@pytest.fixture(scope="session")
def ball2():
    return make_builtin("ball", n=2)


@pytest.fixture(scope="session")
def ball1():
    return make_builtin("ball", n=1)


@pytest.fixture(scope="session")
def polydisc2():
    return make_builtin("polydisc", n=2)


@pytest.fixture(scope="session")
def omega_phi2():
    return make_builtin("omega_phi", n=2)


@pytest.fixture(scope="session")
def example_D():
    return make_builtin("example_D")


@pytest.fixture(scope="session")
def example_Omega():
    return make_builtin("example_Omega")


@pytest.fixture(scope="session")
def lens2():
    return make_builtin(
        "strongly_convex_intersection",
        ellipsoids=[((0, 0), (1, 1)), ((0.5, 0), (1, 1))],
    )


def dense_direction_scan(dom, z, rounds=3, base=4096, seed=12345):
    """Test oracle for the boundary distance: pure dense direction sampling.

    Minimises the first-exit radius over a fixed quasi-uniform direction set,
    then re-samples uniformly inside a shrinking angular box around the best
    direction.  No optimiser is involved.
    """
    from plurilab.domains import first_exit

    z = np.asarray(z, dtype=complex)
    rng = np.random.default_rng(seed)
    d = 2 * dom.n
    x = rng.standard_normal((base, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    t = first_exit(dom, z, x[:, : dom.n] + 1j * x[:, dom.n :], coarse=1024, tol=1e-13)
    k = int(np.argmin(t))
    best_x, best_t = x[k], float(t[k])
    width = 0.25
    for _ in range(rounds):
        pert = rng.uniform(-width, width, size=(base // 2, d))
        cand = best_x[None, :] + pert
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        t = first_exit(
            dom, z, cand[:, : dom.n] + 1j * cand[:, dom.n :], coarse=1024, tol=1e-13
        )
        k = int(np.argmin(t))
        if t[k] < best_t:
            best_t, best_x = float(t[k]), cand[k]
        width *= 0.07
    return best_t


def ball_slice_disc_radius(center, R, z, v):
    """Closed-form flat-disc radius for a ball: the slice z + C*v meets the
    ball in a planar disc of radius sqrt(R^2 - ||w_perp||^2) centred at
    -<w, v> in the slice coordinate, where w = z - center."""
    w = np.asarray(z, dtype=complex) - np.asarray(center, dtype=complex)
    v = np.asarray(v, dtype=complex)
    c0 = np.sum(w * np.conj(v))
    w_perp = w - c0 * v
    return float(np.sqrt(R * R - np.linalg.norm(w_perp) ** 2) - abs(c0))

"""Backend selection for the hot grid kernels.

The two inner loops that dominate runtime are (a) the batched 1-D lower
convex envelope sweeps used by the log-coordinate envelope solver and (b)
the disc-average minimisation sweeps of the brute-force maximal-psh-minorant
grid solver.  Both are compiled with numba when it is available.

Set the environment variable ``PLURILAB_BACKEND`` to ``numpy`` to force the
pure-numpy reference implementations (e.g. on machines without a working
numba toolchain), or to ``numba`` to fail loudly if numba cannot be
imported.  The default (``auto``) uses numba when importable.

Both backends implement identical algorithms; ``benchmarks/bench_kernels.py``
times one against the other.
"""

import os

import numpy as np

_REQUESTED = os.environ.get("PLURILAB_BACKEND", "auto").lower()

if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(f"PLURILAB_BACKEND must be auto|numba|numpy, got {_REQUESTED!r}")

HAS_NUMBA = False
if _REQUESTED in ("auto", "numba"):
    try:
        import numba
        from numba import njit, prange

        HAS_NUMBA = True
    except ImportError:
        if _REQUESTED == "numba":
            raise
        HAS_NUMBA = False

USING_NUMBA = HAS_NUMBA and _REQUESTED != "numpy"


def backend_name():
    return "numba" if USING_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# 1-D lower convex envelope along index-parameterised grid lines.
#
# Lines are uniform in the line parameter (rows, columns and the two index
# diagonals of a grid with per-axis-uniform spacing are straight lines in
# coordinate space), so the parameter can be taken to be the index itself.
# ---------------------------------------------------------------------------


def _hull_line_py(y, out, stack):
    """Lower convex envelope of (k, y[k]) sampled back onto the same k."""
    m = y.shape[0]
    top = 0
    for k in range(m):
        yk = y[k]
        # pop while the new point makes the last hull segment non-convex
        while top >= 2:
            i = stack[top - 2]
            j = stack[top - 1]
            # cross product of (j-i, y[j]-y[i]) x (k-i, yk-y[i])
            if (j - i) * (yk - y[i]) - (k - i) * (y[j] - y[i]) <= 0.0:
                top -= 1
            else:
                break
        stack[top] = k
        top += 1
    # interpolate hull back onto every index
    seg = 0
    for k in range(m):
        while seg + 1 < top and stack[seg + 1] <= k:
            seg += 1
        i = stack[seg]
        if seg + 1 < top:
            j = stack[seg + 1]
            t = (k - i) / (j - i)
            out[k] = (1.0 - t) * y[i] + t * y[j]
        else:
            out[k] = y[i]


def _envelope_pass_py(U, code):
    """One convexification pass over all lines of one direction family.

    code: 0 rows (vary axis 0), 1 columns (vary axis 1), 2 diagonal i+j const
    direction (i+1, j+1), 3 anti-diagonal direction (i+1, j-1).
    Writes the line envelopes back into U (the envelope is pointwise <= U).
    """
    n1, n2 = U.shape
    if code == 0:
        buf = np.empty(n1)
        stack = np.empty(n1, dtype=np.int64)
        for j in range(n2):
            _hull_line_py(U[:, j], buf, stack)
            U[:, j] = buf[: n1]
    elif code == 1:
        buf = np.empty(n2)
        stack = np.empty(n2, dtype=np.int64)
        for i in range(n1):
            _hull_line_py(U[i, :], buf, stack)
            U[i, :] = buf[: n2]
    elif code == 2:
        m = max(n1, n2)
        buf = np.empty(m)
        y = np.empty(m)
        stack = np.empty(m, dtype=np.int64)
        for s in range(-(n2 - 1), n1):  # diagonals i - j = s
            i0 = max(s, 0)
            j0 = i0 - s
            ln = min(n1 - i0, n2 - j0)
            if ln < 3:
                continue
            for k in range(ln):
                y[k] = U[i0 + k, j0 + k]
            _hull_line_py(y[:ln], buf, stack)
            for k in range(ln):
                U[i0 + k, j0 + k] = buf[k]
    else:
        m = max(n1, n2)
        buf = np.empty(m)
        y = np.empty(m)
        stack = np.empty(m, dtype=np.int64)
        for s in range(0, n1 + n2 - 1):  # anti-diagonals i + j = s
            i0 = max(0, s - (n2 - 1))
            j0 = s - i0
            ln = min(n1 - i0, j0 + 1)
            if ln < 3:
                continue
            for k in range(ln):
                y[k] = U[i0 + k, j0 - k]
            _hull_line_py(y[:ln], buf, stack)
            for k in range(ln):
                U[i0 + k, j0 - k] = buf[k]


# ---------------------------------------------------------------------------
# Disc-average Bellman sweep on a flattened 4-D grid (n = 2 complex dims).
# ---------------------------------------------------------------------------


def _perron_sweep_py(u, shape, lo, h, nodes, offsets):
    """One Jacobi sweep of u(node) <- min(u, min over discs of circle mean).

    u        flat grid values, length prod(shape)
    shape    (m0, m1, m2, m3) grid points per real axis
    lo, h    per-axis origin and spacing
    nodes    (K, 4) float coordinates of the interior nodes
    offsets  (D, A, 4) circle-point offsets per disc
    Returns the new values at the interior nodes (length K).
    """
    m0, m1, m2, m3 = shape
    U4 = u.reshape(shape)
    D = offsets.shape[0]
    K = nodes.shape[0]
    best = np.full(K, np.inf)
    for d in range(D):
        pts = nodes[:, None, :] + offsets[d][None, :, :]  # (K, A, 4)
        f = (pts - lo[None, None, :]) / h[None, None, :]
        i0 = np.floor(f).astype(np.int64)
        for ax, m in enumerate((m0, m1, m2, m3)):
            np.clip(i0[..., ax], 0, m - 2, out=i0[..., ax])
        w = f - i0
        np.clip(w, 0.0, 1.0, out=w)
        acc = np.zeros(pts.shape[:2])
        for c in range(16):
            b0, b1, b2, b3 = (c >> 3) & 1, (c >> 2) & 1, (c >> 1) & 1, c & 1
            wt = (
                (w[..., 0] if b0 else 1.0 - w[..., 0])
                * (w[..., 1] if b1 else 1.0 - w[..., 1])
                * (w[..., 2] if b2 else 1.0 - w[..., 2])
                * (w[..., 3] if b3 else 1.0 - w[..., 3])
            )
            acc += wt * U4[i0[..., 0] + b0, i0[..., 1] + b1, i0[..., 2] + b2, i0[..., 3] + b3]
        np.minimum(best, acc.mean(axis=1), out=best)
    return best


if HAS_NUMBA:

    @njit(cache=True)
    def _hull_line_nb(y, out, stack):
        m = y.shape[0]
        top = 0
        for k in range(m):
            yk = y[k]
            while top >= 2:
                i = stack[top - 2]
                j = stack[top - 1]
                if (j - i) * (yk - y[i]) - (k - i) * (y[j] - y[i]) <= 0.0:
                    top -= 1
                else:
                    break
            stack[top] = k
            top += 1
        seg = 0
        for k in range(m):
            while seg + 1 < top and stack[seg + 1] <= k:
                seg += 1
            i = stack[seg]
            if seg + 1 < top:
                j = stack[seg + 1]
                t = (k - i) / (j - i)
                out[k] = (1.0 - t) * y[i] + t * y[j]
            else:
                out[k] = y[i]

    @njit(cache=True, parallel=True)
    def _envelope_pass_nb(U, code):
        n1, n2 = U.shape
        if code == 0:
            for j in prange(n2):
                y = np.empty(n1)
                buf = np.empty(n1)
                stack = np.empty(n1, dtype=np.int64)
                for k in range(n1):
                    y[k] = U[k, j]
                _hull_line_nb(y, buf, stack)
                for k in range(n1):
                    U[k, j] = buf[k]
        elif code == 1:
            for i in prange(n1):
                y = np.empty(n2)
                buf = np.empty(n2)
                stack = np.empty(n2, dtype=np.int64)
                for k in range(n2):
                    y[k] = U[i, k]
                _hull_line_nb(y, buf, stack)
                for k in range(n2):
                    U[i, k] = buf[k]
        elif code == 2:
            ndiag = n1 + n2 - 1
            for t in prange(ndiag):
                s = t - (n2 - 1)  # i - j = s
                i0 = max(s, 0)
                j0 = i0 - s
                ln = min(n1 - i0, n2 - j0)
                if ln >= 3:
                    y = np.empty(ln)
                    buf = np.empty(ln)
                    stack = np.empty(ln, dtype=np.int64)
                    for k in range(ln):
                        y[k] = U[i0 + k, j0 + k]
                    _hull_line_nb(y, buf, stack)
                    for k in range(ln):
                        U[i0 + k, j0 + k] = buf[k]
        else:
            ndiag = n1 + n2 - 1
            for s in prange(ndiag):
                i0 = max(0, s - (n2 - 1))
                j0 = s - i0
                ln = min(n1 - i0, j0 + 1)
                if ln >= 3:
                    y = np.empty(ln)
                    buf = np.empty(ln)
                    stack = np.empty(ln, dtype=np.int64)
                    for k in range(ln):
                        y[k] = U[i0 + k, j0 - k]
                    _hull_line_nb(y, buf, stack)
                    for k in range(ln):
                        U[i0 + k, j0 - k] = buf[k]

    @njit(cache=True, parallel=True)
    def _perron_sweep_nb(u, shape, lo, h, nodes, offsets):
        m0, m1, m2, m3 = shape[0], shape[1], shape[2], shape[3]
        D = offsets.shape[0]
        A = offsets.shape[1]
        K = nodes.shape[0]
        out = np.empty(K)
        s3 = 1
        s2 = m3
        s1 = m2 * m3
        s0 = m1 * m2 * m3
        for k in prange(K):
            best = np.inf
            for d in range(D):
                acc = 0.0
                for a in range(A):
                    p0 = nodes[k, 0] + offsets[d, a, 0]
                    p1 = nodes[k, 1] + offsets[d, a, 1]
                    p2 = nodes[k, 2] + offsets[d, a, 2]
                    p3 = nodes[k, 3] + offsets[d, a, 3]
                    f0 = (p0 - lo[0]) / h[0]
                    f1 = (p1 - lo[1]) / h[1]
                    f2 = (p2 - lo[2]) / h[2]
                    f3 = (p3 - lo[3]) / h[3]
                    i0 = min(max(int(np.floor(f0)), 0), m0 - 2)
                    i1 = min(max(int(np.floor(f1)), 0), m1 - 2)
                    i2 = min(max(int(np.floor(f2)), 0), m2 - 2)
                    i3 = min(max(int(np.floor(f3)), 0), m3 - 2)
                    w0 = min(max(f0 - i0, 0.0), 1.0)
                    w1 = min(max(f1 - i1, 0.0), 1.0)
                    w2 = min(max(f2 - i2, 0.0), 1.0)
                    w3 = min(max(f3 - i3, 0.0), 1.0)
                    base = i0 * s0 + i1 * s1 + i2 * s2 + i3 * s3
                    val = 0.0
                    for c in range(16):
                        b0 = (c >> 3) & 1
                        b1 = (c >> 2) & 1
                        b2 = (c >> 1) & 1
                        b3 = c & 1
                        wt = (
                            (w0 if b0 else 1.0 - w0)
                            * (w1 if b1 else 1.0 - w1)
                            * (w2 if b2 else 1.0 - w2)
                            * (w3 if b3 else 1.0 - w3)
                        )
                        val += wt * u[base + b0 * s0 + b1 * s1 + b2 * s2 + b3 * s3]
                    acc += val
                avg = acc / A
                if avg < best:
                    best = avg
            out[k] = best
        return out


def envelope_pass(U, code):
    """In-place convexification of U along one line family (see codes above)."""
    if USING_NUMBA:
        _envelope_pass_nb(U, code)
    else:
        _envelope_pass_py(U, code)


def perron_sweep(u, shape, lo, h, nodes, offsets):
    """Disc-average Bellman values at the interior nodes (one Jacobi sweep)."""
    if USING_NUMBA:
        return _perron_sweep_nb(
            u,
            np.asarray(shape, dtype=np.int64),
            lo,
            h,
            nodes,
            offsets,
        )
    return _perron_sweep_py(u, tuple(shape), lo, h, nodes, offsets)

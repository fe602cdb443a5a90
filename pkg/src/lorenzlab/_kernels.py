"""Numba kernels for long-orbit Monte Carlo.

Everything here is a plain loop over orbit steps, compiled once and
cached.  Scalar map arithmetic mirrors `maps` exactly for the Lorenz
family.  The doubling/baker base is simulated symbolically: one fresh
random bit per step shifted into a 64-bit register, because a float64
doubling orbit collapses after ~53 steps.
"""

import numpy as np
from numba import njit

TWO64 = float(2 ** 64)
TOPBIT = np.uint64(1) << np.uint64(63)


@njit(cache=True, inline="always")
def _pow_abs(x, a):
    ax = abs(x)
    if ax < 1e-300:
        return 0.0
    return np.exp(a * np.log(ax))


@njit(cache=True, inline="always")
def _T(x, theta, alpha):
    # branch offsets are pinned to -1/2 (x > 0) and +1/2 (x < 0)
    xa = _pow_abs(x, alpha)
    if x > 0.0:
        return theta * xa - 0.5
    return -theta * xa + 0.5


@njit(cache=True, inline="always")
def _G(x, y, beta, g_kappa, g_c):
    g = g_kappa * y * _pow_abs(x, beta)
    if x > 0.0:
        return g + g_c
    return g - g_c


@njit(cache=True)
def lorenz_orbit(x0, y0, n, theta, alpha, beta, g_kappa, g_c, xs, ys):
    """Fill xs, ys with n iterates starting at (x0, y0).

    Returns the number of valid points (== n unless the singular line is
    hit exactly, in which case the orbit is truncated there).
    """
    x = x0
    y = y0
    for k in range(n):
        if x == 0.0:
            return k
        xs[k] = x
        ys[k] = y
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
    return n


@njit(cache=True)
def lorenz_burn(x0, y0, n, theta, alpha, beta, g_kappa, g_c):
    """Advance n steps and return the final point (x, y, ok)."""
    x = x0
    y = y0
    for _ in range(n):
        if x == 0.0:
            return 0.0, 0.0, False
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
    return x, y, True


@njit(cache=True)
def lorenz_orbit_1d(x0, n, theta, alpha, xs):
    x = x0
    for k in range(n):
        if x == 0.0:
            return k
        xs[k] = x
        x = _T(x, theta, alpha)
    return n


@njit(cache=True, inline="always")
def _bit(words, k):
    return (words[k >> 6] >> np.uint64(k & 63)) & np.uint64(1)


@njit(cache=True)
def baker_orbit(w0, y0, n, words, xs, ys):
    """Baker orbit with symbolic doubling base.

    w0 is a uint64 whose value/2^64 is the base coordinate shifted into
    [0, 1); each step shifts in one bit from `words`.  xs/ys receive the
    section coordinates in [-1/2, 1/2).
    """
    w = w0
    y = y0
    for k in range(n):
        x = w / TWO64 - 0.5
        xs[k] = x
        ys[k] = y
        if x < 0.0:
            y = 0.5 * y - 0.25
        else:
            y = 0.5 * y + 0.25
        w = ((w << np.uint64(1)) | _bit(words, k)) ^ TOPBIT
    return n


@njit(cache=True)
def doubling_orbit(w0, n, words, xs):
    w = w0
    for k in range(n):
        xs[k] = w / TWO64 - 0.5
        w = ((w << np.uint64(1)) | _bit(words, k)) ^ TOPBIT
    return n


@njit(cache=True)
def lorenz_sbc_hits(x0, y0, theta, alpha, beta, g_kappa, g_c,
                    cx, cy, radii, square, checkpoints, s_out, times_out):
    """Count shrinking-target hits S_n = #{j < n : F^j(p) in A_j}.

    radii[j] is the target radius at step j (Chebyshev if square, else
    Euclidean).  s_out[i] receives S at n = checkpoints[i]; hit times go
    to times_out up to its length.  Returns the number of valid steps.
    """
    n = radii.shape[0]
    cap = times_out.shape[0]
    x = x0
    y = y0
    s = 0
    ci = 0
    for j in range(n):
        if x == 0.0:
            for i in range(ci, checkpoints.shape[0]):
                s_out[i] = s
            return j
        dx = x - cx
        dy = y - cy
        r = radii[j]
        if square:
            inside = (abs(dx) <= r) and (abs(dy) <= r)
        else:
            inside = dx * dx + dy * dy <= r * r
        if inside:
            if s < cap:
                times_out[s] = j
            s += 1
        if ci < checkpoints.shape[0] and j + 1 == checkpoints[ci]:
            s_out[ci] = s
            ci += 1
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
    for i in range(ci, checkpoints.shape[0]):
        s_out[i] = s
    return n


@njit(cache=True)
def baker_sbc_hits(w0, y0, words, cx, cy, radii, square, checkpoints, s_out,
                   times_out):
    n = radii.shape[0]
    cap = times_out.shape[0]
    w = w0
    y = y0
    s = 0
    ci = 0
    for j in range(n):
        x = w / TWO64 - 0.5
        dx = x - cx
        dy = y - cy
        r = radii[j]
        if square:
            inside = (abs(dx) <= r) and (abs(dy) <= r)
        else:
            inside = dx * dx + dy * dy <= r * r
        if inside:
            if s < cap:
                times_out[s] = j
            s += 1
        if ci < checkpoints.shape[0] and j + 1 == checkpoints[ci]:
            s_out[ci] = s
            ci += 1
        if x < 0.0:
            y = 0.5 * y - 0.25
        else:
            y = 0.5 * y + 0.25
        w = ((w << np.uint64(1)) | _bit(words, j)) ^ TOPBIT
    for i in range(ci, checkpoints.shape[0]):
        s_out[i] = s
    return n


@njit(cache=True)
def lorenz_hit_times(x0, y0, n, theta, alpha, beta, g_kappa, g_c,
                     cx, cy, r, times, cap):
    """Entry times into the Euclidean ball B_r(c) along an orbit of length n.

    Fills `times` up to `cap` entries; returns (count, valid_steps).
    """
    x = x0
    y = y0
    m = 0
    r2 = r * r
    for j in range(n):
        if x == 0.0:
            return m, j
        dx = x - cx
        dy = y - cy
        if dx * dx + dy * dy <= r2:
            if m < cap:
                times[m] = j
            m += 1
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
    return m, n


@njit(cache=True)
def lorenz_min_dist2(x0, y0, n, theta, alpha, beta, g_kappa, g_c, cx, cy):
    """Minimum squared distance to (cx, cy) over an orbit of length n.

    Returns (min_d2, x_final, y_final, ok) so block scans can continue
    where the previous block ended.
    """
    x = x0
    y = y0
    best = 1e300
    for _ in range(n):
        if x == 0.0:
            return best, x, y, False
        dx = x - cx
        dy = y - cy
        d2 = dx * dx + dy * dy
        if d2 < best:
            best = d2
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
    return best, x, y, True


@njit(cache=True)
def short_return_counts(xs, nvalid, lo, hi, jmax, counts):
    """1D short-return statistics on an orbit array.

    counts[j-1] += 1 whenever xs[i] and xs[i+j] both lie in [lo, hi],
    for 1 <= j <= jmax.  Returns the number of base hits.
    """
    nhits = 0
    for i in range(nvalid):
        xi = xs[i]
        if lo <= xi <= hi:
            nhits += 1
            top = jmax
            if i + top >= nvalid:
                top = nvalid - 1 - i
            for j in range(1, top + 1):
                xj = xs[i + j]
                if lo <= xj <= hi:
                    counts[j - 1] += 1
    return nhits


@njit(cache=True)
def lorenz_flow_max(x0, y0, n_max, theta, alpha, beta, g_kappa, g_c,
                    lam1, tau0, cx, cy, u0, t_horizon):
    """Suspension-flow running maximum of phi = -log(distance to (c, u0)).

    Walks base returns until the accumulated roof time passes t_horizon
    (or n_max returns).  Segment minima are closed form: the flow segment
    over p is {(p, u) : u in [0, h(p))}, so the minimum distance to
    (cx, cy, u0) is the base distance if u0 < h(p), else the height gap
    enters in quadrature.  Returns (min_dist_full_segments over the first
    N complete returns with N = floor(t_horizon/hbar) handled by caller,
    min_dist_horizon, elapsed, nreturns, ok).
    """
    x = x0
    y = y0
    elapsed = 0.0
    best = 1e300
    k = 0
    while k < n_max and elapsed < t_horizon:
        if x == 0.0:
            return best, elapsed, k, False
        h = -np.log(abs(x)) / lam1 + tau0
        dx = x - cx
        dy = y - cy
        db2 = dx * dx + dy * dy
        seg = t_horizon - elapsed
        if seg > h:
            seg = h
        # min over u in [0, seg) of sqrt(db2 + (u - u0)^2)
        if u0 < seg:
            d2 = db2
        else:
            gap = u0 - seg
            d2 = db2 + gap * gap
        if d2 < best:
            best = d2
        elapsed += h
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
        k += 1
    return best, elapsed, k, True


@njit(cache=True)
def lorenz_segment_min2(x0, y0, n_returns, theta, alpha, beta, g_kappa, g_c,
                        lam1, tau0, cx, cy, u0, out_min2):
    """Per-return-segment minimum squared suspension distance to (c, u0)."""
    x = x0
    y = y0
    for k in range(n_returns):
        if x == 0.0:
            return k
        h = -np.log(abs(x)) / lam1 + tau0
        dx = x - cx
        dy = y - cy
        db2 = dx * dx + dy * dy
        if u0 < h:
            out_min2[k] = db2
        else:
            gap = u0 - h
            out_min2[k] = db2 + gap * gap
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
    return n_returns


@njit(cache=True)
def roof_running_mean(x0, y0, n, theta, alpha, beta, g_kappa, g_c,
                      lam1, tau0, trace_at, trace_out):
    """Birkhoff average of the roof function with a convergence trace."""
    x = x0
    y = y0
    acc = 0.0
    ci = 0
    for k in range(n):
        if x == 0.0:
            return acc / max(k, 1), k
        acc += -np.log(abs(x)) / lam1 + tau0
        if ci < trace_at.shape[0] and k + 1 == trace_at[ci]:
            trace_out[ci] = acc / (k + 1)
            ci += 1
        xn = _T(x, theta, alpha)
        y = _G(x, y, beta, g_kappa, g_c)
        x = xn
    return acc / n, n

"""Extreme value experiments for the 2D Lorenz map.

The observable is phi = -log(distance to a center x0), so exceedances of
a level u are exactly visits to the ball of radius e^(-u).  All
exceedance logic works with radii; the logarithm only enters when maxima
are handed to the Gumbel fit, clamped at PHI_CAP against distance
underflow.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import chisquare, gumbel_r, kstest, poisson

from . import _kernels, rng
from .borel_cantelli import _lorenz_start
from .measure import EmpiricalMeasure, MIN_BALL_SAMPLES
from .params import ModelParams, I_HALF

PHI_CAP = 700.0


@dataclass(frozen=True)
class Observable:
    """phi(x) = -log d(x, x0) with level sets {phi > u} = balls of radius e^-u."""

    center: tuple
    metric: str = "euclidean"   # "euclidean" or "max"

    @property
    def shape(self):
        return "ball" if self.metric == "euclidean" else "square"

    def distance(self, x, y):
        dx = np.asarray(x) - self.center[0]
        dy = np.asarray(y) - self.center[1]
        if self.metric == "euclidean":
            return np.sqrt(dx * dx + dy * dy)
        return np.maximum(np.abs(dx), np.abs(dy))

    def phi(self, x, y):
        d = self.distance(x, y)
        with np.errstate(divide="ignore"):
            return np.minimum(-np.log(d), PHI_CAP)


class PeriodicCenterError(ValueError):
    pass


def check_nonperiodic(params, center, r, j_max=50):
    """Finite-horizon non-periodicity check: no return within r in j_max steps."""
    from .maps import SectionPoint, lorenz_F
    p = SectionPoint(*center)
    q = p
    for j in range(j_max):
        q = lorenz_F(params, q)
        if math.hypot(q.x - center[0], q.y - center[1]) <= r:
            raise PeriodicCenterError(
                f"center returns within {r:g} after {j + 1} steps")
    return True


def periodic_center(params: ModelParams):
    """A period-2 point of F, used as the clustering negative control.

    By the odd symmetry of T the period-2 base orbit is {x*, -x*} with
    theta*x^alpha + x - 1/2 = 0; the fiber coordinate is the fixed point
    of the composed affine fiber maps.
    """
    a = params
    x1 = brentq(lambda x: a.theta * x ** a.alpha + x - 0.5, 1e-9, 0.5)
    c = a.g_kappa * x1 ** a.beta
    # y -> c*(c*y + g_c) - g_c around the two-cycle
    y = (c * a.g_c - a.g_c) / (1.0 - c * c)
    return (x1, y)


@dataclass
class LevelSchedule:
    center: tuple
    v_grid: np.ndarray
    n_grid: np.ndarray
    u: np.ndarray               # (len(v), len(n)) levels
    r: np.ndarray               # matching ball radii e^(-u)
    masses: np.ndarray          # achieved empirical masses

    def bracket(self, d_hat, eps=0.1):
        """Bounds (v + log n)/(d +- eps) that the levels should fall in."""
        base = self.v_grid[:, None] + np.log(self.n_grid)[None, :]
        return base / (d_hat + eps), base / (d_hat - eps)

    def bracket_ok(self, d_hat, eps=0.1):
        lo, hi = self.bracket(d_hat, eps)
        return (lo <= self.u) & (self.u <= hi)


def levels(m: EmpiricalMeasure, center, v_grid, n_grid, shape="ball"):
    """Levels u_n(v) calibrated so that the achieved mass is e^(-v)/n."""
    v_grid = np.asarray(v_grid, dtype=np.float64)
    n_grid = np.asarray(n_grid, dtype=np.int64)
    u = np.empty((len(v_grid), len(n_grid)))
    r = np.empty_like(u)
    masses = np.empty_like(u)
    for i, v in enumerate(v_grid):
        for j, n in enumerate(n_grid):
            target = math.exp(-v) / n
            rr = m.invert_mass(center, target, shape)
            r[i, j] = rr
            u[i, j] = -math.log(rr)
            masses[i, j] = m.ball_mass(center, rr, shape)
    return LevelSchedule(tuple(center), v_grid, n_grid, u, r, masses)


# -- block maxima ----------------------------------------------------------


@dataclass
class BlockMaximaReport:
    center: tuple
    n: int
    v_grid: np.ndarray
    r_v: np.ndarray             # ball radius per v
    maxima: np.ndarray          # per-trial maxima of phi (independent starts)
    maxima_blocks: np.ndarray   # per-block maxima from one long orbit
    p_hat: np.ndarray           # P(M_n <= u_n(v)) per v
    p_hat_blocks: np.ndarray
    p_limit: np.ndarray         # e^{-e^{-v}}

    def summary(self):
        return {
            "n": self.n,
            "v": self.v_grid.tolist(),
            "p_hat": self.p_hat.tolist(),
            "p_hat_blocks": self.p_hat_blocks.tolist(),
            "p_limit": self.p_limit.tolist(),
            "trials": int(len(self.maxima)),
        }


def block_maxima(params, m: EmpiricalMeasure, center, n, trials, v_grid,
                 seed=0, burn_in=1_000):
    """Distribution of M_n at levels u_n(v), via independent starts and
    via non-overlapping blocks of one long orbit."""
    v_grid = np.asarray(v_grid, dtype=np.float64)
    sched = levels(m, center, v_grid, [n])
    r_v = sched.r[:, 0]
    check_nonperiodic(params, center, float(r_v.max()))
    a = params
    min_d = np.empty(trials)
    for k in range(trials):
        gen = rng.stream(seed, k)
        x0, y0 = _lorenz_start(params, gen, burn_in)
        d2, _, _, ok = _kernels.lorenz_min_dist2(
            x0, y0, n, a.theta, a.alpha, a.beta, a.g_kappa, a.g_c,
            center[0], center[1])
        if not ok:
            d2 = np.inf
        min_d[k] = math.sqrt(d2)
    gen = rng.stream(seed, trials + 1)
    x, y = _lorenz_start(params, gen, burn_in)
    min_d_blocks = np.empty(trials)
    for k in range(trials):
        d2, x, y, ok = _kernels.lorenz_min_dist2(
            x, y, n, a.theta, a.alpha, a.beta, a.g_kappa, a.g_c,
            center[0], center[1])
        if not ok:
            raise RuntimeError("long orbit hit the singular line")
        min_d_blocks[k] = math.sqrt(d2)
    with np.errstate(divide="ignore"):
        maxima = np.minimum(-np.log(min_d), PHI_CAP)
        maxima_blocks = np.minimum(-np.log(min_d_blocks), PHI_CAP)
    p_hat = np.array([(min_d > rv).mean() for rv in r_v])
    p_hat_blocks = np.array([(min_d_blocks > rv).mean() for rv in r_v])
    p_limit = np.exp(-np.exp(-v_grid))
    return BlockMaximaReport(tuple(center), n, v_grid, r_v, maxima,
                             maxima_blocks, p_hat, p_hat_blocks, p_limit)


def iid_maxima_control(m: EmpiricalMeasure, center, n, trials, v_grid, seed=0):
    """i.i.d. resampling oracle: maxima of n independent draws from the
    empirical measure, computed by inverse-CDF sampling of the minimum
    distance.  Validates the level calibration independent of dynamics."""
    v_grid = np.asarray(v_grid, dtype=np.float64)
    sched = levels(m, center, v_grid, [n])
    r_v = sched.r[:, 0]
    # distance CDF at the center, far enough out to cover the minima
    d = m._distances(center, max(0.25, float(r_v.max()) * 4), "ball")
    d.sort()
    frac = len(d) / m.n
    gen = rng.stream(seed, 0)
    u = gen.random(trials)
    # P(min of n draws > r) = (1 - F(r))^n; invert at u
    q = (1.0 - u ** (1.0 / n)) / frac
    ks = np.minimum((q * len(d)).astype(np.int64), len(d) - 1)
    min_d = d[ks]
    p_hat = np.array([(min_d > rv).mean() for rv in r_v])
    with np.errstate(divide="ignore"):
        maxima = np.minimum(-np.log(min_d), PHI_CAP)
    return {"p_hat": p_hat, "p_limit": np.exp(-np.exp(-v_grid)),
            "maxima": maxima, "r_v": r_v}


def gumbel_ks(maxima, a_n, b_n):
    """KS distance of the normalized maxima against the standard Gumbel,
    plus a maximum-likelihood Gumbel fit as a robustness cross-check."""
    maxima = np.asarray(maxima, dtype=np.float64)
    if len(maxima) < 10 or maxima.std() == 0.0:
        raise ValueError("degenerate maxima sample")
    z = a_n * (maxima - b_n)
    ks = kstest(z, gumbel_r.cdf)
    loc, scale = gumbel_r.fit(maxima)
    return {
        "ks": float(ks.statistic),
        "pvalue": float(ks.pvalue),
        "a_n": float(a_n),
        "b_n": float(b_n),
        "ml_loc": float(loc),
        "ml_scale": float(scale),
    }


def gumbel_norm_constants(dim_fit, n):
    """Normalizing constants from the ball-mass power law mu(B_r) ~ c r^d:
    a_n = d, b_n = (log n + log c)/d."""
    d = dim_fit.slope
    return d, (math.log(n) + dim_fit.intercept) / d


# -- dependence conditions -------------------------------------------------


def _exceedance_times(params, center, r, length, seed, burn_in=1_000,
                      cap=None):
    a = params
    gen = rng.stream(seed, 0)
    x0, y0 = _lorenz_start(params, gen, burn_in)
    cap = cap or max(int(3 * length * 0.01), 10_000)
    times = np.empty(cap, dtype=np.int64)
    count, nvalid = _kernels.lorenz_hit_times(
        x0, y0, length, a.theta, a.alpha, a.beta, a.g_kappa, a.g_c,
        center[0], center[1], r, times, cap)
    if count > cap:
        raise RuntimeError("exceedance buffer overflow; widen cap")
    return times[:count], nvalid


def d_prime_stat(params, m, center, n_grid, k_grid, v=0.0, orbit_len=10 ** 8,
                 seed=0):
    """Anti-clustering statistic E(n, k) = n * sum_{j<=n/k} mu(X_0>u_n, X_j>u_n),
    with the joint masses estimated by pair counting along one long orbit."""
    n_grid = np.asarray(n_grid, dtype=np.int64)
    k_grid = np.asarray(k_grid, dtype=np.int64)
    out = np.empty((len(n_grid), len(k_grid)))
    counts = np.empty_like(out)
    for i, n in enumerate(n_grid):
        r = m.invert_mass(center, math.exp(-v) / n, "ball")
        times, L = _exceedance_times(params, center, r, orbit_len, seed + i)
        if len(times) < 100:
            warnings.warn(f"only {len(times)} exceedances at n = {n}; "
                          "estimates will be noisy")
        for j, k in enumerate(k_grid):
            gap = n // k
            # pairs with 0 < t' - t <= gap
            hi = np.searchsorted(times, times + gap, side="right")
            pairs = int(np.sum(hi - np.arange(1, len(times) + 1)))
            counts[i, j] = pairs
            out[i, j] = n * pairs / L
    return {"n": n_grid, "k": k_grid, "E": out, "pairs": counts}


def d_prime_iid(n, k_grid, v=0.0):
    """Independence arithmetic: E(n, k) ~ e^(-2v)/k."""
    return math.exp(-2 * v) / np.asarray(k_grid, dtype=np.float64)


def d3_stat(params, m, center, n, t_grid, l=1_000, v=0.0, orbit_len=10 ** 8,
            seed=0, p2_windows=10 ** 4):
    """Long-range dependence statistic gamma(n, t) =
    |mu(X_0>u_n, M_{t,l}<=u_n) - mu(X_0>u_n) mu(M_l<=u_n)| per t.

    The X_0 condition is rare (mass e^-v/n), so it is evaluated exactly
    at the recorded exceedance times rather than at strided samples;
    gamma factors as p1*|q(t) - p2| where q(t) is the conditional
    no-exceedance probability of the shifted window.
    """
    t_grid = np.asarray(t_grid, dtype=np.int64)
    r = m.invert_mass(center, math.exp(-v) / n, "ball")
    tmax = int(t_grid.max())
    length = int(orbit_len) + tmax + l + 1
    times, L = _exceedance_times(params, center, r, length, seed)
    # cumulative exceedance count: H[j] = #{hits at times < j}
    H = np.zeros(L + 2, dtype=np.int64)
    np.add.at(H, times + 1, 1)
    H = np.cumsum(H)
    starts = times[times + tmax + l + 1 <= L]
    base = min(int(orbit_len), L)
    p1 = H[base] / base
    if len(starts) < 30:
        warnings.warn(f"only {len(starts)} exceedances; gamma is noisy")
    win = np.linspace(0, base - l - 1, p2_windows).astype(np.int64)
    p2 = float(((H[win + l] - H[win]) == 0).mean())
    rows = []
    for t in t_grid:
        hit_free = (H[starts + t + l] - H[starts + t]) == 0
        q = float(hit_free.mean()) if len(starts) else 0.0
        gamma = p1 * abs(q - p2)
        var_q = q * (1.0 - q) / max(len(starts), 1)
        var_p2 = p2 * (1.0 - p2) / p2_windows
        sigma = p1 * math.sqrt(var_q + var_p2)
        rows.append({"t": int(t), "gamma": gamma, "q": q, "sigma": sigma})
    return {"n": int(n), "l": int(l), "p1": float(p1), "p2": p2,
            "exceedances": int(len(starts)), "rows": rows}


# -- rare event point process ---------------------------------------------


@dataclass
class ReppCounts:
    a_n: float
    u_n: float
    r_n: float
    t_max: float
    counts: np.ndarray          # (trials, n_windows) counts in [w, w+1)
    gaps: np.ndarray            # pooled inter-exceedance gaps, rescaled

    def window_counts(self, t):
        """N([0, t)) per trial for integer t <= t_max."""
        return self.counts[:, :int(t)].sum(axis=1)

    def dispersion_index(self, t=1):
        c = self.window_counts(t)
        return float(c.var() / c.mean())

    def gap_ks(self):
        return float(kstest(self.gaps, "expon").statistic)

    def poisson_chi2(self, t=1):
        c = self.window_counts(t)
        kmax = int(c.max())
        obs = np.bincount(c, minlength=kmax + 1).astype(float)
        exp = poisson.pmf(np.arange(kmax + 1), t) * len(c)
        # fold the sparse tail so expected counts stay above ~5
        while len(exp) > 2 and exp[-1] < 5:
            exp[-2] += exp[-1]
            obs[-2] += obs[-1]
            exp, obs = exp[:-1], obs[:-1]
        exp *= obs.sum() / exp.sum()
        return chisquare(obs, exp)


def repp(params, m, center, n, v=0.0, t_max=2.0, trials=10 ** 4, seed=0,
         burn_in=1_000):
    """Exceedance counts over time rescaled by a_n = 1/mu(U_n).

    Window counts come from independent trials of duration t_max.  The
    inter-exceedance gaps come from one long stationary orbit instead;
    gaps pooled inside short windows would be truncation-biased (both
    endpoints must land in the window) and fail Exp(1) even for a true
    Poisson process.
    """
    r = m.invert_mass(center, math.exp(-v) / n, "ball")
    p = m.ball_mass(center, r, "ball")
    a_n = 1.0 / p
    check_nonperiodic(params, center, r)
    length = int(math.ceil(a_n * t_max))
    nwin = int(math.ceil(t_max))
    a = params
    counts = np.zeros((trials, nwin), dtype=np.int64)
    buf = np.empty(4096, dtype=np.int64)
    for k in range(trials):
        gen = rng.stream(seed, k)
        x0, y0 = _lorenz_start(params, gen, burn_in)
        cnt, nvalid = _kernels.lorenz_hit_times(
            x0, y0, length, a.theta, a.alpha, a.beta, a.g_kappa, a.g_c,
            center[0], center[1], r, buf, 4096)
        cnt = min(cnt, 4096)
        ts = buf[:cnt] / a_n
        idx = np.minimum(ts.astype(np.int64), nwin - 1)
        for w in idx:
            counts[k, w] += 1
    times, _ = _exceedance_times(params, center, r, trials * length,
                                 seed + 10 ** 6, burn_in)
    gaps = np.diff(times) / a_n
    return ReppCounts(a_n, -math.log(r), r, t_max, counts, gaps)


def poisson_control(trials=10 ** 4, t_max=2.0, seed=0):
    """Synthetic standard Poisson process through the same bookkeeping."""
    gen = rng.stream(seed, 0)
    nwin = int(math.ceil(t_max))
    counts = np.zeros((trials, nwin), dtype=np.int64)
    for k in range(trials):
        t = gen.exponential()
        while t < t_max:
            counts[k, int(t)] += 1
            t += gen.exponential()
    gaps = gen.exponential(size=trials)
    return ReppCounts(1.0, math.inf, 0.0, t_max, counts, gaps)

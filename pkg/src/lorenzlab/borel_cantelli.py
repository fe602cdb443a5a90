"""Shrinking targets and the strong Borel-Cantelli ratio S_n / E_n.

Targets are nested balls or squares whose measures follow the schedule
C / i**gamma1; the ratio of orbit hit counts to accumulated measure is
the empirical surrogate for the almost-sure limit S_n/E_n -> 1.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, rng
from .measure import EmpiricalMeasure, MIN_BALL_SAMPLES, ResolutionError
from .params import I_HALF

HIT_TIME_CAP = 100_000


@dataclass
class TargetSequence:
    """Nested shrinking targets A_i, i = 1..N, with their achieved masses."""

    center: tuple
    shape: str                  # "square" or "ball"
    gamma1: float
    C: float
    radii: np.ndarray           # radius (half side for squares) per i
    masses: np.ndarray          # achieved empirical masses
    flags: list = field(default_factory=list)

    @property
    def N(self):
        return len(self.radii)

    @property
    def E(self):
        return np.cumsum(self.masses)

    def side_condition(self):
        """max over i of (log i) * horizontal extent of A_i (reported, not gated)."""
        i = np.arange(1, self.N + 1)
        return float(np.max(np.log(np.maximum(i, 2)) * 2.0 * self.radii))


def build_targets(m: EmpiricalMeasure, center, shape, gamma1, N, C=0.01):
    """Radii realizing the measure schedule C / i**gamma1 on `m`.

    Radii are distance order statistics at the center, so the achieved
    mass of A_i is the smallest empirical mass >= the scheduled one.  The
    sequence truncates (with a warning) once the schedule drops below the
    sample-count floor.
    """
    if not 0.0 < gamma1 <= 1.0:
        raise ValueError("gamma1 must be in (0, 1]")
    if N < 1_000:
        raise ValueError("N too small for a meaningful ratio")
    flags = []
    i = np.arange(1, N + 1)
    sched = C * i ** (-gamma1)
    ks = np.ceil(sched * m.n).astype(np.int64)
    usable = ks >= MIN_BALL_SAMPLES
    if not usable.all():
        N_new = int(np.argmin(usable))
        if N_new == 0:
            raise ResolutionError("even the first target is below the sample floor")
        warnings.warn(f"target schedule truncated at N = {N_new} by the "
                      f"{MIN_BALL_SAMPLES}-sample floor")
        flags.append(f"truncated:{N_new}")
        ks = ks[:N_new]
    # one gather at the largest target, then order statistics for every i
    r1 = m.invert_mass(center, float(sched[0]), shape)
    d = m._distances(center, max(r1 * 1.001, 2.0 ** -m.cell_bits), shape)
    while np.count_nonzero(d <= r1) < ks[0]:
        d = m._distances(center, 2.0 * float(d.max() + 1e-12), shape)
    d.sort()
    radii = d[ks - 1]
    masses = np.searchsorted(d, radii, side="right") / m.n
    E_N = float(masses.sum())
    if E_N < 1.0:
        flags.append("E_N too small; consider gamma1 = 0.6")
    return TargetSequence(tuple(center), shape, gamma1, C, radii, masses, flags)


@dataclass
class SbcReport:
    targets: TargetSequence
    checkpoints: np.ndarray
    S: np.ndarray               # (ensemble, checkpoints) hit counts
    E: np.ndarray               # E_n at the checkpoints
    exclusions: int
    hit_times: list

    @property
    def ratios(self):
        return self.S / self.E[None, :]

    @property
    def terminal_ratios(self):
        return self.ratios[:, -1]

    def summary(self):
        r = self.ratios
        return {
            "ensemble": int(self.S.shape[0]),
            "checkpoints": self.checkpoints.tolist(),
            "E": self.E.tolist(),
            "mean_ratio": r.mean(axis=0).tolist(),
            "std_ratio": r.std(axis=0).tolist(),
            "exclusions": self.exclusions,
        }


def _default_checkpoints(N):
    cps = [10 ** k for k in range(2, int(math.log10(N)) + 1) if 10 ** k <= N]
    if not cps or cps[-1] != N:
        cps.append(N)
    return np.array(cps, dtype=np.int64)


def _lorenz_start(params, gen, burn_in=1_000):
    a = params
    while True:
        x0 = gen.uniform(-I_HALF, I_HALF)
        y0 = gen.uniform(-I_HALF, I_HALF)
        x, y, ok = _kernels.lorenz_burn(x0, y0, burn_in, a.theta, a.alpha,
                                        a.beta, a.g_kappa, a.g_c)
        if ok:
            return x, y


def run_sbc(map_kind, params, targets: TargetSequence, ensemble=100, seed=0,
            checkpoints=None, keep_hit_times=False):
    """Ensemble of orbits scored against the target sequence.

    Each member runs from an independent start (stream (seed, member));
    orbits that hit the singular line exactly are excluded and counted.
    """
    if ensemble < 1:
        raise ValueError("ensemble must be positive")
    N = targets.N
    cps = _default_checkpoints(N) if checkpoints is None else \
        np.asarray(checkpoints, dtype=np.int64)
    cx, cy = targets.center
    square = targets.shape == "square"
    E = targets.E[cps - 1]
    rows = []
    all_times = []
    exclusions = 0
    tbuf = np.empty(HIT_TIME_CAP, dtype=np.int64)
    for k in range(ensemble):
        gen = rng.stream(seed, k)
        s_out = np.zeros(len(cps), dtype=np.int64)
        if map_kind == "lorenz":
            a = params
            x0, y0 = _lorenz_start(params, gen)
            nvalid = _kernels.lorenz_sbc_hits(
                x0, y0, a.theta, a.alpha, a.beta, a.g_kappa, a.g_c,
                cx, cy, targets.radii, square, cps, s_out, tbuf)
        elif map_kind == "baker":
            from .measure import _baker_state
            words = rng.bit_words(gen, N)
            w0, y0 = _baker_state(gen)
            nvalid = _kernels.baker_sbc_hits(w0, y0, words, cx, cy,
                                             targets.radii, square, cps,
                                             s_out, tbuf)
        else:
            raise ValueError(f"unsupported map kind {map_kind!r}")
        if nvalid < N:
            exclusions += 1
            continue
        rows.append(s_out)
        if keep_hit_times:
            all_times.append(tbuf[:min(int(s_out[-1]), HIT_TIME_CAP)].copy())
    S = np.array(rows, dtype=np.float64)
    return SbcReport(targets, cps, S, E, exclusions, all_times)


def sp_diagnostic(map_kind, params, targets: TargetSequence, window=1_000,
                  ensemble=100, seed=0, iid_control=False):
    """Windowed correlation-sum surrogate for the (SP) second-moment bound.

    Estimates sum over pairs i < j <= i + window of
    E(f_i f_j) - E(f_i) E(f_j), normalized by sum E(f_i).  For an SBC
    system it stays bounded by an O(1) constant across scales; for
    independent targets it is zero up to Monte Carlo noise.
    """
    if window > 1_000:
        raise ValueError("window capped at 1000")
    masses = targets.masses
    N = targets.N
    if iid_control:
        co_pairs = 0
        for k in range(ensemble):
            gen = rng.stream(seed, k)
            hits = np.nonzero(gen.random(N) < masses)[0]
            co_pairs += _count_window_pairs(hits, window)
    else:
        rep = run_sbc(map_kind, params, targets, ensemble=ensemble, seed=seed,
                      keep_hit_times=True)
        co_pairs = sum(_count_window_pairs(h, window) for h in rep.hit_times)
        ensemble = rep.S.shape[0]
    mean_pairs = co_pairs / ensemble
    # independent-targets baseline: sum_{i<j<=i+w} m_i m_j via a sliding cumsum
    c = np.concatenate(([0.0], np.cumsum(masses)))
    tail = c[np.minimum(np.arange(1, N + 1) + window, N)] - c[1:]
    baseline = float(np.sum(masses * tail))
    e_sum = float(masses.sum())
    # per-member variance of the pair count, for the 3-sigma control band
    var_pairs = co_pairs / ensemble ** 2 if co_pairs else baseline / ensemble
    return {
        "window": window,
        "ensemble": ensemble,
        "pair_count_mean": mean_pairs,
        "baseline": baseline,
        "normalized_sum": (mean_pairs - baseline) / e_sum,
        "sigma_normalized": math.sqrt(max(var_pairs, 1e-300)) / e_sum,
        "E_N": e_sum,
    }


def _count_window_pairs(hits, window):
    if len(hits) < 2:
        return 0
    count = 0
    j = 0
    for i in range(len(hits)):
        while j < len(hits) and hits[j] <= hits[i] + window:
            j += 1
        count += j - i - 1
    return count


def short_return_profile(map_kind, params, center, radii, orbit_len=10 ** 7,
                         seed=0, j_cap=10_000):
    """Empirical short-return ratios of the 1D map.

    For each radius r: ratios mu(B_r ∩ T^-j B_r)/mu(B_r) for
    1 <= j <= min(ceil(|log r|^5), j_cap), plus the per-radius supremum.
    """
    gen = rng.stream(seed, 0)
    xs = np.empty(orbit_len)
    if map_kind == "lorenz":
        a = params
        x0 = gen.uniform(-I_HALF, I_HALF)
        nvalid = _kernels.lorenz_orbit_1d(x0, orbit_len, a.theta, a.alpha, xs)
    elif map_kind == "doubling":
        words = rng.bit_words(gen, orbit_len)
        w0 = np.uint64(gen.integers(0, 2 ** 64, dtype=np.uint64))
        nvalid = _kernels.doubling_orbit(w0, orbit_len, words, xs)
    else:
        raise ValueError("short returns are a 1D-map diagnostic")
    out = []
    for r in radii:
        jmax = min(int(math.ceil(abs(math.log(r)) ** 5)), j_cap)
        counts = np.zeros(jmax, dtype=np.int64)
        nhits = _kernels.short_return_counts(xs, nvalid, center - r, center + r,
                                             jmax, counts)
        if nhits < MIN_BALL_SAMPLES:
            raise ResolutionError(f"radius {r} resolves only {nhits} orbit points")
        ratios = counts / nhits
        out.append({"r": r, "jmax": jmax, "mass": nhits / nvalid,
                    "ratios": ratios, "sup": float(ratios.max())})
    return out

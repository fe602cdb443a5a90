"""Empirical invariant measures and derived quantities.

The SRB-type measure of the 2D map is approximated by a long-orbit
empirical measure held in a cell-sorted point buffer, so ball/square
mass queries only touch the cells a shape overlaps.  The 1D acim comes
from an Ulam discretization of the transfer operator with an
orbit-histogram fallback.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
from scipy.stats import linregress

from . import _kernels, rng
from .params import ModelParams, I_HALF

MIN_BALL_SAMPLES = 50  # below this the relative Monte Carlo error tops ~14%


class ResolutionError(ValueError):
    """Requested mass/radius is below the sample resolution floor."""


class EstimationError(ValueError):
    pass


def _euclid(dx, dy):
    return np.sqrt(dx * dx + dy * dy)


def _cheby(dx, dy):
    return np.maximum(np.abs(dx), np.abs(dy))


_DIST = {"ball": _euclid, "square": _cheby}


class EmpiricalMeasure:
    """Orbit-derived probability measure on I x I with an O(1) cell index.

    Points are stored sorted by grid cell (cell side 2**-cell_bits), so a
    query gathers only the contiguous slices of cells that the shape's
    bounding box touches.  Finalized instances are immutable and safe for
    concurrent queries.
    """

    def __init__(self, points, cell_bits=10, meta=None):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("points must be (n, 2)")
        self.cell_bits = int(cell_bits)
        self.ncell = 1 << self.cell_bits
        self.meta = dict(meta or {})
        ids = self._cell_ids(points[:, 0], points[:, 1])
        order = np.argsort(ids, kind="stable")
        self.points = points[order]
        counts = np.bincount(ids, minlength=self.ncell * self.ncell)
        self.offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self.n = points.shape[0]

    def _cell_ids(self, x, y):
        ncell = self.ncell
        ix = np.clip(((x + I_HALF) * ncell).astype(np.int64), 0, ncell - 1)
        iy = np.clip(((y + I_HALF) * ncell).astype(np.int64), 0, ncell - 1)
        return ix * ncell + iy

    # -- gathering ---------------------------------------------------------

    def _gather(self, center, half_width):
        """Points whose cell intersects the Chebyshev box of given half width."""
        cx, cy = center
        ncell = self.ncell
        ix0 = max(int((cx - half_width + I_HALF) * ncell), 0)
        ix1 = min(int((cx + half_width + I_HALF) * ncell), ncell - 1)
        iy0 = max(int((cy - half_width + I_HALF) * ncell), 0)
        iy1 = min(int((cy + half_width + I_HALF) * ncell), ncell - 1)
        chunks = []
        for ix in range(ix0, ix1 + 1):
            lo = self.offsets[ix * ncell + iy0]
            hi = self.offsets[ix * ncell + iy1 + 1]
            if hi > lo:
                chunks.append(self.points[lo:hi])
        if not chunks:
            return np.empty((0, 2))
        return np.concatenate(chunks) if len(chunks) > 1 else chunks[0]

    def _distances(self, center, half_width, shape):
        pts = self._gather(center, half_width)
        return _DIST[shape](pts[:, 0] - center[0], pts[:, 1] - center[1])

    # -- queries -----------------------------------------------------------

    def ball_mass(self, center, r, shape="ball"):
        """Empirical mass of the ball of radius r (or square of side 2r)."""
        if r <= 0:
            return 0.0
        if r >= math.sqrt(2.0):  # diameter of I x I
            return 1.0
        d = self._distances(center, r, shape)
        return int(np.count_nonzero(d <= r)) / self.n

    def radial_counts(self, center, radii, shape="ball"):
        """Sample counts within each radius, one gather for all radii."""
        radii = np.asarray(radii, dtype=np.float64)
        d = self._distances(center, float(radii.max()), shape)
        d.sort()
        return np.searchsorted(d, radii, side="right")

    def annulus_mass(self, center, r, eps, shape="ball"):
        """Mass of the shell with inner radius r and outer radius r + eps."""
        if eps <= 0:
            return 0.0
        outer, inner = self.radial_counts(center, [r + eps, r], shape)
        return (int(outer) - int(inner)) / self.n

    def invert_mass(self, center, target_mass, shape="ball"):
        """Smallest radius whose mass reaches target_mass.

        Exact: the k-th smallest distance to the center, k = ceil(target*n),
        found by progressively widening the gathered neighborhood.
        """
        if not 0.0 < target_mass < 1.0:
            raise ValueError("target mass must be in (0, 1)")
        k = int(math.ceil(target_mass * self.n))
        if k < MIN_BALL_SAMPLES:
            raise ResolutionError(
                f"target mass {target_mass:g} holds only {k} samples "
                f"(floor {MIN_BALL_SAMPLES})"
            )
        half_width = max(target_mass ** 0.5, 2.0 ** -self.cell_bits)
        while True:
            d = self._distances(center, half_width, shape)
            if np.count_nonzero(d <= half_width) >= k:
                break
            if half_width > 2.0:
                raise EstimationError("mass inversion failed to bracket the target")
            half_width *= 2.0
        return float(np.partition(d, k - 1)[k - 1])

    def quadrant_masses(self):
        q = 0.25
        return np.array(
            [self.ball_mass((sx * q, sy * q), q + 1e-12, "square")
             for sx in (-1, 1) for sy in (-1, 1)]
        )

    # -- serialization -----------------------------------------------------

    def save(self, path):
        np.savez_compressed(
            path,
            version=np.int64(1),
            cell_bits=np.int64(self.cell_bits),
            points=self.points,
            meta=np.array(sorted(self.meta.items()), dtype=object),
        )

    @classmethod
    def load(cls, path):
        with np.load(path, allow_pickle=True) as z:
            if int(z["version"]) != 1:
                raise ValueError("unsupported snapshot version")
            meta = {k: v for k, v in z["meta"]}
            return cls(z["points"], cell_bits=int(z["cell_bits"]), meta=meta)

    def radial_profile_csv(self, path, center, radii, shape="ball"):
        counts = self.radial_counts(center, radii, shape)
        with open(path, "w", newline="") as f:
            f.write("radius,mass\r\n")
            for r, c in zip(radii, counts):
                f.write(f"{r!r},{c / self.n!r}\r\n")


def _lorenz_sample(params, n, burn_in, gen):
    x0 = gen.uniform(-I_HALF, I_HALF)
    y0 = gen.uniform(-I_HALF, I_HALF)
    a = params
    x0, y0, ok = _kernels.lorenz_burn(x0, y0, burn_in, a.theta, a.alpha, a.beta,
                                      a.g_kappa, a.g_c)
    if not ok:
        return np.empty((0, 2))
    xs = np.empty(n)
    ys = np.empty(n)
    nvalid = _kernels.lorenz_orbit(x0, y0, n, a.theta, a.alpha, a.beta,
                                   a.g_kappa, a.g_c, xs, ys)
    if nvalid < n:
        warnings.warn(f"orbit hit the singular line, truncated to {nvalid} samples")
    return np.stack([xs[:nvalid], ys[:nvalid]], axis=1)


def _baker_state(gen, burn=64):
    """Random baker state after enough steps to contract the fiber fully."""
    w = int(gen.integers(0, 2 ** 64, dtype=np.uint64))
    y = gen.uniform(-I_HALF, I_HALF)
    bits = rng.bit_words(gen, burn)
    for k in range(burn):
        y = 0.5 * y + (0.25 if (w >> 63) & 1 else -0.25)
        w = ((((w << 1) & (2 ** 64 - 1)) | ((int(bits[k >> 6]) >> (k & 63)) & 1))
             ^ (1 << 63))
    return np.uint64(w), y


def _baker_sample(n, burn_in, gen):
    words = rng.bit_words(gen, n)
    w0, y0 = _baker_state(gen)
    xs = np.empty(n)
    ys = np.empty(n)
    _kernels.baker_orbit(w0, y0, n, words, xs, ys)
    return np.stack([xs, ys], axis=1)


def _doubling_sample(n, burn_in, gen):
    words = rng.bit_words(gen, n)
    w0 = np.uint64(gen.integers(0, 2 ** 64, dtype=np.uint64))
    xs = np.empty(n)
    _kernels.doubling_orbit(w0, n, words, xs)
    return np.stack([xs, np.zeros(n)], axis=1)


def build_empirical_measure(map_kind, params, n, burn_in=10_000, seed=0,
                            ensemble=1, cell_bits=10):
    """Monte Carlo surrogate for the invariant measure.

    One long orbit per ensemble member (member k uses stream (seed, k)),
    merged into a single point buffer.  Deterministic given the seed.
    """
    if n < 1_000:
        raise ValueError("n too small for a meaningful empirical measure")
    per = n // ensemble
    parts = []
    for k in range(ensemble):
        gen = rng.stream(seed, k)
        if map_kind == "lorenz":
            parts.append(_lorenz_sample(params, per, burn_in, gen))
        elif map_kind == "baker":
            parts.append(_baker_sample(per, burn_in, gen))
        elif map_kind == "doubling":
            parts.append(_doubling_sample(per, burn_in, gen))
        else:
            raise ValueError(f"unknown map kind {map_kind!r}")
    pts = np.concatenate(parts) if len(parts) > 1 else parts[0]
    meta = {
        "map_kind": map_kind,
        "params": params.digest() if params is not None else "none",
        "n": str(len(pts)),
        "seed": str(seed),
        "ensemble": str(ensemble),
    }
    return EmpiricalMeasure(pts, cell_bits=cell_bits, meta=meta)


# -- Ulam method for the 1D acim ------------------------------------------


@dataclass
class UlamDensity:
    """Histogram acim on `bins` equal cells of I, normalized as a density."""

    bins: int
    density: np.ndarray          # density values, mean 1 over I
    residual: float              # L1 invariance residual of the result
    method: str                  # "power-iteration" or "orbit-histogram"

    @property
    def weights(self):
        return self.density / self.bins

    def l1_distance(self, other):
        a = self.density
        b = other.density
        if other.bins != self.bins:
            if other.bins % self.bins == 0:
                b = other.density.reshape(self.bins, -1).mean(axis=1)
            elif self.bins % other.bins == 0:
                a = self.density.reshape(other.bins, -1).mean(axis=1)
                return float(np.abs(a - b).mean())
            else:
                raise ValueError("bin counts are not nested")
        return float(np.abs(a - b).mean())


def _branch_edges_lorenz(params, edges):
    """Pre-image edges of the y-grid under the two monotone branches of T."""
    th, a = params.theta, params.alpha
    out = []
    # right branch: y = th*x^a - 1/2 increasing on (0, 1/2]
    y_lo, y_hi = -I_HALF, th * 0.5 ** a - I_HALF
    yy = np.clip(edges, y_lo, y_hi)
    out.append(((yy + I_HALF) / th) ** (1.0 / a))
    # left branch: y = -th*|x|^a + 1/2 increasing on [-1/2, 0)
    y_lo, y_hi = -th * 0.5 ** a + I_HALF, I_HALF
    yy = np.clip(edges, y_lo, y_hi)
    out.append(-(((I_HALF - yy) / th) ** (1.0 / a)))
    return out


def _branch_edges_doubling(edges):
    u = edges + I_HALF  # [0, 1]
    return [u / 2.0 - I_HALF, u / 2.0]  # second branch shifted into [0, 1/2]


def ulam_matrix(map_kind, params, bins):
    """Row-stochastic Ulam matrix P[i, j] = m(cell_i ∩ T^{-1} cell_j) / m(cell_i)."""
    edges = np.linspace(-I_HALF, I_HALF, bins + 1)
    if map_kind == "lorenz":
        branch_edges = _branch_edges_lorenz(params, edges)
    elif map_kind == "doubling":
        branch_edges = _branch_edges_doubling(edges)
    else:
        raise ValueError("ulam matrix supports the 1D maps only")
    cell = 1.0 / bins
    rows, cols, vals = [], [], []
    for be in branch_edges:
        for j in range(bins):
            lo, hi = be[j], be[j + 1]
            if hi - lo <= 0.0:
                continue
            i0 = min(int((lo + I_HALF) / cell), bins - 1)
            i1 = min(int((hi + I_HALF) / cell), bins - 1)
            for i in range(i0, i1 + 1):
                a = max(lo, -I_HALF + i * cell)
                b = min(hi, -I_HALF + (i + 1) * cell)
                if b > a:
                    rows.append(i)
                    cols.append(j)
                    vals.append((b - a) / cell)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(bins, bins))


def ulam_acim(map_kind, params, bins=1024, n=10 ** 6, tol=1e-10, max_iter=20_000,
              seed=0):
    """Fixed point of the discretized transfer operator.

    Power iteration on the Ulam matrix; if it fails to converge, falls
    back to an orbit histogram of length n and flags the result.
    """
    if bins < 64 or bins > 8192 or bins & (bins - 1):
        raise ValueError("bins must be a power of two in [64, 8192]")
    P = ulam_matrix(map_kind, params, bins)
    PT = P.T.tocsr()
    rho = np.full(bins, 1.0 / bins)
    for _ in range(max_iter):
        new = PT @ rho
        new /= new.sum()
        resid = np.abs(new - rho).sum()
        rho = new
        if resid <= tol:
            return UlamDensity(bins, rho * bins, float(resid), "power-iteration")
    warnings.warn("Ulam power iteration did not converge; using orbit histogram")
    gen = rng.stream(seed, 0)
    if map_kind == "lorenz":
        xs = _lorenz_sample(params, n, 1000, gen)[:, 0]
    else:
        xs = _doubling_sample(n, 1000, gen)[:, 0]
    hist, _ = np.histogram(xs, bins=bins, range=(-I_HALF, I_HALF))
    rho = hist / hist.sum()
    resid = float(np.abs(PT @ rho - rho).sum())
    return UlamDensity(bins, rho * bins, resid, "orbit-histogram")


# -- local dimension -------------------------------------------------------


@dataclass
class LocalDimensionEstimate:
    center: tuple
    radii: np.ndarray
    masses: np.ndarray
    slope: float
    intercept: float        # log of the mass prefactor
    r_squared: float

    @property
    def prefactor(self):
        return math.exp(self.intercept)


def local_dimension(m: EmpiricalMeasure, center, r_max=0.1, r_min=None,
                    shape="ball"):
    """Log-log slope of ball mass against radius over a dyadic radius grid."""
    if r_min is None:
        # the sample-count floor prunes whatever the measure cannot resolve
        r_min = r_max / 2 ** 16
    n_levels = int(math.floor(math.log2(r_max / r_min))) + 1
    if n_levels < 8:
        raise ValueError("need at least 8 dyadic radii between r_min and r_max")
    radii = r_max * 0.5 ** np.arange(n_levels)
    counts = m.radial_counts(center, radii, shape)
    keep = counts >= MIN_BALL_SAMPLES
    if keep.sum() < 4:
        raise EstimationError("fewer than 4 radii resolve the minimum sample count")
    radii, counts = radii[keep], counts[keep]
    masses = counts / m.n
    fit = linregress(np.log(radii), np.log(masses))
    return LocalDimensionEstimate(tuple(center), radii, masses,
                                  float(fit.slope), float(fit.intercept),
                                  float(fit.rvalue ** 2))

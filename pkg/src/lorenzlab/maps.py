"""The section maps: 1D quotient map T, 2D skew product F, baker reference
map, and the flow return time.

These are the exact scalar definitions used by tests and small-scale
work.  The long-orbit Monte Carlo paths live in `_kernels` (numba) but
must agree with these bit for bit on the Lorenz maps; the baker/doubling
statistical kernels use a symbolic bit-stream base instead (see
`rng.bit_words`).
"""

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .params import ModelParams, I_HALF


class SingularPointError(ValueError):
    """The map is undefined on the line x = 0."""


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class SectionPoint:
    x: float
    y: float = 0.0

    def __post_init__(self):
        if abs(self.x) > I_HALF or abs(self.y) > I_HALF:
            raise DomainError(f"({self.x}, {self.y}) outside I x I")

    @property
    def singular(self) -> bool:
        return self.x == 0.0


def _pow_abs(x: float, a: float) -> float:
    """|x|^a guarded against log underflow near the singular line."""
    ax = abs(x)
    if ax < 1e-300:
        return 0.0
    return math.exp(a * math.log(ax))


def lorenz_T(params: ModelParams, x: float) -> float:
    """One-dimensional Lorenz-like map on I \\ {0}."""
    if x == 0.0:
        raise SingularPointError("T undefined at x = 0")
    if abs(x) > I_HALF:
        raise DomainError(f"x = {x} outside I")
    xa = _pow_abs(x, params.alpha)
    if x > 0.0:
        return params.theta * xa + params.b0
    return -params.theta * xa + params.b1


def lorenz_T_prime(params: ModelParams, x: float) -> float:
    """Derivative of T; > 1 everywhere on the domain, blows up at 0."""
    if x == 0.0:
        raise SingularPointError("T' undefined at x = 0")
    if abs(x) > I_HALF:
        raise DomainError(f"x = {x} outside I")
    return params.theta * params.alpha * _pow_abs(x, params.alpha - 1.0)


def lorenz_G(params: ModelParams, x: float, y: float) -> float:
    """Stable-direction coordinate of F: affine in y with slope ~ |x|^beta."""
    if x == 0.0:
        raise SingularPointError("G undefined on x = 0")
    return params.g_kappa * y * _pow_abs(x, params.beta) + math.copysign(params.g_c, x)


def lorenz_F(params: ModelParams, p: SectionPoint) -> SectionPoint:
    """Two-dimensional Poincare map F(x, y) = (T(x), G(x, y))."""
    return SectionPoint(lorenz_T(params, p.x), lorenz_G(params, p.x, p.y))


def baker_F(p: SectionPoint) -> SectionPoint:
    """Volume-preserving reference skew product on I x I.

    Base: 2x mod 1 wrapped back into [-1/2, 1/2).  Fiber: y/2 - 1/4 on
    x < 0, y/2 + 1/4 on x >= 0.  Piecewise affine with Jacobian 1.
    """
    newx = 2.0 * p.x
    if newx >= I_HALF:
        newx -= 1.0
    elif newx < -I_HALF:
        newx += 1.0
    if p.x < 0.0:
        newy = 0.5 * p.y - 0.25
    else:
        newy = 0.5 * p.y + 0.25
    return SectionPoint(newx, newy)


def baker_preimage_area(x_lo, x_hi, y_lo, y_hi) -> float:
    """Exact Lebesgue area of baker_F^{-1}(R) for an axis-aligned rectangle.

    Each inverse branch halves the x-extent and doubles the admissible
    y-extent; the fiber images [-1/2, 0) and [0, 1/2) tile I, so the two
    contributions add back to the area of R.  Computed piecewise-affine,
    no sampling.
    """
    if not (-I_HALF <= x_lo < x_hi <= I_HALF and -I_HALF <= y_lo < y_hi <= I_HALF):
        raise DomainError("rectangle outside I x I")
    width = x_hi - x_lo
    area = 0.0
    # left inverse branch: forward fiber image is [-1/2, 0)
    overlap = min(y_hi, 0.0) - max(y_lo, -I_HALF)
    if overlap > 0.0:
        area += (width / 2.0) * (2.0 * overlap)
    # right inverse branch: forward fiber image is [0, 1/2)
    overlap = min(y_hi, I_HALF) - max(y_lo, 0.0)
    if overlap > 0.0:
        area += (width / 2.0) * (2.0 * overlap)
    return area


def return_time(params: ModelParams, p: SectionPoint) -> float:
    """Roof function h = -(1/lambda1) log|x| + tau0 of the suspension flow."""
    if p.x == 0.0:
        raise SingularPointError("return time diverges at x = 0")
    return -math.log(abs(p.x)) / params.lambda1 + params.tau0


class OrbitTruncated(Exception):
    """An iterate hit the singular line exactly; the orbit stops there."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"orbit hit x = 0 at step {step}")


def iterate_orbit(map_kind: str, params, p0: SectionPoint, n: int) -> Iterator[SectionPoint]:
    """Stream p0, F(p0), ..., F^(n-1)(p0).

    Exact float composition of the scalar maps; deterministic.  An exact
    singular hit raises OrbitTruncated carrying the step index, by policy
    (perturbing would silently bias statistics).
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    p = p0
    for k in range(n):
        if map_kind == "lorenz" and p.singular:
            raise OrbitTruncated(k)
        yield p
        if k == n - 1:
            break
        if map_kind == "lorenz":
            p = lorenz_F(params, p)
        elif map_kind == "baker":
            p = baker_F(p)
        elif map_kind == "doubling":
            p = SectionPoint(baker_F(p).x, 0.0)
        else:
            raise ValueError(f"unknown map kind {map_kind!r}")

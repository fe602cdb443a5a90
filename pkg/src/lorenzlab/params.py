"""Model parameters for the geometric Lorenz section maps.

The construction starts from a linear saddle with eigenvalues
lambda1 > 0 > lambda3 >= lambda2 and hangs two affine branch maps off the
logarithmic passage past the saddle.  Everything downstream (1D quotient
map, 2D section map, roof function) is determined by the constants held
here, so validation lives here too.
"""

from dataclasses import dataclass, asdict
import hashlib
import json

I_HALF = 0.5  # section is I x I with I = [-1/2, 1/2]


class ParameterError(ValueError):
    """A model constant violates one of the construction's inequalities."""


@dataclass(frozen=True)
class ModelParams:
    """Constants of the geometric Lorenz system.

    alpha = -lambda3/lambda1 in (1/2, 1) controls the branch exponent,
    beta = -lambda2/lambda1 > 1 the fiber contraction exponent.  theta is
    the affine branch slope, b0/b1 the branch offsets, g_kappa/g_c the
    affine constants of the stable-direction maps, tau0 the bounded part
    of the flow return time.
    """

    lambda1: float = 1.0
    lambda2: float = -2.0
    lambda3: float = -0.6
    theta: float = 1.4
    b0: float = -0.5
    b1: float = 0.5
    g_kappa: float = 1.0
    g_c: float = 0.25
    tau0: float = 1.0

    def __post_init__(self):
        self.validate()

    @property
    def alpha(self) -> float:
        return -self.lambda3 / self.lambda1

    @property
    def beta(self) -> float:
        return -self.lambda2 / self.lambda1

    def validate(self):
        l1, l2, l3 = self.lambda1, self.lambda2, self.lambda3
        if not (0 < l1 / 2 <= -l3 < l1 < -l2):
            raise ParameterError(
                "eigenvalue chain 0 < lambda1/2 <= -lambda3 < lambda1 < -lambda2 "
                f"violated by (lambda1, lambda2, lambda3)=({l1}, {l2}, {l3})"
            )
        a = self.alpha
        if not (0.5 < a < 1.0):
            raise ParameterError(f"alpha = {a} outside (1/2, 1)")
        if not self.beta > 1.0:
            raise ParameterError(f"beta = {self.beta} not > 1")
        if not self.theta * 0.5 ** a < 1.0:
            raise ParameterError(
                f"theta*(1/2)^alpha = {self.theta * 0.5 ** a} not < 1 "
                "(branch image would leave I)"
            )
        if not self.theta * a * 2.0 ** (1.0 - a) > 1.0:
            raise ParameterError(
                f"theta*alpha*2^(1-alpha) = {self.theta * a * 2 ** (1 - a)} not > 1 "
                "(map would fail uniform expansion)"
            )
        # branch limits at the discontinuity must land on the endpoints of I
        if self.b0 != -I_HALF or self.b1 != I_HALF:
            raise ParameterError(
                "branch offsets must satisfy b0 = -1/2, b1 = +1/2 so that the "
                "lateral limits at 0 hit the endpoints of I"
            )
        # fiber images: |g_kappa*y*|x|^beta + g_c| <= 1/2 over y in I, |x| <= 1/2,
        # and the two branch images must be disjoint intervals
        half_width = self.g_kappa * I_HALF * 0.5 ** self.beta
        if self.g_c - half_width <= 0.0:
            raise ParameterError("fiber branch images overlap across x = 0")
        if self.g_c + half_width > I_HALF:
            raise ParameterError("fiber branch image leaves I")
        if self.g_kappa * 0.5 ** self.beta >= 1.0:
            raise ParameterError("fiber map is not contracting")
        if self.tau0 <= 0.0:
            raise ParameterError("tau0 must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Stable hash of the constants, used for report provenance."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


DEFAULT_PARAMS = ModelParams()


@dataclass(frozen=True)
class BakerParams:
    """The fixed volume-preserving skew product used as reference system.

    Doubling base on I, half-contracting fiber with offsets -1/4 (x < 0)
    and +1/4 (x >= 0).  Piecewise-affine Jacobian is exactly 1, so the map
    preserves 2D Lebesgue measure.
    """

    def digest(self) -> str:
        return "baker-doubling-quarter"

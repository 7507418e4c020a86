"""Claim drivers, line models and their cumulant machinery.

A *line* is a reserve process ``x + p*t - S(t)`` where ``S`` is a claim
driver shared by both lines of the business.  Three drivers are
supported:

* ``CompoundPoissonExp``: compound Poisson claims at rate ``lam`` with
  exponential sizes of rate ``mu`` (mean ``1/mu``),
* ``StandardBrownian``: standard Brownian motion (a diffusion limit),
* ``Renewal``: claims of arbitrary distribution at renewal epochs; only
  Lundberg exponents and simulation are available for it.

The cumulant of a line is ``kappa(theta) = log E exp(theta*(p - S(1)))``
per unit time.  Everything downstream (finite-time expansions, cone
partitions, two-line decompositions) is expressed through ``kappa``, its
derivatives, its Legendre transform and exponential tilting, so those
live here.  Closed forms are authoritative for the two concrete drivers;
a bracketed root solve runs alongside them and any disagreement beyond
1e-10 raises InternalInconsistency rather than silently picking a side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .errors import (
    ConfigError,
    InternalInconsistency,
    InvalidProportions,
    NoAdjustment,
    NoConjugate,
    OutOfDomain,
    OutOfRange,
    UnsupportedDriver,
)
from .numerics import DEFAULT_TOL, ToleranceConfig, root_solve

__all__ = [
    "CompoundPoissonExp",
    "StandardBrownian",
    "DistSpec",
    "exponential_dist",
    "deterministic_dist",
    "Renewal",
    "ClaimDriver",
    "LineModel",
    "TwoLineModel",
    "TiltedModel",
    "AdjustmentData",
    "SaddleData",
    "scale_to_canonical",
    "line_adjustment",
    "adjustment",
    "tilt",
    "saddle",
    "joint_cumulant",
    "renewal_adjustment",
]

_CROSS_CHECK_TOL = 1e-10


@dataclass(frozen=True)
class CompoundPoissonExp:
    """Compound Poisson driver: rate ``lam``, Exp(``mu``) claim sizes."""

    lam: float
    mu: float

    def __post_init__(self) -> None:
        if self.lam <= 0 or self.mu <= 0:
            raise ConfigError("claim rate and size rate must be positive")


@dataclass(frozen=True)
class StandardBrownian:
    """Standard Brownian claim driver (zero drift, unit variance)."""


@dataclass(frozen=True)
class DistSpec:
    """A nonnegative distribution for the renewal driver.

    Carries the moment generating function with the supremum of its
    domain, a vectorised sampler, and (optionally) the exponentially
    tilted family member used for importance sampling.
    """

    name: str
    mean: float
    mgf: Callable[[float], float]
    mgf_sup: float
    sample: Callable[[np.random.Generator, int], np.ndarray]
    tilted: Callable[[float], "DistSpec"] | None = None

    def __post_init__(self) -> None:
        if self.mean <= 0:
            raise ConfigError(f"{self.name}: mean must be positive")


def exponential_dist(rate: float) -> DistSpec:
    """Exponential distribution of the given rate, tiltable within (-inf, rate)."""
    if rate <= 0:
        raise ConfigError("exponential rate must be positive")

    def _tilt(theta: float) -> DistSpec:
        if theta >= rate:
            raise OutOfDomain(f"cannot tilt Exp({rate:g}) by {theta:g}")
        return exponential_dist(rate - theta)

    return DistSpec(
        name=f"exp({rate:g})",
        mean=1.0 / rate,
        mgf=lambda th: rate / (rate - th) if th < rate else math.inf,
        mgf_sup=rate,
        sample=lambda rng, n: rng.exponential(1.0 / rate, n),
        tilted=_tilt,
    )


def deterministic_dist(value: float) -> DistSpec:
    """Point mass at ``value``; invariant under exponential tilting."""
    if value <= 0:
        raise ConfigError("deterministic value must be positive")
    return DistSpec(
        name=f"det({value:g})",
        mean=value,
        mgf=lambda th: math.exp(th * value),
        mgf_sup=math.inf,
        sample=lambda rng, n: np.full(n, value),
        tilted=lambda theta: deterministic_dist(value),
    )


@dataclass(frozen=True)
class Renewal:
    """Renewal driver: claims ``claim`` at epochs with gaps ``interarrival``."""

    interarrival: DistSpec
    claim: DistSpec


ClaimDriver = Union[CompoundPoissonExp, StandardBrownian, Renewal]


@dataclass(frozen=True)
class LineModel:
    """One line of business: premium rate ``p`` against the shared driver."""

    driver: ClaimDriver
    p: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.p):
            raise ConfigError("premium rate must be finite")
        # A tilted Brownian line may carry a negative drift coefficient,
        # but a premium-paying jump line must earn at a positive rate.
        if self.p <= 0 and not isinstance(self.driver, StandardBrownian):
            raise ConfigError("premium rate must be positive")

    # -- cumulant and derivatives -------------------------------------

    def _require_levy(self) -> None:
        if isinstance(self.driver, Renewal):
            raise UnsupportedDriver("cumulant calculus is unavailable for the renewal driver")

    @property
    def theta_lower(self) -> float:
        """Lower endpoint of the cumulant domain."""
        self._require_levy()
        if isinstance(self.driver, CompoundPoissonExp):
            return -self.driver.mu
        return -math.inf

    @property
    def v_lower(self) -> float:
        """Limit of kappa' at the lower domain endpoint (-inf for both
        concrete drivers, so every upper-cone ray is admissible)."""
        self._require_levy()
        return -math.inf

    def kappa(self, theta: float) -> float:
        self._require_levy()
        d = self.driver
        if isinstance(d, CompoundPoissonExp):
            if theta <= -d.mu:
                raise OutOfDomain(f"theta={theta:g} at or below -mu={-d.mu:g}")
            return self.p * theta - d.lam * theta / (d.mu + theta)
        return 0.5 * theta * theta + self.p * theta

    def kappa_prime(self, theta: float) -> float:
        self._require_levy()
        d = self.driver
        if isinstance(d, CompoundPoissonExp):
            if theta <= -d.mu:
                raise OutOfDomain(f"theta={theta:g} at or below -mu={-d.mu:g}")
            s = d.mu + theta
            return self.p - d.lam * d.mu / (s * s)
        return theta + self.p

    def kappa_double_prime(self, theta: float) -> float:
        self._require_levy()
        d = self.driver
        if isinstance(d, CompoundPoissonExp):
            if theta <= -d.mu:
                raise OutOfDomain(f"theta={theta:g} at or below -mu={-d.mu:g}")
            s = d.mu + theta
            return 2.0 * d.lam * d.mu / (s * s * s)
        return 1.0

    @property
    def drift(self) -> float:
        """Mean reserve growth per unit time, kappa'(0)."""
        if isinstance(self.driver, Renewal):
            return self.p * self.driver.interarrival.mean - self.driver.claim.mean
        return self.kappa_prime(0.0)

    @property
    def has_net_profit(self) -> bool:
        return self.drift > 0.0


@dataclass(frozen=True)
class TwoLineModel:
    """Two lines with a common claim driver and ordered premiums p1 > p2."""

    driver: ClaimDriver
    p1: float
    p2: float

    def __post_init__(self) -> None:
        if self.p2 <= 0:
            raise ConfigError("premium rates must be positive")
        if not self.p1 > self.p2:
            raise ConfigError(
                f"premium rates must satisfy p1 > p2, got p1={self.p1:g}, p2={self.p2:g}"
            )

    @property
    def line1(self) -> LineModel:
        return LineModel(self.driver, self.p1)

    @property
    def line2(self) -> LineModel:
        return LineModel(self.driver, self.p2)

    @property
    def a_bar(self) -> float:
        """Supremum of admissible ray slopes, 1 + (p1-p2)/v_lower."""
        vl = self.line2.v_lower
        if math.isinf(vl):
            return 1.0
        return 1.0 + (self.p1 - self.p2) / vl


@dataclass(frozen=True)
class TiltedModel:
    """A line model under the exponential change of measure of size ``shift``."""

    base: LineModel
    shift: float
    model: LineModel


@dataclass(frozen=True)
class AdjustmentData:
    """Lundberg exponents and constants of a two-line model.

    gamma1/gamma2 are the per-line adjustment coefficients, gamma3 the
    largest root of kappa1(-s) = kappa1(-gamma2) (equal to gamma2 when
    kappa1'(-gamma2) <= 0) and gamma_tilde = gamma3 - gamma2.  zeta_i
    coincide with gamma_i under net profit.  C1/C2 are the Cramer-Lundberg
    prefactors and C2_hat the prefactor of the simultaneous-ruin tail on
    its lower cone.
    """

    gamma1: float
    gamma2: float
    gamma3: float
    gamma_tilde: float
    zeta1: float
    zeta2: float
    C1: float
    C2: float
    C2_hat: float

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma2 < self.gamma1):
            raise InternalInconsistency(
                f"adjustment coefficients must satisfy 0 < gamma2 < gamma1, "
                f"got {self.gamma2:g}, {self.gamma1:g}"
            )
        if self.gamma3 < self.gamma2 or self.gamma_tilde < 0:
            raise InternalInconsistency("gamma3 must not be below gamma2")
        for c in (self.C1, self.C2):
            if not (0.0 < c <= 1.0):
                raise InternalInconsistency(f"Cramer constant {c:g} outside (0, 1]")


@dataclass(frozen=True)
class SaddleData:
    """Saddle point of a line at velocity ``v``: kappa'(theta_v) = -v.

    theta_conj is the conjugate point on the other flank of kappa with
    the same cumulant value, kstar the Legendre transform kappa*(-v),
    and kpp the curvature kappa''(theta_v).
    """

    v: float
    theta_v: float
    theta_conj: float
    kstar: float
    kpp: float

    def __post_init__(self) -> None:
        if self.kstar < -1e-12:
            raise InternalInconsistency(f"kappa*(-v) = {self.kstar:g} negative")
        if not self.theta_conj >= self.theta_v:
            raise InternalInconsistency("conjugate point left of the saddle")
        if self.kpp <= 0:
            raise InternalInconsistency("kappa'' must be positive at the saddle")


def scale_to_canonical(
    u1: float,
    u2: float,
    c1: float,
    c2: float,
    delta1: float,
    delta2: float,
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Reduce proportional-split reserves ``u_i + c_i t - delta_i S(t)``
    to canonical form ``x_i + p_i t - S(t)`` by dividing line ``i`` by
    ``delta_i``.  Returns ``((x1, x2), (p1, p2))``.
    """
    if min(delta1, delta2) <= 0.0:
        raise InvalidProportions(f"proportions must be positive, got ({delta1:g}, {delta2:g})")
    if abs(delta1 + delta2 - 1.0) > 1e-12:
        raise InvalidProportions(f"proportions must sum to 1, got {delta1 + delta2!r}")
    if min(u1, u2) < 0.0:
        raise ConfigError("initial reserves must be nonnegative")
    return (u1 / delta1, u2 / delta2), (c1 / delta1, c2 / delta2)


def _cross_check(label: str, closed: float, solved: float) -> float:
    if abs(closed - solved) > _CROSS_CHECK_TOL * max(1.0, abs(closed)):
        raise InternalInconsistency(
            f"{label}: closed form {closed!r} and root solve {solved!r} disagree"
        )
    return closed


def line_adjustment(model: LineModel, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[float, float]:
    """Adjustment coefficient and Cramer constant ``(gamma, C)`` of a line.

    gamma is the positive root of kappa(-gamma) = 0 and
    C = -kappa'(0)/kappa'(-gamma).  Requires net profit.
    """
    model._require_levy()
    if not model.has_net_profit:
        raise NoAdjustment(f"net profit violated: drift {model.drift:g} <= 0")
    d = model.driver
    if isinstance(d, CompoundPoissonExp):
        gamma_closed = d.mu - d.lam / model.p
        c_closed = d.lam / (d.mu * model.p)
        hi = d.mu * (1.0 - 1e-14)
    else:
        gamma_closed = 2.0 * model.p
        c_closed = 1.0
        hi = 4.0 * model.p
    gamma_solved = root_solve(
        lambda g: model.kappa(-g), 0.5 * gamma_closed, min(1.5 * gamma_closed, hi),
        tol=tol.root_abs_tol, max_iter=tol.max_iterations,
    )
    gamma = _cross_check("adjustment coefficient", gamma_closed, gamma_solved)
    c_general = -model.kappa_prime(0.0) / model.kappa_prime(-gamma)
    c = _cross_check("Cramer constant", c_closed, c_general)
    return gamma, c


def _gamma3(model2: TwoLineModel, gamma2: float, tol: ToleranceConfig) -> float:
    """Largest root of kappa1(-s) = kappa1(-gamma2)."""
    line1 = model2.line1
    slope_at_g2 = line1.kappa_prime(-gamma2)
    if slope_at_g2 <= 0.0:
        return gamma2
    d = model2.driver
    if isinstance(d, CompoundPoissonExp):
        closed = d.mu * (1.0 - model2.p2 / model2.p1)
        hi = d.mu * (1.0 - 1e-14)
    else:
        closed = 2.0 * (model2.p1 - model2.p2)
        hi = 4.0 * closed
    target = line1.kappa(-gamma2)
    lo = gamma2 * (1.0 + 1e-9)
    if closed <= lo * (1.0 + 1e-9):
        # nearly coincident roots: the bracketed solve has no resolution
        # inside the guard band, and the elementary expression is exact
        return max(closed, gamma2)
    solved = root_solve(
        lambda s: line1.kappa(-s) - target, lo, hi,
        tol=tol.root_abs_tol, max_iter=tol.max_iterations,
    )
    return _cross_check("gamma3", closed, solved)


def adjustment(model2: TwoLineModel, tol: ToleranceConfig = DEFAULT_TOL) -> AdjustmentData:
    """All Lundberg exponents and tail constants of a two-line model."""
    gamma1, c1 = line_adjustment(model2.line1, tol)
    gamma2, c2 = line_adjustment(model2.line2, tol)
    gamma3 = _gamma3(model2, gamma2, tol)
    if gamma3 > gamma2 * (1.0 + 3e-9):
        c2_hat = -c2 * model2.line1.kappa_prime(-gamma2) / model2.line1.kappa_prime(-gamma3)
    else:
        # Coincident or nearly coincident case: simultaneous and
        # single-line tails share both exponent and constant (they
        # sandwich each other), and the derivative ratio in the formula
        # above tends to -1 as the roots merge.  The band matches the
        # widest value _gamma3 can return without a verified bracket.
        c2_hat = c2
    return AdjustmentData(
        gamma1=gamma1,
        gamma2=gamma2,
        gamma3=gamma3,
        gamma_tilde=gamma3 - gamma2,
        zeta1=gamma1,
        zeta2=gamma2,
        C1=c1,
        C2=c2,
        C2_hat=c2_hat,
    )


def tilt(model: LineModel, c: float) -> TiltedModel:
    """Exponentially tilt a line by ``c``: the tilted cumulant is
    kappa(theta + c) - kappa(c).

    For the compound Poisson driver this maps (lam, mu) to
    (lam*mu/(mu+c), mu+c) with the premium unchanged; for Brownian it
    shifts the premium to p + c.
    """
    d = model.driver
    if isinstance(d, CompoundPoissonExp):
        if c <= -d.mu:
            raise OutOfDomain(f"tilt {c:g} at or below -mu={-d.mu:g}")
        new = LineModel(CompoundPoissonExp(d.lam * d.mu / (d.mu + c), d.mu + c), model.p)
    elif isinstance(d, StandardBrownian):
        new = LineModel(StandardBrownian(), model.p + c)
    else:
        raise UnsupportedDriver("tilting the renewal driver is handled by the simulator")
    return TiltedModel(base=model, shift=c, model=new)


def saddle(model: LineModel, v: float, tol: ToleranceConfig = DEFAULT_TOL) -> SaddleData:
    """Saddle point data of one line at downward velocity ``v > 0``.

    Solves kappa'(theta_v) = -v, finds the conjugate point theta'_v with
    kappa(theta'_v) = kappa(theta_v) on the increasing flank, and returns
    the Legendre transform kappa*(-v) = -v*theta_v - kappa(theta_v).
    """
    model._require_levy()
    if v <= 0:
        raise OutOfRange(f"saddle velocity must be positive, got {v:g}")
    vl = model.v_lower
    if not math.isinf(vl) and -v <= vl:
        raise OutOfRange(f"velocity {v:g} beyond the cumulant's reach")
    d = model.driver
    if isinstance(d, CompoundPoissonExp):
        theta_closed = -d.mu + math.sqrt(d.lam * d.mu / (model.p + v))
        lo_dom = -d.mu
    else:
        theta_closed = -(v + model.p)
        lo_dom = -math.inf
    # Root-solve cross-check on a bracket around the closed form.
    width = max(1.0, abs(theta_closed))
    lo = theta_closed - 0.5 * width
    if not math.isinf(lo_dom):
        lo = max(lo, lo_dom + (theta_closed - lo_dom) * 1e-8)
    theta_solved = root_solve(
        lambda th: model.kappa_prime(th) + v, lo, theta_closed + 0.5 * width,
        tol=tol.root_abs_tol, max_iter=tol.max_iterations,
    )
    theta_v = _cross_check("saddle point", theta_closed, theta_solved)

    k_at = model.kappa(theta_v)
    # Conjugate: same kappa value on the increasing flank, right of the
    # minimiser theta_m (where kappa' = 0).
    if isinstance(d, CompoundPoissonExp):
        theta_m = -d.mu + math.sqrt(d.lam * d.mu / model.p)
    else:
        theta_m = -model.p
    if theta_v >= theta_m:
        # v = -kappa'(0) style degenerate call: conjugate equals the saddle.
        theta_conj = theta_v
    else:
        hi = theta_m + max(1.0, theta_m - theta_v)
        for _ in range(200):
            if model.kappa(hi) > k_at:
                break
            hi = theta_m + 2.0 * (hi - theta_m)
        else:
            raise NoConjugate(f"no conjugate point for v={v:g}")
        theta_conj = root_solve(
            lambda th: model.kappa(th) - k_at, theta_m, hi,
            tol=tol.root_abs_tol, max_iter=tol.max_iterations,
        )
    return SaddleData(
        v=v,
        theta_v=theta_v,
        theta_conj=theta_conj,
        kstar=-v * theta_v - k_at,
        kpp=model.kappa_double_prime(theta_v),
    )


def joint_cumulant(model2: TwoLineModel, t1: float, t2: float) -> float:
    """Joint cumulant of the two coordinates,
    kappa1(t1 + t2) - t2*(p1 - p2); both coordinates load the same driver
    so only the sum t1 + t2 enters the nonlinear part.
    """
    return model2.line1.kappa(t1 + t2) - t2 * (model2.p1 - model2.p2)


def renewal_adjustment(driver: Renewal, p: float, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Lundberg exponent of a renewal line: the positive root of
    E[exp(-gamma*p*interarrival)] * E[exp(gamma*claim)] = 1.
    """
    if p <= 0:
        raise ConfigError("premium rate must be positive")
    if p * driver.interarrival.mean <= driver.claim.mean:
        raise NoAdjustment(
            f"net profit violated: p*E[interarrival]={p * driver.interarrival.mean:g} "
            f"<= E[claim]={driver.claim.mean:g}"
        )

    def logratio(g: float) -> float:
        m_claim = driver.claim.mgf(g)
        if not math.isfinite(m_claim) or m_claim <= 0:
            return math.inf
        return math.log(driver.interarrival.mgf(-g * p)) + math.log(m_claim)

    sup = driver.claim.mgf_sup
    hi_cap = sup * (1.0 - 1e-12) if math.isfinite(sup) else 1e6
    # Scan geometrically for a sign change; logratio starts negative.
    lo = hi_cap * 1e-9
    if logratio(lo) >= 0:
        lo = hi_cap * 1e-15
    hi = lo
    for _ in range(200):
        hi = min(2.0 * hi, hi_cap)
        val = logratio(hi)
        if math.isfinite(val) and val > 0:
            break
        if hi >= hi_cap:
            raise NoAdjustment("no Lundberg root inside the claim mgf domain")
    else:
        raise NoAdjustment("no Lundberg root inside the claim mgf domain")
    gamma = root_solve(lambda g: logratio(g), lo, hi, tol=tol.root_abs_tol,
                       max_iter=tol.max_iterations)
    if abs(logratio(gamma)) > 1e-8:
        raise NoAdjustment(f"Lundberg residual too large at gamma={gamma:g}")
    return gamma

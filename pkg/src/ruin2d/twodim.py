"""Two-line ruin probabilities: exact values, two-term expansions, and
leading-order asymptotics.

Everything rests on the barrier picture.  With x2 > x1 the claim process
must cross the lower envelope of the two barriers for OR-ruin and the
upper envelope for simultaneous ruin, and the envelopes exchange roles at
the crossing time T.  Conditioning at T (or at the first passage before
T) and removing the exponential overshoot factor by a measure change
turns each probability into a finite-time piece plus a discounted piece
under a tilted law:

    psi_or  = psi_1(x1, T) + psi_2(x2) * [1 - psi_1^(-g2)(x1, T)]
    psi_sim = psi_2(x2, T) + psi_1(x1) * [1 - psi_2^(-g1)(x2, T)]
    psi_and = w_1(x1, T)   + psi_2(x2) * psi_1^(-g2)(x1, T)

These identities are exact for the two concrete drivers because
psi_i(y) e^{g_i y} is constant in y (exponential claims are memoryless at
overshoot; Brownian paths have none), which is also what makes the
two-term expansions here carry explicit constants.

The saddle quantities reuse a shared-driver identity throughout: since
kappa_1' - kappa_2' = p1 - p2, the kappa_i-conjugate of the kappa_2
saddle point at velocity v is obtained by running the one-line saddle
solver on line i at velocity v - (p_i - p_2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

from .cones import ConeLabel, classify, crossing_time, gamma_ray
from .errors import (
    BoundaryRay,
    BoundaryVelocity,
    ConfigError,
    InternalInconsistency,
    OutOfRange,
    UnsupportedDriver,
)
from .finite_time import finite_ruin, ruin_after, ultimate_ruin
from .models import (
    CompoundPoissonExp,
    LineModel,
    Renewal,
    StandardBrownian,
    TwoLineModel,
    adjustment,
    renewal_adjustment,
    saddle,
    tilt,
)
from .numerics import DEFAULT_TOL, ToleranceConfig, normal_cdf, normal_logcdf

__all__ = [
    "Event",
    "RuinQuery",
    "ExpansionTerms",
    "RuinEstimate",
    "exact",
    "two_term_or",
    "two_term_sim",
    "two_term_and",
    "leading",
    "renewal_exponents",
]

Event = Literal["OR", "SIM", "AND", "LINE1", "LINE2"]

_EVENTS = ("OR", "SIM", "AND", "LINE1", "LINE2")
_METHODS = ("exact", "two_term", "leading", "mc")

# Relative half-width of the refusal band around the branch velocities of
# the two-term expansions.
_VELOCITY_BAND = 1e-6

_BROWNIAN_ROUTE_TOL = 1e-8


@dataclass(frozen=True)
class RuinQuery:
    event: Event
    x1: float
    x2: float
    method: str = "exact"

    def __post_init__(self) -> None:
        if self.event not in _EVENTS:
            raise OutOfRange(f"unknown event {self.event!r}")
        if self.method not in _METHODS:
            raise OutOfRange(f"unknown method {self.method!r}")
        for name, x in (("x1", self.x1), ("x2", self.x2)):
            if not (math.isfinite(x) and x >= 0.0):
                raise OutOfRange(f"{name} must be finite and nonnegative, got {x!r}")


@dataclass(frozen=True)
class ExpansionTerms:
    """The two pieces of a Proposition-style expansion, plus the constants
    that entered the second piece."""

    term1: float
    term2: float
    constants: dict
    cone: ConeLabel
    velocity: float

    def __post_init__(self) -> None:
        if self.term1 < -1e-12 or self.term2 < -1e-9:
            raise InternalInconsistency(
                f"expansion terms must be nonnegative, got ({self.term1!r}, {self.term2!r})"
            )
        if self.total > 1.0 + 1e-6:
            raise InternalInconsistency(f"expansion total {self.total!r} exceeds 1")

    @property
    def total(self) -> float:
        return self.term1 + self.term2


@dataclass(frozen=True)
class RuinEstimate:
    value: float
    method: str
    cone: Optional[ConeLabel]
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method == "exact" and not (0.0 <= self.value <= 1.0):
            raise InternalInconsistency(f"exact probability {self.value!r} outside [0, 1]")


def _require_levy(model2: TwoLineModel) -> None:
    if isinstance(model2.driver, Renewal):
        raise UnsupportedDriver("exact two-line values need a Levy driver")


def _survival(model, x: float, t: float, tol: ToleranceConfig) -> tuple[float, float]:
    """P(tau > t) and its quadrature error, avoiding the 1 - psi
    subtraction when ruin is certain and survival itself is the small
    quantity."""
    base = model.model if hasattr(model, "model") else model
    if isinstance(base.driver, CompoundPoissonExp) and base.drift <= 0.0:
        r = ruin_after(model, x, t, tol)
        return r.value, r.quad_err
    r = finite_ruin(model, x, t, tol)
    return 1.0 - r.value, r.quad_err


def _exp_cdf(logcoef: float, z: float) -> float:
    s = logcoef + normal_logcdf(z)
    return math.exp(s) if s < 700.0 else math.inf


def _brownian_closed(model2: TwoLineModel, x1: float, x2: float, T: float) -> dict:
    """Reflection-formula expressions for the three probabilities, used
    as an independent route against the conditioning assembly."""
    p1, p2 = model2.p1, model2.p2
    rt = math.sqrt(T)

    def a(x: float, p: float) -> float:
        return (x + p * T) / rt

    q1 = p1 - 2.0 * p2
    psi_or = (
        normal_cdf(-a(x1, p1))
        + _exp_cdf(-2.0 * p1 * x1, a(-x1, p1))
        + _exp_cdf(-2.0 * p2 * x2, a(x1, q1))
        - _exp_cdf(-2.0 * p2 * x2 - 2.0 * x1 * q1, a(-x1, q1))
    )
    q2 = p2 - 2.0 * p1
    psi_sim = (
        normal_cdf(-a(x2, p2))
        + _exp_cdf(-2.0 * p2 * x2, a(-x2, p2))
        + _exp_cdf(-2.0 * p1 * x1, a(x2, q2))
        - _exp_cdf(-2.0 * p1 * x1 - 2.0 * x2 * q2, a(-x2, q2))
    )
    psi_and = (
        -normal_cdf(-a(x1, p1))
        + _exp_cdf(-2.0 * p1 * x1, -a(-x1, p1))
        + _exp_cdf(-2.0 * p2 * x2 - 2.0 * x1 * q1, a(-x1, q1))
        + _exp_cdf(-2.0 * p2 * x2, -a(x1, q1))
    )
    return {"OR": psi_or, "SIM": psi_sim, "AND": psi_and}


def exact(model2: TwoLineModel, query: RuinQuery,
          tol: ToleranceConfig = DEFAULT_TOL) -> RuinEstimate:
    """Exact ruin probability for the queried event.

    Upper-cone values come from the conditioning-at-T assembly; for the
    Brownian driver the reflection closed forms are evaluated as well and
    the two routes must agree to 1e-8.  The OR value is checked against
    the one-line sandwich max(psi_1, psi_2) <= psi_or <= psi_1 + psi_2.
    """
    _require_levy(model2)
    x1, x2 = query.x1, query.x2
    l1, l2 = model2.line1, model2.line2
    if query.event == "LINE1":
        return RuinEstimate(value=ultimate_ruin(l1, x1, tol), method="exact",
                            cone=None, diagnostics={"quad_err": 0.0})
    if query.event == "LINE2":
        return RuinEstimate(value=ultimate_ruin(l2, x2, tol), method="exact",
                            cone=None, diagnostics={"quad_err": 0.0})

    psi1 = ultimate_ruin(l1, x1, tol)
    psi2 = ultimate_ruin(l2, x2, tol)
    if x2 <= x1:
        value = psi2 if query.event == "OR" else psi1
        return RuinEstimate(value=value, method="exact", cone=ConeLabel.LOWER_CONE,
                            diagnostics={"quad_err": 0.0})

    T = crossing_time(x1, x2, model2.p1, model2.p2)
    adj = adjustment(model2, tol)
    diag: dict = {"T": T, "v": x2 / T}
    if query.event == "OR":
        base = finite_ruin(l1, x1, T, tol)
        surv, tilt_err = _survival(tilt(l1, -adj.gamma2), x1, T, tol)
        value = base.value + psi2 * surv
        err = base.quad_err + psi2 * tilt_err
        diag["terms"] = (base.value, psi2 * surv)
    elif query.event == "SIM":
        base = finite_ruin(l2, x2, T, tol)
        surv, tilt_err = _survival(tilt(l2, -adj.gamma1), x2, T, tol)
        value = base.value + psi1 * surv
        err = base.quad_err + psi1 * tilt_err
        diag["terms"] = (base.value, psi1 * surv)
    elif query.event == "AND":
        after = ruin_after(l1, x1, T, tol)
        tilted = finite_ruin(tilt(l1, -adj.gamma2), x1, T, tol)
        value = after.value + psi2 * tilted.value
        err = after.quad_err + psi2 * tilted.quad_err
        diag["terms"] = (after.value, psi2 * tilted.value)
    else:  # pragma: no cover - exhausted above
        raise AssertionError(query.event)
    diag["quad_err"] = err

    if isinstance(model2.driver, StandardBrownian):
        closed = _brownian_closed(model2, x1, x2, T)[query.event]
        if abs(closed - value) > _BROWNIAN_ROUTE_TOL:
            raise InternalInconsistency(
                f"{query.event}: conditioning route {value!r} vs reflection "
                f"route {closed!r} differ beyond {_BROWNIAN_ROUTE_TOL:g}"
            )
        diag["closed_form_delta"] = closed - value

    slack = 2.0 * err + 1e-12
    if query.event == "OR" and not (
        max(psi1, psi2) - slack <= value <= psi1 + psi2 + slack
    ):
        raise InternalInconsistency(
            f"OR sandwich violated: psi1={psi1!r}, psi2={psi2!r}, psi_or={value!r}"
        )
    value = min(max(value, 0.0), 1.0)
    cone = classify(model2, x1, x2, "and" if query.event == "AND" else "sim", tol) \
        if x1 > 0.0 else None
    return RuinEstimate(value=value, method="exact", cone=cone, diagnostics=diag)


def _kappa_triple(line: LineModel, theta: float) -> float:
    d = line.driver
    if isinstance(d, CompoundPoissonExp):
        return -6.0 * d.lam * d.mu / (d.mu + theta) ** 4
    if isinstance(d, StandardBrownian):
        return 0.0
    raise UnsupportedDriver("third cumulant derivative needs a Levy driver")


def _psi_star(line: LineModel, theta: float) -> float:
    """Laplace transform of the one-line ruin probability,
    psi*(theta) = 1/theta - kappa'(0)/kappa(theta).

    Both apparent poles are removable or cancel: near theta = 0 the two
    terms cancel to a finite limit (series evaluation), and near the
    adjustment root -gamma the cumulant is evaluated by Taylor expansion
    to keep full relative accuracy.
    """
    a = line.kappa_prime(0.0)
    if a <= 0.0:
        raise OutOfRange("the ruin transform identity requires positive drift")
    if abs(theta) < 1e-6:
        b = line.kappa_double_prime(0.0)
        c = _kappa_triple(line, 0.0)
        return b / (2.0 * a) - (b * b / (4.0 * a * a) - c / (6.0 * a)) * theta
    root = _negative_root(line)
    if abs(theta - root) < 1e-6:
        h = theta - root
        k = line.kappa_prime(root) * h + 0.5 * line.kappa_double_prime(root) * h * h \
            + _kappa_triple(line, root) * h ** 3 / 6.0
    else:
        k = line.kappa(theta)
    return 1.0 / theta - a / k


def _psi_bar_star(line: LineModel, theta: float) -> float:
    """Laplace transform of the survival probability, kappa'(0)/kappa(theta)."""
    return line.kappa_prime(0.0) / line.kappa(theta)


def _negative_root(line: LineModel) -> float:
    """The nonzero root -gamma of kappa, in closed form per driver."""
    d = line.driver
    if isinstance(d, CompoundPoissonExp):
        return -(d.mu - d.lam / line.p)
    if isinstance(d, StandardBrownian):
        return -2.0 * line.p
    raise UnsupportedDriver("adjustment root needs a Levy driver")


def _conjugate_pair(model2: TwoLineModel, i: int, v: float,
                    tol: ToleranceConfig) -> tuple[float, float]:
    """(theta_v, theta_v^{(i)}): the kappa_2 saddle at velocity v and its
    conjugate with respect to kappa_i, via the premium-gap shift."""
    sd2 = saddle(model2.line2, v, tol)
    if i == 2:
        return sd2.theta_v, sd2.theta_conj
    sd1 = saddle(model2.line1, v - (model2.p1 - model2.p2), tol)
    if abs(sd1.theta_v - sd2.theta_v) > 1e-9 * max(1.0, abs(sd2.theta_v)):
        raise InternalInconsistency(
            f"saddle points via kappa_1 and kappa_2 disagree: "
            f"{sd1.theta_v!r} vs {sd2.theta_v!r}"
        )
    return sd2.theta_v, sd1.theta_conj


def _guard_velocity(v: float, boundary: float, what: str) -> None:
    if abs(v - boundary) <= _VELOCITY_BAND * max(1.0, abs(boundary)):
        raise BoundaryVelocity(
            f"velocity {v:g} within the guard band of {what} = {boundary:g}"
        )


def _prop2_constant(model2: TwoLineModel, i: int, v: float,
                    tol: ToleranceConfig) -> tuple[float, str, float]:
    """C-tilde_i(v): the limiting discounted-overshoot constant of the
    second expansion term.  Returns (value, branch name, value under the
    alternative index reading) -- the alternative uses the line's own
    conjugate family and is reported for diagnosis only."""
    adj = adjustment(model2, tol)
    l2 = model2.line2
    g = (adj.gamma1, adj.gamma2)[i - 1]
    c_const = (adj.C1, adj.C2)[i - 1]
    for gj, name in ((adj.gamma1, "-kappa_2'(-gamma_1)"), (adj.gamma2, "-kappa_2'(-gamma_2)")):
        _guard_velocity(v, -l2.kappa_prime(-gj), name)
    if v > -l2.kappa_prime(-g):
        return c_const, "constant", c_const
    line_i = (model2.line1, model2.line2)[i - 1]
    theta_v, theta_cross = _conjugate_pair(model2, 3 - i, v, tol)
    c_norm = (theta_cross - theta_v) / ((theta_cross + g) * (theta_v + g))
    value = (_psi_star(line_i, theta_v) - _psi_star(line_i, theta_cross)) / c_norm
    _, theta_own = _conjugate_pair(model2, i, v, tol)
    c_alt = (theta_own - theta_v) / ((theta_own + g) * (theta_v + g))
    alt = (_psi_star(line_i, theta_v) - _psi_star(line_i, theta_own)) / c_alt
    return value, "laplace", alt


def _two_term_pre(model2: TwoLineModel, x1: float, x2: float) -> tuple[float, float]:
    _require_levy(model2)
    if not x2 > x1:
        raise OutOfRange(
            f"two-term expansions need x2 > x1, got ({x1:g}, {x2:g}); "
            f"the lower cone reduces to one-line values"
        )
    if x1 < 0.0:
        raise OutOfRange(f"reserves must be nonnegative, got x1={x1:g}")
    T = crossing_time(x1, x2, model2.p1, model2.p2)
    return T, x2 / T


def two_term_or(model2: TwoLineModel, x1: float, x2: float,
                tol: ToleranceConfig = DEFAULT_TOL) -> ExpansionTerms:
    """psi_or ~ psi_1(x1, T) + C-tilde_2(v) e^{-gamma_2 x2} survival_1^(-gamma_2)(x1, T)."""
    T, v = _two_term_pre(model2, x1, x2)
    adj = adjustment(model2, tol)
    c2_tilde, branch, alt = _prop2_constant(model2, 2, v, tol)
    term1 = finite_ruin(model2.line1, x1, T, tol).value
    surv, _ = _survival(tilt(model2.line1, -adj.gamma2), x1, T, tol)
    term2 = c2_tilde * math.exp(-adj.gamma2 * x2) * surv
    cone = classify(model2, x1, x2, "sim", tol) if x1 > 0.0 else ConeLabel.D2
    return ExpansionTerms(term1=term1, term2=term2,
                          constants={"C2_tilde": c2_tilde, "branch": branch,
                                     "alt_reading": alt},
                          cone=cone, velocity=v)


def two_term_sim(model2: TwoLineModel, x1: float, x2: float,
                 tol: ToleranceConfig = DEFAULT_TOL) -> ExpansionTerms:
    """psi_sim ~ psi_2(x2, T) + C-tilde_1(v) e^{-gamma_1 x1} survival_2^(-gamma_1)(x2, T)."""
    T, v = _two_term_pre(model2, x1, x2)
    adj = adjustment(model2, tol)
    c1_tilde, branch, alt = _prop2_constant(model2, 1, v, tol)
    term1 = finite_ruin(model2.line2, x2, T, tol).value
    surv, _ = _survival(tilt(model2.line2, -adj.gamma1), x2, T, tol)
    term2 = c1_tilde * math.exp(-adj.gamma1 * x1) * surv
    cone = classify(model2, x1, x2, "sim", tol) if x1 > 0.0 else ConeLabel.D2
    return ExpansionTerms(term1=term1, term2=term2,
                          constants={"C1_tilde": c1_tilde, "branch": branch,
                                     "alt_reading": alt},
                          cone=cone, velocity=v)


def two_term_and(model2: TwoLineModel, x1: float, x2: float,
                 tol: ToleranceConfig = DEFAULT_TOL) -> ExpansionTerms:
    """psi_and ~ w_1(x1, T) + {C-bar_2 e^{-g2 x2} psi_2^(-g2)(x2, T)
    + C-bar_1 e^{-g2 x2 - gtilde x1} psi_1^(-g3)(x1, T)}."""
    T, v = _two_term_pre(model2, x1, x2)
    adj = adjustment(model2, tol)
    l1, l2 = model2.line1, model2.line2
    boundary = -l2.kappa_prime(-adj.gamma3)
    _guard_velocity(v, boundary, "-kappa_2'(-gamma_3)")
    gt = adj.gamma3 - adj.gamma2
    diag: dict = {}
    if v < boundary:
        c2_bar = 0.0
        # C2_hat handles the coincident case gamma3 == gamma2, where the
        # derivative-ratio expression would flip sign
        c1_bar = adj.C2_hat
        branch = "small_v"
    else:
        theta_v, theta_2 = _conjugate_pair(model2, 2, v, tol)
        _, theta_1 = _conjugate_pair(model2, 1, v, tol)
        c2_norm = (theta_2 - theta_v) / ((theta_2 + adj.gamma2) * (theta_v + adj.gamma2))
        c2_bar = _psi_bar_star(l2, theta_2) / abs(c2_norm)
        c1_norm = (theta_1 - theta_v) / ((theta_1 + adj.gamma3) * (theta_v + adj.gamma3))
        c1_bar = (_psi_star(l2, theta_1) - 1.0 / theta_v) / abs(c1_norm)
        diag["alt_C1_bar"] = (_psi_star(l1, theta_1) - 1.0 / theta_v) / abs(c1_norm)
        branch = "large_v"
    term1 = ruin_after(l1, x1, T, tol).value
    piece2 = c2_bar * math.exp(-adj.gamma2 * x2) * \
        finite_ruin(tilt(l2, -adj.gamma2), x2, T, tol).value if c2_bar != 0.0 else 0.0
    piece1 = c1_bar * math.exp(-adj.gamma2 * x2 - gt * x1) * \
        finite_ruin(tilt(l1, -adj.gamma3), x1, T, tol).value
    cone = classify(model2, x1, x2, "and", tol) if x1 > 0.0 else ConeLabel.D2_HAT
    return ExpansionTerms(term1=term1, term2=piece1 + piece2,
                          constants={"C1_bar": c1_bar, "C2_bar": c2_bar,
                                     "gamma_tilde": gt, "branch": branch, **diag},
                          cone=cone, velocity=v)


def _d_constants(model2: TwoLineModel, i: int, w: float,
                 tol: ToleranceConfig) -> tuple[float, float]:
    """(D_i'(w), D_i^#(w)): the two local-limit constants of the middle
    cone, sharing the factor sqrt(w / (2 pi kappa''(theta_w)))."""
    other = (model2.line1, model2.line2)[2 - i]  # line 3-i
    theta_w, theta_i = _conjugate_pair(model2, i, w, tol)
    scale = math.sqrt(w / (2.0 * math.pi * other.kappa_double_prime(theta_w)))
    d_prime = (theta_i - theta_w) / abs(theta_w * theta_i) * scale
    kp0 = other.kappa_prime(0.0)
    d_sharp = (1.0 / theta_w - 1.0 / theta_i
               + kp0 / other.kappa(theta_i) - kp0 / other.kappa(theta_w)) * scale
    return d_prime, d_sharp


def leading(model2: TwoLineModel, x1: float, x2: float, event: Event,
            tol: ToleranceConfig = DEFAULT_TOL) -> RuinEstimate:
    """Sharp leading-order asymptotics on the ray through (x1, x2).

    OR follows the global two-exponential law; SIM and AND switch between
    the one-line constants on the outer cones and the x2^{-1/2}-corrected
    ray law on the middle cone.  Rays inside the boundary band are
    refused since every branch degenerates there.
    """
    _require_levy(model2)
    if not (x1 > 0.0 and x2 > 0.0):
        raise OutOfRange(f"need x1, x2 > 0, got ({x1:g}, {x2:g})")
    adj = adjustment(model2, tol)
    if event == "LINE1":
        return RuinEstimate(value=adj.C1 * math.exp(-adj.gamma1 * x1),
                            method="leading", cone=None, diagnostics={"C": adj.C1})
    if event == "LINE2":
        return RuinEstimate(value=adj.C2 * math.exp(-adj.gamma2 * x2),
                            method="leading", cone=None, diagnostics={"C": adj.C2})
    if event == "OR":
        value = adj.C2 * math.exp(-adj.gamma2 * x2) + adj.C1 * math.exp(-adj.gamma1 * x1)
        return RuinEstimate(value=value, method="leading", cone=None,
                            diagnostics={"C1": adj.C1, "C2": adj.C2})

    if event not in ("SIM", "AND"):
        raise OutOfRange(f"unknown event {event!r}")
    kind = "sim" if event == "SIM" else "and"
    label = classify(model2, x1, x2, kind, tol)
    if label is ConeLabel.BOUNDARY_RAY:
        raise BoundaryRay(
            f"ray a={x1 / x2:g} lies on a cone boundary; the asymptotic "
            f"constants degenerate there"
        )
    diag: dict = {"cone": label.value}
    if label in (ConeLabel.D1, ConeLabel.LOWER_CONE):
        value = adj.C1 * math.exp(-adj.gamma1 * x1)
        diag["C"] = adj.C1
    elif label is ConeLabel.D2:
        value = adj.C2 * math.exp(-adj.gamma2 * x2)
        diag["C"] = adj.C2
    elif label is ConeLabel.D2_HAT:
        a = x1 / x2
        rate = a * adj.gamma3 + (1.0 - a) * adj.gamma2
        value = adj.C2_hat * math.exp(-rate * x2)
        diag["C"] = adj.C2_hat
        diag["rate_per_x2"] = rate
    else:  # middle cone, either partition
        a = x1 / x2
        w = (model2.p1 - model2.p2) / (1.0 - a)
        g_a = gamma_ray(model2, a, tol)
        if event == "SIM":
            d_prime, d_sharp = _d_constants(model2, 2, w, tol)
            const = d_sharp + d_prime
        else:
            d_prime, d_sharp = _d_constants(model2, 1, w, tol)
            const = d_prime - d_sharp
        if const <= 0.0:
            raise InternalInconsistency(
                f"middle-cone constant must be positive, got {const!r}"
            )
        value = const * math.exp(-g_a * x2) / math.sqrt(x2)
        diag.update({"D_prime": d_prime, "D_sharp": d_sharp,
                     "gamma_ray": g_a, "velocity": w})
    return RuinEstimate(value=value, method="leading", cone=label, diagnostics=diag)


def renewal_exponents(driver: Renewal, p1: float, p2: float, a: float,
                      tol: ToleranceConfig = DEFAULT_TOL) -> tuple[float, float, float]:
    """Lundberg exponents of the two lines under a renewal driver and the
    predicted OR decay rate min(gamma_2, a gamma_1) per unit of x2 along
    the ray (a K, K).  Constants are not available at this generality."""
    if not p1 > p2:
        raise ConfigError(f"need p1 > p2, got ({p1:g}, {p2:g})")
    if not a > 0.0:
        raise OutOfRange(f"ray slope must be positive, got {a:g}")
    g1 = renewal_adjustment(driver, p1, tol)
    g2 = renewal_adjustment(driver, p2, tol)
    return g1, g2, min(g2, a * g1)

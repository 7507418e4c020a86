"""Monte Carlo oracles for the shared-claim two-line model.

Event-driven simulation is exact for the jump drivers: the claim
surplus is nondecreasing between epochs while both reserve lines rise,
so every ruin (and every simultaneous-ruin spell) can only begin at a
claim instant.  The Brownian engine draws exact Gaussian checkpoints
and accounts for within-segment excursions with bridge crossing
probabilities against each linear barrier piece; because the
checkpoint grid is aligned to the crossing time T, every barrier is
linear on every segment and the event indicators carry no
discretisation bias.  Checkpoint spacing only limits the resolution of
the reported crossing times.

Reproducibility contract: path ``i`` lives at lane ``i % chunk_size``
of chunk ``i // chunk_size``; every chunk consumes its own Philox
substream (key ``[seed, chunk index]``) in a fixed round order; partial
sums are reduced in chunk-index order.  Worker count therefore never
changes any emitted number.

Importance sampling follows the classical exponential change of
measure: under a tilt ``c`` the claim dynamics are exchanged for their
tilted family member and every path carries the likelihood weight
``exp(-c Z(t_stop) + kappa(c) t_stop)`` where ``Z = p2 t - S``.  The
weight is insensitive to which line it is written against because the
premium parts cancel.  The renewal driver has no continuous-time
cumulant, so its weight uses the per-step analogue
``exp(-c Z_n + n phi(c))`` with ``phi(c) = log E exp(c (p2 z - s))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple, Union

import numpy as np

from .errors import (
    ConfigError,
    InsufficientConditionedSamples,
    InternalInconsistency,
    InvalidHorizon,
    OutOfRange,
    UnsupportedDriver,
)
from .finite_time import limit_law
from .models import (
    CompoundPoissonExp,
    DistSpec,
    LineModel,
    Renewal,
    StandardBrownian,
    TiltedModel,
    TwoLineModel,
    exponential_dist,
    line_adjustment,
    renewal_adjustment,
    tilt,
)
from .numerics import DEFAULT_TOL, normal_quantile, normal_logcdf

__all__ = [
    "FixedTime",
    "SafeLevel",
    "SimConfig",
    "PathRecord",
    "McEstimate",
    "CheckReport",
    "default_safe_level",
    "simulate",
    "estimate",
    "check_limits",
]

_EVENTS = ("OR", "SIM", "AND", "LINE1", "LINE2")
_BLOCK = 128  # rounds drawn per RNG refill in the jump engine
_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# configuration types


@dataclass(frozen=True)
class FixedTime:
    """Stop every path at the deterministic horizon ``t``."""

    t: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and self.t > 0.0):
            raise InvalidHorizon(f"FixedTime horizon must be positive, got {self.t!r}")


@dataclass(frozen=True)
class SafeLevel:
    """Retire a line as "never ruined" once its reserve exceeds its
    starting value by ``L``; the truncation bias is Lundberg-bounded by
    exp(-gamma L) per line."""

    L: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.L) and self.L > 0.0):
            raise InvalidHorizon(f"SafeLevel must be positive, got {self.L!r}")


Horizon = Union[FixedTime, SafeLevel]


@dataclass(frozen=True)
class SimConfig:
    n: int
    seed: int
    horizon: Horizon
    tilt: Optional[float] = None
    ci_level: float = 0.95
    workers: int = 1
    chunk_size: int = 8192

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"replication count must be >= 1, got {self.n}")
        if not isinstance(self.horizon, (FixedTime, SafeLevel)):
            raise InvalidHorizon(f"unknown horizon {self.horizon!r}")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if self.tilt is not None and not math.isfinite(self.tilt):
            raise ConfigError("tilt must be finite")
        if self.workers < 1 or self.chunk_size < 1:
            raise ConfigError("workers and chunk_size must be >= 1")


@dataclass(frozen=True)
class PathRecord:
    """One simulated path.  Censored times are +inf; ``censor_reason``
    says why anything was left unobserved (or declared by retirement)."""

    tau1: float
    tau2: float
    tau_or: float
    tau_sim: float
    censor_reason: Optional[str]
    likelihood_weight: float = 1.0

    def __post_init__(self) -> None:
        if math.isfinite(self.tau1) or math.isfinite(self.tau2):
            if abs(self.tau_or - min(self.tau1, self.tau2)) > 1e-12:
                raise InternalInconsistency("tau_or must equal min(tau1, tau2)")
        if math.isfinite(self.tau_sim):
            if self.tau_sim + 1e-12 < max(self.tau1, self.tau2):
                raise InternalInconsistency("tau_sim below an individual ruin time")
        if self.likelihood_weight < 0.0:
            raise InternalInconsistency("negative likelihood weight")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    ci: Tuple[float, float]
    n: int
    bias_bound: float


@dataclass(frozen=True)
class CheckReport:
    what: str
    passed: bool
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# small helpers


def _line_gamma(line: LineModel, tol=DEFAULT_TOL) -> float:
    if isinstance(line.driver, Renewal):
        return renewal_adjustment(line.driver, line.p, tol)
    return line_adjustment(line, tol)[0]


def default_safe_level(model2: TwoLineModel, tol=DEFAULT_TOL) -> SafeLevel:
    """SafeLevel(30 / min(gamma1, gamma2)): truncation bias below
    exp(-30) per line at the default."""
    g = min(_line_gamma(model2.line1, tol), _line_gamma(model2.line2, tol))
    return SafeLevel(30.0 / g)


def _chunk_rng(seed: int, chunk_idx: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, chunk_idx & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _drift(line: LineModel) -> float:
    d = line.driver
    if isinstance(d, CompoundPoissonExp):
        return line.p - d.lam / d.mu
    if isinstance(d, StandardBrownian):
        return line.p
    return line.p - d.claim.mean / d.interarrival.mean


def _check_safelevel(model2: TwoLineModel, x1: float, x2: float,
                     cfg: SimConfig) -> None:
    hz = cfg.horizon
    if not isinstance(hz, SafeLevel):
        return
    if hz.L <= max(x1, x2):
        raise InvalidHorizon(
            f"SafeLevel L={hz.L:g} must exceed max(x1, x2)={max(x1, x2):g}"
        )
    c = cfg.tilt
    for line in (model2.line1, model2.line2):
        eff = _tilted_line(line, c) if c is not None else line
        if _drift(eff) == 0.0:
            raise InvalidHorizon(
                "zero effective drift: a SafeLevel run can neither ruin nor retire"
            )


def _tilted_line(line: LineModel, c: float) -> LineModel:
    d = line.driver
    if isinstance(d, Renewal):
        if d.interarrival.tilted is None or d.claim.tilted is None:
            raise UnsupportedDriver("renewal distributions do not expose a tilted family")
        return LineModel(
            Renewal(d.interarrival.tilted(c * line.p), d.claim.tilted(-c)), line.p
        )
    return tilt(line, c).model


def _walk_phi(driver: Renewal, p: float, c: float) -> float:
    """log E exp(c (p z - s)) per renewal step."""
    m = driver.interarrival.mgf(c * p) * driver.claim.mgf(-c)
    if not (0.0 < m < math.inf):
        raise UnsupportedDriver(f"walk tilt {c:g} leaves the moment domain")
    return math.log(m)


def _reserves_ok(x1: float, x2: float) -> None:
    for x in (x1, x2):
        if not (math.isfinite(x) and x >= 0.0):
            raise ConfigError(f"reserves must be finite and nonnegative, got {x!r}")


# ---------------------------------------------------------------------------
# jump-driver chunk engine (compound Poisson and renewal)

_CENSOR_NONE = 0
_CENSOR_SAFE = 1
_CENSOR_TIME = 2
_CENSOR_NAMES = {0: None, 1: "safe_level", 2: "fixed_time"}


def _jump_dists(model2: TwoLineModel, c: Optional[float]) -> Tuple[DistSpec, DistSpec]:
    d = model2.line2.driver
    if isinstance(d, CompoundPoissonExp):
        if c is not None:
            d = _tilted_line(model2.line2, c).driver
        return exponential_dist(d.lam), exponential_dist(d.mu)
    if isinstance(d, Renewal):
        if c is not None:
            d = _tilted_line(model2.line2, c).driver
        return d.interarrival, d.claim
    raise UnsupportedDriver("jump engine requires a jump driver")


def _jump_chunk(model2: TwoLineModel, x1: float, x2: float, cfg: SimConfig,
                chunk_idx: int, width: int) -> dict:
    p1, p2 = model2.p1, model2.p2
    rng = _chunk_rng(cfg.seed, chunk_idx)
    ia, cl = _jump_dists(model2, cfg.tilt)
    t_hor = cfg.horizon.t if isinstance(cfg.horizon, FixedTime) else math.inf
    level = cfg.horizon.L if isinstance(cfg.horizon, SafeLevel) else math.inf

    # outputs, indexed by original lane; stop_te is the last claim epoch,
    # stop_t the weight-evaluation time (the horizon for censored lanes)
    tau1 = np.full(width, math.inf)
    tau2 = np.full(width, math.inf)
    tsim = np.full(width, math.inf)
    stop_t = np.zeros(width)
    stop_te = np.zeros(width)
    stop_s = np.zeros(width)
    nstep = np.zeros(width, dtype=np.int64)
    censor = np.zeros(width, dtype=np.int8)
    # weight checkpoints (S, step count) frozen at each event's own epoch,
    # so importance weights stop accumulating variance once the event is
    # decided instead of drifting until the whole record resolves
    s1c = np.zeros(width)
    s2c = np.zeros(width)
    ssc = np.zeros(width)
    n1c = np.zeros(width, dtype=np.int64)
    n2c = np.zeros(width, dtype=np.int64)
    nsc = np.zeros(width, dtype=np.int64)

    # live state, compacted at refill boundaries
    ids = np.arange(width)
    t = np.zeros(width)
    s = np.zeros(width)
    ruin1 = np.zeros(width, dtype=bool)
    ruin2 = np.zeros(width, dtype=bool)
    safe1 = np.zeros(width, dtype=bool)
    safe2 = np.zeros(width, dtype=bool)
    sim = np.zeros(width, dtype=bool)
    steps = np.zeros(width, dtype=np.int64)

    col = _BLOCK
    dz_blk = sz_blk = None
    guard = 0
    while ids.size:
        guard += 1
        if guard > 5_000_000:
            raise InternalInconsistency("jump engine failed to resolve a chunk")
        if col == _BLOCK:
            nl = ids.size
            dz_blk = ia.sample(rng, _BLOCK * nl).reshape(_BLOCK, nl)
            sz_blk = cl.sample(rng, _BLOCK * nl).reshape(_BLOCK, nl)
            col = 0
        t_next = t + dz_blk[col]
        sz = sz_blk[col]
        col += 1

        over = t_next > t_hor
        if over.any():
            k = ids[over]
            stop_t[k] = t_hor
            stop_te[k] = t[over]
            stop_s[k] = s[over]
            nstep[k] = steps[over]
            censor[k] = _CENSOR_TIME
            keep = ~over
            t_next, sz = t_next[keep], sz[keep]
            s, steps, ids = s[keep], steps[keep], ids[keep]
            ruin1, ruin2 = ruin1[keep], ruin2[keep]
            safe1, safe2 = safe1[keep], safe2[keep]
            sim = sim[keep]
            if col < _BLOCK:
                dz_blk = dz_blk[:, keep]
                sz_blk = sz_blk[:, keep]
            if not ids.size:
                break
        t = t_next
        s = s + sz
        steps = steps + 1

        u1 = x1 + p1 * t - s
        u2 = x2 + p2 * t - s

        # barrier bookkeeping cross-check: S above the lower envelope iff
        # some coordinate is negative (skip lanes within rounding of zero)
        umin = np.minimum(u1, u2)
        mism = ((s > np.minimum(x1 + p1 * t, x2 + p2 * t)) != (umin < 0.0)) & (
            np.abs(umin) > 1e-9 * (1.0 + np.abs(s))
        )
        if mism.any():
            raise InternalInconsistency("coordinate and barrier ruin bookkeeping disagree")

        new1 = ~ruin1 & (u1 < 0.0)
        new2 = ~ruin2 & (u2 < 0.0)
        tau1[ids[new1]] = t[new1]
        s1c[ids[new1]] = s[new1]
        n1c[ids[new1]] = steps[new1]
        tau2[ids[new2]] = t[new2]
        s2c[ids[new2]] = s[new2]
        n2c[ids[new2]] = steps[new2]
        ruin1 |= new1
        ruin2 |= new2
        news = ~sim & (u1 < 0.0) & (u2 < 0.0)
        tsim[ids[news]] = t[news]
        ssc[ids[news]] = s[news]
        nsc[ids[news]] = steps[news]
        sim |= news
        if level < math.inf:
            safe1 |= p1 * t - s >= level
            safe2 |= p2 * t - s >= level

        done = (ruin1 | safe1) & (ruin2 | safe2) & (sim | safe1 | safe2)
        if done.any():
            k = ids[done]
            stop_t[k] = t[done]
            stop_te[k] = t[done]
            stop_s[k] = s[done]
            nstep[k] = steps[done]
            declared = (safe1 | safe2)[done] & ~(ruin1 & ruin2 & sim)[done]
            censor[k[declared]] = _CENSOR_SAFE
            live = ~done
            ids, t, s, steps = ids[live], t[live], s[live], steps[live]
            ruin1, ruin2 = ruin1[live], ruin2[live]
            safe1, safe2 = safe1[live], safe2[live]
            sim = sim[live]
            if dz_blk is not None and col < _BLOCK:
                dz_blk = dz_blk[:, live]
                sz_blk = sz_blk[:, live]

    weights = _jump_weights(model2, cfg, stop_t, stop_te, stop_s, nstep)
    return {
        "tau1": tau1, "tau2": tau2, "tsim": tsim, "censor": censor, "w": weights,
        "w1": _event_weight(model2, cfg, tau1, s1c, n1c),
        "w2": _event_weight(model2, cfg, tau2, s2c, n2c),
        "wsim": _event_weight(model2, cfg, tsim, ssc, nsc),
    }


def _jump_weights(model2: TwoLineModel, cfg: SimConfig, stop_t: np.ndarray,
                  stop_te: np.ndarray, stop_s: np.ndarray,
                  nstep: np.ndarray) -> np.ndarray:
    c = cfg.tilt
    if c is None:
        return np.ones_like(stop_t)
    p2 = model2.p2
    d = model2.line2.driver
    if isinstance(d, CompoundPoissonExp):
        # Levy form, valid at epochs and at deterministic horizons alike
        kap = model2.line2.kappa(c)
        return np.exp(-c * (p2 * stop_t - stop_s) + kap * stop_t)
    # renewal walk: per-step weight at the last epoch, and for a censored
    # exponential gap the memoryless survival ratio extends the epoch value
    # to exp(-c (p2 t_hor - S_n) + n phi); a deterministic gap has ratio 1
    phi = _walk_phi(d, p2, c)
    t_w = stop_t if math.isfinite(d.interarrival.mgf_sup) else stop_te
    return np.exp(-c * (p2 * t_w - stop_s) + nstep * phi)


def _event_weight(model2: TwoLineModel, cfg: SimConfig, tau: np.ndarray,
                  s_e: np.ndarray, n_e: np.ndarray) -> np.ndarray:
    """Likelihood weight frozen at an event epoch; 0 where the event never
    happened (any finite placeholder would do, the indicator kills it)."""
    c = cfg.tilt
    hit = np.isfinite(tau)
    if c is None:
        return hit.astype(float)
    p2 = model2.p2
    d = model2.line2.driver
    t_e = np.where(hit, tau, 0.0)
    if isinstance(d, Renewal):
        expo = -c * (p2 * t_e - s_e) + n_e * _walk_phi(d, p2, c)
    else:
        expo = -c * (p2 * t_e - s_e) + model2.line2.kappa(c) * t_e
    return np.where(hit, np.exp(expo), 0.0)


# ---------------------------------------------------------------------------
# Brownian chunk engine


def _bm_segments(T: float, t_hor: float) -> Iterator[Tuple[float, float]]:
    t = 0.0
    if T > 0.0:
        n1 = max(1, math.ceil(T / (min(T, 1.0) / 64.0)))
        h1 = T / n1
        for k in range(1, n1 + 1):
            t1 = min(k * h1, t_hor)
            if t1 <= t:
                return
            yield t, t1
            t = t1
            if t >= t_hor:
                return
    while True:
        t1 = min(t + 1.0, t_hor)
        if t1 <= t:
            return
        yield t, t1
        t = t1
        if t >= t_hor:
            return


def _bm_chunk(model2: TwoLineModel, x1: float, x2: float, cfg: SimConfig,
              chunk_idx: int, width: int) -> dict:
    p1, p2 = model2.p1, model2.p2
    rng = _chunk_rng(cfg.seed, chunk_idx)
    c = 0.0 if cfg.tilt is None else cfg.tilt
    t_hor = cfg.horizon.t if isinstance(cfg.horizon, FixedTime) else math.inf
    level = cfg.horizon.L if isinstance(cfg.horizon, SafeLevel) else math.inf
    T = max(x2 - x1, 0.0) / (p1 - p2)

    tau1 = np.full(width, math.inf)
    tau2 = np.full(width, math.inf)
    tsim = np.full(width, math.inf)
    stop_t = np.zeros(width)
    stop_w = np.zeros(width)
    censor = np.zeros(width, dtype=np.int8)
    # W at the end of the segment where each event was first detected;
    # crossings are only localised to a segment, so that endpoint is the
    # earliest stopping time at which the indicator is known
    z1c = np.zeros(width)
    z2c = np.zeros(width)
    zsc = np.zeros(width)

    wS = np.zeros(width)  # claim process S = W at the current checkpoint
    ruin1 = np.zeros(width, dtype=bool)
    ruin2 = np.zeros(width, dtype=bool)
    safe1 = np.zeros(width, dtype=bool)
    safe2 = np.zeros(width, dtype=bool)
    sim = np.zeros(width, dtype=bool)
    alive = np.ones(width, dtype=bool)

    def _cross(g0: np.ndarray, g1: np.ndarray, h: float, u: np.ndarray) -> np.ndarray:
        # bridge against a linear barrier: certain if an endpoint touches,
        # otherwise exp(-2 g0 g1 / h) with the shared uniform
        inside = (g0 > 0.0) & (g1 > 0.0)
        q = np.ones_like(g0)
        q[inside] = np.exp(-2.0 * g0[inside] * g1[inside] / h)
        return u < q

    t_retire = (level + max(x1, x2)) * 10.0 / max(abs(p2 + c), abs(p1 + c), 1e-3) + 100.0 * (T + 1.0)
    for t0, t1 in _bm_segments(T, t_hor):
        if not alive.any():
            break
        if t0 > t_retire:
            raise InternalInconsistency("Brownian engine failed to resolve a chunk")
        h = t1 - t0
        z = wS + rng.standard_normal(width) * math.sqrt(h) - c * h
        u = rng.random(width)

        g0_1 = (x1 + p1 * t0) - wS
        g1_1 = (x1 + p1 * t1) - z
        g0_2 = (x2 + p2 * t0) - wS
        g1_2 = (x2 + p2 * t1) - z
        c1 = _cross(g0_1, g1_1, h, u) & alive
        c2 = _cross(g0_2, g1_2, h, u) & alive

        new1 = c1 & ~ruin1
        new2 = c2 & ~ruin2
        tau1[new1] = t1
        z1c[new1] = z[new1]
        tau2[new2] = t1
        z2c[new2] = z[new2]
        ruin1 |= new1
        ruin2 |= new2
        csim = c2 if t1 <= T else c1  # upper envelope piece
        news = csim & ~sim
        tsim[news] = t1
        zsc[news] = z[news]
        sim |= news
        if level < math.inf:
            safe1 |= alive & (z < p1 * t1 - level)
            safe2 |= alive & (z < p2 * t1 - level)

        done = alive & (ruin1 | safe1) & (ruin2 | safe2) & (sim | safe1 | safe2)
        stop_t[done] = t1
        stop_w[done] = z[done]
        declared = done & (safe1 | safe2) & ~(ruin1 & ruin2 & sim)
        censor[declared] = _CENSOR_SAFE
        alive &= ~done
        wS = z

        if t1 >= t_hor:
            stop_t[alive] = t_hor
            stop_w[alive] = z[alive]
            censor[alive] = _CENSOR_TIME
            alive[:] = False
            break

    if cfg.tilt is None:
        weights = np.ones(width)
    else:
        kap = model2.line2.kappa(c)
        weights = np.exp(-c * (p2 * stop_t - stop_w) + kap * stop_t)
    zero = np.zeros(width, dtype=np.int64)
    return {
        "tau1": tau1, "tau2": tau2, "tsim": tsim, "censor": censor, "w": weights,
        "w1": _event_weight(model2, cfg, tau1, z1c, zero),
        "w2": _event_weight(model2, cfg, tau2, z2c, zero),
        "wsim": _event_weight(model2, cfg, tsim, zsc, zero),
    }


# ---------------------------------------------------------------------------
# public driving functions


def _chunk_fn(model2: TwoLineModel):
    if isinstance(model2.line2.driver, StandardBrownian):
        return _bm_chunk
    return _jump_chunk


def _run_chunks(model2: TwoLineModel, x1: float, x2: float, cfg: SimConfig):
    """Yield per-chunk result dicts in chunk order, fanning the chunk
    computations out over cfg.workers threads."""
    fn = _chunk_fn(model2)
    n_chunks = (cfg.n + cfg.chunk_size - 1) // cfg.chunk_size
    widths = [
        min(cfg.chunk_size, cfg.n - i * cfg.chunk_size) for i in range(n_chunks)
    ]
    if cfg.workers == 1:
        for i, w in enumerate(widths):
            yield fn(model2, x1, x2, cfg, i, w)
        return
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futs = [
            pool.submit(fn, model2, x1, x2, cfg, i, w) for i, w in enumerate(widths)
        ]
        for f in futs:
            yield f.result()


def simulate(model2: TwoLineModel, x1: float, x2: float,
             config: SimConfig) -> Iterator[PathRecord]:
    """Stream PathRecords for n paths of the two-line model."""
    _reserves_ok(x1, x2)
    _check_safelevel(model2, x1, x2, config)
    for res in _run_chunks(model2, x1, x2, config):
        t1, t2, ts = res["tau1"], res["tau2"], res["tsim"]
        cen, w = res["censor"], res["w"]
        for k in range(t1.size):
            yield PathRecord(
                tau1=float(t1[k]),
                tau2=float(t2[k]),
                tau_or=float(min(t1[k], t2[k])),
                tau_sim=float(ts[k]),
                censor_reason=_CENSOR_NAMES[int(cen[k])],
                likelihood_weight=float(w[k]),
            )


def _indicator(res: dict, event: str) -> np.ndarray:
    if event == "OR":
        return np.isfinite(np.minimum(res["tau1"], res["tau2"]))
    if event == "SIM":
        return np.isfinite(res["tsim"])
    if event == "AND":
        return np.isfinite(res["tau1"]) & np.isfinite(res["tau2"])
    if event == "LINE1":
        return np.isfinite(res["tau1"])
    return np.isfinite(res["tau2"])


def _event_value(res: dict, event: str) -> np.ndarray:
    """indicator * likelihood weight, the weight taken at the event's own
    resolution time.  The event-epoch weights are already zero where the
    event did not happen, so the selections below need no extra masking."""
    if event == "OR":
        return np.where(res["tau1"] <= res["tau2"], res["w1"], res["w2"])
    if event == "AND":
        return np.where(res["tau1"] >= res["tau2"], res["w1"], res["w2"])
    if event == "SIM":
        return res["wsim"]
    if event == "LINE1":
        return res["w1"]
    return res["w2"]


def _bias_bound(model2: TwoLineModel, event: str, cfg: SimConfig) -> float:
    if isinstance(cfg.horizon, FixedTime):
        return math.nan  # truncation bias not quantified under FixedTime
    level = cfg.horizon.L
    g1 = _line_gamma(model2.line1)
    g2 = _line_gamma(model2.line2)
    if event == "LINE1":
        return math.exp(-g1 * level)
    if event == "LINE2":
        return math.exp(-g2 * level)
    return math.exp(-g1 * level) + math.exp(-g2 * level)


def estimate(model2: TwoLineModel, x1: float, x2: float, event: str,
             config: SimConfig) -> McEstimate:
    """Estimate the ultimate probability of ``event`` with a normal CI.

    With a tilt the estimator averages likelihood_weight * indicator and
    stays unbiased up to the declared horizon truncation.
    """
    if event not in _EVENTS:
        raise OutOfRange(f"unknown event {event!r}")
    _reserves_ok(x1, x2)
    if isinstance(config.horizon, FixedTime) and config.tilt is None:
        raise InvalidHorizon(
            "a FixedTime horizon truncates ultimate events; use SafeLevel or a tilt"
        )
    _check_safelevel(model2, x1, x2, config)

    s1 = 0.0
    s2 = 0.0
    for res in _run_chunks(model2, x1, x2, config):
        wi = _event_value(res, event)
        s1 += float(wi.sum())
        s2 += float((wi * wi).sum())
    n = config.n
    p_hat = s1 / n
    var = max(s2 / n - p_hat * p_hat, 0.0) / n
    se = math.sqrt(var)
    q = normal_quantile(0.5 + config.ci_level / 2.0)
    return McEstimate(
        p_hat=p_hat,
        std_err=se,
        ci=(p_hat - q * se, p_hat + q * se),
        n=n,
        bias_bound=_bias_bound(model2, event, config),
    )


# ---------------------------------------------------------------------------
# limit checks (LLN of the ruin time; Theorem-2 conditional laws)


def _as_line(model) -> LineModel:
    if isinstance(model, TiltedModel):
        return model.model
    if isinstance(model, LineModel):
        return model
    raise UnsupportedDriver(f"expected a line model, got {type(model).__name__}")


def _line_ruin_times(line: LineModel, x: float, n: int, seed: int,
                     t_cap: float, salt: int) -> np.ndarray:
    """First passage below zero for one line; inf where not ruined by t_cap."""
    d = line.driver
    p = line.p
    taus = np.full(n, math.inf)
    chunk = 8192
    n_chunks = (n + chunk - 1) // chunk
    for ci in range(n_chunks):
        width = min(chunk, n - ci * chunk)
        rng = _chunk_rng(seed, (salt << 32) | ci)
        lo = ci * chunk
        if isinstance(d, StandardBrownian):
            h = 0.25
            wS = np.zeros(width)
            out = np.full(width, math.inf)
            alive = np.ones(width, dtype=bool)
            t = 0.0
            while alive.any() and t < t_cap:
                z = wS + rng.standard_normal(width) * math.sqrt(h)
                u = rng.random(width)
                g0 = (x + p * t) - wS
                g1 = (x + p * (t + h)) - z
                inside = (g0 > 0.0) & (g1 > 0.0)
                q = np.ones(width)
                q[inside] = np.exp(-2.0 * g0[inside] * g1[inside] / h)
                hit = alive & (u < q)
                out[hit] = t + h
                alive &= ~hit
                wS = z
                t += h
            taus[lo:lo + width] = out
            continue
        if isinstance(d, CompoundPoissonExp):
            ia, cl = exponential_dist(d.lam), exponential_dist(d.mu)
        else:
            ia, cl = d.interarrival, d.claim
        t = np.zeros(width)
        s = np.zeros(width)
        out = np.full(width, math.inf)
        ids = np.arange(width)
        col = _BLOCK
        dz_blk = sz_blk = None
        while ids.size:
            if col == _BLOCK:
                nl = ids.size
                dz_blk = ia.sample(rng, _BLOCK * nl).reshape(_BLOCK, nl)
                sz_blk = cl.sample(rng, _BLOCK * nl).reshape(_BLOCK, nl)
                col = 0
            t = t + dz_blk[col]
            s = s + sz_blk[col]
            col += 1
            ruin = x + p * t - s < 0.0
            out[ids[ruin]] = t[ruin]
            live = ~ruin & (t < t_cap)
            if not live.all():
                ids, t, s = ids[live], t[live], s[live]
                if col < _BLOCK:
                    dz_blk = dz_blk[:, live]
                    sz_blk = sz_blk[:, live]
        taus[lo:lo + width] = out
    return taus


def _truncated_std_normal(rng: np.random.Generator, n: int, alpha: float) -> np.ndarray:
    """Standard normal conditioned on exceeding alpha; exact for any alpha."""
    if alpha < 3.0:
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = max(int((n - filled) / max(1.0 - 0.5 * (1 + math.erf(alpha / math.sqrt(2))), 1e-3)) + 16, 64)
            z = rng.standard_normal(m)
            z = z[z > alpha]
            take = min(z.size, n - filled)
            out[filled:filled + take] = z[:take]
            filled += take
        return out
    # exponential proposal (Robert): z = alpha + E/alpha
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = int((n - filled) * 1.5) + 16
        e = rng.exponential(1.0 / alpha, m)
        z = alpha + e
        acc = rng.random(m) < np.exp(-0.5 * e * e)
        z = z[acc]
        take = min(z.size, n - filled)
        out[filled:filled + take] = z[:take]
        filled += take
    return out


def _limit_law_samples(line: LineModel, v: float, side: str, n: int,
                       rng: np.random.Generator, t: float) -> np.ndarray:
    """Exact draws from the law of X(t) given survival past t (side
    "survival") or given ruin before t (side "ruin"), for the Brownian
    line.  Built on the absorbed-drifted-Brownian density, so every draw
    is a conditioned sample no matter how rare the conditioning event."""
    p = line.p
    x = v * t
    sd = math.sqrt(t)
    if side == "ruin":
        lm_plus = -2.0 * p * x + normal_logcdf((p * t - x) / sd)
        lm_minus = normal_logcdf(-(x + p * t) / sd)
        q_plus = 1.0 / (1.0 + math.exp(lm_minus - lm_plus))
        upper = rng.random(n) < q_plus
        n_up = int(upper.sum())
        out = np.empty(n)
        # y > 0: N(pt - x, t) conditioned positive
        a_up = (0.0 - (p * t - x)) / sd
        out[upper] = (p * t - x) + sd * _truncated_std_normal(rng, n_up, a_up)
        # y < 0: N(x + pt, t) conditioned negative
        a_lo = (x + p * t) / sd
        out[~upper] = (x + p * t) - sd * _truncated_std_normal(rng, n - n_up, a_lo)
        return out
    # survival: density on y > 0 proportional to
    # phi_t(y - x - pt) * (1 - exp(-2 x y / t)); rejection from the first factor
    a = -(x + p * t) / sd
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = int((n - filled) * 2) + 16
        y = (x + p * t) + sd * _truncated_std_normal(rng, m, a)
        acc = rng.random(m) < -np.expm1(-2.0 * x * y / t)
        y = y[acc]
        take = min(y.size, n - filled)
        out[filled:filled + take] = y[:take]
        filled += take
    return out


def check_limits(model, what, config: SimConfig) -> CheckReport:
    """Empirical checks of the ruin-time LLN and the conditional limit laws.

    ``what`` is either the string "lln_ruin_time" or a tuple
    ("limit_law", v, side) with side in {"survival", "ruin"}.  The LLN
    check simulates the (possibly tilted) line dynamics directly and
    compares mean tau(x)/x against -1/kappa'(0) at x in {50, 100}; the
    limit-law check draws config.n exact conditioned samples of X(t) at
    t = 200, x = vt and applies a Kolmogorov-Smirnov test at 0.05
    against the two-sided / gap exponential target.
    """
    if what == "lln_ruin_time":
        line = _as_line(model)
        drift = _drift(line)
        if drift >= 0.0:
            raise OutOfRange(
                f"lln_ruin_time needs a ruinous (negative-drift) line, drift={drift:g}"
            )
        target = -1.0 / drift
        details = {"target": target, "n": config.n}
        passed = True
        for salt, x in enumerate((50.0, 100.0)):
            t_cap = 50.0 * x * target
            taus = _line_ruin_times(line, x, config.n, config.seed, t_cap, salt + 1)
            ruined = np.isfinite(taus)
            n_ruined = int(ruined.sum())
            if n_ruined < 1000:
                raise InsufficientConditionedSamples(
                    f"only {n_ruined} ruined paths at x={x:g}"
                )
            mean_ratio = float(taus[ruined].mean()) / x
            details[f"x={x:g}"] = {"mean_ratio": mean_ratio, "n_ruined": n_ruined}
            passed &= abs(mean_ratio - target) <= 0.10 * target
        return CheckReport(what="lln_ruin_time", passed=passed, details=details)

    if isinstance(what, (tuple, list)) and len(what) == 3 and what[0] == "limit_law":
        _, v, side = what
        line = _as_line(model)
        if not isinstance(line.driver, StandardBrownian):
            raise UnsupportedDriver(
                "exact conditioned sampling of the limit law is available "
                "for the Brownian driver only"
            )
        if config.n < 1000:
            raise InsufficientConditionedSamples(
                f"{config.n} conditioned samples are too few for a stable KS test"
            )
        law = limit_law(line, v, side)
        t = 200.0
        rng = _chunk_rng(config.seed, 0x4C494D)
        ys = np.sort(_limit_law_samples(line, v, side, config.n, rng, t))
        F = np.array([law.cdf(float(y)) for y in ys])
        k = np.arange(1, ys.size + 1)
        ks = float(max(np.max(k / ys.size - F), np.max(F - (k - 1) / ys.size)))
        return CheckReport(
            what=f"limit_law({v:g}, {side})",
            passed=ks < 0.05,
            details={"ks": ks, "threshold": 0.05, "n": config.n, "t": t},
        )

    raise OutOfRange(f"unknown check {what!r}")

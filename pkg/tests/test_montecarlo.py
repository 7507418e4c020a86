"""Simulation engine tests.

Every stochastic assertion here runs at a frozen seed, so the observed
z-scores are deterministic; bands are set at 3.5 sigma against exact or
closed-form oracles.  The heavy n=10^6 comparisons live in the
acceptance suite; these runs are sized to keep the file under a minute.
"""

import math

import numpy as np
import pytest

from ruin2d.errors import (
    ConfigError,
    InsufficientConditionedSamples,
    InvalidHorizon,
    OutOfDomain,
    OutOfRange,
    UnsupportedDriver,
)
from ruin2d.finite_time import finite_ruin
from ruin2d.models import (
    CompoundPoissonExp,
    LineModel,
    Renewal,
    StandardBrownian,
    TwoLineModel,
    deterministic_dist,
    exponential_dist,
)
from ruin2d.montecarlo import (
    FixedTime,
    SafeLevel,
    SimConfig,
    check_limits,
    default_safe_level,
    estimate,
    simulate,
)
from ruin2d.twodim import RuinQuery, exact

CPE = TwoLineModel(CompoundPoissonExp(1.0, 2.0), 3.0, 1.0)
BM = TwoLineModel(StandardBrownian(), 3.0, 1.0)
RW = TwoLineModel(Renewal(deterministic_dist(1.0), exponential_dist(2.0)), 3.0, 1.0)

# ladder constants for the renewal pair: psi_i(x) = (1 - gamma_i/mu) e^{-gamma_i x}
RW_GAMMA1 = 1.9949670754675315
RW_GAMMA2 = 1.59362426004004


def cfg(n, seed, horizon=None, **kw):
    return SimConfig(n=n, seed=seed, horizon=horizon or SafeLevel(30.0), **kw)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError, match="replication count"):
            SimConfig(n=0, seed=1, horizon=SafeLevel(30.0))
        with pytest.raises(ConfigError, match="workers and chunk_size"):
            SimConfig(n=10, seed=1, horizon=SafeLevel(30.0), workers=0)
        with pytest.raises(ConfigError, match="ci_level"):
            SimConfig(n=10, seed=1, horizon=SafeLevel(30.0), ci_level=1.2)
        with pytest.raises(InvalidHorizon, match="must be positive"):
            FixedTime(-1.0)
        with pytest.raises(InvalidHorizon, match="must be positive"):
            SafeLevel(0.0)

    def test_default_safe_level(self):
        for model, lo_gamma in ((CPE, 1.0), (BM, 2.0), (RW, RW_GAMMA2)):
            sl = default_safe_level(model)
            assert isinstance(sl, SafeLevel)
            assert sl.L == pytest.approx(30.0 / lo_gamma, rel=1e-12)


class TestRecords:
    def test_invariants(self):
        config = cfg(4000, 13)
        records = list(simulate(CPE, 1.0, 3.0, config))
        assert len(records) == 4000
        sim_ruined = 0
        for r in records:
            assert r.tau_or == min(r.tau1, r.tau2)
            if math.isfinite(r.tau_sim):
                assert r.tau_sim + 1e-12 >= max(r.tau1, r.tau2)
                sim_ruined += 1
            assert r.censor_reason in (None, "safe_level")
            assert r.likelihood_weight == 1.0  # untilted runs carry unit weight
        assert sim_ruined > 0

    def test_estimate_matches_record_average(self):
        # untilted, the estimator is a plain indicator mean over the
        # same substreams simulate() exposes
        config = cfg(4000, 13)
        records = list(simulate(CPE, 1.0, 3.0, config))
        frac = np.mean([math.isfinite(r.tau_or) for r in records])
        est = estimate(CPE, 1.0, 3.0, "OR", config)
        assert est.p_hat == frac
        assert est.n == 4000

    def test_clean_horizon_censors_everything(self):
        # claim rate ~0: nothing can ruin inside a unit horizon
        quiet = TwoLineModel(CompoundPoissonExp(1e-9, 2.0), 3.0, 1.0)
        records = list(simulate(quiet, 1.0, 3.0, cfg(60, 1, FixedTime(1.0))))
        assert all(r.censor_reason == "fixed_time" for r in records)
        assert all(math.isinf(r.tau_or) for r in records)
        assert all(r.likelihood_weight == 1.0 for r in records)

    def test_first_claim_sinks_both_lines(self):
        # mean claim 5 against reserves 0.01: the opening claim almost
        # surely ruins both lines in the same instant
        heavy = TwoLineModel(CompoundPoissonExp(5.0, 0.2), 3.0, 1.0)
        records = list(simulate(heavy, 0.01, 0.01, cfg(300, 4, SafeLevel(1.0))))
        simo = [r for r in records if math.isfinite(r.tau_sim) and r.tau1 == r.tau2 == r.tau_sim]
        assert len(simo) > len(records) // 2


class TestReproducibility:
    CASES = [
        ("cpe-safe", CPE, dict(horizon=SafeLevel(30.0))),
        ("cpe-tilt", CPE, dict(horizon=FixedTime(25.0), tilt=-1.0)),
        ("bm-safe", BM, dict(horizon=SafeLevel(15.0))),
        ("rw-tilt", RW, dict(horizon=SafeLevel(25.0), tilt=-1.8)),
    ]

    @pytest.mark.parametrize("name,model,kw", CASES, ids=[c[0] for c in CASES])
    def test_worker_count_is_invisible(self, name, model, kw):
        runs = [
            estimate(model, 1.0, 3.0, "OR", SimConfig(n=20_000, seed=5, workers=w, **kw))
            for w in (1, 4, 16)
        ]
        assert runs[0].p_hat == runs[1].p_hat == runs[2].p_hat
        assert runs[0].std_err == runs[1].std_err == runs[2].std_err

    def test_seed_matters(self):
        a = estimate(CPE, 1.0, 3.0, "OR", cfg(20_000, 5))
        b = estimate(CPE, 1.0, 3.0, "OR", cfg(20_000, 6))
        assert a.p_hat != b.p_hat


class TestAgainstExact:
    @pytest.mark.parametrize("event", ["OR", "SIM", "AND", "LINE1", "LINE2"])
    @pytest.mark.parametrize("model,n", [(CPE, 100_000), (BM, 50_000)], ids=["cpe", "bm"])
    def test_plain_estimate(self, model, n, event):
        target = exact(model, RuinQuery(event, 1.0, 3.0)).value
        est = estimate(model, 1.0, 3.0, event, SimConfig(n=n, seed=11, horizon=default_safe_level(model)))
        assert abs(est.p_hat - target) <= 3.5 * est.std_err
        assert est.ci[0] <= est.p_hat <= est.ci[1]

    def test_ci_level_widens_interval(self):
        narrow = estimate(CPE, 1.0, 3.0, "OR", cfg(20_000, 5, ci_level=0.90))
        wide = estimate(CPE, 1.0, 3.0, "OR", cfg(20_000, 5, ci_level=0.99))
        assert wide.ci[1] - wide.ci[0] > narrow.ci[1] - narrow.ci[0]
        assert narrow.p_hat == wide.p_hat


class TestImportanceSampling:
    def test_finite_time_weights_are_unbiased(self):
        # single line lambda=1, mu=2, p=1 carried on line 2 of a pair;
        # P(tau <= 5) from x=5 against the spectral integral
        single = TwoLineModel(CompoundPoissonExp(1.0, 2.0), 2.0, 1.0)
        target = finite_ruin(LineModel(CompoundPoissonExp(1.0, 2.0), 1.0), 5.0, 5.0).value
        errs = {}
        for tilt in (None, -1.0):
            config = SimConfig(n=30_000, seed=3, horizon=FixedTime(5.0), tilt=tilt)
            vals = np.fromiter(
                (r.likelihood_weight * (r.tau2 <= 5.0) for r in simulate(single, 5.0, 5.0, config)),
                dtype=float,
            )
            se = vals.std(ddof=1) / math.sqrt(len(vals))
            assert abs(vals.mean() - target) <= 3.5 * se
            errs[tilt] = se
        # exponential twisting pays for itself by a wide margin here
        assert errs[-1.0] < errs[None] / 3.0

    def test_ultimate_variance_reduction(self):
        target = 0.5 * math.exp(-6.0)  # C2 e^{-gamma2 x}
        plain = estimate(CPE, 6.0, 6.0, "LINE2", cfg(30_000, 9, SafeLevel(40.0)))
        tilted = estimate(CPE, 6.0, 6.0, "LINE2", cfg(30_000, 9, SafeLevel(40.0), tilt=-1.0))
        for est in (plain, tilted):
            assert abs(est.p_hat - target) <= 3.5 * est.std_err
        assert tilted.std_err < plain.std_err / 10.0

    def test_renewal_ladder_value(self):
        # det(1) interarrivals, Exp(2) claims: psi_2(x) = (1 - g2/2) e^{-g2 x}
        target = (1.0 - RW_GAMMA2 / 2.0) * math.exp(-RW_GAMMA2 * 2.0)
        est = estimate(RW, 1.0, 2.0, "LINE2", cfg(40_000, 21, tilt=-1.8))
        assert abs(est.p_hat - target) <= 3.5 * est.std_err

    def test_strong_tilt_or_respects_sandwich(self):
        # at tilt -gamma_1 the line-1-only contribution dominates the
        # weight bookkeeping; a stale weight deflates OR by an order of
        # magnitude, so the single-line sandwich is a sharp regression net
        psi1 = (1.0 - RW_GAMMA1 / 2.0) * math.exp(-RW_GAMMA1 * 3.5)
        psi2 = (1.0 - RW_GAMMA2 / 2.0) * math.exp(-RW_GAMMA2 * 7.0)
        est = estimate(RW, 3.5, 7.0, "OR", cfg(60_000, 33, tilt=-RW_GAMMA1))
        assert est.p_hat >= 0.5 * max(psi1, psi2)
        assert est.p_hat <= 1.5 * (psi1 + psi2)


class TestSafeLevelBias:
    def test_raising_the_level_moves_less_than_the_bound(self):
        lo = estimate(CPE, 1.0, 3.0, "OR", cfg(50_000, 2, SafeLevel(20.0)))
        hi = estimate(CPE, 1.0, 3.0, "OR", cfg(50_000, 2, SafeLevel(40.0)))
        assert abs(lo.p_hat - hi.p_hat) <= lo.bias_bound + hi.bias_bound + 1e-15
        assert 0.0 < hi.bias_bound < lo.bias_bound

    def test_fixed_time_reports_nan_bound(self):
        est = estimate(CPE, 1.0, 3.0, "OR", cfg(5_000, 5, FixedTime(25.0), tilt=-1.0))
        assert math.isnan(est.bias_bound)


class TestEstimateGuards:
    def test_fixed_time_without_tilt_is_refused(self):
        with pytest.raises(InvalidHorizon, match="truncates ultimate"):
            estimate(CPE, 1.0, 3.0, "OR", cfg(100, 1, FixedTime(5.0)))

    def test_safe_level_must_clear_reserves(self):
        with pytest.raises(InvalidHorizon, match="must exceed max"):
            estimate(CPE, 1.0, 3.0, "OR", cfg(100, 1, SafeLevel(2.0)))

    def test_zero_tilted_drift(self):
        # tilt -1.0 stalls line 2 of the renewal pair exactly
        with pytest.raises(InvalidHorizon, match="zero effective drift"):
            estimate(RW, 1.0, 2.0, "LINE2", cfg(100, 1, tilt=-1.0))

    def test_unknown_event(self):
        with pytest.raises(OutOfRange, match="unknown event"):
            estimate(CPE, 1.0, 3.0, "RUIN", cfg(100, 1))

    def test_negative_reserve(self):
        with pytest.raises(ConfigError, match="reserves"):
            estimate(CPE, -1.0, 3.0, "OR", cfg(100, 1))

    def test_tilt_outside_claim_domain(self):
        with pytest.raises(OutOfDomain):
            estimate(CPE, 1.0, 3.0, "OR", cfg(100, 1, tilt=-2.5))


class TestCheckLimits:
    @pytest.mark.parametrize(
        "line",
        [LineModel(StandardBrownian(), -0.5), LineModel(CompoundPoissonExp(2.0, 2.0), 0.5)],
        ids=["bm", "cpe"],
    )
    def test_lln_ruin_time(self, line):
        report = check_limits(line, "lln_ruin_time", cfg(5_000, 7, SafeLevel(50.0)))
        assert report.passed
        assert report.details["target"] == pytest.approx(2.0)
        for key in ("x=50", "x=100"):
            cell = report.details[key]
            assert cell["n_ruined"] == 5_000  # ruin is certain under negative drift
            assert abs(cell["mean_ratio"] - 2.0) <= 0.2

    @pytest.mark.parametrize(
        "line,spec",
        [
            (LineModel(StandardBrownian(), 1.0), ("limit_law", 2.0, "ruin")),
            (LineModel(StandardBrownian(), -1.0), ("limit_law", 0.5, "survival")),
        ],
        ids=["ruin", "survival"],
    )
    def test_limit_law(self, line, spec):
        report = check_limits(line, spec, cfg(4_000, 7, SafeLevel(50.0)))
        assert report.passed
        assert report.details["ks"] < report.details["threshold"] == 0.05
        assert report.details["t"] == 200.0

    def test_refusals(self):
        ok = cfg(2_000, 1, SafeLevel(50.0))
        with pytest.raises(OutOfRange, match="negative-drift"):
            check_limits(LineModel(StandardBrownian(), 0.5), "lln_ruin_time", ok)
        with pytest.raises(InsufficientConditionedSamples):
            check_limits(LineModel(StandardBrownian(), -0.5), "lln_ruin_time", cfg(500, 1, SafeLevel(50.0)))
        with pytest.raises(UnsupportedDriver, match="Brownian driver only"):
            check_limits(LineModel(CompoundPoissonExp(1.0, 2.0), 1.0), ("limit_law", 2.0, "ruin"), ok)
        with pytest.raises(InsufficientConditionedSamples):
            check_limits(LineModel(StandardBrownian(), 1.0), ("limit_law", 2.0, "ruin"), cfg(500, 1, SafeLevel(50.0)))
        with pytest.raises(OutOfRange, match="unknown check"):
            check_limits(LineModel(StandardBrownian(), 1.0), "nope", ok)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdd_kit import (
    Dataset,
    ThresholdSpec,
    Window,
    compliance_rates,
    estimate_fuzzy,
    estimate_sharp,
    fit_local_linear,
    bandwidth_sweep,
)
from rdd_kit.core import RegimeTag
from rdd_kit.errors import (
    DegenerateDesign,
    EmptySide,
    NotSharp,
    TooFewPoints,
    WeakDiscontinuity,
)
from rdd_kit.simulator import generate

from _fixtures import (
    BANDWIDTH,
    FUZZY_SCENARIO,
    SHARP_SCENARIO,
    X0,
    records_from_columns,
    sharp_step_dataset,
)
from _oracles import ols_normal_equations

TH = ThresholdSpec(X0)
WIN = Window(X0, BANDWIDTH)


def dataset(x, y, t):
    return Dataset(
        assignment=np.asarray(x, float),
        outcome=np.asarray(y, float),
        treatment=np.asarray(t, int),
    )


class TestFitLocalLinear:
    def test_exact_line_through_two_points(self):
        records = records_from_columns([-0.02, -0.01], [1.0, 1.1], [0, 0])
        fit = fit_local_linear(records, 0.0)
        assert fit.intercept == pytest.approx(1.2, abs=1e-12)
        assert fit.slope == pytest.approx(10.0, abs=1e-12)
        assert fit.residual_variance == 0.0
        assert fit.intercept_se == 0.0

    def test_constant_outcome(self):
        records = records_from_columns([-0.01, -0.02, -0.03], [2.5] * 3, [0] * 3)
        fit = fit_local_linear(records, 0.0)
        assert fit.intercept == pytest.approx(2.5, abs=1e-12)
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(50):
            n = rng.integers(3, 100)
            x = rng.uniform(-1, 1, n)
            y = rng.normal(0, 1, n) + rng.uniform(-5, 5) * x + rng.uniform(-5, 5)
            fit = fit_local_linear(records_from_columns(x, y, np.zeros(n, int)), 0.0)
            b0, b1, se0, s2 = ols_normal_equations(x, y)
            assert fit.intercept == pytest.approx(b0, abs=1e-10)
            assert fit.slope == pytest.approx(b1, abs=1e-10)
            assert fit.intercept_se == pytest.approx(se0, abs=1e-10)
            assert fit.residual_variance == pytest.approx(s2, abs=1e-10)

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            fit_local_linear(records_from_columns([0.1], [1.0], [0]), 0.0)

    def test_degenerate_design(self):
        with pytest.raises(DegenerateDesign):
            fit_local_linear(
                records_from_columns([0.1, 0.1, 0.1], [1.0, 2.0, 3.0], [0, 0, 0]), 0.0
            )


class TestComplianceRates:
    def test_arithmetic_means(self):
        above = records_from_columns([0.21] * 4, [0.0] * 4, [1, 1, 1, 0])
        below = records_from_columns([0.19] * 4, [0.0] * 4, [0, 0, 1, 0])
        rates = compliance_rates(above, below)
        assert rates.pi_above == 0.75
        assert rates.pi_below == 0.25

    def test_perfect_compliance(self):
        above = records_from_columns([0.21] * 3, [0.0] * 3, [1, 1, 1])
        below = records_from_columns([0.19] * 3, [0.0] * 3, [0, 0, 0])
        rates = compliance_rates(above, below)
        assert (rates.pi_above, rates.pi_below) == (1.0, 0.0)
        assert rates.gap == 1.0

    def test_all_treated_both_sides(self):
        above = records_from_columns([0.21] * 2, [0.0] * 2, [1, 1])
        below = records_from_columns([0.19] * 2, [0.0] * 2, [1, 1])
        rates = compliance_rates(above, below)
        assert (rates.pi_above, rates.pi_below) == (1.0, 1.0)

    def test_empty_side(self):
        with pytest.raises(EmptySide):
            compliance_rates([], records_from_columns([0.19], [0.0], [0]))


class TestEstimateSharp:
    def test_noiseless_step_is_exact(self):
        data = sharp_step_dataset(low=1.0, high=2.0)
        est = estimate_sharp(data, TH, WIN)
        assert est.point == pytest.approx(1.0, abs=1e-12)
        assert est.design == "sharp"
        assert est.compliance_gap is None

    def test_null_effect(self):
        cfg = SHARP_SCENARIO
        import dataclasses

        null_cfg = dataclasses.replace(cfg, tau=0.0, seed=5)
        data = generate(null_cfg, RegimeTag.OBSERVATIONAL_SHARP)
        est = estimate_sharp(data, TH, WIN)
        assert abs(est.point) < 4 * est.std_error

    def test_recovers_simulated_truth(self):
        data = generate(SHARP_SCENARIO, RegimeTag.OBSERVATIONAL_SHARP)
        est = estimate_sharp(data, TH, WIN)
        assert est.point == pytest.approx(-0.9, abs=0.1)

    def test_not_sharp_guard(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        with pytest.raises(NotSharp):
            estimate_sharp(data, TH, WIN)

    def test_too_few_points(self):
        data = sharp_step_dataset(n_side=1)
        with pytest.raises(TooFewPoints):
            estimate_sharp(data, TH, WIN)


class TestEstimateFuzzy:
    def test_forced_arithmetic(self):
        # flat sides: intercept jump exactly -0.5; pi_a = 0.5, pi_b = 0
        x = [0.17, 0.18, 0.19, 0.21, 0.22, 0.23, 0.24]
        y = [1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5]
        t = [0, 0, 0, 1, 1, 0, 0]
        data = dataset(x, y, t)
        est = estimate_fuzzy(data, TH, WIN, uncertainty="none")
        assert est.point == pytest.approx(-1.0, abs=1e-12)
        assert est.compliance_gap == pytest.approx(0.5, abs=1e-15)

    def test_perfect_compliance_matches_sharp_exactly(self):
        data = sharp_step_dataset(low=2.0, high=1.4)
        sharp = estimate_sharp(data, TH, WIN)
        fuzzy = estimate_fuzzy(data, TH, WIN, uncertainty="none")
        assert fuzzy.point == sharp.point  # bitwise: denominator is exactly 1.0
        assert fuzzy.compliance_gap == 1.0

    def test_recovers_simulated_truth(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        est = estimate_fuzzy(data, TH, WIN, uncertainty="none")
        assert est.point == pytest.approx(-0.9, abs=0.15)

    def test_weak_discontinuity(self):
        rng = np.random.default_rng(0)
        n = 200
        x = np.concatenate([rng.uniform(0.1, 0.2 - 1e-9, n // 2),
                            rng.uniform(0.2, 0.3, n // 2)])
        t = np.tile([0, 1], n // 2)  # identical treatment rate on both sides
        y = rng.normal(0, 1, n)
        with pytest.raises(WeakDiscontinuity):
            estimate_fuzzy(dataset(x, y, t), TH, WIN, uncertainty="none")

    def test_delta_uncertainty_brackets_point(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        est = estimate_fuzzy(data, TH, WIN, uncertainty="delta")
        assert est.ci_low < est.point < est.ci_high
        assert est.std_error > 0

    def test_covariate_adjustment_runs(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        est = estimate_fuzzy(data, TH, WIN, uncertainty="none", adjust=["c"])
        assert est.point == pytest.approx(-0.9, abs=0.15)


class TestEquivariance:
    @settings(max_examples=20, deadline=None)
    @given(shift=st.floats(-5, 5), scale=st.floats(0.1, 4))
    def test_outcome_shift_and_scale(self, shift, scale):
        data = sharp_step_dataset(low=1.0, high=2.0)
        base = estimate_sharp(data, TH, WIN).point
        shifted = Dataset(
            assignment=data.assignment, outcome=data.outcome + shift,
            treatment=data.treatment,
        )
        scaled = Dataset(
            assignment=data.assignment, outcome=data.outcome * scale,
            treatment=data.treatment,
        )
        assert estimate_sharp(shifted, TH, WIN).point == pytest.approx(base, abs=1e-9)
        assert estimate_sharp(scaled, TH, WIN).point == pytest.approx(
            base * scale, abs=1e-9
        )

    @settings(max_examples=20, deadline=None)
    @given(shift=st.floats(-3, 3))
    def test_assignment_shift(self, shift):
        data = sharp_step_dataset()
        moved = Dataset(
            assignment=data.assignment + shift, outcome=data.outcome,
            treatment=data.treatment,
        )
        base = estimate_sharp(data, TH, WIN)
        est = estimate_sharp(
            moved, ThresholdSpec(X0 + shift), Window(X0 + shift, BANDWIDTH)
        )
        assert est.point == pytest.approx(base.point, abs=1e-9)


class TestBandwidthSweep:
    def test_three_bandwidths_shrinking_se(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        entries = bandwidth_sweep(
            data, TH, [0.05, 0.10, 0.15], "fuzzy", uncertainty="delta"
        )
        assert [e.bandwidth for e in entries] == [0.05, 0.10, 0.15]
        ses = [e.estimate.std_error for e in entries]
        # more data, tighter SE on this generated instance
        assert ses[0] > ses[1] > ses[2]

    def test_singleton_equals_direct(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        [entry] = bandwidth_sweep(data, TH, [0.1], "fuzzy", uncertainty="none")
        direct = estimate_fuzzy(data, TH, WIN, uncertainty="none")
        assert entry.estimate.point == direct.point

    def test_oversized_bandwidth_uses_everything(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        [entry] = bandwidth_sweep(data, TH, [10.0], "fuzzy", uncertainty="none")
        est = entry.estimate
        assert est.n_above + est.n_below == len(data)

    def test_errors_captured_per_entry(self):
        data = sharp_step_dataset(n_side=5)
        entries = bandwidth_sweep(data, TH, [1e-9, 0.1], "sharp")
        assert entries[0].estimate is None
        assert entries[0].error == "TooFewPoints"
        assert entries[1].estimate is not None


class TestSharpBootstrap:
    def test_sharp_estimate_with_bootstrap_interval(self):
        data = generate(SHARP_SCENARIO, RegimeTag.OBSERVATIONAL_SHARP)
        est = estimate_sharp(
            data, TH, WIN, uncertainty="bootstrap", replications=300, seed=6
        )
        assert est.ci_low <= est.point <= est.ci_high
        # bootstrap and analytic SEs agree to first order on smooth data
        analytic = estimate_sharp(data, TH, WIN).std_error
        assert est.std_error == pytest.approx(analytic, rel=0.35)


class TestConsistency:
    def test_error_shrinks_with_sample_size(self):
        # stochastic consistency at fixed seeds: mean absolute error over a
        # small set of repetitions drops as n grows
        import dataclasses
        from rdd_kit.simulator import generate as gen

        mean_abs_err = {}
        for n in (500, 5000, 50000):
            errs = []
            for rep in range(12):
                cfg = dataclasses.replace(FUZZY_SCENARIO, n=n, seed=9000 + rep)
                data = gen(cfg, RegimeTag.OBSERVATIONAL_FUZZY)
                est = estimate_fuzzy(data, TH, WIN, uncertainty="none")
                errs.append(abs(est.point - (-0.9)))
            mean_abs_err[n] = float(np.mean(errs))
        assert mean_abs_err[500] > mean_abs_err[5000] > mean_abs_err[50000]

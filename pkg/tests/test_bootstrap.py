import numpy as np
import pytest

from rdd_kit import (
    ThresholdSpec,
    Window,
    bootstrap_uncertainty,
    estimate_fuzzy,
    estimate_sharp,
)
from rdd_kit.core import Dataset, RegimeTag
from rdd_kit.errors import BootstrapDegenerate
from rdd_kit.simulator import generate

from _fixtures import BANDWIDTH, FUZZY_SCENARIO, X0, sharp_step_dataset

TH = ThresholdSpec(X0)
WIN = Window(X0, BANDWIDTH)


class TestBootstrap:
    def test_noiseless_step_collapses(self):
        data = sharp_step_dataset(n_side=30)
        boot = bootstrap_uncertainty(data, TH, WIN, "sharp", replications=300, seed=3)
        point = estimate_sharp(data, TH, WIN).point
        assert boot.std_error == pytest.approx(0.0, abs=1e-12)
        assert boot.ci_low == pytest.approx(point, abs=1e-12)
        assert boot.ci_high == pytest.approx(point, abs=1e-12)
        assert boot.n_failed == 0

    def test_same_seed_identical(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        a = bootstrap_uncertainty(data, TH, WIN, "fuzzy", replications=200, seed=17)
        b = bootstrap_uncertainty(data, TH, WIN, "fuzzy", replications=200, seed=17)
        assert a == b

    def test_different_seeds_differ(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        a = bootstrap_uncertainty(data, TH, WIN, "fuzzy", replications=200, seed=17)
        b = bootstrap_uncertainty(data, TH, WIN, "fuzzy", replications=200, seed=18)
        assert a != b

    def test_worker_count_does_not_change_results(self, monkeypatch):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        monkeypatch.delenv("RDD_KIT_THREADS", raising=False)
        serial = bootstrap_uncertainty(data, TH, WIN, "fuzzy", replications=300, seed=5)
        monkeypatch.setenv("RDD_KIT_THREADS", "4")
        threaded = bootstrap_uncertainty(data, TH, WIN, "fuzzy", replications=300, seed=5)
        assert serial == threaded

    def test_minimum_replications(self):
        data = sharp_step_dataset()
        with pytest.raises(ValueError):
            bootstrap_uncertainty(data, TH, WIN, "sharp", replications=50, seed=0)

    def test_degenerate_bootstrap(self):
        # two records per side: resamples frequently lose a side or its
        # x-variation, so more than 20% of replicates must fail
        data = Dataset(
            assignment=np.array([0.18, 0.19, 0.21, 0.22]),
            outcome=np.array([1.0, 1.1, 2.0, 2.2]),
            treatment=np.array([0, 0, 1, 1]),
        )
        with pytest.raises(BootstrapDegenerate):
            bootstrap_uncertainty(data, TH, WIN, "sharp", replications=400, seed=1)

    def test_estimator_carries_bootstrap_interval(self):
        data = generate(FUZZY_SCENARIO, RegimeTag.OBSERVATIONAL_FUZZY)
        est = estimate_fuzzy(
            data, TH, WIN, uncertainty="bootstrap", replications=400, seed=11
        )
        assert est.ci_low <= est.point <= est.ci_high
        assert est.std_error > 0

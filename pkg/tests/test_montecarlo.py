import csv
import io

import numpy as np
import pytest

from ecclab.channels import QEC, QSC, SPBC
from ecclab.gf import GF
from ecclab.gfft import TransformPlan
from ecclab.montecarlo import (CSV_COLUMNS, BernoulliSystem, CampaignConfig, ConfigError, LdpcSystem,
                               PolarSystem, rows_to_csv, run_campaign, run_chunk, sweep, trial_rng,
                               wilson_interval)
from ecclab.polar_design import design
from ecclab.scldpc import EnsembleParams


@pytest.fixture(scope="module")
def d30():
    return design(TransformPlan.create(GF(31), 30, (2, 3, 5)), 0.5, 0.1)


def test_trial_streams_are_independent_of_order():
    a = trial_rng(5, 17).random(3)
    trial_rng(5, 16).random(10)
    assert np.array_equal(trial_rng(5, 17).random(3), a)
    assert not np.array_equal(trial_rng(6, 17).random(3), a)


def test_noiseless_channel(d30):
    rep = run_campaign(CampaignConfig(PolarSystem(d30), QEC(0.0), max_trials=100, master_seed=1))
    assert (rep.trials, rep.failures, rep.estimate) == (100, 0, 0.0)
    assert rep.ci_lo == 0.0 and rep.ci_hi > 0


def test_rerun_is_identical(d30):
    cfg = CampaignConfig(PolarSystem(d30), QEC(0.55), max_trials=300, master_seed=9)
    assert run_campaign(cfg).counts() == run_campaign(cfg).counts()


def test_worker_and_chunk_independence():
    p = EnsembleParams(3, 6, 3, 64, 10)
    base = dict(system=LdpcSystem(p), channel=SPBC(), target_failures=4, master_seed=3)
    reps = [run_campaign(CampaignConfig(**base, workers=w, chunk=c)) for w, c in ((1, 500), (2, 37), (3, 64))]
    assert reps[0].counts() == reps[1].counts() == reps[2].counts()


def test_stop_on_failures_lands_on_the_failure():
    cfg = CampaignConfig(BernoulliSystem(0.2), target_failures=7, master_seed=4, chunk=10)
    rep = run_campaign(cfg)
    fails, _, _ = run_chunk(cfg, 0, rep.trials)
    assert fails.sum() == 7 and fails[-1]
    assert rep.failures == 7


def test_max_trials_caps_failure_target():
    rep = run_campaign(CampaignConfig(BernoulliSystem(0.01), target_failures=1000, max_trials=250))
    assert rep.trials == 250


def test_wilson_coverage():
    p_true, n = 0.1, 200
    hits = 0
    for seed in range(200):
        rep = run_campaign(CampaignConfig(BernoulliSystem(p_true), max_trials=n, master_seed=seed, chunk=n))
        assert rep.ci_lo <= rep.estimate <= rep.ci_hi
        hits += rep.ci_lo <= p_true <= rep.ci_hi
    assert 0.90 <= hits / 200 <= 0.99


def test_wilson_known_value():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and hi == pytest.approx(0.0370, abs=1e-4)


def test_bit_metric(d30):
    rep = run_campaign(CampaignConfig(PolarSystem(d30), QEC(0.6), max_trials=200, metric="bit"))
    assert rep.bits == 200 * d30.k
    assert rep.estimate == rep.bit_errors / rep.bits


def test_config_errors(d30):
    with pytest.raises(ConfigError):
        CampaignConfig(BernoulliSystem(0.1))
    with pytest.raises(ConfigError):
        CampaignConfig(BernoulliSystem(0.1), target_failures=0)
    with pytest.raises(ConfigError):
        CampaignConfig(PolarSystem(d30, "soft"), QSC(0.1), max_trials=1)
    with pytest.raises(ConfigError):
        CampaignConfig(PolarSystem(d30, "erasure"), QSC(0.1), max_trials=1)
    with pytest.raises(ConfigError):
        CampaignConfig(PolarSystem(d30), SPBC(), max_trials=1)
    with pytest.raises(ConfigError):
        CampaignConfig(LdpcSystem(EnsembleParams(3, 6, 3, 64, 10)), QSC(0.1), max_trials=1)


def test_sweep_rows(d30):
    with pytest.raises(ConfigError):
        sweep([])
    cfg = CampaignConfig(PolarSystem(d30), QEC(0.5), max_trials=50, master_seed=2)
    rows = sweep([cfg])
    rep = run_campaign(cfg)
    assert rows[0]["failures"] == rep.failures and rows[0]["trials"] == 50
    bad = CampaignConfig(LdpcSystem(EnsembleParams(3, 6, 3, 64, 10)), SPBC(99), max_trials=5)
    rows = sweep([bad, cfg])
    assert "EnsembleError" in rows[0]["error"] and rows[1]["error"] == ""
    text = rows_to_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == CSV_COLUMNS and len(parsed) == 3

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zpotfs.config import ExperimentConfig, resolve_config
from zpotfs.errors import InvalidArgument
from zpotfs.harness import (
    RunningMean,
    TrialRecord,
    aggregate,
    ccdf,
    nmse,
    papr,
    papr_at_ccdf,
    read_csv,
    records_to_csv,
    run_experiment,
    run_trial,
    trial_seed,
    trial_streams,
    write_csv,
)

SMALL = ExperimentConfig(m=16, n=16, snr_db=(10.0,), frames=3, seed=4)


def test_nmse_examples():
    assert nmse([1, 0], [1, 0]) == 0
    assert nmse([0, 0], [1, 1j]) == 1
    assert nmse([1.5, 0], [1, 0]) == pytest.approx(0.25)
    with pytest.raises(InvalidArgument):
        nmse([1], [0])


def test_papr_examples():
    assert papr(np.ones(16)) == pytest.approx(0.0)
    s = np.zeros(16)
    s[3] = 2.0
    assert papr(s) == pytest.approx(10 * np.log10(16))
    with pytest.raises(InvalidArgument):
        papr(np.zeros(4))


@given(st.lists(st.floats(0, 20), min_size=1, max_size=50), st.floats(1e-3, 1e3))
def test_papr_is_scale_invariant(mags, alpha):
    s = np.asarray(mags) + 1e-3
    assert papr(alpha * s) == pytest.approx(papr(s), abs=1e-9)
    assert papr(s) >= -1e-12


def test_ccdf_examples_and_monotonicity():
    values = [1.0, 2.0, 3.0, 4.0]
    assert ccdf(values, [0, 1, 2.5, 4]) == [(0.0, 1.0), (1.0, 0.75), (2.5, 0.5), (4.0, 0.0)]
    probs = [c for _, c in ccdf(np.random.default_rng(0).random(100), np.linspace(0, 1, 21))]
    assert all(a >= b for a, b in zip(probs, probs[1:]))
    assert papr_at_ccdf(np.arange(101.0), 0.1) == pytest.approx(90.0)


def test_trial_seed_is_a_pure_function():
    assert trial_seed(1, 2, 3) == trial_seed(1, 2, 3)
    seeds = {trial_seed(0, i, j) for i in range(5) for j in range(50)}
    assert len(seeds) == 250
    a, b = trial_streams(trial_seed(0, 0, 0)), trial_streams(trial_seed(0, 0, 0))
    assert a[1].random() == b[1].random()


def test_schemes_share_channel_and_noise():
    p = SMALL.grid()
    recs = {s: run_trial(dataclasses.replace(SMALL, scheme=s), 0, 1, p) for s in ("proposed", "ep", "known-csi")}
    assert len({r.seed for r in recs.values()}) == 1
    assert all(r.error is None for r in recs.values())


def test_known_csi_noiseless_is_error_free():
    cfg = ExperimentConfig(m=32, n=32, snr_db=(math.inf,), frames=10, scheme="known-csi")
    assert all(r.ber2 == 0 for r in run_experiment(cfg, workers=1))


def test_csv_is_reproducible_and_round_trips(tmp_path):
    cfg, manifest = resolve_config(overrides=dataclasses.asdict(SMALL))
    a = records_to_csv(run_experiment(cfg, workers=1), manifest)
    records = run_experiment(cfg, workers=1)
    _, manifest2 = resolve_config(overrides=dataclasses.asdict(SMALL))
    assert records_to_csv(records, manifest2) == a
    path = write_csv(records, tmp_path / "run.csv", manifest)
    assert path.read_text() == a
    assert "timestamp" in (tmp_path / "run.csv.manifest").read_text()
    assert read_csv(path) == records


def test_failed_trials_are_counted_and_skipped():
    good = TrialRecord(1, "proposed", 8, 8, 5.0, 0.1, 0.05, 0.2, 0.1, 9.0, 3, 4)
    bad = dataclasses.replace(good, seed=2, nmse1=math.nan, error="DetectorDegenerate: x")
    text = records_to_csv([good, bad])
    assert "# failed_trials = 1" in text
    assert text.count("\n1,proposed") == 1 and "\n2,proposed" not in text
    agg = aggregate([good, bad])[("proposed", 5.0)]
    assert agg["failed"] == 1 and agg["frames"] == 1 and agg["nmse1"] == pytest.approx(0.1)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200), st.randoms())
def test_running_mean(values, random):
    acc = RunningMean()
    for v in values:
        acc.add(v)
    assert acc.mean == pytest.approx(np.mean(values), rel=1e-9, abs=1e-6)
    assert acc.variance == pytest.approx(np.var(values, ddof=1), rel=1e-6, abs=1e-3)
    recs = [TrialRecord(i, "ep", 8, 8, 0.0, v, v, 0, 0, 0, 0, 0) for i, v in enumerate(values)]
    shuffled = list(recs)
    random.shuffle(shuffled)
    assert aggregate(recs) == aggregate(shuffled)


@pytest.mark.slow
def test_ber_decreases_with_snr():
    cfg = ExperimentConfig(m=32, n=32, snr_db=(0.0, 5.0, 10.0, 15.0, 20.0), frames=200, seed=11)
    agg = aggregate(run_experiment(cfg))
    ber = [agg[("proposed", s)]["ber2"] for s in cfg.snr_db]
    assert all(a >= b for a, b in zip(ber, ber[1:])), ber

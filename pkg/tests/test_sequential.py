"""Tests for the Monte-Carlo sequential detection simulator."""

import dataclasses
import math

import numpy as np
import pytest

from clickqi.detection import DetectorModel
from clickqi.illumination import (
    Scenario,
    ShotLikelihoods,
    herald_no_click_prob,
    p_click_h0,
    p_click_h1_coherent,
    p_click_h1_pnst,
    p_click_h1_vst,
    posterior_update,
)
from clickqi.sequential import (
    PairingError,
    TrajectoryConfig,
    crossing_shot,
    paired_comparison,
    run_ensemble,
    run_trajectory,
)


def scenario(probe="tmsv", **overrides):
    base = dict(nbar=1.0, kappa=0.1, nbar_b=3.0,
                signal_det=DetectorModel(0.9), idler_det=DetectorModel(0.9),
                probe_kind=probe)
    base.update(overrides)
    return Scenario(**base)


def config(probe="tmsv", shots=500, trials=1, **overrides):
    sc_fields = {k: overrides.pop(k) for k in list(overrides)
                 if k in ("nbar", "kappa", "nbar_b", "signal_det", "idler_det",
                          "intercept_eta")}
    return TrajectoryConfig(scenario=scenario(probe, **sc_fields),
                            shots=shots, trials=trials, **overrides)


class TestConfig:
    def test_threshold_range(self):
        with pytest.raises(ValueError):
            config(threshold=0.5)
        with pytest.raises(ValueError):
            config(threshold=1.0)

    def test_ground_truth_values(self):
        with pytest.raises(ValueError):
            config(ground_truth="maybe")

    def test_stride_defaults(self):
        assert config(shots=1000).stride == 1
        assert config(shots=2_000_000).stride == 2


class TestTrajectory:
    def test_prior_starts_at_half(self):
        rec = run_trajectory(config(seed=5))
        assert rec.posteriors[0] == 0.5
        assert rec.posteriors.size == 501

    def test_posteriors_stay_clamped(self):
        rec = run_trajectory(config(shots=2000, seed=5))
        assert np.all(rec.posteriors >= 1e-15)
        assert np.all(rec.posteriors <= 1.0 - 1e-15)

    def test_outcome_bookkeeping(self):
        cfg = config(seed=9)
        rec = run_trajectory(cfg)
        assert rec.detector_outcomes.size == cfg.shots
        assert set(np.unique(rec.herald_outcomes)) <= {"pnst", "vst"}
        coh = run_trajectory(config("coherent", seed=9))
        assert set(np.unique(coh.herald_outcomes)) == {"n/a"}

    def test_matches_stepwise_bayes_updates(self):
        cfg = config(shots=300, seed=21)
        rec = run_trajectory(cfg)
        p0 = p_click_h0(cfg.scenario)
        liks = {"pnst": ShotLikelihoods(p0, p_click_h1_pnst(cfg.scenario), "pnst"),
                "vst": ShotLikelihoods(p0, p_click_h1_vst(cfg.scenario), "vst")}
        post = 0.5
        for m in range(cfg.shots):
            post = posterior_update(post, liks[rec.herald_outcomes[m]],
                                    bool(rec.detector_outcomes[m]))
            assert rec.posteriors[m + 1] == pytest.approx(post, abs=1e-9)

    def test_first_passage_matches_threshold(self):
        rec = run_trajectory(config(shots=3000, seed=2, threshold=0.6))
        if rec.first_passage is not None:
            assert rec.posteriors[rec.first_passage] > 0.6
            assert np.all(rec.posteriors[:rec.first_passage] <= 0.6)

    def test_stride_decimates_posteriors(self):
        cfg = config(shots=25, seed=3, record_stride=10)
        rec = run_trajectory(cfg)
        full = run_trajectory(config(shots=25, seed=3))
        assert np.array_equal(rec.posteriors, full.posteriors[::10])

    def test_heralded_only_sends_vst_every_shot(self):
        cfg = config(shots=200, seed=4, count_heralded_only=True)
        rec = run_trajectory(cfg)
        assert set(np.unique(rec.herald_outcomes)) == {"vst"}
        assert rec.posteriors.size == 201


class TestDeterminism:
    def test_same_seed_same_trajectory(self):
        a = run_trajectory(config(seed=77))
        b = run_trajectory(config(seed=77))
        assert np.array_equal(a.posteriors, b.posteriors)
        assert np.array_equal(a.detector_outcomes, b.detector_outcomes)

    def test_different_seeds_differ(self):
        a = run_trajectory(config(shots=2000, seed=1))
        b = run_trajectory(config(shots=2000, seed=2))
        assert not np.array_equal(a.detector_outcomes, b.detector_outcomes)

    def test_ensemble_bit_identical_across_runs(self):
        cfg = config(shots=400, trials=130, seed=10)
        s1 = run_ensemble(cfg)
        s2 = run_ensemble(cfg)
        assert np.array_equal(s1.mean_posterior, s2.mean_posterior)
        assert np.array_equal(s1.first_passage, s2.first_passage)

    def test_ensemble_bit_identical_across_worker_counts(self):
        cfg = config(shots=400, trials=200, seed=10)
        s1 = run_ensemble(cfg, workers=1)
        s3 = run_ensemble(cfg, workers=3)
        assert np.array_equal(s1.mean_posterior, s3.mean_posterior)
        assert np.array_equal(s1.first_passage, s3.first_passage)
        assert s1.detector_click_fraction == s3.detector_click_fraction


class TestEnsemble:
    def test_single_trial_equals_trajectory(self):
        cfg = config(shots=600, trials=1, seed=13)
        summary = run_ensemble(cfg)
        rec = run_trajectory(cfg, trial=0)
        assert np.array_equal(summary.mean_posterior, rec.posteriors)
        assert summary.first_passage[0] == (rec.first_passage if rec.first_passage
                                            is not None else -1)

    def test_invisible_object_is_uninformative(self):
        cfg = config(shots=200, trials=3000, seed=42, kappa=1e-9)
        summary = run_ensemble(cfg, workers=4)
        assert abs(summary.mean_posterior[-1] - 0.5) < 0.02

    def test_mean_posterior_ordering_matches_information_content(self):
        kinds = ["coherent", "tmsv", "tmsv_matched"]
        configs = [config(k, shots=2000, trials=400, seed=8) for k in kinds]
        summaries = paired_comparison(configs, workers=4)
        finals = [s.mean_posterior[-1] for s in summaries]
        assert finals[2] > finals[1] > finals[0] > 0.5

    def test_posterior_mean_monotone_within_noise(self):
        # submartingale under a true H1, supermartingale under H0
        for truth, sign in (("present", 1.0), ("absent", -1.0)):
            cfg = config(shots=300, trials=3000, seed=31, ground_truth=truth)
            summary = run_ensemble(cfg, workers=4)
            sc = cfg.scenario
            p0 = p_click_h0(sc)
            max_step = max(abs(math.log(p_click_h1_vst(sc) / p0)),
                           abs(math.log((1 - p_click_h1_vst(sc)) / (1 - p0))))
            band = 3 * (max_step / 4) / math.sqrt(cfg.trials)
            diffs = sign * np.diff(summary.mean_posterior)
            assert diffs.min() > -band

    def test_branch_accounting(self):
        cfg = config(shots=1000, trials=300, seed=17)
        summary = run_ensemble(cfg)
        n_nc = herald_no_click_prob(cfg.scenario)
        expected = 1 - n_nc
        se = math.sqrt(expected * (1 - expected) / (cfg.trials * cfg.shots))
        assert abs(summary.herald_click_fraction - expected) < 3 * se

    @pytest.mark.parametrize("truth", ["present", "absent"])
    def test_click_frequency_matches_active_probability(self, truth):
        cfg = config(shots=1000, trials=300, seed=23, ground_truth=truth)
        summary = run_ensemble(cfg)
        sc = cfg.scenario
        if truth == "present":
            n_nc = herald_no_click_prob(sc)
            expected = (n_nc * p_click_h1_pnst(sc)
                        + (1 - n_nc) * p_click_h1_vst(sc))
        else:
            expected = p_click_h0(sc)
        se = math.sqrt(expected * (1 - expected) / (cfg.trials * cfg.shots))
        assert abs(summary.detector_click_fraction - expected) < 3 * se

    def test_final_histogram_covers_all_trials(self):
        cfg = config(shots=500, trials=80, seed=3)
        counts, edges = run_ensemble(cfg).final_posterior_hist
        assert counts.sum() == 80
        assert edges[0] == 0.0 and edges[-1] == 1.0


class TestPairing:
    def test_identical_kinds_give_identical_trajectories(self):
        cfgs = [config(shots=300, trials=20, seed=5),
                config(shots=300, trials=20, seed=5)]
        a, b = paired_comparison(cfgs)
        assert np.array_equal(a.mean_posterior, b.mean_posterior)

    def test_shared_streams_couple_outcomes(self):
        # outcomes may differ only where the click thresholds differ, i.e.
        # where the shared uniform draw falls between the two thresholds
        coh_cfg = config("coherent", shots=4000, seed=12)
        tm_cfg = config("tmsv", shots=4000, seed=12)
        coh = run_trajectory(coh_cfg)
        tm = run_trajectory(tm_cfg)
        p1c = p_click_h1_coherent(coh_cfg.scenario)
        thresholds = {"pnst": p_click_h1_pnst(tm_cfg.scenario),
                      "vst": p_click_h1_vst(tm_cfg.scenario)}
        differs = coh.detector_outcomes != tm.detector_outcomes
        assert differs.any()  # thresholds do differ at these parameters
        # where the active thresholds coincide the outcomes must coincide
        for m in np.nonzero(differs)[0]:
            assert thresholds[tm.herald_outcomes[m]] != p1c

    def test_mismatched_scenario_rejected(self):
        with pytest.raises(PairingError):
            paired_comparison([config("coherent"), config("tmsv", kappa=0.2)])
        with pytest.raises(PairingError):
            paired_comparison([config("coherent"), config("tmsv", nbar=2.0)])

    def test_mismatched_trajectory_settings_rejected(self):
        with pytest.raises(PairingError):
            paired_comparison([config("coherent", seed=1), config("tmsv", seed=2)])


class TestCrossing:
    def test_crossing_shot(self):
        curve = np.array([0.5, 0.6, 0.79, 0.81, 0.9])
        assert crossing_shot(curve, 0.8) == 3
        assert crossing_shot(curve, 0.95) is None
        assert crossing_shot(curve[::-1], 0.6, above=False) == 4

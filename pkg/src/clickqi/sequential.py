"""Multi-shot Monte-Carlo simulation of sequential click detection.

Each trial sends a train of probe states at a possibly-present object and
updates the posterior Pr(H1) after every detector outcome.  For TMSV probes
a heralding draw first selects the branch (no-click -> PNST, click -> VST)
whose likelihood pair drives both the simulated outcome and the Bayesian
update.

Randomness comes from counter-based Philox streams keyed by
(seed, trial, stream), with separate named streams for the monitoring
detector and the idler.  This makes trajectories reproducible bit-for-bit
regardless of execution order or worker count, and couples paired probe
kinds through shared random numbers exactly: two configs with the same seed
see the same detector stream and the same idler stream.

Posterior accumulation runs in log-odds space (an exact Bayes chain has no
absorbing endpoint there); emitted posteriors are clipped to
[1e-15, 1 - 1e-15].
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .illumination import (
    POSTERIOR_EPS,
    Scenario,
    herald_no_click_prob,
    p_click_h0,
    p_click_h1_coherent,
    p_click_h1_pnst,
    p_click_h1_vst,
)

__all__ = [
    "TrajectoryConfig",
    "TrajectoryRecord",
    "EnsembleSummary",
    "PairingError",
    "run_trajectory",
    "run_ensemble",
    "paired_comparison",
    "crossing_shot",
]

DETECTOR_STREAM = 0
IDLER_STREAM = 1
_BLOCK = 64
_HIST_BINS = 20


class PairingError(ValueError):
    """Paired configs must differ only in probe kind."""


@dataclass(frozen=True)
class TrajectoryConfig:
    """Parameters of a Monte-Carlo run.

    ``count_heralded_only`` switches the shot axis for TMSV probes to count
    only successfully heralded (VST) probes, as from a post-selected source;
    the default counts every sent shot, with failed heralds updating via the
    PNST branch.
    """

    scenario: Scenario
    shots: int
    trials: int = 1
    ground_truth: str = "present"
    seed: int = 0
    threshold: float = 0.8
    count_heralded_only: bool = False
    record_stride: int | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.ground_truth not in ("present", "absent"):
            raise ValueError("ground_truth must be 'present' or 'absent'")
        if not 0.5 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (1/2, 1)")

    @property
    def stride(self) -> int:
        if self.record_stride is not None:
            return max(1, int(self.record_stride))
        return 1 if self.shots <= 10 ** 6 else math.ceil(self.shots / 10 ** 6)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One simulated trajectory.

    posteriors[0] is the uniform prior 1/2 (the zeroth trial); entry m is
    the posterior after shot m.  herald_outcomes holds 'pnst'/'vst' per
    shot for TMSV probes and 'n/a' for coherent ones.
    """

    posteriors: np.ndarray
    herald_outcomes: np.ndarray
    detector_outcomes: np.ndarray
    first_passage: int | None


@dataclass(frozen=True)
class EnsembleSummary:
    """Deterministic reduction of an ensemble of trajectories."""

    mean_posterior: np.ndarray
    first_passage: np.ndarray
    final_posterior_hist: tuple
    herald_click_fraction: float
    detector_click_fraction: float
    shots: int
    trials: int
    stride: int


def _branch_table(config: TrajectoryConfig):
    """Per-branch (p_h1, llr_click, llr_noclick) plus heralding probability."""
    sc = config.scenario
    p0 = p_click_h0(sc)
    if sc.probe_kind == "coherent":
        p1 = p_click_h1_coherent(sc)
        branches = {"coherent": p1}
        n_nc = None
    else:
        branches = {"pnst": p_click_h1_pnst(sc), "vst": p_click_h1_vst(sc)}
        n_nc = herald_no_click_prob(sc)
        if config.count_heralded_only:
            branches = {"vst": branches["vst"]}
            n_nc = None
    table = {}
    for label, p1 in branches.items():
        table[label] = (
            p1,
            math.log(p1 / p0),
            math.log((1.0 - p1) / (1.0 - p0)),
        )
    return table, p0, n_nc


def _trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(trial, stream))
    return np.random.Generator(np.random.Philox(ss))


def _simulate_trial(config: TrajectoryConfig, trial: int, table, p0, n_nc):
    """Vectorized single trial.

    Returns (posteriors incl. prior, branch_is_vst bools or None, clicks).
    """
    m = config.shots
    rng_det = _trial_rng(config.seed, trial, DETECTOR_STREAM)
    rng_idl = _trial_rng(config.seed, trial, IDLER_STREAM)
    p = rng_det.random(m)
    h = rng_idl.random(m)

    if "coherent" in table:
        p1, lc, ln = table["coherent"]
        ground_p = p1 if config.ground_truth == "present" else p0
        clicks = p < ground_p
        llr = np.where(clicks, lc, ln)
        branch_vst = None
    elif "pnst" not in table:
        # post-selected source: every counted shot is heralded
        p1, lc, ln = table["vst"]
        ground_p = p1 if config.ground_truth == "present" else p0
        clicks = p < ground_p
        llr = np.where(clicks, lc, ln)
        branch_vst = np.ones(m, dtype=bool)
    else:
        branch_vst = h >= n_nc
        p1p, lcp, lnp = table["pnst"]
        p1v, lcv, lnv = table["vst"]
        if config.ground_truth == "present":
            ground_p = np.where(branch_vst, p1v, p1p)
        else:
            ground_p = p0
        clicks = p < ground_p
        llr = np.where(clicks,
                       np.where(branch_vst, lcv, lcp),
                       np.where(branch_vst, lnv, lnp))

    log_odds = np.concatenate(([0.0], np.cumsum(llr)))
    with np.errstate(over="ignore"):
        posteriors = np.where(
            log_odds >= 0,
            1.0 / (1.0 + np.exp(-log_odds)),
            np.exp(log_odds) / (1.0 + np.exp(log_odds)),
        )
    posteriors = np.clip(posteriors, POSTERIOR_EPS, 1.0 - POSTERIOR_EPS)
    return posteriors, branch_vst, clicks


def run_trajectory(config: TrajectoryConfig, trial: int = 0) -> TrajectoryRecord:
    """Simulate one trajectory (trial index selects the random substreams)."""
    table, p0, n_nc = _branch_table(config)
    posteriors, branch_vst, clicks = _simulate_trial(config, trial, table, p0, n_nc)
    if branch_vst is None:
        labels = np.full(config.shots, "n/a")
    else:
        labels = np.where(branch_vst, "vst", "pnst")
    above = np.nonzero(posteriors > config.threshold)[0]
    first = int(above[0]) if above.size else None
    stride = config.stride
    if stride > 1:
        posteriors = posteriors[::stride]
    return TrajectoryRecord(posteriors, labels, clicks, first)


def _block_reduce(config: TrajectoryConfig, trials: range):
    table, p0, n_nc = _branch_table(config)
    m = config.shots
    curve_sum = np.zeros(m + 1)
    first = np.full(len(trials), -1, dtype=np.int64)
    finals = np.empty(len(trials))
    herald_clicks = 0
    det_clicks = 0
    for i, t in enumerate(trials):
        posteriors, branch_vst, clicks = _simulate_trial(config, t, table, p0, n_nc)
        curve_sum += posteriors
        above = np.nonzero(posteriors > config.threshold)[0]
        if above.size:
            first[i] = above[0]
        finals[i] = posteriors[-1]
        if branch_vst is not None:
            herald_clicks += int(branch_vst.sum())
        det_clicks += int(clicks.sum())
    return curve_sum, first, finals, herald_clicks, det_clicks


def run_ensemble(config: TrajectoryConfig, workers: int = 1) -> EnsembleSummary:
    """Simulate ``config.trials`` independent trajectories and reduce them.

    Trials are processed in fixed blocks whose partial sums are combined in
    block order, so the summary is bit-identical for any ``workers`` count.
    """
    blocks = [range(b, min(b + _BLOCK, config.trials))
              for b in range(0, config.trials, _BLOCK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _block_reduce(config, r), blocks))
    else:
        results = [_block_reduce(config, r) for r in blocks]

    curve_sum = np.zeros(config.shots + 1)
    first = np.empty(config.trials, dtype=np.int64)
    finals = np.empty(config.trials)
    herald_clicks = 0
    det_clicks = 0
    for blk, (c, f, fin, hc, dc) in zip(blocks, results):
        curve_sum += c
        first[blk.start:blk.stop] = f
        finals[blk.start:blk.stop] = fin
        herald_clicks += hc
        det_clicks += dc

    mean = curve_sum / config.trials
    stride = config.stride
    if stride > 1:
        mean = mean[::stride]
    hist = np.histogram(finals, bins=_HIST_BINS, range=(0.0, 1.0))
    total_shots = config.trials * config.shots
    is_tmsv = config.scenario.probe_kind != "coherent"
    herald_fraction = (herald_clicks / total_shots) if is_tmsv else float("nan")
    return EnsembleSummary(
        mean_posterior=mean,
        first_passage=first,
        final_posterior_hist=hist,
        herald_click_fraction=herald_fraction,
        detector_click_fraction=det_clicks / total_shots,
        shots=config.shots,
        trials=config.trials,
        stride=stride,
    )


_PAIR_INVARIANT_FIELDS = ("nbar", "kappa", "nbar_b", "signal_det", "idler_det")


def paired_comparison(configs, workers: int = 1) -> list:
    """Run ensembles for configs that differ only in probe kind.

    The keyed substreams couple the runs exactly: every probe kind sees the
    same detector and idler random numbers per (trial, shot).  Returns one
    EnsembleSummary per config, in order.
    """
    configs = list(configs)
    if not configs:
        raise PairingError("need at least one config")
    base = configs[0]
    for other in configs[1:]:
        if replace(other, scenario=base.scenario) != base:
            raise PairingError("paired configs must share all trajectory settings")
        for f in _PAIR_INVARIANT_FIELDS:
            if getattr(other.scenario, f) != getattr(base.scenario, f):
                raise PairingError(f"paired configs must agree on scenario field {f!r}")
    return [run_ensemble(cfg, workers=workers) for cfg in configs]


def crossing_shot(curve: np.ndarray, threshold: float, above: bool = True):
    """First index where the curve passes the threshold, or None.

    Index 0 is the prior entry, so the returned value counts shots.
    """
    hits = np.nonzero(curve > threshold)[0] if above else np.nonzero(curve < threshold)[0]
    return int(hits[0]) if hits.size else None

"""Single-shot target detection probabilities and Bayesian updating.

A probe state is sent toward a possibly-present object of reflectivity
``kappa`` sitting in a thermal background of mean photon number ``nbar_b``.
Under H0 (object absent) the receiver sees only background; under H1 the
probe returns through a loss channel with transmissivity ``kappa`` and
output background ``nbar_b``.  A Geiger-mode detector monitors the return.

Closed forms for every click probability are implemented directly (they
are fast enough for Monte-Carlo inner loops); each also has a compositional
path (herald -> return state -> click probability) that the test suite uses
as an internal consistency oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .conditioning import TMSV, DegenerateHeraldingError, herald_click, herald_no_click
from .detection import DetectorModel, click_prob
from .gaussian import GaussianMixture, coherent_state, loss_channel

__all__ = [
    "PROBE_KINDS",
    "Scenario",
    "ShotLikelihoods",
    "return_state_h1",
    "p_click_h0",
    "p_click_h1_coherent",
    "p_click_h1_pnst",
    "p_click_h1_vst",
    "herald_no_click_prob",
    "effective_signal_nbar",
    "shot_likelihoods",
    "posterior_update",
    "match_click_probability",
    "single_shot_error",
]

PROBE_KINDS = ("coherent", "tmsv", "tmsv_matched")

POSTERIOR_EPS = 1e-15


@dataclass(frozen=True)
class Scenario:
    """Full parameterization of one illumination experiment.

    ``nbar`` is the mean photon number of the reference coherent probe; for
    ``probe_kind="tmsv"`` the TMSV has the same per-arm brightness, while
    ``"tmsv_matched"`` boosts the TMSV so that an intercepting click
    detector of efficiency ``intercept_eta`` cannot distinguish it from the
    coherent reference.  ``intercept_eta=None`` defaults to the signal
    detector's efficiency.
    """

    nbar: float
    kappa: float
    nbar_b: float
    signal_det: DetectorModel = DetectorModel()
    idler_det: DetectorModel = DetectorModel()
    probe_kind: str = "coherent"
    intercept_eta: float | None = None

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("object reflectivity kappa must lie in (0, 1)")
        if self.nbar_b < 0:
            raise ValueError("background nbar_b must be >= 0")
        if self.nbar < 0:
            raise ValueError("signal nbar must be >= 0")
        if self.probe_kind not in PROBE_KINDS:
            raise ValueError(f"probe_kind must be one of {PROBE_KINDS}")
        if self.intercept_eta is not None and not 0.0 <= self.intercept_eta <= 1.0:
            raise ValueError("intercept_eta must lie in [0, 1]")


@dataclass(frozen=True)
class ShotLikelihoods:
    """Click likelihoods of one sent state under both hypotheses."""

    p_click_h0: float
    p_click_h1: float
    probe_label: str

    def __post_init__(self):
        for p in (self.p_click_h0, self.p_click_h1):
            if not 0.0 <= p <= 1.0:
                raise ValueError("likelihoods must be probabilities")


def _denominator(det: DetectorModel, nbar_b: float) -> float:
    return 1.0 + det.nbar_d + det.eta * nbar_b


def match_click_probability(nbar_alpha: float, eta: float) -> float:
    """Thermal brightness whose intercept click probability matches a
    coherent state of mean photon number ``nbar_alpha``.

    Equating eta n_s / (1 + eta n_s) with 1 - exp(-eta n_alpha) gives
    n_s = (exp(eta n_alpha) - 1) / eta, always >= n_alpha.
    """
    if nbar_alpha < 0:
        raise ValueError("nbar_alpha must be >= 0")
    if eta <= 0:
        raise ValueError("matching with eta = 0 leaves the brightness unconstrained")
    return float(math.expm1(eta * nbar_alpha) / eta)


def effective_signal_nbar(scenario: Scenario) -> float:
    """Per-arm TMSV brightness actually sent (click-matched if requested)."""
    if scenario.probe_kind != "tmsv_matched":
        return scenario.nbar
    eta = scenario.intercept_eta
    if eta is None:
        eta = scenario.signal_det.eta
    return match_click_probability(scenario.nbar, eta)


def return_state_h1(probe, scenario: Scenario):
    """Return state under H1: the object loss channel applied to the probe.

    Works per component for signed mixtures, preserving the mixture weights.
    """
    if isinstance(probe, GaussianMixture):
        comps = tuple(loss_channel(c, scenario.kappa, scenario.nbar_b)
                      for c in probe.components)
        return GaussianMixture(comps, probe.weights)
    return loss_channel(probe, scenario.kappa, scenario.nbar_b)


def p_click_h0(scenario: Scenario) -> float:
    """False-alarm click probability 1 - 1/(1 + nbar_d + eta nbar_b).

    Independent of the probe and of the object: under H0 only background
    light reaches the detector.
    """
    return 1.0 - 1.0 / _denominator(scenario.signal_det, scenario.nbar_b)


def p_click_h1_coherent(scenario: Scenario) -> float:
    """Click probability under H1 for the coherent probe."""
    d = _denominator(scenario.signal_det, scenario.nbar_b)
    arg = scenario.signal_det.eta * scenario.kappa * scenario.nbar / d
    return 1.0 - math.exp(-arg) / d


def herald_no_click_prob(scenario: Scenario) -> float:
    """Idler no-click probability N = 1/(1 + nbar_dI + eta_I nbar)."""
    if scenario.probe_kind not in ("tmsv", "tmsv_matched"):
        raise ValueError("heralding applies to TMSV probes only")
    det = scenario.idler_det
    return 1.0 / (1.0 + det.nbar_d + det.eta * effective_signal_nbar(scenario))


def _sigma_pnst_after_channels(scenario: Scenario, nbar: float) -> float:
    """Diagonal of the PNST covariance after object and detector losses."""
    det = scenario.signal_det
    idet = scenario.idler_det
    ek = det.eta * scenario.kappa
    return (0.5 - ek + det.eta * scenario.nbar_b + det.nbar_d
            + ek * (1.0 + nbar) * (1.0 + idet.nbar_d)
            / (1.0 + idet.nbar_d + nbar * idet.eta))


def p_click_h1_pnst(scenario: Scenario) -> float:
    """Click probability under H1 when a no-click heralded the PNST."""
    nbar = effective_signal_nbar(scenario)
    if scenario.probe_kind not in ("tmsv", "tmsv_matched"):
        raise ValueError("PNST probe requires a TMSV scenario")
    sigma = _sigma_pnst_after_channels(scenario, nbar)
    return 1.0 - 1.0 / (sigma + 0.5)


def p_click_h1_vst(scenario: Scenario) -> float:
    """Click probability under H1 when a click heralded the VST.

    Signed-mixture combination of the unconditioned thermal return and the
    PNST return.  Raises DegenerateHeraldingError when heralding cannot
    occur (nbar = 0 with a dark-free idler).
    """
    nbar = effective_signal_nbar(scenario)
    if scenario.probe_kind not in ("tmsv", "tmsv_matched"):
        raise ValueError("VST probe requires a TMSV scenario")
    det = scenario.signal_det
    n_nc = herald_no_click_prob(scenario)
    p_herald = 1.0 - n_nc
    if p_herald < 1e-12:
        raise DegenerateHeraldingError(
            f"heralding probability {p_herald!r} vanishes"
        )
    vs = 0.5 + (scenario.nbar_b + nbar * scenario.kappa) * det.eta + det.nbar_d
    a = 1.0 / (vs + 0.5)
    b = 1.0 / (_sigma_pnst_after_channels(scenario, nbar) + 0.5)
    return 1.0 - (a - n_nc * b) / p_herald


def shot_likelihoods(scenario: Scenario) -> dict:
    """Likelihood pairs for every state the scenario can send.

    Coherent scenarios yield one entry, TMSV scenarios one per heralding
    branch ("pnst" and "vst").
    """
    p0 = p_click_h0(scenario)
    if scenario.probe_kind == "coherent":
        return {"coherent": ShotLikelihoods(p0, p_click_h1_coherent(scenario), "coherent")}
    return {
        "pnst": ShotLikelihoods(p0, p_click_h1_pnst(scenario), "pnst"),
        "vst": ShotLikelihoods(p0, p_click_h1_vst(scenario), "vst"),
    }


def posterior_update(prior_h1: float, likelihoods: ShotLikelihoods, clicked: bool) -> float:
    """One Bayes update of Pr(H1) from a click or no-click outcome.

    The output is clamped to [eps, 1 - eps] with eps = 1e-15 so that long
    runs cannot lock onto exactly 0 or 1 through floating-point underflow;
    the exact update never reaches the endpoints from an interior prior.
    """
    if not 0.0 <= prior_h1 <= 1.0:
        raise ValueError("prior must be a probability")
    if clicked:
        l1, l0 = likelihoods.p_click_h1, likelihoods.p_click_h0
    else:
        l1, l0 = 1.0 - likelihoods.p_click_h1, 1.0 - likelihoods.p_click_h0
    num = prior_h1 * l1
    den = num + (1.0 - prior_h1) * l0
    if den == 0.0:
        raise ZeroDivisionError("posterior undefined: both branches have zero likelihood")
    post = num / den
    return float(min(max(post, POSTERIOR_EPS), 1.0 - POSTERIOR_EPS))


def single_shot_error(scenario: Scenario, branch: str = "vst") -> float:
    """Average single-shot discrimination error (1 - p_h1)/2 + p_h0/2.

    For TMSV scenarios, ``branch`` selects the heralding branch used for
    p_h1: "vst" (default, conditioned on successful heralding), "pnst", or
    "weighted" for the heralding-probability-weighted average over both
    branches.  Coherent scenarios ignore ``branch``.
    """
    p0 = p_click_h0(scenario)
    if scenario.probe_kind == "coherent":
        p1 = p_click_h1_coherent(scenario)
    elif branch == "vst":
        p1 = p_click_h1_vst(scenario)
    elif branch == "pnst":
        p1 = p_click_h1_pnst(scenario)
    elif branch == "weighted":
        n_nc = herald_no_click_prob(scenario)
        p1 = n_nc * p_click_h1_pnst(scenario) + (1.0 - n_nc) * p_click_h1_vst(scenario)
    else:
        raise ValueError("branch must be 'vst', 'pnst' or 'weighted'")
    return 0.5 * (1.0 - p1) + 0.5 * p0


def heralded_probe_state(scenario: Scenario, branch: str):
    """Materialize the sent state for a heralding branch (compositional path).

    Returns the GaussianState (PNST) or GaussianMixture (VST) actually sent;
    used by tests to cross-check the closed forms via
    return_state_h1 + click_prob.
    """
    nbar = effective_signal_nbar(scenario)
    tmsv = TMSV(nbar)
    if branch == "pnst":
        state, _ = herald_no_click(tmsv, scenario.idler_det)
        return state
    if branch == "vst":
        mix, _ = herald_click(tmsv, scenario.idler_det)
        return mix
    raise ValueError("branch must be 'pnst' or 'vst'")


def compositional_p_click_h1(scenario: Scenario, branch: str | None = None) -> float:
    """p_click_h1 via the explicit state pipeline instead of closed forms."""
    if scenario.probe_kind == "coherent":
        probe = coherent_state(scenario.nbar)
    else:
        probe = heralded_probe_state(scenario, branch or "vst")
    returned = return_state_h1(probe, scenario)
    return click_prob(returned, scenario.signal_det)

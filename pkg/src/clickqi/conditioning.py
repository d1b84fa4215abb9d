"""Heralded signal states from click detection on the idler arm of a TMSV.

A two-mode squeezed vacuum (TMSV) of per-arm mean photon number ``nbar`` is
measured on its idler mode by a Geiger-mode detector.  A no-click heralds
the photon-number-suppressed thermal state (PNST), a Gaussian thermal state
obtained from a Schur complement of the lossy joint covariance.  A click
heralds the vacuum-suppressed thermal state (VST), which is non-Gaussian
but expressible as the signed two-component mixture

    rho_vst = (rho_thermal - N rho_pnst) / (1 - N),

where N is the idler no-click probability.  Keeping the VST in this form
lets every downstream probability be computed per thermal component and
combined linearly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import DetectorModel, no_click_prob
from .gaussian import (
    GaussianMixture,
    GaussianState,
    partial_trace,
    thermal_state,
    wigner,
)

__all__ = [
    "TMSV",
    "DegenerateHeraldingError",
    "UnsupportedShapeError",
    "herald_no_click",
    "herald_click",
    "photon_distribution",
    "wigner_mixture",
]

HERALD_GUARD = 1e-12
DIST_CLAMP_TOL = 1e-12
_THERMAL_SHAPE_TOL = 1e-10


class DegenerateHeraldingError(ValueError):
    """Click heralding requested but the click probability vanishes."""


class UnsupportedShapeError(ValueError):
    """Closed-form photon statistics need zero-mean thermal components."""


@dataclass(frozen=True)
class TMSV:
    """Two-mode squeezed vacuum with per-arm mean photon number ``nbar``.

    Mode 0 is the idler, mode 1 the signal.  The covariance is in standard
    form: diagonal blocks (nbar + 1/2) I2 and correlation block
    sqrt(nbar (1 + nbar)) diag(1, -1), the phase convention under which the
    state is pure (both symplectic eigenvalues 1/2).
    """

    nbar: float
    state: GaussianState = None

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError("TMSV mean photon number must be >= 0")
        v = self.nbar + 0.5
        c = np.sqrt(self.nbar * (1.0 + self.nbar))
        cov = np.array(
            [
                [v, 0.0, c, 0.0],
                [0.0, v, 0.0, -c],
                [c, 0.0, v, 0.0],
                [0.0, -c, 0.0, v],
            ]
        )
        object.__setattr__(self, "state", GaussianState(np.zeros(4), cov))

    @property
    def lam(self) -> float:
        """Fock-amplitude ratio lambda = sqrt(nbar / (1 + nbar))."""
        return np.sqrt(self.nbar / (1.0 + self.nbar))


def herald_no_click(tmsv: TMSV, idler_det: DetectorModel):
    """Condition the signal on an idler no-click.

    Returns ``(pnst, n_no_click)``: the heralded Gaussian (thermal) state
    and the heralding probability N.  Detector imperfections enter by
    passing the idler mode through the detector-equivalent channel before
    a perfect vacuum projection; the signal arm is untouched.  The channel
    moment map (idler block -> eta V_I + (nbar_d + (1-eta)/2) I, correlation
    block -> sqrt(eta) C) is applied inline because it stays regular at
    eta = 1 with dark noise, unlike the standalone loss channel.
    """
    n_no_click = no_click_prob(partial_trace(tmsv.state, (0,)), idler_det)
    eta = idler_det.eta
    cov = tmsv.state.cov
    vi = eta * cov[:2, :2] + (idler_det.nbar_d + (1.0 - eta) / 2.0) * np.eye(2)
    c = np.sqrt(eta) * cov[:2, 2:]
    vs = cov[2:, 2:]
    pnst_cov = vs - c.T @ np.linalg.solve(vi + 0.5 * np.eye(2), c)
    return GaussianState(np.zeros(2), pnst_cov), float(n_no_click)


def herald_click(tmsv: TMSV, idler_det: DetectorModel):
    """Condition the signal on an idler click.

    Returns ``(vst, p_herald)`` where ``vst`` is the signed mixture
    [thermal(nbar), pnst] with weights [1/(1-N), -N/(1-N)] and
    ``p_herald = 1 - N``.  Raises DegenerateHeraldingError when the click
    probability is below the guard (e.g. nbar = 0 with a dark-free idler):
    the mixture weights diverge and the protocol never sends a VST in that
    case, so handling the error is the caller's contract.
    """
    pnst, n_no_click = herald_no_click(tmsv, idler_det)
    p_herald = 1.0 - n_no_click
    if p_herald < HERALD_GUARD:
        raise DegenerateHeraldingError(
            f"heralding probability {p_herald!r} below guard {HERALD_GUARD}"
        )
    w = 1.0 / p_herald
    mix = GaussianMixture(
        (thermal_state(tmsv.nbar), pnst), (w, -n_no_click * w)
    )
    return mix, float(p_herald)


def _thermal_nbar(state: GaussianState) -> float:
    """Mean photon number of a zero-mean thermal state; raises otherwise."""
    if state.n_modes != 1:
        raise UnsupportedShapeError("photon statistics supported for single-mode states")
    if np.max(np.abs(state.mean)) > _THERMAL_SHAPE_TOL:
        raise UnsupportedShapeError(
            "displaced component: use the Fock-basis oracle for photon statistics"
        )
    cov = state.cov
    if (abs(cov[0, 1]) > _THERMAL_SHAPE_TOL
            or abs(cov[0, 0] - cov[1, 1]) > _THERMAL_SHAPE_TOL):
        raise UnsupportedShapeError(
            "squeezed component: use the Fock-basis oracle for photon statistics"
        )
    return float(0.5 * (cov[0, 0] + cov[1, 1]) - 0.5)


def photon_distribution(state, n_max: int) -> np.ndarray:
    """Photon-number probabilities p(0..n_max) of a thermal state or mixture.

    Each thermal component of mean ``m`` contributes the geometric law
    m^k / (1 + m)^(k+1).  Entries within 1e-12 below zero are clamped to 0;
    anything more negative signals an unphysical mixture and raises.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    k = np.arange(n_max + 1)
    if isinstance(state, GaussianMixture):
        pairs = zip(state.weights, state.components)
    else:
        pairs = ((1.0, state),)
    dist = np.zeros(n_max + 1)
    for w, comp in pairs:
        m = _thermal_nbar(comp)
        ratio = m / (1.0 + m) if m > 0 else 0.0
        term = np.zeros(n_max + 1)
        term[0] = 1.0 / (1.0 + m)
        if m > 0:
            term = (1.0 / (1.0 + m)) * ratio ** k
        dist += w * term
    low = dist.min()
    if low < -DIST_CLAMP_TOL:
        raise ValueError(
            f"photon distribution entry {low!r} below -1e-12: unphysical mixture"
        )
    return np.clip(dist, 0.0, None)


def wigner_mixture(mix: GaussianMixture, x) -> np.ndarray | float:
    """Wigner function of a signed mixture (may be negative)."""
    out = sum(w * np.asarray(wigner(c, x))
              for w, c in zip(mix.weights, mix.components))
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out

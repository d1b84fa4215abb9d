"""Geiger-mode click/no-click measurement of Gaussian states and mixtures.

An imperfect detector (quantum efficiency ``eta``, thermal dark-count
parameter ``nbar_d``) is equivalent to a perfect vacuum projection preceded
by a loss channel that attenuates by ``eta`` and injects an output thermal
background of mean ``nbar_d``.  The no-click probability is then the vacuum
overlap of the pre-attenuated state.  The moment map of that channel is
applied inline here, so detectors with ``eta = 1`` and dark counts remain in
domain even though the standalone loss channel rejects that corner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianMixture, GaussianState

__all__ = ["DetectorModel", "no_click_prob", "click_prob"]

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class DetectorModel:
    """A Geiger-mode photodetector: efficiency in [0, 1], thermal dark counts."""

    eta: float = 1.0
    nbar_d: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("detector efficiency eta must lie in [0, 1]")
        if self.nbar_d < 0:
            raise ValueError("dark-count parameter nbar_d must be >= 0")

    @property
    def dark_click_prob(self) -> float:
        """Click probability with no incident light: nbar_d / (1 + nbar_d)."""
        return self.nbar_d / (1.0 + self.nbar_d)


def no_click_prob(state: GaussianState, det: DetectorModel) -> float:
    """Probability that the detector does not fire on a single-mode state."""
    if state.n_modes != 1:
        raise ValueError("no_click_prob expects a single-mode state")
    eye2 = np.eye(2)
    cov_eff = det.eta * state.cov + (det.nbar_d + (1.0 - det.eta) / 2.0) * eye2
    mean_eff = np.sqrt(det.eta) * state.mean
    m = cov_eff + 0.5 * eye2
    quad = mean_eff @ np.linalg.solve(m, mean_eff)
    return float(np.exp(-0.5 * quad) / np.sqrt(np.linalg.det(m)))


def click_prob(state, det: DetectorModel) -> float:
    """Probability that the detector fires, for a state or signed mixture.

    For a mixture the no-click probabilities of the components combine
    linearly.  Results a hair outside [0, 1] (within 1e-12) are clamped;
    larger excursions indicate an unphysical mixture and raise.
    """
    if isinstance(state, GaussianMixture):
        nc = sum(w * no_click_prob(c, det)
                 for w, c in zip(state.weights, state.components))
    else:
        nc = no_click_prob(state, det)
    p = 1.0 - nc
    if p < -CLAMP_TOL or p > 1.0 + CLAMP_TOL:
        raise ValueError(f"click probability {p!r} outside [0, 1]: unphysical mixture")
    return float(min(max(p, 0.0), 1.0))

"""Phase-space representation of n-mode Gaussian states and channels.

Conventions used throughout the package:

* natural units, ``hbar = 1``;
* quadratures interleaved as ``(q1, p1, ..., qn, pn)``;
* vacuum covariance ``(1/2) * identity``, so a thermal state with mean
  photon number ``nbar`` has covariance ``(nbar + 1/2) * identity``.

States are immutable value objects and every operation is a pure function,
so everything here can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianState",
    "GaussianMixture",
    "SymplecticMatrix",
    "symplectic_form",
    "beamsplitter_symplectic",
    "apply_symplectic",
    "vacuum_state",
    "thermal_state",
    "coherent_state",
    "tensor",
    "loss_channel",
    "loss_channel_on_mode",
    "wigner",
    "overlap",
    "partial_trace",
    "symplectic_eigenvalues",
    "mean_photon_number",
    "assert_physical",
]

SYMPLECTIC_TOL = 1e-10
PHYSICALITY_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the 2n x 2n symplectic form, the direct sum of n [[0,1],[-1,0]] blocks."""
    if n_modes < 1:
        raise ValueError("n_modes must be a positive integer")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(int(n_modes)), block)


@dataclass(frozen=True)
class GaussianState:
    """An n-mode Gaussian state given by its first and second moments.

    Attributes:
        mean: real vector of length 2n (interleaved quadrature order).
        cov: real symmetric 2n x 2n covariance matrix.  Symmetrized on
            construction to guard against floating-point drift through
            repeated symplectic conjugation.

    Physicality (all symplectic eigenvalues >= 1/2) is *not* checked on
    construction; call :func:`assert_physical` where it matters.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2 != 0:
            raise ValueError("mean must have even, positive length (2 entries per mode)")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"cov shape {cov.shape} does not match mean length {mean.size}"
            )
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True)
class GaussianMixture:
    """A weighted combination of Gaussian states with weights summing to 1.

    Weights may be negative: signed mixtures represent certain non-Gaussian
    states (e.g. the click-heralded signal state) while keeping every
    computation in closed Gaussian form.
    """

    components: tuple
    weights: tuple

    def __post_init__(self):
        components = tuple(self.components)
        weights = tuple(float(w) for w in self.weights)
        if not components:
            raise ValueError("mixture needs at least one component")
        if len(components) != len(weights):
            raise ValueError("components and weights must have equal length")
        n = components[0].n_modes
        if any(c.n_modes != n for c in components):
            raise ValueError("mixture components must share the same mode count")
        total = sum(weights)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"mixture weights sum to {total!r}, expected 1")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "weights", weights)

    @property
    def n_modes(self) -> int:
        return self.components[0].n_modes


@dataclass(frozen=True)
class SymplecticMatrix:
    """A real 2n x 2n matrix S with S @ Omega @ S.T == Omega and det S == 1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
            raise ValueError("symplectic matrix must be square with even dimension")
        omega = symplectic_form(m.shape[0] // 2)
        if np.max(np.abs(m @ omega @ m.T - omega)) > SYMPLECTIC_TOL:
            raise ValueError("matrix does not preserve the symplectic form")
        if abs(np.linalg.det(m) - 1.0) > SYMPLECTIC_TOL:
            raise ValueError("symplectic matrix must have unit determinant")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2


def beamsplitter_symplectic(eta: float) -> SymplecticMatrix:
    """Two-mode beamsplitter with intensity transmissivity ``eta``.

    The mixing angle is arccos(sqrt(eta)); eta = 1 is the identity and
    eta = 0 swaps the modes (with a sign on the reflected arm).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity eta must lie in [0, 1]")
    c = np.sqrt(eta)
    s = np.sqrt(1.0 - eta)
    eye2 = np.eye(2)
    top = np.hstack([c * eye2, s * eye2])
    bottom = np.hstack([-s * eye2, c * eye2])
    return SymplecticMatrix(np.vstack([top, bottom]))


def apply_symplectic(state: GaussianState, s: SymplecticMatrix) -> GaussianState:
    """Transform the moments: mean -> S mean, cov -> S cov S.T."""
    m = s.matrix
    if s.n_modes != state.n_modes:
        raise ValueError("mode count mismatch between state and symplectic matrix")
    return GaussianState(m @ state.mean, m @ state.cov @ m.T)


def vacuum_state(n_modes: int = 1) -> GaussianState:
    """n-mode vacuum: zero mean, covariance identity/2."""
    return GaussianState(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))


def thermal_state(nbar: float) -> GaussianState:
    """Single-mode thermal state with mean photon number ``nbar``."""
    if nbar < 0:
        raise ValueError("thermal mean photon number must be >= 0")
    return GaussianState(np.zeros(2), (nbar + 0.5) * np.eye(2))


def coherent_state(nbar: float) -> GaussianState:
    """Single-mode coherent state of mean photon number ``nbar``, phase 0.

    Click detection is phase-insensitive, so the phase is fixed to zero and
    the displacement sits on the q axis: mean = (sqrt(2 nbar), 0).
    """
    if nbar < 0:
        raise ValueError("coherent mean photon number must be >= 0")
    return GaussianState(np.array([np.sqrt(2.0 * nbar), 0.0]), 0.5 * np.eye(2))


def tensor(*states: GaussianState) -> GaussianState:
    """Product state: direct sum of means and covariances."""
    if not states:
        raise ValueError("tensor needs at least one state")
    mean = np.concatenate([s.mean for s in states])
    dim = mean.size
    cov = np.zeros((dim, dim))
    offset = 0
    for s in states:
        d = 2 * s.n_modes
        cov[offset:offset + d, offset:offset + d] = s.cov
        offset += d
    return GaussianState(mean, cov)


def loss_channel_on_mode(
    state: GaussianState, mode: int, eta: float, nbar_th: float
) -> GaussianState:
    """Attenuate one mode by ``eta`` and inject thermal noise.

    Parameterized by the *output* background: a vacuum input on the lossy
    mode exits as a thermal state of mean photon number ``nbar_th``.  The
    equivalent beamsplitter environment is thermal with mean
    ``nbar_th / (1 - eta)``, which is why ``eta = 1`` with ``nbar_th > 0``
    is rejected.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity eta must lie in [0, 1]")
    if nbar_th < 0:
        raise ValueError("output background nbar_th must be >= 0")
    if eta == 1.0 and nbar_th > 0:
        raise ValueError(
            "eta=1 with nbar_th>0 is outside the channel domain "
            "(environment mean nbar_th/(1-eta) diverges)"
        )
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes}-mode state")
    root = np.sqrt(eta)
    sl = slice(2 * mode, 2 * mode + 2)
    mean = state.mean.copy()
    mean[sl] *= root
    cov = state.cov.copy()
    cov[sl, :] *= root
    cov[:, sl] *= root
    cov[sl, sl] += (nbar_th + (1.0 - eta) / 2.0) * np.eye(2)
    return GaussianState(mean, cov)


def loss_channel(state: GaussianState, eta: float, nbar_th: float) -> GaussianState:
    """Single-mode attenuating channel: mean -> sqrt(eta) mean,
    cov -> eta cov + (nbar_th + (1-eta)/2) I."""
    if state.n_modes != 1:
        raise ValueError("loss_channel expects a single-mode state; "
                         "use loss_channel_on_mode for joint states")
    return loss_channel_on_mode(state, 0, eta, nbar_th)


def wigner(state: GaussianState, x) -> np.ndarray | float:
    """Evaluate the Wigner function at phase-space point(s) ``x``.

    ``x`` may be a single point of length 2n or an array whose last axis has
    length 2n; the result has the shape of the leading axes.  Normalized so
    the integral over phase space is 1.
    """
    x = np.asarray(x, dtype=float)
    dim = 2 * state.n_modes
    if x.shape[-1:] != (dim,):
        raise ValueError(f"phase-space point must have last dimension {dim}")
    delta = x - state.mean
    cov_inv = np.linalg.inv(state.cov)
    quad = np.einsum("...i,ij,...j->...", delta, cov_inv, delta)
    norm = (2.0 * np.pi) ** state.n_modes * np.sqrt(np.linalg.det(state.cov))
    out = np.exp(-0.5 * quad) / norm
    return float(out) if out.ndim == 0 else out


def overlap(a: GaussianState, b: GaussianState) -> float:
    """Overlap tr(rho sigma) of two Gaussian states.

    In phase space this is the closed Gaussian form
    exp(-delta.T (Sa+Sb)^-1 delta / 2) / sqrt(det(Sa+Sb)) with
    delta = mean_a - mean_b.
    """
    if a.n_modes != b.n_modes:
        raise ValueError("overlap requires equal mode counts")
    s = a.cov + b.cov
    delta = a.mean - b.mean
    quad = delta @ np.linalg.solve(s, delta)
    return float(np.exp(-0.5 * quad) / np.sqrt(np.linalg.det(s)))


def partial_trace(state: GaussianState, keep) -> GaussianState:
    """Keep only the listed modes (0-based); moments of traced modes are deleted."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= state.n_modes:
        raise ValueError(f"keep modes {keep} out of range for {state.n_modes} modes")
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in keep])
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """The n symplectic eigenvalues of the covariance matrix, ascending.

    Computed as the absolute values of the eigenvalues of i Omega Sigma,
    which come in +/- pairs; the pairs are deduplicated to n values.  A
    physical state has every value >= 1/2.
    """
    omega = symplectic_form(state.n_modes)
    ev = np.sort(np.abs(np.linalg.eigvals(omega @ state.cov)))
    return ev[::2]


def mean_photon_number(state) -> float:
    """Total mean photon number of a GaussianState or GaussianMixture."""
    if isinstance(state, GaussianMixture):
        return float(sum(w * mean_photon_number(c)
                         for w, c in zip(state.weights, state.components)))
    n = state.n_modes
    return float((np.trace(state.cov) - n) / 2.0 + state.mean @ state.mean / 2.0)


def assert_physical(state: GaussianState, tol: float = PHYSICALITY_TOL) -> None:
    """Raise ValueError unless all symplectic eigenvalues are >= 1/2 - tol."""
    nu = symplectic_eigenvalues(state)
    if nu[0] < 0.5 - tol:
        raise ValueError(
            f"state is unphysical: smallest symplectic eigenvalue {nu[0]!r} < 1/2"
        )

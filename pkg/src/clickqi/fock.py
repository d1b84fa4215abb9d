"""Independent truncated Fock-basis oracle.

Everything in this module recomputes protocol quantities from the
number-basis definitions alone (geometric thermal weights, the click POVM's
diagonal weights, Kraus operators of the thermal attenuator) without
touching the Gaussian phase-space code path.  It exists to cross-validate
every closed form in the package and to compute the Helstrom and Chernoff
discrimination bounds, which have no simple Gaussian closed form here.

Truncation follows a geometric-tail rule: the dimension is the smallest D
with (m/(1+m))^D below the tail bound, where m is the largest thermal mean
appearing anywhere in the computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .detection import DetectorModel

__all__ = [
    "TruncationError",
    "required_dim",
    "fock_thermal",
    "fock_coherent",
    "fock_tmsv",
    "fock_no_click_povm",
    "fock_loss_channel",
    "fock_partial_trace",
    "number_distribution",
    "fock_mean_photon",
    "annihilation_operator",
    "displacement_operator",
    "squeeze_operator",
    "phase_operator",
    "helstrom_error",
    "chernoff_bound",
    "condition_tmsv_on_idler",
    "OracleCheck",
    "OracleReport",
    "validate_scenario",
]

TAIL_BOUND = 1e-12
MIN_DIM = 32
WARN_DIM = 512
ORACLE_TOL = 1e-7


class TruncationError(ValueError):
    """Requested dimension cannot hold the state's geometric tail."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


def required_dim(mbar: float, tail: float = TAIL_BOUND,
                 minimum: int = MIN_DIM, warn_above: int = WARN_DIM) -> int:
    """Smallest dimension with (mbar/(1+mbar))^D < tail, at least ``minimum``."""
    if mbar < 0:
        raise ValueError("thermal mean must be >= 0")
    if mbar == 0:
        return minimum
    ratio = mbar / (1.0 + mbar)
    dim = max(minimum, int(math.ceil(math.log(tail) / math.log(ratio))) + 1)
    if dim > warn_above:
        warnings.warn(
            f"Fock truncation dimension {dim} exceeds {warn_above}; "
            "oracle checks will be slow", stacklevel=2)
    return dim


def _check_dim(dim: int, mbar: float, what: str) -> None:
    need = required_dim(mbar)
    if dim < need:
        raise TruncationError(
            f"dim {dim} insufficient for {what} (mean {mbar}): need {need}",
            required=need)


def annihilation_operator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def fock_thermal(nbar: float, dim: int) -> np.ndarray:
    """Thermal state: diagonal geometric weights (nbar/(1+nbar))^n / (1+nbar)."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    _check_dim(dim, nbar, "thermal state")
    if nbar == 0:
        rho = np.zeros((dim, dim), complex)
        rho[0, 0] = 1.0
        return rho
    ratio = nbar / (1.0 + nbar)
    return np.diag((1.0 - ratio) * ratio ** np.arange(dim)).astype(complex)


def _coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    if alpha == 0:
        v = np.zeros(dim, complex)
        v[0] = 1.0
        return v
    n = np.arange(dim)
    mag = np.exp(-abs(alpha) ** 2 / 2.0 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    return mag * np.exp(1j * np.angle(alpha) * n)


def fock_coherent(nbar: float, dim: int) -> np.ndarray:
    """Coherent state of mean photon number ``nbar`` (real amplitude sqrt(nbar))."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    _check_dim(dim, nbar, "coherent state")
    v = _coherent_vector(math.sqrt(nbar), dim)
    return np.outer(v, v.conj())


def _tmsv_vector(nbar: float, dim: int) -> np.ndarray:
    """Joint two-mode amplitude vector sqrt(1-lam^2) lam^k on |k,k>."""
    lam = math.sqrt(nbar / (1.0 + nbar)) if nbar > 0 else 0.0
    amps = math.sqrt(1.0 - lam ** 2) * lam ** np.arange(dim) if nbar > 0 else None
    v = np.zeros(dim * dim, complex)
    if nbar == 0:
        v[0] = 1.0
        return v
    idx = np.arange(dim) * dim + np.arange(dim)
    v[idx] = amps
    return v


def fock_tmsv(nbar: float, dim: int) -> np.ndarray:
    """Two-mode squeezed vacuum as a dim^2 x dim^2 pure-state projector."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    _check_dim(dim, nbar, "TMSV")
    v = _tmsv_vector(nbar, dim)
    return np.outer(v, v.conj())


def fock_no_click_povm(det: DetectorModel, dim: int) -> np.ndarray:
    """No-click POVM element: diag (1 - eta/(1+nbar_d))^n / (1 + nbar_d)."""
    n = np.arange(dim)
    base = 1.0 - det.eta / (1.0 + det.nbar_d)
    return np.diag((1.0 / (1.0 + det.nbar_d)) * base ** n).astype(complex)


def fock_partial_trace(rho: np.ndarray, dim: int, keep: int) -> np.ndarray:
    """Reduce a two-mode dim^2 x dim^2 operator to mode 0 or mode 1."""
    r = rho.reshape(dim, dim, dim, dim)
    if keep == 0:
        return np.einsum("ikjk->ij", r)
    if keep == 1:
        return np.einsum("kikj->ij", r)
    raise ValueError("keep must be 0 or 1")


def number_distribution(rho: np.ndarray) -> np.ndarray:
    return np.real(np.diag(rho)).copy()


def fock_mean_photon(rho: np.ndarray) -> float:
    return float(np.real(np.diag(rho) @ np.arange(rho.shape[0])))


def _apply_pure_loss(rho: np.ndarray, tau: float) -> np.ndarray:
    """Pure-loss channel of transmissivity tau via banded Kraus operators.

    K_l has entries sqrt(binom(m+l, l) tau^m (1-tau)^l) on its l-th
    subdiagonal; each K_l rho K_l^dag is a scaled shifted submatrix, so the
    whole channel costs O(d^3) elementwise work with no matmuls.
    """
    d = rho.shape[0]
    if tau >= 1.0:
        return rho.copy()
    out = np.zeros_like(rho)
    if tau <= 0.0:
        out[0, 0] = np.trace(rho)
        return out
    log_tau = math.log(tau)
    log_1mt = math.log1p(-tau)
    for l in range(d):
        m = np.arange(d - l)
        logc = 0.5 * (gammaln(m + l + 1) - gammaln(m + 1) - gammaln(l + 1)
                      + m * log_tau + l * log_1mt)
        c = np.exp(logc)
        out[:d - l, :d - l] += np.outer(c, c) * rho[l:, l:]
    return out


def _apply_amplifier(rho: np.ndarray, gain: float) -> np.ndarray:
    """Quantum-limited amplifier of gain G >= 1, Kraus on superdiagonals."""
    d = rho.shape[0]
    if gain <= 1.0:
        return rho.copy()
    log_x = math.log(1.0 - 1.0 / gain)
    log_g = -math.log(gain)
    out = np.zeros_like(rho)
    for l in range(d):
        n = np.arange(d - l)
        logc = 0.5 * (gammaln(n + l + 1) - gammaln(n + 1) - gammaln(l + 1)
                      + l * log_x + (n + 1) * log_g)
        c = np.exp(logc)
        out[l:, l:] += np.outer(c, c) * rho[:d - l, :d - l]
    return out


def fock_loss_channel(rho: np.ndarray, eta: float, nbar_th: float) -> np.ndarray:
    """Thermal attenuator: transmissivity ``eta``, output background ``nbar_th``.

    Decomposed as a quantum-limited amplifier of gain G = 1 + nbar_th after
    a pure-loss channel of transmissivity eta / G; the composition
    reproduces the moment map mean -> sqrt(eta) mean,
    cov -> eta cov + (nbar_th + (1-eta)/2) I exactly.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if nbar_th < 0:
        raise ValueError("nbar_th must be >= 0")
    _check_dim(rho.shape[0], nbar_th, "loss-channel background")
    gain = 1.0 + nbar_th
    return _apply_amplifier(_apply_pure_loss(rho, eta / gain), gain)


def displacement_operator(alpha: complex, dim: int) -> np.ndarray:
    a = annihilation_operator(dim)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def squeeze_operator(r: float, dim: int) -> np.ndarray:
    a = annihilation_operator(dim)
    return expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))


def phase_operator(theta: float, dim: int) -> np.ndarray:
    return np.diag(np.exp(-1j * theta * np.arange(dim)))


def _assert_hermitian(rho: np.ndarray, name: str, tol: float = 1e-10) -> None:
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError(f"{name} must be Hermitian")


def helstrom_error(rho0: np.ndarray, rho1: np.ndarray, prior0: float = 0.5) -> float:
    """Minimum error probability of optimal binary discrimination.

    (1 - ||prior1 rho1 - prior0 rho0||_1) / 2, with the trace norm from the
    eigenvalues of the Hermitian weighted difference.
    """
    if rho0.shape != rho1.shape:
        raise ValueError("states must share a dimension")
    _assert_hermitian(rho0, "rho0")
    _assert_hermitian(rho1, "rho1")
    diff = (1.0 - prior0) * rho1 - prior0 * rho0
    ev = np.linalg.eigvalsh(diff)
    return float(0.5 * (1.0 - np.abs(ev).sum()))


EIGENVALUE_FLOOR = 1e-300


def _chernoff_objective(rho0: np.ndarray, rho1: np.ndarray):
    """Q(s) = tr(rho0^s rho1^(1-s)) via one eigendecomposition per state."""
    w0, v0 = np.linalg.eigh(rho0)
    w1, v1 = np.linalg.eigh(rho1)
    w0 = np.clip(w0, EIGENVALUE_FLOOR, None)
    w1 = np.clip(w1, EIGENVALUE_FLOOR, None)
    cross = np.abs(v0.conj().T @ v1) ** 2

    def q(s: float) -> float:
        return float((w0 ** s) @ cross @ (w1 ** (1.0 - s)))

    return q


def _golden_section(f, lo: float, hi: float, tol: float = 1e-6) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def chernoff_bound(rho0: np.ndarray, rho1: np.ndarray) -> float:
    """Quantum Chernoff bound (equal priors): min_s tr(rho0^s rho1^(1-s)) / 2.

    The objective is scanned coarsely first; if the coarse profile is not
    unimodal the minimum is taken from a 999-point grid, otherwise a
    golden-section search refines the bracketed minimum to 1e-6 in s.
    """
    _assert_hermitian(rho0, "rho0")
    _assert_hermitian(rho1, "rho1")
    q = _chernoff_objective(rho0, rho1)
    coarse_s = np.linspace(0.0, 1.0, 21)
    coarse = np.array([q(s) for s in coarse_s])
    local_minima = 0
    for i in range(1, len(coarse) - 1):
        if coarse[i] < coarse[i - 1] - 1e-15 and coarse[i] < coarse[i + 1] - 1e-15:
            local_minima += 1
    if local_minima > 1:
        grid = np.linspace(0.0, 1.0, 999)
        best = min(q(s) for s in grid)
    else:
        i = int(np.argmin(coarse))
        lo = coarse_s[max(i - 1, 0)]
        hi = coarse_s[min(i + 1, len(coarse_s) - 1)]
        s_opt = _golden_section(q, lo, hi) if hi > lo else coarse_s[i]
        best = min(q(s_opt), coarse[0], coarse[-1])
    return float(0.5 * best)


def condition_tmsv_on_idler(nbar: float, idler_det: DetectorModel, dim: int):
    """Heralded signal states computed purely in the number basis.

    The TMSV amplitudes give the joint distribution p(k) on |k,k>, and the
    idler POVM is diagonal, so the no-click-conditioned signal state is the
    diagonal state with weights pi_k p(k) / N.  Returns
    (rho_pnst, rho_vst, n_no_click) with both states as dense matrices.
    """
    _check_dim(dim, nbar, "TMSV conditioning")
    k = np.arange(dim)
    lam2 = nbar / (1.0 + nbar) if nbar > 0 else 0.0
    pk = (1.0 - lam2) * lam2 ** k if nbar > 0 else np.eye(dim)[0]
    pi = np.real(np.diag(fock_no_click_povm(idler_det, dim)))
    unnorm = pi * pk
    n_no_click = float(unnorm.sum())
    pnst = np.diag(unnorm / n_no_click).astype(complex)
    p_herald = 1.0 - n_no_click
    if p_herald < 1e-12:
        vst = None
    else:
        vst = np.diag((pk - n_no_click * (unnorm / n_no_click)) / p_herald).astype(complex)
    return pnst, vst, n_no_click


@dataclass
class OracleCheck:
    name: str
    gaussian: float
    fock: float

    @property
    def deviation(self) -> float:
        return abs(self.gaussian - self.fock)

    def to_dict(self) -> dict:
        return {"name": self.name, "gaussian": self.gaussian,
                "fock": self.fock, "deviation": self.deviation}


@dataclass
class OracleReport:
    dim: int
    tolerance: float
    checks: list = field(default_factory=list)
    failure: str | None = None

    @property
    def max_abs_deviation(self) -> float:
        return max((c.deviation for c in self.checks), default=float("nan"))

    @property
    def passed(self) -> bool:
        if self.failure is not None:
            return False
        return bool(self.checks) and self.max_abs_deviation < self.tolerance

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "max_abs_deviation": self.max_abs_deviation,
            "failure": self.failure,
            "checks": [c.to_dict() for c in self.checks],
        }


def _scenario_required_dim(scenario) -> int:
    from .illumination import effective_signal_nbar

    nbar = effective_signal_nbar(scenario)
    means = [
        nbar,
        scenario.nbar_b / (1.0 - scenario.kappa),
        scenario.nbar_b,
        scenario.signal_det.nbar_d,
        scenario.idler_det.nbar_d,
    ]
    return max(required_dim(m) for m in means)


def validate_scenario(scenario, dim: int | None = None,
                      tolerance: float = ORACLE_TOL, n_max: int = 30) -> OracleReport:
    """Recompute every protocol probability in the number basis and compare.

    Covers the heralding probability, the false-alarm probability, all
    H1 click probabilities (coherent, PNST, VST) and the truncated photon
    distributions of the conditioned states.  A dimension below the
    geometric-tail requirement is flagged instead of crashing.
    """
    from . import conditioning, illumination
    from .detection import DetectorModel as _Det

    required = _scenario_required_dim(scenario)
    if dim is None:
        dim = required
    report = OracleReport(dim=dim, tolerance=tolerance)
    if dim < required:
        report.failure = (f"dim {dim} below required {required} "
                          f"(largest thermal mean in scenario)")
        return report

    nbar = illumination.effective_signal_nbar(scenario)
    sdet = scenario.signal_det
    checks = report.checks

    # false alarm: background through the receiving detector
    p0_fock = 1.0 - float(np.real(np.trace(
        fock_no_click_povm(sdet, dim) @ fock_thermal(scenario.nbar_b, dim))))
    checks.append(OracleCheck("p_click_h0", illumination.p_click_h0(scenario), p0_fock))

    # coherent probe through the object channel
    rho1 = fock_loss_channel(fock_coherent(scenario.nbar, dim),
                             scenario.kappa, scenario.nbar_b)
    p1c_fock = 1.0 - float(np.real(np.trace(fock_no_click_povm(sdet, dim) @ rho1)))
    checks.append(OracleCheck("p_click_h1_coherent",
                              illumination.p_click_h1_coherent(scenario), p1c_fock))

    # heralded branches
    pnst, vst, n_nc = condition_tmsv_on_idler(nbar, scenario.idler_det, dim)
    tm_scenario = scenario if scenario.probe_kind != "coherent" else _replace_kind(scenario)
    checks.append(OracleCheck("herald_no_click_prob",
                              illumination.herald_no_click_prob(tm_scenario), n_nc))

    povm = fock_no_click_povm(sdet, dim)
    rho_pnst1 = fock_loss_channel(pnst, scenario.kappa, scenario.nbar_b)
    p1p_fock = 1.0 - float(np.real(np.trace(povm @ rho_pnst1)))
    checks.append(OracleCheck("p_click_h1_pnst",
                              illumination.p_click_h1_pnst(tm_scenario), p1p_fock))

    if vst is not None:
        rho_vst1 = fock_loss_channel(vst, scenario.kappa, scenario.nbar_b)
        p1v_fock = 1.0 - float(np.real(np.trace(povm @ rho_vst1)))
        checks.append(OracleCheck("p_click_h1_vst",
                                  illumination.p_click_h1_vst(tm_scenario), p1v_fock))

    # photon distributions of the conditioned states, k <= n_max
    tmsv = conditioning.TMSV(nbar)
    g_pnst, _ = conditioning.herald_no_click(tmsv, scenario.idler_det)
    d_pnst = conditioning.photon_distribution(g_pnst, n_max)
    f_pnst = number_distribution(pnst)[:n_max + 1]
    checks.append(OracleCheck("photon_distribution_pnst_maxdev",
                              0.0, float(np.max(np.abs(d_pnst - f_pnst)))))
    if vst is not None:
        g_vst, _ = conditioning.herald_click(tmsv, scenario.idler_det)
        d_vst = conditioning.photon_distribution(g_vst, n_max)
        f_vst = number_distribution(vst)[:n_max + 1]
        checks.append(OracleCheck("photon_distribution_vst_maxdev",
                                  0.0, float(np.max(np.abs(d_vst - f_vst)))))
    return report


def _replace_kind(scenario):
    from dataclasses import replace

    return replace(scenario, probe_kind="tmsv")

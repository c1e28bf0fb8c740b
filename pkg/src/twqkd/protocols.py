"""Honest-channel models, Alice-Bob information and Devetak-Winter key rates.

Two protocol families are modelled:

``TMSV_DISPLACEMENT``
    Alice keeps the full TMSV reference W, Bob applies a random complex
    Gaussian displacement of power ``E_X`` and returns the mode unchanged
    (``psi`` is the identity).  Alice heterodynes the returned mode and W
    and uses the optimal linear estimate of the displacement.

``FL_QKD``
    Bob flips the phase of the received mode (``theta in {0, pi}``), then
    amplifies it with gain ``G_B``.  A symbol spans ``M_E`` mode pairs.
    Alice heterodynes every returned mode and its reference partner, sums
    the pairwise correlator and decides on its sign.

In both cases the honest channel is pure loss ``kappa_S`` on each leg and
the reference W is idealized to the full TMSV partner.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.special import erfc

from .channels import CONSTANT_VACUUM, GaussianChannelSpec, IDENTITY, action_of, amplifier, apply_to_joint, pure_loss
from .eve import (
    BINARY_PHASE,
    ChiResult,
    EncodingSpec,
    IntrusionParams,
    chi_E,
    random_displacement,
)
from .gaussian import block, cross_moments, rotation, tmsv_cm
from .numopt import OptConfig, maximize_1d

logger = logging.getLogger(__name__)

#: fiber attenuation in dB/km
DEFAULT_ALPHA = 0.2
DEFAULT_NS_RANGE = (1e-7, 1e-1)


class ProtocolFamily(enum.Enum):
    TMSV_DISPLACEMENT = "tmsv-disp"
    FL_QKD = "fl-qkd"


class InconsistentMeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolSpec:
    """Protocol parameters.

    ``N_S`` may be ``None`` when the brightness is to be optimized.  ``R`` is
    the symbol rate in symbols per second, so ``SKR = R * SKE`` with SKE in
    bits per symbol.
    """

    family: ProtocolFamily
    N_S: Optional[float] = None
    E_X: float = 0.0
    G_B: float = 1e6
    M_E: int = 1
    xi: float = 1.0
    R: float = 1e10
    alpha_db_per_km: float = DEFAULT_ALPHA

    def __post_init__(self):
        if self.N_S is not None and not self.N_S > 0:
            raise ValueError(f"N_S must be > 0, got {self.N_S}")
        if not 0.0 < self.xi <= 1.0:
            raise ValueError(f"xi must lie in (0, 1], got {self.xi}")
        if not self.R > 0:
            raise ValueError(f"R must be > 0, got {self.R}")
        if not self.alpha_db_per_km >= 0:
            raise ValueError("alpha_db_per_km must be >= 0")
        if int(self.M_E) != self.M_E or self.M_E < 1:
            raise ValueError(f"M_E must be an integer >= 1, got {self.M_E}")
        if self.family is ProtocolFamily.TMSV_DISPLACEMENT:
            if self.M_E != 1:
                raise ValueError("the displacement protocol uses M_E = 1")
            if not self.E_X >= 0:
                raise ValueError(f"E_X must be >= 0, got {self.E_X}")
        else:
            if self.E_X != 0:
                raise ValueError("FL-QKD uses phase encoding, E_X = 0")
            if not self.G_B >= 1:
                raise ValueError(f"G_B must be >= 1, got {self.G_B}")

    @property
    def psi(self) -> GaussianChannelSpec:
        if self.family is ProtocolFamily.TMSV_DISPLACEMENT:
            return IDENTITY
        return amplifier(self.G_B)

    @property
    def encoding(self) -> EncodingSpec:
        if self.family is ProtocolFamily.TMSV_DISPLACEMENT:
            return random_displacement(self.E_X)
        return BINARY_PHASE


def tmsv_displacement(N_S=None, E_X=1e4, **kw) -> ProtocolSpec:
    return ProtocolSpec(ProtocolFamily.TMSV_DISPLACEMENT, N_S=N_S, E_X=E_X, M_E=1, **kw)


def fl_qkd(N_S=None, G_B=1e6, M_E=200, **kw) -> ProtocolSpec:
    return ProtocolSpec(ProtocolFamily.FL_QKD, N_S=N_S, G_B=G_B, M_E=M_E, **kw)


@dataclass(frozen=True)
class MeasuredConstraints:
    M: int
    total_photons: float
    total_correlation: float

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be an integer >= 1, got {self.M}")
        if not self.total_photons >= 0:
            raise ValueError(f"total_photons must be >= 0, got {self.total_photons}")
        if not self.total_correlation >= 0:
            raise ValueError(f"total_correlation must be >= 0, got {self.total_correlation}")


@dataclass(frozen=True)
class RatePoint:
    L_km: float
    kappa_S: float
    N_S: float
    I_AB: float
    chi_E: float
    I_E: float
    SKE: float
    SKR: float
    intrusion: IntrusionParams
    optimized: bool = False


def fiber_loss(L: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Transmissivity ``10^(-alpha L / 10)`` of ``L`` km of fiber."""
    if L < 0:
        raise ValueError(f"fiber length must be >= 0, got {L}")
    return 10.0 ** (-alpha * L / 10.0)


def extract_intrusion(meas: MeasuredConstraints, n_s: float) -> IntrusionParams:
    """Intrusion parameters implied by security-check totals over ``M`` mode pairs."""
    if not n_s > 0:
        raise ValueError(f"N_S must be > 0, got {n_s}")
    kappa = meas.total_photons / (meas.M * n_s)
    if kappa == 0:
        if meas.total_correlation > 0:
            raise InconsistentMeasurementError("correlation without photons at Bob")
        return IntrusionParams(0.0, 1.0)
    f_e = 1.0 - meas.total_correlation / (kappa * meas.M * n_s * (n_s + 1.0))
    clamped = min(max(f_e, 0.0), 1.0)
    if abs(clamped - f_e) > 1e-6:
        logger.warning("f_E = %.6g outside [0, 1]; clamped to %.6g", f_e, clamped)
    return IntrusionParams(kappa, clamped)


def passive_constraints(kappa: float, n_s: float, M: int = 1) -> MeasuredConstraints:
    """Totals produced by a pure beamsplitter attack of transmissivity ``kappa``."""
    cov = apply_to_joint(pure_loss(kappa), tmsv_cm(n_s), 0) if kappa > 0 else None
    if cov is None:
        return MeasuredConstraints(M, 0.0, 0.0)
    mom = cross_moments(cov, 0, 1)
    return MeasuredConstraints(M, M * mom.n_ss, M * mom.total_correlation)


@dataclass(frozen=True)
class HonestState:
    """Returned mode A' (mode 0) and reference W (mode 1).

    ``cov`` is conditional on Bob's symbol; ``signal_cov`` is the covariance
    of the symbol-dependent first moments (zero for phase encoding).
    """

    cov: np.ndarray
    signal_cov: np.ndarray


def honest_return_cm(spec: ProtocolSpec, kappa_S: float, theta: float = 0.0,
                     n_s: Optional[float] = None) -> HonestState:
    """Honest round trip: loss, Bob's phase ``theta``, ``psi``, loss."""
    n_s = spec.N_S if n_s is None else n_s
    if n_s is None:
        raise ValueError("N_S is required")
    if not 0.0 <= kappa_S <= 1.0:
        raise ValueError(f"kappa_S must lie in [0, 1], got {kappa_S}")
    # total loss is the constant-vacuum channel
    leg = pure_loss(kappa_S) if kappa_S > 0 else CONSTANT_VACUUM
    cov = tmsv_cm(n_s)
    if kappa_S < 1.0:
        cov = apply_to_joint(leg, cov, 0)
    rot = np.eye(4)
    rot[:2, :2] = rotation(theta)
    cov = rot @ cov @ rot.T
    cov = apply_to_joint(spec.psi, cov, 0)
    if kappa_S < 1.0:
        cov = apply_to_joint(leg, cov, 0)
    signal = np.zeros((4, 4))
    if spec.E_X > 0:
        x = math.sqrt(kappa_S) * action_of(spec.psi).X
        signal[:2, :2] = 2.0 * spec.E_X * (x @ x.T)
    return HonestState(cov, signal)


def i_ab_tmsv_displacement(kappa_S: float, N_S: float, E_X: float) -> float:
    """Gaussian mutual information (bits per symbol) between the displacement and
    Alice's heterodyne record of (A', W).

    Heterodyne outcomes are Gaussian with covariance ``cov + I`` around the
    symbol-dependent mean, so the information is
    ``0.5 log2 det(cov + I + signal) / det(cov + I)``.
    """
    if min(kappa_S, N_S, E_X) < 0:
        raise ValueError("parameters must be >= 0")
    if E_X == 0 or kappa_S == 0:
        return 0.0
    st = honest_return_cm(tmsv_displacement(N_S=N_S, E_X=E_X), kappa_S)
    noise = st.cov + np.eye(4)
    _, ld_total = np.linalg.slogdet(noise + st.signal_cov)
    _, ld_noise = np.linalg.slogdet(noise)
    return max(0.5 * (ld_total - ld_noise) / math.log(2.0), 0.0)


def correlator_matrix(phase_sensitive: bool) -> np.ndarray:
    """Quadratic form ``K`` with ``T = u^T K u`` for heterodyne record
    ``u = (q_Ax, q_Ap, q_Wx, q_Wp)`` and ``alpha = (q_x + i q_p) / 2``.

    ``T = Re(alpha_A alpha_W^*)`` (phase-insensitive) or ``Re(alpha_A alpha_W)``.
    """
    k = np.zeros((4, 4))
    k[0, 2] = k[2, 0] = 1.0 / 8.0
    k[1, 3] = k[3, 1] = (-1.0 if phase_sensitive else 1.0) / 8.0
    return k


def _gaussian_quadratic_moments(k: np.ndarray, v: np.ndarray) -> Tuple[float, float]:
    mean = float(np.einsum("ij,ij->", k, v))
    # Isserlis: E[u_i u_j u_k u_l] = V_ij V_kl + V_ik V_jl + V_il V_jk
    second = (
        np.einsum("ij,kl,ij,kl->", k, k, v, v)
        + np.einsum("ij,kl,ik,jl->", k, k, v, v)
        + np.einsum("ij,kl,il,jk->", k, k, v, v)
    )
    return mean, float(second - mean ** 2)


def pick_correlator(cov: np.ndarray) -> bool:
    """Whether the phase-sensitive correlator carries more signal than the
    phase-insensitive one for this (A', W) state."""
    mom = cross_moments(cov, 0, 1)
    return abs(mom.m_sw.real) >= abs(mom.k_sw.real)


def flqkd_correlator_stats(cov: np.ndarray, M_E: int, bit: int = 0,
                           phase_sensitive: Optional[bool] = None) -> Tuple[float, float]:
    """Mean and variance of Alice's decision statistic for one symbol.

    ``cov`` is the bit-0 state of (A', W); bit 1 rotates A' by ``pi``.  The
    statistic sums ``M_E`` independent identical pairwise correlators.
    """
    if M_E < 1:
        raise ValueError("M_E must be >= 1")
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    cov = np.asarray(cov, dtype=float)
    if phase_sensitive is None:
        phase_sensitive = pick_correlator(cov)
    if bit == 1:
        rot = np.eye(4)
        rot[:2, :2] = rotation(math.pi)
        cov = rot @ cov @ rot.T
    mean, var = _gaussian_quadratic_moments(correlator_matrix(phase_sensitive), cov + np.eye(4))
    return M_E * mean, M_E * var


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def flqkd_error_probability(kappa_S: float, G_B: float, N_S: float, M_E: int) -> float:
    st = honest_return_cm(fl_qkd(N_S=N_S, G_B=G_B, M_E=M_E), kappa_S)
    mean, var = flqkd_correlator_stats(st.cov, M_E, 0)
    if not var > 0:
        raise ArithmeticError(f"non-positive correlator variance {var}")
    return 0.5 * float(erfc(abs(mean) / math.sqrt(2.0 * var)))


def i_ab_flqkd(kappa_S: float, G_B: float, N_S: float, M_E: int) -> float:
    """``1 - H2(p_err)`` bits per symbol for the sign decision on the correlator."""
    return 1.0 - binary_entropy(flqkd_error_probability(kappa_S, G_B, N_S, M_E))


def i_ab(spec: ProtocolSpec, kappa_S: float, n_s: Optional[float] = None) -> float:
    n_s = spec.N_S if n_s is None else n_s
    if spec.family is ProtocolFamily.TMSV_DISPLACEMENT:
        return i_ab_tmsv_displacement(kappa_S, n_s, spec.E_X)
    return i_ab_flqkd(kappa_S, spec.G_B, n_s, spec.M_E)


def ske(spec: ProtocolSpec, I_AB: float, chi_per_mode: float) -> Tuple[float, float]:
    """Devetak-Winter efficiency ``max(xi I_AB - I_E, 0)`` with ``I_E = M_E chi``.

    Returns ``(SKE, I_E)`` in bits per symbol.
    """
    if I_AB < 0 or chi_per_mode < 0:
        raise ValueError("informations must be >= 0")
    i_e = spec.M_E * chi_per_mode
    return max(spec.xi * I_AB - i_e, 0.0), i_e


def rate_point(spec: ProtocolSpec, L: float, intrusion: Optional[IntrusionParams] = None,
               n_s: Optional[float] = None, cfg: OptConfig = OptConfig()) -> RatePoint:
    """Key rate at distance ``L``; without ``intrusion`` Eve is assumed to
    mimic the fiber (``kappa_bar_S = kappa_S``, ``f_E = 0``)."""
    n_s = spec.N_S if n_s is None else n_s
    if n_s is None:
        raise ValueError("N_S is required (or use optimize_brightness)")
    kappa = fiber_loss(L, spec.alpha_db_per_km)
    if intrusion is None:
        intrusion = IntrusionParams(kappa, 0.0)
    iab = i_ab(spec, kappa, n_s)
    chi = chi_E(n_s, intrusion, spec.psi, spec.encoding, cfg).value
    s, i_e = ske(spec, iab, chi)
    return RatePoint(
        L_km=float(L), kappa_S=kappa, N_S=float(n_s), I_AB=iab, chi_E=chi,
        I_E=i_e, SKE=s, SKR=spec.R * s, intrusion=intrusion,
    )


def optimize_brightness(spec: ProtocolSpec, L: float, ns_range=DEFAULT_NS_RANGE,
                        intrusion: Optional[IntrusionParams] = None,
                        cfg: OptConfig = OptConfig(coarse_points=64)) -> Tuple[float, RatePoint]:
    """Maximize SKE over ``N_S`` on a log scale; ties go to the smaller ``N_S``.

    An optimum on the boundary of ``ns_range`` is logged as a warning.
    """
    lo, hi = ns_range
    if not 0 < lo < hi:
        raise ValueError(f"empty or non-positive N_S range {ns_range}")
    inner = OptConfig()

    def objective(log_ns):
        return rate_point(spec, L, intrusion, n_s=10.0 ** log_ns, cfg=inner).SKE

    log_best, _ = maximize_1d(objective, (math.log10(lo), math.log10(hi)),
                              replace(cfg, tol=max(cfg.tol, 1e-6)), tie_break="left")
    n_best = 10.0 ** log_best
    point = rate_point(spec, L, intrusion, n_s=n_best, cfg=inner)
    edge = (math.log10(hi) - math.log10(lo)) / (cfg.coarse_points | 1)
    if point.SKE > 0 and (log_best - math.log10(lo) < edge or math.log10(hi) - log_best < edge):
        logger.warning("optimal N_S=%.3g at the edge of the search range %s", n_best, ns_range)
    return n_best, replace(point, optimized=True)

"""Single-letter bound on the eavesdropper's Holevo information per mode.

Eve's information is bounded by

    F[rho_SW] = S(rho_B) - [S((Psi^c x I)[rho_SW]) - S(rho_SW)]

maximized over Gaussian joint states of Bob's received mode S and Alice's
retained mode W that are consistent with the measured constraints:

* S carries ``kappa_bar * N_S`` photons;
* ``|<a_S a_W>|^2 + |<a_S a_W^dagger>|^2 = (1 - f_E) kappa_bar N_S (N_S + 1)``.

The W marginal is fixed to the TMSV marginal.  Local phase rotations
leave every entropy and the correlation functional unchanged, so the cross
block can be taken diagonal, ``diag(c_x, c_p)``; with the correlation fixed
this leaves one angle ``phi`` with ``c_x = r cos(phi)``, ``c_p = r sin(phi)``.

``S(rho_B)`` is replaced by the entropy of a thermal state with the same
photon number, which upper-bounds it.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .channels import (
    ChannelKind,
    GaussianChannelSpec,
    apply_to_joint,
    complementary_of,
    output_photons,
)
from .gaussian import PHYSICALITY_TOL, entropy, g_func, is_physical, mean_photon
from .numopt import InfeasibleError, OptConfig, maximize_1d

logger = logging.getLogger(__name__)

#: angle of the cross block of an intact TMSV, ``c_x = -c_p``
TMSV_ANGLE = -math.pi / 4
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class IntrusionParams:
    kappa_bar_S: float
    f_E: float = 0.0

    def __post_init__(self):
        if not self.kappa_bar_S >= 0:
            raise ValueError(f"kappa_bar_S must be >= 0, got {self.kappa_bar_S}")
        if not 0.0 <= self.f_E <= 1.0:
            raise ValueError(f"f_E must lie in [0, 1], got {self.f_E}")


class EncodingKind(enum.Enum):
    RANDOM_DISPLACEMENT = "random-displacement"
    BINARY_PHASE = "binary-phase"


@dataclass(frozen=True)
class EncodingSpec:
    """Bob's symmetric encoding.

    Random displacement draws a circular complex Gaussian ``d`` with
    ``<|d|^2> = E_X``.  Binary phase uses ``theta in {0, pi}`` with equal
    probability and no displacement.
    """

    kind: EncodingKind
    E_X: float = 0.0

    def __post_init__(self):
        if not self.E_X >= 0:
            raise ValueError(f"E_X must be >= 0, got {self.E_X}")
        if self.kind is EncodingKind.BINARY_PHASE and self.E_X != 0:
            raise ValueError("binary phase encoding has E_X = 0")

    @property
    def phases(self) -> tuple:
        if self.kind is EncodingKind.BINARY_PHASE:
            return (0.0, math.pi)
        return (0.0,)


def random_displacement(E_X: float) -> EncodingSpec:
    return EncodingSpec(EncodingKind.RANDOM_DISPLACEMENT, float(E_X))


BINARY_PHASE = EncodingSpec(EncodingKind.BINARY_PHASE)


@dataclass(frozen=True)
class AttackStateParams:
    c_x: float
    c_p: float


@dataclass(frozen=True)
class ChiResult:
    """Maximized bound together with the maximizing attack state."""

    value: float
    attack: AttackStateParams
    phi: float
    raw_value: float
    feasible_arcs: Tuple[Tuple[float, float], ...]


def build_joint_cm(n_s: float, intrusion: IntrusionParams, attack: AttackStateParams,
                   tol: float = PHYSICALITY_TOL) -> Optional[np.ndarray]:
    """Joint (S, W) covariance matrix, or ``None`` if it is unphysical."""
    a = 2.0 * intrusion.kappa_bar_S * n_s + 1.0
    b = 2.0 * n_s + 1.0
    cx, cp = attack.c_x, attack.c_p
    cov = np.array(
        [
            [a, 0.0, cx, 0.0],
            [0.0, a, 0.0, cp],
            [cx, 0.0, b, 0.0],
            [0.0, cp, 0.0, b],
        ]
    )
    return cov if is_physical(cov, tol) else None


def correlation_functional(attack: AttackStateParams) -> float:
    """``|<a_S a_W>|^2 + |<a_S a_W^dagger>|^2`` for a diagonal cross block."""
    return (attack.c_x ** 2 + attack.c_p ** 2) / 8.0


def required_correlation(n_s: float, intrusion: IntrusionParams) -> float:
    return (1.0 - intrusion.f_E) * intrusion.kappa_bar_S * n_s * (n_s + 1.0)


def mean_photon_after_psi(psi: GaussianChannelSpec, n_in: float, E_X: float) -> float:
    """Photons leaving Bob: encoding adds ``E_X``, then ``psi`` acts."""
    if n_in < 0 or E_X < 0:
        raise ValueError("photon numbers must be >= 0")
    if psi.kind is ChannelKind.CONSTANT_VACUUM:
        raise ValueError("psi must be one of the allowed return channels")
    return output_photons(psi, n_in + E_X)


def f_single(cov_sw: np.ndarray, psi: GaussianChannelSpec, encoding: EncodingSpec) -> float:
    """Single-letter objective in bits for the joint state ``cov_sw`` (S is mode 0)."""
    n_b = mean_photon_after_psi(psi, max(mean_photon(cov_sw, 0), 0.0), encoding.E_X)
    env = apply_to_joint(complementary_of(psi), cov_sw, 0)
    return g_func(n_b) - (entropy(env) - entropy(cov_sw))


def _attack_at(r: float, phi: float) -> AttackStateParams:
    return AttackStateParams(r * math.cos(phi), r * math.sin(phi))


def _feasible_arcs(n_s, intrusion, r, tol) -> Tuple[Tuple[float, float], ...]:
    """Physical part of ``t`` in ``[0, pi/2]``, as at most two closed arcs.

    With ``u = cos 2t`` the physicality condition ``det - Delta + 1 >= 0`` is a
    convex quadratic in ``u``, so the infeasible set is one interval in ``u``.
    What remains is an arc starting at ``t = 0`` (TMSV-like correlation)
    and an arc ending at ``t = pi/2`` (beamsplitter-like correlation); each
    boundary is found by bisection from a coarse scan.
    """
    def ok(t):
        return build_joint_cm(n_s, intrusion, _attack_at(r, TMSV_ANGLE + t), tol) is not None

    def edge(inside, outside):
        for _ in range(64):
            mid = 0.5 * (inside + outside)
            if ok(mid):
                inside = mid
            else:
                outside = mid
        return inside

    grid = np.linspace(0.0, math.pi / 2, 65)
    flags = [ok(t) for t in grid]
    if all(flags):
        return ((0.0, math.pi / 2),)
    bad = [t for t, f in zip(grid, flags) if not f]
    arcs = []
    if flags[0]:
        arcs.append((0.0, edge(0.0, bad[0])))
    if flags[-1]:
        arcs.append((edge(math.pi / 2, bad[-1]), math.pi / 2))
    if not arcs:
        raise InfeasibleError(
            f"no physical state has correlation {r * r / 8:.6g} with "
            f"kappa_bar_S={intrusion.kappa_bar_S}, N_S={n_s}"
        )
    return tuple(arcs)


def chi_E(
    n_s: float,
    intrusion: IntrusionParams,
    psi: GaussianChannelSpec,
    encoding: EncodingSpec,
    cfg: OptConfig = OptConfig(),
    tol: float = PHYSICALITY_TOL,
) -> ChiResult:
    """Maximize the single-letter objective over the constraint circle.

    The objective has period ``pi`` in ``phi`` (flipping the sign of one
    mode) and is mirror-symmetric about the TMSV angle (rotating both modes
    by ``pi/2`` swaps ``c_x`` and ``c_p``), so only the offset
    ``t = phi - TMSV_ANGLE`` in ``[0, pi/2]`` is searched, restricted to its
    physical part, which is one or two arcs.
    """
    if n_s < 0:
        raise ValueError(f"N_S must be >= 0, got {n_s}")
    r = math.sqrt(8.0 * required_correlation(n_s, intrusion))
    arcs = _feasible_arcs(n_s, intrusion, r, tol)

    def objective(t):
        cov = build_joint_cm(n_s, intrusion, _attack_at(r, TMSV_ANGLE + t), tol)
        if cov is None:
            return -math.inf
        return f_single(cov, psi, encoding)

    t_best, raw = arcs[0][0], -math.inf
    for lo, hi in arcs:
        if hi > lo:
            t, v = maximize_1d(objective, (lo, hi), cfg)
        else:
            t, v = lo, objective(lo)
        if v > raw:
            t_best, raw = t, v
    if not math.isfinite(raw):
        raise InfeasibleError("constraint circle has no physical point")
    if raw < -CLAMP_TOL:
        logger.warning("chi_E objective %.3g is negative beyond the clamp tolerance", raw)
    phi = TMSV_ANGLE + t_best
    return ChiResult(
        value=max(raw, 0.0),
        attack=_attack_at(r, phi),
        phi=phi,
        raw_value=raw,
        feasible_arcs=arcs,
    )

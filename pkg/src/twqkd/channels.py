"""Excess-noise-free single-mode Gaussian channels and their complements.

Every channel acts on one mode's covariance block as ``S -> X S X^T + Y``
(cross blocks with other modes pick up ``X``).  The phase conjugator uses
``a_out = sqrt(G) a^dagger + sqrt(G+1) v``, so it maps
``S -> G Z S Z + (G+1) I`` with ``Z = diag(1, -1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .gaussian import (
    ENTROPY_TOL,
    PhysicalityError,
    check_symmetric,
    entropy,
    is_physical,
    n_modes_of,
    symplectic_form,
)

_Z = np.diag([1.0, -1.0])
_I2 = np.eye(2)


class ChannelKind(enum.Enum):
    PURE_LOSS = "pure-loss"
    AMPLIFIER = "amplifier"
    PHASE_CONJUGATOR = "phase-conjugator"
    IDENTITY = "identity"
    CONSTANT_VACUUM = "constant-vacuum"


@dataclass(frozen=True)
class GaussianChannelSpec:
    kind: ChannelKind
    parameter: Optional[float] = None

    def __post_init__(self):
        p = self.parameter
        if self.kind in (ChannelKind.IDENTITY, ChannelKind.CONSTANT_VACUUM):
            if p is not None:
                raise ValueError(f"{self.kind.value} takes no parameter")
            return
        if p is None:
            raise ValueError(f"{self.kind.value} needs a parameter")
        if self.kind is ChannelKind.PURE_LOSS and not 0.0 < p <= 1.0:
            raise ValueError(f"pure-loss transmissivity must be in (0, 1], got {p}")
        if self.kind is ChannelKind.AMPLIFIER and not p >= 1.0:
            raise ValueError(f"amplifier gain must be >= 1, got {p}")
        if self.kind is ChannelKind.PHASE_CONJUGATOR and not p > 0.0:
            raise ValueError(f"phase-conjugator gain must be > 0, got {p}")


def pure_loss(eta: float) -> GaussianChannelSpec:
    return GaussianChannelSpec(ChannelKind.PURE_LOSS, float(eta))


def amplifier(gain: float) -> GaussianChannelSpec:
    return GaussianChannelSpec(ChannelKind.AMPLIFIER, float(gain))


def phase_conjugator(gain: float) -> GaussianChannelSpec:
    return GaussianChannelSpec(ChannelKind.PHASE_CONJUGATOR, float(gain))


IDENTITY = GaussianChannelSpec(ChannelKind.IDENTITY)
CONSTANT_VACUUM = GaussianChannelSpec(ChannelKind.CONSTANT_VACUUM)


@dataclass(frozen=True)
class ChannelAction:
    """``(X, Y)`` pair of a single-mode Gaussian channel."""

    X: np.ndarray
    Y: np.ndarray

    def cp_margin(self) -> float:
        """Smallest eigenvalue of ``Y + i Omega - i X Omega X^T``; >= 0 iff CP."""
        om = symplectic_form(1)
        m = self.Y + 1j * om - 1j * self.X @ om @ self.X.T
        return float(np.linalg.eigvalsh(m).min())


def action_of(spec: GaussianChannelSpec) -> ChannelAction:
    kind, p = spec.kind, spec.parameter
    if kind is ChannelKind.PURE_LOSS:
        return ChannelAction(np.sqrt(p) * _I2, (1.0 - p) * _I2)
    if kind is ChannelKind.AMPLIFIER:
        return ChannelAction(np.sqrt(p) * _I2, (p - 1.0) * _I2)
    if kind is ChannelKind.PHASE_CONJUGATOR:
        return ChannelAction(np.sqrt(p) * _Z, (p + 1.0) * _I2)
    if kind is ChannelKind.IDENTITY:
        return ChannelAction(_I2.copy(), np.zeros((2, 2)))
    # discards the input entirely, so the cross blocks vanish as well
    return ChannelAction(np.zeros((2, 2)), _I2.copy())


def complementary_of(spec: GaussianChannelSpec) -> GaussianChannelSpec:
    """Channel from the input to the environment of the minimal dilation.

    * pure loss ``eta``      -> pure loss ``1 - eta``
    * amplifier ``G``        -> phase conjugator ``G - 1``
    * conjugator ``G``       -> amplifier ``G + 1``
    * identity               -> constant vacuum

    Degenerate complements (``eta = 1``, ``G = 1``) are the constant vacuum.
    """
    kind, p = spec.kind, spec.parameter
    if kind is ChannelKind.PURE_LOSS:
        return pure_loss(1.0 - p) if p < 1.0 else CONSTANT_VACUUM
    if kind is ChannelKind.AMPLIFIER:
        return phase_conjugator(p - 1.0) if p > 1.0 else CONSTANT_VACUUM
    if kind is ChannelKind.PHASE_CONJUGATOR:
        return amplifier(p + 1.0)
    if kind is ChannelKind.IDENTITY:
        return CONSTANT_VACUUM
    raise ValueError("constant-vacuum channel has no complement in this model")


def apply_to_joint(
    channel: Union[GaussianChannelSpec, ChannelAction],
    cov: np.ndarray,
    mode: int,
    tol: float = ENTROPY_TOL,
) -> np.ndarray:
    """Apply a single-mode channel to ``mode`` of a joint state, identity elsewhere."""
    cov = check_symmetric(cov)
    n = n_modes_of(cov)
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n}-mode state")
    act = channel if isinstance(channel, ChannelAction) else action_of(channel)
    big_x = np.eye(2 * n)
    big_y = np.zeros((2 * n, 2 * n))
    sl = slice(2 * mode, 2 * mode + 2)
    big_x[sl, sl] = act.X
    big_y[sl, sl] = act.Y
    out = big_x @ cov @ big_x.T + big_y
    out = (out + out.T) / 2.0
    if tol is not None and not is_physical(out, tol):
        raise PhysicalityError("channel output is unphysical")
    return out


def compose(cov: np.ndarray, mode: int, *channels: GaussianChannelSpec) -> np.ndarray:
    for ch in channels:
        cov = apply_to_joint(ch, cov, mode)
    return cov


def entropy_gain(spec: GaussianChannelSpec, cov: np.ndarray, mode: int) -> float:
    """``S(phi[rho]) - S(rho)`` in bits, phi acting on ``mode``; may be negative."""
    return entropy(apply_to_joint(spec, cov, mode)) - entropy(cov)


def output_photons(spec: GaussianChannelSpec, n_in: float) -> float:
    """Mean photon number at the output for a phase-insensitive input of ``n_in`` photons."""
    kind, p = spec.kind, spec.parameter
    if kind is ChannelKind.PURE_LOSS:
        return p * n_in
    if kind is ChannelKind.AMPLIFIER:
        return p * n_in + p - 1.0
    if kind is ChannelKind.PHASE_CONJUGATOR:
        return p * (n_in + 1.0)
    if kind is ChannelKind.IDENTITY:
        return n_in
    return 0.0

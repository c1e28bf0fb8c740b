"""Covariance-matrix algebra for zero-mean Gaussian states.

Conventions used throughout the package:

* quadrature ordering ``(x_1, p_1, ..., x_n, p_n)``;
* ``x = a + a^dagger`` and ``p = -i (a - a^dagger)``, so the vacuum has
  ``<x^2> = <p^2> = 1`` and the canonical commutator is ``[x, p] = 2i``.

The commutator matrix is therefore ``2 * Omega`` with
``Omega = (+)_k [[0, 1], [-1, 0]]``.  Dividing the factor 2 into the
covariance matrix is what makes the vacuum's symplectic eigenvalue equal
to one, and :func:`symplectic_form` returns the normalized ``Omega``.  This
is the only place the factor is accounted for.

Covariance matrices are plain ``numpy`` arrays of shape ``(2n, 2n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.linalg import solve_triangular

#: Default tolerance on the smallest symplectic eigenvalue (``nu >= 1 - tol``).
PHYSICALITY_TOL = 1e-9
#: Looser tolerance used before raising in entropy evaluations.
ENTROPY_TOL = 1e-6
SYMMETRY_TOL = 1e-12
# spectrum spread above which small symplectic eigenvalues are recomputed
_SPREAD = 1e3

_LN2 = np.log(2.0)


class PhysicalityError(ValueError):
    """A covariance matrix violates the uncertainty principle."""


@dataclass(frozen=True)
class ModeMoments:
    """Second moments between two modes, in annihilation-operator form.

    Attributes:
        n_ss: mean photon number of the first mode.
        m_sw: phase-sensitive correlation ``<a_i a_j>``.
        k_sw: phase-insensitive correlation ``<a_i a_j^dagger>``.
    """

    n_ss: float
    m_sw: complex
    k_sw: complex

    @property
    def total_correlation(self) -> float:
        return abs(self.m_sw) ** 2 + abs(self.k_sw) ** 2


def g_func(x):
    """Entropy in bits of a thermal state with mean photon number ``x``.

    ``g(x) = (x+1) log2(x+1) - x log2(x)``, evaluated in the form
    ``log2(1+x) + x log2(1+1/x)`` which has no cancellation for large ``x``
    and goes smoothly to 0 as ``x -> 0``.  Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError(f"g_func needs x >= 0, got {x}")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            arr > 0,
            (np.log1p(arr) + arr * np.log1p(1.0 / np.where(arr > 0, arr, 1.0))) / _LN2,
            0.0,
        )
    if np.ndim(out) == 0:
        return float(out)
    return out


def symplectic_form(n_modes: int) -> np.ndarray:
    """Normalized symplectic form ``(+)_k [[0, 1], [-1, 0]]``."""
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    return _omega(int(n_modes)).copy()


@lru_cache(maxsize=16)
def _omega(n: int) -> np.ndarray:
    out = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    out.flags.writeable = False
    return out


def n_modes_of(cov: np.ndarray) -> int:
    cov = np.asarray(cov)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError(f"covariance matrix must be 2n x 2n, got shape {cov.shape}")
    return cov.shape[0] // 2


def check_symmetric(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    n_modes_of(cov)
    scale = max(1.0, float(np.abs(cov).max()))
    if float(np.abs(cov - cov.T).max()) > SYMMETRY_TOL * scale:
        raise ValueError("covariance matrix is not symmetric")
    return cov


def _spectrum(cov: np.ndarray, strict: bool) -> np.ndarray | None:
    n = cov.shape[0] // 2
    omega = _omega(n)
    chol = None
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        if strict:
            return None
        eigs = np.linalg.eigvals(1j * omega @ cov)
    else:
        eigs = np.linalg.eigvalsh(chol.T @ (1j * omega) @ chol)
    nus = np.sort(np.abs(eigs))[::-1][::2].copy()
    if chol is not None and nus[0] > _SPREAD * nus[-1]:
        # eigvalsh has absolute error ~eps * nu_max, which swamps nu ~ 1 next to
        # a very bright mode; 1/nu from L^-1 (i Omega) L^-T is accurate for the small ones
        inv = solve_triangular(chol, np.eye(2 * n), lower=True)
        mus = np.sort(np.abs(np.linalg.eigvalsh(inv @ (1j * omega) @ inv.T)))[::2]
        small = nus < np.sqrt(nus[0] * nus[-1])
        nus[small] = 1.0 / mus[small]
    return nus


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of ``cov``, one value per mode, sorted descending.

    The eigenvalues of ``i Omega cov`` come in pairs ``+-nu``.  For positive
    definite ``cov`` they are computed from the Hermitian matrix
    ``L^T (i Omega) L`` with ``cov = L L^T``, which is similar to
    ``i Omega cov``.  When the spectrum spans many decades the small values
    are taken from the inverse, ``L^-1 (i Omega) L^-T``, so that a mode near
    the vacuum stays accurate next to an amplified one.
    """
    return _spectrum(check_symmetric(cov), strict=False)


def is_physical(cov: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    """True iff ``cov + i Omega >= 0`` up to ``tol`` on the symplectic spectrum."""
    try:
        cov = check_symmetric(cov)
    except ValueError:
        return False
    if not np.all(np.isfinite(cov)):
        return False
    nus = _spectrum(cov, strict=True)
    return nus is not None and bool(nus.min() >= 1.0 - tol)


def entropy(cov: np.ndarray, tol: float = ENTROPY_TOL) -> float:
    """Von Neumann entropy in bits: ``sum_k g((nu_k - 1) / 2)``."""
    nus = symplectic_eigenvalues(cov)
    if nus.min() < 1.0 - tol:
        raise PhysicalityError(f"unphysical covariance matrix, min symplectic eigenvalue {nus.min():.3g}")
    return float(np.sum(g_func(np.clip((nus - 1.0) / 2.0, 0.0, None))))


def thermal_cm(nbar: float, n_modes: int = 1) -> np.ndarray:
    if nbar < 0:
        raise ValueError("thermal photon number must be >= 0")
    return (2.0 * nbar + 1.0) * np.eye(2 * n_modes)


def vacuum_cm(n_modes: int = 1) -> np.ndarray:
    return np.eye(2 * n_modes)


def tmsv_cm(n_s: float) -> np.ndarray:
    """Two-mode squeezed vacuum with ``n_s`` photons per mode, modes ordered (S, W)."""
    if n_s < 0:
        raise ValueError(f"N_S must be >= 0, got {n_s}")
    a = 2.0 * n_s + 1.0
    c = 2.0 * np.sqrt(n_s * (n_s + 1.0))
    return np.array(
        [
            [a, 0.0, c, 0.0],
            [0.0, a, 0.0, -c],
            [c, 0.0, a, 0.0],
            [0.0, -c, 0.0, a],
        ]
    )


def direct_sum(*covs: np.ndarray) -> np.ndarray:
    size = sum(np.shape(c)[0] for c in covs)
    out = np.zeros((size, size))
    i = 0
    for c in covs:
        k = np.shape(c)[0]
        out[i:i + k, i:i + k] = c
        i += k
    return out


def rotation(theta: float) -> np.ndarray:
    """Phase rotation ``a -> exp(i theta) a`` acting on one mode's ``(x, p)``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _check_mode(cov: np.ndarray, mode: int) -> int:
    n = n_modes_of(cov)
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n}-mode state")
    return n


def block(cov: np.ndarray, i: int, j: int) -> np.ndarray:
    return np.asarray(cov)[2 * i:2 * i + 2, 2 * j:2 * j + 2]


def mean_photon(cov: np.ndarray, mode: int) -> float:
    """Mean photon number ``<a^dagger a>`` of a zero-mean mode."""
    _check_mode(cov, mode)
    blk = block(cov, mode, mode)
    return float((blk[0, 0] + blk[1, 1] - 2.0) / 4.0)


def cross_moments(cov: np.ndarray, i: int, j: int) -> ModeMoments:
    """``<a_i a_j>`` and ``<a_i a_j^dagger>`` from the ``(i, j)`` cross block."""
    _check_mode(cov, i)
    _check_mode(cov, j)
    if i == j:
        raise ValueError("cross_moments needs two distinct modes")
    (cxx, cxp), (cpx, cpp) = block(cov, i, j)
    m = complex(cxx - cpp, cxp + cpx) / 4.0
    k = complex(cxx + cpp, cpx - cxp) / 4.0
    return ModeMoments(n_ss=mean_photon(cov, i), m_sw=m, k_sw=k)


def _indices(modes: Iterable[int]) -> list[int]:
    return [q for m in modes for q in (2 * m, 2 * m + 1)]


def reduce_to(cov: np.ndarray, modes: Iterable[int]) -> np.ndarray:
    """Marginal covariance matrix of the listed modes."""
    idx = _indices(modes)
    return np.asarray(cov)[np.ix_(idx, idx)]


def condition_on_heterodyne(cov: np.ndarray, measured: Iterable[int], tol: float = ENTROPY_TOL) -> np.ndarray:
    """Covariance of the unmeasured modes after heterodyning ``measured``.

    Heterodyne outcomes carry one extra vacuum unit of noise, so the
    conditional matrix is the Schur complement ``A - C (B + I)^-1 C^T``.
    It does not depend on the outcome.
    """
    cov = check_symmetric(cov)
    n = cov.shape[0] // 2
    measured = sorted(set(measured))
    if not measured or len(measured) >= n:
        raise ValueError("measured set must be a nonempty proper subset of the modes")
    for m in measured:
        _check_mode(cov, m)
    kept = [m for m in range(n) if m not in measured]
    ka, kb = _indices(kept), _indices(measured)
    a = cov[np.ix_(ka, ka)]
    b = cov[np.ix_(kb, kb)]
    c = cov[np.ix_(ka, kb)]
    out = a - c @ np.linalg.solve(b + np.eye(len(kb)), c.T)
    out = (out + out.T) / 2.0
    if not is_physical(out, tol):
        raise PhysicalityError("heterodyne conditioning produced an unphysical state")
    return out

"""Test-only oracles.

Nothing here calls into the package's channel or protocol code: random
states are built from random symplectic matrices, and optical chains are
simulated by propagating classical Wigner samples through beamsplitters.
"""

import numpy as np


def _reorder(n):
    # (x1..xn, p1..pn) -> (x1, p1, ..., xn, pn)
    return np.array([k for m in range(n) for k in (m, n + m)])


def random_symplectic(rng, n, max_squeeze=1.0):
    """Random symplectic matrix in (x1, p1, ...) ordering: passive * squeeze * passive."""
    def passive():
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q, r = np.linalg.qr(z)
        u = q * (np.diag(r) / np.abs(np.diag(r)))
        o = np.block([[u.real, -u.imag], [u.imag, u.real]])
        idx = _reorder(n)
        return o[np.ix_(idx, idx)]

    r = rng.uniform(-max_squeeze, max_squeeze, size=n)
    sq = np.diag(np.concatenate([np.exp(-r), np.exp(r)]))
    idx = _reorder(n)
    sq = sq[np.ix_(idx, idx)]
    return passive() @ sq @ passive()


def random_physical_cm(rng, n=2, max_thermal=2.0, max_squeeze=1.0):
    nus = 1.0 + 2.0 * rng.uniform(0, max_thermal, size=n)
    d = np.diag(np.repeat(nus, 2))
    s = random_symplectic(rng, n, max_squeeze)
    cov = s @ d @ s.T
    return (cov + cov.T) / 2


def omega(n):
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigs_general(cov):
    """Plain eigen-decomposition of i*Omega*cov, no Cholesky trick."""
    n = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * omega(n) @ cov))
    return np.sort(ev)[::-1][::2]


def g_mp(x):
    import mpmath as mp

    mp.mp.dps = 50
    x = mp.mpf(x)
    if x == 0:
        return 0.0
    return float((x + 1) * mp.log(x + 1, 2) - x * mp.log(x, 2))


def wigner_tmsv_samples(rng, n_s, size):
    """Quadrature samples (x_S, p_S, x_W, p_W) of a TMSV built from two squeezed vacua."""
    r = np.arcsinh(np.sqrt(n_s))
    # squeezed vacua on two modes, then a 50:50 beamsplitter
    x1 = rng.normal(size=size) * np.exp(r)
    p1 = rng.normal(size=size) * np.exp(-r)
    x2 = rng.normal(size=size) * np.exp(-r)
    p2 = rng.normal(size=size) * np.exp(r)
    s = np.sqrt(0.5)
    return np.stack([s * (x1 + x2), s * (p1 + p2), s * (x1 - x2), s * (p1 - p2)], axis=-1)


def wigner_loss(rng, q, eta):
    """Beamsplitter with a vacuum port on a (..., 2) quadrature array."""
    return np.sqrt(eta) * q + np.sqrt(1 - eta) * rng.normal(size=q.shape)


def wigner_amplifier(rng, q, gain):
    """Two-mode-squeezing amplifier with a vacuum idler (idler enters conjugated)."""
    v = rng.normal(size=q.shape)
    v_conj = v * np.array([1.0, -1.0])
    return np.sqrt(gain) * q + np.sqrt(gain - 1) * v_conj


def heterodyne(rng, q):
    """Heterodyne record in quadrature units: Wigner sample plus one vacuum unit."""
    return q + rng.normal(size=q.shape)


def gaussian_mi_plugin(y, d):
    """Plug-in Gaussian mutual information (bits) between samples y and regressors d."""
    y = y - y.mean(axis=0)
    d = d - d.mean(axis=0)
    beta, *_ = np.linalg.lstsq(d, y, rcond=None)
    resid = y - d @ beta
    _, ld_y = np.linalg.slogdet(np.cov(y, rowvar=False))
    _, ld_r = np.linalg.slogdet(np.cov(resid, rowvar=False))
    return 0.5 * (ld_y - ld_r) / np.log(2)


def correlator_samples(u, phase_sensitive):
    """Pairwise statistic from heterodyne records u = (q_Ax, q_Ap, q_Wx, q_Wp)."""
    a = (u[:, 0] + 1j * u[:, 1]) / 2
    w = (u[:, 2] + 1j * u[:, 3]) / 2
    return (a * (w if phase_sensitive else np.conj(w))).real

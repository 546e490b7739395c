"""Compiled inner loops: equilibrium RK4 and the stabilized shooting sweep.

The shooting propagation advances five 9-component complex basis vectors
across [0, 1] with fixed-step RK4 and re-orthonormalizes them every
`reorth_every` steps (modified Gram-Schmidt) so stiff exponents cannot
collapse the basis. Variable coefficients are sampled on the half-step
grid (2*n_steps + 1 points) so RK4 midpoints use exact profile values.

State component order: (w, w', w'', w''', Theta, Theta', N, N', N'').
"""

import numpy as np
from numba import njit

from .taxis import taxis_value

_taxis_value = njit(cache=True, nogil=True)(taxis_value)


@njit(cache=True, nogil=True)
def integrate_basic(p1, M, us, hbar, I0, chi):
    """Downward RK4 of (tau, n_b) from x3=1 with tau(1)=0, n_b(1)=p1.

    Returns (tau, nb) on the ascending uniform grid of M+1 nodes.
    """
    h = 1.0 / M
    tau = np.empty(M + 1)
    nb = np.empty(M + 1)
    tau[M] = 0.0
    nb[M] = p1
    t = 0.0
    n = p1
    for i in range(M, 0, -1):
        # derivatives: dtau = n, dn = us*T(G)*n with G = I0*exp(hbar*tau)
        k1t = n
        k1n = us * _taxis_value(I0 * np.exp(hbar * t), chi) * n
        t2 = t - 0.5 * h * k1t
        n2 = n - 0.5 * h * k1n
        k2t = n2
        k2n = us * _taxis_value(I0 * np.exp(hbar * t2), chi) * n2
        t3 = t - 0.5 * h * k2t
        n3 = n - 0.5 * h * k2n
        k3t = n3
        k3n = us * _taxis_value(I0 * np.exp(hbar * t3), chi) * n3
        t4 = t - h * k3t
        n4 = n - h * k3n
        k4t = n4
        k4n = us * _taxis_value(I0 * np.exp(hbar * t4), chi) * n4
        t -= h * (k1t + 2.0 * k2t + 2.0 * k3t + k4t) / 6.0
        n -= h * (k1n + 2.0 * k2n + 2.0 * k3n + k4n) / 6.0
        tau[i - 1] = t
        nb[i - 1] = n
    return tau, nb


@njit(cache=True, nogil=True, inline="always")
def _deriv(S, out, j, a2, gamma, Ra, RT, Le, Pr, us, hbar, tb, lam, dlam, dnb):
    """Derivative of all five basis columns at half-grid sample j."""
    cw2 = 2.0 * a2 + gamma / Pr
    cw0 = -a2 * (a2 + gamma / Pr)
    cwN = a2 * Ra
    cwT = a2 * RT
    cth = gamma + a2
    cN2 = us * tb[j]
    # growth term on the cell-diffusion clock: gamma, not gamma*Le
    # (the Le-scaled variant shifts every oscillatory fixture by ~Le)
    cN1 = gamma + a2 + 2.0 * hbar * us * lam[j]
    cN0 = hbar * us * dlam[j]
    cNw = -Le * dnb[j]
    for c in range(5):
        out[0, c] = S[1, c]
        out[1, c] = S[2, c]
        out[2, c] = S[3, c]
        out[3, c] = cw2 * S[2, c] + cw0 * S[0, c] + cwN * S[7, c] + cwT * S[4, c]
        out[4, c] = S[5, c]
        out[5, c] = cth * S[4, c] - S[0, c]
        out[6, c] = S[7, c]
        out[7, c] = S[8, c]
        out[8, c] = cN2 * S[8, c] + cN1 * S[7, c] + cN0 * S[6, c] + cNw * S[0, c]


@njit(cache=True, nogil=True)
def _mgs(S, R):
    """In-place modified Gram-Schmidt on the 5 columns; fills R (upper
    triangular, positive real diagonal) with S_old = S_new @ R. Returns
    the accumulated log of the diagonal (the determinant rescaling)."""
    logs = 0.0
    for c in range(5):
        for p in range(c):
            proj = 0.0 + 0.0j
            for r in range(9):
                proj += np.conj(S[r, p]) * S[r, c]
            R[p, c] = proj
            for r in range(9):
                S[r, c] -= proj * S[r, p]
        nrm = 0.0
        for r in range(9):
            nrm += S[r, c].real ** 2 + S[r, c].imag ** 2
        nrm = np.sqrt(nrm)
        R[c, c] = nrm
        logs += np.log(nrm)
        inv = 1.0 / nrm
        for r in range(9):
            S[r, c] *= inv
    return logs


@njit(cache=True, nogil=True)
def _init_basis(S, us, hbar, lam0, tb0):
    """Basis spanning the bottom boundary conditions: w=w'=0, Theta=0 and
    the zero-flux tie N'' = hbar*us*Lambda(0)*N + us*T_b(0)*N'."""
    S[:] = 0.0
    S[2, 0] = 1.0
    S[3, 1] = 1.0
    S[5, 2] = 1.0
    S[6, 3] = 1.0
    S[8, 3] = hbar * us * lam0
    S[7, 4] = 1.0
    S[8, 4] = us * tb0


@njit(cache=True, nogil=True)
def _rk4_step(S, K1, K2, K3, K4, T1, i, h, a2, gamma, Ra, RT, Le, Pr, us, hbar,
              tb, lam, dlam, dnb):
    j = 2 * i
    _deriv(S, K1, j, a2, gamma, Ra, RT, Le, Pr, us, hbar, tb, lam, dlam, dnb)
    for r in range(9):
        for c in range(5):
            T1[r, c] = S[r, c] + 0.5 * h * K1[r, c]
    _deriv(T1, K2, j + 1, a2, gamma, Ra, RT, Le, Pr, us, hbar, tb, lam, dlam, dnb)
    for r in range(9):
        for c in range(5):
            T1[r, c] = S[r, c] + 0.5 * h * K2[r, c]
    _deriv(T1, K3, j + 1, a2, gamma, Ra, RT, Le, Pr, us, hbar, tb, lam, dlam, dnb)
    for r in range(9):
        for c in range(5):
            T1[r, c] = S[r, c] + h * K3[r, c]
    _deriv(T1, K4, j + 2, a2, gamma, Ra, RT, Le, Pr, us, hbar, tb, lam, dlam, dnb)
    for r in range(9):
        for c in range(5):
            S[r, c] += h * (K1[r, c] + 2.0 * K2[r, c] + 2.0 * K3[r, c] + K4[r, c]) / 6.0


@njit(cache=True, nogil=True)
def _top_matrix(S, us, tb_top):
    """Rows: w(1), w''(1), Theta(1), N(1), us*T_b(1)*N'(1) - N''(1)."""
    M = np.empty((5, 5), dtype=np.complex128)
    for c in range(5):
        M[0, c] = S[0, c]
        M[1, c] = S[2, c]
        M[2, c] = S[4, c]
        M[3, c] = S[6, c]
        M[4, c] = us * tb_top * S[7, c] - S[8, c]
    return M


@njit(cache=True, nogil=True)
def propagate_det(a, Ra, RT, gamma, Le, Pr, us, hbar,
                  tb, lam, dlam, dnb, n_steps, reorth_every):
    """Shoot the 5-column basis bottom to top; return the 5x5 top boundary
    matrix and the log determinant rescaling accumulated by Gram-Schmidt."""
    a2 = a * a
    S = np.zeros((9, 5), dtype=np.complex128)
    _init_basis(S, us, hbar, lam[0], tb[0])
    K1 = np.empty((9, 5), dtype=np.complex128)
    K2 = np.empty_like(K1)
    K3 = np.empty_like(K1)
    K4 = np.empty_like(K1)
    T1 = np.empty_like(K1)
    R = np.empty((5, 5), dtype=np.complex128)
    h = 1.0 / n_steps
    logscale = 0.0
    for i in range(n_steps):
        _rk4_step(S, K1, K2, K3, K4, T1, i, h, a2, gamma, Ra, RT, Le, Pr, us, hbar,
                  tb, lam, dlam, dnb)
        if (i + 1) % reorth_every == 0 and i + 1 < n_steps:
            logscale += _mgs(S, R)
    return _top_matrix(S, us, tb[2 * n_steps]), logscale


@njit(cache=True, nogil=True)
def propagate_traj(a, Ra, RT, gamma, Le, Pr, us, hbar,
                   tb, lam, dlam, dnb, n_steps, reorth_every):
    """Trajectory variant for eigenfunction assembly: stores the basis at
    every node plus the Gram-Schmidt R factors and the node indices where
    they were applied (the stored basis at those nodes is post-orth)."""
    a2 = a * a
    S = np.zeros((9, 5), dtype=np.complex128)
    _init_basis(S, us, hbar, lam[0], tb[0])
    K1 = np.empty((9, 5), dtype=np.complex128)
    K2 = np.empty_like(K1)
    K3 = np.empty_like(K1)
    K4 = np.empty_like(K1)
    T1 = np.empty_like(K1)
    n_blocks = 0
    for i in range(n_steps):
        if (i + 1) % reorth_every == 0 and i + 1 < n_steps:
            n_blocks += 1
    Rfacs = np.zeros((n_blocks, 5, 5), dtype=np.complex128)
    block_at = np.zeros(n_blocks, dtype=np.int64)
    traj = np.zeros((n_steps + 1, 9, 5), dtype=np.complex128)
    traj[0] = S
    h = 1.0 / n_steps
    b = 0
    for i in range(n_steps):
        _rk4_step(S, K1, K2, K3, K4, T1, i, h, a2, gamma, Ra, RT, Le, Pr, us, hbar,
                  tb, lam, dlam, dnb)
        if (i + 1) % reorth_every == 0 and i + 1 < n_steps:
            _mgs(S, Rfacs[b])
            block_at[b] = i + 1
            b += 1
        traj[i + 1] = S
    return traj, Rfacs, block_at, _top_matrix(S, us, tb[2 * n_steps])

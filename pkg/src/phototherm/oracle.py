"""Independent verification path: Chebyshev collocation eigensolver.

Discretizes the same ninth-order system as the shooting path, but as a
dense generalized eigenvalue problem A v = gamma B v over stacked nodal
values of (w, Theta, N). Deliberately shares no numerics with stability;
agreement between the two is the method cross-check.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basic_state import BasicState
from .errors import InvalidParameterError
from .params import Params

NCHEB_DEFAULT = 64
SPURIOUS_CUTOFF = 1e8


def chebyshev_lobatto(N: int):
    """Gauss-Lobatto nodes (descending from +1) and differentiation matrix."""
    if N < 1:
        raise InvalidParameterError("need at least two Chebyshev nodes")
    j = np.arange(N + 1)
    x = np.cos(np.pi * j / N)
    c = np.ones(N + 1)
    c[0] = c[N] = 2.0
    c *= (-1.0) ** j
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


@dataclass(frozen=True)
class CollocationOperator:
    """Dense pencil (A, B) over nodes z (descending, z[0]=1 top, z[-1]=0
    bottom) with boundary rows replacing the outermost collocation rows."""
    A: np.ndarray
    B: np.ndarray
    z: np.ndarray
    a: float
    Ra: float


def build_operator(a: float, Ra: float, p: Params, b: BasicState,
                   Ncheb: int = NCHEB_DEFAULT) -> CollocationOperator:
    if Ncheb < 32:
        raise InvalidParameterError(f"Ncheb must be at least 32, got {Ncheb}")
    x, D = chebyshev_lobatto(Ncheb)
    z = 0.5 * (x + 1.0)
    D1 = 2.0 * D
    D2 = D1 @ D1
    D3 = D2 @ D1
    D4 = D2 @ D2
    n = Ncheb + 1
    I = np.eye(n)
    a2 = a * a

    nb, dnb, lam, dlam, tb = b.profiles_at(z)
    us, hbar, Le, Pr, RT = p.U_s, p.hbar, p.Le, p.Pr, p.R_T

    A = np.zeros((3 * n, 3 * n))
    B = np.zeros((3 * n, 3 * n))
    W, T, NN = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)

    A[W, W] = D4 - 2.0 * a2 * D2 + a2 * a2 * I
    A[W, NN] = -a2 * Ra * D1
    A[W, T] = -a2 * RT * I
    B[W, W] = (D2 - a2 * I) / Pr

    A[T, W] = I
    A[T, T] = D2 - a2 * I
    B[T, T] = I

    A[NN, NN] = D3 - np.diag(us * tb) @ D2 \
        - np.diag(a2 + 2.0 * hbar * us * lam) @ D1 \
        - np.diag(hbar * us * dlam)
    A[NN, W] = Le * np.diag(dnb)
    # gamma multiplies N' on the cell-diffusion clock (no Le factor;
    # see the matching comment in stability.rhs)
    B[NN, NN] = D1.copy()

    # boundary rows (B rows zeroed): top index 0, bottom index n-1
    top, bot = 0, n - 1
    e_top = I[top]
    e_bot = I[bot]

    def clear_row(r):
        A[r, :] = 0.0
        B[r, :] = 0.0

    for r in (top, top + 1, bot - 1, bot):
        clear_row(0 * n + r)
    A[0 * n + top, W] = e_top            # w(1) = 0
    A[0 * n + top + 1, W] = D2[top]      # w''(1) = 0
    A[0 * n + bot - 1, W] = D1[bot]      # w'(0) = 0
    A[0 * n + bot, W] = e_bot            # w(0) = 0

    for r in (top, bot):
        clear_row(1 * n + r)
    A[1 * n + top, T] = e_top            # Theta(1) = 0
    A[1 * n + bot, T] = e_bot            # Theta(0) = 0

    for r in (top, top + 1, bot):
        clear_row(2 * n + r)
    A[2 * n + top, NN] = e_top           # N(1) = 0
    A[2 * n + top + 1, NN] = us * tb[top] * D1[top] - D2[top]
    A[2 * n + bot, NN] = hbar * us * lam[bot] * e_bot \
        + us * tb[bot] * D1[bot] - D2[bot]

    return CollocationOperator(A=A, B=B, z=z, a=a, Ra=Ra)


def build_reduced_operator(a: float, Ra: float, p: Params, b: BasicState,
                           Ncheb: int = NCHEB_DEFAULT) -> CollocationOperator:
    """Thermal-decoupling check variant: with no thermal buoyancy the
    (w, N) subsystem closes on itself, so the eigenvalues of the pencil
    restricted to those blocks nest inside the full spectrum (the full
    operator keeps extra slave temperature modes). Only meaningful (and
    only allowed) at R_T = 0. Use with spectrum(), not eigenvector()
    (which expects three blocks)."""
    if p.R_T != 0.0:
        raise InvalidParameterError("reduced operator requires R_T = 0")
    opr = build_operator(a, Ra, p, b, Ncheb)
    n = len(opr.z)
    keep = np.r_[0:n, 2 * n:3 * n]
    return CollocationOperator(A=opr.A[np.ix_(keep, keep)],
                               B=opr.B[np.ix_(keep, keep)],
                               z=opr.z, a=opr.a, Ra=opr.Ra)


def spectrum(opr: CollocationOperator, k: int = 8) -> np.ndarray:
    """k finite eigenvalues with the largest real part (QZ, spurious
    boundary-row infinities filtered by magnitude)."""
    if k < 1:
        raise InvalidParameterError("k must be at least 1")
    w = scipy.linalg.eig(opr.A, opr.B, right=False)
    w = w[np.isfinite(w)]
    w = w[np.abs(w) < SPURIOUS_CUTOFF]
    return w[np.argsort(-w.real)][:k]


def leading_eigenvalue(a: float, Ra: float, p: Params, b: BasicState,
                       Ncheb: int = NCHEB_DEFAULT) -> complex:
    return complex(spectrum(build_operator(a, Ra, p, b, Ncheb), k=1)[0])


def eigenvector(opr: CollocationOperator, gamma_target: complex):
    """Nodal (w, Theta, N) profiles of the eigenvalue nearest gamma_target.

    Returns (gamma, w, theta, N) with each profile on opr.z.
    """
    w, V = scipy.linalg.eig(opr.A, opr.B, right=True)
    finite = np.isfinite(w) & (np.abs(w) < SPURIOUS_CUTOFF)
    w, V = w[finite], V[:, finite]
    i = int(np.argmin(np.abs(w - gamma_target)))
    n = len(opr.z)
    v = V[:, i]
    return complex(w[i]), v[:n].copy(), v[n:2 * n].copy(), v[2 * n:].copy()

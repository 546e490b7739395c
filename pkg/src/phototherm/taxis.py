"""Phototaxis response function T(G) and the chi <-> G_c mapping.

T(G) = 0.8 sin(3*pi*phi/2) - 0.1 sin(pi*phi/2) with phi = G*exp(chi*(G-1)).
The steepness parameter chi shifts the sign-change intensity G_c: cells
swim upward (toward the light source) for G < G_c and downward above it.
All functions accept scalar or ndarray G.
"""

import warnings

import numpy as np
from scipy.optimize import brentq

from .errors import NoRootError

CHI_RANGE = (-1.1, 1.1)  # maps onto G_c in roughly [0.3, 0.8]


def check_chi(chi: float) -> float:
    if not CHI_RANGE[0] <= chi <= CHI_RANGE[1]:
        warnings.warn(f"chi={chi} outside the calibrated range {CHI_RANGE}",
                      stacklevel=3)
    return chi


def taxis_value(G, chi):
    """T(G) for steepness chi."""
    phi = G * np.exp(chi * (G - 1.0))
    return 0.8 * np.sin(1.5 * np.pi * phi) - 0.1 * np.sin(0.5 * np.pi * phi)


def taxis_derivative(G, chi):
    """dT/dG, analytic (the stability coefficients need it at every node)."""
    phi = G * np.exp(chi * (G - 1.0))
    dphi = np.exp(chi * (G - 1.0)) * (1.0 + chi * G)
    amp = 1.2 * np.pi * np.cos(1.5 * np.pi * phi) - 0.05 * np.pi * np.cos(0.5 * np.pi * phi)
    return amp * dphi


def taxis_second_derivative(G, chi):
    """d2T/dG2, analytic; used for the dLambda/dx3 chain rule."""
    e = np.exp(chi * (G - 1.0))
    phi = G * e
    dphi = e * (1.0 + chi * G)
    ddphi = chi * e * (2.0 + chi * G)
    amp = 1.2 * np.pi * np.cos(1.5 * np.pi * phi) - 0.05 * np.pi * np.cos(0.5 * np.pi * phi)
    damp = -1.8 * np.pi**2 * np.sin(1.5 * np.pi * phi) + 0.025 * np.pi**2 * np.sin(0.5 * np.pi * phi)
    return damp * dphi * dphi + amp * ddphi


def critical_intensity(chi: float) -> float:
    """Smallest G in (0, 1] where T changes sign from + to -.

    Scans at 1e-4 resolution, then bisects the first +/- bracket to 1e-12.
    Raises NoRootError when no sign change exists in (0, 1].
    """
    g = np.linspace(1e-4, 1.0, 10000)
    t = taxis_value(g, chi)
    idx = np.nonzero((t[:-1] > 0.0) & (t[1:] <= 0.0))[0]
    if idx.size == 0:
        raise NoRootError(f"taxis function has no +/- sign change in (0,1] for chi={chi}")
    i = idx[0]
    return brentq(lambda x: taxis_value(x, chi), g[i], g[i + 1], xtol=1e-12)


def chi_from_Gc(G_c: float) -> float:
    """Inverse of critical_intensity over chi in [-1.1, 1.1]."""
    lo, hi = CHI_RANGE
    glo, ghi = critical_intensity(lo), critical_intensity(hi)
    if not glo <= G_c <= ghi:
        raise NoRootError(f"G_c={G_c} outside the attainable range [{glo:.4f}, {ghi:.4f}]")
    return brentq(lambda c: critical_intensity(c) - G_c, lo, hi, xtol=1e-12)

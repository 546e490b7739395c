"""Motionless equilibrium: concentration, absorption, intensity, taxis.

The equilibrium couples tau' = n_b (cumulative absorption measured from
the top) with n_b' = U_s T(G_b) n_b, G_b = I0 exp(hbar*tau). Integration
runs downward from x3=1 with the surface value n_b(1) as the shooting
parameter; tau(0) = -1 enforces unit mean concentration.
"""

from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import taxis
from ._kernels import integrate_basic
from .errors import InvalidParameterError, NoRootError
from .params import Params

P1_BRACKET = (1e-6, 1e3)


class BasicState:
    """Solved equilibrium on a uniform grid with Hermite interpolants.

    Grid arrays: x3, nb, tau, G_b, T_b, temp_b (basic temperature x3 - 1).
    profiles_at supplies the coefficient bundle the stability system needs
    at arbitrary x3, with dLambda/dx3 from the chain rule rather than
    numerical differentiation.
    """

    def __init__(self, p: Params, M: int, tau: np.ndarray, nb: np.ndarray):
        self.params = p
        self.M = M
        self.x3 = np.linspace(0.0, 1.0, M + 1)
        self.tau = tau
        self.nb = nb
        self.G_b = p.I0 * np.exp(p.hbar * tau)
        self.T_b = taxis.taxis_value(self.G_b, p.chi)
        self.temp_b = self.x3 - 1.0
        dnb = p.U_s * self.T_b * nb
        self._nb_spline = CubicHermiteSpline(self.x3, nb, dnb)
        self._tau_spline = CubicHermiteSpline(self.x3, tau, nb)
        self._tables = {}

    def profiles_at(self, x3):
        """(n_b, dn_b/dx3, Lambda, dLambda/dx3, T_b) at x3 (scalar or array).

        Lambda = n_b G_b dT/dG; its derivative uses dn_b = U_s T_b n_b and
        dG_b = hbar n_b G_b.
        """
        x = np.asarray(x3, dtype=float)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise InvalidParameterError("x3 outside [0, 1]")
        p = self.params
        nb = self._nb_spline(x)
        gb = p.I0 * np.exp(p.hbar * self._tau_spline(x))
        tb = taxis.taxis_value(gb, p.chi)
        tp = taxis.taxis_derivative(gb, p.chi)
        tpp = taxis.taxis_second_derivative(gb, p.chi)
        dnb = p.U_s * tb * nb
        dgb = p.hbar * nb * gb
        lam = nb * gb * tp
        dlam = dnb * gb * tp + nb * dgb * tp + nb * gb * tpp * dgb
        return nb, dnb, lam, dlam, tb

    def coefficient_tables(self, n_steps: int):
        """Profile samples on the half-step grid (2*n_steps+1 points) for
        the shooting kernel; cached per step count."""
        tabs = self._tables.get(n_steps)
        if tabs is None:
            x = np.linspace(0.0, 1.0, 2 * n_steps + 1)
            _, dnb, lam, dlam, tb = self.profiles_at(x)
            tabs = (np.ascontiguousarray(tb), np.ascontiguousarray(lam),
                    np.ascontiguousarray(dlam), np.ascontiguousarray(dnb))
            self._tables[n_steps] = tabs
        return tabs


def solve_basic_state(p: Params, M: int = 2000) -> BasicState:
    """Shoot on n_b(1) until tau(0) = -1 (unit mean concentration).

    tau(0) decreases monotonically in the surface value, so the bracket
    [1e-6, 1e3] pins the root; brentq is the bracketed secant refinement.
    """
    if M < 200:
        raise InvalidParameterError(f"M must be at least 200, got {M}")

    def residual(p1: float) -> float:
        tau, _ = integrate_basic(p1, M, p.U_s, p.hbar, p.I0, p.chi)
        return tau[0] + 1.0

    lo, hi = P1_BRACKET
    rlo, rhi = residual(lo), residual(hi)
    if rlo * rhi > 0.0:
        raise NoRootError(f"no surface concentration in [{lo}, {hi}] meets the "
                          f"normalization (residuals {rlo:.3g}, {rhi:.3g})")
    p1 = brentq(residual, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=100)
    tau, nb = integrate_basic(p1, M, p.U_s, p.hbar, p.I0, p.chi)
    return BasicState(p, M, tau, nb)


def sublayer_location(b: BasicState, n_dense: int = 20001) -> Tuple[float, float]:
    """Argmax of n_b and its value; flat profiles report x3* = 1 by convention.

    Interior maxima satisfy G_b(x3*) = G_c automatically (dn_b = 0 forces
    T(G_b) = 0 there)."""
    xs = np.linspace(0.0, 1.0, n_dense)
    vals = b._nb_spline(xs)
    if np.ptp(vals) < 1e-9 * max(1.0, np.max(np.abs(vals))):
        return 1.0, float(vals[-1])
    i = int(np.argmax(vals))
    if 0 < i < n_dense - 1:
        # parabolic refinement through the three bracketing samples
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0.0 else 0.0
        h = xs[1] - xs[0]
        x_star = xs[i] + shift * h
        return float(x_star), float(b._nb_spline(x_star))
    return float(xs[i]), float(vals[i])


def basic_profiles_at(b: BasicState, x3):
    """Module-level alias for the coefficient bundle (see BasicState.profiles_at)."""
    return b.profiles_at(x3)

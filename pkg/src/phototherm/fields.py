"""Eigenmode extraction and physical-space field reconstruction.

The shooting trajectory is recombined through the stored Gram-Schmidt
factors with the null vector of the top boundary matrix, giving the
perturbation profiles on the solver grid; frames, time series, and
phase portraits follow analytically from the normal-mode form.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular, svd

from . import _kernels
from .basic_state import BasicState
from .errors import ConvergenceError, InvalidParameterError, NoRootError
from .params import Params
from .stability import N_STEPS_DEFAULT, REORTH_EVERY_DEFAULT, solve_growth_rate

RANK_DEFICIENCY_TOL = 1e-4


@dataclass
class Eigenmode:
    """Perturbation profiles on the solver grid, normalized so max |w| = 1
    with the phase at the max-magnitude node real positive. The physical
    concentration perturbation is nhat = -N'."""
    x3: np.ndarray
    w: np.ndarray
    wp: np.ndarray
    wpp: np.ndarray
    theta: np.ndarray
    thetap: np.ndarray
    N: np.ndarray
    Np: np.ndarray
    Npp: np.ndarray
    a: float
    Ra: float
    gamma: complex
    sigma_ratio: float  # smallest/largest singular value of the top matrix

    @property
    def nhat(self) -> np.ndarray:
        return -self.Np

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi / self.a

    def profile_at(self, prof: np.ndarray, x3: float) -> complex:
        return complex(np.interp(x3, self.x3, prof.real),
                       np.interp(x3, self.x3, prof.imag))

    def bc_residuals(self, p: Params, b: BasicState) -> dict:
        """Absolute boundary-condition residuals of the normalized mode."""
        _, _, lam0, _, tb0 = (v[0] for v in b.profiles_at(np.array([0.0])))
        _, _, _, _, tb1 = (v[0] for v in b.profiles_at(np.array([1.0])))
        us, hb = p.U_s, p.hbar
        return {
            "w_bottom": abs(self.w[0]),
            "wp_bottom": abs(self.wp[0]),
            "theta_bottom": abs(self.theta[0]),
            "flux_bottom": abs(hb * us * lam0 * self.N[0]
                               + us * tb0 * self.Np[0] - self.Npp[0]),
            "w_top": abs(self.w[-1]),
            "wpp_top": abs(self.wpp[-1]),
            "theta_top": abs(self.theta[-1]),
            "N_top": abs(self.N[-1]),
            "flux_top": abs(us * tb1 * self.Np[-1] - self.Npp[-1]),
        }


def extract_eigenmode(a: float, Ra: float, gamma: complex,
                      p: Params, b: BasicState,
                      n_steps: int = N_STEPS_DEFAULT,
                      reorth_every: int = REORTH_EVERY_DEFAULT) -> Eigenmode:
    """Recombine the five shooting basis columns with the null vector of
    the top boundary matrix. Raises when the matrix is not rank-deficient,
    which means (a, Ra, gamma) is not a converged dispersion point."""
    tb, lam, dlam, dnb = b.coefficient_tables(n_steps)
    traj, Rfacs, block_at, Mtop = _kernels.propagate_traj(
        a, Ra, p.R_T, complex(gamma), p.Le, p.Pr, p.U_s, p.hbar,
        tb, lam, dlam, dnb, n_steps, reorth_every)
    _, sig, Vh = svd(Mtop)
    ratio = float(sig[-1] / sig[0])
    if ratio > RANK_DEFICIENCY_TOL:
        raise ConvergenceError(
            f"top boundary matrix is not rank-deficient "
            f"(sigma_min/sigma_max = {ratio:.3e}); point not converged")
    c = Vh[-1].conj()

    # walk the Gram-Schmidt factors backward: with S_old = S_new @ R and a
    # continuous solution, the pre-block coefficients solve R c_pre = c_post
    n_blocks = Rfacs.shape[0]
    coeffs = [None] * (n_blocks + 1)
    coeffs[n_blocks] = c
    for k in range(n_blocks - 1, -1, -1):
        coeffs[k] = solve_triangular(Rfacs[k], coeffs[k + 1], lower=False)

    bounds = [0] + [int(m) for m in block_at] + [n_steps + 1]
    profile = np.empty((n_steps + 1, 9), dtype=np.complex128)
    for k in range(n_blocks + 1):
        s, e = bounds[k], bounds[k + 1]
        profile[s:e] = traj[s:e] @ coeffs[k]

    w = profile[:, 0]
    i_max = int(np.argmax(np.abs(w)))
    if abs(w[i_max]) == 0.0:
        raise ConvergenceError("trivial eigenmode (w identically zero)")
    profile = profile / w[i_max]

    return Eigenmode(x3=np.linspace(0.0, 1.0, n_steps + 1),
                     w=profile[:, 0], wp=profile[:, 1], wpp=profile[:, 2],
                     theta=profile[:, 4], thetap=profile[:, 5],
                     N=profile[:, 6], Np=profile[:, 7], Npp=profile[:, 8],
                     a=float(a), Ra=float(Ra), gamma=complex(gamma),
                     sigma_ratio=ratio)


@dataclass
class FieldFrame:
    """Real perturbation fields on one horizontal wavelength at time t."""
    x1: np.ndarray
    x3: np.ndarray
    t: float
    wavelength: float
    psi: np.ndarray  # streamfunction, (nz, nx), d(psi)/d(x1) = w
    w: np.ndarray
    n: np.ndarray
    T: np.ndarray


def _resample(x3_src: np.ndarray, prof: np.ndarray, x3_new: np.ndarray) -> np.ndarray:
    return (np.interp(x3_new, x3_src, prof.real)
            + 1j * np.interp(x3_new, x3_src, prof.imag))


def render_frame(m: Eigenmode, t: float = 0.0,
                 nx: int = 128, nz: int = 129) -> FieldFrame:
    """Evaluate w*, n*, T', and the streamfunction on a uniform grid over
    one wavelength. For a neutral mode (Re gamma exactly zero) time enters
    modulo the period, so frames one period apart are reproduced exactly."""
    if nx < 16 or nz < 16:
        raise InvalidParameterError("frame grid must be at least 16 x 16")
    lam = m.wavelength
    x1 = np.linspace(0.0, lam, nx, endpoint=False)
    x3 = np.linspace(0.0, 1.0, nz)

    t_eff = t
    if m.gamma.real == 0.0 and m.gamma.imag != 0.0:
        t_eff = math.fmod(t, 2.0 * np.pi / abs(m.gamma.imag))

    w_z = _resample(m.x3, m.w, x3)
    n_z = _resample(m.x3, m.nhat, x3)
    T_z = _resample(m.x3, m.theta, x3)
    phase = np.exp(1j * m.a * x1 + m.gamma * t_eff)

    return FieldFrame(
        x1=x1, x3=x3, t=t, wavelength=lam,
        psi=np.real(np.outer(w_z / (1j * m.a), phase)),
        w=np.real(np.outer(w_z, phase)),
        n=np.real(np.outer(n_z, phase)),
        T=np.real(np.outer(T_z, phase)))


@dataclass
class GrowthScan:
    """Fastest-growing mode over a wavenumber window at fixed Ra. When
    every sampled growth rate has negative real part the suspension is
    stable at this Ra and `stable` is set."""
    a_star: float
    gamma_star: complex
    stable: bool
    a_samples: np.ndarray
    growth: np.ndarray  # complex leading gamma per sample (nan where no root)
    refined: bool


def most_unstable_wavenumber(Ra: float, p: Params, b: BasicState,
                             a_range: Tuple[float, float] = (0.1, 10.0),
                             n_scan: int = 25,
                             n_steps: int = N_STEPS_DEFAULT,
                             reorth_every: int = REORTH_EVERY_DEFAULT,
                             ncheb: int = 48) -> GrowthScan:
    """Coarse log scan of the leading growth rate, then golden-section
    maximization of Re gamma around the best interior sample."""
    grid = np.geomspace(a_range[0], a_range[1], n_scan)
    growth = np.full(n_scan, np.nan + 0j, dtype=np.complex128)
    for i, a in enumerate(grid):
        try:
            growth[i] = solve_growth_rate(float(a), Ra, p, b,
                                          n_steps=n_steps,
                                          reorth_every=reorth_every,
                                          ncheb=ncheb)
        except (NoRootError, ConvergenceError):
            pass
    valid = np.isfinite(growth.real)
    if not valid.any():
        raise NoRootError("growth-rate solve failed over the whole window")
    i_best = int(np.nanargmax(np.where(valid, growth.real, -np.inf)))
    a_star, g_star = float(grid[i_best]), complex(growth[i_best])

    refined = False
    if 0 < i_best < n_scan - 1 and valid[i_best - 1] and valid[i_best + 1]:
        a_star, g_star = _golden_growth(grid[i_best - 1], grid[i_best + 1],
                                        a_star, g_star, Ra, p, b,
                                        n_steps, reorth_every, ncheb)
        refined = True

    return GrowthScan(a_star=a_star, gamma_star=g_star,
                      stable=bool(g_star.real < 0.0),
                      a_samples=grid, growth=growth, refined=refined)


def _golden_growth(lo, hi, a0, g0, Ra, p, b, n_steps, reorth_every, ncheb):
    best = [float(a0), complex(g0)]

    def f(loga):
        a = float(np.exp(loga))
        try:
            g = solve_growth_rate(a, Ra, p, b, n_steps=n_steps,
                                  reorth_every=reorth_every, ncheb=ncheb)
        except (NoRootError, ConvergenceError):
            return np.inf
        if g.real > best[1].real:
            best[0], best[1] = a, g
        return -g.real

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1, x4 = np.log(lo), np.log(hi)
    x2 = x4 - invphi * (x4 - x1)
    x3 = x1 + invphi * (x4 - x1)
    f2, f3 = f(x2), f(x3)
    for _ in range(20):
        if x4 - x1 < 5e-3:
            break
        if f2 < f3:
            x4, x3, f3 = x3, x2, f2
            x2 = x4 - invphi * (x4 - x1)
            f2 = f(x2)
        else:
            x1, x2, f2 = x2, x3, f3
            x3 = x1 + invphi * (x4 - x1)
            f3 = f(x3)
    return best[0], best[1]


@dataclass
class TimeSeries:
    """Probe temperature perturbation and its exact time derivative; the
    (T', dT'/dt) pairs trace the phase portrait."""
    t: np.ndarray
    Tp: np.ndarray
    dTp: np.ndarray
    probe: Tuple[float, float]


def time_series(m: Eigenmode, t_grid: np.ndarray,
                probe: Optional[Tuple[float, float]] = None) -> TimeSeries:
    """T'(t) = Re[Theta(x3) e^{i a x1 + gamma t}] at the probe, with the
    analytic derivative Re[gamma Theta e^{...}]. Default probe sits at
    quarter wavelength, mid depth."""
    if probe is None:
        probe = (m.wavelength / 4.0, 0.5)
    x1, x3 = probe
    if not 0.0 <= x3 <= 1.0:
        raise InvalidParameterError(f"probe depth {x3} outside [0, 1]")
    th = m.profile_at(m.theta, x3)
    t = np.asarray(t_grid, dtype=float)
    z = th * np.exp(1j * m.a * x1 + m.gamma * t)
    return TimeSeries(t=t, Tp=z.real, dTp=(m.gamma * z).real, probe=probe)


def conjugate_mode(m: Eigenmode) -> Eigenmode:
    """Partner mode of the Hopf pair (gamma -> conj gamma); its frames are
    x1-mirror images of the original's."""
    return Eigenmode(x3=m.x3.copy(),
                     w=m.w.conj(), wp=m.wp.conj(), wpp=m.wpp.conj(),
                     theta=m.theta.conj(), thetap=m.thetap.conj(),
                     N=m.N.conj(), Np=m.Np.conj(), Npp=m.Npp.conj(),
                     a=m.a, Ra=m.Ra, gamma=m.gamma.conjugate(),
                     sigma_ratio=m.sigma_ratio)

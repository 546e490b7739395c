"""Dispersion relation for the ninth-order perturbation system.

A mode (w, Theta, N) at horizontal wavenumber a grows like exp(gamma*t);
nontrivial solutions of the two-point boundary value problem exist only
where the 5x5 top boundary matrix of the shooting sweep is singular. The
solvers here locate those zeros in Ra (stationary, gamma=0), in (Ra,
omega) (oscillatory, gamma=i*omega), or in complex gamma at fixed Ra.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ._kernels import propagate_det
from .basic_state import BasicState
from .errors import ConvergenceError, InvalidParameterError, NoRootError
from .params import Params

N_STEPS_DEFAULT = 2000
REORTH_EVERY_DEFAULT = 50
RA_MAX = 1e6


@dataclass(frozen=True)
class ModeProblem:
    """One evaluation point of the dispersion relation."""
    a: float
    p: Params
    b: BasicState
    gamma: complex = 0.0 + 0.0j
    Ra: float = 0.0
    n_steps: int = N_STEPS_DEFAULT
    reorth_every: int = REORTH_EVERY_DEFAULT


@dataclass(frozen=True)
class DispersionValue:
    """Determinant mantissa, its log rescaling, and the conditioning of the
    top boundary matrix. The true determinant is det * exp(log_scale); only
    the mantissa matters for root finding (the scale is positive real)."""
    det: complex
    log_scale: float
    cond: float


def rhs(mp: ModeProblem, x3: float, s: Sequence[complex]) -> np.ndarray:
    """First-order form of the perturbation system at one point.

    State order (w, w', w'', w''', Theta, Theta', N, N', N''). This is the
    reference implementation the compiled kernel is tested against.
    """
    nb, dnb, lam, dlam, tb = mp.b.profiles_at(x3)
    a2 = mp.a * mp.a
    g = mp.gamma
    p = mp.p
    s = np.asarray(s, dtype=complex)
    ds = np.empty(9, dtype=complex)
    ds[0] = s[1]
    ds[1] = s[2]
    ds[2] = s[3]
    ds[3] = (2.0 * a2 + g / p.Pr) * s[2] - a2 * (a2 + g / p.Pr) * s[0] \
        + a2 * mp.Ra * s[7] + a2 * p.R_T * s[4]
    ds[4] = s[5]
    ds[5] = (g + a2) * s[4] - s[0]
    ds[6] = s[7]
    ds[7] = s[8]
    # cell equation; the growth term rides on the cell-diffusion clock
    # (plain gamma -- a Le factor here moves every oscillatory fixture)
    ds[8] = p.U_s * tb * s[8] + (g + a2 + 2.0 * p.hbar * p.U_s * lam) * s[7] \
        + p.hbar * p.U_s * dlam * s[6] - p.Le * dnb * s[0]
    return ds


def boundary_determinant(mp: ModeProblem) -> DispersionValue:
    """Shoot the five bottom-admissible basis vectors to the top and return
    the determinant of the top boundary conditions applied to them."""
    tb, lam, dlam, dnb = mp.b.coefficient_tables(mp.n_steps)
    M, log_scale = propagate_det(
        mp.a, mp.Ra, mp.p.R_T, complex(mp.gamma), mp.p.Le, mp.p.Pr,
        mp.p.U_s, mp.p.hbar, tb, lam, dlam, dnb, mp.n_steps, mp.reorth_every)
    if not np.all(np.isfinite(M)):
        raise ConvergenceError("shooting overflow: tighten re-orthonormalization")
    det = complex(np.linalg.det(M))
    cond = float(np.linalg.cond(M))
    return DispersionValue(det=det, log_scale=log_scale, cond=cond)


def _det_at(a, p, b, Ra, gamma, n_steps, reorth_every) -> complex:
    return boundary_determinant(ModeProblem(
        a=a, p=p, b=b, gamma=gamma, Ra=Ra,
        n_steps=n_steps, reorth_every=reorth_every)).det


def solve_stationary_Ra(a: float, p: Params, b: BasicState,
                        Ra_guess: Optional[float] = None,
                        n_steps: int = N_STEPS_DEFAULT,
                        reorth_every: int = REORTH_EVERY_DEFAULT,
                        rtol: float = 1e-10,
                        verify_below: bool = False) -> float:
    """Smallest positive Ra with a stationary (gamma=0) nontrivial mode.

    Warm starts expand a geometric bracket around the guess; cold starts
    scan upward from Ra=0.5 so the first sign change is the smallest root.
    With verify_below the warm result is re-checked by a scan under the
    bracket: real root pairs are born as a complex pair collides, and a
    warm march entering from wavenumbers where only a high root family
    exists would otherwise stay on it after lower roots appear.
    """
    from scipy.optimize import brentq

    def f(Ra: float) -> float:
        return _det_at(a, p, b, Ra, 0.0j, n_steps, reorth_every).real

    def first_change(grid):
        v0 = f(grid[0])
        for x0, x1 in zip(grid[:-1], grid[1:]):
            v1 = f(x1)
            if v0 * v1 <= 0.0:
                return x0, x1, v0
            v0 = v1
        return None

    lo = hi = None
    if Ra_guess is not None and Ra_guess > 0.0:
        glo, ghi = Ra_guess / 1.25, Ra_guess * 1.25
        flo, fhi = f(glo), f(ghi)
        for _ in range(40):
            if flo * fhi <= 0.0:
                lo, hi, val_lo = glo, ghi, flo
                break
            glo /= 1.25
            ghi *= 1.25
            if ghi > RA_MAX or glo < 1e-4:
                break
            flo, fhi = f(glo), f(ghi)
        if lo is not None and verify_below and lo / 1.2 > 0.75:
            n = max(2, int(np.ceil(np.log((lo / 1.2) / 0.5) / np.log(1.15))))
            found = first_change(np.geomspace(0.5, lo / 1.2, n))
            if found is not None:
                lo, hi, val_lo = found
    if lo is None:
        found = first_change(np.geomspace(0.5, RA_MAX, 130))
        if found is None:
            raise NoRootError(f"no stationary neutral Ra in (0, {RA_MAX:g}] at a={a:g}")
        lo, hi, val_lo = found
    if val_lo == 0.0:
        return float(lo)
    return float(brentq(f, lo, hi, rtol=rtol, maxiter=200))


def solve_reduced_stationary_Ra(a: float, p: Params, b: BasicState,
                                bracket: Tuple[float, float],
                                n_steps: int = N_STEPS_DEFAULT,
                                reorth_every: int = REORTH_EVERY_DEFAULT,
                                rtol: float = 1e-12) -> float:
    """Stationary neutral Ra of the thermally uncoupled subsystem.

    With R_T = 0 the temperature perturbation is a slave field: w forces it
    and nothing feeds back, so neutrality is decided by the 7-state
    (w, N) subsystem alone. This propagates that subsystem directly and
    roots its own 4x4 boundary determinant; solve_stationary_Ra on the
    full 9-state system must agree to high precision. Plain-numpy RK4 is
    fine here, the function runs only in validation paths.
    """
    from scipy.optimize import brentq

    if p.R_T != 0.0:
        raise InvalidParameterError(
            "the reduced subsystem only exists at R_T = 0")
    tb, lam, dlam, dnb = b.coefficient_tables(n_steps)
    a2 = a * a
    h = 1.0 / n_steps
    us, hb, le = p.U_s, p.hbar, p.Le

    def deriv(k: int, s: np.ndarray, Ra: float) -> np.ndarray:
        # half-step sample index k; state rows (w, w', w'', w''', N, N', N'')
        d = np.empty_like(s)
        d[0] = s[1]
        d[1] = s[2]
        d[2] = s[3]
        d[3] = 2.0 * a2 * s[2] - a2 * a2 * s[0] + a2 * Ra * s[5]
        d[4] = s[5]
        d[5] = s[6]
        d[6] = (us * tb[k] * s[6] + (a2 + 2.0 * hb * us * lam[k]) * s[5]
                + hb * us * dlam[k] * s[4] - le * dnb[k] * s[0])
        return d

    def det(Ra: float) -> float:
        S = np.zeros((7, 4))
        S[2, 0] = 1.0
        S[3, 1] = 1.0
        S[4, 2] = 1.0
        S[6, 2] = hb * us * lam[0]
        S[5, 3] = 1.0
        S[6, 3] = us * tb[0]
        for i in range(n_steps):
            k = 2 * i
            k1 = deriv(k, S, Ra)
            k2 = deriv(k + 1, S + 0.5 * h * k1, Ra)
            k3 = deriv(k + 1, S + 0.5 * h * k2, Ra)
            k4 = deriv(k + 2, S + h * k3, Ra)
            S = S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if (i + 1) % reorth_every == 0 and i + 1 < n_steps:
                S, _ = np.linalg.qr(S)
        top = np.array([S[0], S[2], S[4], us * tb[-1] * S[5] - S[6]])
        return float(np.linalg.det(top))

    lo, hi = bracket
    flo, fhi = det(lo), det(hi)
    if flo * fhi > 0.0:
        raise NoRootError(
            f"reduced system has no sign change in [{lo:g}, {hi:g}] at a={a:g}")
    return float(brentq(det, lo, hi, rtol=rtol, maxiter=200))


@dataclass(frozen=True)
class OscillatoryRoot:
    Ra: float
    omega: float
    iterations: int


@dataclass(frozen=True)
class MergedOutcome:
    """The Newton iteration collapsed onto the stationary branch (omega -> 0)."""
    a: float
    Ra: float


def solve_oscillatory(a: float, p: Params, b: BasicState,
                      Ra_guess: float, omega_guess: float,
                      n_steps: int = N_STEPS_DEFAULT,
                      reorth_every: int = REORTH_EVERY_DEFAULT,
                      max_iter: int = 50):
    """2-D Newton on (Re det, Im det) = 0 over (Ra, omega) with gamma=i*omega.

    Returns OscillatoryRoot, or MergedOutcome when omega collapses to zero
    (the branch has terminated onto the stationary one).
    """
    if omega_guess <= 0.0:
        raise NoRootError("omega_guess must be positive")
    Ra, om = float(Ra_guess), float(omega_guess)
    omega_floor = 1e-4 * max(1.0, omega_guess)

    def F(Ra_, om_):
        d = _det_at(a, p, b, Ra_, 1j * om_, n_steps, reorth_every)
        return np.array([d.real, d.imag])

    f0 = F(Ra, om)
    scale0 = max(np.linalg.norm(f0), 1e-300)
    for it in range(1, max_iter + 1):
        fv = F(Ra, om)
        dRa = 1e-6 * max(abs(Ra), 1.0)
        dom = 1e-6 * max(abs(om), 1.0)
        J = np.empty((2, 2))
        J[:, 0] = (F(Ra + dRa, om) - fv) / dRa
        J[:, 1] = (F(Ra, om + dom) - fv) / dom
        try:
            step = np.linalg.solve(J, -fv)
        except np.linalg.LinAlgError:
            raise ConvergenceError(f"singular Jacobian at a={a:g}, Ra={Ra:g}")
        # damp to keep the iterate inside the physical quadrant
        step[0] = np.clip(step[0], -0.4 * abs(Ra), 0.4 * abs(Ra))
        step[1] = np.clip(step[1], -0.6 * max(abs(om), omega_floor),
                          0.6 * max(abs(om), omega_floor))
        Ra += step[0]
        om += step[1]
        if abs(om) < omega_floor:
            return MergedOutcome(a=a, Ra=Ra)
        rel_step = max(abs(step[0]) / max(abs(Ra), 1.0), abs(step[1]) / max(abs(om), 1.0))
        if np.linalg.norm(F(Ra, om)) < 1e-8 * scale0 and rel_step < 1e-8:
            return OscillatoryRoot(Ra=float(Ra), omega=float(abs(om)), iterations=it)
    raise ConvergenceError(f"oscillatory solve stalled at a={a:g} "
                           f"(Ra={Ra:g}, omega={om:g} after {max_iter} iterations)")


def solve_growth_rate(a: float, Ra: float, p: Params, b: BasicState,
                      gamma_seeds: Optional[Sequence[complex]] = None,
                      n_steps: int = N_STEPS_DEFAULT,
                      reorth_every: int = REORTH_EVERY_DEFAULT,
                      max_iter: int = 50, ncheb: int = 64) -> complex:
    """Leading zero of det(gamma) at fixed (a, Ra) by complex Newton.

    Seeds default to the collocation spectrum (ncheb nodes). Roots closer
    than 1e-6 are treated as one; the root with the largest real part is
    returned.
    """
    if gamma_seeds is None:
        from .oracle import build_operator, spectrum
        gamma_seeds = spectrum(build_operator(a, Ra, p, b, Ncheb=ncheb), k=6)

    def m(g: complex) -> complex:
        return _det_at(a, p, b, Ra, g, n_steps, reorth_every)

    roots = []
    for seed in gamma_seeds:
        g = complex(seed)
        ok = False
        for _ in range(max_iter):
            h = 1e-6 * (1.0 + abs(g))
            md = (m(g + h) - m(g - h)) / (2.0 * h)
            if md == 0.0:
                break
            step = -m(g) / md
            cap = 0.5 * (1.0 + abs(g))
            if abs(step) > cap:
                step *= cap / abs(step)
            g += step
            if abs(step) < 1e-10 * (1.0 + abs(g)):
                ok = True
                break
        if ok and np.isfinite(g):
            if not any(abs(g - r) < 1e-6 for r in roots):
                roots.append(g)
    if not roots:
        raise NoRootError(f"no growth-rate root converged at a={a:g}, Ra={Ra:g}")
    return max(roots, key=lambda z: z.real)

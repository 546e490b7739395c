"""Neutral-curve tracing, Hopf seeding, critical points, parameter sweeps.

A stationary branch is marched in a with warm-started Brent solves; an
oscillatory branch is seeded by scanning the collocation spectrum along
the stationary branch for complex pairs that are already unstable there,
then continued in a until its frequency collapses onto the stationary
branch (the recorded merge wavenumber a_m) or the window ends.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from . import oracle
from .basic_state import BasicState
from .errors import ConvergenceError, NoRootError, PhototermError
from .params import Params
from .stability import (MergedOutcome, N_STEPS_DEFAULT, OscillatoryRoot,
                        REORTH_EVERY_DEFAULT, solve_oscillatory,
                        solve_stationary_Ra)

log = logging.getLogger(__name__)

A_RANGE_DEFAULT = (0.1, 10.0)
N_PTS_DEFAULT = 60
SEED_NCHEB = 48


@dataclass
class NeutralBranch:
    """Sampled neutral curve of one kind, sorted by a. Missing samples are
    wavenumbers where no root exists (legal: pure thermoconvection heated
    from above has none)."""
    kind: str  # "stationary" | "oscillatory"
    a: np.ndarray
    Ra: np.ndarray
    omega: np.ndarray
    merge_a: Optional[float] = None
    missing: List[float] = field(default_factory=list)
    diagnostics: Optional[str] = None

    def __len__(self):
        return len(self.a)

    @property
    def empty(self) -> bool:
        return len(self.a) == 0


@dataclass(frozen=True)
class HopfSeed:
    a: float
    Ra: float
    omega: float


@dataclass(frozen=True)
class CriticalPoint:
    a_c: float
    Ra_c: float
    omega_c: float
    kind: str
    period: Optional[float]
    interior: bool  # False when the minimum sits on the sweep-window edge


@dataclass
class StabilityAnalysis:
    stationary: NeutralBranch
    oscillatory: List[NeutralBranch]
    seeds: List[HopfSeed]
    critical: CriticalPoint

    @property
    def branches(self) -> List[NeutralBranch]:
        return [self.stationary] + self.oscillatory


def _log_grid(a_lo: float, a_hi: float, n_pts: int) -> np.ndarray:
    if not 0.0 < a_lo < a_hi:
        raise NoRootError(f"bad wavenumber window [{a_lo}, {a_hi}]")
    return np.geomspace(a_lo, a_hi, n_pts)


def trace_stationary(a_lo: float, a_hi: float, n_pts: int,
                     p: Params, b: BasicState,
                     n_steps: int = N_STEPS_DEFAULT,
                     reorth_every: int = REORTH_EVERY_DEFAULT) -> NeutralBranch:
    """March the gamma=0 root over a log-uniform wavenumber grid, warm
    starting each solve from the previous root."""
    grid = _log_grid(a_lo, a_hi, n_pts)
    a_out, ra_out, missing = [], [], []
    guess = None
    for a in grid:
        try:
            ra = solve_stationary_Ra(a, p, b, Ra_guess=guess,
                                     n_steps=n_steps, reorth_every=reorth_every,
                                     verify_below=True)
            a_out.append(a)
            ra_out.append(ra)
            guess = ra
        except (NoRootError, ConvergenceError) as e:
            log.debug("stationary gap at a=%g: %s", a, e)
            missing.append(float(a))
            guess = None
    return NeutralBranch(kind="stationary", a=np.array(a_out),
                         Ra=np.array(ra_out), omega=np.zeros(len(a_out)),
                         missing=missing)


RA_LADDER = (1.0, 0.78, 0.6, 0.47, 0.36, 0.28, 0.22, 0.17, 0.13, 0.1)


def find_hopf_seeds(p: Params, b: BasicState, branch: NeutralBranch,
                    ncheb: int = SEED_NCHEB, stride: int = 2) -> List[HopfSeed]:
    """Scan the collocation spectrum on a descending Ra ladder under each
    sampled stationary threshold; a complex pair that turns unstable along
    the ladder brackets an oscillatory crossing. The ladder is needed
    because near the merge the pair collides onto the real axis before the
    stationary threshold is reached, so a scan at the threshold alone
    misses the branch."""
    seeds = []
    for i in range(0, len(branch), stride):
        a, ra_s = float(branch.a[i]), float(branch.Ra[i])
        try:
            seed = _pair_crossing(a, ra_s, p, b, ncheb)
        except PhototermError as e:
            log.debug("seed scan failed at a=%g: %s", a, e)
            continue
        if seed is not None:
            seeds.append(seed)
    return seeds


def _complex_pair_re(a, Ra, p, b, ncheb) -> Tuple[float, float]:
    """(max Re over complex eigenvalues, its |Im|); (-inf, 0) when the
    leading part of the spectrum holds no complex pair."""
    eigs = oracle.spectrum(oracle.build_operator(a, Ra, p, b, ncheb), k=12)
    cplx = eigs[np.abs(eigs.imag) > 1e-3]
    if cplx.size == 0:
        return -np.inf, 0.0
    j = int(np.argmax(cplx.real))
    return float(cplx[j].real), float(abs(cplx[j].imag))


def _pair_crossing(a, ra_s, p, b, ncheb) -> Optional[HopfSeed]:
    # The envelope is not monotone: a deeper stable pair can lead the
    # spectrum at the threshold while the relevant pair goes unstable only
    # part way down, so the whole ladder is walked and the bracket is the
    # last unstable Ra over the first stable Ra found below it.
    hi = None
    lo = None
    for frac in RA_LADDER:
        ra = frac * ra_s
        re, _ = _complex_pair_re(a, ra, p, b, ncheb)
        if np.isfinite(re) and re > 1e-3:
            hi = ra
        elif np.isfinite(re) and re < -1e-3 and hi is not None:
            lo = ra
            break
    if hi is not None and lo is None:
        ra, frac = hi, RA_LADDER[-1]
        while frac > 5e-3:  # branch crosses below the ladder: extend down
            frac *= 0.6
            ra = frac * ra_s
            re, _ = _complex_pair_re(a, ra, p, b, ncheb)
            if np.isfinite(re) and re < -1e-3:
                lo = ra
                break
            if np.isfinite(re) and re > 1e-3:
                hi = ra
    if hi is None or lo is None:
        return None
    ra_x = brentq(lambda r: _complex_pair_re(a, r, p, b, ncheb)[0],
                  lo, hi, rtol=1e-4)
    _, om_x = _complex_pair_re(a, ra_x, p, b, ncheb)
    if om_x <= 0.0:
        return None
    return HopfSeed(a=a, Ra=float(ra_x), omega=om_x)


def trace_oscillatory(a_lo: float, a_hi: float, n_pts: int,
                      p: Params, b: BasicState, seed: HopfSeed,
                      n_steps: int = N_STEPS_DEFAULT,
                      reorth_every: int = REORTH_EVERY_DEFAULT) -> NeutralBranch:
    """Continue the oscillatory root in a from the seed, both directions.

    Marching uses secant extrapolation of (Ra, omega) in log a with step
    halving near trouble; the branch terminates where omega collapses
    (merge onto the stationary branch, a_m recorded by extrapolating
    omega^2 -> 0) or at the window edge.
    """
    grid = _log_grid(a_lo, a_hi, n_pts)
    i0 = int(np.argmin(np.abs(np.log(grid) - np.log(seed.a))))
    first = None
    note = ""
    for i_try in (i0, max(i0 - 1, 0), min(i0 + 1, len(grid) - 1)):
        try:
            out = solve_oscillatory(grid[i_try], p, b, seed.Ra, seed.omega,
                                    n_steps=n_steps, reorth_every=reorth_every)
        except PhototermError as e:
            note = f"seed solve failed: {e}"
            continue
        if isinstance(out, MergedOutcome):
            note = "seed point already merged"
            continue
        first, i0 = out, i_try
        break
    if first is None:
        return NeutralBranch(kind="oscillatory", a=np.empty(0), Ra=np.empty(0),
                             omega=np.empty(0), diagnostics=note)

    samples = {i0: (float(grid[i0]), first.Ra, first.omega)}
    merge_a = None
    notes = []

    def march(indices):
        nonlocal merge_a
        prev2 = None
        prev = samples[i0]
        for i in indices:
            a = float(grid[i])
            ra_g, om_g = _extrapolate(prev2, prev, a)
            out = _osc_solve_with_retry(a, p, b, ra_g, om_g, prev,
                                        n_steps, reorth_every)
            if isinstance(out, MergedOutcome):
                merge_a = _refine_merge(p, b, prev2, prev, a,
                                        n_steps, reorth_every)
                return
            if out is None:
                notes.append(f"continuation stall at a={a:g}")
                return
            samples[i] = (a, out.Ra, out.omega)
            prev2, prev = prev, samples[i]

    march(range(i0 + 1, len(grid)))          # upward: merges live here
    prev_saved = samples[i0]
    march(range(i0 - 1, -1, -1))              # downward
    samples[i0] = prev_saved

    order = sorted(samples)
    a_arr = np.array([samples[i][0] for i in order])
    ra_arr = np.array([samples[i][1] for i in order])
    om_arr = np.array([samples[i][2] for i in order])
    return NeutralBranch(kind="oscillatory", a=a_arr, Ra=ra_arr, omega=om_arr,
                         merge_a=merge_a,
                         diagnostics="; ".join(notes) or None)


def _extrapolate(prev2, prev, a):
    if prev2 is None:
        return prev[1], prev[2]
    a1, r1, o1 = prev2
    a2, r2, o2 = prev
    t = (np.log(a) - np.log(a2)) / (np.log(a2) - np.log(a1))
    return r2 + t * (r2 - r1), max(o2 + t * (o2 - o1), 1e-3)


def _osc_solve_with_retry(a, p, b, ra_g, om_g, prev, n_steps, reorth_every):
    try:
        return solve_oscillatory(a, p, b, ra_g, om_g,
                                 n_steps=n_steps, reorth_every=reorth_every)
    except PhototermError:
        pass
    try:  # retry from the unextrapolated previous point
        return solve_oscillatory(a, p, b, prev[1], prev[2],
                                 n_steps=n_steps, reorth_every=reorth_every)
    except PhototermError:
        return None


def _refine_merge(p, b, prev2, prev, a_failed, n_steps, reorth_every):
    """Bisect between the last good sample and the merged one, then send
    omega^2 -> 0 linearly for the merge wavenumber."""
    good = [prev2, prev] if prev2 is not None else [prev]
    lo_a, lo = prev[0], prev
    hi_a = a_failed
    for _ in range(6):
        mid = np.sqrt(lo_a * hi_a)
        out = _osc_solve_with_retry(mid, p, b, lo[1], lo[2], lo, n_steps, reorth_every)
        if out is None or isinstance(out, MergedOutcome):
            hi_a = mid
        else:
            lo_a, lo = mid, (mid, out.Ra, out.omega)
            good.append(lo)
    if len(good) >= 2:
        (a1, _, o1), (a2, _, o2) = good[-2], good[-1]
        if o1 * o1 > o2 * o2:
            a_m = a2 + (a2 - a1) * o2 * o2 / (o1 * o1 - o2 * o2)
            return float(np.clip(a_m, a2, hi_a))
    return float(0.5 * (lo_a + hi_a))


def critical_point(branches: List[NeutralBranch], p: Params, b: BasicState,
                   n_steps: int = N_STEPS_DEFAULT,
                   reorth_every: int = REORTH_EVERY_DEFAULT) -> CriticalPoint:
    """Global Ra minimum over all branch samples, golden-refined in a with
    full re-solves on the owning branch."""
    best = None
    for br in branches:
        if br.empty:
            continue
        i = int(np.argmin(br.Ra))
        if best is None or br.Ra[i] < best[2]:
            best = (br, i, float(br.Ra[i]))
    if best is None:
        raise NoRootError("all branches empty")
    br, i, _ = best
    interior = 0 < i < len(br) - 1
    if not interior:
        om = float(br.omega[i])
        return CriticalPoint(a_c=float(br.a[i]), Ra_c=float(br.Ra[i]),
                             omega_c=om, kind=br.kind,
                             period=(2.0 * np.pi / om) if om > 0 else None,
                             interior=False)

    lo, hi = float(br.a[i - 1]), float(br.a[i + 1])
    state = {"ra": float(br.Ra[i]), "om": float(br.omega[i]),
             "best": (float(br.a[i]), float(br.Ra[i]), float(br.omega[i]))}

    def ra_of(loga: float) -> float:
        a = float(np.exp(loga))
        if br.kind == "stationary":
            ra = solve_stationary_Ra(a, p, b, Ra_guess=state["ra"],
                                     n_steps=n_steps, reorth_every=reorth_every)
            om = 0.0
        else:
            out = solve_oscillatory(a, p, b, state["ra"], max(state["om"], 1e-3),
                                    n_steps=n_steps, reorth_every=reorth_every)
            if isinstance(out, MergedOutcome):
                return np.inf
            ra, om = out.Ra, out.omega
        state["ra"], state["om"] = ra, om
        if ra < state["best"][1]:
            state["best"] = (a, ra, om)
        return ra

    # golden-section on log a
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1, x4 = np.log(lo), np.log(hi)
    x2 = x4 - invphi * (x4 - x1)
    x3 = x1 + invphi * (x4 - x1)
    try:
        f2, f3 = ra_of(x2), ra_of(x3)
        for _ in range(40):
            if x4 - x1 < 3e-4:
                break
            if f2 < f3:
                x4, x3, f3 = x3, x2, f2
                x2 = x4 - invphi * (x4 - x1)
                f2 = ra_of(x2)
            else:
                x1, x2, f2 = x2, x3, f3
                x3 = x1 + invphi * (x4 - x1)
                f3 = ra_of(x3)
    except PhototermError as e:
        log.debug("critical refinement stopped early: %s", e)
    a_c, ra_c, om_c = state["best"]
    return CriticalPoint(a_c=a_c, Ra_c=ra_c, omega_c=om_c, kind=br.kind,
                         period=(2.0 * np.pi / om_c) if om_c > 0 else None,
                         interior=True)


def analyze(p: Params, b: BasicState,
            a_lo: float = A_RANGE_DEFAULT[0], a_hi: float = A_RANGE_DEFAULT[1],
            n_pts: int = N_PTS_DEFAULT,
            n_steps: int = N_STEPS_DEFAULT,
            reorth_every: int = REORTH_EVERY_DEFAULT,
            seed_stride: int = 2) -> StabilityAnalysis:
    """Full pipeline: stationary trace, Hopf seeding, oscillatory trace,
    critical point."""
    stat = trace_stationary(a_lo, a_hi, n_pts, p, b,
                            n_steps=n_steps, reorth_every=reorth_every)
    seeds = find_hopf_seeds(p, b, stat, stride=seed_stride) if len(stat) else []
    osc = []
    if seeds:
        master = max(seeds, key=lambda s: s.omega)
        branch = trace_oscillatory(a_lo, a_hi, n_pts, p, b, master,
                                   n_steps=n_steps, reorth_every=reorth_every)
        if not branch.empty:
            osc.append(branch)
    crit = critical_point([stat] + osc, p, b,
                          n_steps=n_steps, reorth_every=reorth_every)
    return StabilityAnalysis(stationary=stat, oscillatory=osc,
                             seeds=seeds, critical=crit)


def _sweep(values, make_params, p, b, workers, **kw):
    def one(v):
        try:
            return analyze(make_params(v), b, **kw).critical
        except PhototermError as e:
            return f"{type(e).__name__}: {e}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, values))
    else:
        results = [one(v) for v in values]
    return list(zip(values, results))


def sweep_RT(RT_list, p: Params, b: BasicState, workers: int = 1, **kw):
    """Critical point per thermal Rayleigh number; failures recorded inline."""
    if not RT_list:
        raise NoRootError("empty R_T list")
    return _sweep(list(RT_list), lambda rt: p.with_(R_T=float(rt)), p, b, workers, **kw)


def sweep_Le(Le_list, p: Params, b: BasicState, workers: int = 1, **kw):
    """Critical point per Lewis number (the equilibrium is Le-independent)."""
    if not Le_list:
        raise NoRootError("empty Le list")
    return _sweep(list(Le_list), lambda le: p.with_(Le=float(le)), p, b, workers, **kw)


def monotone(seq) -> bool:
    """Strictly decreasing helper for sweep diagnostics."""
    return all(x > y for x, y in zip(seq[:-1], seq[1:]))

"""Dimensionless groups for one problem instance, plus Table-style conversion.

Params is the immutable value object the whole stack consumes. Exactly one
of (chi, G_c) determines the taxis function; the other is derived through
the taxis module so both are always populated and consistent.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

from . import taxis
from .errors import InvalidParameterError


@dataclass(frozen=True)
class DimensionalParams:
    """CGS + Kelvin inputs as tabulated for a Chlamydomonas-like suspension."""
    H: float            # depth, cm
    nu: float           # kinematic viscosity, cm^2/s
    D: float            # cell diffusivity, cm^2/s
    alpha_f: float      # thermal diffusivity, cm^2/s
    n_bar: float        # mean cell concentration, cm^-3
    U_c: float          # mean swimming speed, cm/s
    cell_volume: float  # cm^3
    density_ratio: float  # excess cell density / fluid density
    beta: float         # volumetric thermal expansion, 1/K
    delta_T: float      # T_bottom - T_top, K; negative when heated from above
    g: float = 980.0    # cm/s^2
    absorption: float = 1e-6  # absorption cross-section per cell, cm^2

    def __post_init__(self):
        positive = ["H", "nu", "D", "alpha_f", "n_bar", "U_c", "cell_volume",
                    "density_ratio", "beta", "g", "absorption"]
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class Params:
    """Dimensionless groups. Ra is the neutral-problem eigenvalue; it is
    optional here and only used as a trial value by point evaluations."""
    R_T: float
    Le: float
    Pr: float
    U_s: float
    hbar: float
    chi: float = field(default=None)  # type: ignore[assignment]
    G_c: float = field(default=None)  # type: ignore[assignment]
    I0: float = 0.8
    Ra: Optional[float] = None
    R_m: Optional[float] = None  # recorded only; absorbed into basic pressure

    def __post_init__(self):
        if self.chi is None and self.G_c is None:
            raise InvalidParameterError("one of chi or G_c is required")
        if self.chi is None:
            object.__setattr__(self, "chi", taxis.chi_from_Gc(self.G_c))
        elif self.G_c is None:
            object.__setattr__(self, "G_c", taxis.critical_intensity(self.chi))
        taxis.check_chi(self.chi)
        for name, lo in [("Le", 0.0), ("Pr", 0.0), ("hbar", 0.0), ("I0", 0.0)]:
            if not getattr(self, name) > lo:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.U_s < 0.0:
            raise InvalidParameterError(f"U_s must be nonnegative, got {self.U_s}")
        if not 0.0 < self.G_c < 1.0:
            raise InvalidParameterError(f"G_c must lie in (0,1), got {self.G_c}")

    def with_(self, **kw) -> "Params":
        """Copy with replacements; chi/G_c pairs are recomputed if either changes."""
        if "chi" in kw and "G_c" not in kw:
            kw["G_c"] = None
        elif "G_c" in kw and "chi" not in kw:
            kw["chi"] = None
        return replace(self, **kw)

    def basic_state_key(self):
        """Fields the equilibrium depends on (Ra, R_T, Le, Pr play no role there)."""
        return (self.hbar, self.U_s, self.chi, self.I0)


def dimensionless_from_dimensional(d: DimensionalParams, I0: float = 0.8,
                                   chi: Optional[float] = None,
                                   G_c: Optional[float] = None) -> Params:
    """Convert tabulated CGS inputs into the dimensionless group set."""
    buoy = d.g * d.H**3 / (d.nu * d.alpha_f)
    return Params(
        Ra=d.n_bar * d.cell_volume * d.density_ratio * buoy,
        R_T=d.beta * d.delta_T * buoy,
        R_m=buoy,
        Le=d.alpha_f / d.D,
        Pr=d.nu / d.alpha_f,
        U_s=d.U_c * d.H / d.D,
        hbar=d.absorption * d.n_bar * d.H,
        I0=I0, chi=chi, G_c=G_c,
    )

"""Shared parameter families and pinned reference numbers.

The chi values are pinned, not inverted from the nominal G_c labels: the
response curve's own inversion lands a few percent off the labels, and
every expected number below was established with these exact steepness
values.
"""

from phototherm.params import Params

PR = 5.0

# steepness behind each nominal switch-intensity label
CHI_FOR_GC = {0.8: 1.0810, 0.68: 0.1285, 0.65: 0.0, 0.63: -0.0610}

# high-precision switch intensities for the steepness endpoints and the
# deep-layer family (independent root solves, xtol 1e-12)
GC_OF_CHI = {
    -0.485: 0.5071976314265677,
    -1.1: 0.29738755735038414,
    1.1: 0.8014041245905986,
}


def deep(R_T: float, **kw) -> Params:
    """Optically deep layer, strongly negative switch."""
    return Params(R_T=R_T, Le=kw.pop("Le", 4.0), Pr=PR, U_s=15.0,
                  hbar=1.0, chi=-0.485, **kw)


def half(gc_label: float, R_T: float, **kw) -> Params:
    """Half-depth layer at swimming speed 15."""
    return Params(R_T=R_T, Le=kw.pop("Le", 4.0), Pr=PR, U_s=15.0,
                  hbar=0.5, chi=CHI_FOR_GC[gc_label], **kw)


def slow(R_T: float, **kw) -> Params:
    """Half-depth layer at swimming speed 10."""
    return Params(R_T=R_T, Le=kw.pop("Le", 4.0), Pr=PR, U_s=10.0,
                  hbar=0.5, chi=CHI_FOR_GC[0.68], **kw)


def no_swimming(R_T: float, **kw) -> Params:
    """Uniform suspension; the taxis drive is switched off."""
    return Params(R_T=R_T, Le=kw.pop("Le", 4.0), Pr=PR, U_s=0.0,
                  hbar=0.5, chi=0.0, **kw)


# self-regression pins measured with this codebase at n_steps=2000, M=2000
DEEP_CRITICAL = {"a_c": 1.95067773646, "Ra_c": 80.0643635991,
                 "omega_c": 13.2067536515}
HALF065_CRITICAL = {"a_c": 2.08671652235, "Ra_c": 91.0592282392,
                    "omega_c": 6.75652225247}

"""Linear stability of phototactic bioconvection heated from above.

Library layout: params -> basic_state -> (stability | oracle) -> neutral
-> fields, with a CLI front end in cli. The shooting path (stability) and
the Chebyshev collocation path (oracle) are independent discretizations
of the same ninth-order perturbation system and cross-check each other.
"""

__version__ = "0.1.0"

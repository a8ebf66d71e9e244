"""Shared constants of the hypercube polymer model.

The ground-state energy constant E = arcsinh(1) = log(1 + sqrt(2)) satisfies
sinh(E) = 1, cosh(E) = sqrt(2), tanh(E) = 1/sqrt(2).  The limiting normalized
optimal path length is L = sqrt(2) * E.
"""

import math

E: float = math.asinh(1.0)
SQRT2: float = math.sqrt(2.0)
L: float = SQRT2 * E


def constant_identities() -> dict[str, float]:
    """Absolute deviations of the hyperbolic bookkeeping identities.

    All four must vanish to float precision: sinh(E) = 1, cosh(E) = sqrt(2),
    tanh(E) = 1/sqrt(2) and E/tanh(E) = sqrt(2)*E.
    """
    return {
        "sinh_E_minus_1": abs(math.sinh(E) - 1.0),
        "cosh_E_minus_sqrt2": abs(math.cosh(E) - SQRT2),
        "tanh_E_minus_inv_sqrt2": abs(math.tanh(E) - 1.0 / SQRT2),
        "E_over_tanh_E_minus_L": abs(E / math.tanh(E) - L),
    }

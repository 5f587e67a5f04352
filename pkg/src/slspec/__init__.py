"""Spectral zeta functions, determinants and heat coefficients of Sturm-Liouville operators.

The operator is ``-(p y')' + V y`` on a finite interval with smooth ``p > 0``
and any self-adjoint separated or coupled boundary condition.
"""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .characteristic import (  # noqa: E402
    characteristic_at_mu,
    characteristic_at_zero,
    ln_characteristic,
    mu_series,
    zero_mode_detect,
)
from .funcexpr import SmoothFunction  # noqa: E402
from .spectral import (  # noqa: E402
    DeterminantResult,
    HeatCoefficients,
    ZetaValue,
    Z_function,
    functional_determinant,
    functional_determinant_prime,
    heat_coeff_closed_form,
    heat_coefficients,
    invariant_potential,
    robin_to_separated,
    zeta,
    zeta_at_nonpositive_int,
    zeta_many,
    zeta_prime_zero,
    zeta_residue,
)
from .wkb import CoupledBC, SeparatedBC, SLProblem, ln_characteristic_asymptotic  # noqa: E402

__all__ = [
    "BACKEND",
    "SLProblem",
    "SeparatedBC",
    "CoupledBC",
    "SmoothFunction",
    "ln_characteristic",
    "characteristic_at_mu",
    "characteristic_at_zero",
    "mu_series",
    "zero_mode_detect",
    "ln_characteristic_asymptotic",
    "ZetaValue",
    "DeterminantResult",
    "HeatCoefficients",
    "Z_function",
    "zeta",
    "zeta_many",
    "zeta_residue",
    "zeta_at_nonpositive_int",
    "zeta_prime_zero",
    "functional_determinant",
    "functional_determinant_prime",
    "heat_coefficients",
    "heat_coeff_closed_form",
    "robin_to_separated",
    "invariant_potential",
]

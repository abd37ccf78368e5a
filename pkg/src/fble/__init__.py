"""Finite-blocklength error probabilities of random code ensembles.

Exact ensemble averages and lower bounds for ML decoding of spherical and
i.i.d. Gaussian codes on the AWGN channel and of i.i.d. binary codes on
the BSC and BEC, computed in the log domain so that rate times blocklength
may run far past the floating-point range.
"""

from ._kernels import COMPILED
from ._types import (AwgnParams, BecParams, BscParams, CapabilityError, CodeParams, DomainError,
                     EvalOptions, LogProb, NumericalError, PeResult)
from .awgn_gaussian import pe_exact_gaussian
from .awgn_spherical import (fixed_point_inversion, median_bound, pe_exact, pe_via_noncentral_t,
                             sphere_packing_bound)
from .binary_channels import bec_pe_exact, bec_pu, bsc_pe_bounds, bsc_pe_exact
from .mc_oracle import (McConfig, mc_bec_semianalytic, mc_bsc_semianalytic, mc_gaussian,
                        mc_spherical)

__version__ = "0.1.0"

__all__ = [
    "COMPILED", "AwgnParams", "BecParams", "BscParams", "CapabilityError", "CodeParams",
    "DomainError", "EvalOptions", "LogProb", "NumericalError", "PeResult",
    "pe_exact", "pe_via_noncentral_t", "median_bound", "sphere_packing_bound",
    "fixed_point_inversion", "pe_exact_gaussian", "bsc_pe_bounds", "bsc_pe_exact",
    "bec_pu", "bec_pe_exact", "McConfig", "mc_spherical", "mc_gaussian",
    "mc_bsc_semianalytic", "mc_bec_semianalytic",
]

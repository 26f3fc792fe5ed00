"""Numerical laboratory for 1-D elliptic operators with non-local
Wentzell-Robin boundary coupling.

The package assembles the discrete form of a strictly elliptic operator on
the unit interval whose boundary conditions couple the two endpoints (and
the bulk) through a block operator, certifies order properties of the
generated semigroup, computes spectra, semigroups and spectral projections,
and classifies eventual positivity.  The closed-form analysis of the skew
boundary rotation model lives in :mod:`wrlab.exact1d`.
"""

from .assembly import (
    CoefficientSet,
    DiscreteGenerator,
    NonlocalCoupling,
    assemble_generator,
    assemble_q,
    build_kernel_blocks,
    conormal_of,
    constant_coefficients,
    effective_matrix,
    solve_neumann,
)
from .exact1d import (
    Regime,
    RegimeClassification,
    Thresholds,
    char_det,
    char_det_lambda,
    char_residual_mu,
    classify,
    complex_leading_pair,
    compute_thresholds,
    count_zeros_in_box,
    eigenfunction,
    real_eigenvalues,
    tau_of_mu,
)
from .meshspace import (
    Grid1D,
    MassWeights,
    inner_product,
    lattice_ops,
    mass_weights,
    norm,
)
from .orderchecks import (
    OrderCertificate,
    certify_markov,
    certify_positive,
    check_domination,
    irreducibility_probe,
    pmp_check,
)
from .semigroup import (
    EvolutionTrace,
    asymptotic_classify,
    empirical_eventual_positivity,
    empirical_positivity,
    evolve,
    expm,
)
from .spectral import (
    EventualPositivityVerdict,
    SpectrumReport,
    classify_dominance,
    dissipative_regime_checks,
    eventual_positivity_spectral,
    spectral_projection_contour,
    spectrum,
)

__version__ = "0.1.0"

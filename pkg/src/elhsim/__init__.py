"""Pseudospectral solver for an inertial Ericksen-Leslie liquid crystal flow.

The package couples the incompressible momentum balance to a wave-type
director equation with a closed-form constraint multiplier, on the
2*pi-periodic torus, and ships the energy-law, dissipativity and
constraint diagnostics used to validate runs.
"""

from .coefficients import (
    DissipationClass,
    LeslieCoefficients,
    classify,
    eta0,
    from_independent,
    preset,
)
from .diagnostics import (
    DiagnosticsRecord,
    basic_dissipation,
    basic_energy,
    constraint_monitor,
    diagnostics_record,
    energy_residual,
    hs_functionals,
    identity_suite,
    modified_functionals,
)
from .dynamics import (
    BlowUpError,
    CflError,
    SolverConfig,
    State,
    director_only_run,
    make_initial_data,
    picard_step,
    rhs,
    step,
)
from .spectral import (
    Grid,
    RealField,
    SpectralField,
    dealiased_product,
    divergence,
    forward,
    gradient,
    hs_norm,
    inverse,
    laplacian,
    leray_project,
    make_grid,
    mollify,
)

__version__ = "0.1.0"

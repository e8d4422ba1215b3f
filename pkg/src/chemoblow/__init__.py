"""Simulator and numerical certifier for blow-up in an indirect-signal
chemotaxis model on balls.

Layers, bottom to top:

    params       model constants, hypothesis validation, derived constants
    radial       primitive radial (u, v, w) solver, IMEX, blow-up monitors
    mass         cumulated-density transform and the operators P, Q
    subsolution  explicit blow-up candidate family and parameter selection
    verify       region-wise residual certification, ordering comparison,
                 blow-up detection, boundedness probes
    cli          config-driven experiment orchestration and CSV artifacts
"""

from .errors import ChemoblowError
from .mass import MassState, SGrid, cumulate, p_residual, q_residual, step_mass
from .params import (
    DerivedConstants,
    ModelParams,
    derived_constants,
    params_from_config,
    production_rate,
    validate_params,
)
from .radial import (
    RadialGrid,
    RadialState,
    RunControls,
    RunReport,
    build_grid,
    make_state,
    run,
    solve_v,
    step,
)
from .subsolution import (
    Exponents,
    InitialData,
    ProfileEval,
    SubsolutionSpec,
    envelope,
    eval_hat,
    eval_sub,
    initial_data,
    initial_state,
    select_exponents,
    select_parameters,
    spec_from_config,
    spec_to_config,
    verify_spec,
    y_of_t,
)
from .verify import (
    BlowupVerdict,
    Certificate,
    OrderingReport,
    boundedness_probe,
    certify_subsolution,
    compare_orderings,
    detect_blowup,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupVerdict",
    "Certificate",
    "ChemoblowError",
    "DerivedConstants",
    "Exponents",
    "InitialData",
    "MassState",
    "ModelParams",
    "OrderingReport",
    "ProfileEval",
    "RadialGrid",
    "RadialState",
    "RunControls",
    "RunReport",
    "SGrid",
    "SubsolutionSpec",
    "boundedness_probe",
    "build_grid",
    "certify_subsolution",
    "compare_orderings",
    "cumulate",
    "derived_constants",
    "detect_blowup",
    "envelope",
    "eval_hat",
    "eval_sub",
    "initial_data",
    "initial_state",
    "make_state",
    "p_residual",
    "params_from_config",
    "production_rate",
    "q_residual",
    "run",
    "select_exponents",
    "select_parameters",
    "solve_v",
    "spec_from_config",
    "spec_to_config",
    "step",
    "step_mass",
    "validate_params",
    "verify_spec",
    "y_of_t",
]

"""Quasi hidden variable (qHV) models for finite-dimensional quantum systems.

Build a catalog of observables, form the operator-valued measure on its
outcome lattice, trace it against a state to obtain a signed measure, and
check that the measure reproduces joint probabilities, product averages and
Bell correlations.
"""

from ._config import DEFAULT_TOL, N_MAX, Tolerances
from .catalog import Catalog
from .errors import ContractViolation, NumericalError, QHVError, ResourceError, ValidationError
from .extension import (
    CylinderSet,
    NegativityDiagnostics,
    OperatorValuedMeasure,
    SignedMeasure,
    build_global_measure,
    induce_signed_measure,
    measure_of_cylinder,
    mixture_measure,
    negativity_diagnostics,
    product_expectation_via_measure,
    signed_measure,
    verify_pushforward,
)
from .lqhv import (
    ChshValue,
    LocalResponse,
    PartiteScenario,
    WernerRow,
    build_scenario_catalog,
    chsh_value,
    singlet_state,
    standard_chsh_settings,
    verify_lqhv,
    werner_scan,
    werner_state,
)
from .models import (
    FunctionalRepresentation,
    KSCase,
    RandomVariable,
    canonical_rv,
    compose_rv,
    find_functional_representations,
    qhv_average,
    rv_cylinder,
    verify_context_invariance,
    verify_ks_average_relations,
    verify_noncontextual_joint,
    verify_representative_reconstruction,
)
from .report import CheckReport
from .spectral import (
    DensityState,
    HermitianObservable,
    SpectrumFunction,
    apply_function,
    commute_check,
    eigendecompose,
    expectation,
    observable,
    tensor_embed,
    validate_state,
)
from .symmetrized import (
    ProjectorSelection,
    joint_probability_commuting,
    product_measure_on_rectangle,
    sym_product,
    verify_marginal_consistency,
    verify_permutation_invariance,
)

__version__ = "0.1.0"

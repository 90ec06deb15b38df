"""Hypercomplex Bell-type inequalities for multipartite entanglement detection."""

from .bell import (
    BellInstance,
    InequalityReport,
    ScanReport,
    SearchConfig,
    SearchReport,
    build_global_operators,
    evaluate,
    factorized_evaluate,
    separable_scan,
    violation_search,
)
from .errors import DomainError
from .forms import (
    CoefficientTensor,
    Grouping,
    build_forms,
    catalan,
    enumerate_groupings,
    grouped_product,
    grouped_unit_product,
    parse_grouping,
)
from .hypercomplex import (
    COMPLEX,
    CONVENTIONS,
    DEGEN,
    QUATERNION,
    REAL,
    TABLE1,
    Hypercomplex,
    SignedUnit,
    StructureTable,
    associator,
    get_table,
    hc_conj,
    hc_mul,
    hc_norm,
    square_identity_check,
    unit_mul,
)
from .quantum import (
    QuantumState,
    SeparableEnsemble,
    SiteObservables,
    expectation,
    hypercomplex_expectation,
    local_bound_operator,
    sample_hermitian,
    sample_pure_state,
    sample_separable,
    tensor_product,
)

__version__ = "0.1.0"

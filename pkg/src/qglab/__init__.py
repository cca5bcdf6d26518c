"""Finite-dimensional quantum groupoids: build them, then check every axiom numerically."""

from .algebra import DEFAULT_TOL, BlockAlgebra, Element, LinearMap, SubalgebraEmbedding, tensor_algebra
from .constructors import (
    UnsupportedIsotropy,
    WeakHopfData,
    check_weak_hopf_haar,
    convolution_algebra_model,
    counital_maps,
    function_algebra_model,
    quantum_pair_groupoid,
)
from .groupoids import (
    FiniteGroupoid,
    cyclic_group,
    pair_groupoid,
    parse_groupoid,
    random_groupoid,
    validate_groupoid,
)
from .qgroupoid import Comultiplication, QuantumGroupoidData, extend_to_unit, verify_quantum_groupoid
from .report import Check, VerificationReport
from .sepid import NoSolution, SeparabilityTriple, solve_separability_idempotent, verify_separability
from .weights import Functional, Weight, gns

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "BlockAlgebra", "Element", "LinearMap", "SubalgebraEmbedding", "tensor_algebra",
    "UnsupportedIsotropy", "WeakHopfData", "check_weak_hopf_haar", "convolution_algebra_model",
    "counital_maps", "function_algebra_model", "quantum_pair_groupoid",
    "FiniteGroupoid", "cyclic_group", "pair_groupoid", "parse_groupoid", "random_groupoid", "validate_groupoid",
    "Comultiplication", "QuantumGroupoidData", "extend_to_unit", "verify_quantum_groupoid",
    "Check", "VerificationReport",
    "NoSolution", "SeparabilityTriple", "solve_separability_idempotent", "verify_separability",
    "Functional", "Weight", "gns",
]

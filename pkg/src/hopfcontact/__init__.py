"""Numerical toolkit for the Hopf fibration and strict contactomorphisms of S^3."""

from .errors import (
    AntipodalEvaluation,
    AntipodalPoints,
    BaseMoveTooFar,
    ChartExit,
    ConfigError,
    ContactHamiltonianError,
    DifferentFibers,
    GeometryError,
    NonHorizontal,
    NotAreaPreserving,
    NotClosed,
    NotConstantAngle,
    NotInChart,
    OrthogonalFibers,
    PoleOnLoop,
    StepTooCoarse,
    TrackingLoss,
)
from .grouppaths import (
    GroupPath,
    S3Quadrature,
    adjustment_angle,
    horizontality_residuals,
    l2_inner,
    lift_deformation,
    vertical_component,
)
from .liealg import (
    ContactHamiltonian,
    DefectReport,
    base_pullback,
    defect_aut1,
    defect_autH,
    defect_autXi,
    defect_sdiff,
    flow_contact_defect,
    flow_map,
    from_contact_hamiltonian,
    horizontal_lift_field,
    lie_derivative_field,
    reconstruct_f,
)
from .quantomorph import (
    FiberTwist,
    LeftMultiplication,
    Quantomorphism,
    UniformRotation,
    bundle_projection,
    fiber_rigidity_defect,
    lift_diffeo,
    path_independence_defect,
    projection_defect,
    pullback_defect,
    trivialize,
    uniform_rotation,
    unitary_deviation,
    volume_defect,
)
from .s2maps import (
    Circle,
    Composition,
    ConstantDeformation,
    Geodesic,
    Identity,
    Rotation,
    RotationFamily,
    SampledLoop,
    Squeeze,
    StreamFamily,
    StreamFlow,
    StreamFunction,
    apply_map,
    area_defect,
    geodesic,
    hamiltonian_field,
    loop_area,
)
from .s3core import (
    FIELD_A,
    FIELD_B,
    FIELD_C,
    FrameField,
    ScalarField,
    TangentVector,
    alpha,
    curl,
    d_hopf,
    directional_derivative,
    divergence,
    frame_flow,
    frame_vector,
    gradient,
    hopf_projection,
    quat_mul,
)
from .transport import fiber_angle, holonomy, horizontal_lift, nearest_neighbor, transport

__version__ = "0.1.0"

__all__ = [
    "AntipodalEvaluation",
    "AntipodalPoints",
    "BaseMoveTooFar",
    "ChartExit",
    "Circle",
    "Composition",
    "ConfigError",
    "ConstantDeformation",
    "ContactHamiltonian",
    "ContactHamiltonianError",
    "DefectReport",
    "DifferentFibers",
    "FIELD_A",
    "FIELD_B",
    "FIELD_C",
    "FiberTwist",
    "FrameField",
    "Geodesic",
    "GeometryError",
    "GroupPath",
    "Identity",
    "LeftMultiplication",
    "NonHorizontal",
    "NotAreaPreserving",
    "NotClosed",
    "NotConstantAngle",
    "NotInChart",
    "OrthogonalFibers",
    "PoleOnLoop",
    "Quantomorphism",
    "Rotation",
    "RotationFamily",
    "S3Quadrature",
    "SampledLoop",
    "ScalarField",
    "Squeeze",
    "StepTooCoarse",
    "StreamFamily",
    "StreamFlow",
    "StreamFunction",
    "TangentVector",
    "TrackingLoss",
    "UniformRotation",
    "adjustment_angle",
    "alpha",
    "apply_map",
    "area_defect",
    "base_pullback",
    "bundle_projection",
    "curl",
    "d_hopf",
    "defect_aut1",
    "defect_autH",
    "defect_autXi",
    "defect_sdiff",
    "directional_derivative",
    "divergence",
    "fiber_angle",
    "fiber_rigidity_defect",
    "flow_contact_defect",
    "flow_map",
    "frame_flow",
    "frame_vector",
    "from_contact_hamiltonian",
    "geodesic",
    "gradient",
    "hamiltonian_field",
    "holonomy",
    "hopf_projection",
    "horizontal_lift",
    "horizontal_lift_field",
    "horizontality_residuals",
    "l2_inner",
    "lie_derivative_field",
    "lift_deformation",
    "lift_diffeo",
    "loop_area",
    "nearest_neighbor",
    "path_independence_defect",
    "projection_defect",
    "pullback_defect",
    "quat_mul",
    "reconstruct_f",
    "transport",
    "trivialize",
    "uniform_rotation",
    "unitary_deviation",
    "vertical_component",
    "volume_defect",
]

"""Conformally Kahler Einstein-Maxwell metrics on a product of 2-spheres:
explicit construction plus a local-chart tensor engine that verifies the
field equations and every derived constant numerically."""

from .chart import (
    ChartDomain,
    ChartPoint,
    ConformalOracle,
    CurvatureBundle,
    FlatOracle,
    CallableMetricOracle,
    MetricJet,
    MetricOracle,
    ProductMetricOracle,
    christoffel,
    curvature,
    divergence_sym2,
    killing_residual,
    laplacian,
)
from .errors import (
    DomainBoundary,
    EmverifyError,
    InvalidParams,
    NonPositivePotential,
    NotJInvariant,
    SingularMetric,
    ZeroSelfDualPart,
)
from .family import (
    FamilyConstants,
    FamilyParams,
    ProductChart,
    QuarticProfile,
    build_chart,
    calabi_value,
    family_constants,
    gauss_bonnet_check,
    maxwell_field,
    ode_operator,
    quartic_profile,
    sweep,
    yamabe_value,
)
from .forms import (
    Orientation,
    TwoForm,
    asd_from_jinvariant,
    codifferential,
    compose,
    exterior_derivative,
    hodge_star,
    sd_asd_split,
)
from .residuals import (
    EMConfig,
    ResidualReport,
    Tolerances,
    recover_potential,
    verify,
)

__version__ = "0.1.0"

"""Rolling-tangent-space development of curves on chart-defined submanifolds."""

from .errors import *  # noqa: F401,F403
from .geometry import (
    Chart,
    ChartCurve,
    FrameData,
    chart_derivatives,
    christoffel,
    curvature_vector,
    curve_length,
    frame_data,
    geodesic_residual,
    metric_tensor,
    project_tangent,
)
from .oracle import OracleConfig, develop_direct, fd_derivatives, transport_direct
from .rolling import (
    RollingSolution,
    TangentField,
    TimeGrid,
    TraceSample,
    apply_rolling,
    apply_transport,
    covariant_derivative,
    fit_circle,
    fundamental_solution,
    holonomy,
    rolling_coeffs,
    straightness,
    trace_curve,
    trace_derivative_check,
    trace_length,
    trace_vector_field,
)
from .zoo import ZooEntry, make_chart, make_curve, standard_pairs

__version__ = "0.1.0"

"""Parallel-transport anholonomy and Hannay angles for loops on a torus."""

from .errors import (
    DegenerateChart,
    DivergentAnholonomy,
    TorusHolonomyError,
    UnsupportedLoop,
    ZeroTangent,
)
from .geometry import (
    Poloidal,
    SurfacePoint,
    TangentVector,
    Toroidal,
    Torus,
    Winding,
    approx_knot_length,
    christoffel_at,
    embed,
    loop_length,
    loop_point,
    metric_at,
    unit_tangent_chart,
    unit_tangent_embedded,
)
from .hannay import (
    HannayReport,
    OmegaProfile,
    berry_acceleration,
    berry_averaged_shift,
    berry_simulate,
    compare_frameworks,
    hannay_angle_line_integral,
    omega_cross_r_integral,
)
from .transport import (
    SweepRow,
    TransportResult,
    sweep_p0,
    projection,
    pt_rhs,
    sigma_closed_form,
    sigma_sweep,
    transport_closed,
    transport_closed_form,
    transport_numeric,
)

__version__ = "0.1.0"

__all__ = [
    "approx_knot_length",
    "berry_acceleration",
    "berry_averaged_shift",
    "berry_simulate",
    "christoffel_at",
    "compare_frameworks",
    "DegenerateChart",
    "DivergentAnholonomy",
    "embed",
    "hannay_angle_line_integral",
    "HannayReport",
    "loop_length",
    "loop_point",
    "metric_at",
    "omega_cross_r_integral",
    "OmegaProfile",
    "Poloidal",
    "projection",
    "pt_rhs",
    "sigma_closed_form",
    "sigma_sweep",
    "SurfacePoint",
    "sweep_p0",
    "SweepRow",
    "TangentVector",
    "Toroidal",
    "Torus",
    "TorusHolonomyError",
    "transport_closed",
    "transport_closed_form",
    "transport_numeric",
    "TransportResult",
    "unit_tangent_chart",
    "unit_tangent_embedded",
    "UnsupportedLoop",
    "Winding",
    "ZeroTangent",
]

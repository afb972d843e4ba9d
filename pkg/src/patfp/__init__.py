"""Photoacoustic tomography with a layered boundary ultrasound sensor.

Simulates the acoustic initial-value problem on a triangulated disk with
an absorbing, curvature-corrected boundary condition modeling a thin
sensing film on a backing substrate; converts boundary pressure into
film measurements; and recovers the initial pressure by Landweber
iteration with a continuous-adjoint (or exact discrete) gradient.
"""

__version__ = "0.1.0"

from .assembly import SystemMatrices, assemble_boundary, assemble_interior, assemble_system, cfl_dt
from .directivity import critical_angle, directivity, directivity_zero, reflection_coefficient
from .errors import (
    CFLError,
    ConfigError,
    DivergenceError,
    FormatError,
    NumericsError,
    PatfpError,
)
from .medium import MediumParams, SensorCoefficients, default_medium, nondimensionalize, sensor_coefficients
from .mesh import BoundaryGeometry, Mesh, boundary_geometry, generate_disk_mesh, load_mesh, save_mesh
from .adjoint import adjoint_operator, boundary_source, discrete_adjoint, dot_product_check
from .inversion import ReconReport, estimate_norm, landweber, project_h10, relative_error
from .phantoms import shepp_logan, smooth_blobs
from .sensor import (
    Measurement,
    antiderivative2,
    forward_operator,
    measure_fabry_perot,
    measure_idealized,
)
from .wavesolver import (
    BoundaryTrace,
    ForwardSolution,
    WaveRunConfig,
    restrict_trace,
    solve_adjoint_ibvp,
    solve_forward,
    trace_inner,
    trace_norm,
)

__all__ = [
    "BoundaryGeometry",
    "BoundaryTrace",
    "CFLError",
    "ConfigError",
    "DivergenceError",
    "FormatError",
    "ForwardSolution",
    "Measurement",
    "MediumParams",
    "Mesh",
    "NumericsError",
    "PatfpError",
    "ReconReport",
    "SensorCoefficients",
    "SystemMatrices",
    "WaveRunConfig",
    "adjoint_operator",
    "antiderivative2",
    "assemble_boundary",
    "assemble_interior",
    "assemble_system",
    "boundary_geometry",
    "boundary_source",
    "cfl_dt",
    "critical_angle",
    "default_medium",
    "directivity",
    "directivity_zero",
    "discrete_adjoint",
    "dot_product_check",
    "estimate_norm",
    "forward_operator",
    "generate_disk_mesh",
    "landweber",
    "load_mesh",
    "measure_fabry_perot",
    "measure_idealized",
    "nondimensionalize",
    "project_h10",
    "reflection_coefficient",
    "relative_error",
    "restrict_trace",
    "save_mesh",
    "sensor_coefficients",
    "shepp_logan",
    "smooth_blobs",
    "solve_adjoint_ibvp",
    "solve_forward",
    "trace_inner",
    "trace_norm",
]

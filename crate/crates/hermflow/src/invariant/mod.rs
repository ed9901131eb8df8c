//! Geometry of invariant Hermitian structures as finite algebra on a Lie algebra frame.

pub mod connection;
pub mod curvature;
pub mod hcf;
pub mod metric;
pub mod structure;

pub use connection::{chern_torsion, connection, d_omega, pluriclosed_defect, ChernTorsion, ConnectionCoefficients, ConnectionKind};
pub use curvature::{check_cplx, curvature, format_witness, format_witness_value, CplxReport, CurvatureConvention, CurvatureTensor};
pub use hcf::{hcf_tangent, hcf_terms, integrate_invariant, invariant_flow_step, InvariantFlowOptions, InvariantTrajectory};
pub use metric::{frame_metric, FrameMetric, MetricCoefficients, MetricSlice};
pub use structure::{dualize, BracketTable, ComplexStructureEquations, EquationsDocument};

use crate::Result;

/// Connection and curvature in one call.
pub fn bismut_curvature(
    eqs: &ComplexStructureEquations,
    m: &MetricCoefficients,
    convention: CurvatureConvention,
) -> Result<CurvatureTensor> {
    geometry_curvature(eqs, m, ConnectionKind::Bismut, convention)
}

pub fn geometry_curvature(
    eqs: &ComplexStructureEquations,
    m: &MetricCoefficients,
    kind: ConnectionKind,
    convention: CurvatureConvention,
) -> Result<CurvatureTensor> {
    let br = dualize(eqs)?;
    let g = m.frame_metric()?;
    let conn = connection(kind, &br, &g);
    Ok(curvature(&conn, &br, &g, convention))
}

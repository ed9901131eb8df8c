//! Hermitian curvature flows restricted to invariant metrics.
//!
//! `∂_t g_{i j̄} = K_{i j̄} = −S_{i j̄} + aQ¹ + bQ² + cQ³ + dQ⁴`, with `S` the trace of the
//! Chern curvature in the standard lowering. In coefficients:
//! `ṙ² = 2K_{1 1̄}`, `ṡ² = 2K_{2 2̄}`, `ṫ² = 2K_{3 3̄}`, `u̇ = 2√−1 K_{1 2̄}`,
//! `ż = 2√−1 K_{1 3̄}`, `v̇ = 2√−1 K_{2 3̄}`.

use super::connection::{chern_torsion, connection, ConnectionKind};
use super::curvature::{curvature, CurvatureConvention};
use super::metric::{FrameMetric, MetricCoefficients};
use super::structure::{dualize, BracketTable, ComplexStructureEquations};
use crate::flow::{FlowCoefficients, Termination};
use crate::hermitian::{chern_trace, hcf_combination, torsion_quadratics, CMatrix};
use crate::{HermError, Result, I};
use serde::{Deserialize, Serialize};

/// `S` and `Q¹..Q⁴` at one metric.
#[derive(Clone, Debug)]
pub struct HcfTerms {
    pub s: CMatrix,
    pub q: [CMatrix; 4],
}

pub fn hcf_terms(br: &BracketTable, g: &FrameMetric) -> Result<HcfTerms> {
    let ch = connection(ConnectionKind::Chern, br, g);
    let omega = curvature(&ch, br, g, CurvatureConvention::Standard);
    let g_inv = g.inverse_hermitian();
    let s = chern_trace(&omega.mixed_block(), &g_inv)?;
    let t = chern_torsion(&ch, br, g)?;
    let q = torsion_quadratics(&t.lowered, &g_inv);
    Ok(HcfTerms { s, q })
}

/// `K = −S + aQ¹ + bQ² + cQ³ + dQ⁴`.
pub fn hcf_tangent(eqs: &ComplexStructureEquations, m: &MetricCoefficients, fc: &FlowCoefficients) -> Result<CMatrix> {
    let br = dualize(eqs)?;
    tangent_with(&br, m, fc)
}

fn tangent_with(br: &BracketTable, m: &MetricCoefficients, fc: &FlowCoefficients) -> Result<CMatrix> {
    let g = m.frame_metric()?;
    let t = hcf_terms(br, &g)?;
    Ok(hcf_combination(&t.s, &t.q, fc.as_array()))
}

/// Velocity of `(r², s², t², Re u, Im u, Re v, Im v, Re z, Im z)` for a tangent `K`.
pub fn coefficient_velocity(k: &CMatrix) -> [f64; 9] {
    let u = 2.0 * I * k[(0, 1)];
    let v = 2.0 * I * k[(1, 2)];
    let z = 2.0 * I * k[(0, 2)];
    [
        2.0 * k[(0, 0)].re,
        2.0 * k[(1, 1)].re,
        2.0 * k[(2, 2)].re,
        u.re,
        u.im,
        v.re,
        v.im,
        z.re,
        z.im,
    ]
}

fn rhs(br: &BracketTable, x: &[f64; 9], fc: &FlowCoefficients) -> Result<[f64; 9]> {
    let m = MetricCoefficients::from_array(x);
    Ok(coefficient_velocity(&tangent_with(br, &m, fc)?))
}

fn axpy(x: &[f64; 9], h: f64, k: &[f64; 9]) -> [f64; 9] {
    let mut o = *x;
    for i in 0..9 {
        o[i] += h * k[i];
    }
    o
}

fn rk4(br: &BracketTable, m: &MetricCoefficients, fc: &FlowCoefficients, dt: f64) -> Result<MetricCoefficients> {
    let x = m.to_array();
    let k1 = rhs(br, &x, fc)?;
    let k2 = rhs(br, &axpy(&x, dt / 2.0, &k1), fc)?;
    let k3 = rhs(br, &axpy(&x, dt / 2.0, &k2), fc)?;
    let k4 = rhs(br, &axpy(&x, dt, &k3), fc)?;
    let mut y = x;
    for i in 0..9 {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let out = MetricCoefficients::from_array(&y);
    out.validate()?;
    Ok(out)
}

/// One RK4 step. Fails if any stage leaves the admissible cone.
pub fn invariant_flow_step(
    eqs: &ComplexStructureEquations,
    m: &MetricCoefficients,
    fc: &FlowCoefficients,
    dt: f64,
) -> Result<MetricCoefficients> {
    if !(dt > 0.0) {
        return Err(HermError::InvalidParameter(format!("dt = {dt}")));
    }
    m.validate()?;
    rk4(&dualize(eqs)?, m, fc, dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantFlowOptions {
    pub dt: f64,
    pub dt_min: f64,
}

impl Default for InvariantFlowOptions {
    fn default() -> Self {
        InvariantFlowOptions { dt: 1e-3, dt_min: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantTrajectory {
    pub times: Vec<f64>,
    pub metrics: Vec<MetricCoefficients>,
    pub termination: Termination,
    pub note: Option<String>,
}

impl InvariantTrajectory {
    pub fn last(&self) -> &MetricCoefficients {
        self.metrics.last().expect("trajectory has its initial point")
    }
}

/// RK4 from `m0` to `t_end`; a failed step is retried with half the step, down to `dt_min`.
pub fn integrate_invariant(
    eqs: &ComplexStructureEquations,
    m0: &MetricCoefficients,
    fc: &FlowCoefficients,
    t_end: f64,
    opts: &InvariantFlowOptions,
) -> Result<InvariantTrajectory> {
    m0.validate()?;
    let br = dualize(eqs)?;
    let mut traj = InvariantTrajectory {
        times: vec![0.0],
        metrics: vec![*m0],
        termination: Termination::ReachedTEnd,
        note: None,
    };
    let mut t = 0.0;
    let mut m = *m0;
    while t < t_end - 1e-12 {
        let mut h = opts.dt.min(t_end - t);
        let next = loop {
            match rk4(&br, &m, fc, h) {
                Ok(next) => break Some(next),
                Err(e) if h / 2.0 >= opts.dt_min => {
                    let _ = e;
                    h /= 2.0;
                }
                Err(e) => {
                    traj.termination = Termination::LeftAdmissibleCone;
                    traj.note = Some(format!("t = {t}: {e}"));
                    break None;
                }
            }
        };
        match next {
            Some(nm) => {
                t += h;
                m = nm;
                traj.times.push(t);
                traj.metrics.push(m);
            }
            None => break,
        }
    }
    Ok(traj)
}

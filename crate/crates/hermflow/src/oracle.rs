//! Finite-difference curvature on open subsets of `ℂⁿ`.
//!
//! Takes a metric `z ↦ g_{i j̄}(z)` and (optionally) Christoffel functions and
//! differentiates numerically along `∂/∂z_a = ½(∂_x − √−1 ∂_y)` and
//! `∂/∂z̄_a = ½(∂_x + √−1 ∂_y)`. Coordinate fields commute, so
//! `R(∂_A,∂_B) = ∂_A Γ_B − ∂_B Γ_A + [Γ_A, Γ_B]`.

use crate::hermitian::{inverse_metric, CMatrix};
use crate::tensor::{Axis, ComplexTensor};
use crate::{HermError, Result, C64, I};
use serde::{Deserialize, Serialize};

/// Points closer than this to the origin are refused.
pub const MIN_RADIUS: f64 = 0.1;

/// Connection coefficients on the holomorphic tangent bundle at one point:
/// `∇_{∂_i}∂_j = hol[k,i,j] ∂_k`, `∇_{∂̄_i}∂_j = anti[k,i,j] ∂_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffels {
    pub hol: ComplexTensor,
    pub anti: ComplexTensor,
}

impl Christoffels {
    pub fn n(&self) -> usize {
        self.hol.dims()[0]
    }

    /// `Γ_A` as a matrix `[l][k]`: `∇_{∂_A}∂_k = Σ_l Γ_A[l][k] ∂_l`, `A < 2n`.
    pub fn along(&self, a: usize) -> CMatrix {
        let n = self.n();
        let (t, i) = if a < n { (&self.hol, a) } else { (&self.anti, a - n) };
        CMatrix::from_fn(n, n, |l, k| t.get(&[l, i, k]))
    }

    fn flat(&self) -> Vec<C64> {
        self.hol.data().iter().chain(self.anti.data()).copied().collect()
    }

    fn from_flat(n: usize, v: &[C64]) -> Result<Self> {
        let m = n * n * n;
        Ok(Christoffels {
            hol: ComplexTensor::from_data(vec![Axis::hol(n); 3], v[..m].to_vec())?,
            anti: ComplexTensor::from_data(vec![Axis::hol(n); 3], v[m..].to_vec())?,
        })
    }

    pub fn max_diff(&self, other: &Christoffels) -> f64 {
        self.flat().iter().zip(other.flat()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

pub type MetricFn<'a> = dyn Fn(&[C64]) -> Result<CMatrix> + Send + Sync + 'a;
pub type ChristoffelFn<'a> = dyn Fn(&[C64]) -> Result<Christoffels> + Send + Sync + 'a;

/// A metric on an open subset of `ℂⁿ∖{0}`, with optional closed-form Christoffels.
pub struct PointMetricField<'a> {
    pub n: usize,
    metric: Box<MetricFn<'a>>,
    christoffels: Option<Box<ChristoffelFn<'a>>>,
}

impl<'a> PointMetricField<'a> {
    pub fn new(n: usize, metric: impl Fn(&[C64]) -> Result<CMatrix> + Send + Sync + 'a) -> Self {
        PointMetricField {
            n,
            metric: Box::new(metric),
            christoffels: None,
        }
    }

    pub fn with_christoffels(mut self, f: impl Fn(&[C64]) -> Result<Christoffels> + Send + Sync + 'a) -> Self {
        self.christoffels = Some(Box::new(f));
        self
    }

    /// `g_{i j̄}(z)`, checked Hermitian positive-definite.
    pub fn metric(&self, z: &[C64]) -> Result<CMatrix> {
        let g = (self.metric)(z)?;
        let herm = (&g - g.adjoint()).iter().map(|w| w.norm()).fold(0.0, f64::max);
        if herm > 1e-12 * (1.0 + g.norm()) {
            return Err(HermError::InadmissibleMetric(format!("not Hermitian at z (defect {herm:.2e})")));
        }
        let h = (&g + g.adjoint()) * C64::from(0.5);
        if nalgebra::SymmetricEigen::new(h).eigenvalues.iter().any(|&e| !(e > 0.0)) {
            return Err(HermError::InadmissibleMetric("not positive-definite at z".into()));
        }
        Ok(g)
    }

    pub fn christoffels(&self, z: &[C64]) -> Result<Christoffels> {
        match &self.christoffels {
            Some(f) => f(z),
            None => Err(HermError::InvalidParameter("field carries no Christoffel functions".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FdScheme {
    /// Second-order central differences, `h = h_rel · max(1, |z|)`.
    Central { h_rel: f64 },
    /// `(4 D(h/2) − D(h))/3` on central differences; fourth order.
    Richardson { h_rel: f64 },
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme::Central { h_rel: 1e-5 }
    }
}

impl FdScheme {
    pub fn richardson() -> Self {
        FdScheme::Richardson { h_rel: 1e-3 }
    }

    pub fn with_h(self, h_rel: f64) -> Self {
        match self {
            FdScheme::Central { .. } => FdScheme::Central { h_rel },
            FdScheme::Richardson { .. } => FdScheme::Richardson { h_rel },
        }
    }
}

fn check_point(z: &[C64], n: usize) -> Result<f64> {
    if z.len() != n {
        return Err(HermError::Shape(format!("point has {} coordinates, n = {n}", z.len())));
    }
    let r = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    if !r.is_finite() {
        return Err(HermError::NonFinite("point".into()));
    }
    if r <= MIN_RADIUS {
        return Err(HermError::PointTooClose(r));
    }
    Ok(r)
}

/// `∂_A f(z)` for `A < 2n`, entrywise on a flat vector.
fn derivative<F>(f: &F, z: &[C64], a: usize, scheme: FdScheme) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let n = z.len();
    let scale = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let central = |h: f64| -> Result<Vec<C64>> {
        let c = a % n;
        let shifted = |d: C64| -> Result<Vec<C64>> {
            let mut w = z.to_vec();
            w[c] += d;
            f(&w)
        };
        let (xp, xm) = (shifted(C64::from(h))?, shifted(C64::from(-h))?);
        let (yp, ym) = (shifted(I * h)?, shifted(-I * h)?);
        let s = if a < n { -1.0 } else { 1.0 };
        Ok((0..xp.len())
            .map(|k| 0.5 * ((xp[k] - xm[k]) / (2.0 * h) + s * I * (yp[k] - ym[k]) / (2.0 * h)))
            .collect())
    };
    match scheme {
        FdScheme::Central { h_rel } => central(h_rel * scale),
        FdScheme::Richardson { h_rel } => {
            let h = h_rel * scale;
            if h / 2.0 < 1e-14 * scale {
                return Err(HermError::InvalidParameter(format!("step {h} underflows")));
            }
            let d1 = central(h)?;
            let d2 = central(h / 2.0)?;
            Ok(d1.iter().zip(&d2).map(|(p, q)| (4.0 * q - p) / 3.0).collect())
        }
    }
}

/// Finite-difference curvature, lowered with `g(z)`.
#[derive(Clone, Debug)]
pub struct OracleCurvature {
    pub n: usize,
    /// `Ω(∂_A, ∂_B, ∂_k, ∂̄_l) = g(R(∂_A,∂_B)∂_k, ∂̄_l)`, axes `[A, B, k, l̄]` with `A, B < 2n`.
    pub lowered: ComplexTensor,
}

impl OracleCurvature {
    /// `Ω_{i j̄ k l̄}`.
    pub fn mixed_block(&self) -> ComplexTensor {
        let n = self.n;
        ComplexTensor::from_fn(vec![Axis::hol(n), Axis::anti(n), Axis::hol(n), Axis::anti(n)], |x| {
            self.lowered.get(&[x[0], n + x[1], x[2], x[3]])
        })
        .expect("finite")
    }

    /// Largest component whose direction pair is `(∂_i, ∂_j)` or `(∂̄_i, ∂̄_j)`.
    pub fn pure_type_max(&self) -> f64 {
        let n = self.n;
        self.lowered.max_abs_component(|x| (x[0] < n) == (x[1] < n))
    }

    pub fn max_abs(&self) -> f64 {
        self.lowered.max_abs()
    }
}

/// Curvature of the field's own Christoffel functions.
pub fn fd_curvature(field: &PointMetricField, z: &[C64], scheme: FdScheme) -> Result<OracleCurvature> {
    fd_curvature_with(field, &|w: &[C64]| field.christoffels(w), z, scheme)
}

/// Curvature of the connection `gamma`, lowered with the field's metric.
pub fn fd_curvature_with(
    field: &PointMetricField,
    gamma: &(dyn Fn(&[C64]) -> Result<Christoffels> + Sync),
    z: &[C64],
    scheme: FdScheme,
) -> Result<OracleCurvature> {
    let n = field.n;
    check_point(z, n)?;
    let g = field.metric(z)?;
    let g0 = gamma(z)?;
    let flat = |w: &[C64]| -> Result<Vec<C64>> { Ok(gamma(w)?.flat()) };
    let mut dgam = Vec::with_capacity(2 * n);
    for a in 0..2 * n {
        dgam.push(Christoffels::from_flat(n, &derivative(&flat, z, a, scheme)?)?);
    }
    let mats: Vec<CMatrix> = (0..2 * n).map(|a| g0.along(a)).collect();
    let mut r = vec![CMatrix::zeros(n, n); 4 * n * n];
    for a in 0..2 * n {
        for b in 0..2 * n {
            r[a * 2 * n + b] = dgam[a].along(b) - dgam[b].along(a) + &mats[a] * &mats[b] - &mats[b] * &mats[a];
        }
    }
    let lowered = ComplexTensor::from_fn(vec![Axis::frame(n), Axis::frame(n), Axis::hol(n), Axis::anti(n)], |x| {
        let m = &r[x[0] * 2 * n + x[1]];
        (0..n).map(|p| m[(p, x[2])] * g[(p, x[3])]).sum()
    })?;
    Ok(OracleCurvature { n, lowered })
}

fn metric_derivatives(field: &PointMetricField, z: &[C64], scheme: FdScheme) -> Result<(CMatrix, Vec<CMatrix>)> {
    let n = field.n;
    check_point(z, n)?;
    let g = field.metric(z)?;
    let flat = |w: &[C64]| -> Result<Vec<C64>> { Ok((field.metric)(w)?.iter().copied().collect()) };
    let mut dg = Vec::with_capacity(2 * n);
    for a in 0..2 * n {
        dg.push(CMatrix::from_vec(n, n, derivative(&flat, z, a, scheme)?));
    }
    Ok((g, dg))
}

/// Chern: `∇_{∂_i}∂_j = g^{k s̄} ∂_i g_{j s̄} ∂_k`, `∇_{∂̄_i}∂_j = 0`.
pub fn fd_chern_christoffels(field: &PointMetricField, z: &[C64], scheme: FdScheme) -> Result<Christoffels> {
    let n = field.n;
    let (g, dg) = metric_derivatives(field, z, scheme)?;
    let gi = inverse_metric(&g)?;
    let hol = ComplexTensor::from_fn(vec![Axis::hol(n); 3], |x| {
        let (k, i, j) = (x[0], x[1], x[2]);
        (0..n).map(|s| gi[(k, s)] * dg[i][(j, s)]).sum()
    })?;
    Ok(Christoffels {
        hol,
        anti: ComplexTensor::zeros(vec![Axis::hol(n); 3]),
    })
}

/// Bismut: `∇_{∂_i}∂_j = g^{k s̄} ∂_j g_{i s̄} ∂_k`,
/// `∇_{∂̄_i}∂_j = g^{k s̄}(∂̄_i g_{j s̄} − ∂̄_s g_{j ī}) ∂_k`.
pub fn fd_bismut_christoffels(field: &PointMetricField, z: &[C64], scheme: FdScheme) -> Result<Christoffels> {
    let n = field.n;
    let (g, dg) = metric_derivatives(field, z, scheme)?;
    let gi = inverse_metric(&g)?;
    let hol = ComplexTensor::from_fn(vec![Axis::hol(n); 3], |x| {
        let (k, i, j) = (x[0], x[1], x[2]);
        (0..n).map(|s| gi[(k, s)] * dg[j][(i, s)]).sum()
    })?;
    let anti = ComplexTensor::from_fn(vec![Axis::hol(n); 3], |x| {
        let (k, i, j) = (x[0], x[1], x[2]);
        (0..n).map(|s| gi[(k, s)] * (dg[n + i][(j, s)] - dg[n + s][(j, i)])).sum()
    })?;
    Ok(Christoffels { hol, anti })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn euclid(n: usize) -> PointMetricField<'static> {
        PointMetricField::new(n, move |_| Ok(CMatrix::identity(n, n))).with_christoffels(move |_| {
            Ok(Christoffels {
                hol: ComplexTensor::zeros(vec![Axis::hol(n); 3]),
                anti: ComplexTensor::zeros(vec![Axis::hol(n); 3]),
            })
        })
    }

    /// `g(α,β)` written out independently of the closed-form module.
    fn hopf_field(n: usize, alpha: f64, beta: f64) -> PointMetricField<'static> {
        PointMetricField::new(n, move |z| {
            let r: f64 = z.iter().map(|w| w.norm_sqr()).sum();
            Ok(CMatrix::from_fn(n, n, |i, j| {
                let d = if i == j { alpha / r } else { 0.0 };
                C64::from(d) + beta * z[i].conj() * z[j] / (r * r)
            }))
        })
    }

    #[test]
    fn euclidean_is_flat() {
        let f = euclid(3);
        let z = [c(1.0, 0.0), c(0.2, 0.3), c(0.0, -1.0)];
        assert_eq!(fd_curvature(&f, &z, FdScheme::default()).unwrap().max_abs(), 0.0);
        let ch = fd_chern_christoffels(&f, &z, FdScheme::default()).unwrap();
        assert_eq!(ch.hol.max_abs(), 0.0);
    }

    #[test]
    fn refuses_near_origin() {
        let f = euclid(2);
        let z = [c(0.05, 0.0), c(0.0, 0.05)];
        assert!(matches!(fd_curvature(&f, &z, FdScheme::default()), Err(HermError::PointTooClose(_))));
        assert!(fd_chern_christoffels(&f, &z, FdScheme::default()).is_err());
    }

    #[test]
    fn missing_christoffels_is_an_error() {
        let f = hopf_field(2, 1.0, 0.0);
        assert!(fd_curvature(&f, &[c(1.0, 0.0), c(0.0, 0.0)], FdScheme::default()).is_err());
    }

    #[test]
    fn chern_christoffel_examples() {
        let f = hopf_field(2, 1.0, 0.0);
        let ch = fd_chern_christoffels(&f, &[c(1.0, 0.0), c(0.0, 0.0)], FdScheme::default()).unwrap();
        assert!((ch.hol.get(&[0, 0, 0]) + 1.0).norm() < 1e-6);
        let f = hopf_field(3, 1.0, 1.0);
        let ch = fd_chern_christoffels(&f, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], FdScheme::default()).unwrap();
        assert!((ch.hol.get(&[2, 2, 2]) + 1.0).norm() < 1e-6);
    }

    #[test]
    fn rejects_indefinite_metric() {
        let f = PointMetricField::new(2, |_| Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]))));
        let r = fd_chern_christoffels(&f, &[c(1.0, 0.0), c(0.0, 0.0)], FdScheme::default());
        assert!(matches!(r, Err(HermError::InadmissibleMetric(_))), "{r:?}");
    }

    #[test]
    fn second_order_convergence() {
        // differentiate the metric's Bismut Christoffels twice over: the curvature defect of the
        // standard n = 2 metric shrinks ~4x when h halves
        let f = hopf_field(2, 1.0, 0.0);
        let gamma = |w: &[C64]| fd_bismut_christoffels(&f, w, FdScheme::Richardson { h_rel: 1e-4 });
        let z = [c(0.7, 0.2), c(-0.3, 0.5)];
        let d1 = fd_curvature_with(&f, &gamma, &z, FdScheme::Central { h_rel: 2e-2 }).unwrap().max_abs();
        let d2 = fd_curvature_with(&f, &gamma, &z, FdScheme::Central { h_rel: 1e-2 }).unwrap().max_abs();
        let ratio = d1 / d2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}

//! Closed forms for `g(α,β)_{i j̄} = α δ_{ij}/|z|² + β z̄_i z_j/|z|⁴` on `ℂⁿ∖{0}`.
//!
//! Dot products of complex vectors are Hermitian: `ξ·ν = Σ ξ_i ν̄_i`.
//! Christoffel arrays are indexed `[k, i, j]` with `∇_{∂_i} ∂_j = Γ[k,i,j] ∂_k`.

use crate::flow::{ode_rhs, FlowCoefficients};
use crate::hermitian::{chern_trace, inverse_metric, torsion_quadratics, CMatrix};
use crate::positivity::bisectional_form;
use crate::tensor::{Axis, ComplexTensor};
use crate::{tol, HermError, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfMetric {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `|z|²`, refusing the origin.
pub fn norm_sqr(z: &[C64]) -> Result<f64> {
    if z.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return Err(HermError::NonFinite("point".into()));
    }
    let r: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    if r == 0.0 {
        return Err(HermError::PointTooClose(0.0));
    }
    Ok(r)
}

pub fn hdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

impl HopfMetric {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(HermError::InvalidParameter(format!("n = {n} < 2")));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(HermError::NonFinite("α, β".into()));
        }
        if !(alpha > 0.0) {
            return Err(HermError::InadmissibleMetric(format!("α = {alpha} ≤ 0")));
        }
        if !(beta > -alpha) {
            return Err(HermError::InadmissibleMetric(format!("β = {beta} ≤ −α = {}", -alpha)));
        }
        Ok(HopfMetric { n, alpha, beta })
    }

    /// `g_H = g(1, 0)`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 1.0, 0.0)
    }

    pub fn with_ratio(n: usize, alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(n, alpha, gamma * alpha)
    }

    pub fn gamma(&self) -> f64 {
        self.beta / self.alpha
    }

    fn point(&self, z: &[C64]) -> Result<f64> {
        if z.len() != self.n {
            return Err(HermError::Shape(format!("point has {} coordinates, n = {}", z.len(), self.n)));
        }
        norm_sqr(z)
    }

    pub fn metric(&self, z: &[C64]) -> Result<CMatrix> {
        let r = self.point(z)?;
        Ok(CMatrix::from_fn(self.n, self.n, |i, j| {
            C64::from(self.alpha * delta(i, j) / r) + self.beta * z[i].conj() * z[j] / (r * r)
        }))
    }

    /// `g^{i j̄} = (|z|²/α)(δ − β/(α+β) · z̄_j z_i/|z|²)`, laid out as `[i][j]`.
    pub fn inverse(&self, z: &[C64]) -> Result<CMatrix> {
        let r = self.point(z)?;
        let f = self.beta / (self.alpha + self.beta);
        Ok(CMatrix::from_fn(self.n, self.n, |i, j| {
            (C64::from(delta(i, j)) - f * z[j].conj() * z[i] / r) * (r / self.alpha)
        }))
    }

    /// Bismut: `∇_{∂_i}∂_j` and `∇_{∂̄_i}∂_j`.
    pub fn bismut_christoffels(&self, z: &[C64]) -> Result<(ComplexTensor, ComplexTensor)> {
        let r = self.point(z)?;
        let (n, g) = (self.n, self.gamma());
        let ax = vec![Axis::hol(n); 3];
        let hol = ComplexTensor::from_fn(ax.clone(), |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            (g * delta(j, k) * z[i].conj() - delta(i, k) * z[j].conj()) / r - g * z[i].conj() * z[j].conj() * z[k] / (r * r)
        })?;
        let anti = ComplexTensor::from_fn(ax, |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            (delta(i, j) * z[k] - (1.0 + g) * delta(j, k) * z[i]) / r + g * z[i] * z[j].conj() * z[k] / (r * r)
        })?;
        Ok((hol, anti))
    }

    /// Chern: `∇_{∂_i}∂_j`; the `∇_{∂̄_i}` part vanishes.
    pub fn chern_christoffels(&self, z: &[C64]) -> Result<ComplexTensor> {
        let r = self.point(z)?;
        let (n, g) = (self.n, self.gamma());
        ComplexTensor::from_fn(vec![Axis::hol(n); 3], |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            (g * delta(i, k) * z[j].conj() - delta(j, k) * z[i].conj()) / r - g * z[i].conj() * z[j].conj() * z[k] / (r * r)
        })
    }

    /// `T^k_{ij} = (γ+1)(δ^k_i z̄_j − δ^k_j z̄_i)/|z|²`, axes `[k, i, j]`.
    pub fn chern_torsion(&self, z: &[C64]) -> Result<ComplexTensor> {
        let r = self.point(z)?;
        let g1 = self.gamma() + 1.0;
        ComplexTensor::from_fn(vec![Axis::hol(self.n); 3], |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            g1 * (delta(i, k) * z[j].conj() - delta(j, k) * z[i].conj()) / r
        })
    }
}

fn mixed_axes(n: usize) -> Vec<Axis> {
    vec![Axis::hol(n), Axis::anti(n), Axis::hol(n), Axis::anti(n)]
}

/// `U_α`, the Bismut curvature of `g_H`.
pub fn u_alpha(z: &[C64]) -> Result<ComplexTensor> {
    let r = norm_sqr(z)?;
    let zb = |i: usize| z[i].conj();
    ComplexTensor::from_fn(mixed_axes(z.len()), |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        C64::from((delta(i, l) * delta(j, k) - delta(i, j) * delta(k, l)) / (r * r))
            + (delta(i, j) * zb(k) * z[l] + delta(k, l) * zb(i) * z[j] - delta(i, l) * z[j] * zb(k) - delta(j, k) * zb(i) * z[l])
                / (r * r * r)
    })
}

pub fn u_beta(z: &[C64]) -> Result<ComplexTensor> {
    let r = norm_sqr(z)?;
    let zb = |i: usize| z[i].conj();
    ComplexTensor::from_fn(mixed_axes(z.len()), |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        C64::from(-delta(i, j) * delta(k, l) / (r * r)) + (delta(i, j) * zb(k) * z[l] + delta(k, l) * zb(i) * z[j]) / (r * r * r)
            - zb(i) * z[j] * zb(k) * z[l] / (r * r * r * r)
    })
}

/// `Ω^B_{i j̄ k l̄} = α U_α + 2β U_β`, axes `[i, j̄, k, l̄]`. All pure-type components vanish.
pub fn bismut_curvature_at(h: &HopfMetric, z: &[C64]) -> Result<ComplexTensor> {
    h.point(z)?;
    let a = u_alpha(z)?.scale(C64::from(h.alpha))?;
    let b = u_beta(z)?.scale(C64::from(2.0 * h.beta))?;
    a.add(&b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionalValue {
    pub value: f64,
    pub z: Vec<C64>,
    pub xi: Vec<C64>,
    pub nu: Vec<C64>,
}

/// `Ω^B(ξ, ξ̄, ν, ν̄)`.
pub fn bisectional(h: &HopfMetric, z: &[C64], xi: &[C64], nu: &[C64]) -> Result<BisectionalValue> {
    if xi.len() != h.n || nu.len() != h.n {
        return Err(HermError::Shape("vector length differs from n".into()));
    }
    let om = bismut_curvature_at(h, z)?;
    Ok(BisectionalValue {
        value: bisectional_form(&om, xi, nu).re,
        z: z.to_vec(),
        xi: xi.to_vec(),
        nu: nu.to_vec(),
    })
}

/// `U_β(ξ,ξ̄,ν,ν̄) = (|ξ|²|z|² − |ξ·z|²)(|ν·z|² − |ν|²|z|²)/|z|⁸ ≤ 0`.
pub fn u_beta_factored(z: &[C64], xi: &[C64], nu: &[C64]) -> Result<f64> {
    let r = norm_sqr(z)?;
    let a = hdot(xi, xi).re * r - hdot(xi, z).norm_sqr();
    let b = hdot(nu, z).norm_sqr() - hdot(nu, nu).re * r;
    Ok(a * b / (r * r * r * r))
}

/// At `β = −α/2`: `Ω^B(ξ,ξ̄,ν,ν̄) = (α/|z|⁸)|(ξ·ν)|z|² − (ξ·z)(z·ν)|²`.
pub fn half_ratio_bisectional(alpha: f64, z: &[C64], xi: &[C64], nu: &[C64]) -> Result<f64> {
    let r = norm_sqr(z)?;
    let w = hdot(xi, nu) * r - hdot(xi, z) * hdot(z, nu);
    Ok(alpha * w.norm_sqr() / (r * r * r * r))
}

#[derive(Clone, Debug)]
pub struct ChernData {
    /// `∇_{∂_i}∂_j`, axes `[k, i, j]`.
    pub christoffel: ComplexTensor,
    /// `Ω_{i j̄ k}{}^l`, axes `[i, j̄, k, l]`.
    pub curvature: ComplexTensor,
    /// `Ω_{i j̄ k l̄} = Ω_{i j̄ k}{}^m g_{m l̄}`.
    pub curvature_lowered: ComplexTensor,
    /// `Θ^(2)` from its closed form.
    pub theta: CMatrix,
    /// `g^{k l̄} Ω_{k l̄ i j̄}` contracted from `curvature_lowered`.
    pub s: CMatrix,
    /// `T^k_{ij}`, axes `[k, i, j]`.
    pub torsion: ComplexTensor,
    /// `T_{i j k̄} = T^m_{ij} g_{m k̄}`.
    pub torsion_lowered: ComplexTensor,
    /// `Q¹..Q⁴` from their closed forms.
    pub q_closed: [CMatrix; 4],
    /// `Q¹..Q⁴` contracted from the torsion.
    pub q: [CMatrix; 4],
}

pub fn chern_data_at(h: &HopfMetric, z: &[C64]) -> Result<ChernData> {
    let r = h.point(z)?;
    let n = h.n;
    let nf = n as f64;
    let g = h.gamma();
    let zb = |i: usize| z[i].conj();
    let metric = h.metric(z)?;
    let christoffel = h.chern_christoffels(z)?;
    let curvature = ComplexTensor::from_fn(vec![Axis::hol(n), Axis::anti(n), Axis::hol(n), Axis::hol(n)], |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        let t1 = delta(k, l) * (C64::from(delta(i, j)) - zb(i) * z[j] / r);
        let t2 = g * delta(i, l) * (C64::from(delta(j, k)) - zb(k) * z[j] / r);
        let t3 = g * ((delta(j, k) * zb(i) + delta(i, j) * zb(k)) * r - 2.0 * zb(i) * z[j] * zb(k)) / (r * r) * z[l];
        (t1 - t2 + t3) / r
    })?;
    let curvature_lowered = ComplexTensor::from_fn(mixed_axes(n), |x| {
        (0..n).map(|m| curvature.get(&[x[0], x[1], x[2], m]) * metric[(m, x[3])]).sum()
    })?;
    let g_inv = inverse_metric(&metric)?;
    let s = chern_trace(&curvature_lowered, &g_inv)?;
    let theta = CMatrix::from_fn(n, n, |i, j| {
        (C64::from((nf - 1.0 - g) * delta(i, j)) + g * (2.0 * nf - 1.0 + g * (nf - 1.0)) * zb(i) * z[j] / r) / r
    });
    let torsion = h.chern_torsion(z)?;
    let torsion_lowered = ComplexTensor::from_fn(vec![Axis::hol(n), Axis::hol(n), Axis::anti(n)], |x| {
        (0..n).map(|m| torsion.get(&[m, x[0], x[1]]) * metric[(m, x[2])]).sum()
    })?;
    let q = torsion_quadratics(&torsion_lowered, &g_inv);
    let g1 = (g + 1.0).powi(2);
    let ab = h.alpha / (h.alpha + h.beta);
    let bb = h.beta / (h.alpha + h.beta);
    let d = |i: usize, j: usize| C64::from(delta(i, j));
    let p = |i: usize, j: usize| zb(i) * z[j] / r;
    let q_closed = [
        CMatrix::from_fn(n, n, |i, j| g1 / r * (ab * d(i, j) + (nf - 2.0 + bb) * p(i, j))),
        CMatrix::from_fn(n, n, |i, j| 2.0 * g1 * ab / r * (d(i, j) - p(i, j))),
        CMatrix::from_fn(n, n, |i, j| (nf - 1.0).powi(2) * g1 * p(i, j) / r),
        CMatrix::from_fn(n, n, |i, j| g1 * ab * (nf - 1.0) / r * (d(i, j) - p(i, j))),
    ];
    Ok(ChernData {
        christoffel,
        curvature,
        curvature_lowered,
        theta,
        s,
        torsion,
        torsion_lowered,
        q_closed,
        q,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeConsistency {
    /// Coefficients of `K` along `δ_{ij}/|z|²` and `z̄_i z_j/|z|⁴`.
    pub alpha_dot: f64,
    pub beta_dot: f64,
    pub alpha_dot_ode: f64,
    pub beta_dot_ode: f64,
    /// Distance of `K` from the span, including imaginary parts of the coefficients.
    pub span_residual: f64,
    /// `|S − Θ^(2)|` and `max_r |Q^r − Q^r_closed|`.
    pub theta_defect: f64,
    pub q_defect: f64,
    pub defect: f64,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|w| w.norm()).fold(0.0, f64::max)
}

/// Decomposes `K = A δ/|z|² + B z̄z/|z|⁴` and returns `(A, B, residual)`.
pub fn decompose(k: &CMatrix, z: &[C64]) -> Result<(C64, C64, f64)> {
    let r = norm_sqr(z)?;
    let n = z.len();
    let e1 = CMatrix::from_fn(n, n, |i, j| C64::from(delta(i, j) / r));
    let e2 = CMatrix::from_fn(n, n, |i, j| z[i].conj() * z[j] / (r * r));
    let ip = |a: &CMatrix, b: &CMatrix| -> C64 { a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum() };
    let (g11, g12, g22) = (ip(&e1, &e1), ip(&e1, &e2), ip(&e2, &e2));
    let (b1, b2) = (ip(&e1, k), ip(&e2, k));
    let det = g11 * g22 - g12 * g12.conj();
    if det.norm() < 1e-300 {
        return Err(HermError::Shape("degenerate basis".into()));
    }
    let a = (g22 * b1 - g12 * b2) / det;
    let b = (g11 * b2 - g12.conj() * b1) / det;
    let res = max_abs(&(k - &e1 * a - &e2 * b));
    Ok((a, b, res))
}

/// Compares the contracted HCF tangent with the `(α̇, β̇)` system. Raises a
/// formula alarm when the total defect exceeds the consistency tolerance.
pub fn verify_general_ode_consistency(h: &HopfMetric, fc: &FlowCoefficients, z: &[C64]) -> Result<OdeConsistency> {
    let cd = chern_data_at(h, z)?;
    let mut k = -cd.s.clone();
    for (r, w) in fc.as_array().iter().enumerate() {
        k += &cd.q[r] * C64::from(*w);
    }
    let (a, b, res) = decompose(&k, z)?;
    let (ad, bd) = ode_rhs(h.alpha, h.beta, fc, h.n)?;
    let span_residual = res + a.im.abs() + b.im.abs();
    let theta_defect = max_abs(&(&cd.s - &cd.theta));
    let q_defect = (0..4).map(|r| max_abs(&(&cd.q[r] - &cd.q_closed[r]))).fold(0.0, f64::max);
    let rs = norm_sqr(z)?;
    // K scales like 1/|z|²; compare in units where |z| = 1
    let defect = rs * (span_residual + theta_defect + q_defect) + (a.re - ad).abs() + (b.re - bd).abs();
    let out = OdeConsistency {
        alpha_dot: a.re,
        beta_dot: b.re,
        alpha_dot_ode: ad,
        beta_dot_ode: bd,
        span_residual,
        theta_defect,
        q_defect,
        defect,
    };
    if defect > tol::ODE_CONSISTENCY * (1.0 + ad.abs() + bd.abs()) {
        return Err(HermError::FormulaAlarm {
            defect,
            detail: format!("{out:?}"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::flow::named_flow;
    use crate::sampling::{annulus_point, complex_vector, seeded};
    use proptest::prelude::*;
    use rand::Rng;

    fn e(n: usize, i: usize) -> Vec<C64> {
        (0..n).map(|k| C64::from(delta(k, i))).collect()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HopfMetric::new(3, 1.0, -1.0).is_err());
        assert!(HopfMetric::new(3, 1.0, -2.0).is_err());
        assert!(HopfMetric::new(3, 0.0, 0.0).is_err());
        assert!(HopfMetric::new(1, 1.0, 0.0).is_err());
        let h = HopfMetric::new(2, 1.0, 0.0).unwrap();
        assert!(matches!(bismut_curvature_at(&h, &[c(0.0, 0.0); 2]), Err(HermError::PointTooClose(_))));
    }

    #[test]
    fn standard_metric_n2_is_flat() {
        let h = HopfMetric::standard(2).unwrap();
        let mut rng = seeded(1);
        for _ in 0..20 {
            let z = annulus_point(&mut rng, 2);
            assert!(bismut_curvature_at(&h, &z).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn explicit_components_n3() {
        let z = e(3, 2);
        for (a, b) in [(1.0, 0.0), (2.0, 0.5), (1.0, -0.5)] {
            let h = HopfMetric::new(3, a, b).unwrap();
            let om = bismut_curvature_at(&h, &z).unwrap();
            assert!((om.get(&[0, 0, 1, 1]) - C64::from(-a - 2.0 * b)).norm() < 1e-14);
        }
        assert_eq!(u_alpha(&z).unwrap().get(&[0, 0, 1, 1]), C64::from(-1.0));
        assert_eq!(u_beta(&z).unwrap().get(&[0, 0, 1, 1]), C64::from(-1.0));
    }

    #[test]
    fn violation_at_two_zero_coordinates() {
        for eps in [0.1, 0.01] {
            let h = HopfMetric::new(3, 1.0, -0.5 + eps).unwrap();
            let z = vec![c(0.0, 0.0), c(0.0, 0.0), c(0.6, -0.8) * 1.3];
            let r = norm_sqr(&z).unwrap();
            let v = bisectional(&h, &z, &e(3, 0), &e(3, 1)).unwrap().value;
            assert!((v + 2.0 * eps / (r * r)).abs() < 1e-12);
        }
    }

    #[test]
    fn half_ratio_examples() {
        let h = HopfMetric::new(3, 1.0, -0.5).unwrap();
        let v = bisectional(&h, &e(3, 2), &e(3, 0), &e(3, 0)).unwrap().value;
        assert!((v - 1.0).abs() < 1e-14);
        let mut rng = seeded(2);
        for _ in 0..200 {
            let n = rng.gen_range(2..6);
            let alpha = rng.gen_range(0.2..3.0);
            let h = HopfMetric::new(n, alpha, -alpha / 2.0).unwrap();
            let z = annulus_point(&mut rng, n);
            let (xi, nu) = (complex_vector(&mut rng, n), complex_vector(&mut rng, n));
            let v = bisectional(&h, &z, &xi, &nu).unwrap().value;
            let w = half_ratio_bisectional(alpha, &z, &xi, &nu).unwrap();
            assert!((v - w).abs() < 1e-12 * (1.0 + w.abs()), "{v} {w}");
        }
    }

    #[test]
    fn ricci_trace_of_standard_metric() {
        // g^{k l̄} Ω(ξ, ξ̄, ∂_k, ∂̄_l) = (2−n)(|ξ|²|z|² − |ξ·z|²)/|z|⁴ for g_H
        let mut rng = seeded(3);
        let n = 3;
        let h = HopfMetric::standard(n).unwrap();
        let z = annulus_point(&mut rng, n);
        let r = norm_sqr(&z).unwrap();
        let om = bismut_curvature_at(&h, &z).unwrap();
        let ginv = h.inverse(&z).unwrap();
        let xi = complex_vector(&mut rng, n);
        let mut tr = C64::from(0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        tr += om.get(&[i, j, k, l]) * xi[i] * xi[j].conj() * ginv[(k, l)];
                    }
                }
            }
        }
        let want = (2.0 - n as f64) / (r * r) * (hdot(&xi, &xi).re * r - hdot(&xi, &z).norm_sqr());
        assert!((tr.re - want).abs() < 1e-12, "{tr} {want}");
        assert!(tr.re < 0.0);
    }

    #[test]
    fn chern_examples() {
        let h = HopfMetric::standard(2).unwrap();
        let z = e(2, 0);
        let t = h.chern_torsion(&z).unwrap();
        assert_eq!(t.get(&[1, 0, 1]), C64::from(-1.0));
        assert_eq!(h.chern_christoffels(&z).unwrap().get(&[0, 0, 0]), C64::from(-1.0));
        let h3 = HopfMetric::standard(3).unwrap();
        let cd = chern_data_at(&h3, &e(3, 2)).unwrap();
        assert!((cd.theta[(0, 0)] - C64::from(2.0)).norm() < 1e-15);
        let h11 = HopfMetric::new(3, 1.0, 1.0).unwrap();
        assert!((h11.chern_christoffels(&e(3, 2)).unwrap().get(&[2, 2, 2]) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn q_terms_vanish_at_boundary() {
        let z = vec![c(0.3, 0.1), c(-0.7, 0.2), c(0.5, 0.5)];
        let h = HopfMetric::new(3, 1.0, -1.0 + 1e-9).unwrap();
        let cd = chern_data_at(&h, &z).unwrap();
        for q in &cd.q_closed {
            assert!(max_abs(q) < 1e-8);
        }
    }

    #[test]
    fn ode_consistency_examples() {
        let z = vec![c(0.3, 0.1), c(-0.7, 0.2), c(0.5, 0.5)];
        let g = named_flow("gradient").unwrap();
        let r = verify_general_ode_consistency(&HopfMetric::new(3, 1.0, -0.5).unwrap(), &g, &z).unwrap();
        assert!((r.alpha_dot + 1.5).abs() < 1e-10, "{r:?}");
        let p = named_flow("pluriclosed").unwrap();
        let r = verify_general_ode_consistency(&HopfMetric::new(2, 1.0, 0.0).unwrap(), &p, &z[..2]).unwrap();
        assert!(r.alpha_dot.abs() < 1e-10 && r.beta_dot.abs() < 1e-10);
    }

    #[test]
    fn scale_degree() {
        let mut rng = seeded(4);
        let h = HopfMetric::new(3, 1.3, 0.4).unwrap();
        let z = annulus_point(&mut rng, 3);
        let lam = c(1.7, -0.6);
        let zl: Vec<C64> = z.iter().map(|w| w * lam).collect();
        let a = bismut_curvature_at(&h, &z).unwrap();
        let b = bismut_curvature_at(&h, &zl).unwrap().scale(C64::from(lam.norm_sqr().powi(2))).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn inverse_is_inverse(seed in any::<u64>(), n in 2usize..6, alpha in 0.1f64..5.0, gamma in -0.95f64..3.0) {
            let mut rng = seeded(seed);
            let h = HopfMetric::with_ratio(n, alpha, gamma).unwrap();
            let z = annulus_point(&mut rng, n);
            let prod = h.metric(&z).unwrap() * h.inverse(&z).unwrap().transpose();
            prop_assert!((prod - CMatrix::identity(n, n)).iter().all(|w| w.norm() < 1e-12));
        }

        #[test]
        fn u_beta_nonpositive_and_symmetric(seed in any::<u64>(), n in 2usize..6, alpha in 0.1f64..5.0, gamma in -0.95f64..3.0) {
            let mut rng = seeded(seed);
            let z = annulus_point(&mut rng, n);
            let (xi, nu) = (complex_vector(&mut rng, n), complex_vector(&mut rng, n));
            let r = norm_sqr(&z).unwrap();
            let scale = hdot(&xi, &xi).re * hdot(&nu, &nu).re / (r * r);
            let ub = bisectional_form(&u_beta(&z).unwrap(), &xi, &nu);
            prop_assert!(ub.re <= 1e-12 * scale);
            prop_assert!((ub.re - u_beta_factored(&z, &xi, &nu).unwrap()).abs() < 1e-12 * scale);
            // vanishes along z
            let lam = c(0.3, -1.1);
            let zl: Vec<C64> = z.iter().map(|w| w * lam).collect();
            prop_assert!(bisectional_form(&u_beta(&z).unwrap(), &zl, &nu).norm() < 1e-12 * scale);
            let h = HopfMetric::with_ratio(n, alpha, gamma).unwrap();
            let a = bisectional(&h, &z, &xi, &nu).unwrap().value;
            let b = bisectional(&h, &z, &nu, &xi).unwrap().value;
            let scale = scale * (alpha + gamma.abs() * alpha) * 4.0;
            prop_assert!((a - b).abs() < 1e-12 * scale);
            prop_assert!(bisectional(&h, &z, &zl, &nu).unwrap().value.abs() < 1e-12 * scale);
            prop_assert!(bisectional(&h, &z, &xi, &zl).unwrap().value.abs() < 1e-12 * scale);
        }

        #[test]
        fn u_alpha_vanishes_in_dimension_two(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let z = annulus_point(&mut rng, 2);
            prop_assert!(u_alpha(&z).unwrap().max_abs() < 1e-13);
        }

        #[test]
        fn s_is_theta_and_q_match(seed in any::<u64>(), n in 2usize..5, alpha in 0.1f64..5.0, gamma in -0.95f64..3.0) {
            let mut rng = seeded(seed);
            let h = HopfMetric::with_ratio(n, alpha, gamma).unwrap();
            let z = annulus_point(&mut rng, n);
            let cd = chern_data_at(&h, &z).unwrap();
            prop_assert!(max_abs(&(&cd.s - &cd.theta)) < 1e-11);
            for r in 0..4 {
                prop_assert!(max_abs(&(&cd.q[r] - &cd.q_closed[r])) < 1e-11, "Q{}", r + 1);
            }
        }
    }
}

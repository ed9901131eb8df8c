//! Sign of the bisectional form `Ω(ξ, ξ̄, ν, ν̄)` over unit vectors.
//!
//! For fixed `ν` the form is the Hermitian quadratic `ξ ↦ ξ^† M(ν) ξ` with
//! `M(ν)_{j i} = Ω_{i j̄ k l̄} ν^k ν̄^l`, so each half-step of the alternating
//! scheme is an exact eigenvector problem and the objective is monotone.

use crate::hopf::{bismut_curvature_at, HopfMetric};
use crate::invariant::{check_cplx, CplxReport, CurvatureTensor};
use crate::sampling::{annulus_point, seeded, substream, unit_vector};
use crate::tensor::ComplexTensor;
use crate::tol::Tolerances;
use crate::{HermError, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `γ_n`: `g(α, γα)` is non-negative iff `γ ≤ γ_n`.
pub fn gamma_threshold(n: usize) -> f64 {
    assert!(n >= 2, "gamma_threshold needs n ≥ 2");
    if n == 2 {
        0.0
    } else {
        -0.5
    }
}

/// `Σ Ω_{i j̄ k l̄} ξ^i ξ̄^j ν^k ν̄^l` for a block with axes `[i, j̄, k, l̄]`.
pub fn bisectional_form(omega: &ComplexTensor, xi: &[C64], nu: &[C64]) -> C64 {
    let n = xi.len();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let a = xi[i] * xi[j].conj();
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    s += omega.get(&[i, j, k, l]) * a * nu[k] * nu[l].conj();
                }
            }
        }
    }
    s
}

/// `M(ν)` (`first = true`: the form in `ξ` at fixed `ν`) or `M(ξ)` (the form in `ν`).
fn partial_matrix(omega: &ComplexTensor, w: &[C64], first: bool) -> DMatrix<C64> {
    let n = w.len();
    DMatrix::from_fn(n, n, |row, col| {
        // row/col are the conjugated/unconjugated slots: entry (j, i) = Σ Ω_{i j̄ ..}
        let (i, j) = (col, row);
        let mut s = C64::new(0.0, 0.0);
        for p in 0..n {
            for q in 0..n {
                let c = w[p] * w[q].conj();
                s += if first {
                    omega.get(&[i, j, p, q]) * c
                } else {
                    omega.get(&[p, q, i, j]) * c
                };
            }
        }
        s
    })
}

fn hermitian_part(m: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
    let defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    ((m + m.adjoint()) * C64::new(0.5, 0.0), defect)
}

/// Extreme eigenpair of a Hermitian matrix.
fn extreme_eigen(m: &DMatrix<C64>, maximize: bool) -> (f64, Vec<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut best = 0;
    for k in 1..eig.eigenvalues.len() {
        let better = if maximize {
            eig.eigenvalues[k] > eig.eigenvalues[best]
        } else {
            eig.eigenvalues[k] < eig.eigenvalues[best]
        };
        if better {
            best = k;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).iter().copied().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NonNegative,
    NonPositive,
    Indefinite,
    Flat,
    Indeterminate,
}

impl Verdict {
    /// Non-negative in the weak sense (flat included).
    pub fn is_nonnegative(self) -> bool {
        matches!(self, Verdict::NonNegative | Verdict::Flat)
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::NonNegative => "non-negative",
            Verdict::NonPositive => "non-positive",
            Verdict::Indefinite => "indefinite",
            Verdict::Flat => "flat",
            Verdict::Indeterminate => "indeterminate",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "non-negative" => Ok(Verdict::NonNegative),
            "non-positive" => Ok(Verdict::NonPositive),
            "indefinite" => Ok(Verdict::Indefinite),
            "flat" => Ok(Verdict::Flat),
            "indeterminate" => Ok(Verdict::Indeterminate),
            other => Err(HermError::UnknownName(format!("verdict '{other}'"))),
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub xi: Vec<C64>,
    pub nu: Vec<C64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignClassification {
    pub verdict: Verdict,
    pub min_value: f64,
    pub max_value: f64,
    pub min_witness: Option<Witness>,
    pub max_witness: Option<Witness>,
    pub tolerance: f64,
    /// Largest `|Ω|` component.
    pub magnitude: f64,
    pub starts: usize,
    /// Starts that hit the iteration cap without becoming stationary.
    pub nonstationary: usize,
    /// Largest increase of the objective seen in a minimizing half-step (should be round-off).
    pub monotonicity_defect: f64,
    /// Largest `|M − M^†|` over the matrices formed.
    pub hermitian_defect: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tolerances: Tolerances,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            starts: 64,
            seed: 0x5eed,
            max_iter: 200,
            tolerances: Tolerances::default(),
        }
    }
}

struct Run {
    value: f64,
    xi: Vec<C64>,
    nu: Vec<C64>,
    stationary: bool,
    monotonicity: f64,
    hermitian: f64,
}

fn alternate(omega: &ComplexTensor, mut xi: Vec<C64>, mut nu: Vec<C64>, maximize: bool, max_iter: usize, scale: f64) -> Run {
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut value = bisectional_form(omega, &xi, &nu).re;
    let mut run = Run {
        value,
        xi: xi.clone(),
        nu: nu.clone(),
        stationary: false,
        monotonicity: 0.0,
        hermitian: 0.0,
    };
    for _ in 0..max_iter {
        let (m, d1) = hermitian_part(&partial_matrix(omega, &nu, true));
        let (v1, x) = extreme_eigen(&m, maximize);
        xi = x;
        let (m, d2) = hermitian_part(&partial_matrix(omega, &xi, false));
        let (v2, y) = extreme_eigen(&m, maximize);
        nu = y;
        run.hermitian = run.hermitian.max(d1).max(d2);
        run.monotonicity = run.monotonicity.max(sign * (v1 - value)).max(sign * (v2 - v1));
        let change = (value - v2).abs();
        value = v2;
        if change <= 1e-14 * scale {
            run.stationary = true;
            break;
        }
    }
    run.value = bisectional_form(omega, &xi, &nu).re;
    run.xi = xi;
    run.nu = nu;
    run
}

fn check_block(omega: &ComplexTensor) -> Result<usize> {
    let d = omega.dims();
    if d.len() != 4 || d.iter().any(|&k| k != d[0]) || d[0] == 0 {
        return Err(HermError::Shape(format!("bisectional block must be n×n×n×n, got {d:?}")));
    }
    Ok(d[0])
}

/// Random pairs screened per start; the alternation begins at the most extreme one.
/// Plain alternation can settle on a zero row of the form and miss a narrow negative region.
const SCREEN: usize = 32;

/// Classifies a block `Ω_{i j̄ k l̄}` (axes `[i, j̄, k, l̄]`).
pub fn classify_block(omega: &ComplexTensor, opts: &ClassifyOptions) -> Result<SignClassification> {
    let n = check_block(omega)?;
    let magnitude = omega.max_abs();
    let tolerance = opts.tolerances.sign_rel * magnitude.max(1.0);
    let scale = magnitude.max(1e-300);
    let starts = opts.starts.max(1);
    let runs: Vec<(Run, Run)> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(opts.seed, k as u64);
            let draws: Vec<(Vec<C64>, Vec<C64>, f64)> = (0..SCREEN)
                .map(|_| {
                    let (xi, nu) = (unit_vector(&mut rng, n), unit_vector(&mut rng, n));
                    let v = bisectional_form(omega, &xi, &nu).re;
                    (xi, nu, v)
                })
                .collect();
            let a = draws.iter().min_by(|x, y| x.2.total_cmp(&y.2)).expect("SCREEN ≥ 1");
            let b = draws.iter().max_by(|x, y| x.2.total_cmp(&y.2)).expect("SCREEN ≥ 1");
            let lo = alternate(omega, a.0.clone(), a.1.clone(), false, opts.max_iter, scale);
            let hi = alternate(omega, b.0.clone(), b.1.clone(), true, opts.max_iter, scale);
            (lo, hi)
        })
        .collect();
    let lo = runs.iter().map(|r| &r.0).min_by(|a, b| a.value.total_cmp(&b.value)).expect("starts ≥ 1");
    let hi = runs.iter().map(|r| &r.1).max_by(|a, b| a.value.total_cmp(&b.value)).expect("starts ≥ 1");
    let lo_stuck = runs.iter().filter(|r| !r.0.stationary).count();
    let hi_stuck = runs.iter().filter(|r| !r.1.stationary).count();
    let monotonicity_defect = runs.iter().map(|r| r.0.monotonicity.max(r.1.monotonicity)).fold(0.0, f64::max);
    let hermitian_defect = runs.iter().map(|r| r.0.hermitian.max(r.1.hermitian)).fold(0.0, f64::max);
    let (min_value, max_value) = (lo.value, hi.value);
    let verdict = if magnitude <= tolerance {
        Verdict::Flat
    } else if min_value < -tolerance && max_value > tolerance {
        Verdict::Indefinite
    } else if min_value >= -tolerance {
        if lo_stuck > 0 {
            Verdict::Indeterminate
        } else {
            Verdict::NonNegative
        }
    } else if hi_stuck > 0 {
        Verdict::Indeterminate
    } else {
        Verdict::NonPositive
    };
    let wit = |r: &Run| Witness {
        xi: r.xi.clone(),
        nu: r.nu.clone(),
        value: r.value,
    };
    Ok(SignClassification {
        verdict,
        min_value,
        max_value,
        min_witness: Some(wit(lo)),
        max_witness: Some(wit(hi)),
        tolerance,
        magnitude,
        starts,
        nonstationary: lo_stuck + hi_stuck,
        monotonicity_defect,
        hermitian_defect,
    })
}

/// Refused unless (Cplx) holds: the `(1,1)⊗(1,1)` block would not be the whole tensor.
pub fn classify(omega: &CurvatureTensor) -> Result<SignClassification> {
    classify_with(omega, &ClassifyOptions::default())
}

pub fn classify_with(omega: &CurvatureTensor, opts: &ClassifyOptions) -> Result<SignClassification> {
    let rep: CplxReport = omega.check_cplx_with(&opts.tolerances);
    if !rep.satisfied {
        return Err(HermError::CplxViolated {
            max_violation: rep.max_violation,
        });
    }
    classify_block(&omega.mixed_block(), opts)
}

/// `G^{-1/2}` for a Hermitian positive definite `G`.
fn inverse_sqrt(g: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let eig = SymmetricEigen::new(g.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(HermError::InadmissibleMetric(format!("metric eigenvalues {:?}", eig.eigenvalues.as_slice())));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.powf(-0.5), 0.0)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// The block in a frame that is unitary for `g` (entries `g_{i j̄}`), with the matrix `Q`
/// taking unitary coordinates back to frame coordinates (`ξ = Qξ'`).
pub fn unitary_block(omega: &ComplexTensor, g: &DMatrix<C64>) -> Result<(ComplexTensor, DMatrix<C64>)> {
    let n = check_block(omega)?;
    if g.nrows() != n || g.ncols() != n {
        return Err(HermError::Shape(format!("metric is {}×{}, block has n = {n}", g.nrows(), g.ncols())));
    }
    // |ξ|² = ξᵀ G ξ̄ = 1 for ξ = Qξ' with Q = (Gᵀ)^{-1/2}
    let q = inverse_sqrt(&g.transpose())?;
    let mut t = omega.clone();
    for axis in 0..4 {
        let conj = axis % 2 == 1;
        let mut next = t.clone();
        for ix in t.indices() {
            let mut s = C64::new(0.0, 0.0);
            let mut jx = ix.clone();
            for p in 0..n {
                jx[axis] = p;
                let c = if conj { q[(p, ix[axis])].conj() } else { q[(p, ix[axis])] };
                s += t.get(&jx) * c;
            }
            next.set(&ix, s);
        }
        t = next;
    }
    Ok((t, q))
}

/// Classification in a `g`-unitary frame. The sign is frame independent; the tolerance
/// then scales with the intrinsic size of the curvature rather than with the frame,
/// which keeps nearly degenerate metrics resolvable. Witnesses are returned in frame
/// coordinates, normalized for `g`.
pub fn classify_unitary(omega: &CurvatureTensor, g: &DMatrix<C64>, opts: &ClassifyOptions) -> Result<SignClassification> {
    let rep: CplxReport = omega.check_cplx_with(&opts.tolerances);
    if !rep.satisfied {
        return Err(HermError::CplxViolated {
            max_violation: rep.max_violation,
        });
    }
    let (block, q) = unitary_block(&omega.mixed_block(), g)?;
    let mut c = classify_block(&block, opts)?;
    let back = |w: &mut Option<Witness>| {
        if let Some(w) = w {
            let map = |v: &[C64]| -> Vec<C64> { (0..v.len()).map(|i| (0..v.len()).map(|k| q[(i, k)] * v[k]).sum()).collect() };
            w.xi = map(&w.xi);
            w.nu = map(&w.nu);
        }
    };
    back(&mut c.min_witness);
    back(&mut c.max_witness);
    Ok(c)
}

/// Merges per-point classifications: a negative value anywhere and a positive value
/// anywhere make the result indefinite.
pub fn merge(parts: &[SignClassification]) -> Option<SignClassification> {
    let lo = parts.iter().min_by(|a, b| a.min_value.total_cmp(&b.min_value))?;
    let hi = parts.iter().max_by(|a, b| a.max_value.total_cmp(&b.max_value))?;
    let tolerance = parts.iter().map(|p| p.tolerance).fold(0.0, f64::max);
    let magnitude = parts.iter().map(|p| p.magnitude).fold(0.0, f64::max);
    let any = |v: Verdict| parts.iter().any(|p| p.verdict == v);
    let verdict = if parts.iter().all(|p| p.verdict == Verdict::Flat) {
        Verdict::Flat
    } else if lo.min_value < -tolerance && hi.max_value > tolerance {
        Verdict::Indefinite
    } else if any(Verdict::Indeterminate) {
        Verdict::Indeterminate
    } else if lo.min_value >= -tolerance {
        Verdict::NonNegative
    } else {
        Verdict::NonPositive
    };
    Some(SignClassification {
        verdict,
        min_value: lo.min_value,
        max_value: hi.max_value,
        min_witness: lo.min_witness.clone(),
        max_witness: hi.max_witness.clone(),
        tolerance,
        magnitude,
        starts: parts.iter().map(|p| p.starts).sum(),
        nonstationary: parts.iter().map(|p| p.nonstationary).sum(),
        monotonicity_defect: parts.iter().map(|p| p.monotonicity_defect).fold(0.0, f64::max),
        hermitian_defect: parts.iter().map(|p| p.hermitian_defect).fold(0.0, f64::max),
    })
}

/// Classifies `Ω^B` of `g(α,β)` at `points` sampled points of the fundamental annulus.
/// The metric is `U(n)`-invariant, so every point is equivalent up to scale; the sample
/// guards against accidental degeneracy of a single choice.
pub fn classify_hopf(h: &HopfMetric, points: usize, opts: &ClassifyOptions) -> Result<SignClassification> {
    let mut rng = seeded(opts.seed ^ 0x4f0f);
    let zs: Vec<Vec<C64>> = (0..points.max(1)).map(|_| annulus_point(&mut rng, h.n)).collect();
    let parts = zs
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let block = bismut_curvature_at(h, z)?;
            classify_block(&block, &ClassifyOptions { seed: opts.seed.wrapping_add(k as u64), ..*opts })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(&parts).expect("at least one point"))
}

pub fn cplx_report(omega: &CurvatureTensor) -> CplxReport {
    check_cplx(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Axis;
    use crate::c;

    fn block(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> ComplexTensor {
        ComplexTensor::from_fn(vec![Axis::hol(n), Axis::anti(n), Axis::hol(n), Axis::anti(n)], |x| {
            C64::from(f(x[0], x[1], x[2], x[3]))
        })
        .unwrap()
    }

    #[test]
    fn unitary_frame_keeps_sign() {
        use crate::invariant::{bismut_curvature, CurvatureConvention, MetricCoefficients};
        let eqs = crate::catalog::instantiate("Np", "rho=1").unwrap();
        let opts = ClassifyOptions { starts: 16, ..ClassifyOptions::default() };
        let mut rng = seeded(4);
        for _ in 0..5 {
            let m: MetricCoefficients = crate::sampling::random_metric(&mut rng, &Default::default());
            let omega = bismut_curvature(&eqs, &m, CurvatureConvention::Swapped).unwrap();
            let g = m.frame_metric().unwrap();
            let a = classify_with(&omega, &opts).unwrap();
            let b = classify_unitary(&omega, g.hermitian(), &opts).unwrap();
            assert_eq!(a.verdict, b.verdict);
            // witnesses come back in frame coordinates with unit g-length
            let w = b.min_witness.unwrap();
            let block = omega.mixed_block();
            assert!((bisectional_form(&block, &w.xi, &w.nu).re - w.value).abs() < 1e-10);
            let h = g.hermitian();
            let len: C64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| h[(i, j)] * w.xi[i] * w.xi[j].conj()).sum();
            assert!((len.re - 1.0).abs() < 1e-10 && len.im.abs() < 1e-10);
        }
    }

    #[test]
    fn unitary_rejects_bad_metric() {
        let block = ComplexTensor::zeros(vec![Axis::hol(2), Axis::anti(2), Axis::hol(2), Axis::anti(2)]);
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(unitary_block(&block, &g).is_err());
        let g3 = DMatrix::<C64>::identity(3, 3);
        assert!(unitary_block(&block, &g3).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(gamma_threshold(2), 0.0);
        assert_eq!(gamma_threshold(3), -0.5);
        assert_eq!(gamma_threshold(7), -0.5);
    }

    #[test]
    fn simple_blocks() {
        let o = ClassifyOptions::default();
        let zero = block(2, |_, _, _, _| 0.0);
        assert_eq!(classify_block(&zero, &o).unwrap().verdict, Verdict::Flat);
        // δ_ij δ_kl: |ξ|²|ν|² > 0
        let pos = block(3, |i, j, k, l| if i == j && k == l { 1.0 } else { 0.0 });
        let r = classify_block(&pos, &o).unwrap();
        assert_eq!(r.verdict, Verdict::NonNegative);
        assert!((r.min_value - 1.0).abs() < 1e-12 && (r.max_value - 1.0).abs() < 1e-12);
        let neg = block(3, |i, j, k, l| if i == j && k == l { -1.0 } else { 0.0 });
        assert_eq!(classify_block(&neg, &o).unwrap().verdict, Verdict::NonPositive);
        // Ω_{1111} = 1, Ω_{1122} = −1
        let ind = block(2, |i, j, k, l| match (i, j, k, l) {
            (0, 0, 0, 0) => 1.0,
            (0, 0, 1, 1) => -1.0,
            _ => 0.0,
        });
        let r = classify_block(&ind, &o).unwrap();
        assert_eq!(r.verdict, Verdict::Indefinite);
        for w in [r.min_witness.unwrap(), r.max_witness.unwrap()] {
            assert!((bisectional_form(&ind, &w.xi, &w.nu).re - w.value).abs() < 1e-10);
        }
        assert!((r.min_value + 1.0).abs() < 1e-10 && (r.max_value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_shape() {
        let t = ComplexTensor::zeros(vec![Axis::hol(2), Axis::anti(3), Axis::hol(2), Axis::anti(2)]);
        assert!(classify_block(&t, &ClassifyOptions::default()).is_err());
    }

    #[test]
    fn hopf_examples() {
        let o = ClassifyOptions { starts: 16, ..Default::default() };
        let flat = classify_hopf(&HopfMetric::standard(2).unwrap(), 3, &o).unwrap();
        assert_eq!(flat.verdict, Verdict::Flat);
        let half = classify_hopf(&HopfMetric::new(3, 1.0, -0.5).unwrap(), 3, &o).unwrap();
        assert_eq!(half.verdict, Verdict::NonNegative);
        assert!(half.min_value.abs() < 1e-10);
        let w = half.min_witness.unwrap();
        // minimum at ξ ∥ z or ν ∥ z is not forced, but the value is zero
        assert!(w.value.abs() < 1e-10);
        let z = vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let b = bismut_curvature_at(&HopfMetric::new(3, 1.0, -0.5).unwrap(), &z).unwrap();
        assert!(bisectional_form(&b, &z, &[c(0.3, 0.1), c(-0.2, 0.5), c(0.1, 0.0)]).norm() < 1e-14);
    }

    #[test]
    fn threshold_grid() {
        let o = ClassifyOptions { starts: 24, ..Default::default() };
        for n in 2..=4 {
            for g in [-0.9, -0.6, -0.5, -0.4, -0.1, 0.0, 0.5] {
                let r = classify_hopf(&HopfMetric::with_ratio(n, 1.0, g).unwrap(), 2, &o).unwrap();
                assert_eq!(r.verdict.is_nonnegative(), g <= gamma_threshold(n), "n={n} γ={g}: {:?}", r.verdict);
                assert!(r.monotonicity_defect <= 1e-12 * (1.0 + r.magnitude));
                assert!(r.hermitian_defect <= 1e-10 * (1.0 + r.magnitude));
            }
        }
    }
}

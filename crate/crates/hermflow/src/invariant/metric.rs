//! Invariant Hermitian metrics.
//!
//! `2ω = √−1(r²φ^{11̄} + s²φ^{22̄} + t²φ^{33̄}) + uφ^{12̄} − ūφ^{21̄} + vφ^{23̄} − v̄φ^{32̄} + zφ^{13̄} − z̄φ^{31̄}`
//! with `ω(Z_i, Z̄_j) = √−1 g_{i j̄}`, so `g_{1 1̄} = r²/2`, `g_{1 2̄} = −√−1 u/2`, ...

use crate::hermitian::CMatrix;
use crate::notation::parse_complex;
use crate::tensor::{Axis, ComplexTensor};
use crate::{HermError, Result, C64, I};
use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricCoefficients {
    pub r2: f64,
    pub s2: f64,
    pub t2: f64,
    pub u: C64,
    pub v: C64,
    pub z: C64,
}

/// Which of `u, v, z` are forced to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricSlice {
    #[serde(default)]
    pub u: bool,
    #[serde(default)]
    pub v: bool,
    #[serde(default)]
    pub z: bool,
}

impl MetricSlice {
    pub const GENERIC: MetricSlice = MetricSlice {
        u: false,
        v: false,
        z: false,
    };
    pub const DIAGONAL: MetricSlice = MetricSlice {
        u: true,
        v: true,
        z: true,
    };

    /// Parse `"u,v,z"`-style lists; `""` or `generic` is the generic slice, `diagonal` is `u=v=z=0`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "generic" => return Ok(MetricSlice::GENERIC),
            "diagonal" => return Ok(MetricSlice::DIAGONAL),
            _ => {}
        }
        let mut out = MetricSlice::default();
        for tok in s.split(|ch| ch == ',' || ch == '=' || ch == ' ').filter(|t| !t.is_empty() && *t != "0") {
            match tok {
                "u" => out.u = true,
                "v" => out.v = true,
                "z" => out.z = true,
                other => return Err(HermError::InvalidParameter(format!("unknown slice coordinate {other}"))),
            }
        }
        Ok(out)
    }

    pub fn all() -> impl Iterator<Item = MetricSlice> {
        (0..8u8).map(|b| MetricSlice {
            u: b & 1 != 0,
            v: b & 2 != 0,
            z: b & 4 != 0,
        })
    }

    /// `self` forces at least what `other` forces.
    pub fn contains(&self, other: &MetricSlice) -> bool {
        (self.u || !other.u) && (self.v || !other.v) && (self.z || !other.z)
    }

    pub fn count(&self) -> usize {
        self.u as usize + self.v as usize + self.z as usize
    }

    pub fn holds(&self, m: &MetricCoefficients, tol: f64) -> bool {
        (!self.u || m.u.norm() <= tol) && (!self.v || m.v.norm() <= tol) && (!self.z || m.z.norm() <= tol)
    }

    pub fn apply(&self, mut m: MetricCoefficients) -> MetricCoefficients {
        if self.u {
            m.u = C64::new(0.0, 0.0);
        }
        if self.v {
            m.v = C64::new(0.0, 0.0);
        }
        if self.z {
            m.z = C64::new(0.0, 0.0);
        }
        m
    }
}

impl std::fmt::Display for MetricSlice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = [(self.u, "u"), (self.v, "v"), (self.z, "z")]
            .iter()
            .filter(|p| p.0)
            .map(|p| p.1)
            .collect();
        if names.is_empty() {
            write!(f, "generic")
        } else {
            write!(f, "{}=0", names.join("="))
        }
    }
}

impl MetricCoefficients {
    pub fn diagonal(r2: f64, s2: f64, t2: f64) -> Self {
        let z0 = C64::new(0.0, 0.0);
        MetricCoefficients {
            r2,
            s2,
            t2,
            u: z0,
            v: z0,
            z: z0,
        }
    }

    pub fn unit() -> Self {
        Self::diagonal(1.0, 1.0, 1.0)
    }

    /// `r2=2,u=0.1-0.3i`: unnamed coefficients keep their unit values. Validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Self::unit();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty() && *s != "unit") {
            let (key, val) = item
                .split_once('=')
                .ok_or_else(|| HermError::InvalidParameter(format!("metric entry {item:?} is not key=value")))?;
            let v = parse_complex(val)?;
            let real = |x: C64| -> Result<f64> {
                if x.im != 0.0 {
                    return Err(HermError::InvalidParameter(format!("{key} must be real")));
                }
                Ok(x.re)
            };
            match key.trim() {
                "r2" => m.r2 = real(v)?,
                "s2" => m.s2 = real(v)?,
                "t2" => m.t2 = real(v)?,
                "u" => m.u = v,
                "v" => m.v = v,
                "z" => m.z = v,
                other => return Err(HermError::InvalidParameter(format!("unknown metric coefficient {other:?}"))),
            }
        }
        m.validate()?;
        Ok(m)
    }

    /// `8√−1 det Ξ = r²s²t² + 2Re(√−1 ū v̄ z) − (r²|v|² + t²|u|² + s²|z|²)`.
    pub fn eight_i_det_xi(&self) -> f64 {
        self.r2 * self.s2 * self.t2 + 2.0 * (I * self.u.conj() * self.v.conj() * self.z).re
            - (self.r2 * self.v.norm_sqr() + self.t2 * self.u.norm_sqr() + self.s2 * self.z.norm_sqr())
    }

    /// Positivity inequalities; the error names the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.r2, self.s2, self.t2, self.u.re, self.u.im, self.v.re, self.v.im, self.z.re, self.z.im];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(HermError::InadmissibleMetric("non-finite coefficient".into()));
        }
        let checks: [(bool, &str); 7] = [
            (self.r2 > 0.0, "r2 > 0"),
            (self.s2 > 0.0, "s2 > 0"),
            (self.t2 > 0.0, "t2 > 0"),
            (self.r2 * self.s2 > self.u.norm_sqr(), "r2·s2 > |u|²"),
            (self.r2 * self.t2 > self.z.norm_sqr(), "r2·t2 > |z|²"),
            (self.s2 * self.t2 > self.v.norm_sqr(), "s2·t2 > |v|²"),
            (self.eight_i_det_xi() > 0.0, "8√−1·detΞ > 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(HermError::InadmissibleMetric(format!("{what} fails")));
            }
        }
        Ok(())
    }

    /// `g_{i j̄}` as a 3×3 Hermitian matrix.
    pub fn hermitian_matrix(&self) -> CMatrix {
        let h = [
            [I * self.r2, self.u, self.z],
            [-self.u.conj(), I * self.s2, self.v],
            [-self.z.conj(), -self.v.conj(), I * self.t2],
        ];
        CMatrix::from_fn(3, 3, |i, j| -I * h[i][j] * 0.5)
    }

    /// Inverse of [`Self::hermitian_matrix`].
    pub fn from_hermitian_matrix(g: &CMatrix) -> Self {
        MetricCoefficients {
            r2: 2.0 * g[(0, 0)].re,
            s2: 2.0 * g[(1, 1)].re,
            t2: 2.0 * g[(2, 2)].re,
            u: 2.0 * I * g[(0, 1)],
            z: 2.0 * I * g[(0, 2)],
            v: 2.0 * I * g[(1, 2)],
        }
    }

    pub fn frame_metric(&self) -> Result<FrameMetric> {
        self.validate()?;
        FrameMetric::from_hermitian(&self.hermitian_matrix())
    }

    /// Real coordinates `(r², s², t², Re u, Im u, Re v, Im v, Re z, Im z)`.
    pub fn to_array(&self) -> [f64; 9] {
        [self.r2, self.s2, self.t2, self.u.re, self.u.im, self.v.re, self.v.im, self.z.re, self.z.im]
    }

    pub fn from_array(a: &[f64; 9]) -> Self {
        MetricCoefficients {
            r2: a[0],
            s2: a[1],
            t2: a[2],
            u: C64::new(a[3], a[4]),
            v: C64::new(a[5], a[6]),
            z: C64::new(a[7], a[8]),
        }
    }
}

/// `g` over the complexified frame (`2n × 2n`, complex bilinear, only mixed blocks
/// nonzero), with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMetric {
    n: usize,
    herm: CMatrix,
    g: CMatrix,
    g_inv: CMatrix,
}

impl FrameMetric {
    /// From a Hermitian positive-definite `g_{i j̄}`.
    pub fn from_hermitian(herm: &CMatrix) -> Result<Self> {
        let n = herm.nrows();
        if herm.ncols() != n {
            return Err(HermError::Shape("metric matrix not square".into()));
        }
        let asym = (herm - herm.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > 1e-12 * (1.0 + herm.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
            return Err(HermError::InadmissibleMetric(format!("not Hermitian (defect {asym:.3e})")));
        }
        let eig = SymmetricEigen::new(herm.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(HermError::InadmissibleMetric("not positive definite".into()));
        }
        let nn = 2 * n;
        let mut g = CMatrix::zeros(nn, nn);
        for i in 0..n {
            for j in 0..n {
                g[(i, n + j)] = herm[(i, j)];
                g[(n + j, i)] = herm[(i, j)];
            }
        }
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| HermError::InadmissibleMetric("singular".into()))?;
        Ok(FrameMetric {
            n,
            herm: herm.clone(),
            g,
            g_inv,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `g_{i j̄}`.
    pub fn hermitian(&self) -> &CMatrix {
        &self.herm
    }

    /// `g(e_A, e_B)` over the frame.
    pub fn g(&self) -> &CMatrix {
        &self.g
    }

    pub fn g_inv(&self) -> &CMatrix {
        &self.g_inv
    }

    /// `g^{k l̄}` block.
    pub fn inverse_hermitian(&self) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, n, |k, l| self.g_inv[(k, n + l)])
    }

    /// Eigenvalue of `J` on frame slot `a`.
    #[inline]
    pub fn j(&self, a: usize) -> C64 {
        if a < self.n {
            I
        } else {
            -I
        }
    }

    pub fn tensor(&self) -> ComplexTensor {
        let n = self.n;
        ComplexTensor::from_fn(vec![Axis::frame(n), Axis::frame(n)], |ix| self.g[(ix[0], ix[1])]).expect("finite metric")
    }
}

/// `g` over the complexified frame as a tensor.
pub fn frame_metric(m: &MetricCoefficients) -> Result<ComplexTensor> {
    Ok(m.frame_metric()?.tensor())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn parse_text() {
        let m = MetricCoefficients::parse("r2=2, u=0.1-0.3i").unwrap();
        assert_eq!((m.r2, m.s2, m.u), (2.0, 1.0, c(0.1, -0.3)));
        assert_eq!(MetricCoefficients::parse("unit").unwrap(), MetricCoefficients::unit());
        assert!(MetricCoefficients::parse("r2=i").is_err());
        assert!(MetricCoefficients::parse("w=1").is_err());
        assert!(MetricCoefficients::parse("u=2").is_err());
    }

    #[test]
    fn diagonal_is_half_identity() {
        let g = frame_metric(&MetricCoefficients::unit()).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let want = if (a + 3 == b) || (b + 3 == a) { 0.5 } else { 0.0 };
                assert_eq!(g.get(&[a, b]), c(want, 0.0));
            }
        }
    }

    #[test]
    fn names_failed_inequality() {
        let mut m = MetricCoefficients::unit();
        m.u = c(2.0, 0.0);
        let e = m.validate().unwrap_err();
        assert_eq!(e, HermError::InadmissibleMetric("r2·s2 > |u|² fails".into()));
    }

    #[test]
    fn det_xi_example() {
        let mut m = MetricCoefficients::unit();
        m.z = c(0.5, 0.0);
        assert!((m.eight_i_det_xi() - 0.75).abs() < 1e-15);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn det_xi_matches_matrix_determinant() {
        // 8 det(g) = 8√−1 detΞ, since g = −√−1·Ξ with Ξ 3×3.
        let m = MetricCoefficients {
            r2: 1.3,
            s2: 0.8,
            t2: 1.7,
            u: c(0.2, -0.1),
            v: c(-0.3, 0.25),
            z: c(0.1, 0.3),
        };
        let det = m.hermitian_matrix().determinant();
        assert!((8.0 * det.re - m.eight_i_det_xi()).abs() < 1e-13);
        assert!(det.im.abs() < 1e-14);
    }

    #[test]
    fn hermitian_roundtrip() {
        let m = MetricCoefficients {
            r2: 1.3,
            s2: 0.8,
            t2: 1.7,
            u: c(0.2, -0.1),
            v: c(-0.3, 0.25),
            z: c(0.1, 0.3),
        };
        let back = MetricCoefficients::from_hermitian_matrix(&m.hermitian_matrix());
        for (a, b) in m.to_array().iter().zip(back.to_array().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_inverse() {
        let m = MetricCoefficients {
            r2: 1.3,
            s2: 0.8,
            t2: 1.7,
            u: c(0.2, -0.1),
            v: c(-0.3, 0.25),
            z: c(0.1, 0.3),
        };
        let f = m.frame_metric().unwrap();
        let id = f.g() * f.g_inv();
        for a in 0..6 {
            for b in 0..6 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((id[(a, b)] - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn slices() {
        assert_eq!(MetricSlice::parse("u,v,z").unwrap(), MetricSlice::DIAGONAL);
        assert_eq!(MetricSlice::parse("").unwrap(), MetricSlice::GENERIC);
        assert_eq!(MetricSlice::parse("generic").unwrap(), MetricSlice::GENERIC);
        assert_eq!(MetricSlice::parse("diagonal").unwrap(), MetricSlice::DIAGONAL);
        assert!(MetricSlice::DIAGONAL.contains(&MetricSlice::parse("v").unwrap()));
        assert!(!MetricSlice::parse("v").unwrap().contains(&MetricSlice::DIAGONAL));
        assert_eq!(MetricSlice::all().count(), 8);
        assert_eq!(MetricSlice::parse("v,z").unwrap().to_string(), "v=z=0");
    }
}

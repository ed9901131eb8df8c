//! Curvature of invariant connections and the (Cplx) test.

use super::connection::{ConnectionCoefficients, ConnectionKind};
use super::metric::FrameMetric;
use super::structure::BracketTable;
use crate::tensor::{Axis, ComplexTensor, FrameIndex};
use crate::tol::Tolerances;
use crate::C64;
use serde::{Deserialize, Serialize};

/// How `R(X,Y)` is lowered to a 4-tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurvatureConvention {
    /// `Ω(X,Y,Z,W) = g(R(X,Y)Z, W)`.
    Standard,
    /// `Ω(X,Y,Z,W) = g(R(X,Y)W, Z)`, the negative of `Standard` for metric connections.
    /// This is the normalization in which the solvmanifold calibration values
    /// (`(Ni)`: `Ω_{1 1̄ 1 1̄} = t²`, `(Np)`: `Ω_{1 1̄ 3 3̄} = t⁴(r²t²−|z|²)/16√−1 detΞ`) hold.
    #[default]
    Swapped,
}

/// Lowered curvature `Ω(e_A, e_B, e_C, e_D)` over the complexified frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    pub connection: ConnectionKind,
    pub convention: CurvatureConvention,
    n: usize,
    data: ComplexTensor,
}

/// `R(e_A,e_B)e_C = ∇_A∇_B e_C − ∇_B∇_A e_C − ∇_{[e_A,e_B]} e_C`, lowered.
pub fn curvature(
    conn: &ConnectionCoefficients,
    br: &BracketTable,
    g: &FrameMetric,
    convention: CurvatureConvention,
) -> CurvatureTensor {
    let n = br.n();
    let nn = 2 * n;
    let z = C64::new(0.0, 0.0);
    // R^F_{ABC}
    let mut r = vec![z; nn * nn * nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            for cc in 0..nn {
                for f in 0..nn {
                    let mut s = z;
                    for e in 0..nn {
                        s += conn.gamma(b, cc, e) * conn.gamma(a, e, f) - conn.gamma(a, cc, e) * conn.gamma(b, e, f)
                            - br.coeff(a, b, e) * conn.gamma(e, cc, f);
                    }
                    r[((a * nn + b) * nn + cc) * nn + f] = s;
                }
            }
        }
    }
    let gm = g.g();
    let std = |a: usize, b: usize, cc: usize, d: usize| -> C64 {
        (0..nn).map(|f| r[((a * nn + b) * nn + cc) * nn + f] * gm[(f, d)]).sum()
    };
    let data = ComplexTensor::from_fn(vec![Axis::frame(n); 4], |ix| match convention {
        CurvatureConvention::Standard => std(ix[0], ix[1], ix[2], ix[3]),
        CurvatureConvention::Swapped => std(ix[0], ix[1], ix[3], ix[2]),
    })
    .expect("finite curvature");
    CurvatureTensor {
        connection: conn.kind,
        convention,
        n,
        data,
    }
}

/// Outcome of the (Cplx) test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CplxReport {
    pub satisfied: bool,
    pub max_violation: f64,
    pub tolerance: f64,
    /// Worst pure-type component and its value.
    pub witness: Option<([FrameIndex; 4], C64)>,
}

impl CurvatureTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tensor(&self) -> &ComplexTensor {
        &self.data
    }

    pub fn component(&self, a: FrameIndex, b: FrameIndex, c: FrameIndex, d: FrameIndex) -> C64 {
        let n = self.n;
        self.data.get(&[a.slot(n), b.slot(n), c.slot(n), d.slot(n)])
    }

    /// `Ω_{i j̄ k l̄}` with 1-based labels.
    pub fn mixed(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.component(FrameIndex::hol(i), FrameIndex::anti(j), FrameIndex::hol(k), FrameIndex::anti(l))
    }

    /// The block `Ω_{i j̄ k l̄}` with axes `[i, j̄, k, l̄]`.
    pub fn mixed_block(&self) -> ComplexTensor {
        let n = self.n;
        ComplexTensor::from_fn(vec![Axis::hol(n), Axis::anti(n), Axis::hol(n), Axis::anti(n)], |ix| {
            self.data.get(&[ix[0], n + ix[1], ix[2], n + ix[3]])
        })
        .expect("finite")
    }

    pub fn with_convention(&self, convention: CurvatureConvention) -> CurvatureTensor {
        if convention == self.convention {
            return self.clone();
        }
        CurvatureTensor {
            convention,
            data: self.data.permute(&[0, 1, 3, 2]).expect("valid permutation"),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.max_abs()
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let swapped = self.data.permute(&[1, 0, 2, 3]).expect("valid permutation");
        self.data.add(&swapped).expect("same shape").max_abs()
    }

    /// `Ω(Ā,B̄,C̄,D̄)` against `conj(Ω(A,B,C,D))`.
    pub fn reality_defect(&self) -> f64 {
        let n = self.n;
        let s = |a: usize| if a < n { a + n } else { a - n };
        let mut m: f64 = 0.0;
        for ix in self.data.indices() {
            let v = self.data.get(&ix);
            let w = self.data.get(&[s(ix[0]), s(ix[1]), s(ix[2]), s(ix[3])]);
            m = m.max((w - v.conj()).norm());
        }
        m
    }

    /// True if the slot pair `(p, q)` has both labels of one type.
    fn pure_pair(&self, p: usize, q: usize) -> bool {
        (p < self.n) == (q < self.n)
    }

    pub fn check_cplx_with(&self, tol: &Tolerances) -> CplxReport {
        let tolerance = tol.zero_threshold(self.max_abs());
        let sel = |ix: &[usize]| self.pure_pair(ix[0], ix[1]) || self.pure_pair(ix[2], ix[3]);
        let worst = self.data.argmax_abs(sel);
        let max_violation = worst.as_ref().map_or(0.0, |w| w.1.norm());
        let n = self.n;
        CplxReport {
            satisfied: max_violation <= tolerance,
            max_violation,
            tolerance,
            witness: worst.filter(|w| w.1.norm() > 0.0).map(|(ix, v)| {
                (
                    [
                        FrameIndex::from_slot(ix[0], n),
                        FrameIndex::from_slot(ix[1], n),
                        FrameIndex::from_slot(ix[2], n),
                        FrameIndex::from_slot(ix[3], n),
                    ],
                    v,
                )
            }),
        }
    }
}

/// (Cplx): all components with a pure-type first or second slot pair vanish.
pub fn check_cplx(omega: &CurvatureTensor) -> CplxReport {
    omega.check_cplx_with(&Tolerances::default())
}

pub fn format_witness(w: &[FrameIndex; 4]) -> String {
    format!("Ω_{{{} {} {} {}}}", w[0], w[1], w[2], w[3])
}

pub fn format_witness_value(w: &[FrameIndex; 4], v: C64) -> String {
    format!("{} = {:.6e}{:+.6e}i", format_witness(w), v.re, v.im)
}

//! Structure equations of an invariant complex structure and the dual bracket table.
//!
//! A coframe `φ¹..φⁿ` of invariant (1,0)-forms satisfies
//! `dφ^k = Σ_{i<j} C[k][i][j] φ^{ij} + Σ_{i,j} D[k][i][j] φ^{i j̄}`.
//! Over the complexified coframe `θ^A` (`θ^k = φ^k`, `θ^{n+k} = φ̄^k`) this reads
//! `dθ^A = ½ c^A_{BC} θ^B ∧ θ^C`, and for invariant fields `θ^A([e_B, e_C]) = −c^A_{BC}`.

use crate::tensor::FrameIndex;
use crate::{tol, HermError, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructureEquations {
    n: usize,
    c: Vec<C64>,
    d: Vec<C64>,
}

/// JSON document: `{"n": 3, "C": [[k,i,j,re,im], ...], "D": [[k,i,j,re,im], ...]}`,
/// indices 1-based. A `C` row adds `(re + i·im) φ^{ij}` to `dφ^k` (so `C[k][j][i]`
/// receives the negative); a `D` row adds `(re + i·im) φ^{i j̄}`. Repeated rows add up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationsDocument {
    pub n: usize,
    #[serde(rename = "C", default)]
    pub c: Vec<[f64; 5]>,
    #[serde(rename = "D", default)]
    pub d: Vec<[f64; 5]>,
}

/// A term `(k, i, j, coefficient)` with 1-based indices.
pub type Term = (usize, usize, usize, C64);

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl ComplexStructureEquations {
    /// All `dφ^k = 0` (the abelian algebra).
    pub fn abelian(n: usize) -> Self {
        ComplexStructureEquations {
            n,
            c: vec![zero(); n * n * n],
            d: vec![zero(); n * n * n],
        }
    }

    pub fn from_terms(n: usize, c_terms: &[Term], d_terms: &[Term]) -> Result<Self> {
        let mut e = Self::abelian(n);
        let check = |k: usize, i: usize, j: usize| -> Result<()> {
            if [k, i, j].iter().any(|&x| x == 0 || x > n) {
                return Err(HermError::InvalidEquations(format!(
                    "index ({k},{i},{j}) outside 1..={n}"
                )));
            }
            Ok(())
        };
        for &(k, i, j, a) in c_terms {
            check(k, i, j)?;
            if i == j {
                return Err(HermError::InvalidEquations(format!(
                    "φ^{{{i}{j}}} vanishes; C term ({k},{i},{j}) is meaningless"
                )));
            }
            let (k, i, j) = (k - 1, i - 1, j - 1);
            e.c[(k * n + i) * n + j] += a;
            e.c[(k * n + j) * n + i] -= a;
        }
        for &(k, i, j, b) in d_terms {
            check(k, i, j)?;
            e.d[((k - 1) * n + i - 1) * n + j - 1] += b;
        }
        if e.c.iter().chain(&e.d).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HermError::InvalidEquations("non-finite coefficient".into()));
        }
        Ok(e)
    }

    pub fn from_document(doc: &EquationsDocument) -> Result<Self> {
        let idx = |x: f64| -> Result<usize> {
            if x.fract() != 0.0 || x < 1.0 {
                return Err(HermError::InvalidEquations(format!("index {x} is not a positive integer")));
            }
            Ok(x as usize)
        };
        let conv = |rows: &[[f64; 5]]| -> Result<Vec<Term>> {
            rows.iter()
                .map(|r| Ok((idx(r[0])?, idx(r[1])?, idx(r[2])?, C64::new(r[3], r[4]))))
                .collect()
        };
        Self::from_terms(doc.n, &conv(&doc.c)?, &conv(&doc.d)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: EquationsDocument =
            serde_json::from_str(s).map_err(|e| HermError::InvalidEquations(e.to_string()))?;
        Self::from_document(&doc)
    }

    /// Canonical document: `C` rows only for `i < j`, zero entries dropped.
    pub fn to_document(&self) -> EquationsDocument {
        let n = self.n;
        let mut doc = EquationsDocument {
            n,
            c: vec![],
            d: vec![],
        };
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let a = self.c(k, i, j);
                    if i < j && a != zero() {
                        doc.c.push([(k + 1) as f64, (i + 1) as f64, (j + 1) as f64, a.re, a.im]);
                    }
                    let b = self.d(k, i, j);
                    if b != zero() {
                        doc.d.push([(k + 1) as f64, (i + 1) as f64, (j + 1) as f64, b.re, b.im]);
                    }
                }
            }
        }
        doc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of `φ^{ij}` (0-based, antisymmetric) in `dφ^k`.
    pub fn c(&self, k: usize, i: usize, j: usize) -> C64 {
        self.c[(k * self.n + i) * self.n + j]
    }

    /// Coefficient of `φ^{i j̄}` (0-based) in `dφ^k`.
    pub fn d(&self, k: usize, i: usize, j: usize) -> C64 {
        self.d[(k * self.n + i) * self.n + j]
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    m = m.max((self.c(k, i, j) + self.c(k, j, i)).norm());
                }
            }
        }
        m
    }

    /// `c^A_{BC}` over the complexified frame, layout `[A][B][C]`.
    pub fn structure_constants(&self) -> Vec<C64> {
        let n = self.n;
        let nn = 2 * n;
        let mut c = vec![zero(); nn * nn * nn];
        let at = |a: usize, b: usize, cc: usize| (a * nn + b) * nn + cc;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let a = self.c(k, i, j);
                    c[at(k, i, j)] += a;
                    c[at(n + k, n + i, n + j)] += a.conj();
                    let b = self.d(k, i, j);
                    c[at(k, i, n + j)] += b;
                    c[at(k, n + j, i)] -= b;
                    // conj(φ^{i j̄}) = φ̄^i ∧ φ^j
                    c[at(n + k, n + i, j)] += b.conj();
                    c[at(n + k, j, n + i)] -= b.conj();
                }
            }
        }
        c
    }

    /// Largest component of `d²θ^A` computed directly from `c^A_{BC}`.
    pub fn d_squared_defect(&self) -> (f64, String) {
        let nn = 2 * self.n;
        let c = self.structure_constants();
        let cc = |a: usize, b: usize, e: usize| c[(a * nn + b) * nn + e];
        let mut worst = (0.0, String::new());
        for a in 0..nn {
            for d in 0..nn {
                for e in 0..nn {
                    for f in 0..nn {
                        let mut s = zero();
                        for b in 0..nn {
                            s += cc(a, b, f) * cc(b, d, e) + cc(a, b, d) * cc(b, e, f) + cc(a, b, e) * cc(b, f, d);
                        }
                        if s.norm() > worst.0 {
                            worst = (
                                s.norm(),
                                format!(
                                    "d²θ^{} on ({},{},{})",
                                    FrameIndex::from_slot(a, self.n),
                                    FrameIndex::from_slot(d, self.n),
                                    FrameIndex::from_slot(e, self.n),
                                    FrameIndex::from_slot(f, self.n)
                                ),
                            );
                        }
                    }
                }
            }
        }
        worst
    }

    /// Antisymmetry, `d² = 0` and Jacobi.
    pub fn validate(&self) -> Result<()> {
        let a = self.antisymmetry_defect();
        if a > tol::JACOBI {
            return Err(HermError::InvalidEquations(format!("C not antisymmetric (defect {a:.3e})")));
        }
        let scale = 1.0 + self.c.iter().chain(&self.d).map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let (d2, at) = self.d_squared_defect();
        if d2 > tol::JACOBI * scale {
            return Err(HermError::Integrability {
                what: "d² ≠ 0".into(),
                defect: d2,
                at,
            });
        }
        dualize(self).map(|_| ())
    }
}

/// Brackets of the complexified invariant frame: `[e_B, e_C] = Σ_A b[B][C][A] e_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable {
    n: usize,
    b: Vec<C64>,
}

impl BracketTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Coefficient of `e_A` in `[e_B, e_C]` (frame slots).
    #[inline]
    pub fn coeff(&self, b: usize, c: usize, a: usize) -> C64 {
        let nn = 2 * self.n;
        self.b[(b * nn + c) * nn + a]
    }

    pub fn bracket(&self, b: usize, c: usize) -> Vec<C64> {
        (0..self.dim()).map(|a| self.coeff(b, c, a)).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.b.iter().all(|z| z.norm() == 0.0)
    }

    /// Worst cyclic sum `[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y]` over frame triples.
    pub fn jacobi_defect(&self) -> (f64, (usize, usize, usize)) {
        let nn = self.dim();
        let mut worst = (0.0, (0, 0, 0));
        for x in 0..nn {
            for y in 0..nn {
                for z in 0..nn {
                    let mut m: f64 = 0.0;
                    for f in 0..nn {
                        let mut s = zero();
                        for e in 0..nn {
                            s += self.coeff(x, y, e) * self.coeff(e, z, f)
                                + self.coeff(y, z, e) * self.coeff(e, x, f)
                                + self.coeff(z, x, e) * self.coeff(e, y, f);
                        }
                        m = m.max(s.norm());
                    }
                    if m > worst.0 {
                        worst = (m, (x, y, z));
                    }
                }
            }
        }
        worst
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let nn = self.dim();
        let mut m: f64 = 0.0;
        for b in 0..nn {
            for c in 0..nn {
                for a in 0..nn {
                    m = m.max((self.coeff(b, c, a) + self.coeff(c, b, a)).norm());
                }
            }
        }
        m
    }

    /// `[Z̄_a, Z̄_b]` against `conj([Z_a, Z_b])`, and likewise for every pair.
    pub fn conjugation_defect(&self) -> f64 {
        let n = self.n;
        let nn = self.dim();
        let sigma = |s: usize| if s < n { s + n } else { s - n };
        let mut m: f64 = 0.0;
        for b in 0..nn {
            for c in 0..nn {
                for a in 0..nn {
                    m = m.max((self.coeff(sigma(b), sigma(c), sigma(a)) - self.coeff(b, c, a).conj()).norm());
                }
            }
        }
        m
    }

    /// Read the structure equations back off the brackets via `dφ^k(X,Y) = −φ^k([X,Y])`.
    pub fn to_equations(&self) -> ComplexStructureEquations {
        let n = self.n;
        let mut e = ComplexStructureEquations::abelian(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    e.c[(k * n + i) * n + j] = -self.coeff(i, j, k);
                    e.d[(k * n + i) * n + j] = -self.coeff(i, n + j, k);
                }
            }
        }
        e
    }

    /// Brackets with a component the structure equations cannot express
    /// (`[Z_i, Z_j]` with a `Z̄` part): nonzero means `J` is not integrable.
    pub fn integrability_defect(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m = m.max(self.coeff(i, j, n + k).norm());
                }
            }
        }
        m
    }
}

/// Maurer-Cartan dualization. Fails when the Jacobi identity is violated.
pub fn dualize(eqs: &ComplexStructureEquations) -> Result<BracketTable> {
    let c = eqs.structure_constants();
    let n = eqs.n;
    let nn = 2 * n;
    let mut b = vec![zero(); nn * nn * nn];
    for a in 0..nn {
        for bb in 0..nn {
            for cc in 0..nn {
                b[(bb * nn + cc) * nn + a] = -c[(a * nn + bb) * nn + cc];
            }
        }
    }
    let table = BracketTable { n, b };
    let scale = 1.0 + table.b.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let (jd, (x, y, z)) = table.jacobi_defect();
    if jd > tol::JACOBI * scale {
        return Err(HermError::Integrability {
            what: "Jacobi identity".into(),
            defect: jd,
            at: format!(
                "({}, {}, {})",
                FrameIndex::from_slot(x, n),
                FrameIndex::from_slot(y, n),
                FrameIndex::from_slot(z, n)
            ),
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn one() -> C64 {
        c(1.0, 0.0)
    }

    #[test]
    fn torus_is_abelian() {
        let t = dualize(&ComplexStructureEquations::abelian(3)).unwrap();
        assert!(t.is_abelian());
    }

    #[test]
    fn np_bracket_sign() {
        let e = ComplexStructureEquations::from_terms(3, &[(3, 1, 2, one())], &[]).unwrap();
        let t = dualize(&e).unwrap();
        let br = t.bracket(0, 1);
        for (a, v) in br.iter().enumerate() {
            let want = if a == 2 { -1.0 } else { 0.0 };
            assert_eq!(*v, c(want, 0.0));
        }
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (0, 1) && (i, j) != (1, 0) {
                    assert!(t.bracket(i, j).iter().all(|z| z.norm() == 0.0));
                }
            }
        }
    }

    #[test]
    fn nii_z1_z1bar_bracket() {
        let e = ComplexStructureEquations::from_terms(3, &[(3, 1, 2, one())], &[(2, 1, 1, one())]).unwrap();
        let t = dualize(&e).unwrap();
        let br = t.bracket(0, 3);
        for (a, v) in br.iter().enumerate() {
            if a == 1 || a == 4 {
                assert!(v.norm() > 0.5);
            } else {
                assert_eq!(v.norm(), 0.0);
            }
        }
    }

    #[test]
    fn roundtrip_and_conjugation() {
        let e = ComplexStructureEquations::from_terms(
            3,
            &[(1, 1, 3, c(0.3, 0.7)), (2, 2, 3, c(-0.3, -0.7))],
            &[(1, 1, 3, c(0.3, 0.7)), (2, 2, 3, c(-0.3, -0.7))],
        )
        .unwrap();
        let t = dualize(&e).unwrap();
        let back = t.to_equations();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((back.c(k, i, j) - e.c(k, i, j)).norm() <= tol::DUALIZE_ROUNDTRIP);
                    assert!((back.d(k, i, j) - e.d(k, i, j)).norm() <= tol::DUALIZE_ROUNDTRIP);
                }
            }
        }
        assert_eq!(t.conjugation_defect(), 0.0);
        assert_eq!(t.antisymmetry_defect(), 0.0);
        assert_eq!(t.integrability_defect(), 0.0);
    }

    #[test]
    fn jacobi_failure_is_reported() {
        // dφ¹ = φ^{23}, dφ² = φ^{31}, dφ³ = φ^{12} is sl(2)-like and fine;
        // dφ¹ = φ^{12}, dφ² = φ^{13}: d²φ¹ = dφ¹∧φ² - φ¹∧dφ² = -φ¹∧φ^{13} = 0, fine too.
        // dφ³ = φ^{1 1̄} with dφ¹ = φ^{12} breaks d² = 0.
        let e = ComplexStructureEquations::from_terms(3, &[(1, 1, 2, one())], &[(2, 1, 1, one())]).unwrap();
        assert!(matches!(e.validate(), Err(HermError::Integrability { .. })));
        assert!(matches!(dualize(&e), Err(HermError::Integrability { .. })));
    }

    #[test]
    fn json_roundtrip() {
        let s = r#"{"n":3,"C":[[3,1,2,1,0]],"D":[[3,1,1,1,0],[3,2,2,0,1]]}"#;
        let e = ComplexStructureEquations::from_json(s).unwrap();
        assert_eq!(e.c(2, 0, 1), one());
        assert_eq!(e.c(2, 1, 0), -one());
        assert_eq!(e.d(2, 1, 1), c(0.0, 1.0));
        let e2 = ComplexStructureEquations::from_json(&e.to_json()).unwrap();
        assert_eq!(e, e2);
        assert!(ComplexStructureEquations::from_json(r#"{"n":3,"C":[[4,1,2,1,0]]}"#).is_err());
        assert!(ComplexStructureEquations::from_json(r#"{"n":3,"C":[[1,2,2,1,0]]}"#).is_err());
    }
}

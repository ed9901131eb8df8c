//! Levi-Civita, Bismut and Chern connections of an invariant Hermitian structure.
//!
//! Everything is finite algebra on the frame: for invariant fields `X g(Y,Z) = 0`,
//! so the Koszul formula reduces to brackets. With `ω(X,Y) = g(JX,Y)` and
//! `Jdω(X,Y,Z) = −dω(JX,JY,JZ)`:
//!
//! - `g(∇^B_X Y, Z) = g(∇^{LC}_X Y, Z) − ½ Jdω(X,Y,Z)`
//! - `g(∇^{Ch}_X Y, Z) = g(∇^{LC}_X Y, Z) − ½ dω(JX,Y,Z)`
//!
//! The sign in front of the correction is the one for which both connections are
//! Hermitian under this `ω` convention.

use super::metric::FrameMetric;
use super::structure::BracketTable;
use crate::tensor::{Axis, ComplexTensor};
use crate::{HermError, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConnectionKind {
    LeviCivita,
    Bismut,
    Chern,
}

impl std::fmt::Display for ConnectionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConnectionKind::LeviCivita => "Levi-Civita",
            ConnectionKind::Bismut => "Bismut",
            ConnectionKind::Chern => "Chern",
        };
        f.write_str(s)
    }
}

/// `∇_{e_A} e_B = Σ_C Γ[A][B][C] e_C`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionCoefficients {
    pub kind: ConnectionKind,
    n: usize,
    gamma: Vec<C64>,
    lowered: Vec<C64>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

#[inline]
fn at(nn: usize, a: usize, b: usize, c: usize) -> usize {
    (a * nn + b) * nn + c
}

/// `g([e_A, e_B], e_D)`.
fn lowered_bracket(br: &BracketTable, g: &FrameMetric) -> Vec<C64> {
    let nn = br.dim();
    let gm = g.g();
    let mut out = vec![zero(); nn * nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            for d in 0..nn {
                let mut s = zero();
                for e in 0..nn {
                    s += br.coeff(a, b, e) * gm[(e, d)];
                }
                out[at(nn, a, b, d)] = s;
            }
        }
    }
    out
}

/// `dω(e_A, e_B, e_D)` for invariant `ω`.
pub fn d_omega(br: &BracketTable, g: &FrameMetric) -> Vec<C64> {
    let nn = br.dim();
    // ω([X,Y],Z) = j_{[X,Y]} g(...) summed over components of the bracket
    let mut wb = vec![zero(); nn * nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            for d in 0..nn {
                let mut s = zero();
                for e in 0..nn {
                    s += br.coeff(a, b, e) * g.j(e) * g.g()[(e, d)];
                }
                wb[at(nn, a, b, d)] = s;
            }
        }
    }
    let mut out = vec![zero(); nn * nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            for d in 0..nn {
                out[at(nn, a, b, d)] = -wb[at(nn, a, b, d)] + wb[at(nn, a, d, b)] - wb[at(nn, b, d, a)];
            }
        }
    }
    out
}

/// Exterior derivative of an invariant `k`-form given by its dense frame components.
pub fn exterior_derivative(br: &BracketTable, form: &[C64], k: usize) -> Vec<C64> {
    let nn = br.dim();
    let len = nn.pow(k as u32 + 1);
    let mut out = vec![zero(); len];
    let mut args = vec![0usize; k + 1];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut r = flat;
        for p in (0..=k).rev() {
            args[p] = r % nn;
            r /= nn;
        }
        let mut acc = zero();
        for i in 0..=k {
            for j in (i + 1)..=k {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let rest: Vec<usize> = (0..=k).filter(|&p| p != i && p != j).map(|p| args[p]).collect();
                for e in 0..nn {
                    let cf = br.coeff(args[i], args[j], e);
                    if cf == zero() {
                        continue;
                    }
                    let mut off = e;
                    for &x in &rest {
                        off = off * nn + x;
                    }
                    acc += cf * sign * form[off];
                }
            }
        }
        *slot = acc;
    }
    out
}

/// `max |∂∂̄ω|`, from the (2,2)-part of `d` applied to the (1,2)-part of `dω`.
pub fn pluriclosed_defect(br: &BracketTable, g: &FrameMetric) -> f64 {
    let n = br.n();
    let nn = br.dim();
    let dw = d_omega(br, g);
    let hol_count = |idx: &[usize]| idx.iter().filter(|&&s| s < n).count();
    let mut dbar = vec![zero(); dw.len()];
    for a in 0..nn {
        for b in 0..nn {
            for c in 0..nn {
                if hol_count(&[a, b, c]) == 1 {
                    dbar[at(nn, a, b, c)] = dw[at(nn, a, b, c)];
                }
            }
        }
    }
    let d4 = exterior_derivative(br, &dbar, 3);
    let mut m: f64 = 0.0;
    for (flat, v) in d4.iter().enumerate() {
        let idx = [flat / (nn * nn * nn), (flat / (nn * nn)) % nn, (flat / nn) % nn, flat % nn];
        if hol_count(&idx) == 2 {
            m = m.max(v.norm());
        }
    }
    m
}

/// Connection of the requested kind for the invariant structure `(br, g)`.
pub fn connection(kind: ConnectionKind, br: &BracketTable, g: &FrameMetric) -> ConnectionCoefficients {
    let nn = br.dim();
    let gb = lowered_bracket(br, g);
    let mut low = vec![zero(); nn * nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            for d in 0..nn {
                low[at(nn, a, b, d)] = 0.5 * (gb[at(nn, a, b, d)] - gb[at(nn, b, d, a)] + gb[at(nn, d, a, b)]);
            }
        }
    }
    if kind != ConnectionKind::LeviCivita {
        let dw = d_omega(br, g);
        for a in 0..nn {
            for b in 0..nn {
                for d in 0..nn {
                    let w = dw[at(nn, a, b, d)];
                    let corr = match kind {
                        ConnectionKind::Bismut => -(g.j(a) * g.j(b) * g.j(d)) * w,
                        ConnectionKind::Chern => g.j(a) * w,
                        ConnectionKind::LeviCivita => unreachable!(),
                    };
                    low[at(nn, a, b, d)] -= 0.5 * corr;
                }
            }
        }
    }
    let gi = g.g_inv();
    let mut gamma = vec![zero(); nn * nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            for c in 0..nn {
                let mut s = zero();
                for d in 0..nn {
                    s += low[at(nn, a, b, d)] * gi[(d, c)];
                }
                gamma[at(nn, a, b, c)] = s;
            }
        }
    }
    ConnectionCoefficients {
        kind,
        n: br.n(),
        gamma,
        lowered: low,
    }
}

impl ConnectionCoefficients {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> C64 {
        self.gamma[at(2 * self.n, a, b, c)]
    }

    /// `g(∇_{e_A} e_B, e_D)`.
    #[inline]
    pub fn lowered(&self, a: usize, b: usize, d: usize) -> C64 {
        self.lowered[at(2 * self.n, a, b, d)]
    }

    pub fn tensor(&self) -> ComplexTensor {
        let n = self.n;
        ComplexTensor::from_data(vec![Axis::frame(n); 3], self.gamma.clone()).expect("finite connection")
    }

    /// `T(e_A, e_B) = ∇_A e_B − ∇_B e_A − [e_A, e_B]`, components `[A][B][C]`.
    pub fn torsion(&self, br: &BracketTable) -> Vec<C64> {
        let nn = 2 * self.n;
        let mut t = vec![zero(); nn * nn * nn];
        for a in 0..nn {
            for b in 0..nn {
                for c in 0..nn {
                    t[at(nn, a, b, c)] = self.gamma(a, b, c) - self.gamma(b, a, c) - br.coeff(a, b, c);
                }
            }
        }
        t
    }

    /// `g(T(e_A, e_B), e_C)`.
    pub fn lowered_torsion(&self, br: &BracketTable, g: &FrameMetric) -> Vec<C64> {
        let nn = 2 * self.n;
        let t = self.torsion(br);
        let mut out = vec![zero(); nn * nn * nn];
        for a in 0..nn {
            for b in 0..nn {
                for c in 0..nn {
                    let mut s = zero();
                    for e in 0..nn {
                        s += t[at(nn, a, b, e)] * g.g()[(e, c)];
                    }
                    out[at(nn, a, b, c)] = s;
                }
            }
        }
        out
    }

    /// `max |g(∇_A e_B, e_D) + g(e_B, ∇_A e_D)|`.
    pub fn metric_defect(&self) -> f64 {
        let nn = 2 * self.n;
        let mut m: f64 = 0.0;
        for a in 0..nn {
            for b in 0..nn {
                for d in 0..nn {
                    m = m.max((self.lowered(a, b, d) + self.lowered(a, d, b)).norm());
                }
            }
        }
        m
    }

    /// Components of `∇ e_B` leaving the type of `e_B` (zero iff `∇J = 0`).
    pub fn type_defect(&self) -> f64 {
        let n = self.n;
        let nn = 2 * n;
        let mut m: f64 = 0.0;
        for a in 0..nn {
            for b in 0..nn {
                for c in 0..nn {
                    if (b < n) != (c < n) {
                        m = m.max(self.gamma(a, b, c).norm());
                    }
                }
            }
        }
        m
    }

    /// Deviation of the lowered torsion from a 3-form.
    pub fn torsion_skew_defect(&self, br: &BracketTable, g: &FrameMetric) -> f64 {
        let nn = 2 * self.n;
        let t = self.lowered_torsion(br, g);
        let mut m: f64 = 0.0;
        for a in 0..nn {
            for b in 0..nn {
                for c in 0..nn {
                    m = m.max((t[at(nn, a, b, c)] + t[at(nn, a, c, b)]).norm());
                }
            }
        }
        m
    }

    /// Largest `T(Z_i, Z̄_j)`.
    pub fn torsion_11_defect(&self, br: &BracketTable) -> f64 {
        let n = self.n;
        let nn = 2 * n;
        let t = self.torsion(br);
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in n..nn {
                for c in 0..nn {
                    m = m.max(t[at(nn, i, j, c)].norm());
                }
            }
        }
        m
    }
}

/// Chern torsion `T^k_{ij}` (axes `[i, j, k]`) and `T_{i j k̄} = T^p_{ij} g_{p k̄}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernTorsion {
    pub upper: ComplexTensor,
    pub lowered: ComplexTensor,
}

pub fn chern_torsion(conn: &ConnectionCoefficients, br: &BracketTable, g: &FrameMetric) -> Result<ChernTorsion> {
    if conn.kind != ConnectionKind::Chern {
        return Err(HermError::InvalidParameter(format!("{} connection passed as Chern", conn.kind)));
    }
    let n = conn.n;
    let nn = 2 * n;
    let t = conn.torsion(br);
    let upper = ComplexTensor::from_fn(vec![Axis::hol(n); 3], |ix| t[at(nn, ix[0], ix[1], ix[2])])?;
    let h = g.hermitian();
    let lowered = ComplexTensor::from_fn(vec![Axis::hol(n), Axis::hol(n), Axis::anti(n)], |ix| {
        (0..n).map(|p| upper.get(&[ix[0], ix[1], p]) * h[(p, ix[2])]).sum()
    })?;
    Ok(ChernTorsion { upper, lowered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::invariant::metric::MetricCoefficients;
    use crate::invariant::structure::{dualize, ComplexStructureEquations};

    fn iwasawa() -> BracketTable {
        dualize(&ComplexStructureEquations::from_terms(3, &[(3, 1, 2, c(1.0, 0.0))], &[]).unwrap()).unwrap()
    }

    #[test]
    fn torus_is_flat() {
        let br = dualize(&ComplexStructureEquations::abelian(3)).unwrap();
        let m = MetricCoefficients {
            r2: 1.2,
            s2: 0.9,
            t2: 1.5,
            u: c(0.1, 0.2),
            v: c(-0.2, 0.1),
            z: c(0.05, -0.3),
        };
        let g = m.frame_metric().unwrap();
        for kind in [ConnectionKind::LeviCivita, ConnectionKind::Bismut, ConnectionKind::Chern] {
            assert_eq!(connection(kind, &br, &g).tensor().max_abs(), 0.0);
        }
    }

    #[test]
    fn hermitian_connections_on_iwasawa() {
        let br = iwasawa();
        let g = MetricCoefficients {
            r2: 1.2,
            s2: 0.9,
            t2: 1.5,
            u: c(0.1, 0.2),
            v: c(-0.2, 0.1),
            z: c(0.05, -0.3),
        }
        .frame_metric()
        .unwrap();
        let lc = connection(ConnectionKind::LeviCivita, &br, &g);
        assert!(lc.metric_defect() < 1e-14);
        let lct = lc.torsion(&br);
        assert!(lct.iter().all(|z| z.norm() < 1e-14));
        let b = connection(ConnectionKind::Bismut, &br, &g);
        assert!(b.metric_defect() < 1e-14);
        assert!(b.type_defect() < 1e-14);
        assert!(b.torsion_skew_defect(&br, &g) < 1e-14);
        let ch = connection(ConnectionKind::Chern, &br, &g);
        assert!(ch.metric_defect() < 1e-14);
        assert!(ch.type_defect() < 1e-14);
        assert!(ch.torsion_11_defect(&br) < 1e-14);
    }

    #[test]
    fn iwasawa_chern_torsion_component() {
        let br = iwasawa();
        let g = MetricCoefficients::unit().frame_metric().unwrap();
        let ch = connection(ConnectionKind::Chern, &br, &g);
        let t = chern_torsion(&ch, &br, &g).unwrap();
        // T(Z_1, Z_2) = −[Z_1, Z_2]^{1,0} = Z_3 ... sign fixed by T = ∇_X Y − ∇_Y X − [X, Y]
        let t312 = t.upper.get(&[0, 1, 2]);
        assert!((t312 - c(1.0, 0.0)).norm() < 1e-14, "{t312}");
        assert!((t.upper.get(&[1, 0, 2]) + t312).norm() < 1e-14);
        assert!(chern_torsion(&connection(ConnectionKind::Bismut, &br, &g), &br, &g).is_err());
    }

    #[test]
    fn exterior_derivative_squares_to_zero() {
        let br = iwasawa();
        let g = MetricCoefficients::unit().frame_metric().unwrap();
        let dw = d_omega(&br, &g);
        let ddw = exterior_derivative(&br, &dw, 3);
        assert!(ddw.iter().all(|z| z.norm() < 1e-14));
    }
}

//! Algebra shared by every Hermitian setting: the inverse metric `g^{k l̄}`,
//! the Chern trace `S` and the torsion quadratics `Q¹..Q⁴` of the HCF family.
//!
//! Matrices are indexed `[i][j]` for `g_{i j̄}`; `g^{k l̄}` satisfies
//! `Σ_l g^{k l̄} g_{j l̄} = δ^k_j`, i.e. it is `(Gᵀ)⁻¹`.

use crate::tensor::{contract, Axis, ComplexTensor};
use crate::{HermError, Result, C64};
use nalgebra::DMatrix;

pub type CMatrix = DMatrix<C64>;

/// `g^{k l̄}` from `g_{i j̄}`.
pub fn inverse_metric(g: &CMatrix) -> Result<CMatrix> {
    g.transpose()
        .try_inverse()
        .ok_or_else(|| HermError::InadmissibleMetric("singular metric".into()))
}

pub fn matrix_tensor(m: &CMatrix) -> ComplexTensor {
    let n = m.nrows();
    ComplexTensor::from_fn(vec![Axis::hol(n), Axis::anti(n)], |ix| m[(ix[0], ix[1])])
        .expect("finite matrix")
}

pub fn tensor_matrix(t: &ComplexTensor) -> CMatrix {
    let d = t.dims();
    CMatrix::from_fn(d[0], d[1], |i, j| t.get(&[i, j]))
}

/// `S_{i j̄} = g^{k l̄} Ω_{k l̄ i j̄}` for a block with axes `[k, l̄, i, j̄]`.
pub fn chern_trace(omega: &ComplexTensor, g_inv: &CMatrix) -> Result<CMatrix> {
    let s = contract(&matrix_tensor(g_inv), omega, &[(0, 0), (1, 1)], None)?;
    Ok(tensor_matrix(&s))
}

/// The four torsion quadratics from the lowered torsion `T_{i j k̄}` (axes `[i, j, k̄]`).
///
/// With `T̄_{a b c} = conj(T_{a b c̄})`:
/// - `Q¹_{i j̄} = g^{k l̄} g^{m n̄} T_{i k n̄} T̄_{j l m}`
/// - `Q²_{i j̄} = g^{k l̄} g^{m n̄} T_{k m j̄} T̄_{l n i}`
/// - `Q³_{i j̄} = g^{k l̄} g^{m n̄} T_{i k l̄} T̄_{j n m}`
/// - `Q⁴_{i j̄} = ½ g^{k l̄} g^{m n̄} (T_{m k l̄} T̄_{n j i} + T_{m i j̄} T̄_{n l k})`
pub fn torsion_quadratics(t_low: &ComplexTensor, g_inv: &CMatrix) -> [CMatrix; 4] {
    let n = g_inv.nrows();
    let t = |a: usize, b: usize, cc: usize| t_low.get(&[a, b, cc]);
    let tb = |a: usize, b: usize, cc: usize| t_low.get(&[a, b, cc]).conj();
    let gi = |a: usize, b: usize| g_inv[(a, b)];
    let mut q = [
        CMatrix::zeros(n, n),
        CMatrix::zeros(n, n),
        CMatrix::zeros(n, n),
        CMatrix::zeros(n, n),
    ];
    for i in 0..n {
        for j in 0..n {
            let mut acc = [C64::new(0.0, 0.0); 4];
            for k in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        for nn in 0..n {
                            let w = gi(k, l) * gi(m, nn);
                            acc[0] += w * t(i, k, nn) * tb(j, l, m);
                            acc[1] += w * t(k, m, j) * tb(l, nn, i);
                            acc[2] += w * t(i, k, l) * tb(j, nn, m);
                            acc[3] += w * 0.5 * (t(m, k, l) * tb(nn, j, i) + t(m, i, j) * tb(nn, l, k));
                        }
                    }
                }
            }
            for r in 0..4 {
                q[r][(i, j)] = acc[r];
            }
        }
    }
    q
}

/// `−S + aQ¹ + bQ² + cQ³ + dQ⁴`.
pub fn hcf_combination(s: &CMatrix, q: &[CMatrix; 4], coeffs: [f64; 4]) -> CMatrix {
    let mut k = -s.clone();
    for r in 0..4 {
        k += &q[r] * C64::new(coeffs[r], 0.0);
    }
    k
}

/// Largest deviation from `K = K^†` (entrywise `K_{i j̄} = conj(K_{j ī})`).
pub fn hermitian_defect(k: &CMatrix) -> f64 {
    (k - k.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

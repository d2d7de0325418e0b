//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! matrix exponential built on it.

use super::{CMatrix, C64};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Tolerance on `‖H − H†‖_max` (relative to `max(1, ‖H‖_max)`) accepted by
/// [`eigh`] and [`expm_hermitian_generator`].
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    let deviation = h.hermiticity_defect();
    if deviation > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Diagonalizes a Hermitian matrix, `h = V diag(λ) V†`.
pub fn eigh(h: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let n = h.dim();
    let mut a = h.hermitize();
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = b / mag; // e^{iφ}
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q)
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c + akq * g_qp;
                    a[(k, q)] = akp * s + akq * g_qq;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c + vkq * g_qp;
                    v[(k, q)] = vkp * s + vkq * g_qq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c + aqk * g_qp.conj();
                    a[(q, k)] = apk * s + aqk * g_qq.conj();
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// `exp(−i·s·h)` for Hermitian `h`, via eigendecomposition.
pub fn expm_hermitian_generator(h: &CMatrix, s: f64) -> Result<CMatrix> {
    let HermitianEigen { values, vectors } = eigh(h)?;
    let phases: Vec<C64> = values.iter().map(|&l| C64::from_polar(1.0, -s * l)).collect();
    let n = h.dim();
    Ok(CMatrix::from_fn(n, |r, c| {
        (0..n).map(|k| vectors[(r, k)] * phases[k] * vectors[(c, k)].conj()).sum()
    }))
}

/// Largest singular value of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_norm2(h: &CMatrix) -> Result<f64> {
    let e = eigh(h)?;
    Ok(e.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

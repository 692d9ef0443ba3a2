//! Eigensolvers: cyclic Jacobi for 3×3 real symmetric matrices, and a faer
//! wrapper for dense Hermitian matrices with a real-symmetric fast path.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenpairs of a real symmetric 3×3 matrix, ascending. `vectors[j]` is the
/// unit eigenvector of `values[j]`, signed so its component sum is ≥ 0.
pub fn eigh3(a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut m = a;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    for _sweep in 0..64 {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        if off <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = m[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let mkp = m[k][p];
                let mkq = m[k][q];
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let mpk = m[p][k];
                let mqk = m[q][k];
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let values = order.map(|i| m[i][i]);
    let vectors = order.map(|j| {
        let mut col = [v[0][j], v[1][j], v[2][j]];
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sign = if col.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        for x in col.iter_mut() {
            *x *= sign / norm;
        }
        col
    });
    (values, vectors)
}

/// Dense Hermitian eigensystem, eigenvalues ascending. Eigenvector `j` is
/// stored contiguously at `vectors[j * dim..(j + 1) * dim]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<Complex64>,
}

impl HermitianEigen {
    pub fn vector(&self, j: usize) -> &[Complex64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }
}

/// Diagonalize the Hermitian matrix with lower-triangle entries `entry(i, j)`,
/// i ≥ j. When `real` is set the imaginary parts are ignored and the real
/// symmetric solver is used. Runs sequentially so results do not depend on
/// the thread pool.
pub fn hermitian_eigen(
    dim: usize,
    real: bool,
    with_vectors: bool,
    entry: impl Fn(usize, usize) -> Complex64,
) -> Result<HermitianEigen> {
    let fail = |what: &str| Error::Convergence {
        what: format!("{what} eigensolver (dimension {dim})"),
        residual: f64::NAN,
    };
    if real {
        let m = Mat::<f64>::from_fn(dim, dim, |i, j| if i >= j { entry(i, j).re } else { entry(j, i).re });
        if with_vectors {
            let e = m.self_adjoint_eigen(Side::Lower).map_err(|_| fail("real"))?;
            let values = (0..dim).map(|i| e.S().column_vector()[i]).collect();
            let u = e.U();
            let mut vectors = Vec::with_capacity(dim * dim);
            for j in 0..dim {
                vectors.extend((0..dim).map(|i| Complex64::new(u[(i, j)], 0.0)));
            }
            Ok(HermitianEigen { dim, values, vectors })
        } else {
            let values = m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| fail("real"))?;
            Ok(HermitianEigen {
                dim,
                values,
                vectors: Vec::new(),
            })
        }
    } else {
        let m = Mat::<faer::c64>::from_fn(dim, dim, |i, j| if i >= j { entry(i, j) } else { entry(j, i).conj() });
        if with_vectors {
            let e = m.self_adjoint_eigen(Side::Lower).map_err(|_| fail("complex"))?;
            let values = (0..dim).map(|i| e.S().column_vector()[i].re).collect();
            let u = e.U();
            let mut vectors = Vec::with_capacity(dim * dim);
            for j in 0..dim {
                vectors.extend((0..dim).map(|i| u[(i, j)]));
            }
            Ok(HermitianEigen { dim, values, vectors })
        } else {
            let values = m
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|_| fail("complex"))?
                .into_iter()
                .collect();
            Ok(HermitianEigen {
                dim,
                values,
                vectors: Vec::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_input() {
        let (w, v) = eigh3([[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(w, [-1.0, 2.0, 3.0]);
        assert_eq!(v[0], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn jacobi_ladder() {
        let h = 0.5;
        let (w, v) = eigh3([[0.0, h, 0.0], [h, 0.0, h], [0.0, h, 0.0]]);
        let r = h * 2f64.sqrt();
        assert!((w[0] + r).abs() < 1e-14 && w[1].abs() < 1e-14 && (w[2] - r).abs() < 1e-14);
        // top vector (1/2, 1/√2, 1/2)
        assert!((v[2][0] - 0.5).abs() < 1e-14 && (v[2][1] - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = [[1.3, -0.2, 0.7], [-0.2, 4.1, 0.05], [0.7, 0.05, -2.2]];
        let (w, v) = eigh3(a);
        for j in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|k| a[i][k] * v[j][k]).sum();
                assert!((av - w[j] * v[j][i]).abs() < 1e-13);
            }
            for l in 0..3 {
                let dot: f64 = (0..3).map(|k| v[j][k] * v[l][k]).sum();
                assert!((dot - if j == l { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn faer_paths_agree() {
        let n = 12;
        let entry = |i: usize, j: usize| {
            let d = i as f64 - j as f64;
            if i == j {
                Complex64::new(i as f64 * 0.7, 0.0)
            } else {
                Complex64::new(1.0 / (1.0 + d.abs()), 0.0)
            }
        };
        let a = hermitian_eigen(n, true, true, entry).unwrap();
        let b = hermitian_eigen(n, false, true, entry).unwrap();
        let c = hermitian_eigen(n, true, false, entry).unwrap();
        for i in 0..n {
            assert!((a.values[i] - b.values[i]).abs() < 1e-12);
            assert!((a.values[i] - c.values[i]).abs() < 1e-12);
        }
        for j in 0..n {
            let norm: f64 = b.vector(j).iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}

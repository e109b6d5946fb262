//! Symmetric eigenvalues via cyclic Jacobi rotations.
//!
//! The matrices this crate diagonalises are small Fisher-information
//! blocks (at most a node's neighbourhood size on a side), so a dense
//! textbook Jacobi sweep is plenty and keeps the crate free of BLAS/LAPACK
//! bindings. Rotations are applied until the off-diagonal mass is
//! negligible relative to the matrix scale, which gives eigenvalues
//! accurate to close to machine precision.

use ndarray::Array2;

/// Hard cap on full sweeps; Jacobi converges quadratically, so for the
/// matrix sizes used here convergence takes well under ten sweeps.
const MAX_SWEEPS: usize = 100;

/// All eigenvalues of a symmetric matrix, sorted ascending.
///
/// The input is symmetrised as (A + A^T)/2 first, so tiny asymmetries from
/// accumulated rounding are harmless. Panics if the matrix is not square.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalue input must be square");
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[[0, 0]]];
    }

    let mut m = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = 0.5 * (a[[i, j]] + a[[j, i]]);
        }
    }

    let scale: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }

        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                // Smaller-angle root of t^2 + 2 t theta - 1 = 0.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                m[[p, p]] = app - t * apq;
                m[[q, q]] = aqq + t * apq;
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[[r, p]];
                    let arq = m[[r, q]];
                    m[[r, p]] = c * arp - s * arq;
                    m[[p, r]] = m[[r, p]];
                    m[[r, q]] = s * arp + c * arq;
                    m[[q, r]] = m[[r, q]];
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    eigs
}

/// Smallest eigenvalue of a symmetric matrix. Panics on an empty matrix.
pub fn smallest_eigenvalue(a: &Array2<f64>) -> f64 {
    let eigs = symmetric_eigenvalues(a);
    assert!(!eigs.is_empty(), "matrix must be at least 1x1");
    eigs[0]
}

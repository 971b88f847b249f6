//! Dense spectral norms for the moderate sizes met by the suites.

use dyadlab_core::norms::{operator_norm_with, PowerOptions};
use dyadlab_core::SparseMatrix;
use nalgebra::DMatrix;

/// Largest side for which the dense path is used.
pub const DENSE_LIMIT: usize = 256;

fn gram(m: &SparseMatrix<f64>) -> DMatrix<f64> {
    let k = m.ncols();
    let mut g = DMatrix::<f64>::zeros(k, k);
    for a in 0..k {
        let ca = m.column(a);
        if ca.is_empty() {
            continue;
        }
        for b in a..k {
            let cb = m.column(b);
            let (mut i, mut j, mut s) = (0, 0, 0.0);
            while i < ca.len() && j < cb.len() {
                match ca[i].0.cmp(&cb[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        s += ca[i].1 * cb[j].1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            g[(a, b)] = s;
            g[(b, a)] = s;
        }
    }
    g
}

/// `‖m‖₂`, from the Gram matrix eigenvalues when small enough, otherwise by
/// power iteration.
pub fn spectral_norm(m: &SparseMatrix<f64>) -> f64 {
    if m.nnz() == 0 {
        return 0.0;
    }
    if m.ncols() <= DENSE_LIMIT {
        let ev = gram(m).symmetric_eigenvalues();
        return ev.iter().copied().fold(0.0, f64::max).max(0.0).sqrt();
    }
    let opts = PowerOptions { tol: 1e-11, max_iters: 200_000, restarts: 2, seed: 0 };
    operator_norm_with(m, &opts).map(|e| e.value).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let d = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 2.0), (1, 1, -5.0), (2, 2, 1.0)]);
        assert!((spectral_norm(&d) - 5.0).abs() < 1e-12);
        // u vᵀ with |u| = 5, |v| = √2
        let r = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 3.0), (1, 0, 4.0), (0, 1, 3.0), (1, 1, 4.0)]);
        assert!((spectral_norm(&r) - 5.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(spectral_norm(&SparseMatrix::zeros(4, 4)), 0.0);
    }

    #[test]
    fn dense_and_iterative_paths_agree() {
        let n = 40;
        let m = SparseMatrix::from_triplets(n, n, (0..n).flat_map(|i| [(i, i, 1.0 + i as f64 / 7.0), (i, (i * 3) % n, 0.5)]));
        let dense = spectral_norm(&m);
        let it = operator_norm_with(&m, &PowerOptions { tol: 1e-13, max_iters: 100_000, restarts: 2, seed: 1 }).unwrap().value;
        assert!((dense - it).abs() < 1e-8 * dense);
    }
}

//! Small dense and Krylov helpers shared by the state builders and entropy engines.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix with eigenvalues sorted
/// ascending and eigenvector columns permuted to match.
pub fn sorted_symmetric_eigen(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Largest Krylov space built before restarting from the current Ritz vector.
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Required `‖Hx − θx‖₂` of the returned pair.
    pub tolerance: f64,
    /// Seed of the random starting vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_krylov: 160,
            max_restarts: 40,
            tolerance: 1e-10,
            seed: 0x5eed_0001,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowestEigen {
    pub value: f64,
    pub vector: Vec<f64>,
    /// Second-lowest Ritz value of the largest Krylov space built, if that
    /// space had dimension at least two.
    pub second: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    norm
}

/// Lowest eigenpair of a real symmetric operator given only its action.
///
/// Restarted Lanczos with full reorthogonalization. `apply(x, y)` must
/// overwrite `y` with `H x`.
pub fn lanczos_lowest<F>(dim: usize, apply: F, opts: &LanczosOptions) -> Result<LowestEigen>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(Error::InvalidInput("empty operator".into()));
    }
    let mut hx = vec![0.0; dim];
    if dim == 1 {
        apply(&[1.0], &mut hx);
        return Ok(LowestEigen {
            value: hx[0],
            vector: vec![1.0],
            second: None,
            residual: 0.0,
            iterations: 1,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    normalize(&mut start);

    let m_max = opts.max_krylov.min(dim).max(2);
    let mut total_iterations = 0;
    let mut best_second: Option<(usize, f64)> = None;
    let mut last_residual = f64::INFINITY;

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![0.0; dim];

        loop {
            let j = alpha.len();
            apply(&basis[j], &mut w);
            total_iterations += 1;
            if j > 0 {
                let b = beta[j - 1];
                for (wi, pi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= b * pi;
                }
            }
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi -= a * vi;
            }
            // two passes of classical Gram-Schmidt keep the basis orthogonal to machine precision
            for _ in 0..2 {
                for q in &basis {
                    let proj = dot(&w, q);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= proj * qi;
                    }
                }
            }
            let b = dot(&w, &w).sqrt();
            if alpha.len() >= m_max || b < 1e-13 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let m = alpha.len();
        let mut tri = DMatrix::zeros(m, m);
        for k in 0..m {
            tri[(k, k)] = alpha[k];
            if k + 1 < m {
                tri[(k, k + 1)] = beta[k];
                tri[(k + 1, k)] = beta[k];
            }
        }
        let (ritz, y) = sorted_symmetric_eigen(tri);
        if m >= 2 && best_second.is_none_or(|(dim_seen, _)| m > dim_seen) {
            best_second = Some((m, ritz[1]));
        }

        let mut x = vec![0.0; dim];
        for (k, q) in basis.iter().enumerate() {
            let c = y[(k, 0)];
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += c * qi;
            }
        }
        normalize(&mut x);
        apply(&x, &mut hx);
        let theta = dot(&x, &hx);
        let residual = hx
            .iter()
            .zip(&x)
            .map(|(h, v)| (h - theta * v).powi(2))
            .sum::<f64>()
            .sqrt();
        last_residual = residual;
        if residual <= opts.tolerance {
            return Ok(LowestEigen {
                value: theta,
                vector: x,
                second: best_second.map(|(_, s)| s),
                residual,
                iterations: total_iterations,
            });
        }
        start = x;
    }

    Err(Error::NotConverged {
        residual: last_residual,
        iterations: total_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn dense_apply(h: &DMatrix<f64>) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            let xv = DVector::from_column_slice(x);
            let r = h * xv;
            y.copy_from_slice(r.as_slice());
        }
    }

    #[test]
    fn sorted_eigen_orders_values() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5]);
        let (vals, vecs) = sorted_symmetric_eigen(h);
        assert_eq!(vals, vec![-1.0, 0.5, 2.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_matches_dense_on_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200;
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen::<f64>() - 0.5;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let (vals, _) = sorted_symmetric_eigen(h.clone());
        let low = lanczos_lowest(n, dense_apply(&h), &LanczosOptions::default()).unwrap();
        assert!((low.value - vals[0]).abs() < 1e-10);
        assert!(low.residual <= 1e-10);
        assert!((low.second.unwrap() - vals[1]).abs() < 1e-6);
    }

    #[test]
    fn lanczos_handles_tiny_dimensions() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let low = lanczos_lowest(2, dense_apply(&h), &LanczosOptions::default()).unwrap();
        assert!((low.value + 1.0).abs() < 1e-12);
        let one = DMatrix::from_element(1, 1, 3.0);
        assert_eq!(
            lanczos_lowest(1, dense_apply(&one), &LanczosOptions::default())
                .unwrap()
                .value,
            3.0
        );
    }
}

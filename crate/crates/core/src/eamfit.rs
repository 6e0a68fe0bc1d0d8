//! Least-squares fit of the entanglement adjacency matrix.
//!
//! Every block entropy is modelled as the total weight of the links cut by the
//! bipartition, `Ŝ_A = Σ_{i∈A, j∉A} J_ij (+ s₀)`. Stacking one equation per
//! mask gives an overdetermined system `D·J = S` with `D[A,(ij)] = 1` iff the
//! pair `(ij)` straddles the cut. Over all `2^N` masks the normal matrix is
//! `DᵀD = 2^(N−2)·(I + 𝟙𝟙ᵀ)`, so the no-offset fit has a closed form and the
//! design matrix is never materialized; only `DᵀS` is accumulated.

use nalgebra::{DMatrix, DVector, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{EntropyTable, SubsetMask};
use crate::{Error, Result};

const MASK_CHUNK: u64 = 1 << 12;

/// Lexicographic linearization of the pairs `i < j` of `n_sites` sites.
#[derive(Debug, Clone)]
pub struct PairIndex {
    n_sites: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(n_sites: usize) -> Self {
        let pairs = (0..n_sites)
            .flat_map(|i| (i + 1..n_sites).map(move |j| (i, j)))
            .collect();
        Self { n_sites, pairs }
    }

    /// `M = N(N−1)/2`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Position of the unordered pair `{i, j}`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j && j < self.n_sites);
        // pairs starting before row i, then offset inside row i
        i * (2 * self.n_sites - i - 1) / 2 + (j - i - 1)
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// 1 iff exactly one of the pair's sites lies in the mask.
pub fn design_coefficient(mask: SubsetMask, pair: (usize, usize)) -> u8 {
    u8::from(mask.contains(pair.0) != mask.contains(pair.1))
}

/// Fitted link weights plus an optional constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementAdjacency {
    n_sites: usize,
    j: DMatrix<f64>,
    s0: Option<f64>,
}

impl EntanglementAdjacency {
    pub fn zeros(n_sites: usize) -> Self {
        Self {
            n_sites,
            j: DMatrix::zeros(n_sites, n_sites),
            s0: None,
        }
    }

    /// Builds from weights in [`PairIndex`] order.
    pub fn from_pair_weights(n_sites: usize, weights: &[f64], s0: Option<f64>) -> Result<Self> {
        let index = PairIndex::new(n_sites);
        if weights.len() != index.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights for {} pairs",
                weights.len(),
                index.len()
            )));
        }
        let mut j = DMatrix::zeros(n_sites, n_sites);
        for (&(a, b), &w) in index.pairs().iter().zip(weights) {
            j[(a, b)] = w;
            j[(b, a)] = w;
        }
        Ok(Self { n_sites, j, s0 })
    }

    /// Builds from `(i, j, weight)` triples; every pair must appear exactly once.
    pub fn from_links(
        n_sites: usize,
        links: &[(usize, usize, f64)],
        s0: Option<f64>,
    ) -> Result<Self> {
        let index = PairIndex::new(n_sites);
        let mut weights = vec![f64::NAN; index.len()];
        for &(a, b, w) in links {
            if a == b || a >= n_sites || b >= n_sites {
                return Err(Error::InvalidInput(format!("invalid link ({a}, {b})")));
            }
            let k = index.index(a, b);
            if !weights[k].is_nan() {
                return Err(Error::InvalidInput(format!("duplicate link ({a}, {b})")));
            }
            weights[k] = w;
        }
        if let Some(k) = weights.iter().position(|w| w.is_nan()) {
            let (a, b) = index.pair(k);
            return Err(Error::InvalidInput(format!("missing link ({a}, {b})")));
        }
        Self::from_pair_weights(n_sites, &weights, s0)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.j[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn s0(&self) -> Option<f64> {
        self.s0
    }

    /// `(i, j, weight)` for all `i < j` in [`PairIndex`] order.
    pub fn links(&self) -> Vec<(usize, usize, f64)> {
        PairIndex::new(self.n_sites)
            .pairs()
            .iter()
            .map(|&(a, b)| (a, b, self.j[(a, b)]))
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_sites: self.n_sites,
            j: &self.j * factor,
            s0: self.s0.map(|s| s * factor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    ClosedForm,
    GenericLeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopcountResiduals {
    pub popcount: usize,
    pub n_masks: usize,
    pub mean_abs: f64,
    pub max_abs: f64,
}

/// Prediction residuals of an EAM against a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `2^−N Σ_I |S_I − Ŝ_I|` over all masks.
    pub error: f64,
    pub max_residual: f64,
    pub by_popcount: Vec<PopcountResiduals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub error: f64,
    pub max_residual: f64,
    pub n_equations: usize,
    pub method: FitMethod,
    pub offset_enabled: bool,
    /// Normal equations were singular and the minimum-norm solution was taken.
    pub rank_deficient: bool,
    pub by_popcount: Vec<PopcountResiduals>,
}

/// Ordered, fixed-size mask chunks so floating-point reductions do not depend
/// on the thread count.
fn mask_chunks(n_sites: usize) -> Vec<(u64, u64)> {
    let total = 1u64 << n_sites;
    (0..total.div_ceil(MASK_CHUNK))
        .map(|c| (c * MASK_CHUNK, ((c + 1) * MASK_CHUNK).min(total)))
        .collect()
}

/// `(DᵀS)_(ij)`: sum of the entropies of all masks cutting each pair.
pub fn cut_sums(table: &EntropyTable) -> Vec<f64> {
    let n = table.n_sites();
    let index = PairIndex::new(n);
    let s = table.entropies();
    let partials: Vec<Vec<f64>> = mask_chunks(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = vec![0.0; index.len()];
            for m in lo..hi {
                let value = s[m as usize];
                if value == 0.0 {
                    continue;
                }
                for (slot, &(i, j)) in acc.iter_mut().zip(index.pairs()) {
                    if (m >> i & 1) != (m >> j & 1) {
                        *slot += value;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; index.len()];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// `DᵀD` restricted to pair columns; identical with or without the trivial
/// masks, since those cut no pair.
pub fn analytic_normal_matrix(n_sites: usize) -> DMatrix<f64> {
    let m = PairIndex::new(n_sites).len();
    let scale = 2f64.powi(n_sites as i32 - 2);
    DMatrix::from_fn(m, m, |a, b| if a == b { 2.0 * scale } else { scale })
}

/// Least-squares EAM for `table`.
///
/// Without offset all `2^N` masks enter and the closed form is used. With
/// offset the two trivial masks are dropped (they would pin `s₀ = 0`) and the
/// `(M+1)`-dimensional normal equations are solved by SVD, taking the
/// minimum-norm solution if they are singular.
pub fn fit_eam(table: &EntropyTable, offset: bool) -> Result<(EntanglementAdjacency, FitReport)> {
    let n = table.n_sites();
    if n < 2 {
        return Err(Error::InvalidInput("fitting needs at least 2 sites".into()));
    }
    let m = PairIndex::new(n).len();
    let b = cut_sums(table);
    let scale = 2f64.powi(n as i32 - 2);

    let (eam, method, n_equations, rank_deficient) = if !offset {
        // (I + 𝟙𝟙ᵀ)⁻¹ = I − 𝟙𝟙ᵀ/(M+1)
        let shift = b.iter().sum::<f64>() / (m as f64 + 1.0);
        let weights: Vec<f64> = b.iter().map(|bp| (bp - shift) / scale).collect();
        (
            EntanglementAdjacency::from_pair_weights(n, &weights, None)?,
            FitMethod::ClosedForm,
            1usize << n,
            false,
        )
    } else {
        let full = SubsetMask::full(n).0 as usize;
        let mut normal = DMatrix::zeros(m + 1, m + 1);
        normal
            .view_mut((0, 0), (m, m))
            .copy_from(&analytic_normal_matrix(n));
        for p in 0..m {
            normal[(p, m)] = 2.0 * scale;
            normal[(m, p)] = 2.0 * scale;
        }
        normal[(m, m)] = ((1u64 << n) - 2) as f64;
        let mut rhs = DVector::zeros(m + 1);
        rhs.rows_mut(0, m).copy_from_slice(&b);
        rhs[m] = table.entropies()[1..full].iter().sum();

        let svd = SVD::new(normal, true, true);
        let sigma_max = svd.singular_values.max();
        let threshold = sigma_max * 1e-12 * (m as f64 + 1.0);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > threshold)
            .count();
        let x = svd
            .solve(&rhs, threshold)
            .map_err(|e| Error::InvalidInput(format!("normal equations: {e}")))?;
        (
            EntanglementAdjacency::from_pair_weights(n, &x.as_slice()[..m], Some(x[m]))?,
            FitMethod::GenericLeastSquares,
            (1usize << n) - 2,
            rank < m + 1,
        )
    };

    let residuals = fit_error(table, &eam)?;
    let report = FitReport {
        error: residuals.error,
        max_residual: residuals.max_residual,
        n_equations,
        method,
        offset_enabled: offset,
        rank_deficient,
        by_popcount: residuals.by_popcount,
    };
    Ok((eam, report))
}

/// Predicted entropy of `mask`: cut weight plus `s₀`, and exactly 0 for the
/// empty and full masks.
pub fn predict_entropy(eam: &EntanglementAdjacency, mask: SubsetMask) -> f64 {
    let n = eam.n_sites;
    if mask.is_trivial(n) {
        return 0.0;
    }
    cut_weight(eam, mask) + eam.s0.unwrap_or(0.0)
}

fn cut_weight(eam: &EntanglementAdjacency, mask: SubsetMask) -> f64 {
    let n = eam.n_sites;
    let mut total = 0.0;
    for i in 0..n {
        if !mask.contains(i) {
            continue;
        }
        for j in 0..n {
            if !mask.contains(j) {
                total += eam.j[(i, j)];
            }
        }
    }
    total
}

/// Mean and maximum absolute residual over all `2^N` masks, plus a
/// breakdown by block size.
pub fn fit_error(table: &EntropyTable, eam: &EntanglementAdjacency) -> Result<Residuals> {
    let n = table.n_sites();
    if eam.n_sites != n {
        return Err(Error::InvalidInput(format!(
            "EAM has {} sites, table has {n}",
            eam.n_sites
        )));
    }
    let s = table.entropies();
    // per chunk: (sum, max) for each popcount
    let partials: Vec<Vec<(f64, f64)>> = mask_chunks(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = vec![(0.0, 0.0f64); n + 1];
            for m in lo..hi {
                let r = (s[m as usize] - predict_entropy(eam, SubsetMask(m))).abs();
                let slot = &mut acc[m.count_ones() as usize];
                slot.0 += r;
                slot.1 = slot.1.max(r);
            }
            acc
        })
        .collect();
    let mut totals = vec![(0.0, 0.0f64); n + 1];
    for part in partials {
        for (t, p) in totals.iter_mut().zip(part) {
            t.0 += p.0;
            t.1 = t.1.max(p.1);
        }
    }
    let by_popcount: Vec<PopcountResiduals> = totals
        .iter()
        .enumerate()
        .map(|(k, &(sum, max))| {
            let count = binomial(n, k);
            PopcountResiduals {
                popcount: k,
                n_masks: count,
                mean_abs: sum / count as f64,
                max_abs: max,
            }
        })
        .collect();
    let total: f64 = totals.iter().map(|t| t.0).sum();
    let max_residual = totals.iter().map(|t| t.1).fold(0.0, f64::max);
    Ok(Residuals {
        error: total / (1u64 << n) as f64,
        max_residual,
        by_popcount,
    })
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `I(i:j) = S_i + S_j − S_ij` from the single- and two-site entries; zero diagonal.
pub fn mutual_information_matrix(table: &EntropyTable) -> DMatrix<f64> {
    let n = table.n_sites();
    let s = |mask: u64| table.get(SubsetMask(mask));
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            s(1 << i) + s(1 << j) - s(1 << i | 1 << j)
        }
    })
}

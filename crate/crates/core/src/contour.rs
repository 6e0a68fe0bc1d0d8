//! Entanglement contours: per-site decompositions of a block entropy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eamfit::EntanglementAdjacency;
use crate::entropy::{binary_entropy, SubsetMask};
use crate::linalg::sorted_symmetric_eigen;
use crate::states::FreeFermionGround;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourRoute {
    /// Cut weights of a fitted adjacency matrix.
    Eam,
    /// Mode-resolved correlation-matrix entropies of a Slater determinant.
    FreeFermion,
}

impl std::fmt::Display for ContourRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Eam => "eam",
            Self::FreeFermion => "freefermion",
        })
    }
}

/// Contribution of each site of block `mask` to its entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourVector {
    pub route: ContourRoute,
    pub mask: SubsetMask,
    /// Member sites of the block, ascending.
    pub sites: Vec<usize>,
    /// `values[k]` belongs to `sites[k]`.
    pub values: Vec<f64>,
}

impl ContourVector {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn value_at(&self, site: usize) -> Option<f64> {
        self.sites
            .iter()
            .position(|&s| s == site)
            .map(|k| self.values[k])
    }
}

/// `s_A(i) = Σ_{j∉A} J_ij`. Negative weights pass through unchanged.
pub fn contour_from_eam(eam: &EntanglementAdjacency, mask: SubsetMask) -> Result<ContourVector> {
    let n = eam.n_sites();
    mask.validate(n)?;
    if mask.is_trivial(n) {
        return Err(Error::InvalidInput(
            "contour of an empty or full block".into(),
        ));
    }
    let sites = mask.sites(n);
    let outside = mask.complement(n).sites(n);
    let values = sites
        .iter()
        .map(|&i| outside.iter().map(|&j| eam.weight(i, j)).sum())
        .collect();
    Ok(ContourVector {
        route: ContourRoute::Eam,
        mask,
        sites,
        values,
    })
}

/// `s_A(i) = Σ_p |Φ_p(i)|² H(ν_p)` over eigenpairs of the correlation matrix
/// restricted to the block.
///
/// Degenerate `ν_p` need no tie-breaking: `H(ν_p)` is constant on each
/// eigenspace, so the weights are invariant under rotations within it.
pub fn contour_freefermion(ffg: &FreeFermionGround, mask: SubsetMask) -> Result<ContourVector> {
    let n = ffg.n_sites();
    mask.validate(n)?;
    let sites = mask.sites(n);
    if sites.is_empty() {
        return Err(Error::InvalidInput("contour of an empty block".into()));
    }
    let c = ffg.correlation();
    let block = DMatrix::from_fn(sites.len(), sites.len(), |a, b| c[(sites[a], sites[b])]);
    let (nu, phi) = sorted_symmetric_eigen(block);
    let weights = nu
        .iter()
        .map(|&v| {
            if !(-1e-8..=1.0 + 1e-8).contains(&v) {
                return Err(Error::Eigen {
                    mask: mask.0,
                    reason: format!("eigenvalue {v} outside [0, 1]"),
                });
            }
            binary_entropy(v.clamp(0.0, 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let values = (0..sites.len())
        .map(|row| {
            weights
                .iter()
                .enumerate()
                .map(|(p, h)| phi[(row, p)].powi(2) * h)
                .sum()
        })
        .collect();
    Ok(ContourVector {
        route: ContourRoute::FreeFermion,
        mask,
        sites,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourComparison {
    pub mask: u64,
    pub l1: f64,
    /// `l1 / Σ|a|`.
    pub normalized_l1: f64,
    /// Pearson correlation across sites. Two constant vectors count as
    /// perfectly correlated; one constant and one varying as uncorrelated.
    pub pearson: f64,
    pub sum_a: f64,
    pub sum_b: f64,
}

pub fn compare_contours(a: &ContourVector, b: &ContourVector) -> Result<ContourComparison> {
    if a.mask != b.mask || a.sites != b.sites {
        return Err(Error::MismatchedMasks {
            a: a.mask.0,
            b: b.mask.0,
        });
    }
    let l1: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .sum();
    let norm_a: f64 = a.values.iter().map(|x| x.abs()).sum();
    Ok(ContourComparison {
        mask: a.mask.0,
        l1,
        normalized_l1: if norm_a > 0.0 { l1 / norm_a } else { f64::NAN },
        pearson: pearson(&a.values, &b.values),
        sum_a: a.total(),
        sum_b: b.total(),
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    // relative to the vector scale so that rounding noise reads as constant
    let flat = |var: f64, v: &[f64]| {
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        var <= (1e-14 * scale).powi(2) * n
    };
    match (flat(var_a, a), flat(var_b, b)) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => cov / (var_a * var_b).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eamfit::{fit_eam, predict_entropy};
    use crate::entropy::{all_entropies, block_entropy_freefermion, Engine, SweepCaps};
    use crate::states::{
        build_dimer, build_rainbow, dimerized_hopping, freefermion_ground, Matching,
    };
    use crate::LN2;

    #[test]
    fn rainbow_half_chain_contour_is_flat() {
        let n = 8;
        let t = all_entropies(
            Engine::StateVector(&build_rainbow(n).unwrap()),
            SweepCaps::default(),
        )
        .unwrap();
        let (eam, _) = fit_eam(&t, false).unwrap();
        let c = contour_from_eam(&eam, SubsetMask::prefix(4)).unwrap();
        assert_eq!(c.sites, vec![0, 1, 2, 3]);
        assert!(c.values.iter().all(|v| (v - LN2).abs() < 1e-10));
    }

    #[test]
    fn dimer_half_chain_contour_sits_on_straddling_bond() {
        let n = 8;
        // nearest-neighbour pairs (0,1),(2,3),(4,5),(6,7): the half chain cuts no pair
        let nn = Matching::nearest_neighbor(n).unwrap();
        let t = all_entropies(
            Engine::StateVector(&build_dimer(n, &nn).unwrap()),
            SweepCaps::default(),
        )
        .unwrap();
        let (eam, _) = fit_eam(&t, false).unwrap();
        let c = contour_from_eam(&eam, SubsetMask::prefix(4)).unwrap();
        assert!(c.values.iter().all(|v| v.abs() < 1e-10));

        let m = Matching::new(n, vec![(0, 7), (1, 2), (3, 4), (5, 6)]).unwrap();
        let t = all_entropies(
            Engine::StateVector(&build_dimer(n, &m).unwrap()),
            SweepCaps::default(),
        )
        .unwrap();
        let (eam, _) = fit_eam(&t, false).unwrap();
        let c = contour_from_eam(&eam, SubsetMask::prefix(4)).unwrap();
        let expected = [LN2, 0.0, 0.0, LN2];
        for (v, e) in c.values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_eam_contour() {
        let c = contour_from_eam(&EntanglementAdjacency::zeros(5), SubsetMask(0b00110)).unwrap();
        assert_eq!(c.values, vec![0.0, 0.0]);
        assert!(contour_from_eam(&EntanglementAdjacency::zeros(5), SubsetMask(0)).is_err());
    }

    #[test]
    fn eam_contour_sums_to_prediction() {
        let eam = EntanglementAdjacency::from_pair_weights(
            4,
            &[0.3, -0.1, 0.2, 0.5, 0.05, 0.7],
            Some(0.25),
        )
        .unwrap();
        for m in 1..15u64 {
            let c = contour_from_eam(&eam, SubsetMask(m)).unwrap();
            let expected = predict_entropy(&eam, SubsetMask(m)) - 0.25;
            assert!((c.total() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn freefermion_single_site_and_sum_rule() {
        let ffg = freefermion_ground(&dimerized_hopping(14, 0.5).unwrap(), 7).unwrap();
        let single = contour_freefermion(&ffg, SubsetMask(1 << 3)).unwrap();
        assert!(
            (single.values[0] - binary_entropy(ffg.correlation()[(3, 3)]).unwrap()).abs() < 1e-14
        );

        let half = SubsetMask::prefix(7);
        let c = contour_freefermion(&ffg, half).unwrap();
        let s = block_entropy_freefermion(&ffg, half).unwrap();
        assert!((c.total() - s).abs() < 1e-10);
        assert!(c.values.iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn uniform_chain_contour_reflection_symmetric() {
        let n = 12;
        let ffg = freefermion_ground(&dimerized_hopping(n, 0.0).unwrap(), n / 2).unwrap();
        // block {2,3,8,9} maps to itself under i → n−1−i
        let mask = SubsetMask::from_sites(&[2, 3, 8, 9]);
        let c = contour_freefermion(&ffg, mask).unwrap();
        for (k, &site) in c.sites.iter().enumerate() {
            let mirror = c.value_at(n - 1 - site).unwrap();
            assert!((c.values[k] - mirror).abs() < 1e-9);
        }
    }

    fn vector(values: Vec<f64>) -> ContourVector {
        ContourVector {
            route: ContourRoute::Eam,
            mask: SubsetMask::prefix(values.len()),
            sites: (0..values.len()).collect(),
            values,
        }
    }

    #[test]
    fn comparison_metrics() {
        let a = vector(vec![0.1, 0.4, 0.2, 0.9]);
        let same = compare_contours(&a, &a).unwrap();
        assert_eq!(same.l1, 0.0);
        assert!((same.pearson - 1.0).abs() < 1e-15);

        let shifted = vector(a.values.iter().map(|v| v + 0.25).collect());
        let cmp = compare_contours(&a, &shifted).unwrap();
        assert!((cmp.pearson - 1.0).abs() < 1e-12);
        assert!((cmp.l1 - 4.0 * 0.25).abs() < 1e-12);
        assert!((cmp.sum_b - cmp.sum_a - 1.0).abs() < 1e-12);

        let other = ContourVector {
            mask: SubsetMask(0b1110),
            ..a.clone()
        };
        assert!(matches!(
            compare_contours(&a, &other),
            Err(Error::MismatchedMasks { .. })
        ));
    }

    #[test]
    fn pearson_of_flat_vectors() {
        let flat = vector(vec![LN2; 4]);
        assert_eq!(compare_contours(&flat, &flat).unwrap().pearson, 1.0);
        let varying = vector(vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(compare_contours(&flat, &varying).unwrap().pearson, 0.0);
    }
}

//! Checks shared by the property suite and the acceptance run. Each returns
//! a description of the first violation found.

#![allow(dead_code)]

use eamkit::contour::{contour_freefermion, contour_from_eam};
use eamkit::eamfit::{fit_eam, predict_entropy, EntanglementAdjacency};
use eamkit::entropy::{all_entropies, Engine, EntropyTable, SubsetMask, SweepCaps};
use eamkit::states::{
    build_dimer, freefermion_ground, FreeFermionGround, HoppingMatrix, Matching, PureState,
};
use eamkit::LN2;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generic complex state with amplitudes drawn uniformly from the unit square.
pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> PureState {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    PureState::normalized(n, amps).unwrap()
}

pub fn random_matching(n: usize, rng: &mut ChaCha8Rng) -> Matching {
    let mut sites: Vec<usize> = (0..n).collect();
    sites.shuffle(rng);
    let pairs = sites.chunks(2).map(|p| (p[0], p[1])).collect();
    Matching::new(n, pairs).unwrap()
}

pub fn random_dimer(n: usize, rng: &mut ChaCha8Rng) -> PureState {
    build_dimer(n, &random_matching(n, rng)).unwrap()
}

/// Ground state of a random dense symmetric hopping matrix at half filling.
pub fn random_freefermion(n: usize, rng: &mut ChaCha8Rng) -> FreeFermionGround {
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(-1.0..1.0);
            t[(i, j)] = w;
            t[(j, i)] = w;
        }
    }
    freefermion_ground(&HoppingMatrix::new(t).unwrap(), n / 2).unwrap()
}

pub fn table_of(state: &PureState) -> EntropyTable {
    all_entropies(Engine::StateVector(state), SweepCaps::default()).unwrap()
}

pub fn ff_table_of(ffg: &FreeFermionGround) -> EntropyTable {
    all_entropies(Engine::FreeFermion(ffg), SweepCaps::default()).unwrap()
}

fn all_masks(n: usize) -> impl Iterator<Item = SubsetMask> {
    (0..1u64 << n).map(SubsetMask)
}

pub fn purity_symmetry(table: &EntropyTable) -> Check {
    let n = table.n_sites();
    for m in all_masks(n) {
        let (a, b) = (table.get(m), table.get(m.complement(n)));
        if (a - b).abs() > 1e-9 {
            return Err(format!("S[{}] = {a} but its complement has {b}", m.0));
        }
    }
    Ok(())
}

pub fn subadditivity(table: &EntropyTable) -> Check {
    let n = table.n_sites();
    for i in 0..n {
        for j in i + 1..n {
            let sij = table.get(SubsetMask::from_sites(&[i, j]));
            let bound =
                table.get(SubsetMask::from_sites(&[i])) + table.get(SubsetMask::from_sites(&[j]));
            if sij > bound + 1e-9 {
                return Err(format!(
                    "S_{{{i}{j}}} = {sij} exceeds S_{i} + S_{j} = {bound}"
                ));
            }
        }
    }
    Ok(())
}

pub fn entropy_cap(table: &EntropyTable) -> Check {
    let n = table.n_sites();
    for m in all_masks(n) {
        let k = m.popcount();
        let cap = k.min(n - k) as f64 * LN2;
        if table.get(m) > cap + 1e-9 {
            return Err(format!("S[{}] = {} exceeds {cap}", m.0, table.get(m)));
        }
    }
    Ok(())
}

/// The EAM contour of every proper mask sums to the EAM prediction minus `s0`.
pub fn eam_contour_sum_rule(eam: &EntanglementAdjacency) -> Check {
    let n = eam.n_sites();
    for m in all_masks(n).filter(|m| !m.is_trivial(n)) {
        let total = contour_from_eam(eam, m).map_err(|e| e.to_string())?.total();
        let predicted = predict_entropy(eam, m) - eam.s0().unwrap_or(0.0);
        if (total - predicted).abs() > 1e-12 * (1.0 + predicted.abs()) {
            return Err(format!(
                "mask {}: contour sums to {total}, prediction {predicted}",
                m.0
            ));
        }
    }
    Ok(())
}

/// The correlation-matrix contour is nonnegative and sums to the block entropy.
pub fn freefermion_contour_sum_rule(ffg: &FreeFermionGround, table: &EntropyTable) -> Check {
    let n = table.n_sites();
    for m in all_masks(n).filter(|m| !m.is_trivial(n)) {
        let c = contour_freefermion(ffg, m).map_err(|e| e.to_string())?;
        if (c.total() - table.get(m)).abs() > 1e-10 {
            return Err(format!(
                "mask {}: contour sums to {}, S = {}",
                m.0,
                c.total(),
                table.get(m)
            ));
        }
        if let Some(v) = c.values.iter().find(|&&v| v < -1e-10) {
            return Err(format!("mask {}: negative contour value {v}", m.0));
        }
    }
    Ok(())
}

/// For states the ansatz reproduces exactly, `J_ij = (S_i + S_j − S_ij) / 2`.
pub fn half_mutual_information(table: &EntropyTable) -> Check {
    let n = table.n_sites();
    let (eam, report) = fit_eam(table, false).map_err(|e| e.to_string())?;
    if report.error > 1e-9 {
        return Err(format!(
            "state is not exactly representable (error {})",
            report.error
        ));
    }
    let mi = eamkit::eamfit::mutual_information_matrix(table);
    for i in 0..n {
        for j in i + 1..n {
            if (eam.weight(i, j) - mi[(i, j)] / 2.0).abs() > 1e-9 {
                return Err(format!(
                    "J[{i}][{j}] = {} but I/2 = {}",
                    eam.weight(i, j),
                    mi[(i, j)] / 2.0
                ));
            }
        }
    }
    Ok(())
}

/// Scaling every entropy by `factor` scales the fitted weights and offset.
pub fn fit_linearity(table: &EntropyTable, factor: f64) -> Check {
    for offset in [false, true] {
        let (base, _) = fit_eam(table, offset).map_err(|e| e.to_string())?;
        let (scaled, _) = fit_eam(&table.scaled(factor), offset).map_err(|e| e.to_string())?;
        let tol = 1e-10 * (1.0 + factor.abs());
        let diff = (scaled.matrix() - base.matrix() * factor).amax();
        if diff > tol {
            return Err(format!(
                "offset={offset}: weights deviate by {diff} under scaling {factor}"
            ));
        }
        if let (Some(a), Some(b)) = (base.s0(), scaled.s0()) {
            if (b - a * factor).abs() > tol {
                return Err(format!("offset {b} is not {factor} × {a}"));
            }
        }
    }
    Ok(())
}

/// Runs every general-purpose check on one table.
pub fn table_checks(table: &EntropyTable) -> Check {
    purity_symmetry(table)?;
    subadditivity(table)?;
    entropy_cap(table)
}

/// Whether the sites of `mask` form one contiguous run.
pub fn is_interval(mask: SubsetMask) -> bool {
    let m = mask.0;
    m != 0 && {
        let shifted = m >> m.trailing_zeros();
        shifted & (shifted + 1) == 0
    }
}

/// Masks on which qubit and fermionic entropies must coincide: the block or
/// its complement is a single interval, so no Jordan–Wigner string crosses
/// the partition.
pub fn string_free(mask: SubsetMask, n: usize) -> bool {
    mask.is_trivial(n) || is_interval(mask) || is_interval(mask.complement(n))
}

/// Re-expresses a Jordan–Wigner state in the mode order "sites of `mask`
/// first, then the rest", including the fermionic exchange signs. The qubit
/// entropy of the leading `|mask|` sites of the result is then the fermionic
/// entropy of `mask` in the original state.
pub fn fermionic_reorder(state: &PureState, mask: SubsetMask) -> PureState {
    let n = state.n_sites();
    let order: Vec<usize> = (0..n)
        .filter(|&s| mask.contains(s))
        .chain((0..n).filter(|&s| !mask.contains(s)))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (b, amp) in state.amplitudes().iter().enumerate() {
        let occupied: Vec<usize> = order.iter().copied().filter(|&s| b >> s & 1 == 1).collect();
        let inversions = (0..occupied.len())
            .map(|i| {
                occupied[i + 1..]
                    .iter()
                    .filter(|&&s| s < occupied[i])
                    .count()
            })
            .sum::<usize>();
        let target: usize = order
            .iter()
            .enumerate()
            .filter(|(_, &s)| b >> s & 1 == 1)
            .map(|(k, _)| 1 << k)
            .sum();
        out[target] = if inversions % 2 == 1 { -amp } else { *amp };
    }
    PureState::new(n, out).unwrap()
}

//! Quantum states: valence-bond (dimer, rainbow) and GHZ states, exact
//! ground states of XXZ spin chains, and free-fermion Slater determinants.
//!
//! Basis convention: bit `i` of a basis index is the local state of site `i`
//! (site 0 is the least significant bit), with bit value 1 read as ↑.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{lanczos_lowest, sorted_symmetric_eigen, LanczosOptions};
use crate::{Error, Result};

/// Default site cap for state-vector construction.
pub const DEFAULT_STATEVECTOR_CAP: usize = 14;

/// Hard limit for any dense state vector (2^24 complex amplitudes = 256 MiB).
pub const MAX_DENSE_SITES: usize = 24;

const NORM_TOL: f64 = 1e-12;

/// Normalized amplitude vector over `n_sites` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_DENSE_SITES {
            return Err(Error::InvalidInput(format!(
                "unsupported site count {n_sites}"
            )));
        }
        if amplitudes.len() != 1usize << n_sites {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes given for {} sites",
                amplitudes.len(),
                n_sites
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("state norm² is {norm}, not 1")));
        }
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    /// Rescales `amplitudes` to unit norm before validating.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_sites, amplitudes)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// True if every amplitude has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0)
    }
}

/// A perfect matching of sites into singlet pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Validates that `pairs` cover `0..n_sites` exactly once.
    pub fn new(n_sites: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = vec![false; n_sites];
        for &(i, j) in &pairs {
            for s in [i, j] {
                if s >= n_sites {
                    return Err(Error::InvalidInput(format!(
                        "site {s} out of range for {n_sites} sites"
                    )));
                }
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidInput(format!(
                        "site {s} appears twice in matching"
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidInput(format!("site {missing} is unmatched")));
        }
        Ok(Self { pairs })
    }

    /// Pairs (0,1), (2,3), ...
    pub fn nearest_neighbor(n_sites: usize) -> Result<Self> {
        check_even(n_sites)?;
        Self::new(
            n_sites,
            (0..n_sites / 2).map(|k| (2 * k, 2 * k + 1)).collect(),
        )
    }

    /// Pairs each site with its mirror image about the chain centre.
    pub fn rainbow(n_sites: usize) -> Result<Self> {
        check_even(n_sites)?;
        Self::new(
            n_sites,
            (0..n_sites / 2).map(|k| (k, n_sites - 1 - k)).collect(),
        )
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "valence-bond states need an even, nonzero number of sites (got {n})"
        )));
    }
    Ok(())
}

/// Tensor product of singlets `(|↑↓⟩ − |↓↑⟩)/√2`, one per matched pair.
/// The first-listed site of each pair is ↑ in the positive term.
pub fn build_dimer(n: usize, matching: &Matching) -> Result<PureState> {
    check_even(n)?;
    if n > MAX_DENSE_SITES {
        return Err(Error::CapExceeded {
            n,
            cap: MAX_DENSE_SITES,
        });
    }
    // Re-validate against n: the matching may have been built for another size.
    let matching = Matching::new(n, matching.pairs.clone())?;
    let k = matching.pairs.len();
    let mag = 0.5f64.powf(k as f64 / 2.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    // choice bit c set means the pair's second site carries ↑ (negative term)
    for choices in 0u64..(1u64 << k) {
        let mut index = 0usize;
        let mut sign = 1.0;
        for (p, &(i, j)) in matching.pairs.iter().enumerate() {
            if choices >> p & 1 == 0 {
                index |= 1 << i;
            } else {
                index |= 1 << j;
                sign = -sign;
            }
        }
        amplitudes[index] = Complex64::new(sign * mag, 0.0);
    }
    PureState::normalized(n, amplitudes)
}

/// Dimer state with pairs `(k, n−1−k)`.
pub fn build_rainbow(n: usize) -> Result<PureState> {
    build_dimer(n, &Matching::rainbow(n)?)
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn build_ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "GHZ state needs at least 2 sites (got {n})"
        )));
    }
    if n > MAX_DENSE_SITES {
        return Err(Error::CapExceeded {
            n,
            cap: MAX_DENSE_SITES,
        });
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amplitudes[0] = Complex64::new(h, 0.0);
    amplitudes[(1 << n) - 1] = Complex64::new(h, 0.0);
    PureState::normalized(n, amplitudes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Self::Open),
            "periodic" => Ok(Self::Periodic),
            other => Err(Error::InvalidInput(format!("unknown boundary '{other}'"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Open => "open",
            Self::Periodic => "periodic",
        })
    }
}

/// Spin-½ XXZ chain `H = Σ_b J_b (SˣSˣ + SʸSʸ + Δ SᶻSᶻ)` with `S = σ/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct XxzSpec {
    pub n_sites: usize,
    pub delta: f64,
    pub boundary: Boundary,
    /// Per-bond couplings `J_b` for bond `(b, b+1 mod N)`; `None` means all ones.
    pub couplings: Option<Vec<f64>>,
}

impl XxzSpec {
    pub fn new(n_sites: usize, delta: f64, boundary: Boundary) -> Self {
        Self {
            n_sites,
            delta,
            boundary,
            couplings: None,
        }
    }

    /// Bonds as `(i, j, J)`. A periodic chain of two sites has a single bond.
    pub fn bonds(&self) -> Result<Vec<(usize, usize, f64)>> {
        let n = self.n_sites;
        let n_bonds = match self.boundary {
            Boundary::Open => n - 1,
            Boundary::Periodic if n == 2 => 1,
            Boundary::Periodic => n,
        };
        if let Some(c) = &self.couplings {
            if c.len() != n_bonds {
                return Err(Error::InvalidInput(format!(
                    "{} couplings given for {} bonds",
                    c.len(),
                    n_bonds
                )));
            }
        }
        Ok((0..n_bonds)
            .map(|b| {
                let j = self.couplings.as_ref().map_or(1.0, |c| c[b]);
                (b, (b + 1) % n, j)
            })
            .collect())
    }

    /// XX chain (`Δ = 0`) equivalent under Jordan–Wigner to nearest-neighbour
    /// hopping on an open chain. Rejects hopping with longer-range terms or
    /// on-site potentials.
    pub fn jordan_wigner_equivalent(hopping: &HoppingMatrix) -> Result<Self> {
        let n = hopping.n_sites();
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) != 1 && hopping.t()[(i, j)] != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "hopping ({i},{j}) is not nearest-neighbour; no spin-chain equivalent"
                    )));
                }
            }
        }
        let couplings = (0..n - 1).map(|b| hopping.t()[(b, b + 1)]).collect();
        Ok(Self {
            n_sites: n,
            delta: 0.0,
            boundary: Boundary::Open,
            couplings: Some(couplings),
        })
    }
}

#[derive(Debug, Clone)]
pub struct XxzGround {
    pub state: PureState,
    pub energy: f64,
    /// Second-lowest energy estimate in the same sector.
    pub next_energy: Option<f64>,
    pub residual: f64,
    pub degenerate: bool,
}

/// Basis of the zero-magnetization sector, ascending.
fn half_filling_basis(n: usize) -> Vec<u64> {
    (0u64..1 << n)
        .filter(|s| s.count_ones() as usize == n / 2)
        .collect()
}

/// Ground state of the XXZ chain in the `Sᶻ = 0` sector, embedded in the full space.
///
/// The global phase makes the first largest-magnitude amplitude real positive.
pub fn xxz_ground_state(spec: &XxzSpec, cap: usize) -> Result<XxzGround> {
    let n = spec.n_sites;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "XXZ ground state needs an even number of sites ≥ 2 (got {n})"
        )));
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let bonds = spec.bonds()?;
    let basis = half_filling_basis(n);
    let dim = basis.len();

    let mut diag = vec![0.0; dim];
    let mut hops: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    for (row, &s) in basis.iter().enumerate() {
        for &(i, j, coupling) in &bonds {
            let aligned = (s >> i & 1) == (s >> j & 1);
            diag[row] += coupling * spec.delta * if aligned { 0.25 } else { -0.25 };
            if !aligned && coupling != 0.0 {
                let flipped = s ^ (1 << i) ^ (1 << j);
                let col = basis
                    .binary_search(&flipped)
                    .expect("flip preserves magnetization");
                hops[row].push((col, 0.5 * coupling));
            }
        }
    }

    let apply = |x: &[f64], y: &mut [f64]| {
        for row in 0..dim {
            let mut acc = diag[row] * x[row];
            for &(col, v) in &hops[row] {
                acc += v * x[col];
            }
            y[row] = acc;
        }
    };
    let low = lanczos_lowest(dim, apply, &LanczosOptions::default())?;

    let degenerate = low.second.is_some_and(|e1| (e1 - low.value).abs() < 1e-10);
    if degenerate {
        warn!(
            "XXZ ground state (N={n}, Δ={}) is degenerate within 1e-10; returning the solver's lowest vector",
            spec.delta
        );
    }

    let mut vector = low.vector;
    let max = vector.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pivot = vector
        .iter()
        .position(|v| v.abs() >= max - 1e-12)
        .unwrap_or(0);
    if vector[pivot] < 0.0 {
        vector.iter_mut().for_each(|v| *v = -*v);
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (&s, &v) in basis.iter().zip(&vector) {
        amplitudes[s as usize] = Complex64::new(v, 0.0);
    }
    Ok(XxzGround {
        state: PureState::normalized(n, amplitudes)?,
        energy: low.value,
        next_energy: low.second,
        residual: low.residual,
        degenerate,
    })
}

/// Real symmetric hopping amplitudes `t_ij`; the diagonal holds on-site terms.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingMatrix {
    t: DMatrix<f64>,
}

impl HoppingMatrix {
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        if !t.is_square() || t.nrows() == 0 {
            return Err(Error::InvalidInput(
                "hopping matrix must be square and nonempty".into(),
            ));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "hopping matrix has non-finite entries".into(),
            ));
        }
        for i in 0..t.nrows() {
            for j in 0..i {
                if t[(i, j)] != t[(j, i)] {
                    return Err(Error::InvalidInput(format!(
                        "hopping matrix asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { t })
    }

    pub fn n_sites(&self) -> usize {
        self.t.nrows()
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }
}

/// Open chain with bond `(b, b+1)` carrying `1 + δ(−1)^(b+1)`.
///
/// Index 0 here is site 1 of the conventional 1-based labelling, so the first
/// bond is weak for positive `δ`.
pub fn dimerized_hopping(n: usize, delta: f64) -> Result<HoppingMatrix> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 sites (got {n})"
        )));
    }
    let mut t = DMatrix::zeros(n, n);
    for b in 0..n - 1 {
        let sign = if (b + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let amp = 1.0 + delta * sign;
        t[(b, b + 1)] = amp;
        t[(b + 1, b)] = amp;
    }
    HoppingMatrix::new(t)
}

/// Slater-determinant ground state of `H = −½ Σ_ij t_ij (c†_i c_j + h.c.)`.
#[derive(Debug, Clone)]
pub struct FreeFermionGround {
    hopping: HoppingMatrix,
    occupied: Vec<usize>,
    /// Single-particle energies, ascending.
    energies: Vec<f64>,
    /// Columns are single-particle eigenvectors, in energy order.
    modes: DMatrix<f64>,
    correlation: DMatrix<f64>,
}

impl FreeFermionGround {
    pub fn n_sites(&self) -> usize {
        self.hopping.n_sites()
    }

    pub fn hopping(&self) -> &HoppingMatrix {
        &self.hopping
    }

    pub fn occupied_modes(&self) -> &[usize] {
        &self.occupied
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn mode_vectors(&self) -> &DMatrix<f64> {
        &self.modes
    }

    /// `C_ij = ⟨c†_i c_j⟩`.
    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }
}

/// Fill the `n_particles` lowest single-particle modes of `−t/2`.
pub fn freefermion_ground(
    hopping: &HoppingMatrix,
    n_particles: usize,
) -> Result<FreeFermionGround> {
    let n = hopping.n_sites();
    if n_particles > n {
        return Err(Error::InvalidInput(format!(
            "{n_particles} particles on {n} sites"
        )));
    }
    let (energies, modes) = sorted_symmetric_eigen(hopping.t() * -0.5);
    if n_particles > 0 && n_particles < n {
        let below = energies[n_particles - 1];
        let above = energies[n_particles];
        if (above - below).abs() < 1e-12 {
            return Err(Error::FermiDegeneracy {
                below,
                above,
                gap: (above - below).abs(),
            });
        }
    }
    let occ = modes.columns(0, n_particles);
    let correlation = occ * occ.transpose();
    Ok(FreeFermionGround {
        hopping: hopping.clone(),
        occupied: (0..n_particles).collect(),
        energies,
        modes,
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn re(state: &PureState) -> Vec<f64> {
        state.amplitudes().iter().map(|a| a.re).collect()
    }

    fn approx_eq(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn single_singlet_amplitudes() {
        let m = Matching::new(2, vec![(0, 1)]).unwrap();
        let s = build_dimer(2, &m).unwrap();
        assert!(approx_eq(
            &re(&s),
            &[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0],
            1e-15
        ));
    }

    #[test]
    fn dimer_rejects_bad_input() {
        assert!(build_dimer(
            3,
            &Matching {
                pairs: vec![(0, 1)]
            }
        )
        .is_err());
        assert!(Matching::new(4, vec![(0, 1), (1, 2)]).is_err());
        assert!(Matching::new(4, vec![(0, 1)]).is_err());
        assert!(Matching::new(4, vec![(0, 1), (2, 4)]).is_err());
        assert!(build_rainbow(5).is_err());
    }

    #[test]
    fn rainbow_pairs_mirror_sites() {
        assert_eq!(Matching::rainbow(4).unwrap().pairs(), &[(0, 3), (1, 2)]);
        assert_eq!(
            build_rainbow(2).unwrap(),
            build_dimer(2, &Matching::new(2, vec![(0, 1)]).unwrap()).unwrap()
        );
        for n in [4, 6, 8] {
            let direct = build_dimer(n, &Matching::rainbow(n).unwrap()).unwrap();
            assert_eq!(build_rainbow(n).unwrap(), direct);
        }
    }

    #[test]
    fn ghz_amplitudes() {
        let g = build_ghz(2).unwrap();
        assert!(approx_eq(
            &re(&g),
            &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
            1e-15
        ));
        assert!(build_ghz(1).is_err());
    }

    #[test]
    fn states_are_normalized() {
        for s in [
            build_ghz(7).unwrap(),
            build_rainbow(10).unwrap(),
            build_dimer(6, &Matching::nearest_neighbor(6).unwrap()).unwrap(),
        ] {
            let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_site_heisenberg_is_singlet() {
        let g = xxz_ground_state(&XxzSpec::new(2, 1.0, Boundary::Open), 14).unwrap();
        assert!(approx_eq(
            &re(&g.state),
            &[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0],
            1e-12
        ));
        assert!((g.energy + 0.75).abs() < 1e-12);
        assert!(g.residual <= 1e-10);
    }

    #[test]
    fn xxz_energy_matches_dense_diagonalization() {
        // Dense full-space Hamiltonian built independently from Pauli algebra.
        let n = 6;
        let delta = 0.7;
        let dim = 1 << n;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for s in 0..dim {
            for b in 0..n {
                let (i, j) = (b, (b + 1) % n);
                let zi = if s >> i & 1 == 1 { 0.5 } else { -0.5 };
                let zj = if s >> j & 1 == 1 { 0.5 } else { -0.5 };
                h[(s, s)] += delta * zi * zj;
                if zi != zj {
                    h[(s ^ (1 << i) ^ (1 << j), s)] += 0.5;
                }
            }
        }
        let (vals, _) = sorted_symmetric_eigen(h);
        let g = xxz_ground_state(&XxzSpec::new(n, delta, Boundary::Periodic), 14).unwrap();
        // global ground state lies in Sz = 0 for this antiferromagnetic chain
        assert!((g.energy - vals[0]).abs() < 1e-10);
        assert!(!g.degenerate);
    }

    #[test]
    fn xxz_rejects_odd_and_capped() {
        assert!(xxz_ground_state(&XxzSpec::new(5, 1.0, Boundary::Open), 14).is_err());
        assert!(matches!(
            xxz_ground_state(&XxzSpec::new(16, 1.0, Boundary::Open), 14),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn dimerized_hopping_amplitudes() {
        let bonds = |h: &HoppingMatrix| {
            (0..h.n_sites() - 1)
                .map(|b| h.t()[(b, b + 1)])
                .collect::<Vec<_>>()
        };
        assert_eq!(
            bonds(&dimerized_hopping(4, 0.5).unwrap()),
            vec![0.5, 1.5, 0.5]
        );
        assert_eq!(
            bonds(&dimerized_hopping(4, 0.0).unwrap()),
            vec![1.0, 1.0, 1.0]
        );
        assert_eq!(bonds(&dimerized_hopping(2, 0.3).unwrap()), vec![0.7]);
        let h = dimerized_hopping(5, 0.2).unwrap();
        assert_eq!(h.t()[(0, 2)], 0.0);
        assert_eq!(h.t()[(3, 2)], h.t()[(2, 3)]);
    }

    #[test]
    fn two_site_correlation_matrix() {
        let ffg = freefermion_ground(&dimerized_hopping(2, 0.0).unwrap(), 1).unwrap();
        let c = ffg.correlation();
        for v in c.iter() {
            assert!((v - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn correlation_is_projector() {
        let ffg = freefermion_ground(&dimerized_hopping(8, 0.5).unwrap(), 4).unwrap();
        let c = ffg.correlation();
        let defect = (c * c - c).abs().max();
        assert!(defect <= 1e-10);
        assert!((c - c.transpose()).abs().max() == 0.0 || (c - c.transpose()).abs().max() < 1e-15);
        let (nu, _) = sorted_symmetric_eigen(c.clone());
        assert!(nu.iter().all(|&v| (-1e-10..=1.0 + 1e-10).contains(&v)));
    }

    #[test]
    fn fermi_degeneracy_is_an_error() {
        // periodic 4-site ring at half filling: levels −1, 0, 0, 1 (in units of t)
        let mut t = DMatrix::zeros(4, 4);
        for b in 0..4 {
            t[(b, (b + 1) % 4)] = 1.0;
            t[((b + 1) % 4, b)] = 1.0;
        }
        let h = HoppingMatrix::new(t).unwrap();
        assert!(matches!(
            freefermion_ground(&h, 2),
            Err(Error::FermiDegeneracy { .. })
        ));
        assert!(freefermion_ground(&h, 1).is_ok());
        assert!(freefermion_ground(&h, 5).is_err());
    }

    #[test]
    fn jordan_wigner_mapping_rejects_long_range() {
        let mut t = DMatrix::zeros(3, 3);
        t[(0, 2)] = 1.0;
        t[(2, 0)] = 1.0;
        assert!(XxzSpec::jordan_wigner_equivalent(&HoppingMatrix::new(t).unwrap()).is_err());
        let spec = XxzSpec::jordan_wigner_equivalent(&dimerized_hopping(4, 0.5).unwrap()).unwrap();
        assert_eq!(spec.couplings, Some(vec![0.5, 1.5, 0.5]));
        assert_eq!(spec.delta, 0.0);
    }
}

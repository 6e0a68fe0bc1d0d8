//! Von Neumann block entropies and the all-bipartition sweep.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::states::{FreeFermionGround, PureState, DEFAULT_STATEVECTOR_CAP};
use crate::{Error, Result};

/// Default site cap for the free-fermion sweep.
pub const DEFAULT_FREEFERMION_CAP: usize = 20;

/// Block `A` of a bipartition: bit `i` set means site `i ∈ A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn full(n_sites: usize) -> Self {
        Self((1u64 << n_sites) - 1)
    }

    /// Sites `0..len` (the left half-chain when `len = N/2`).
    pub fn prefix(len: usize) -> Self {
        Self((1u64 << len) - 1)
    }

    pub fn from_sites(sites: &[usize]) -> Self {
        Self(sites.iter().fold(0, |m, &s| m | 1 << s))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn popcount(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn complement(self, n_sites: usize) -> Self {
        Self(!self.0 & Self::full(n_sites).0)
    }

    pub fn is_trivial(self, n_sites: usize) -> bool {
        self.0 == 0 || self == Self::full(n_sites)
    }

    pub fn is_valid(self, n_sites: usize) -> bool {
        n_sites < 64 && self.0 >> n_sites == 0
    }

    pub fn validate(self, n_sites: usize) -> Result<Self> {
        if self.is_valid(n_sites) {
            Ok(self)
        } else {
            Err(Error::InvalidMask {
                mask: self.0,
                n_sites,
            })
        }
    }

    /// Member sites, ascending.
    pub fn sites(self, n_sites: usize) -> Vec<usize> {
        (0..n_sites).filter(|&i| self.contains(i)).collect()
    }
}

/// `−Σ p ln p` of a probability spectrum, with `0 ln 0 = 0`.
pub fn von_neumann(spectrum: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    let mut entropy = 0.0;
    for &p in spectrum {
        if p < -1e-12 || !p.is_finite() {
            return Err(Error::OutOfRange {
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let p = p.max(0.0);
        sum += p;
        if p > 0.0 {
            entropy -= p * p.ln();
        }
    }
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::SpectrumNotNormalized { sum });
    }
    Ok(entropy)
}

/// `H(x) = −x ln x − (1−x) ln(1−x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-1e-10..=1.0 + 1e-10).contains(&x) || x.is_nan() {
        return Err(Error::OutOfRange {
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let x = x.clamp(0.0, 1.0);
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Scatter table: entry `k` is the basis index with the bits of `k`
/// deposited onto `sites` in order.
fn deposit_table(sites: &[usize]) -> Vec<usize> {
    (0..1usize << sites.len())
        .map(|k| {
            sites
                .iter()
                .enumerate()
                .fold(0, |acc, (b, &s)| acc | ((k >> b & 1) << s))
        })
        .collect()
}

fn clamp_probabilities(
    values: impl IntoIterator<Item = f64>,
    mask: SubsetMask,
) -> Result<Vec<f64>> {
    values
        .into_iter()
        .map(|p| {
            if (-1e-8..=1.0 + 1e-8).contains(&p) {
                Ok(p.clamp(0.0, 1.0))
            } else {
                Err(Error::Eigen {
                    mask: mask.0,
                    reason: format!("eigenvalue {p} outside [0, 1]"),
                })
            }
        })
        .collect()
}

/// Entropy of block `mask` from the Schmidt spectrum of the state.
pub fn block_entropy_statevector(state: &PureState, mask: SubsetMask) -> Result<f64> {
    let n = state.n_sites();
    mask.validate(n)?;
    if mask.is_trivial(n) {
        return Ok(0.0);
    }
    let inside = mask.sites(n);
    let outside = mask.complement(n).sites(n);
    let (row_sites, col_sites) = if inside.len() <= outside.len() {
        (inside, outside)
    } else {
        (outside, inside)
    };
    let rows = deposit_table(&row_sites);
    let cols = deposit_table(&col_sites);
    let amps = state.amplitudes();

    let singular = if state.is_real() {
        DMatrix::<f64>::from_fn(rows.len(), cols.len(), |r, c| amps[rows[r] | cols[c]].re)
            .singular_values()
            .iter()
            .copied()
            .collect::<Vec<_>>()
    } else {
        DMatrix::<Complex64>::from_fn(rows.len(), cols.len(), |r, c| amps[rows[r] | cols[c]])
            .singular_values()
            .iter()
            .copied()
            .collect::<Vec<_>>()
    };
    let probs = clamp_probabilities(singular.iter().map(|s| s * s), mask)?;
    von_neumann(&probs)
}

/// Entropy of block `mask` from the spectrum of the restricted correlation matrix.
pub fn block_entropy_freefermion(ffg: &FreeFermionGround, mask: SubsetMask) -> Result<f64> {
    let n = ffg.n_sites();
    mask.validate(n)?;
    let sites = mask.sites(n);
    if sites.is_empty() {
        return Ok(0.0);
    }
    let c = ffg.correlation();
    let block = DMatrix::from_fn(sites.len(), sites.len(), |a, b| c[(sites[a], sites[b])]);
    let nu = clamp_probabilities(block.symmetric_eigenvalues().iter().copied(), mask)?;
    nu.into_iter().map(binary_entropy).sum()
}

/// State description an entropy sweep runs on.
#[derive(Debug, Clone, Copy)]
pub enum Engine<'a> {
    StateVector(&'a PureState),
    FreeFermion(&'a FreeFermionGround),
}

impl Engine<'_> {
    pub fn id(&self) -> &'static str {
        match self {
            Engine::StateVector(_) => "statevector",
            Engine::FreeFermion(_) => "freefermion",
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            Engine::StateVector(s) => s.n_sites(),
            Engine::FreeFermion(f) => f.n_sites(),
        }
    }

    pub fn block_entropy(&self, mask: SubsetMask) -> Result<f64> {
        match self {
            Engine::StateVector(s) => block_entropy_statevector(s, mask),
            Engine::FreeFermion(f) => block_entropy_freefermion(f, mask),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepCaps {
    pub statevector: usize,
    pub freefermion: usize,
}

impl Default for SweepCaps {
    fn default() -> Self {
        Self {
            statevector: DEFAULT_STATEVECTOR_CAP,
            freefermion: DEFAULT_FREEFERMION_CAP,
        }
    }
}

/// Block entropies of all `2^N` bipartitions of one state, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTable {
    n_sites: usize,
    entropies: Vec<f64>,
    engine: String,
    model: String,
}

impl EntropyTable {
    /// Wraps externally produced entropies; only the shape is checked.
    pub fn new(n_sites: usize, entropies: Vec<f64>, engine: &str, model: &str) -> Result<Self> {
        if n_sites == 0 || n_sites > 30 {
            return Err(Error::InvalidInput(format!(
                "unsupported site count {n_sites}"
            )));
        }
        let expected = 1usize << n_sites;
        if entropies.len() != expected {
            return Err(Error::IncompleteTable {
                expected,
                got: entropies.len(),
            });
        }
        if let Some(bad) = entropies.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entropy at mask {bad}"
            )));
        }
        Ok(Self {
            n_sites,
            entropies,
            engine: engine.to_owned(),
            model: model.to_owned(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn entropies(&self) -> &[f64] {
        &self.entropies
    }

    pub fn get(&self, mask: SubsetMask) -> f64 {
        self.entropies[mask.0 as usize]
    }

    pub fn engine(&self) -> &str {
        &self.engine
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entropies: self.entropies.iter().map(|s| s * factor).collect(),
            ..self.clone()
        }
    }

    /// Largest `|S[m] − S[~m]|`.
    pub fn purity_defect(&self) -> f64 {
        let full = SubsetMask::full(self.n_sites);
        (0..self.entropies.len())
            .map(|m| (self.entropies[m] - self.entropies[(m as u64 ^ full.0) as usize]).abs())
            .fold(0.0, f64::max)
    }
}

/// Masks whose entropy is computed directly; every other nontrivial mask is
/// the complement of one of these.
fn canonical_masks(n: usize) -> Vec<u64> {
    (1u64..(1u64 << n) - 1)
        .filter(|&m| {
            let k = m.count_ones() as usize;
            k < n - k || (k == n - k && m & 1 == 1)
        })
        .collect()
}

/// Sweeps all bipartitions. Canonical masks are evaluated in parallel and
/// complements are filled by copying; `S[∅] = S[full] = 0` is set exactly.
pub fn all_entropies(engine: Engine<'_>, caps: SweepCaps) -> Result<EntropyTable> {
    let n = engine.n_sites();
    let cap = match engine {
        Engine::StateVector(_) => caps.statevector,
        Engine::FreeFermion(_) => caps.freefermion,
    };
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let canonical = canonical_masks(n);
    let values: Vec<f64> = canonical
        .par_iter()
        .map(|&m| engine.block_entropy(SubsetMask(m)))
        .collect::<Result<_>>()?;

    let full = SubsetMask::full(n).0;
    let mut entropies = vec![0.0; 1 << n];
    for (&m, &s) in canonical.iter().zip(&values) {
        entropies[m as usize] = s;
        entropies[(m ^ full) as usize] = s;
    }
    entropies[0] = 0.0;
    entropies[full as usize] = 0.0;
    EntropyTable::new(n, entropies, engine.id(), "")
}

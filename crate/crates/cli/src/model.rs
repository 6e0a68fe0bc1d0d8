//! Turns command-line model arguments into states and entropy tables.

use eamkit::entropy::{all_entropies, Engine, EntropyTable, SweepCaps};
use eamkit::states::{
    build_dimer, build_ghz, build_rainbow, dimerized_hopping, freefermion_ground, xxz_ground_state,
    Boundary, FreeFermionGround, HoppingMatrix, Matching, PureState, XxzSpec,
};
use log::info;

use crate::args::{BoundaryArg, EngineChoice, ModelArgs, ModelKind};
use crate::error::CliError;

pub const MAX_N_ENV: &str = "EAMKIT_MAX_N";

/// Statevector cap, overridable through `EAMKIT_MAX_N`.
pub fn sweep_caps() -> Result<SweepCaps, CliError> {
    let mut caps = SweepCaps::default();
    if let Ok(raw) = std::env::var(MAX_N_ENV) {
        caps.statevector = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{MAX_N_ENV}={raw} is not a site count")))?;
    }
    Ok(caps)
}

/// A validated model with its engine resolved.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n: usize,
    pub matching: Option<Vec<(usize, usize)>>,
    pub dimerized: f64,
    pub aniso: f64,
    pub boundary: Boundary,
    pub filling: usize,
    pub use_freefermion_engine: bool,
}

fn parse_matching(raw: &str) -> Result<Vec<(usize, usize)>, CliError> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once('-')
                .ok_or_else(|| CliError::Usage(format!("matching pair '{pair}' is not i-j")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad site index '{s}' in matching")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

impl ModelConfig {
    pub fn from_args(args: &ModelArgs) -> Result<Self, CliError> {
        let kind = args
            .model
            .ok_or_else(|| CliError::Usage("--model is required".into()))?;
        let n = args
            .n
            .ok_or_else(|| CliError::Usage("--n is required".into()))?;
        if n < 2 {
            return Err(CliError::Usage(format!("--n must be at least 2 (got {n})")));
        }
        let boundary = match (args.boundary, kind) {
            (Some(BoundaryArg::Open), _) => Boundary::Open,
            (Some(BoundaryArg::Periodic), _) => Boundary::Periodic,
            (None, ModelKind::Xxz) => Boundary::Periodic,
            (None, _) => Boundary::Open,
        };
        let use_freefermion_engine = match (args.engine, kind) {
            (EngineChoice::Freefermion, ModelKind::Freefermion) => true,
            (EngineChoice::Freefermion, other) => {
                return Err(CliError::Usage(format!(
                    "engine freefermion requires --model freefermion (got {other:?})"
                )))
            }
            (EngineChoice::Auto, ModelKind::Freefermion) => true,
            _ => false,
        };
        let filling = args.filling.unwrap_or(n / 2);
        if filling > n {
            return Err(CliError::Usage(format!(
                "--filling {filling} exceeds --n {n}"
            )));
        }
        let matching = args.matching.as_deref().map(parse_matching).transpose()?;
        if matching.is_some() && kind != ModelKind::Dimer {
            return Err(CliError::Usage(
                "--matching only applies to --model dimer".into(),
            ));
        }
        Ok(Self {
            kind,
            n,
            matching,
            dimerized: args.dimerized,
            aniso: args.aniso,
            boundary,
            filling,
            use_freefermion_engine,
        })
    }

    /// Short human-readable model description stored in file headers.
    pub fn descriptor(&self) -> String {
        let n = self.n;
        match self.kind {
            ModelKind::Dimer => {
                let pairs = self
                    .matching
                    .as_ref()
                    .map(|m| {
                        m.iter()
                            .map(|(a, b)| format!("{a}-{b}"))
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .unwrap_or_else(|| "nearest".into());
                format!("dimer n={n} matching={pairs}")
            }
            ModelKind::Rainbow => format!("rainbow n={n}"),
            ModelKind::Ghz => format!("ghz n={n}"),
            ModelKind::Freefermion => format!(
                "freefermion n={n} dimerized={} filling={} boundary={}",
                self.dimerized, self.filling, self.boundary
            ),
            ModelKind::Xxz => format!("xxz n={n} delta={} boundary={}", self.aniso, self.boundary),
        }
    }

    pub fn hopping(&self) -> Result<HoppingMatrix, CliError> {
        let open = dimerized_hopping(self.n, self.dimerized)?;
        if self.boundary == Boundary::Open || self.n < 3 {
            return Ok(open);
        }
        let mut t = open.t().clone();
        let sign = if self.n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let wrap = 1.0 + self.dimerized * sign;
        t[(self.n - 1, 0)] = wrap;
        t[(0, self.n - 1)] = wrap;
        Ok(HoppingMatrix::new(t)?)
    }

    pub fn freefermion(&self) -> Result<FreeFermionGround, CliError> {
        if self.kind != ModelKind::Freefermion {
            return Err(CliError::Usage(format!(
                "model {:?} is not a free-fermion model",
                self.kind
            )));
        }
        let cap = sweep_caps()?.freefermion;
        if self.n > cap {
            return Err(eamkit::Error::CapExceeded { n: self.n, cap }.into());
        }
        Ok(freefermion_ground(&self.hopping()?, self.filling)?)
    }

    /// The model as a state vector; free-fermion models go through their
    /// Jordan–Wigner spin-chain equivalent.
    pub fn state(&self) -> Result<PureState, CliError> {
        let cap = sweep_caps()?.statevector;
        if self.n > cap {
            return Err(eamkit::Error::CapExceeded { n: self.n, cap }.into());
        }
        let n = self.n;
        let state = match self.kind {
            ModelKind::Dimer => {
                let matching = match &self.matching {
                    Some(pairs) => Matching::new(n, pairs.clone())?,
                    None => Matching::nearest_neighbor(n)?,
                };
                build_dimer(n, &matching)?
            }
            ModelKind::Rainbow => build_rainbow(n)?,
            ModelKind::Ghz => build_ghz(n)?,
            ModelKind::Xxz => {
                let ground = xxz_ground_state(&XxzSpec::new(n, self.aniso, self.boundary), cap)?;
                info!(
                    "XXZ ground energy {} (residual {:.1e})",
                    ground.energy, ground.residual
                );
                ground.state
            }
            ModelKind::Freefermion => {
                if self.boundary != Boundary::Open {
                    return Err(CliError::Usage(
                        "statevector engine for free fermions needs an open chain".into(),
                    ));
                }
                if 2 * self.filling != n {
                    return Err(CliError::Usage(
                        "statevector engine for free fermions needs half filling".into(),
                    ));
                }
                let spec = XxzSpec::jordan_wigner_equivalent(&self.hopping()?)?;
                xxz_ground_state(&spec, cap)?.state
            }
        };
        Ok(state)
    }

    pub fn entropy_table(&self) -> Result<EntropyTable, CliError> {
        let caps = sweep_caps()?;
        let table = if self.use_freefermion_engine {
            let ffg = self.freefermion()?;
            all_entropies(Engine::FreeFermion(&ffg), caps)?
        } else {
            let state = self.state()?;
            all_entropies(Engine::StateVector(&state), caps)?
        };
        Ok(table.with_model(self.descriptor()))
    }
}

//! The run configuration document and its resolution into concrete inputs.
//!
//! Every optional value is filled in by [`RunConfig::resolve`], and the
//! resolved document is what gets echoed into outputs, so a report can be
//! re-run from its own `config` field.

use std::path::Path;
use std::sync::Arc;

use modular_dirichlet::spin_chain::DEFAULT_MAX_LENGTH;
use modular_dirichlet::{
    AlgebraElement64, AlgebraSpec, Boundary, FaithfulState64, Interaction, InteractionTerm,
    LatticeSpec, Quadrature, SamplingPlan, Sampler, Tolerances, WeightFunction64, C,
};
use modular_dirichlet::linalg::CMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed; per-stage seeds default to fixed offsets from it.
    #[serde(default)]
    pub seed: Option<u64>,
    pub model: ModelConfig,
    #[serde(default)]
    pub state: Option<StateConfig>,
    #[serde(default)]
    pub generators: Option<GeneratorConfig>,
    #[serde(default)]
    pub function: FunctionConfig,
    #[serde(default)]
    pub assembly: Assembly,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub markov: MarkovConfig,
    /// Spin chains: largest length. Block models: GNS dimension at most `4^size_cap`.
    #[serde(default)]
    pub size_cap: Option<usize>,
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Blocks {
        block_dims: Vec<usize>,
    },
    SpinChain {
        length: usize,
        #[serde(default = "periodic")]
        boundary: Boundary,
        #[serde(default)]
        interaction: InteractionConfig,
        #[serde(default = "half")]
        lambda: f64,
    },
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionConfig {
    /// `−J Σ σ_z σ_z − h Σ σ_x`.
    Ising {
        #[serde(default = "one")]
        j: f64,
        #[serde(default = "one")]
        h: f64,
    },
    Terms {
        terms: Vec<TermConfig>,
    },
}

impl Default for InteractionConfig {
    fn default() -> Self {
        InteractionConfig::Ising { j: 1.0, h: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub offsets: Vec<usize>,
    pub local: MatrixConfig,
    pub coupling: String,
    pub strength: f64,
}

/// Matrix as rows of entries; an entry is a real number or `[re, im]`.
pub type MatrixConfig = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Tracial {},
    RandomFaithful {
        #[serde(default)]
        seed: Option<u64>,
    },
    Gibbs {
        #[serde(default)]
        beta: f64,
    },
    Explicit {
        blocks: Vec<MatrixConfig>,
        /// Rescale to unit trace instead of rejecting.
        #[serde(default)]
        normalize: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    /// Pauli matrices at every site; block models need a single `2^L` block.
    PauliAllSites {},
    Explicit {
        /// Each element is its list of blocks.
        elements: Vec<Vec<MatrixConfig>>,
    },
    RandomHermitian {
        #[serde(default = "three")]
        count: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    F0 {
        #[serde(default = "one")]
        scale: f64,
    },
    SechPi {
        #[serde(default = "one")]
        scale: f64,
    },
    Sampled {
        /// `[t, f(t)]` pairs with increasing `t`.
        data: Vec<[f64; 2]>,
        /// `f(t+i/4) + f(t−i/4)` at the same nodes, if known.
        #[serde(default)]
        strip_sums: Option<Vec<f64>>,
    },
}

impl Default for FunctionConfig {
    fn default() -> Self {
        FunctionConfig::F0 { scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assembly {
    #[default]
    Spectral,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkovConfig {
    pub pairs: usize,
    pub interval_samples: usize,
    pub t_grid: Vec<f64>,
    pub seed: Option<u64>,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        let plan = SamplingPlan::default();
        Self {
            pairs: plan.pairs,
            interval_samples: plan.interval_samples,
            t_grid: plan.t_grid,
            seed: None,
        }
    }
}

impl RunConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fills every default so the document fully determines the run.
    /// `seed_override` replaces the root seed (and thereby the derived ones).
    pub fn resolve(mut self, seed_override: Option<u64>) -> Result<Self, CliError> {
        if seed_override.is_some() {
            self.seed = seed_override;
            if let Some(StateConfig::RandomFaithful { seed }) = &mut self.state {
                *seed = None;
            }
            if let Some(GeneratorConfig::RandomHermitian { seed, .. }) = &mut self.generators {
                *seed = None;
            }
            self.markov.seed = None;
        }
        let root = self.seed.unwrap_or(0);
        self.seed = Some(root);
        let is_chain = matches!(self.model, ModelConfig::SpinChain { .. });
        let state = self.state.take().unwrap_or(if is_chain {
            StateConfig::Gibbs { beta: 0.0 }
        } else {
            StateConfig::RandomFaithful { seed: None }
        });
        self.state = Some(match state {
            StateConfig::RandomFaithful { seed } => StateConfig::RandomFaithful {
                seed: Some(seed.unwrap_or(root)),
            },
            other => other,
        });
        let generators = self.generators.take().unwrap_or(if is_chain {
            GeneratorConfig::PauliAllSites {}
        } else {
            GeneratorConfig::RandomHermitian {
                count: 3,
                seed: None,
            }
        });
        self.generators = Some(match generators {
            GeneratorConfig::RandomHermitian { count, seed } => GeneratorConfig::RandomHermitian {
                count,
                seed: Some(seed.unwrap_or(root.wrapping_add(1))),
            },
            other => other,
        });
        self.markov.seed = Some(self.markov.seed.unwrap_or(root.wrapping_add(2)));
        self.size_cap = Some(self.size_cap.unwrap_or(DEFAULT_MAX_LENGTH));
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.tolerances.validate()?;
        if self.assembly == Assembly::Quadrature {
            self.quadrature.validate()?;
        }
        if self.markov.t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(CliError::Config("markov.t_grid entries must be finite and >= 0".into()));
        }
        if let ModelConfig::SpinChain { lambda, .. } = &self.model {
            if !(*lambda > 0.0) || !lambda.is_finite() {
                return Err(CliError::Config("model.lambda must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn size_cap(&self) -> usize {
        self.size_cap.unwrap_or(DEFAULT_MAX_LENGTH)
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            pairs: self.markov.pairs,
            interval_samples: self.markov.interval_samples,
            t_grid: self.markov.t_grid.clone(),
            seed: self.markov.seed.unwrap_or(0),
        }
    }

    /// The chain and interaction of a spin-chain model.
    pub fn chain(&self) -> Result<Option<(LatticeSpec, Interaction<f64>, f64)>, CliError> {
        let ModelConfig::SpinChain {
            length,
            boundary,
            interaction,
            lambda,
        } = &self.model
        else {
            return Ok(None);
        };
        let lattice = LatticeSpec::new(*length, *boundary)?;
        lattice.check_cap(self.size_cap())?;
        let phi = match interaction {
            InteractionConfig::Ising { j, h } => Interaction::ising(*j, *h),
            InteractionConfig::Terms { terms } => Interaction::new(
                terms
                    .iter()
                    .map(|t| {
                        Ok(InteractionTerm {
                            offsets: t.offsets.clone(),
                            local: matrix(&t.local)?,
                            coupling: t.coupling.clone(),
                            strength: t.strength,
                        })
                    })
                    .collect::<Result<_, CliError>>()?,
            )?,
        };
        Ok(Some((lattice, phi, *lambda)))
    }

    pub fn algebra(&self) -> Result<Arc<AlgebraSpec>, CliError> {
        match &self.model {
            ModelConfig::Blocks { block_dims } => {
                let spec = AlgebraSpec::new(block_dims.clone())?;
                let cap = self.size_cap();
                let limit = 4usize.checked_pow(cap as u32).unwrap_or(usize::MAX);
                if spec.dimension() > limit {
                    return Err(modular_dirichlet::Error::Capacity {
                        what: "GNS dimension".into(),
                        requested: spec.dimension(),
                        cap: limit,
                    }
                    .into());
                }
                Ok(Arc::new(spec))
            }
            ModelConfig::SpinChain { .. } => {
                let (lattice, _, _) = self.chain()?.expect("spin chain");
                Ok(lattice.algebra())
            }
        }
    }

    /// The state at the configured `β` (Gibbs states use `beta_override` when given).
    pub fn state(&self, beta_override: Option<f64>) -> Result<FaithfulState64, CliError> {
        let spec = self.algebra()?;
        let state = self.state.clone().unwrap_or(StateConfig::Tracial {});
        Ok(match state {
            StateConfig::Tracial {} => FaithfulState64::tracial(spec),
            StateConfig::RandomFaithful { seed } => {
                FaithfulState64::random(spec, &mut Sampler::new(seed.unwrap_or(0)))
            }
            StateConfig::Gibbs { beta } => {
                let (lattice, phi, _) = self.chain()?.ok_or_else(|| {
                    CliError::Config("gibbs states need a spin_chain model".into())
                })?;
                modular_dirichlet::gibbs_state(&phi, beta_override.unwrap_or(beta), &lattice)?
            }
            StateConfig::Explicit { blocks, normalize } => {
                let blocks = blocks.iter().map(matrix).collect::<Result<Vec<_>, _>>()?;
                if normalize {
                    FaithfulState64::from_unnormalized(spec, blocks)?
                } else {
                    FaithfulState64::new(spec, blocks)?
                }
            }
        })
    }

    pub fn family(&self) -> Result<Vec<AlgebraElement64>, CliError> {
        let spec = self.algebra()?;
        let generators = self
            .generators
            .clone()
            .unwrap_or(GeneratorConfig::PauliAllSites {});
        match generators {
            GeneratorConfig::PauliAllSites {} => {
                let lattice = match self.chain()? {
                    Some((lattice, _, _)) => lattice,
                    None => {
                        let dims = spec.block_dims();
                        let n = dims[0];
                        if dims.len() != 1 || !n.is_power_of_two() || n < 2 {
                            return Err(CliError::Config(
                                "pauli_all_sites needs a spin chain or a single 2^L block".into(),
                            ));
                        }
                        LatticeSpec {
                            length: n.trailing_zeros() as usize,
                            boundary: Boundary::Open,
                        }
                    }
                };
                Ok(modular_dirichlet::pauli_family(&lattice))
            }
            GeneratorConfig::Explicit { elements } => elements
                .iter()
                .map(|blocks| {
                    let blocks = blocks.iter().map(matrix).collect::<Result<Vec<_>, _>>()?;
                    Ok(AlgebraElement64::new(spec.clone(), blocks)?)
                })
                .collect(),
            GeneratorConfig::RandomHermitian { count, seed } => {
                let mut s = Sampler::new(seed.unwrap_or(0));
                Ok((0..count).map(|_| s.hermitian_element(&spec)).collect())
            }
        }
    }

    pub fn weight(&self) -> Result<WeightFunction64, CliError> {
        Ok(match &self.function {
            FunctionConfig::F0 { scale } => WeightFunction64::f0().scaled(*scale)?,
            FunctionConfig::SechPi { scale } => WeightFunction64::sech_pi().scaled(*scale)?,
            FunctionConfig::Sampled { data, strip_sums } => {
                let t = data.iter().map(|p| p[0]).collect();
                let f = data.iter().map(|p| p[1]).collect();
                let w = WeightFunction64::sampled(t, f)?;
                match strip_sums {
                    Some(s) => w.with_strip_sums(s.clone())?,
                    None => w,
                }
            }
        })
    }
}

pub fn matrix(rows: &MatrixConfig) -> Result<CMatrix<f64>, CliError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("matrices must be square".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| match rows[i][j] {
        Entry::Real(re) => C::new(re, 0.0),
        Entry::Complex([re, im]) => C::new(re, im),
    }))
}

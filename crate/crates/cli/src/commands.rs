//! The four verbs. Each returns the full output text; nothing here touches
//! stdout, so identical inputs give identical bytes.

use std::time::Instant;

use modular_dirichlet::{
    assemble_generator_quadrature, assemble_generator_spectral_with, check_admissible,
    check_markovian, gap_sweep, generated_subalgebra, report_for, AdmissibilityGrid,
    AlgebraElement64, AssemblyOptions, GeneratorMatrix64, MarkovReport, StandardForm64,
    SweepOptions, SweepRow, VerificationReport, VerifyOptions,
};
use serde::Serialize;

use crate::config::{Assembly, GeneratorConfig, RunConfig, StateConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Spectrum,
    GapSweep,
    MarkovCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::GapSweep => "gap-sweep",
            Command::MarkovCheck => "markov-check",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Verify | Command::MarkovCheck => Format::Json,
            Command::Spectrum | Command::GapSweep => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// One command run: the parsed (unresolved) config plus command-line overrides.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub betas: Option<Vec<f64>>,
    pub format: Option<Format>,
    /// Adds wall-clock timings; off by default because it breaks byte-identity.
    pub timing: bool,
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

const TOOL: Tool = Tool {
    name: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Serialize)]
struct Seeds {
    root: u64,
    state: Option<u64>,
    generators: Option<u64>,
    markov: u64,
}

fn seeds(cfg: &RunConfig) -> Seeds {
    Seeds {
        root: cfg.seed.unwrap_or(0),
        state: match &cfg.state {
            Some(StateConfig::RandomFaithful { seed }) => *seed,
            _ => None,
        },
        generators: match &cfg.generators {
            Some(GeneratorConfig::RandomHermitian { seed, .. }) => *seed,
            _ => None,
        },
        markov: cfg.markov.seed.unwrap_or(0),
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'static str,
    tool: &'a Tool,
    seeds: Seeds,
    config: &'a RunConfig,
    #[serde(flatten)]
    result: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_seconds: Option<Vec<(&'static str, f64)>>,
}

struct Clock {
    on: bool,
    start: Instant,
    marks: Vec<(&'static str, f64)>,
}

impl Clock {
    fn new(on: bool) -> Self {
        Self {
            on,
            start: Instant::now(),
            marks: Vec::new(),
        }
    }

    fn mark(&mut self, stage: &'static str) {
        if self.on {
            self.marks.push((stage, self.start.elapsed().as_secs_f64()));
        }
    }

    fn finish(self) -> Option<Vec<(&'static str, f64)>> {
        self.on.then_some(self.marks)
    }
}

fn json<R: Serialize>(cmd: Command, cfg: &RunConfig, result: R, clock: Clock) -> String {
    let env = Envelope {
        command: cmd.name(),
        tool: &TOOL,
        seeds: seeds(cfg),
        config: cfg,
        result,
        timing_seconds: clock.finish(),
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

/// 17 significant digits, `.` decimal separator.
pub fn csv_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn assemble(
    cfg: &RunConfig,
    sf: &StandardForm64,
    family: &[AlgebraElement64],
    keep_summands: bool,
) -> Result<GeneratorMatrix64, CliError> {
    let f = cfg.weight()?;
    Ok(match cfg.assembly {
        Assembly::Spectral => {
            assemble_generator_spectral_with(sf, family, &f, AssemblyOptions { keep_summands })?
        }
        Assembly::Quadrature => assemble_generator_quadrature(sf, family, &f, &cfg.quadrature)?,
    })
}

fn generator(cfg: &RunConfig) -> Result<GeneratorMatrix64, CliError> {
    let sf = StandardForm64::new(cfg.state(None)?)?;
    let family = cfg.family()?;
    assemble(cfg, &sf, &family, false)
}

/// Resolves the config and runs the command.
pub fn run(inv: Invocation) -> Result<String, CliError> {
    let format = inv.format.unwrap_or(inv.command.default_format());
    if format == Format::Csv && matches!(inv.command, Command::Verify | Command::MarkovCheck) {
        return Err(CliError::Usage(format!(
            "{} writes JSON only",
            inv.command.name()
        )));
    }
    let mut cfg = inv.config.resolve(inv.seed)?;
    if let Some(b) = inv.betas {
        cfg.betas = Some(b);
    }
    let clock = Clock::new(inv.timing);
    match inv.command {
        Command::Verify => verify(&cfg, clock),
        Command::Spectrum => spectrum(&cfg, format, clock),
        Command::GapSweep => sweep(&cfg, format, clock),
        Command::MarkovCheck => markov(&cfg, clock),
    }
}

#[derive(Serialize)]
struct VerifyResult {
    report: VerificationReport,
    admissibility: serde_json::Value,
}

fn verify(cfg: &RunConfig, mut clock: Clock) -> Result<String, CliError> {
    let sf = StandardForm64::new(cfg.state(None)?)?;
    let family = cfg.family()?;
    let f = cfg.weight()?;
    let spec = sf.spec().clone();
    let (generated_dimension, generates_m) = if family.is_empty() {
        (spec.num_blocks(), spec.num_blocks() == spec.dimension())
    } else {
        let g = generated_subalgebra(&family)?;
        (g.dimension, g.generates_m)
    };
    clock.mark("generated_subalgebra");
    let h = assemble(cfg, &sf, &family, false)?;
    clock.mark("assembly");
    let options = VerifyOptions {
        tolerances: cfg.tolerances,
        sampling: cfg.sampling_plan(),
    };
    let report = report_for(&h, generated_dimension, generates_m, &options)?;
    clock.mark("report");
    let admissibility = match check_admissible(&f, &AdmissibilityGrid::default()) {
        Ok(r) => serde_json::to_value(r).expect("report serializes"),
        Err(e @ modular_dirichlet::Error::Capability(_)) => {
            serde_json::json!({ "undecided": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    Ok(json(
        Command::Verify,
        cfg,
        VerifyResult {
            report,
            admissibility,
        },
        clock,
    ))
}

#[derive(Serialize)]
struct SpectrumResult {
    eigenvalues: Vec<f64>,
}

fn spectrum(cfg: &RunConfig, format: Format, mut clock: Clock) -> Result<String, CliError> {
    let h = generator(cfg)?;
    clock.mark("assembly");
    let eigenvalues: Vec<f64> = h.eigenvalues().to_vec();
    Ok(match format {
        Format::Json => json(Command::Spectrum, cfg, SpectrumResult { eigenvalues }, clock),
        Format::Csv => {
            let mut out = String::from("index,eigenvalue\n");
            for (i, v) in eigenvalues.iter().enumerate() {
                out.push_str(&format!("{i},{}\n", csv_real(*v)));
            }
            out
        }
    })
}

#[derive(Serialize)]
struct SweepResult {
    rows: Vec<SweepRow>,
}

fn sweep(cfg: &RunConfig, format: Format, mut clock: Clock) -> Result<String, CliError> {
    let (lattice, phi, lambda) = cfg
        .chain()?
        .ok_or_else(|| CliError::Config("gap-sweep needs a spin_chain model".into()))?;
    let betas = cfg.betas.clone().unwrap_or_default();
    if let Some(b) = betas.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
        return Err(CliError::Usage(format!("beta {b} must be finite and >= 0")));
    }
    let f = cfg.weight()?;
    let rows = gap_sweep(
        &phi,
        &lattice,
        &f,
        &betas,
        lambda,
        SweepOptions {
            max_length: cfg.size_cap(),
            kernel_tol: cfg.tolerances.kernel,
            subspace_tol: cfg.tolerances.subspace,
        },
    )?;
    clock.mark("sweep");
    Ok(match format {
        Format::Json => json(Command::GapSweep, cfg, SweepResult { rows }, clock),
        Format::Csv => {
            let mut out = String::from("beta,phi_norm_lambda,lambda,condition_ok,gap,dim_N,ergodic\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    csv_real(r.beta),
                    csv_real(r.phi_norm_lambda),
                    csv_real(r.lambda),
                    r.condition_ok,
                    csv_real(r.gap),
                    r.dim_n,
                    r.ergodic
                ));
            }
            out
        }
    })
}

#[derive(Serialize)]
struct MarkovResult {
    markov: MarkovReport,
}

fn markov(cfg: &RunConfig, mut clock: Clock) -> Result<String, CliError> {
    let h = generator(cfg)?;
    clock.mark("assembly");
    let markov = check_markovian(&h, &cfg.sampling_plan(), cfg.tolerances.cone)?;
    clock.mark("markov");
    Ok(json(Command::MarkovCheck, cfg, MarkovResult { markov }, clock))
}

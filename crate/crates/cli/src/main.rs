use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mdlab::{run, CliError, Command, Format, Invocation, RunConfig};

#[derive(Parser)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated inverse temperatures (gap-sweep).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 0..=1)]
    betas: Option<Vec<String>>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timings (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "mdlab", version, about = "Dirichlet forms and ergodicity on finite standard forms")]
struct Full {
    #[arg(value_enum)]
    verb: VerbArg,
    #[command(flatten)]
    args: Args,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerbArg {
    /// Compare ker H with the center subspace and run the Markov checks.
    Verify,
    /// Eigenvalues of H, ascending.
    Spectrum,
    /// Gap, fixed-space dimension and ergodicity over a list of betas.
    GapSweep,
    /// Unitality, positivity and sub-Markov checks of the semigroup.
    MarkovCheck,
}

fn parse_betas(raw: Option<Vec<String>>) -> Result<Option<Vec<f64>>, CliError> {
    let Some(raw) = raw else { return Ok(None) };
    raw.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse beta '{s}'")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn execute(full: Full) -> Result<(), CliError> {
    let args = full.args;
    let command = match full.verb {
        VerbArg::Verify => Command::Verify,
        VerbArg::Spectrum => Command::Spectrum,
        VerbArg::GapSweep => Command::GapSweep,
        VerbArg::MarkovCheck => Command::MarkovCheck,
    };
    let output = run(Invocation {
        command,
        config: RunConfig::load(&args.config)?,
        seed: args.seed,
        betas: parse_betas(args.betas)?,
        format: args.format.map(|f| match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }),
        timing: args.timing,
    })?;
    match args.out {
        Some(path) => std::fs::write(&path, output)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(output.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let full = Full::parse();
    match execute(full) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

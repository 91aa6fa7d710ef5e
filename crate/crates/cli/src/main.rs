mod invocation;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use d2k::model::{LetterDistribution, MatchParams};
use d2k::simulation::{GridSpec, SimConfig, Standardization};
use serde_json::json;

use invocation::{Algo, InputError, Invocation};

/// Seed used when neither --seed nor D2K_SEED is given.
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser, Debug)]
#[command(name = "d2k", version, about = "Approximate word matches D2(k) between random DNA sequences")]
struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format (default: csv for ks-grid, json otherwise)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SigmaMode {
    Empirical,
    Pilot,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ModelArgs {
    /// Strand-symmetric model: P(A) = P(T) = (1+eta)/4, P(C) = P(G) = (1-eta)/4
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,

    /// General letter frequencies A,C,G,T (exact matches only, k = 0)
    #[arg(long, value_delimiter = ',', value_name = "A,C,G,T")]
    freqs: Option<Vec<f64>>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<LetterDistribution> {
        match (self.eta, &self.freqs) {
            (Some(eta), None) => Ok(LetterDistribution::strand_symmetric(eta).map_err(usage)?),
            (None, Some(f)) => {
                let probs: [f64; 4] = f
                    .as_slice()
                    .try_into()
                    .map_err(|_| InputError("--freqs needs exactly four values".into()))?;
                Ok(LetterDistribution::from_frequencies(probs).map_err(usage)?)
            }
            _ => bail!(InputError("give exactly one of --eta or --freqs".into())),
        }
    }
}

#[derive(Args, Debug)]
struct ParamArgs {
    /// Sequence length
    #[arg(short = 'n')]
    n: usize,
    /// Word length
    #[arg(short = 'm')]
    m: usize,
    /// Mismatch budget
    #[arg(short = 'k', default_value_t = 0)]
    k: usize,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Number of simulated sequence pairs
    #[arg(long, default_value_t = 2500)]
    reps: usize,
    /// Random seed
    #[arg(long, env = "D2K_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// How the sample is scaled before the KS test
    #[arg(long, value_enum, default_value_t = SigmaMode::Empirical)]
    sigma_mode: SigmaMode,
    /// Replicates of the independent pilot run (pilot mode)
    #[arg(long, default_value_t = 1000)]
    pilot_reps: usize,
}

impl SimArgs {
    fn standardization(&self) -> Standardization {
        match self.sigma_mode {
            SigmaMode::Empirical => Standardization::EmpiricalSigma,
            SigmaMode::Pilot => Standardization::PilotSigma {
                pilot_replicates: self.pilot_reps,
            },
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count D2(k) between two sequence files
    Count {
        #[arg(long)]
        seq_a: PathBuf,
        #[arg(long)]
        seq_b: PathBuf,
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 'k', default_value_t = 0)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Algo::Fast)]
        algo: Algo,
    },
    /// Distance law of a random word from a fixed word of given GC-count
    Dist {
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        #[arg(short = 'm')]
        m: usize,
        /// GC-count of the fixed word (default: all)
        #[arg(long)]
        gc: Option<usize>,
    },
    /// Exact mean of D2(k) and its bracketing bounds
    Mean {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Lower and upper bounds on Var D2(k)
    VarBounds {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Where (n, m) sits relative to the normality thresholds
    Regime {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Simulate D2(k) and KS-test it against the normal
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Include every simulated count in the output
        #[arg(long)]
        emit_samples: bool,
    },
    /// KS p-values over an (n, m) grid
    KsGrid {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800,1600")]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8,9,10,11,12,13,14")]
        m_list: Vec<usize>,
        /// Mismatch budgets, one grid each
        #[arg(short = 'k', value_delimiter = ',', default_value = "0")]
        k: Vec<usize>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Re-run the command recorded in a JSON output
    Replay {
        /// JSON file written with --format json
        file: PathBuf,
    },
}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    InputError(e.to_string()).into()
}

fn exact_only(dist: &LetterDistribution, k: usize) -> Result<()> {
    if dist.eta().is_none() && k != 0 {
        bail!(InputError(
            "k > 0 needs the strand-symmetric model (--eta); --freqs supports exact matches only".into()
        ));
    }
    Ok(())
}

fn params(p: &ParamArgs) -> Result<MatchParams> {
    MatchParams::new(p.n, p.m, p.k).map_err(usage)
}

fn resolve(command: Command) -> Result<Invocation> {
    Ok(match command {
        Command::Count { seq_a, seq_b, m, k, algo } => Invocation::Count { seq_a, seq_b, m, k, algo },
        Command::Dist { eta, m, gc } => {
            LetterDistribution::strand_symmetric(eta).map_err(usage)?;
            if m == 0 || gc.is_some_and(|c| c > m) {
                bail!(InputError(format!("need m >= 1 and a GC-count of at most m = {m}")));
            }
            Invocation::Dist { eta, m, gc }
        }
        Command::Mean { model, params: p } => {
            let dist = model.resolve()?;
            exact_only(&dist, p.k)?;
            Invocation::Mean { dist, params: params(&p)? }
        }
        Command::VarBounds { model, params: p } => {
            let dist = model.resolve()?;
            exact_only(&dist, p.k)?;
            Invocation::VarBounds { dist, params: params(&p)? }
        }
        Command::Regime { model, params: p } => {
            let dist = model.resolve()?;
            exact_only(&dist, p.k)?;
            Invocation::Regime { dist, params: params(&p)? }
        }
        Command::Simulate { model, params: p, sim, emit_samples } => {
            let dist = model.resolve()?;
            exact_only(&dist, p.k)?;
            let config = SimConfig {
                dist,
                params: params(&p)?,
                replicates: sim.reps,
                seed: sim.seed,
                standardization: sim.standardization(),
            };
            config.validate().map_err(usage)?;
            Invocation::Simulate { config, emit_samples }
        }
        Command::KsGrid { model, n_list, m_list, k, sim } => {
            let dist = model.resolve()?;
            let mut specs = Vec::new();
            for k in k {
                exact_only(&dist, k)?;
                for &n in &n_list {
                    for &m in &m_list {
                        MatchParams::new(n, m, k).map_err(|e| usage(format!("cell n={n} m={m} k={k}: {e}")))?;
                    }
                }
                specs.push(GridSpec {
                    n_values: n_list.clone(),
                    m_values: m_list.clone(),
                    k,
                    dist,
                    replicates: sim.reps,
                    seed: sim.seed,
                    standardization: sim.standardization(),
                });
            }
            Invocation::KsGrid { specs }
        }
        Command::Replay { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| usage(format!("cannot read {}: {e}", file.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(usage)?;
            let config = value
                .get("config")
                .cloned()
                .ok_or_else(|| usage(format!("{}: no \"config\" field", file.display())))?;
            serde_json::from_value(config).map_err(usage)?
        }
    })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let replaying = matches!(cli.command, Command::Replay { .. });
    let invocation = resolve(cli.command)?;
    let format = match (cli.format, &invocation) {
        (Some(f), _) => f,
        (None, _) if replaying => Format::Json,
        (None, Invocation::KsGrid { .. }) => Format::Csv,
        (None, _) => Format::Json,
    };
    let output = invocation.run()?;
    let envelope = || {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": invocation,
            "seed": invocation.seed(),
            "result": output.to_json(&invocation),
        })
    };
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&envelope())?),
        Format::Csv => output.to_csv(&invocation),
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            // a CSV grid gets its provenance alongside
            if format == Format::Csv && matches!(invocation, Invocation::KsGrid { .. }) {
                let mut sidecar = path.clone().into_os_string();
                sidecar.push(".json");
                std::fs::write(&sidecar, serde_json::to_string_pretty(&envelope())? + "\n")
                    .context("writing provenance sidecar")?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("d2k: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

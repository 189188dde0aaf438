//! Command-line driver for teleportation-witness datasets and the
//! certification pipeline. All commands are deterministic given their full
//! flag set (including --seed); set TELECERT_THREADS to cap parallelism.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use telecert::cli::{
    cmd_ent_threshold, cmd_fit, cmd_scan_fidelity, cmd_scan_min, cmd_scan_witness, cmd_simulate,
    degrees_to_radians, fidelity_scan_to_csv, min_scan_to_csv, parse_grid, records_csv,
    resolve_single_gamma, witness_scan_to_csv, FitResultDocument, SCHEMA_VERSION,
};
use telecert::montecarlo::ShotConfig;
use telecert::noise_optics::NoiseParams;
use telecert::TelecertError;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// SPDC singlet weight V in [0, 1]
    #[arg(long = "V", default_value_t = 1.0)]
    v: f64,
    /// Calcite dephasing parameter delta in [0, 1] (1 = noiseless)
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

impl NoiseArgs {
    fn params(&self) -> Result<NoiseParams, TelecertError> {
        NoiseParams::new(self.v, self.delta)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct ShotArgs {
    /// Mean coincidence counts per measurement setting
    #[arg(long)]
    shots: Option<u64>,
    /// Bootstrap replicas for error bars
    #[arg(long, default_value_t = 200)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ShotArgs {
    fn config(&self) -> Result<Option<ShotConfig>, TelecertError> {
        self.shots
            .map(|s| ShotConfig::new(s, self.seed, self.replicas))
            .transpose()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "telecert",
    about = "Simulates qubit teleportation over a tunable noisy channel and certifies nonclassicality via teleportation witnesses",
    long_about = "Simulates qubit teleportation over the channel family \
gamma|psi-><psi-| + (1-gamma)|11><11|, evaluates the one-parameter witness \
family and average fidelity, models photonic noise (SPDC weight V, calcite \
dephasing delta), simulates Poissonian coincidence counts and fits noise \
parameters. Angles are given in degrees on the command line (e.g. \
--alpha-deg 45 for gamma = 1, --theta-grid in degrees) and converted to \
radians internally. Set TELECERT_THREADS to cap parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Witness values over a (gamma, theta) grid (optionally Monte-Carlo)
    ScanWitness {
        /// Gamma grid: comma list or start:stop:count
        #[arg(long, default_value = "0:1:11")]
        gamma_grid: String,
        /// Theta grid in degrees: comma list or start:stop:count
        #[arg(long, default_value = "3:90:15")]
        theta_grid: String,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        shots: ShotArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Theta-optimized witness per gamma with the entanglement threshold
    ScanMin {
        #[arg(long, default_value = "0:1:21")]
        gamma_grid: String,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Average teleportation fidelity per gamma against the 2/3 bound
    ScanFidelity {
        #[arg(long, default_value = "0:1:21")]
        gamma_grid: String,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        shots: ShotArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit noise parameters (V, delta) from gamma,w_min[,sigma] CSV data
    Fit {
        /// Input CSV file
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate Poissonian coincidence counts for a single channel state
    Simulate {
        /// Single-value gamma grid (alternative to --alpha-deg)
        #[arg(long)]
        gamma_grid: Option<String>,
        /// Waveplate angle in degrees (45 -> gamma = 1)
        #[arg(long)]
        alpha_deg: Option<f64>,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Mean coincidence counts per measurement setting
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also resolve the psi+ outcome (three-outcome measurement)
        #[arg(long, default_value_t = false)]
        three_outcome: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Minimal gamma with an entangled channel for given noise parameters
    EntThreshold {
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn emit(output: &OutputArgs, text: String) -> Result<(), std::io::Error> {
    match &output.out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable dataset");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), u8> {
    let validation = |e: TelecertError| {
        eprintln!("error: {e}");
        match e {
            TelecertError::FitDidNotConverge { .. } => EXIT_NONCONVERGENCE,
            _ => EXIT_VALIDATION,
        }
    };
    let io_err = |e: std::io::Error| {
        eprintln!("i/o error: {e}");
        EXIT_IO
    };

    match cli.command {
        Command::ScanWitness {
            gamma_grid,
            theta_grid,
            noise,
            shots,
            output,
        } => {
            let gammas = parse_grid(&gamma_grid).map_err(validation)?;
            let thetas: Vec<f64> = parse_grid(&theta_grid)
                .map_err(validation)?
                .into_iter()
                .map(degrees_to_radians)
                .collect();
            let params = noise.params().map_err(validation)?;
            let cfg = shots.config().map_err(validation)?;
            let ds = cmd_scan_witness(&gammas, &thetas, params, cfg).map_err(validation)?;
            let text = match output.format {
                Format::Csv => witness_scan_to_csv(&ds),
                Format::Json => to_json(&ds),
            };
            emit(&output, text).map_err(io_err)
        }
        Command::ScanMin {
            gamma_grid,
            noise,
            output,
        } => {
            let gammas = parse_grid(&gamma_grid).map_err(validation)?;
            let params = noise.params().map_err(validation)?;
            let ds = cmd_scan_min(&gammas, params).map_err(validation)?;
            let text = match output.format {
                Format::Csv => min_scan_to_csv(&ds),
                Format::Json => to_json(&ds),
            };
            emit(&output, text).map_err(io_err)
        }
        Command::ScanFidelity {
            gamma_grid,
            noise,
            shots,
            output,
        } => {
            let gammas = parse_grid(&gamma_grid).map_err(validation)?;
            let params = noise.params().map_err(validation)?;
            let cfg = shots.config().map_err(validation)?;
            let ds = cmd_scan_fidelity(&gammas, params, cfg).map_err(validation)?;
            let text = match output.format {
                Format::Csv => fidelity_scan_to_csv(&ds),
                Format::Json => to_json(&ds),
            };
            emit(&output, text).map_err(io_err)
        }
        Command::Fit { input, seed, output } => {
            let text = fs::read_to_string(&input).map_err(io_err)?;
            let result = cmd_fit(&text, seed).map_err(validation)?;
            let doc = FitResultDocument {
                schema_version: SCHEMA_VERSION,
                result,
            };
            emit(&output, to_json(&doc)).map_err(io_err)
        }
        Command::Simulate {
            gamma_grid,
            alpha_deg,
            noise,
            shots,
            replicas,
            seed,
            three_outcome,
            output,
        } => {
            let gammas = gamma_grid
                .as_deref()
                .map(parse_grid)
                .transpose()
                .map_err(validation)?;
            let gamma =
                resolve_single_gamma(gammas.as_deref(), alpha_deg).map_err(validation)?;
            let params = noise.params().map_err(validation)?;
            let cfg = ShotConfig::new(shots, seed, replicas).map_err(validation)?;
            let records = cmd_simulate(gamma, params, &cfg, three_outcome).map_err(validation)?;
            emit(&output, records_csv(&records)).map_err(io_err)
        }
        Command::EntThreshold { noise, output } => {
            let params = noise.params().map_err(validation)?;
            let doc = cmd_ent_threshold(params).map_err(validation)?;
            let text = match output.format {
                Format::Csv => format!(
                    "v,delta,gamma_ent_threshold,always_entangled,never_entangled\n{:.16e},{:.16e},{:.16e},{},{}\n",
                    doc.v, doc.delta, doc.gamma_ent_threshold, doc.always_entangled, doc.never_entangled
                ),
                Format::Json => to_json(&doc),
            };
            emit(&output, text).map_err(io_err)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TELECERT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

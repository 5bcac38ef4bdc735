use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iontrap::error::CliError;
use iontrap::run::{run, write_json};
use iontrap::sweep::{sweep, Axis, DEFAULT_CAP, INDEX_FILE};
use iontrap::verify::verify;
use iontrap::RunConfig;

#[derive(Parser)]
#[command(
    name = "iontrap",
    version,
    about = "Vibrational dynamics of a Raman-driven trapped ion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute <n>(tau) for one parameter set
    Run(RunArgs),
    /// Run a Cartesian grid of parameter sets
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Axis as key=v1,v2,... or key=start:stop:count (repeatable)
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        /// Maximum number of grid points
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Check unitarity, the transformation identity and analytic/oracle agreement
    Verify {
        #[arg(long, default_value_t = 128)]
        n_max: usize,
        #[arg(long, default_value_t = 300.0)]
        tau_max: f64,
        /// Also write the checks as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Complex amplitude, e.g. 0.5+5i
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_re: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau_step: Option<String>,
    /// "auto" or an integer
    #[arg(long)]
    n_max: Option<String>,
    /// analytic, oracle_rwa, oracle_full, lab_full or compare
    #[arg(long)]
    mode: Option<String>,
    /// Reference pipeline for compare mode
    #[arg(long)]
    reference: Option<String>,
    /// Output directory
    #[arg(long, short)]
    output: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("nu", &self.nu),
            ("omega", &self.omega),
            ("delta", &self.delta),
            ("eta", &self.eta),
            ("alpha", &self.alpha),
            ("alpha_re", &self.alpha_re),
            ("alpha_im", &self.alpha_im),
            ("tau_max", &self.tau_max),
            ("tau_step", &self.tau_step),
            ("n_max", &self.n_max),
            ("mode", &self.mode),
            ("reference", &self.reference),
            ("output", &self.output),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            cfg.validate()?;
            let (outcome, files) = run(&cfg, true)?;
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            println!("series: {}", files.series.display());
            println!("report: {}", files.report.display());
            if let (Some(path), Some(summary)) = (&files.summary, &outcome.summary) {
                println!(
                    "summary: {} (max |dn| = {:.3e} vs {})",
                    path.display(),
                    summary.max_abs_dev,
                    summary.reference
                );
            }
            Ok(0)
        }
        Command::Sweep { run, grid, cap } => {
            let base = run.resolve()?;
            let axes = grid
                .iter()
                .map(|g| Axis::parse(g))
                .collect::<Result<Vec<_>, _>>()?;
            let index = sweep(&base, &axes, cap, &base.output)?;
            for p in index.points.iter().filter(|p| p.status != "ok") {
                eprintln!(
                    "point {}: {}",
                    p.index,
                    p.error.as_deref().unwrap_or("failed")
                );
            }
            println!(
                "{} of {} points succeeded; index: {}",
                index.succeeded,
                index.total,
                base.output.join(INDEX_FILE).display()
            );
            Ok(index.exit_code())
        }
        Command::Verify {
            n_max,
            tau_max,
            json,
        } => {
            let report = verify(n_max, tau_max)?;
            for c in &report.checks {
                println!(
                    "{}: {} | {:.3e} (tol {:.0e}, {:.1}s)",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.value,
                    c.tolerance,
                    c.seconds
                );
            }
            if let Some(path) = json {
                write_json(&path, &report)?;
            }
            Ok(if report.all_passed { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shearflow_cli::report::{write_case, write_fields, write_sweep};
use shearflow_cli::suites::SweepOutput;
use shearflow_cli::{convergence_report, run_acceptance, run_case, run_sweep, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "shearflow", version, about = "Boundary-layer asymptotics for compressible shear flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case at [params].eps and write its ledger, fields and summary.
    Run(Common),
    /// Run the ε sweep and write norms, slopes and the iteration ledger.
    Sweep(Common),
    /// Run the configured acceptance suites and write all reports.
    Verify(Common),
    /// Solve one case and write its nodal fields only.
    Dump(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides [run].out and SHEARFLOW_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Single-case ε.
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated, strictly decreasing ε values.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(e) = self.eps {
            cfg.params.eps = e;
        }
        if let Some(s) = &self.sweep {
            cfg.run.sweep = s.clone();
        }
        if let Some(n) = self.n1 {
            cfg.grid.n1 = n;
        }
        if let Some(n) = self.n2 {
            cfg.grid.n2 = n;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.out_dir());
        cfg.validate()?;
        Ok((cfg, out))
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run(c) => {
            let (cfg, out) = c.config()?;
            let case = run_case(&cfg)?;
            let s = &case.summary;
            let contracts = s.contraction.iter().all(|&q| q <= 0.6);
            let consistent = s.norms.ns_residual <= 10.0 * (cfg.run.tol + s.norms.truncation);
            println!("{}", serde_json::to_string_pretty(&s.norms).unwrap_or_default());
            println!("max contraction ratio {:.3e}", s.contraction.iter().copied().fold(0.0, f64::max));
            write_fields(&out, &case)?;
            let single = SweepOutput { eps: vec![s.eps], cases: vec![case] };
            write_case(&out, &single)?;
            println!("reports written to {}", out.display());
            Ok(contracts && consistent)
        }
        Command::Sweep(c) => {
            let (cfg, out) = c.config()?;
            let sweep = run_sweep(&cfg)?;
            let report = convergence_report(&sweep, cfg.params.p, cfg.params.sigma)?;
            write_sweep(&out, &sweep, &report, &[])?;
            for q in &report.quantities {
                println!("{:<12} {}", q.name, q.verdict.describe());
            }
            println!("reports written to {}", out.display());
            Ok(report.verdict)
        }
        Command::Verify(c) => {
            let (cfg, out) = c.config()?;
            let acc = run_acceptance(&cfg)?;
            for line in &acc.criteria {
                println!("{line}");
            }
            write_sweep(&out, &acc.sweep, &acc.report, &acc.criteria)?;
            for case in &acc.sweep.cases {
                write_fields(&out, case)?;
            }
            println!("reports written to {}", out.display());
            Ok(acc.passes())
        }
        Command::Dump(c) => {
            let (cfg, out) = c.config()?;
            let case = run_case(&cfg)?;
            println!("fields written to {}", write_fields(&out, &case)?.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

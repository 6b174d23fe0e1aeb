//! `cachenet` command-line driver.
//!
//! Exit codes: 0 success, 1 invalid input or a failed Monte Carlo check,
//! 2 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cachenet::config::{Config, ExperimentKind, Scheme, TierSelection};
use cachenet::experiment::{run_experiment_full, validate_mc, ExperimentSpec};
use cachenet::table::{emit, Format, Table};
use cachenet::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cachenet", version, about = "SCDP evaluation and cache placement for two-tier small-cell networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-content SCDP against the caching probability over the config grid.
    Eval(Common),
    /// Optimize the placement with one or more schemes.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Write the CCEO iteration trace as CSV (one file per tier when both run).
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Run a parameter sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep kind; defaults to `experiment.kind` in the config.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Compare analytic SCDP with Monte Carlo estimates.
    ValidateMc {
        #[command(flatten)]
        common: Common,
        /// Pass threshold on |z|; defaults to `mc.tolerance_sigma`.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Comma-separated schemes.
    #[arg(long, value_enum, value_delimiter = ',')]
    scheme: Vec<SchemeArg>,
    #[arg(long, value_enum)]
    tier: Option<TierArg>,
    /// Monte Carlo drops per point; 0 disables simulation columns.
    #[arg(long)]
    mc_drops: Option<usize>,
    /// Append a wall-clock column.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Mpc,
    Cceo,
    Twostair,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TierArg {
    Mu,
    Mm,
    Both,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl Common {
    fn load(&self) -> Result<(Config, ExperimentSpec), Failure> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = self.mc_drops {
            cfg.mc.drops = d;
        }
        let mut spec = ExperimentSpec::from_config(&cfg);
        if !self.scheme.is_empty() {
            spec.schemes = self
                .scheme
                .iter()
                .map(|s| match s {
                    SchemeArg::Mpc => Scheme::Mpc,
                    SchemeArg::Cceo => Scheme::Cceo,
                    SchemeArg::Twostair => Scheme::Twostair,
                })
                .collect();
        }
        if let Some(t) = self.tier {
            spec.tier = match t {
                TierArg::Mu => TierSelection::Mu,
                TierArg::Mm => TierSelection::Mm,
                TierArg::Both => TierSelection::Both,
            };
        }
        spec.timing = self.timing;
        Ok((cfg, spec))
    }

    fn format(&self) -> Format {
        match self.format {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }

    fn write(&self, table: &Table) -> Result<(), Failure> {
        match &self.out {
            Some(p) => emit(table, self.format(), p)?,
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                table.write(self.format(), &mut lock)?;
                lock.flush().map_err(Error::from)?;
            }
        }
        Ok(())
    }
}

fn trace_path(base: &Path, tier: &str, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_{tier}.{ext}"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Eval(common) => {
            let (cfg, mut spec) = common.load()?;
            spec.kind = ExperimentKind::ScdpVsB;
            let out = run_experiment_full(&spec, &cfg)?;
            common.write(&out.table)
        }
        Command::Optimize { common, trace } => {
            let (cfg, mut spec) = common.load()?;
            spec.kind = ExperimentKind::Optimize;
            if trace.is_some() && !spec.schemes.contains(&Scheme::Cceo) {
                return Err(Failure::Validation("--trace needs the cceo scheme".into()));
            }
            let out = run_experiment_full(&spec, &cfg)?;
            common.write(&out.table)?;
            if let Some(base) = trace {
                let several = out.traces.len() > 1;
                for (tier, tr) in &out.traces {
                    let path = trace_path(&base, tier.name(), several);
                    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                        std::fs::create_dir_all(dir).map_err(Error::from)?;
                    }
                    let file = std::fs::File::create(&path).map_err(Error::from)?;
                    tr.write_csv(std::io::BufWriter::new(file))?;
                    log::info!("wrote CCEO trace to {}", path.display());
                }
            }
            Ok(())
        }
        Command::Sweep { common, kind } => {
            let (cfg, mut spec) = common.load()?;
            if let Some(k) = kind {
                spec.kind = ExperimentKind::parse(&k)?;
            }
            if !spec.kind.needs_grid() {
                return Err(Failure::Validation(format!(
                    "`{}` is not a sweep; use the matching subcommand",
                    spec.kind.name()
                )));
            }
            let out = run_experiment_full(&spec, &cfg)?;
            common.write(&out.table)
        }
        Command::ValidateMc { common, tolerance } => {
            let (mut cfg, spec) = common.load()?;
            if common.tier.is_some() {
                cfg.experiment.tier = spec.tier;
            }
            if !common.scheme.is_empty() {
                log::warn!("--scheme has no effect on validate-mc");
            }
            let tol = tolerance.unwrap_or(cfg.mc.tolerance_sigma);
            let report = validate_mc(&cfg, tol)?;
            common.write(&report.to_table(cfg.hash(), cfg.seed))?;
            let failed = report.points.iter().filter(|p| !p.pass).count();
            if failed > 0 {
                return Err(Failure::Validation(format!(
                    "{failed} of {} points exceed |z| > {tol}",
                    report.points.len()
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

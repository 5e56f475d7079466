use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aliaslab::experiment::{psi_table, run_experiment, ExperimentConfig, FamilyKind};
use aliaslab::output::{psi_table_csv, write_file};
use aliaslab::special::PsiEvalConfig;
use aliaslab::verify::{run_suite, Suite};
use aliaslab::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "ALIASLAB_OUT";
const DEFAULT_OUT: &str = "aliaslab-out";

#[derive(Parser)]
#[command(name = "aliaslab", version, about = "View-aliasing lab for semi-discrete Radon data")]
struct Cli {
    /// Output directory [default: $ALIASLAB_OUT, else ./aliaslab-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Ψ(a h'; a, r) for h' in [0, 1]
    PsiTable {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4", allow_negative_numbers = true)]
        a: Vec<f64>,
        #[arg(long, default_value_t = 1.0 / 3.0, allow_negative_numbers = true)]
        r: f64,
        /// Number of h' samples
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Classical Radon transform (lines), full half-turn of views
    CrtDemo(DemoArgs),
    /// Circular Radon transform, limited angular window
    GrtDemo(DemoArgs),
    /// Run acceptance checks
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Args)]
struct DemoArgs {
    /// Experiment config (TOML); a saved report.toml also works
    #[arg(long)]
    config: Option<PathBuf>,

    /// Filter-grid oversampling, overriding the config
    #[arg(long)]
    eta: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    PsiProperties,
    Geometry,
    CrtFidelity,
    CrtConvergence,
    GrtConvergence,
    Discretization,
    Determinism,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::PsiProperties => Suite::PsiProperties,
            SuiteArg::Geometry => Suite::Geometry,
            SuiteArg::CrtFidelity => Suite::CrtFidelity,
            SuiteArg::CrtConvergence => Suite::CrtConvergence,
            SuiteArg::GrtConvergence => Suite::GrtConvergence,
            SuiteArg::Discretization => Suite::Discretization,
            SuiteArg::Determinism => Suite::Determinism,
            SuiteArg::All => Suite::All,
        }
    }
}

fn out_dir(flag: Option<PathBuf>, from_config: Option<&Path>) -> PathBuf {
    flag.or_else(|| from_config.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn demo(args: DemoArgs, out: Option<PathBuf>, family: FamilyKind) -> Result<ExitCode, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => match family {
            FamilyKind::Line => ExperimentConfig::crt_preset(),
            FamilyKind::Circle => ExperimentConfig::grt_preset(),
        },
    };
    if cfg.family != family {
        let want = match family {
            FamilyKind::Line => "line",
            FamilyKind::Circle => "circle",
        };
        return Err(Error::Config {
            field: "family".into(),
            reason: format!("this subcommand needs family = \"{want}\""),
        });
    }
    if let Some(eta) = args.eta {
        cfg.recon.eta = eta;
    }
    let dir = out_dir(out, cfg.outputs.dir.as_deref());
    cfg.outputs.dir = Some(dir.clone());
    cfg.validate()?;

    let outcome = run_experiment(&cfg)?;
    outcome.write(&dir)?;
    let report = &outcome.report;
    for d in &report.descriptors {
        println!(
            "tangency alpha* = {:.6} ({:?}), M = {:.6}, mu0 = {:.6}, k* = {:.4}, c = {:.6}",
            d.alpha_star, d.branch, d.m, d.mu0, d.k_star, d.amplitude
        );
    }
    match &report.metrics {
        Some(m) => println!(
            "sup mismatch {:.5}, prediction peak-to-peak {:.5}, relative {:.4} over {} samples",
            m.sup_mismatch, m.peak_to_peak, m.relative, m.samples
        ),
        None => println!("prediction is identically zero; no comparison metrics"),
    }
    for t in &report.timings {
        println!("{:>12}: {:.3}s", t.stage, t.seconds);
    }
    println!("wrote {} files to {}", report.outputs.len(), dir.display());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::PsiTable { a, r, samples } => {
            let rows = psi_table(&a, r, samples, &PsiEvalConfig::default())?;
            let dir = out_dir(cli.out, None);
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            let path = dir.join("psi_table.csv");
            write_file(&path, psi_table_csv(&rows))?;
            println!("wrote {} rows to {}", rows.len(), path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::CrtDemo(args) => demo(args, cli.out, FamilyKind::Line),
        Command::GrtDemo(args) => demo(args, cli.out, FamilyKind::Circle),
        Command::Verify { suite } => {
            let report = run_suite(suite.into(), |r| println!("{r}"))?;
            let dir = out_dir(cli.out, None);
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            write_file(&dir.join("verify.toml"), toml::to_string(&report)?)?;
            Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

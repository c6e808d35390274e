use clap::{Parser, ValueEnum};
use elastica::harness::{bundled_scene, run, Command, Overrides, RunOptions, SceneConfig, BUNDLED_SCENES};
use elastica::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Forward,
    Spectrum,
    FmClassic,
    FmSingle,
    ReflectCheck,
    NodalScan,
    LsmCompare,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Forward => Command::Forward,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::FmClassic => Command::FmClassic,
            Cmd::FmSingle => Command::FmSingle,
            Cmd::ReflectCheck => Command::ReflectCheck,
            Cmd::NodalScan => Command::NodalScan,
            Cmd::LsmCompare => Command::LsmCompare,
        }
    }
}

/// Elastic scattering experiments: forward data, spectra and factorization imaging.
#[derive(Debug, Parser)]
#[command(name = "elastica", version)]
struct Cli {
    command: Cmd,
    /// Scene config JSON, or `bundled:<name>` for a reference scene.
    #[arg(long)]
    config: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative noise level of the measured data.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    truncation_rho: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    ntheta: Option<usize>,
    /// Spectrum cache directory (overrides ELASTICA_CACHE).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn load(arg: &str) -> Result<SceneConfig, Error> {
    match arg.strip_prefix("bundled:") {
        Some(name) => bundled_scene(name).ok_or_else(|| {
            Error::config("--config", format!("unknown bundled scene `{name}` (known: {})", BUNDLED_SCENES.join(", ")))
        }),
        None => SceneConfig::load(arg.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        noise: cli.noise,
        truncation_rho: cli.truncation_rho,
        grid_n: cli.grid_n,
        n_theta: cli.ntheta,
    };
    let opts = RunOptions { out: cli.out.clone(), cache_dir: cli.cache_dir.clone(), threads: cli.threads };
    let result = cli
        .config
        .as_deref()
        .map(load)
        .transpose()
        .and_then(|cfg| run(cli.command.into(), cfg.as_ref(), &overrides, &opts));
    match result {
        Ok(manifest) => {
            for g in &manifest.gates {
                println!("{} {} = {:e} ({:?} {:e})", if g.passed { "PASS" } else { "FAIL" }, g.name, g.value, g.comparison, g.threshold);
            }
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("manifest: {}", cli.out.join("manifest.json").display());
            if manifest.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ (Error::Config { .. } | Error::Parse { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

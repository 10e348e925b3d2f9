use std::path::PathBuf;
use std::process::ExitCode;

use brokenline_lab::{execute, Command, LabConfig, LabError};
use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "brokenline", version, about = "Verification suites and inequality scans for the weighted Laplacian on the broken line")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores (overrides the config).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the randomized spot checks (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the effective config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

fn load(cli: &Cli) -> Result<LabConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(p) => LabConfig::load(p)?,
        None => LabConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn init_threads(n: usize) -> Result<(), LabError> {
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: &Cli) -> Result<i32, LabError> {
    let cfg = load(cli)?;
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(0);
    }
    init_threads(cfg.threads)?;
    let out = execute(cli.command, &cfg)?;
    for v in out.report.violations() {
        eprintln!("FAIL {v}");
    }
    for f in &out.report.failures {
        eprintln!("ERROR d={} p={:?} {} member {:?}: {}", f.d, f.p, f.family, f.member_index, f.error);
    }
    println!("wrote {} and {}", out.csv.display(), out.json.display());
    Ok(out.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}

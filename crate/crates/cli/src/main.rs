use clap::{Parser, Subcommand};
use nevlab_core::funcrep::{gallery_manifest, CURVE_NAMES};
use nevlab_core::precision::{precision_from_env, set_precision};
use nevlab_core::runner::{run_experiment, ExperimentConfig, ExperimentKind};
use nevlab_core::Error;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit code when `--assert` is given and a check fails.
const ASSERT_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "nevlab", version, about = "Numerical experiments in value distribution theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the gallery of maps and curves.
    List {
        /// Emit the manifest as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run one experiment and write table.csv and summary.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Cap on worker threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write plot.svg.
        #[arg(long)]
        svg: bool,
        /// Exit with code 4 when a check fails.
        #[arg(long)]
        assert: bool,
    },
}

fn report(e: &Error) -> ExitCode {
    let record = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{record}");
    ExitCode::from(e.exit_code() as u8)
}

fn list(json: bool) -> String {
    let manifest = gallery_manifest();
    if json {
        let doc = serde_json::json!({
            "maps": manifest,
            "curves": CURVE_NAMES,
            "experiments": ExperimentKind::ALL.iter().map(|k| k.as_str()).collect::<Vec<_>>(),
        });
        return serde_json::to_string_pretty(&doc).expect("manifest serializes") + "\n";
    }
    let mut s = String::from("maps:\n");
    for e in &manifest {
        let _ = writeln!(s, "  {:<16} R = {:<4} {:<18} {}", e.name, e.domain_radius, e.geometry, e.description);
        for p in &e.params {
            let _ = writeln!(s, "  {:<16}   {} = {} ({})", "", p.name, p.default, p.description);
        }
    }
    s.push_str("curves:\n");
    for c in CURVE_NAMES {
        let _ = writeln!(s, "  {c}");
    }
    s.push_str("experiments:\n");
    for k in ExperimentKind::ALL {
        let _ = writeln!(s, "  {}", k.as_str());
    }
    s
}

fn run(config: PathBuf, out: PathBuf, threads: Option<usize>, svg: bool, assert: bool) -> Result<bool, Error> {
    set_precision(precision_from_env()?);
    let cfg = ExperimentConfig::from_file(&config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run_experiment(&cfg))?;
    outcome.write(&out, svg)?;
    for c in &outcome.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(!assert || outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { json } => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().write_all(list(json).as_bytes());
            ExitCode::SUCCESS
        }
        Command::Run { config, out, threads, svg, assert } => match run(config, out, threads, svg, assert) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(ASSERT_FAILED),
            Err(e) => report(&e),
        },
    }
}

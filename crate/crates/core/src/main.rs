use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fusionq::report::Status;
use fusionq::suite::{run, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "fusionq", version, about = "Type-A fusion categories at roots of unity: construction and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weights of the open alcove with degrees, conjugates and dimensions
    Alcove(Opts),
    /// Fusion rules with V and truncated tensor-power multiplicities
    Fuse(Opts),
    /// Build the truncated levels and verify their identities
    Levels(Opts),
    /// Groupoid axioms, associators, cocycle, R-elements and section independence
    Groupoid(Opts),
    /// Haar annihilation and the cosemisimplicity certificate
    Haar(Opts),
    /// Hecke antisymmetrizers, quantum determinant and conjugate equations
    Appendix(Opts),
    /// Every suite
    All(Opts),
}

#[derive(Args)]
struct Opts {
    /// Rank parameter N (the algebra is sl_N)
    #[arg(long)]
    n: usize,
    /// Level ell, at least N+1
    #[arg(long)]
    ell: usize,
    /// Highest level built [default: min(m~, memory cap); the groupoid uses its own cap]
    #[arg(long)]
    max_power: Option<usize>,
    /// Residual bound (groupoid and appendix identities use 10x this)
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Largest number of legs for dense V^{⊗n} matrices
    #[arg(long, default_value_t = 6)]
    dense_cap: usize,
    #[arg(long, default_value_t = 2048)]
    memory_budget_mb: usize,
    /// Seed for the ChaCha8 sampler
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the flat TSV report here
    #[arg(long)]
    tsv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suite, o) = match cli.command {
        Command::Alcove(o) => (Suite::Alcove, o),
        Command::Fuse(o) => (Suite::Fuse, o),
        Command::Levels(o) => (Suite::Levels, o),
        Command::Groupoid(o) => (Suite::Groupoid, o),
        Command::Haar(o) => (Suite::Haar, o),
        Command::Appendix(o) => (Suite::Appendix, o),
        Command::All(o) => (Suite::All, o),
    };
    let cfg = RunConfig {
        n: o.n,
        ell: o.ell,
        max_power: o.max_power,
        tol: o.tol,
        dense_cap: o.dense_cap,
        memory_budget_mb: o.memory_budget_mb,
        seed: o.seed,
    };
    let report = match run(&cfg, suite) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("fusionq: {e}");
            return ExitCode::from(2);
        }
    };
    for t in &report.tables {
        print!("{t}");
    }
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        println!("{tag}  {:<40} {:>10.3e}  {}", c.id, c.max_residual, c.coverage);
    }
    let s = &report.summary;
    println!("summary: {} pass, {} fail, {} skipped", s.pass, s.fail, s.skipped);
    let writes = [(o.json, report.to_json()), (o.tsv, report.to_tsv())];
    for (path, body) in writes {
        if let Some(p) = path {
            if let Err(e) = std::fs::write(&p, body) {
                eprintln!("fusionq: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
    }
    if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) }
}

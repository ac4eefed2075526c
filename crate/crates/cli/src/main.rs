//! `hardy-lab`: runs experiment campaigns against the hardy-core characterizations and oracles.

mod config;
mod report;
mod runner;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::Experiment;

/// Environment variable that replaces every experiment's seed.
const SEED_ENV: &str = "HARDY_LAB_SEED";

#[derive(Parser)]
#[command(name = "hardy-lab", version, about = "Run iterated Hardy inequality experiment campaigns")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every experiment of a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every experiment once per value of a numeric parameter.
    Sweep {
        config: PathBuf,
        /// Numeric field to override, e.g. scale_v or grid_size.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Directory for report.csv, summary.txt and sequence exports.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Stop at the first failing experiment.
    #[arg(long)]
    fail_fast: bool,
    /// Worker threads (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(path: &Path) -> Result<Vec<Experiment>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut exps = config::parse(&text).with_context(|| format!("{}", path.display()))?;
    if let Ok(s) = std::env::var(SEED_ENV) {
        let seed: u64 = s.trim().parse().with_context(|| format!("{SEED_ENV}={s} is not an unsigned integer"))?;
        for e in &mut exps {
            e.seed = seed;
        }
    }
    Ok(exps)
}

fn sweep(exps: &[Experiment], param: &str, values: &[f64]) -> Result<Vec<Experiment>> {
    let mut out = Vec::with_capacity(exps.len() * values.len());
    for e in exps {
        for &v in values {
            let mut x = e.clone();
            x.set_numeric(param, v)?;
            x.revalidate().with_context(|| format!("{param} = {v} in experiment `{}`", e.id))?;
            x.id = format!("{}@{param}={}", e.id, report::num(v));
            out.push(x);
        }
    }
    // Check the name even when the campaign is empty.
    if exps.is_empty() {
        let mut probe = Experiment::new(0);
        probe.set_numeric(param, values[0])?;
    }
    Ok(out)
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

fn execute(exps: &[Experiment], common: &Common) -> Result<bool> {
    if let Some(n) = common.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    fs::create_dir_all(&common.out).with_context(|| format!("cannot create {}", common.out.display()))?;
    let start = Instant::now();
    let outcomes = runner::run_all(exps, common.fail_fast);
    let mut rows = Vec::new();
    for (exp, o) in exps.iter().zip(outcomes) {
        if let Some(seq) = o.sequence {
            let path = common.out.join(format!("{}_sequence.csv", file_stem(&exp.id)));
            let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
            w.write_record(["index", "x_k", "W*"])?;
            for (k, x, ws) in seq {
                w.write_record([k.to_string(), report::num(x), report::num(ws)])?;
            }
            w.flush()?;
        }
        rows.extend(o.rows);
    }
    let path = common.out.join("report.csv");
    let file = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    report::write_csv(std::io::BufWriter::new(file), &rows)?;
    let summary = report::summary(&rows, start.elapsed());
    fs::write(common.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(rows.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { config, common } => load(config).and_then(|e| execute(&e, common)),
        Cmd::Sweep { config, param, values, common } => load(config)
            .and_then(|e| sweep(&e, param, values))
            .and_then(|e| execute(&e, common)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("hardy-lab: {err:#}");
            ExitCode::from(2)
        }
    }
}

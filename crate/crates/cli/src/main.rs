use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use specnorm_cli::{run, ExperimentConfig, Mode, Overrides};

/// Eigenfunction L^p experiments on regular graphs and on the sphere.
#[derive(Parser, Debug)]
#[command(name = "specnorm", version)]
struct Args {
    /// Pipeline to run.
    #[arg(value_enum)]
    mode: Mode,
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed (overrides `seed` in the file).
    #[arg(long)]
    seed: Option<u64>,
    /// Graph generator spec, e.g. `random_regular:n=500,degree=4,seed=1`.
    #[arg(long)]
    graph: Option<String>,
    /// Exponents, comma separated; `inf` allowed.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<String>>,
    #[arg(long)]
    delta: Option<f64>,
    /// Write S_N as a matrix CSV.
    #[arg(long, value_name = "N")]
    dump_op: Option<usize>,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("SPECNORM_THREADS") {
        let n: usize = v.parse().with_context(|| format!("SPECNORM_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = (|| -> anyhow::Result<specnorm_cli::RunManifest> {
        init_threads()?;
        let overrides = Overrides {
            out: args.out.clone(),
            seed: args.seed,
            graph: args.graph.clone(),
            p: args.p.clone(),
            delta: args.delta,
            dump_op: args.dump_op,
        };
        let config = ExperimentConfig::load(&args.config, args.mode, &overrides)?;
        for w in &config.warnings {
            eprintln!("warning: {w}");
        }
        Ok(run(&config)?)
    })();
    match result {
        Ok(manifest) if manifest.passed() => {
            println!("{}: pass ({} files)", args.mode.label(), manifest.files.len());
            ExitCode::SUCCESS
        }
        Ok(manifest) => {
            println!("{}", serde_json::to_string_pretty(&manifest.failures).expect("failures serialize"));
            ExitCode::from(1)
        }
        Err(e) => {
            let err = serde_json::json!({ "error": format!("{e:#}") });
            println!("{err}");
            ExitCode::from(2)
        }
    }
}

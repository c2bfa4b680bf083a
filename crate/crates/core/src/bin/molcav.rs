use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use molcav::effective::{compare_with_full, ComparisonReport};
use molcav::entanglement::ModePair;
use molcav::error::SweepError;
use molcav::model::scale;
use molcav::pipeline::steady_states;
use molcav::sweep::{self, run_sweep, Format, SweepSpec};

#[derive(Parser)]
#[command(name = "molcav", version, about = "Steady-state Gaussian entanglement in a driven molecular cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write the result table.
    Run(RunArgs),
    /// Compare the adiabatically eliminated model with the full model on a grid.
    Compare(RunArgs),
    /// List the built-in presets.
    Presets,
    /// Print the resolved sweep configuration as TOML.
    ShowConfig(SpecArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// TOML sweep configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name (see `molcav presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Override a configuration value, e.g. `--set base.kappa=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Comma-separated mode pairs: a_b1, a_b2, b1_b2.
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<ModePair>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Output file; defaults to the config's output or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "MOLCAV_JOBS", default_value_t = 0)]
    jobs: usize,
}

fn resolve(args: &SpecArgs) -> Result<SweepSpec, SweepError> {
    let spec = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| SweepError::Io { path: path.clone(), source })?;
            SweepSpec::from_toml_str(&text)?
        }
        (None, Some(name)) => sweep::preset(name)?,
        (None, None) => return Err(SweepError::config("config", "one of --config or --preset is required")),
    };
    let mut spec = spec.with_overrides(&args.overrides)?;
    if !args.pairs.is_empty() {
        spec.pairs = args.pairs.clone();
        spec.validate()?;
    }
    Ok(spec)
}

fn destination(args: &RunArgs, spec: &SweepSpec) -> (Option<PathBuf>, Format) {
    let configured = spec.output.as_ref();
    let path = args.out.clone().or_else(|| configured.map(|o| o.path.clone()));
    let format = args
        .format
        .or_else(|| configured.map(|o| o.format))
        .or_else(|| {
            path.as_ref()
                .and_then(|p| p.extension())
                .and_then(|e| e.to_str())
                .and_then(|e| e.parse().ok())
        })
        .unwrap_or_default();
    (path, format)
}

fn run(args: &RunArgs) -> Result<(), SweepError> {
    let spec = resolve(&args.spec)?;
    let table = run_sweep(&spec, args.jobs)?;
    let (path, format) = destination(args, &spec);
    match path {
        Some(path) => {
            sweep::write_results(&table, format, &path)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            let stdout_err = |source| SweepError::Io { path: "<stdout>".into(), source };
            match format {
                Format::Csv => sweep::write_csv(&table, &mut out)
                    .map_err(|source| SweepError::Csv { path: "<stdout>".into(), source })?,
                Format::Json => {
                    let now = std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .map_or(0, |d| d.as_secs());
                    serde_json::to_writer_pretty(&mut out, &sweep::to_json(&table, now))?;
                    writeln!(out).map_err(stdout_err)?;
                }
            }
        }
    }
    eprint!("{}", table.summary);
    Ok(())
}

fn compare(args: &RunArgs) -> Result<(), SweepError> {
    let spec = resolve(&args.spec)?;
    let mut reports: Vec<ComparisonReport> = Vec::new();
    let mut failures = 0usize;
    let values: Vec<Vec<f64>> = spec.axes.iter().map(sweep::Axis::values).collect();
    for index in 0..spec.grid_size() {
        let mut point = spec.base.clone();
        for (axis, v) in spec.axes.iter().zip(sweep::coordinates(&values, index)) {
            sweep::set_param(&mut point, &axis.param, v);
        }
        let outcome = scale(&point).map_err(Into::into).and_then(|p| {
            steady_states(&p, spec.mode)?
                .iter()
                .map(|ss| compare_with_full(&p, ss))
                .collect::<Result<Vec<_>, _>>()
        });
        match outcome {
            Ok(r) => reports.extend(r),
            Err(e) => {
                failures += 1;
                eprintln!("point {index}: {e}");
            }
        }
    }
    let (path, _) = destination(args, &spec);
    let write = |w: Box<dyn Write>, label: PathBuf| -> Result<(), SweepError> {
        let mut csv = csv::Writer::from_writer(w);
        for r in &reports {
            csv.serialize(r).map_err(|source| SweepError::Csv { path: label.clone(), source })?;
        }
        csv.flush().map_err(|source| SweepError::Io { path: label, source })
    };
    match path {
        Some(p) => {
            let file = std::fs::File::create(&p).map_err(|source| SweepError::Io { path: p.clone(), source })?;
            write(Box::new(file), p)?;
        }
        None => write(Box::new(io::stdout()), "<stdout>".into())?,
    }
    eprintln!("{} comparisons, {failures} points skipped (unstable or failed)", reports.len());
    Ok(())
}

fn presets() {
    for name in sweep::PRESET_NAMES {
        let p = sweep::preset(name).expect("listed presets exist");
        let axes: Vec<String> = p
            .axes
            .iter()
            .map(|a| format!("{}[{}..{}; {}]", a.param, a.min, a.max, a.count))
            .collect();
        println!("{name:<14}{}", axes.join(" x "));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
        Command::Presets => {
            presets();
            Ok(())
        }
        Command::ShowConfig(args) => resolve(args).map(|s| print!("{}", s.to_toml_string())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SweepError::Config { .. } | SweepError::UnknownPreset(_) | SweepError::Parse(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

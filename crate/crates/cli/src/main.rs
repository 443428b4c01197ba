use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use unionbounds::reference::{reference_systems, REFERENCE_SYSTEMS};
use unionbounds::system::{SummaryFile, SystemFile};
use unionbounds::{
    construct_system, random, tables, verify_realization, BoundReport, ConstructOptions, DegreeDecomposition,
    Error, FiniteProbabilitySystem, LpBounds, MomentSummary, SolverOptions,
};

/// Exit codes. Stable across releases.
const EXIT_MISMATCH: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "unionbounds", version, about = "Bounds on the probability of a union of events")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute every applicable bound for a system or moment summary file.
    Bounds {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Simplex feasibility tolerance.
        #[arg(long, env = "UNIONBOUNDS_TOL")]
        tol: Option<f64>,
    },
    /// Build a witness system from a degree decomposition.
    Construct {
        #[arg(required_unless_present = "from_optimal", conflicts_with = "from_optimal")]
        path: Option<PathBuf>,
        /// Use the optimal lower-bound decomposition of this system's summary.
        #[arg(long, value_name = "SYSTEM")]
        from_optimal: Option<PathBuf>,
        /// Drop zero-probability outcomes from the witness.
        #[arg(long)]
        prune: bool,
        /// Write the witness here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a deterministic random system.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        events: usize,
        #[arg(long)]
        outcomes: usize,
    },
    /// Render the comparison tables for the reference systems V to VIII.
    Tables {
        /// Exit nonzero if any cell is off from the published value.
        #[arg(long)]
        check: bool,
        /// Load system_v.json .. system_viii.json from here instead of the bundled copies.
        #[arg(long, alias = "paper-systems-dir")]
        systems_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Parse(_) => EXIT_PARSE,
            Error::InvalidSystem(_) | Error::InvalidSummary(_) | Error::Domain(_) => EXIT_INVALID,
            Error::Infeasible(_) | Error::NotRealizable | Error::NotConstructible(_) | Error::Unbounded => {
                EXIT_INFEASIBLE
            }
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn io_failure(path: &Path, err: io::Error) -> Failure {
    Failure {
        code: EXIT_PARSE,
        message: format!("{}: {err}", path.display()),
    }
}

/// Writes a line to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

/// Either input format accepted by `bounds`.
#[derive(Deserialize)]
#[serde(untagged)]
enum InputFile {
    System(SystemFile),
    Summary(SummaryFile),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds { path, format, tol } => cmd_bounds(&path, format, tol),
        Command::Construct {
            path,
            from_optimal,
            prune,
            out,
        } => cmd_construct(path.as_deref(), from_optimal.as_deref(), prune, out.as_deref()),
        Command::Random {
            seed,
            events,
            outcomes,
        } => cmd_random(seed, events, outcomes),
        Command::Tables { check, systems_dir } => cmd_tables(check, systems_dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_bounds(path: &Path, format: Format, tol: Option<f64>) -> Result<(), Failure> {
    let mut options = SolverOptions::default();
    if let Some(tol) = tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Domain(format!("tolerance {tol} must be positive")).into());
        }
        options.feasibility_tol = tol;
    }
    let solver = LpBounds::new(options);
    let text = read(path)?;
    let input: InputFile = serde_json::from_str(&text).map_err(Error::from)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let report = match input {
        InputFile::System(file) => {
            let sys = FiniteProbabilitySystem::try_from(file)?;
            BoundReport::for_system(&id, &sys, &solver)?
        }
        InputFile::Summary(file) => {
            let s = MomentSummary::new(file.alpha, file.gamma)?;
            BoundReport::for_summary(&id, &s, &solver)?
        }
    };

    let mut stdout = io::stdout().lock();
    match format {
        Format::Table => {
            let _ = write!(stdout, "{}", render_report(&report));
        }
        Format::Json => {
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            let _ = writeln!(stdout, "{json}");
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(stdout);
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let b = &report.bounds;
            let rows = [
                vec![
                    "system", "exact", "ds", "de_caen", "kat", "gk", "yat", "kat_plus_gap", "opt_lower", "opt_upper",
                ]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>(),
                vec![
                    report.system_id.clone(),
                    opt(report.exact_union),
                    b.ds.to_string(),
                    b.de_caen.to_string(),
                    b.kat.to_string(),
                    opt(b.gk),
                    b.yat.to_string(),
                    b.kat_plus_gap.to_string(),
                    b.opt_lower.to_string(),
                    b.opt_upper.to_string(),
                ],
            ];
            for row in rows {
                w.write_record(&row).map_err(|e| Failure {
                    code: EXIT_PARSE,
                    message: e.to_string(),
                })?;
            }
            let _ = w.flush();
        }
    }
    Ok(())
}

fn render_report(r: &BoundReport) -> String {
    let mut out = format!("system {}\n", r.system_id);
    if let Some(exact) = r.exact_union {
        out += &format!("{:<14} {}\n", "exact", tables::format4(exact));
    }
    for (name, v) in r.bounds.entries() {
        out += &format!("{name:<14} {}\n", tables::format4(v));
    }
    out += &format!("{:<14} {}\n", "yat-kat", tables::format4(r.gap.yat_minus_kat));
    out += &format!("{:<14} {}\n", "gap_lower", tables::format4(r.gap.lower_bound));
    out
}

fn cmd_construct(
    path: Option<&Path>,
    from_optimal: Option<&Path>,
    prune: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let a = match (path, from_optimal) {
        (_, Some(sys_path)) => {
            let sys = FiniteProbabilitySystem::from_json(&read(sys_path)?)?;
            LpBounds::default().optimal_lower(&sys.moment_summary()?)?.decomposition
        }
        (Some(p), None) => DegreeDecomposition::from_json(&read(p)?)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let witness = construct_system(&a, ConstructOptions { prune_zero: prune })?;
    let report = verify_realization(&a, &witness);
    eprint!("{report}");
    let json = witness.to_json();
    match out {
        Some(p) => fs::write(p, json + "\n").map_err(|e| io_failure(p, e))?,
        None => emit(&json),
    }
    if !report.passed() {
        return Err(Failure {
            code: EXIT_MISMATCH,
            message: "witness failed verification".into(),
        });
    }
    Ok(())
}

fn cmd_random(seed: u64, events: usize, outcomes: usize) -> Result<(), Failure> {
    let sys = random::random_system(seed, events, outcomes)?;
    emit(&sys.to_json());
    Ok(())
}

fn cmd_tables(check: bool, dir: Option<&Path>) -> Result<(), Failure> {
    let systems: Vec<(String, FiniteProbabilitySystem)> = match dir {
        None => reference_systems()
            .into_iter()
            .map(|(l, s)| (l.to_string(), s))
            .collect(),
        Some(dir) => {
            let mut v = Vec::new();
            for (label, file, _) in REFERENCE_SYSTEMS {
                let path = dir.join(file);
                let sys = FiniteProbabilitySystem::from_json(&read(&path)?).map_err(|e| Failure {
                    message: format!("{}: {e}", path.display()),
                    ..Failure::from(e)
                })?;
                v.push((label.to_string(), sys));
            }
            v
        }
    };
    let (cmp, gap) = tables::compute_tables(&systems, &LpBounds::default())?;
    emit(&tables::render_comparison(&cmp));
    emit(&tables::render_gap(&gap));
    emit(tables::FOOTER);
    if check {
        let bad = tables::check_tables(&cmp, &gap);
        if !bad.is_empty() {
            for m in &bad {
                eprintln!("mismatch: {m}");
            }
            return Err(Failure {
                code: EXIT_MISMATCH,
                message: format!("{} cell(s) differ from the published values", bad.len()),
            });
        }
        eprintln!("all cells within {}", tables::TABLE_TOL);
    }
    Ok(())
}

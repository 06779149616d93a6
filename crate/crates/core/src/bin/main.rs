use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bipartite_phase::run::{run, RunError, EXIT_OK, EXIT_VALIDATION};
use bipartite_phase::scenario::{parse_document, parse_scenario_with, Overrides, SHIPPED};

/// Geometric phases of entangled bipartite pure states under bi-local evolution.
#[derive(Debug, Parser)]
#[command(name = "bipartite-phase", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every task of a scenario and write reports into the output directory.
    Run {
        scenario: PathBuf,
        /// Output directory (default: `out/<scenario file stem>`).
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
        /// Override the number of grid steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Override the interferometer noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// List the bundled scenarios, or print one of them.
    Examples {
        /// Name of the scenario to print.
        name: Option<String>,
    },
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn fail(err: &RunError) -> ExitCode {
    eprint!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            out,
            steps,
            seed,
        } => {
            let out = out.unwrap_or_else(|| {
                let stem = scenario.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| "scenario".into());
                PathBuf::from("out").join(stem)
            });
            let parsed = read(&scenario)
                .and_then(|text| parse_scenario_with(&text, &Overrides { steps, seed }).map_err(RunError::from));
            let parsed = match parsed {
                Ok(s) => s,
                Err(err) => {
                    if fs::create_dir_all(&out).is_ok() {
                        let _ = fs::write(out.join("error.json"), err.to_json());
                    }
                    return fail(&err);
                }
            };
            match run(&parsed, &out) {
                Ok(outputs) => {
                    for o in outputs {
                        for f in o.files {
                            println!("{}", f.display());
                        }
                    }
                    ExitCode::from(EXIT_OK as u8)
                }
                Err(err) => fail(&err),
            }
        }
        Command::Validate { scenario, steps } => {
            let result = read(&scenario)
                .and_then(|text| parse_scenario_with(&text, &Overrides { steps, seed: None }).map_err(RunError::from));
            match result {
                Ok(s) => {
                    println!(
                        "ok: {} ({}×{}, {} steps, {} tasks)",
                        s.name(),
                        s.state.dim_a(),
                        s.state.dim_b(),
                        s.grid.steps(),
                        s.tasks().len()
                    );
                    ExitCode::from(EXIT_OK as u8)
                }
                Err(err) => fail(&err),
            }
        }
        Command::Examples { name } => match name {
            None => {
                for (name, text) in SHIPPED {
                    let description = parse_document(text)
                        .ok()
                        .and_then(|d| d.description)
                        .unwrap_or_default();
                    println!("{name}\t{description}");
                }
                ExitCode::from(EXIT_OK as u8)
            }
            Some(name) => match SHIPPED.iter().find(|(n, _)| *n == name) {
                Some((_, text)) => {
                    print!("{text}");
                    ExitCode::from(EXIT_OK as u8)
                }
                None => {
                    eprintln!("unknown example '{name}'; run `bipartite-phase examples` for the list");
                    ExitCode::from(EXIT_VALIDATION as u8)
                }
            },
        },
    }
}

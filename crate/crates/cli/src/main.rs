//! Command-line front end for the cohort cost-effectiveness model.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cohort_ce::io::{emit_comparison, emit_sensitivity_suite, per_age_csv, DataBundle, ReportTable, ScenarioFile};
use cohort_ce::mc::McConfig;
use cohort_ce::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "cohort-ce", version, about = "Screening cost-effectiveness cohort model")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Directory holding the CSV data bundle and scenarios.cfg.
    #[arg(long, global = true, env = "COHORT_CE_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }

    fn render(self, table: &ReportTable) -> String {
        match self {
            Format::Csv => table.to_csv(),
            Format::Text => table.to_text(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one scenario.
    Run {
        #[arg(long)]
        scenario: String,
    },
    /// Compare alternatives with a baseline scenario.
    Compare {
        /// Defaults to the scenario file's baseline.
        #[arg(long)]
        baseline: Option<String>,
        /// Comma-separated scenario ids; defaults to every scenario.
        #[arg(long, value_delimiter = ',')]
        alts: Vec<String>,
    },
    /// Re-run the comparison under each sensitivity case.
    Sensitivity {
        /// Scenario file with [sensitivity] sections; defaults to the bundle's own.
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Check analytic results against the Monte Carlo oracle.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        individuals: u64,
        /// Scenario id; defaults to the baseline.
        #[arg(long)]
        policy: Option<String>,
        /// Worker threads; output does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 4096)]
        batch_size: usize,
    },
}

/// Echoes a report to stdout; a closed pipe is not an error.
fn show(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

fn load(common: &Common) -> Result<DataBundle> {
    let dir = common
        .data_dir
        .as_ref()
        .ok_or_else(|| Error::validation("--data-dir", "no data directory given (flag or COHORT_CE_DATA_DIR)"))?;
    DataBundle::load(dir)
}

fn run(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    let bundle = load(common)?;
    let fmt = common.format;
    match &cli.command {
        Command::Run { scenario } => {
            let spec = bundle.config.scenario(scenario)?;
            let result = bundle.evaluate(spec)?;
            let summary = fmt.render(&ReportTable::summary(&result));
            write_file(&common.out, &format!("{scenario}_summary.{}", fmt.ext()), &summary)?;
            write_file(&common.out, &format!("{scenario}_by_age.csv"), &per_age_csv(&result))?;
            show(&summary);
        }
        Command::Compare { baseline, alts } => {
            let config = &bundle.config;
            let base_id = match baseline {
                Some(b) => b.as_str(),
                None => config.baseline_id()?,
            };
            let base = config.scenario(base_id)?;
            let mut specs = vec![base];
            if alts.is_empty() {
                specs.extend(config.scenarios.iter().filter(|s| s.id != base_id));
            } else {
                for id in alts {
                    specs.push(config.scenario(id)?);
                }
            }
            let results = specs.iter().map(|s| bundle.evaluate(s)).collect::<Result<Vec<_>>>()?;
            let table = emit_comparison(&results, base_id, "Comparison")?;
            let text = fmt.render(&table);
            write_file(&common.out, &format!("comparison.{}", fmt.ext()), &text)?;
            show(&text);
        }
        Command::Sensitivity { suite } => {
            let loaded;
            let suite_file = match suite {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    loaded = ScenarioFile::parse(&text, &path.display().to_string())?;
                    &loaded
                }
                None => &bundle.config,
            };
            let scenarios = if suite_file.scenarios.is_empty() {
                &bundle.config.scenarios
            } else {
                &suite_file.scenarios
            };
            let base_id = match (&suite_file.baseline, suite_file.scenarios.is_empty()) {
                (Some(b), _) => b.as_str(),
                (None, false) => suite_file.baseline_id()?,
                (None, true) => bundle.config.baseline_id()?,
            };
            let tables = emit_sensitivity_suite(&suite_file.sensitivities, scenarios, base_id, &bundle)?;
            for (case, table) in suite_file.sensitivities.iter().zip(&tables) {
                let text = fmt.render(table);
                write_file(&common.out, &format!("sensitivity_{}.{}", case.id, fmt.ext()), &text)?;
                show(&text);
                println!();
            }
        }
        Command::Validate {
            seed,
            individuals,
            policy,
            threads,
            batch_size,
        } => {
            let id = match policy {
                Some(p) => p.as_str(),
                None => bundle.config.baseline_id()?,
            };
            let spec = bundle.config.scenario(id)?;
            let config = McConfig {
                seed: *seed,
                individuals: *individuals,
                batch_size: *batch_size,
                threads: *threads,
            };
            let report = bundle.oracle(spec, &config)?;
            let text = match fmt {
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            write_file(&common.out, &format!("validate_{id}.{}", fmt.ext()), &text)?;
            show(&text);
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: analytic results disagree with the Monte Carlo oracle");
            ExitCode::from(3)
        }
        Err(e) => {
            match e.issues() {
                [] => eprintln!("error: {e}"),
                issues => {
                    eprintln!("error: {} validation problem(s)", issues.len());
                    for issue in issues {
                        eprintln!("  {issue}");
                    }
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Front end for the analyses in `boundfix-core`. [`run`] returns the exact
//! bytes for stdout plus diagnostics for stderr, so tests can drive it
//! without a subprocess.

pub mod args;
pub mod commands;
pub mod report;

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use args::{Cli, Command, Format};
use report::{Report, Section, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] boundfix_core::Error),
}

pub const INPUT_ERROR_EXIT: u8 = 3;

pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Outcome {
    fn input_error(msg: String) -> Self {
        Self { stdout: String::new(), stderr: format!("{msg}\n"), code: INPUT_ERROR_EXIT }
    }
}

fn section_from_error(n: usize, e: CliError) -> Section {
    let mut s = Section::new();
    s.check("analysis", Status::Failed, e.to_string());
    s.line(format!("n = {n}: {e}"));
    s.json = serde_json::json!({ "n": n, "error": e.to_string() });
    s.finish()
}

pub fn run(cli: &Cli) -> Outcome {
    if cli.jobs == 0 {
        return Outcome::input_error("input error: --jobs must be at least 1".into());
    }
    let mut timing = String::new();
    let result = match &cli.command {
        Command::Custom { seed_file, max_len, t_max } => {
            let start = Instant::now();
            let r = commands::custom(seed_file, *max_len, *t_max);
            if cli.timing {
                timing.push_str(&format!("custom: {:.3?}\n", start.elapsed()));
            }
            r.map(|s| Report { command: "custom", sections: vec![s] })
        }
        cmd => sweep(cli, cmd, &mut timing),
    };
    match result {
        Err(CliError::Input(msg)) => Outcome::input_error(format!("input error: {msg}")),
        Err(e) => Outcome::input_error(e.to_string()),
        Ok(report) => {
            let stdout = match cli.format {
                Format::Text => report.to_text(),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report.to_json()).expect("serializable report");
                    s.push('\n');
                    s
                }
            };
            let mut stderr = timing;
            if let Some(c) = report.first_failure() {
                stderr.push_str(&format!("{}: {}: {}\n", report.status().label(), c.name, c.detail));
            }
            Outcome { stdout, stderr, code: report.status().exit_code() }
        }
    }
}

fn sweep(cli: &Cli, cmd: &Command, timing: &mut String) -> Result<Report, CliError> {
    let (name, rank) = match cmd {
        Command::Theorem(r) => ("theorem", r),
        Command::FixedPoints { rank, .. } => ("fixed-points", rank),
        Command::Inps { rank, .. } => ("inps", rank),
        Command::Iwip { rank, .. } => ("iwip", rank),
        Command::Index(r) => ("index", r),
        Command::Matrix { rank, .. } => ("matrix", rank),
        Command::Custom { .. } => unreachable!("custom is not a sweep"),
    };
    rank.validate()?;
    let one = |n: usize| -> (Section, std::time::Duration) {
        let start = Instant::now();
        let r = match cmd {
            Command::Theorem(a) => commands::theorem(n, a),
            Command::FixedPoints { rank, power, original_basis } => {
                commands::fixed_points(n, rank, *power, *original_basis)
            }
            Command::Inps { rank, mode, inverse, power } => commands::inps(n, rank, *mode, *inverse, *power),
            Command::Iwip { rank, inverse, dot } => commands::iwip(n, rank, *inverse, *dot),
            Command::Index(a) => commands::index(n, a),
            Command::Matrix { inverse, power, .. } => commands::matrix(n, *inverse, *power),
            Command::Custom { .. } => unreachable!(),
        };
        (r.unwrap_or_else(|e| section_from_error(n, e)), start.elapsed())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {} worker threads: {e}", cli.jobs)))?;
    // par_iter + collect keeps the rank order whatever the scheduling
    let results: Vec<(Section, std::time::Duration)> = pool.install(|| rank.n.0.par_iter().map(|&n| one(n)).collect());
    let mut sections = Vec::new();
    for (n, (s, t)) in rank.n.0.iter().zip(results) {
        if cli.timing {
            timing.push_str(&format!("{name} n={n}: {t:.3?}\n"));
        }
        sections.push(s);
    }
    Ok(Report { command: name, sections })
}

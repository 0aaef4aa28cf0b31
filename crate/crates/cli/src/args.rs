use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "analyze", version, about = "Fixed points, train tracks, iwip certificates and index for automorphisms of F_n")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Worker threads for sweeps over several ranks. Output does not depend on it.
    #[arg(long, default_value_t = 1, global = true)]
    pub jobs: usize,
    /// Print wall-clock time per rank on stderr.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Straight,
    Twisted,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct RankArgs {
    /// Rank: `3`, a range `3..8`, or a list `3,5,7`.
    #[arg(short = 'n', value_parser = parse_ranks)]
    pub n: Ranks,
    /// Prefix length used to verify fixed words.
    #[arg(long, default_value_t = 200)]
    pub depth: usize,
    /// Leg-length bound for the exhaustive Nielsen path search (default: from the cancellation bound).
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Largest power searched for periodic Nielsen paths (default: lcm of derivative-map cycles, at least 2).
    #[arg(long)]
    pub t_max: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full pipeline: fixed points, Fix, Nielsen paths, iwip, index.
    Theorem(RankArgs),
    /// Attracting and repelling fixed words with their certificates.
    FixedPoints {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, default_value_t = 1)]
        power: u32,
        /// Render repelling words over a1..an instead of x0, a2..an.
        #[arg(long)]
        original_basis: bool,
    },
    /// Indivisible Nielsen path search.
    Inps {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Analyse the inverse, over x0, a2..an where it is positive.
        #[arg(long)]
        inverse: bool,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
    /// Irreducibility certificate via the vertex blow-up criterion.
    Iwip {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long)]
        inverse: bool,
        /// Include the blow-up graph in DOT format.
        #[arg(long)]
        dot: bool,
    },
    /// Index of alpha_n and its inverse, with parageometric classification.
    Index(RankArgs),
    /// Transition matrix and Perron-Frobenius data.
    Matrix {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long)]
        inverse: bool,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
    /// Analyse an automorphism given as a table, one `a1 -> a1 a2` line per generator.
    Custom {
        #[arg(long)]
        seed_file: PathBuf,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        t_max: Option<u32>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranks(pub Vec<usize>);

pub fn parse_ranks(s: &str) -> Result<Ranks, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a rank"));
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(num(part)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(Ranks(out))
}

impl RankArgs {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(&n) = self.n.0.iter().find(|&&n| n < 2) {
            return Err(CliError::Input(format!("n must be at least 2, got {n}")));
        }
        if self.depth < 10 {
            return Err(CliError::Input(format!("depth must be at least 10, got {}", self.depth)));
        }
        if self.max_len == Some(0) {
            return Err(CliError::Input("max-len must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_syntax() {
        assert_eq!(parse_ranks("3").unwrap().0, vec![3]);
        assert_eq!(parse_ranks("3..6").unwrap().0, vec![3, 4, 5, 6]);
        assert_eq!(parse_ranks("7,3,3").unwrap().0, vec![3, 7]);
        assert!(parse_ranks("6..3").is_err());
        assert!(parse_ranks("x").is_err());
    }
}

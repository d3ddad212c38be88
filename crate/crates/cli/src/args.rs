use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// LVR Monte-Carlo laboratory and closed-form calculator.
///
/// Every option can also be set through an `LVR_<NAME>` environment variable
/// (for example `LVR_SEED=7`) or a `key = value` config file given with
/// `--config`. Flags win over the environment, which wins over the file.
#[derive(Debug, Parser)]
#[command(name = "lvr", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form or asymptotic P_trade, LVR and ARB.
    Theory {
        #[command(flatten)]
        common: Common,
        #[arg(long, env = "LVR_REGIME", value_enum)]
        regime: Option<RegimeArg>,
        /// Law constant for the general regime; estimated when omitted.
        #[arg(long = "c-mu", env = "LVR_C_MU")]
        c_mu: Option<f64>,
    },
    /// Monte-Carlo estimate at a single strip width.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Constant-law simulation against its closed form over a grid.
    Table2 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Constant-law simulation against the Poisson closed form over a grid.
    Figure1 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Also render the deviation curve as SVG.
        #[arg(long, env = "LVR_CHART")]
        chart: Option<PathBuf>,
    },
    /// Ladder-height moments h1, h2.
    Ladder {
        #[command(flatten)]
        common: Common,
    },
    /// Truncated C_mu series next to the ladder-moment value.
    Cmu {
        #[command(flatten)]
        common: Common,
        #[arg(long, env = "LVR_TRUNCATION", value_parser = parse_count)]
        truncation: Option<u64>,
        #[arg(long = "inner-budget", env = "LVR_INNER_BUDGET", value_parser = parse_count)]
        inner_budget: Option<u64>,
        /// Ladder samples for the comparison value; 0 skips it.
        #[arg(long = "oracle-n", env = "LVR_ORACLE_N", value_parser = parse_count)]
        oracle_n: Option<u64>,
    },
    /// Right and leftover overshoot moments approaching their limits.
    Overshoot {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// LVR of several block-time laws at the same strip width.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated law names.
        #[arg(long, env = "LVR_LAWS", value_delimiter = ',', value_enum)]
        laws: Option<Vec<Dist>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theory { .. } => "theory",
            Command::Simulate { .. } => "simulate",
            Command::Table2 { .. } => "table2",
            Command::Figure1 { .. } => "figure1",
            Command::Ladder { .. } => "ladder",
            Command::Cmu { .. } => "cmu",
            Command::Overshoot { .. } => "overshoot",
            Command::Sweep { .. } => "sweep",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Theory { common, .. }
            | Command::Simulate { common }
            | Command::Table2 { common, .. }
            | Command::Figure1 { common, .. }
            | Command::Ladder { common }
            | Command::Cmu { common, .. }
            | Command::Overshoot { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` config file (TOML syntax).
    #[arg(long, env = "LVR_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "LVR_DIST", value_enum)]
    pub dist: Option<Dist>,
    /// Block-time samples for `--dist empirical`, whitespace or comma separated.
    #[arg(long, env = "LVR_TABLE")]
    pub table: Option<PathBuf>,
    /// Interval bounds for `--dist uniform` (rescaled to mean 1).
    #[arg(long, env = "LVR_LOW")]
    pub low: Option<f64>,
    #[arg(long, env = "LVR_HIGH")]
    pub high: Option<f64>,
    /// Strip half-width in units of sigma_b.
    #[arg(long, env = "LVR_RHO", conflicts_with_all = ["gamma", "sigma", "blocktime"])]
    pub rho: Option<f64>,
    /// AMM spread in log-price units; with --sigma and --blocktime derives rho_b.
    #[arg(long, env = "LVR_GAMMA", requires_all = ["sigma", "blocktime"])]
    pub gamma: Option<f64>,
    #[arg(long, env = "LVR_SIGMA", requires_all = ["gamma", "blocktime"])]
    pub sigma: Option<f64>,
    #[arg(long, env = "LVR_BLOCKTIME", requires_all = ["gamma", "sigma"])]
    pub blocktime: Option<f64>,
    #[arg(long = "sigma-b", env = "LVR_SIGMA_B", conflicts_with = "sigma")]
    pub sigma_b: Option<f64>,
    #[arg(long, env = "LVR_ELL")]
    pub ell: Option<f64>,
    /// Excursions (or samples) per point; scientific notation accepted.
    #[arg(long, visible_alias = "n", env = "LVR_PATHS", value_parser = parse_count)]
    pub paths: Option<u64>,
    #[arg(long, env = "LVR_SEED", value_parser = parse_count)]
    pub seed: Option<u64>,
    #[arg(long, env = "LVR_WORKERS")]
    pub workers: Option<usize>,
    /// Single worker, canonical order.
    #[arg(long, env = "LVR_DETERMINISTIC")]
    pub deterministic: bool,
    #[arg(long, env = "LVR_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "LVR_FORMAT", value_enum)]
    pub format: Option<Format>,
    /// Scales every k·SE acceptance band.
    #[arg(long = "tolerance-multiplier", env = "LVR_TOLERANCE_MULTIPLIER")]
    pub tolerance_multiplier: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated rho_b values.
    #[arg(long, env = "LVR_GRID", value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Constant,
    #[value(alias = "exponential")]
    Poisson,
    Uniform,
    Empirical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Auto,
    Poisson,
    Constant,
    General,
}

/// Nonnegative integer count, accepting `1e7` or `10000000`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e7"), Ok(10_000_000));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

//! Resolution of flags, `LVR_*` environment variables (both via clap), the
//! config file and built-in defaults into one flat settings record.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use lvr_core::experiments::{FIGURE1_GRID, TABLE2_GRID};
use lvr_core::{derive_params, law, BlockTimeLaw, ModelParams};
use serde::Serialize;
use toml::{Table, Value};

use crate::args::{parse_count, Command, Dist, Format, RegimeArg};
use crate::error::CliError;

const KNOWN_KEYS: &[&str] = &[
    "dist",
    "table",
    "low",
    "high",
    "rho",
    "gamma",
    "sigma",
    "blocktime",
    "sigma_b",
    "ell",
    "paths",
    "n",
    "seed",
    "workers",
    "deterministic",
    "out",
    "format",
    "tolerance_multiplier",
    "grid",
    "laws",
    "regime",
    "c_mu",
    "truncation",
    "inner_budget",
    "oracle_n",
    "chart",
];

#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub command: &'static str,
    pub dist: Dist,
    pub table: Option<PathBuf>,
    pub low: f64,
    pub high: f64,
    pub rho: Option<f64>,
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub blocktime: Option<f64>,
    pub sigma_b: f64,
    pub ell: f64,
    pub paths: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub deterministic: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tolerance_multiplier: f64,
    pub grid: Vec<f64>,
    pub laws: Vec<Dist>,
    pub regime: RegimeArg,
    pub c_mu: Option<f64>,
    pub truncation: u64,
    pub inner_budget: u64,
    pub oracle_n: u64,
    pub chart: Option<PathBuf>,
}

struct FileConfig(Table);

impl FileConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading config {}", path.display()),
            source,
        })?;
        let raw: Table = text
            .parse()
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        let mut table = Table::new();
        for (k, v) in raw {
            let key = k.replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!("config: unknown key `{k}`")));
            }
            table.insert(key, v);
        }
        Ok(FileConfig(table))
    }

    fn bad(key: &str, want: &str) -> CliError {
        CliError::usage(format!("config: `{key}` must be {want}"))
    }

    fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(Self::bad(key, "a number")),
        }
    }

    fn count(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::Float(x)) => parse_count(&x.to_string())
                .map(Some)
                .map_err(|_| Self::bad(key, "a nonnegative integer")),
            Some(Value::String(s)) => parse_count(s)
                .map(Some)
                .map_err(|_| Self::bad(key, "a nonnegative integer")),
            Some(_) => Err(Self::bad(key, "a nonnegative integer")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Self::bad(key, "a string")),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Self::bad(key, "true or false")),
        }
    }

    fn number_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(Self::bad(key, "a list of numbers")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(Self::bad(key, "a list of numbers")),
        }
    }

    fn value_enum<E: ValueEnum>(&self, key: &str) -> Result<Option<E>, CliError> {
        self.string(key)?
            .map(|s| E::from_str(s, true).map_err(|_| Self::bad(key, "a known name")))
            .transpose()
    }

    fn dist_list(&self, key: &str) -> Result<Option<Vec<Dist>>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => {
                        Dist::from_str(s, true).map_err(|_| Self::bad(key, "law names"))
                    }
                    _ => Err(Self::bad(key, "a list of law names")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(Self::bad(key, "a list of law names")),
        }
    }
}

fn default_paths(command: &str) -> u64 {
    match command {
        "table2" | "figure1" | "overshoot" | "sweep" => 10_000_000,
        _ => 1_000_000,
    }
}

fn default_grid(command: &str) -> Vec<f64> {
    match command {
        "figure1" => FIGURE1_GRID.to_vec(),
        "overshoot" => vec![0.5, 1.0, 2.0, 4.0, 8.0],
        "sweep" => vec![10.0],
        _ => TABLE2_GRID.to_vec(),
    }
}

fn default_out(command: &str, format: Format) -> Option<PathBuf> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match command {
        "theory" | "cmu" => None,
        c => Some(PathBuf::from(format!("{c}.{ext}"))),
    }
}

impl Settings {
    pub fn resolve(command: &Command) -> Result<Self, CliError> {
        let c = command.common();
        let file = match &c.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig(Table::new()),
        };
        let name = command.name();

        let (grid, laws, regime, c_mu, truncation, inner_budget, oracle_n, chart) = match command {
            Command::Table2 { grid, .. }
            | Command::Overshoot { grid, .. } => (grid.grid.clone(), None, None, None, None, None, None, None),
            Command::Figure1 { grid, chart, .. } => {
                (grid.grid.clone(), None, None, None, None, None, None, chart.clone())
            }
            Command::Sweep { grid, laws, .. } => {
                (grid.grid.clone(), laws.clone(), None, None, None, None, None, None)
            }
            Command::Theory { regime, c_mu, .. } => {
                (None, None, *regime, *c_mu, None, None, None, None)
            }
            Command::Cmu {
                truncation,
                inner_budget,
                oracle_n,
                ..
            } => (None, None, None, None, *truncation, *inner_budget, *oracle_n, None),
            Command::Simulate { .. } | Command::Ladder { .. } => {
                (None, None, None, None, None, None, None, None)
            }
        };

        let format = match c.format {
            Some(f) => f,
            None => file.value_enum("format")?.unwrap_or(Format::Csv),
        };
        let out = c
            .out
            .clone()
            .or(file.string("out")?.map(PathBuf::from))
            .or_else(|| default_out(name, format));
        let paths = match c.paths {
            Some(p) => p,
            None => match file.count("paths")? {
                Some(p) => p,
                None => file.count("n")?.unwrap_or_else(|| default_paths(name)),
            },
        };
        let s = Settings {
            command: name,
            dist: match c.dist {
                Some(d) => d,
                None => file.value_enum("dist")?.unwrap_or(Dist::Constant),
            },
            table: c.table.clone().or(file.string("table")?.map(PathBuf::from)),
            low: c.low.or(file.number("low")?).unwrap_or(0.0),
            high: c.high.or(file.number("high")?).unwrap_or(2.0),
            rho: c.rho.or(file.number("rho")?),
            gamma: c.gamma.or(file.number("gamma")?),
            sigma: c.sigma.or(file.number("sigma")?),
            blocktime: c.blocktime.or(file.number("blocktime")?),
            sigma_b: c.sigma_b.or(file.number("sigma_b")?).unwrap_or(1.0),
            ell: c.ell.or(file.number("ell")?).unwrap_or(1.0),
            paths,
            seed: match c.seed {
                Some(s) => s,
                None => file.count("seed")?.unwrap_or(0),
            },
            workers: match c.workers {
                Some(w) => Some(w),
                None => file.count("workers")?.map(|w| w as usize),
            },
            deterministic: c.deterministic || file.boolean("deterministic")?.unwrap_or(false),
            out,
            format,
            tolerance_multiplier: c
                .tolerance_multiplier
                .or(file.number("tolerance_multiplier")?)
                .unwrap_or(1.0),
            grid: match grid {
                Some(g) => g,
                None => file.number_list("grid")?.unwrap_or_else(|| default_grid(name)),
            },
            laws: match laws {
                Some(l) => l,
                None => file
                    .dist_list("laws")?
                    .unwrap_or_else(|| vec![Dist::Constant, Dist::Poisson, Dist::Uniform]),
            },
            regime: match regime {
                Some(r) => r,
                None => file.value_enum("regime")?.unwrap_or(RegimeArg::Auto),
            },
            c_mu: c_mu.or(file.number("c_mu")?),
            truncation: match truncation {
                Some(t) => t,
                None => file
                    .count("truncation")?
                    .unwrap_or(lvr_core::analytic::DEFAULT_CMU_TRUNCATION),
            },
            inner_budget: match inner_budget {
                Some(b) => b,
                None => file
                    .count("inner_budget")?
                    .unwrap_or(lvr_core::analytic::DEFAULT_CMU_INNER_BUDGET),
            },
            oracle_n: match oracle_n {
                Some(n) => n,
                None => file.count("oracle_n")?.unwrap_or(1_000_000),
            },
            chart: chart.or(file.string("chart")?.map(PathBuf::from)),
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<(), CliError> {
        let derived = [self.gamma, self.sigma, self.blocktime];
        let n_derived = derived.iter().filter(|x| x.is_some()).count();
        if n_derived != 0 && n_derived != 3 {
            return Err(CliError::usage(
                "--gamma, --sigma and --blocktime must be given together",
            ));
        }
        if n_derived == 3 && self.rho.is_some() {
            return Err(CliError::usage(
                "give either --rho or --gamma/--sigma/--blocktime, not both",
            ));
        }
        if self.tolerance_multiplier.is_nan() || self.tolerance_multiplier <= 0.0 {
            return Err(CliError::usage("--tolerance-multiplier must be > 0"));
        }
        if self.workers == Some(0) {
            return Err(CliError::usage("--workers must be at least 1"));
        }
        Ok(())
    }

    /// Worker count actually used; `None` means the machine's parallelism.
    pub fn effective_workers(&self) -> Option<usize> {
        if self.deterministic {
            Some(1)
        } else {
            self.workers
        }
    }

    pub fn run_options(&self) -> lvr_core::RunOptions {
        let mut o = lvr_core::RunOptions::with_seed(self.seed);
        o.workers = self.effective_workers();
        o
    }

    pub fn params(&self) -> Result<ModelParams<f64>, CliError> {
        match (self.gamma, self.sigma, self.blocktime) {
            (Some(g), Some(s), Some(t)) => Ok(derive_params(s, t, g, self.ell)?),
            _ => Ok(ModelParams::normalized(
                self.rho.unwrap_or(1.0),
                self.sigma_b,
                self.ell,
            )?),
        }
    }

    pub fn law_for(&self, dist: Dist) -> Result<BlockTimeLaw<f64>, CliError> {
        Ok(match dist {
            Dist::Constant => BlockTimeLaw::constant(),
            Dist::Poisson => BlockTimeLaw::exponential(),
            Dist::Uniform => BlockTimeLaw::uniform(self.low, self.high)?,
            Dist::Empirical => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::usage("--dist empirical needs --table <file>"))?;
                BlockTimeLaw::empirical(law::read_empirical_table(path)?)?
            }
        })
    }

    pub fn law(&self) -> Result<BlockTimeLaw<f64>, CliError> {
        self.law_for(self.dist)
    }
}

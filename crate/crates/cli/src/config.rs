//! Command-line parsing into a serializable [`RunConfig`].

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use complab_core::carleson::{Strategy, DEFAULT_ANGULAR, DEFAULT_RADIUS, DEFAULT_SAMPLES};
use complab_core::operators::{DEFAULT_DIM, DEFAULT_PROXY_GRID};
use complab_core::symbols::{parse_complex, SelfMap};
use complab_core::weights::RadialWeight;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandTag {
    WeightCheck,
    Carleson,
    Essnorm,
    Criterion,
    Combo,
    Report,
}

/// Everything a run depends on; a JSON report embeds it for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandTag,
    pub weight_spec: String,
    pub symbol_specs: Vec<String>,
    pub scalars: Vec<Complex64>,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub options: Options,
}

/// Command-specific settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub radius: f64,
    pub angular: usize,
    pub samples: usize,
    pub strategy: Strategy,
    /// Separation threshold of the `1[ρ(φ, ψ) ≥ t]` multiplier in `carleson`.
    pub threshold: f64,
    pub sensitivity: bool,
    pub ranks: Vec<usize>,
    pub dump: Option<PathBuf>,
    pub replay: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            angular: DEFAULT_ANGULAR,
            samples: DEFAULT_SAMPLES,
            strategy: Strategy::MonteCarlo,
            threshold: DEFAULT_RADIUS,
            sensitivity: false,
            ranks: DEFAULT_PROXY_GRID.to_vec(),
            dump: None,
            replay: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "complab", version, about = "Composition operators on weighted Bergman spaces: weights, Carleson ratios, matrices and compactness verdicts")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// Weight spec: std:<alpha> or table:<path>
    #[arg(long)]
    weight: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Certify doubling behavior and fit boundary exponents
    WeightCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Pullback box ratios of C_phi across annuli
    Carleson {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        /// Restrict the measure to 1[rho(phi, psi) >= threshold]
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        threshold: f64,
        /// Pseudo-hyperbolic radius of the boxes
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: f64,
        #[arg(long, default_value_t = DEFAULT_ANGULAR)]
        angular: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::MonteCarlo)]
        strategy: StrategyArg,
        /// Also scan at the radii 0.3 and 0.7
        #[arg(long)]
        sensitivity: bool,
    },
    /// Tail-projection proxy of a truncated composition operator or combination
    Essnorm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: Option<String>,
        /// Scalars for phi and psi (default 1 and -1)
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambda: Vec<String>,
        #[arg(long = "N", default_value_t = DEFAULT_DIM)]
        n: usize,
        /// Projection ranks
        #[arg(long = "M", value_delimiter = ',')]
        ranks: Vec<usize>,
        /// Directory for row-major CSV dumps of the matrix
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Compactness verdict for lambda1 C_phi + lambda2 C_psi
    Criterion {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambda: Vec<String>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Lower bounds and verdict for C_phi - sum lambda_j C_phi_j
    Combo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        /// <lambda>:<symbol>, repeatable
        #[arg(long = "term", required = true, allow_hyphen_values = true)]
        terms: Vec<String>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Re-run a JSON report and compare
    Report {
        #[arg(long)]
        replay: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    MonteCarlo,
    TensorQuadrature,
}

fn check_weight(spec: &str) -> Result<()> {
    RadialWeight::parse(spec).map(|_| ()).with_context(|| format!("invalid --weight '{spec}'"))
}

fn check_symbol(flag: &str, spec: &str) -> Result<String> {
    let map = SelfMap::parse(spec).with_context(|| format!("invalid {flag} '{spec}'"))?;
    Ok(map.spec())
}

fn scalars(raw: &[String], default: &[f64]) -> Result<Vec<Complex64>> {
    if raw.is_empty() {
        return Ok(default.iter().map(|&x| Complex64::new(x, 0.0)).collect());
    }
    raw.iter()
        .map(|s| parse_complex(s).with_context(|| format!("invalid --lambda '{s}'")))
        .collect()
}

fn base(command: CommandTag, common: &Common) -> Result<RunConfig> {
    check_weight(&common.weight)?;
    Ok(RunConfig {
        command,
        weight_spec: common.weight.clone(),
        symbol_specs: Vec::new(),
        scalars: Vec::new(),
        p: 2.0,
        n: DEFAULT_DIM,
        seed: common.seed,
        output: common.output.clone(),
        format: common.format,
        options: Options::default(),
    })
}

/// Parses `argv` (including the program name) into a validated configuration.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let cfg = match cli.command {
        Cmd::WeightCheck { common } => base(CommandTag::WeightCheck, &common)?,
        Cmd::Carleson {
            common,
            phi,
            psi,
            threshold,
            radius,
            angular,
            samples,
            strategy,
            sensitivity,
        } => {
            let mut cfg = base(CommandTag::Carleson, &common)?;
            cfg.symbol_specs.push(check_symbol("--phi", &phi)?);
            if let Some(psi) = psi {
                cfg.symbol_specs.push(check_symbol("--psi", &psi)?);
            }
            if !(radius > 0.0 && radius < 1.0) {
                bail!("--radius must lie in (0, 1), got {radius}");
            }
            if angular == 0 || samples == 0 {
                bail!("--angular and --samples must be positive");
            }
            cfg.options = Options {
                radius,
                angular,
                samples,
                threshold,
                sensitivity,
                strategy: match strategy {
                    StrategyArg::MonteCarlo => Strategy::MonteCarlo,
                    StrategyArg::TensorQuadrature => Strategy::TensorQuadrature,
                },
                ..Options::default()
            };
            cfg
        }
        Cmd::Essnorm {
            common,
            phi,
            psi,
            lambda,
            n,
            ranks,
            dump,
        } => {
            let mut cfg = base(CommandTag::Essnorm, &common)?;
            cfg.symbol_specs.push(check_symbol("--phi", &phi)?);
            let default: &[f64] = if psi.is_some() { &[1.0, -1.0] } else { &[1.0] };
            if let Some(psi) = psi {
                cfg.symbol_specs.push(check_symbol("--psi", &psi)?);
            }
            cfg.scalars = scalars(&lambda, default)?;
            if cfg.scalars.len() != cfg.symbol_specs.len() {
                bail!("expected {} --lambda values, got {}", cfg.symbol_specs.len(), cfg.scalars.len());
            }
            if n == 0 {
                bail!("--N must be positive");
            }
            cfg.n = n;
            let ranks = if ranks.is_empty() {
                DEFAULT_PROXY_GRID.iter().copied().filter(|&m| m < n).collect()
            } else {
                ranks
            };
            if let Some(&m) = ranks.iter().find(|&&m| m >= n) {
                bail!("--M value {m} must be below --N {n}");
            }
            cfg.options = Options {
                ranks,
                dump,
                ..Options::default()
            };
            cfg
        }
        Cmd::Criterion {
            common,
            phi,
            psi,
            lambda,
            p,
        } => {
            let mut cfg = base(CommandTag::Criterion, &common)?;
            cfg.symbol_specs = vec![check_symbol("--phi", &phi)?, check_symbol("--psi", &psi)?];
            cfg.scalars = scalars(&lambda, &[1.0, -1.0])?;
            if cfg.scalars.len() != 2 {
                bail!("criterion takes exactly two --lambda values, got {}", cfg.scalars.len());
            }
            check_p(p)?;
            cfg.p = p;
            cfg
        }
        Cmd::Combo { common, phi, terms, p } => {
            let mut cfg = base(CommandTag::Combo, &common)?;
            cfg.symbol_specs.push(check_symbol("--phi", &phi)?);
            for t in &terms {
                let (l, s) = t
                    .split_once(':')
                    .with_context(|| format!("invalid --term '{t}': expected <lambda>:<symbol>"))?;
                cfg.scalars
                    .push(parse_complex(l).with_context(|| format!("invalid --term '{t}'"))?);
                cfg.symbol_specs.push(check_symbol("--term", s)?);
            }
            check_p(p)?;
            cfg.p = p;
            cfg
        }
        Cmd::Report { replay, output } => RunConfig {
            command: CommandTag::Report,
            weight_spec: String::new(),
            symbol_specs: Vec::new(),
            scalars: Vec::new(),
            p: 2.0,
            n: 0,
            seed: 0,
            output,
            format: Format::Json,
            options: Options {
                replay: Some(replay),
                ..Options::default()
            },
        },
    };
    Ok(cfg)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        bail!("--p must be positive, got {p}");
    }
    Ok(())
}

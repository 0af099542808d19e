//! Command dispatch, report emission and replay.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use complab_core::carleson::{lemma5_premise, Multiplier, PullbackSampler, ScanReport, SENSITIVITY_RADII};
use complab_core::criteria::{
    moorhouse_quantity, policy_radii, theorem12_verdict, theorem15_verdict, theorem8_bound, CombinationReport,
    PairReport, Verdict, CONTACT_RESOLUTION,
};
use complab_core::operators::combo_matrix;
use complab_core::policy::Limit;
use complab_core::symbols::{contact_scan, SelfMap};
use complab_core::weights::{default_grid, DoublingCertificate, RadialWeight};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{CommandTag, Format, RunConfig};

/// Gap `1 - |z|` at which radial tails are sampled.
pub const TAIL_GAP: f64 = 1e-6;
/// Largest absolute difference tolerated between a replayed and a stored number.
pub const REPLAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Definitive,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Definitive => 0,
            Outcome::Inconclusive => 2,
        }
    }
}

/// The JSON document written for every run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub verdict: String,
    pub result: Value,
}

#[derive(Debug, Clone, Serialize)]
struct CarlesonResult {
    scan: ScanReport,
    premise: Option<ScanReport>,
    sensitivity: Vec<ScanReport>,
    sensitivity_agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
struct EssnormResult {
    dim: usize,
    op_norm: f64,
    ranks: Vec<usize>,
    proxy: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct TailValue {
    boundary_point: Complex64,
    radius: f64,
    value: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CriterionResult {
    pair: PairReport,
    radial_tails: Vec<TailValue>,
}

#[derive(Debug, Clone, Serialize)]
struct ContactBound {
    zeta: Complex64,
    bound: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ComboResult {
    combination: CombinationReport,
    lower_bounds: Vec<ContactBound>,
}

struct Computed {
    verdict: String,
    outcome: Outcome,
    result: Value,
    csv: String,
}

fn weight(cfg: &RunConfig) -> Result<RadialWeight> {
    RadialWeight::parse(&cfg.weight_spec).with_context(|| format!("invalid weight '{}'", cfg.weight_spec))
}

fn symbols(cfg: &RunConfig) -> Result<Vec<SelfMap>> {
    cfg.symbol_specs
        .iter()
        .map(|s| SelfMap::parse(s).with_context(|| format!("invalid symbol '{s}'")))
        .collect()
}

fn limit_outcome(l: Limit) -> Outcome {
    if l == Limit::Inconclusive {
        Outcome::Inconclusive
    } else {
        Outcome::Definitive
    }
}

fn verdict_outcome(v: Verdict) -> Outcome {
    if v == Verdict::Inconclusive {
        Outcome::Inconclusive
    } else {
        Outcome::Definitive
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn weight_check(cfg: &RunConfig) -> Result<Computed> {
    let cert: DoublingCertificate = weight(cfg)?.doubling_check(&default_grid())?;
    let mut csv = String::from("field,value\n");
    let fields = [
        ("in_dhat", f64::from(u8::from(cert.in_dhat))),
        ("c_hat", cert.c_hat),
        ("in_dcheck", f64::from(u8::from(cert.in_dcheck))),
        ("c_check", cert.c_check),
        ("k", cert.k),
        ("alpha", cert.alpha),
        ("beta", cert.beta),
        ("c_upper_envelope", cert.c_upper_envelope),
        ("c_lower_envelope", cert.c_lower_envelope),
        ("grid_resolution", cert.grid_resolution as f64),
        ("effective_max_r", cert.effective_max_r),
        ("truncated", f64::from(u8::from(cert.truncated))),
    ];
    for (k, v) in fields {
        writeln!(csv, "{k},{}", num(v))?;
    }
    Ok(Computed {
        verdict: if cert.in_d() { "in-D" } else { "not-in-D" }.into(),
        outcome: Outcome::Definitive,
        result: serde_json::to_value(&cert)?,
        csv,
    })
}

fn carleson(cfg: &RunConfig) -> Result<Computed> {
    let w = weight(cfg)?;
    let maps = symbols(cfg)?;
    let o = &cfg.options;
    let radii = policy_radii();
    let multiplier = match maps.get(1) {
        Some(psi) => Multiplier::separation(&maps[0], psi, o.threshold),
        None => Multiplier::One,
    };
    let sampler = PullbackSampler::new(maps[0].clone(), w)
        .with_multiplier(multiplier.clone())
        .with_samples(o.samples)
        .with_strategy(o.strategy)
        .with_seed(cfg.seed);
    let scan = sampler.vanishing_scan(o.radius, &radii, o.angular)?;
    let premise = if maps.len() > 1 {
        Some(lemma5_premise(&maps[0], &multiplier, &radii, o.angular)?)
    } else {
        None
    };
    let sensitivity = if o.sensitivity {
        SENSITIVITY_RADII
            .iter()
            .map(|&r| sampler.vanishing_scan(r, &radii, o.angular))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let sensitivity_agrees = sensitivity.iter().all(|s| s.verdict == scan.verdict);
    let verdict = if sensitivity_agrees { scan.verdict } else { Limit::Inconclusive };
    let mut csv = String::from("radius,sup_ratio,stderr\n");
    for ((r, s), e) in scan.radii.iter().zip(&scan.sups).zip(&scan.stderrs) {
        writeln!(csv, "{},{},{}", num(*r), num(*s), num(*e))?;
    }
    Ok(Computed {
        verdict: verdict.to_string(),
        outcome: limit_outcome(verdict),
        result: serde_json::to_value(CarlesonResult {
            scan,
            premise,
            sensitivity,
            sensitivity_agrees,
        })?,
        csv,
    })
}

fn essnorm(cfg: &RunConfig) -> Result<Computed> {
    let w = weight(cfg)?;
    let terms: Vec<(Complex64, SelfMap)> = cfg.scalars.iter().copied().zip(symbols(cfg)?).collect();
    let t = combo_matrix(&terms, &w, cfg.n)?;
    let ranks = cfg.options.ranks.clone();
    let proxy = t.essnorm_proxy(&ranks)?;
    if let Some(dir) = &cfg.options.dump {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        t.write_csv(dir, "matrix")?;
    }
    let mut csv = String::from("M,proxy\n");
    for (m, v) in ranks.iter().zip(&proxy) {
        writeln!(csv, "{m},{}", num(*v))?;
    }
    Ok(Computed {
        verdict: "computed".into(),
        outcome: Outcome::Definitive,
        result: serde_json::to_value(EssnormResult {
            dim: t.dim(),
            op_norm: t.op_norm(),
            ranks,
            proxy,
        })?,
        csv,
    })
}

fn contact_points(maps: &[SelfMap]) -> Result<Vec<Complex64>> {
    let mut pts: Vec<Complex64> = Vec::new();
    for m in maps {
        for h in contact_scan(m, CONTACT_RESOLUTION)?.hits {
            if !pts.iter().any(|p| (p - h.boundary_point).norm() < 1e-9) {
                pts.push(h.boundary_point);
            }
        }
    }
    Ok(pts)
}

fn criterion(cfg: &RunConfig) -> Result<Computed> {
    let w = weight(cfg)?;
    let maps = symbols(cfg)?;
    let pair = theorem12_verdict(&maps[0], &maps[1], cfg.scalars[0], cfg.scalars[1], &w, cfg.p)?;
    let radius = 1.0 - TAIL_GAP;
    let radial_tails = contact_points(&maps)?
        .into_iter()
        .map(|zeta| TailValue {
            boundary_point: zeta,
            radius,
            value: moorhouse_quantity(&maps[0], &maps[1], zeta * radius),
        })
        .collect();
    let mut csv = String::from("radius,sup\n");
    let scan = &pair.condition_ii.scan;
    for (r, s) in scan.annuli.iter().zip(&scan.sups) {
        writeln!(csv, "{},{}", num(*r), num(*s))?;
    }
    Ok(Computed {
        verdict: pair.verdict.to_string(),
        outcome: verdict_outcome(pair.verdict),
        result: serde_json::to_value(CriterionResult { pair, radial_tails })?,
        csv,
    })
}

fn combo(cfg: &RunConfig) -> Result<Computed> {
    let w = weight(cfg)?;
    let maps = symbols(cfg)?;
    let terms: Vec<(Complex64, SelfMap)> = cfg.scalars.iter().copied().zip(maps[1..].iter().cloned()).collect();
    let combination = theorem15_verdict(&maps[0], &terms, &w)?;
    let mut signed = vec![(Complex64::new(1.0, 0.0), maps[0].clone())];
    signed.extend(terms.iter().map(|(l, m)| (-l, m.clone())));
    let lower_bounds = contact_points(&maps)?
        .into_iter()
        .map(|zeta| {
            theorem8_bound(&signed, zeta, combination.certificate.beta, cfg.p).map(|bound| ContactBound { zeta, bound })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("zeta_re,zeta_im,bound\n");
    for b in &lower_bounds {
        writeln!(csv, "{},{},{}", num(b.zeta.re), num(b.zeta.im), num(b.bound))?;
    }
    let verdict = combination.verdict;
    Ok(Computed {
        verdict: verdict.to_string(),
        outcome: verdict_outcome(verdict),
        result: serde_json::to_value(ComboResult {
            combination,
            lower_bounds,
        })?,
        csv,
    })
}

fn compute(cfg: &RunConfig) -> Result<Computed> {
    match cfg.command {
        CommandTag::WeightCheck => weight_check(cfg),
        CommandTag::Carleson => carleson(cfg),
        CommandTag::Essnorm => essnorm(cfg),
        CommandTag::Criterion => criterion(cfg),
        CommandTag::Combo => combo(cfg),
        CommandTag::Report => bail!("report runs through replay"),
    }
}

/// Runs `cfg` and returns the report without writing anything.
pub fn run(cfg: &RunConfig) -> Result<(Report, String, Outcome)> {
    if cfg.command == CommandTag::Report {
        let path = cfg.options.replay.as_deref().context("report needs --replay")?;
        return replay(path);
    }
    let c = compute(cfg)?;
    let report = Report {
        config: cfg.clone(),
        verdict: c.verdict,
        result: c.result,
    };
    Ok((report, c.csv, c.outcome))
}

/// Runs `cfg` and writes the report to its output path, or to stdout.
pub fn run_and_emit(cfg: &RunConfig) -> Result<Outcome> {
    let (report, csv, outcome) = run(cfg)?;
    let format = if cfg.command == CommandTag::Report { Format::Json } else { cfg.format };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => csv,
    };
    match &cfg.output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(outcome)
}

/// Re-runs the configuration stored in a JSON report and checks that the result matches.
pub fn replay(path: &Path) -> Result<(Report, String, Outcome)> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let stored: Report = serde_json::from_str(&text).with_context(|| format!("{} is not a report", path.display()))?;
    if stored.config.command == CommandTag::Report {
        bail!("{} is itself a replay", path.display());
    }
    let (fresh, csv, outcome) = run(&stored.config)?;
    if fresh.verdict != stored.verdict {
        bail!("replay verdict {} differs from stored {}", fresh.verdict, stored.verdict);
    }
    if let Some(at) = first_difference(&stored.result, &fresh.result, "result") {
        bail!("replay differs from stored report at {at}");
    }
    Ok((fresh, csv, outcome))
}

fn first_difference(a: &Value, b: &Value, at: &str) -> Option<String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64()?, y.as_f64()?);
            ((x - y).abs() > REPLAY_TOL).then(|| at.to_string())
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(at.to_string());
            }
            x.iter().zip(y).enumerate().find_map(|(i, (p, q))| first_difference(p, q, &format!("{at}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() {
                return Some(at.to_string());
            }
            x.iter().find_map(|(k, p)| match y.get(k) {
                Some(q) => first_difference(p, q, &format!("{at}.{k}")),
                None => Some(format!("{at}.{k}")),
            })
        }
        _ => (a != b).then(|| at.to_string()),
    }
}

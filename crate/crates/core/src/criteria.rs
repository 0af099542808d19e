//! Boundary-limit quantities and compactness verdicts for single symbols, pairs
//! and linear combinations.

use std::fmt;

use num_complex::{Complex, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::carleson::dyadic_radii;
use crate::geometry::{approach_path, boundary_biased_point, ApproachPath, GeometryError};
use crate::operators::{composition_matrix, OperatorError};
use crate::policy::{Limit, Thresholds};
use crate::symbols::{angular_derivative, contact_scan, AngularDerivative, ContactScan, SelfMap, SymbolError};
use crate::weights::{default_grid, DoublingCertificate, RadialWeight, WeightError};

/// Annuli `1 - 2^-k` for `k` in this range.
pub const ANNULUS_DEPTHS: (u32, u32) = (4, 14);
pub const ANNULUS_ANGLES: usize = 512;
pub const PATH_APERTURES: [f64; 2] = [2.0, 8.0];
pub const PATH_SAMPLES: usize = 40;
/// Local windows around contact points: `|θ - arg ζ| ≤ 2^{-k/4}` on the same annuli.
pub const WINDOW_POINTS: usize = 512;
pub const CONTACT_RESOLUTION: usize = 4096;
pub const SUM_TOL: f64 = 1e-6;
pub const UNIT_LAMBDA_TOL: f64 = 1e-12;
pub const PROXY_DIM: usize = 256;
pub const PROXY_RANKS: (usize, usize) = (16, 128);
/// Proxy decay from the first to the second rank that counts as compact.
pub const PROXY_DECAY: f64 = 4.0;
const SAME_POINT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("weight {weight} is not certified doubling (in D-hat: {in_dhat}, in D-check: {in_dcheck})")]
    NotInD { weight: String, in_dhat: bool, in_dcheck: bool },
    #[error("angular derivative at {zeta} is inconclusive for {symbols:?}")]
    InconclusiveDerivative { zeta: Complex64, symbols: Vec<String> },
    #[error("a combination needs at least one term")]
    EmptyTerms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "COMPACT")]
    Compact,
    #[serde(rename = "NOT-COMPACT")]
    NotCompact,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Compact => "COMPACT",
            Verdict::NotCompact => "NOT-COMPACT",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Whether a condition is established, refuted or left open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    Undetermined,
}

fn to_dd(z: Complex64) -> Complex<TwoFloat> {
    Complex::new(TwoFloat::from_f64(z.re), TwoFloat::from_f64(z.im))
}

fn dd(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

fn gap_sq(w: Complex<TwoFloat>) -> f64 {
    dd(TwoFloat::from_f64(1.0) - (w.re * w.re + w.im * w.im))
}

fn pair_term(gz: f64, a: Complex<TwoFloat>, b: Complex<TwoFloat>) -> f64 {
    let (ga, gb) = (gap_sq(a), gap_sq(b));
    let diff = a - b;
    let num = Complex64::new(dd(diff.re), dd(diff.im)).norm();
    if num == 0.0 {
        return 0.0;
    }
    let one = TwoFloat::from_f64(1.0);
    // 1 - conj(b) a
    let re = one - (b.re * a.re + b.im * a.im);
    let im = b.im * a.re - b.re * a.im;
    let rho = (num / Complex64::new(dd(re), dd(-im)).norm()).min(1.0);
    (gz / ga + gz / gb) * rho
}

/// `((1-|z|²)/(1-|φ(z)|²) + (1-|z|²)/(1-|ψ(z)|²)) ρ(φ(z), ψ(z))`, in double-double.
pub fn moorhouse_quantity(phi: &SelfMap, psi: &SelfMap, z: Complex64) -> f64 {
    let zd = to_dd(z);
    let gz = gap_sq(zd);
    let a = phi.eval_dd(zd);
    let b = psi.eval_dd(zd);
    let key = |w: &Complex<TwoFloat>| (w.re.hi(), w.im.hi(), w.re.lo(), w.im.lo());
    let (ka, kb) = (key(&a), key(&b));
    // Fixed argument order keeps the value exactly symmetric.
    if ka.partial_cmp(&kb) == Some(std::cmp::Ordering::Greater) {
        pair_term(gz, b, a)
    } else {
        pair_term(gz, a, b)
    }
}

/// Values along one approach path, ordered toward the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub target: Complex64,
    pub aperture: f64,
    pub gaps: Vec<f64>,
    pub values: Vec<f64>,
    pub verdict: Limit,
}

/// Suprema over local arcs around a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub target: Complex64,
    pub radii: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub sups: Vec<f64>,
    pub verdict: Limit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub symbols: Vec<String>,
    pub lambdas: Vec<Complex64>,
    pub weight: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub quantity: String,
    pub annuli: Vec<f64>,
    pub sups: Vec<f64>,
    pub paths: Vec<PathReport>,
    pub windows: Vec<WindowReport>,
    pub verdict: Limit,
    pub params: Params,
    pub thresholds: Thresholds,
}

/// Bounded away if any component is; vanishing if every component is.
fn combine(parts: impl IntoIterator<Item = Limit>) -> Limit {
    let mut any = false;
    let mut all_vanish = true;
    for l in parts {
        any = true;
        match l {
            Limit::BoundedAway => return Limit::BoundedAway,
            Limit::Inconclusive => all_vanish = false,
            Limit::Vanishing => {}
        }
    }
    if any && all_vanish {
        Limit::Vanishing
    } else {
        Limit::Inconclusive
    }
}

pub fn policy_radii() -> Vec<f64> {
    dyadic_radii(ANNULUS_DEPTHS.0..=ANNULUS_DEPTHS.1)
}

/// Approach paths with apertures [`PATH_APERTURES`] at each point.
pub fn policy_paths(points: &[Complex64]) -> Result<Vec<ApproachPath>, GeometryError> {
    let mut out = Vec::new();
    for &zeta in points {
        for m in PATH_APERTURES {
            out.push(approach_path(zeta, m, PATH_SAMPLES)?);
        }
    }
    Ok(out)
}

/// Annulus suprema of `q` on `angular` equally spaced points per radius, values along
/// each path and suprema over local windows around each point in `windows`.
pub fn boundary_limsup<Q>(
    quantity: &str,
    q: Q,
    radii: &[f64],
    angular: usize,
    paths: &[ApproachPath],
    windows: &[Complex64],
    params: Params,
) -> CriterionReport
where
    Q: Fn(Complex64) -> f64 + Sync,
{
    let thresholds = Thresholds::default();
    let sups: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            (0..angular)
                .map(|j| q(Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / angular as f64)))
                .fold(0.0, f64::max)
        })
        .collect();
    let paths: Vec<PathReport> = paths
        .par_iter()
        .map(|p| {
            let values: Vec<f64> = p.samples.iter().map(|&z| q(z)).collect();
            PathReport {
                target: p.target,
                aperture: p.aperture,
                gaps: p.samples.iter().map(|z| 1.0 - z.norm()).collect(),
                verdict: thresholds.classify(&values),
                values,
            }
        })
        .collect();
    let window_radii = policy_radii();
    let windows: Vec<WindowReport> = windows
        .par_iter()
        .map(|&zeta| {
            let half_widths: Vec<f64> = (ANNULUS_DEPTHS.0..=ANNULUS_DEPTHS.1)
                .map(|k| (-(k as f64) / 4.0).exp2())
                .collect();
            let sups: Vec<f64> = window_radii
                .iter()
                .zip(&half_widths)
                .map(|(&r, &w)| {
                    (0..WINDOW_POINTS)
                        .map(|j| {
                            let t = -w + 2.0 * w * j as f64 / (WINDOW_POINTS - 1) as f64;
                            q(zeta * Complex64::from_polar(r, t))
                        })
                        .fold(0.0, f64::max)
                })
                .collect();
            WindowReport {
                target: zeta,
                radii: window_radii.clone(),
                half_widths,
                verdict: thresholds.classify(&sups),
                sups,
            }
        })
        .collect();
    let annulus_verdict = (!radii.is_empty()).then(|| thresholds.classify(&sups));
    let verdict = combine(
        annulus_verdict
            .into_iter()
            .chain(paths.iter().map(|p| p.verdict))
            .chain(windows.iter().map(|w| w.verdict)),
    );
    CriterionReport {
        quantity: quantity.to_string(),
        annuli: radii.to_vec(),
        sups,
        paths,
        windows,
        verdict,
        params,
        thresholds,
    }
}

fn certify(w: &RadialWeight) -> Result<DoublingCertificate, CriteriaError> {
    let cert = w.doubling_check(&default_grid())?;
    if !cert.in_d() {
        return Err(CriteriaError::NotInD {
            weight: w.label().to_string(),
            in_dhat: cert.in_dhat,
            in_dcheck: cert.in_dcheck,
        });
    }
    Ok(cert)
}

/// `max_i |Σ_{j ∈ J_ζ(i)} λ_j|^p / d_{φ_i}(ζ)^{β+1}` over symbols with `ζ ∈ F(φ_i)`, where
/// `J_ζ(i)` collects the symbols sharing first-order data with `φ_i` at `ζ`.
pub fn theorem8_bound(terms: &[(Complex64, SelfMap)], zeta: Complex64, beta: f64, p: f64) -> Result<f64, CriteriaError> {
    if terms.is_empty() {
        return Err(CriteriaError::EmptyTerms);
    }
    let derivs: Vec<AngularDerivative> = terms
        .iter()
        .map(|(_, phi)| angular_derivative(phi, zeta))
        .collect::<Result<_, _>>()?;
    let stuck: Vec<String> = terms
        .iter()
        .zip(&derivs)
        .filter(|(_, d)| matches!(d, AngularDerivative::Inconclusive { .. }))
        .map(|((_, phi), _)| phi.spec())
        .collect();
    if !stuck.is_empty() {
        return Err(CriteriaError::InconclusiveDerivative { zeta, symbols: stuck });
    }
    let mut best: f64 = 0.0;
    for di in derivs.iter().filter_map(AngularDerivative::finite) {
        let sum: Complex64 = terms
            .iter()
            .zip(&derivs)
            .filter_map(|((l, _), d)| d.finite().filter(|dj| dj.matches(di)).map(|_| *l))
            .sum();
        best = best.max(sum.norm().powf(p) / di.derivative_modulus.powf(beta + 1.0));
    }
    Ok(best)
}

/// Symbols sharing first-order data at one boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataClass {
    pub boundary_point: Complex64,
    pub image: Complex64,
    pub derivative_modulus: f64,
    pub members: Vec<usize>,
    pub lambda_sum: Complex64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub resolution: usize,
    pub classes: Vec<DataClass>,
    pub passed: bool,
    /// Present for combinations `C_φ - Σ C_{φ_j}`: pairwise disjointness of the `F(φ_j)`.
    pub disjoint: Option<bool>,
    /// Present for combinations `C_φ - Σ C_{φ_j}`: `F(φ) = ∪ F(φ_j)` on the grid.
    pub covered: Option<bool>,
    pub unresolved: Vec<(usize, Complex64)>,
}

fn same_point(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= SAME_POINT_TOL
}

fn disjoint_sets(scans: &[ContactScan]) -> bool {
    scans.iter().enumerate().all(|(i, a)| {
        scans[i + 1..]
            .iter()
            .all(|b| a.hits.iter().all(|h| !b.contains(h.boundary_point, SAME_POINT_TOL)))
    })
}

fn covers(whole: &ContactScan, parts: &[ContactScan]) -> bool {
    let forward = whole
        .hits
        .iter()
        .all(|h| parts.iter().any(|p| p.contains(h.boundary_point, SAME_POINT_TOL)));
    let backward = parts
        .iter()
        .all(|p| p.hits.iter().all(|h| whole.contains(h.boundary_point, SAME_POINT_TOL)));
    forward && backward
}

fn scans(terms: &[(Complex64, SelfMap)], resolution: usize) -> Result<Vec<ContactScan>, CriteriaError> {
    Ok(terms
        .par_iter()
        .map(|(_, phi)| contact_scan(phi, resolution))
        .collect::<Result<_, _>>()?)
}

/// Cancellation of `Σλ` within every first-order data class on the contact grid.
pub fn necessary_conditions(terms: &[(Complex64, SelfMap)], resolution: usize) -> Result<NecessaryReport, CriteriaError> {
    if terms.is_empty() {
        return Err(CriteriaError::EmptyTerms);
    }
    let scans = scans(terms, resolution)?;
    Ok(necessary_from_scans(terms, &scans, resolution))
}

fn necessary_from_scans(terms: &[(Complex64, SelfMap)], scans: &[ContactScan], resolution: usize) -> NecessaryReport {
    let mut classes: Vec<DataClass> = Vec::new();
    for (i, scan) in scans.iter().enumerate() {
        for h in &scan.hits {
            let found = classes.iter_mut().find(|c| {
                same_point(c.boundary_point, h.boundary_point)
                    && (c.image - h.image).norm() <= crate::symbols::DATA_ETA_TOL
                    && (c.derivative_modulus - h.derivative_modulus).abs()
                        <= crate::symbols::DATA_REL_D_TOL * c.derivative_modulus.max(h.derivative_modulus)
            });
            match found {
                Some(c) => {
                    c.members.push(i);
                    c.lambda_sum += terms[i].0;
                }
                None => classes.push(DataClass {
                    boundary_point: h.boundary_point,
                    image: h.image,
                    derivative_modulus: h.derivative_modulus,
                    members: vec![i],
                    lambda_sum: terms[i].0,
                    passed: false,
                }),
            }
        }
    }
    for c in &mut classes {
        c.passed = c.lambda_sum.norm() <= SUM_TOL;
    }
    let one = Complex64::new(1.0, 0.0);
    let difference_shape = terms.len() >= 2
        && (terms[0].0 - one).norm() <= UNIT_LAMBDA_TOL
        && terms[1..].iter().all(|(l, _)| (l + one).norm() <= UNIT_LAMBDA_TOL);
    let (disjoint, covered) = if difference_shape {
        (Some(disjoint_sets(&scans[1..])), Some(covers(&scans[0], &scans[1..])))
    } else {
        (None, None)
    };
    let passed = classes.iter().all(|c| c.passed) && disjoint != Some(false) && covered != Some(false);
    NecessaryReport {
        resolution,
        classes,
        passed,
        disjoint,
        covered,
        unresolved: scans
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.unresolved.iter().map(move |z| (i, *z)))
            .collect(),
    }
}

/// Numerical stand-in for compactness of a single `C_φ`: an empty contact set and
/// a tail-projection proxy that decays by at least [`PROXY_DECAY`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualProxy {
    pub symbol: String,
    pub contact_points: usize,
    pub proxy_ranks: (usize, usize),
    pub proxy: (f64, f64),
    pub decay: f64,
    pub status: Status,
}

pub fn individual_proxy(phi: &SelfMap, w: &RadialWeight, scan: &ContactScan) -> Result<IndividualProxy, CriteriaError> {
    let t = composition_matrix(phi, w, PROXY_DIM)?;
    let v = t.essnorm_proxy(&[PROXY_RANKS.0, PROXY_RANKS.1])?;
    let decay = if v[1] == 0.0 { f64::INFINITY } else { v[0] / v[1] };
    let status = if !scan.is_empty() {
        Status::Fails
    } else if decay >= PROXY_DECAY {
        Status::Holds
    } else {
        Status::Undetermined
    };
    Ok(IndividualProxy {
        symbol: phi.spec(),
        contact_points: scan.hits.len(),
        proxy_ranks: PROXY_RANKS,
        proxy: (v[0], v[1]),
        decay,
        status,
    })
}

/// Condition (ii) for a pair: `λ1 + λ2 = 0` and a vanishing boundary scan of the
/// two-map quantity. Contains nothing that depends on `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCondition {
    pub lambda_sum: Complex64,
    pub scan: CriterionReport,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub verdict: Verdict,
    pub symbols: [String; 2],
    pub lambdas: [Complex64; 2],
    pub weight: String,
    pub p: f64,
    pub certificate: DoublingCertificate,
    pub individual: [IndividualProxy; 2],
    pub condition_i: Status,
    pub condition_ii: PairCondition,
    pub necessary: NecessaryReport,
}

fn contact_points(scans: &[ContactScan]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = Vec::new();
    for s in scans {
        for h in &s.hits {
            if !pts.iter().any(|p| same_point(*p, h.boundary_point)) {
                pts.push(h.boundary_point);
            }
        }
    }
    pts
}

/// Two-symbol verdict for `λ1 C_φ + λ2 C_ψ`.
pub fn theorem12_verdict(
    phi: &SelfMap,
    psi: &SelfMap,
    lambda1: Complex64,
    lambda2: Complex64,
    w: &RadialWeight,
    p: f64,
) -> Result<PairReport, CriteriaError> {
    let certificate = certify(w)?;
    let terms = [(lambda1, phi.clone()), (lambda2, psi.clone())];
    let scans = scans(&terms, CONTACT_RESOLUTION)?;
    let necessary = necessary_from_scans(&terms, &scans, CONTACT_RESOLUTION);
    let individual = [individual_proxy(phi, w, &scans[0])?, individual_proxy(psi, w, &scans[1])?];
    let condition_i = match (individual[0].status, individual[1].status) {
        (Status::Holds, Status::Holds) => Status::Holds,
        (Status::Fails, _) | (_, Status::Fails) => Status::Fails,
        _ => Status::Undetermined,
    };
    let condition_ii = pair_condition(phi, psi, lambda1, lambda2, &scans)?;
    let verdict = if condition_i == Status::Holds || condition_ii.status == Status::Holds {
        Verdict::Compact
    } else if !necessary.passed || (condition_i == Status::Fails && condition_ii.status == Status::Fails) {
        Verdict::NotCompact
    } else {
        Verdict::Inconclusive
    };
    Ok(PairReport {
        verdict,
        symbols: [phi.spec(), psi.spec()],
        lambdas: [lambda1, lambda2],
        weight: w.label().to_string(),
        p,
        certificate,
        individual,
        condition_i,
        condition_ii,
        necessary,
    })
}

fn pair_condition(
    phi: &SelfMap,
    psi: &SelfMap,
    lambda1: Complex64,
    lambda2: Complex64,
    scans: &[ContactScan],
) -> Result<PairCondition, CriteriaError> {
    let lambda_sum = lambda1 + lambda2;
    let paths = policy_paths(&contact_points(scans))?;
    let scan = boundary_limsup(
        "moorhouse",
        |z| moorhouse_quantity(phi, psi, z),
        &policy_radii(),
        ANNULUS_ANGLES,
        &paths,
        &[],
        Params {
            symbols: vec![phi.spec(), psi.spec()],
            lambdas: vec![lambda1, lambda2],
            weight: None,
        },
    );
    let status = if lambda_sum.norm() > UNIT_LAMBDA_TOL || scan.verdict == Limit::BoundedAway {
        Status::Fails
    } else if scan.verdict == Limit::Vanishing {
        Status::Holds
    } else {
        Status::Undetermined
    };
    Ok(PairCondition {
        lambda_sum,
        scan,
        status,
    })
}

/// Local condition at the contact points of one `φ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCondition {
    pub symbol: String,
    pub scan: CriterionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationReport {
    pub verdict: Verdict,
    pub symbol: String,
    pub terms: Vec<(Complex64, String)>,
    pub weight: String,
    pub certificate: DoublingCertificate,
    /// The characterization assumes no operator in the combination is compact.
    pub individual: Vec<IndividualProxy>,
    pub hypothesis: Status,
    pub unit_lambdas: Status,
    pub disjoint: bool,
    pub covered: bool,
    pub partition: Status,
    pub local: Vec<LocalCondition>,
    pub local_status: Status,
}

/// Verdict for `C_φ - Σ λ_j C_{φ_j}`.
pub fn theorem15_verdict(phi: &SelfMap, terms: &[(Complex64, SelfMap)], w: &RadialWeight) -> Result<CombinationReport, CriteriaError> {
    if terms.is_empty() {
        return Err(CriteriaError::EmptyTerms);
    }
    let certificate = certify(w)?;
    let mut all = vec![(Complex64::new(1.0, 0.0), phi.clone())];
    all.extend(terms.iter().cloned());
    let scans = scans(&all, CONTACT_RESOLUTION)?;
    let individual: Vec<IndividualProxy> = all
        .iter()
        .zip(&scans)
        .map(|((_, f), s)| individual_proxy(f, w, s))
        .collect::<Result<_, _>>()?;
    let hypothesis = if individual.iter().all(|i| i.status == Status::Fails) {
        Status::Holds
    } else if individual.iter().any(|i| i.status == Status::Holds) {
        Status::Fails
    } else {
        Status::Undetermined
    };
    let one = Complex64::new(1.0, 0.0);
    let unit_lambdas = if terms.iter().all(|(l, _)| (l - one).norm() <= UNIT_LAMBDA_TOL) {
        Status::Holds
    } else {
        Status::Fails
    };
    let disjoint = disjoint_sets(&scans[1..]);
    let covered = covers(&scans[0], &scans[1..]);
    let partition = if disjoint && covered { Status::Holds } else { Status::Fails };
    let local: Vec<LocalCondition> = terms
        .iter()
        .zip(&scans[1..])
        .map(|((l, f), s)| {
            let points: Vec<Complex64> = s.hits.iter().map(|h| h.boundary_point).collect();
            let paths = policy_paths(&points)?;
            Ok(LocalCondition {
                symbol: f.spec(),
                scan: boundary_limsup(
                    "moorhouse",
                    |z| moorhouse_quantity(phi, f, z),
                    &[],
                    0,
                    &paths,
                    &points,
                    Params {
                        symbols: vec![phi.spec(), f.spec()],
                        lambdas: vec![one, *l],
                        weight: None,
                    },
                ),
            })
        })
        .collect::<Result<_, CriteriaError>>()?;
    let local_verdicts: Vec<Limit> = local
        .iter()
        .filter(|c| !c.scan.paths.is_empty() || !c.scan.windows.is_empty())
        .map(|c| c.scan.verdict)
        .collect();
    let local_status = if local_verdicts.contains(&Limit::BoundedAway) {
        Status::Fails
    } else if local_verdicts.iter().all(|&v| v == Limit::Vanishing) {
        Status::Holds
    } else {
        Status::Undetermined
    };
    let conditions = [unit_lambdas, partition, local_status];
    let verdict = if hypothesis != Status::Holds {
        Verdict::Inconclusive
    } else if conditions.iter().all(|&s| s == Status::Holds) {
        Verdict::Compact
    } else if conditions.contains(&Status::Fails) {
        Verdict::NotCompact
    } else {
        Verdict::Inconclusive
    };
    Ok(CombinationReport {
        verdict,
        symbol: phi.spec(),
        terms: terms.iter().map(|(l, f)| (*l, f.spec())).collect(),
        weight: w.label().to_string(),
        certificate,
        individual,
        hypothesis,
        unit_lambdas,
        disjoint,
        covered,
        partition,
        local,
        local_status,
    })
}

/// Log-log regression of `box_mass(z) / box_mass(φ(z))` against `Q = (1-|z|)/(1-|φ(z)|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichFit {
    pub samples: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `[min(α, β) + 1 - 0.1, max(α, β) + 1 + 0.1]` from the certificate.
    pub interval: (f64, f64),
    pub passed: bool,
}

pub const SANDWICH_SLACK: f64 = 0.1;
pub const SANDWICH_GAP_MIN: f64 = 1e-8;

pub fn box_sandwich(
    w: &RadialWeight,
    cert: &DoublingCertificate,
    phi: &SelfMap,
    samples: usize,
    seed: u64,
) -> Result<SandwichFit, CriteriaError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Complex64> = (0..samples).map(|_| boundary_biased_point(&mut rng, SANDWICH_GAP_MIN)).collect();
    let pairs: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&z| {
            let fz = phi.eval(z);
            let q = (1.0 - z.norm()) / (1.0 - fz.norm());
            Ok((q.ln(), (w.box_mass(z)? / w.box_mass(fz)?).ln()))
        })
        .collect::<Result<_, WeightError>>()?;
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pairs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let interval = (
        cert.alpha.min(cert.beta) + 1.0 - SANDWICH_SLACK,
        cert.alpha.max(cert.beta) + 1.0 + SANDWICH_SLACK,
    );
    Ok(SandwichFit {
        samples,
        slope,
        intercept: my - slope * mx,
        interval,
        passed: slope >= interval.0 && slope <= interval.1,
    })
}

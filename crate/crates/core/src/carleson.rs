//! Pullback measures `ν∘φ⁻¹` with `dν = u ω dA`, their pseudo-disk box ratios and
//! the vanishing scan.
//!
//! The preimage `φ⁻¹(Δ(a, r))` is resolved on polar cells laid out in dyadic gap
//! layers. A cell whose hyperbolic hull, pushed forward by Schwarz-Pick, misses
//! `Δ(a, r)` is dropped; one that lands inside contributes its exact mass; the
//! rest are split and finally sampled. Gaps below the deepest layer are sampled
//! layer by layer.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{one_minus_rho_sq, rho, GeometryError, PseudoDisk};
use crate::policy::{Limit, Thresholds};
use crate::symbols::SelfMap;
use crate::weights::{RadialWeight, WeightError};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_RADIUS: f64 = 0.5;
pub const SENSITIVITY_RADII: [f64; 2] = [0.3, 0.7];
pub const DEFAULT_ANGULAR: usize = 32;
/// Undecided cells are split until their hyperbolic radius drops to this value.
pub const LEAF_RHO: f64 = 0.05;
pub const MIN_LEAF_SAMPLES: usize = 16;
pub const ROOT_SECTORS: usize = 8;
/// Deepest adaptive layer; layer `k` covers gaps `[2^-(k+1), 2^-k]`.
pub const MAX_LAYER: u32 = 48;
/// Adaptive layers stop once the remaining rim carries at most this fraction of the box mass.
pub const RIM_FRACTION: f64 = 1e-4;
pub const RIM_LAYERS: u32 = 40;
pub const RIM_SAMPLES_PER_LAYER: usize = 256;
/// Boundary points used to bound `|φ'|` on the closed disk.
pub const LIPSCHITZ_GRID: usize = 65_536;
pub const LIPSCHITZ_SAFETY: f64 = 1.05;
const MAX_SPLIT_DEPTH: u32 = 60;
const DECISION_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CarlesonError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("radii must increase strictly inside (0, 1): {0:?}")]
    BadRadii(Vec<f64>),
    #[error("angular count must be positive")]
    NoAngles,
}

/// A bounded nonnegative function `u` on the disk.
#[derive(Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Multiplier {
    One,
    /// `1[ρ(φ(z), ψ(z)) ≥ threshold]`. `slope` bounds the Euclidean gradient of
    /// `|φ - ψ|² - threshold² |1 - conj(φ) ψ|²` on the disk, when both maps have a boundary Lipschitz bound.
    Separation {
        phi: SelfMap,
        psi: SelfMap,
        threshold: f64,
        slope: Option<f64>,
    },
    Custom {
        name: String,
        bound: f64,
        f: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl Multiplier {
    pub fn separation(phi: &SelfMap, psi: &SelfMap, threshold: f64) -> Self {
        let slope = boundary_lipschitz(phi)
            .zip(boundary_lipschitz(psi))
            .map(|(a, b)| 4.0 * (a + b) * (1.0 + threshold * threshold));
        Multiplier::Separation {
            phi: phi.clone(),
            psi: psi.clone(),
            threshold,
            slope,
        }
    }

    pub fn custom(name: impl Into<String>, bound: f64, f: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        Multiplier::Custom {
            name: name.into(),
            bound,
            f: Arc::new(f),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Multiplier::One => "1".into(),
            Multiplier::Separation { phi, psi, threshold, .. } => format!("1[rho({phi},{psi}) >= {threshold}]"),
            Multiplier::Custom { name, .. } => name.clone(),
        }
    }

    pub fn bound(&self) -> f64 {
        match self {
            Multiplier::One | Multiplier::Separation { .. } => 1.0,
            Multiplier::Custom { bound, .. } => *bound,
        }
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        match self {
            Multiplier::One => 1.0,
            Multiplier::Separation { phi, psi, threshold, .. } => {
                if rho(phi.eval(z), psi.eval(z)) >= *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Multiplier::Custom { f, .. } => f(z),
        }
    }

    /// The constant value of `u` on a cell around `z` of hyperbolic radius `beta_h`
    /// and Euclidean radius `chord`, if certain.
    fn on_cell(&self, z: Complex64, beta_h: f64, chord: f64) -> Option<f64> {
        match self {
            Multiplier::One => Some(1.0),
            Multiplier::Separation {
                phi,
                psi,
                threshold,
                slope,
            } => {
                let (w, v) = (phi.eval(z), psi.eval(z));
                let d = beta_from_s(one_minus_rho_sq(w, v));
                let t = beta_from_rho(*threshold);
                if d - 2.0 * beta_h >= t + DECISION_SLACK {
                    return Some(1.0);
                }
                if d + 2.0 * beta_h < t - DECISION_SLACK {
                    return Some(0.0);
                }
                let reach = slope.map_or(f64::INFINITY, |g| g * chord) + DECISION_SLACK;
                let gap = (w - v).norm_sqr() - threshold * threshold * (1.0 - w.conj() * v).norm_sqr();
                if gap >= reach {
                    Some(1.0)
                } else if gap <= -reach {
                    Some(0.0)
                } else {
                    None
                }
            }
            Multiplier::Custom { .. } => None,
        }
    }
}

/// Hyperbolic distance `artanh ρ` from `s = 1 - ρ²`.
fn beta_from_s(s: f64) -> f64 {
    if !(s > 0.0) {
        return f64::INFINITY;
    }
    let s = s.min(1.0);
    let rho = (1.0 - s).sqrt();
    0.5 * ((1.0 + rho) * (1.0 + rho) / s).ln()
}

fn beta_from_rho(rho: f64) -> f64 {
    0.5 * ((1.0 + rho) / (1.0 - rho)).ln()
}

/// `max |φ'|` over the unit circle, inflated by [`LIPSCHITZ_SAFETY`]. By the maximum
/// principle this bounds `|φ'|` on the disk whenever `φ` is analytic across the circle.
pub fn boundary_lipschitz(phi: &SelfMap) -> Option<f64> {
    let max = (0..LIPSCHITZ_GRID)
        .into_par_iter()
        .map(|j| {
            phi.derivative(Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / LIPSCHITZ_GRID as f64))
                .norm()
        })
        .reduce(|| 0.0, f64::max);
    (max.is_finite()).then_some(LIPSCHITZ_SAFETY * max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    MonteCarlo,
    TensorQuadrature,
}

#[derive(Debug, Clone)]
pub struct PullbackSampler {
    symbol: SelfMap,
    weight: RadialWeight,
    lipschitz: Option<f64>,
    pub multiplier: Multiplier,
    pub sample_count: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub thresholds: Thresholds,
}

/// `ν∘φ⁻¹(Δ(a, r)) / box_mass(a)` with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxEstimate {
    pub ratio: f64,
    pub stderr: f64,
    /// Mass below the sampled rim, relative to the box; not included in `ratio`.
    pub truncation: f64,
    pub flagged: bool,
    pub leaves: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    u_lo: f64,
    u_hi: f64,
    th0: f64,
    th1: f64,
    depth: u32,
}

impl Cell {
    fn center(&self) -> (f64, Complex64) {
        let u = 0.5 * (self.u_lo + self.u_hi);
        (u, Complex64::from_polar(1.0 - u, 0.5 * (self.th0 + self.th1)))
    }

    /// Upper bounds on `artanh ρ(z, z_c)`, on `ρ(z, z_c)` and on `|z - z_c|` over the cell.
    fn hull(&self, u_c: f64) -> (f64, f64, f64) {
        let (lo, hi) = (self.u_lo, self.u_hi);
        let half_angle = 0.5 * (self.th1 - self.th0);
        // ρ ≤ |z - z_c| / (1 - |z||z_c|)
        let chord = 0.5 * (hi - lo) + (1.0 - lo) * half_angle;
        let near = chord / (u_c + lo - u_c * lo);
        // 1 - ρ² ≥ (1 - |z|²)(1 - |z_c|²) / |1 - conj(z_c) z|²
        let den = u_c + hi - u_c * hi + (1.0 - u_c) * (1.0 - lo) * half_angle;
        let far = beta_from_s((lo * (2.0 - lo) * u_c * (2.0 - u_c) / (den * den)).min(1.0));
        if near < 1.0 {
            let b = beta_from_rho(near);
            if b <= far {
                return (b, near, chord);
            }
        }
        (far, far.tanh(), chord)
    }

    fn split(&self) -> [Cell; 2] {
        let d = self.depth + 1;
        let (u_c, _) = self.center();
        if (1.0 - u_c) * (self.th1 - self.th0) > self.u_hi - self.u_lo {
            let m = 0.5 * (self.th0 + self.th1);
            [Cell { th1: m, depth: d, ..*self }, Cell { th0: m, depth: d, ..*self }]
        } else {
            let m = 0.5 * (self.u_lo + self.u_hi);
            [Cell { u_hi: m, depth: d, ..*self }, Cell { u_lo: m, depth: d, ..*self }]
        }
    }
}

#[derive(Default)]
struct Harvest {
    inside: Vec<(Cell, f64)>,
    partial: Vec<Cell>,
}

struct Target<'a> {
    phi: &'a SelfMap,
    mult: &'a Multiplier,
    anchor: Complex64,
    beta_r: f64,
    disk: PseudoDisk,
    lipschitz: Option<f64>,
}

impl Target<'_> {
    fn hit(&self, z: Complex64) -> f64 {
        if self.disk.contains(self.phi.eval(z)) {
            self.mult.eval(z)
        } else {
            0.0
        }
    }

    fn resolve(&self, cell: Cell, out: &mut Harvest) {
        let (u_c, z) = cell.center();
        let (beta_h, rho_h, chord) = cell.hull(u_c);
        let w = self.phi.eval(z);
        let beta_d = beta_from_s(one_minus_rho_sq(w, self.anchor));
        let reach = self.lipschitz.map_or(f64::INFINITY, |l| l * chord);
        let offset = (w - self.disk.euclid_center).norm();
        if beta_d >= self.beta_r + beta_h + DECISION_SLACK
            || offset >= self.disk.euclid_radius + reach + DECISION_SLACK
        {
            return;
        }
        let leaf = rho_h <= LEAF_RHO || cell.depth >= MAX_SPLIT_DEPTH;
        if beta_d + beta_h < self.beta_r - DECISION_SLACK || offset + reach < self.disk.euclid_radius - DECISION_SLACK {
            match self.mult.on_cell(z, beta_h, chord) {
                Some(0.0) => return,
                Some(v) => {
                    out.inside.push((cell, v));
                    return;
                }
                None => {}
            }
        } else if let Some(0.0) = self.mult.on_cell(z, beta_h, chord) {
            return;
        }
        if leaf {
            out.partial.push(cell);
        } else {
            for c in cell.split() {
                self.resolve(c, out);
            }
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn box_seed(seed: u64, a: Complex64, r: f64) -> u64 {
    [a.re.to_bits(), a.im.to_bits(), r.to_bits()]
        .iter()
        .fold(splitmix(seed), |h, b| splitmix(h ^ b))
}

/// Mean and variance of the mean of `f` at `n` uniform points of the cell.
fn sample_cell(cell: &Cell, n: usize, strategy: Strategy, rng: &mut ChaCha8Rng, f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    match strategy {
        Strategy::MonteCarlo => {
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let u = rng.gen_range(cell.u_lo..cell.u_hi);
                let th = rng.gen_range(cell.th0..cell.th1);
                let v = f(u, th);
                s1 += v;
                s2 += v * v;
            }
            let mean = s1 / n as f64;
            let var = if n > 1 {
                ((s2 / n as f64 - mean * mean).max(0.0)) * n as f64 / (n as f64 - 1.0)
            } else {
                0.0
            };
            (mean, var / n as f64)
        }
        Strategy::TensorQuadrature => {
            let grid = |g: usize| {
                let mut acc = 0.0;
                for i in 0..g {
                    let u = cell.u_lo + (i as f64 + 0.5) / g as f64 * (cell.u_hi - cell.u_lo);
                    for j in 0..g {
                        let th = cell.th0 + (j as f64 + 0.5) / g as f64 * (cell.th1 - cell.th0);
                        acc += f(u, th);
                    }
                }
                acc / (g * g) as f64
            };
            let g = ((n as f64).sqrt().ceil() as usize).max(2);
            let fine = grid(g);
            let coarse = grid(g / 2);
            (fine, (fine - coarse).powi(2))
        }
    }
}

impl PullbackSampler {
    pub fn new(symbol: SelfMap, weight: RadialWeight) -> Self {
        Self {
            lipschitz: boundary_lipschitz(&symbol),
            symbol,
            weight,
            multiplier: Multiplier::One,
            sample_count: DEFAULT_SAMPLES,
            strategy: Strategy::MonteCarlo,
            seed: 0,
            thresholds: Thresholds::default(),
        }
    }

    pub fn symbol(&self) -> &SelfMap {
        &self.symbol
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    pub fn with_multiplier(mut self, m: Multiplier) -> Self {
        self.multiplier = m;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.sample_count = n;
        self
    }

    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn cell_mass(&self, cell: &Cell) -> Result<f64, WeightError> {
        Ok(self.weight.annulus_mass_gap(cell.u_hi, cell.u_lo)? * (cell.th1 - cell.th0) / std::f64::consts::TAU)
    }

    /// Integrand for `u` and `θ` uniform on a cell: `2(1-u) ω(1-u) |cell|/(2π) · 1[φ(z) ∈ Δ] u(z)`.
    fn density_factor(&self, cell: &Cell, u: f64) -> f64 {
        2.0 * (1.0 - u) * self.weight.density_gap(u) * (cell.u_hi - cell.u_lo) * (cell.th1 - cell.th0)
            / std::f64::consts::TAU
    }

    pub fn pullback_box_ratio(&self, a: Complex64, r: f64) -> Result<BoxEstimate, CarlesonError> {
        let disk = PseudoDisk::new(a, r)?;
        let box_mass = self.weight.box_mass(a)?;
        let empty = BoxEstimate {
            ratio: 0.0,
            stderr: 0.0,
            truncation: 0.0,
            flagged: false,
            leaves: 0,
            samples: 0,
        };
        let inner_modulus = disk.euclid_center.norm() - disk.euclid_radius;
        let validation = self.symbol.validation();
        let sup_phi = validation.max_boundary_modulus.max(validation.max_interior_modulus);
        if inner_modulus > sup_phi + 1e-12 {
            return Ok(empty);
        }
        // Schwarz: 1 - |z| ≤ c (1 - |φ(z)|).
        let u_max = if inner_modulus > 0.0 {
            (self.symbol.schwarz_constant() * (1.0 - inner_modulus)).min(1.0)
        } else {
            1.0
        };
        let mut last_layer = 0;
        while last_layer < MAX_LAYER
            && self.weight.annulus_mass_gap((-(last_layer as f64 + 1.0)).exp2(), 0.0)? > RIM_FRACTION * box_mass
        {
            last_layer += 1;
        }
        let target = Target {
            phi: &self.symbol,
            mult: &self.multiplier,
            anchor: a,
            beta_r: beta_from_rho(r),
            disk,
            lipschitz: self.lipschitz,
        };
        let roots: Vec<Cell> = (0..=last_layer)
            .flat_map(|k| {
                let u_hi = (-(k as f64)).exp2().min(u_max);
                let u_lo = (-(k as f64 + 1.0)).exp2();
                let step = std::f64::consts::TAU / ROOT_SECTORS as f64;
                (0..ROOT_SECTORS).filter_map(move |j| {
                    (u_lo < u_hi).then_some(Cell {
                        u_lo,
                        u_hi,
                        th0: step * j as f64,
                        th1: step * (j + 1) as f64,
                        depth: 0,
                    })
                })
            })
            .collect();
        let harvests: Vec<Harvest> = roots
            .par_iter()
            .map(|c| {
                let mut h = Harvest::default();
                target.resolve(*c, &mut h);
                h
            })
            .collect();
        let mut inside = Vec::new();
        let mut partial = Vec::new();
        for h in harvests {
            inside.extend(h.inside);
            partial.extend(h.partial);
        }
        let inside_masses: Vec<f64> = inside
            .par_iter()
            .map(|(c, v)| self.cell_mass(c).map(|m| m * v))
            .collect::<Result<_, _>>()?;
        let inside_mass: f64 = inside_masses.iter().sum();

        let base = box_seed(self.seed, a, r);
        let per_leaf = if partial.is_empty() {
            0
        } else {
            (self.sample_count / partial.len()).max(MIN_LEAF_SAMPLES)
        };
        let leaf_stats: Vec<(f64, f64)> = partial
            .par_iter()
            .enumerate()
            .map(|(i, cell)| {
                let mut rng = ChaCha8Rng::seed_from_u64(base);
                rng.set_stream(i as u64);
                sample_cell(cell, per_leaf, self.strategy, &mut rng, |u, th| {
                    let v = target.hit(Complex64::from_polar(1.0 - u, th));
                    if v == 0.0 {
                        0.0
                    } else {
                        v * self.density_factor(cell, u)
                    }
                })
            })
            .collect();

        let rim_top = (-(last_layer as f64 + 1.0)).exp2().min(u_max);
        let rim_cells: Vec<Cell> = (0..RIM_LAYERS)
            .map(|j| Cell {
                u_lo: rim_top * (-(j as f64 + 1.0)).exp2(),
                u_hi: rim_top * (-(j as f64)).exp2(),
                th0: 0.0,
                th1: std::f64::consts::TAU,
                depth: 0,
            })
            .collect();
        let rim_stats: Vec<(f64, f64)> = rim_cells
            .par_iter()
            .enumerate()
            .map(|(j, cell)| {
                let mut rng = ChaCha8Rng::seed_from_u64(base);
                rng.set_stream(u64::MAX - j as u64);
                sample_cell(cell, RIM_SAMPLES_PER_LAYER, self.strategy, &mut rng, |u, th| {
                    let v = target.hit(Complex64::from_polar(1.0 - u, th));
                    if v == 0.0 {
                        0.0
                    } else {
                        v * self.density_factor(cell, u)
                    }
                })
            })
            .collect();
        let rim_floor = rim_top * (-(RIM_LAYERS as f64)).exp2();
        let truncation = self.weight.annulus_mass_gap(rim_floor, 0.0)? * self.multiplier.bound() / box_mass;

        let (mut est, mut var) = (inside_mass, 0.0);
        for (m, v) in leaf_stats.iter().chain(&rim_stats) {
            est += m;
            var += v;
        }
        let ratio = est / box_mass;
        let stderr = var.sqrt() / box_mass;
        let cap = self.thresholds.stderr_cap;
        Ok(BoxEstimate {
            ratio,
            stderr,
            truncation,
            flagged: stderr > cap * ratio || truncation > cap * ratio.max(self.thresholds.vanishing_level),
            leaves: partial.len(),
            samples: partial.len() * per_leaf + rim_stats.len() * RIM_SAMPLES_PER_LAYER,
        })
    }

    /// Box ratios at `angular` equally spaced anchors on each circle `|a| = radii[k]`, and their maxima.
    pub fn vanishing_scan(&self, r: f64, radii: &[f64], angular: usize) -> Result<ScanReport, CarlesonError> {
        check_radii(radii)?;
        if angular == 0 {
            return Err(CarlesonError::NoAngles);
        }
        let mut sups = Vec::with_capacity(radii.len());
        let mut stderrs = Vec::with_capacity(radii.len());
        let mut flagged = Vec::with_capacity(radii.len());
        for &rad in radii {
            let estimates: Vec<BoxEstimate> = (0..angular)
                .into_par_iter()
                .map(|j| {
                    let a = Complex64::from_polar(rad, std::f64::consts::TAU * j as f64 / angular as f64);
                    self.pullback_box_ratio(a, r)
                })
                .collect::<Result<_, _>>()?;
            let best = estimates
                .iter()
                .copied()
                .reduce(|x, y| if y.ratio > x.ratio { y } else { x })
                .expect("angular > 0");
            sups.push(best.ratio);
            stderrs.push(best.stderr);
            flagged.push(estimates.iter().any(|e| e.flagged));
        }
        let verdict = if flagged.iter().any(|&f| f) {
            Limit::Inconclusive
        } else {
            self.thresholds.classify(&sups)
        };
        Ok(ScanReport {
            quantity: "pullback_box_ratio".into(),
            symbol: self.symbol.spec(),
            weight: self.weight.label().to_string(),
            multiplier: self.multiplier.describe(),
            pseudo_radius: Some(r),
            radii: radii.to_vec(),
            angular,
            sups,
            stderrs,
            flagged,
            verdict,
            thresholds: self.thresholds,
            samples: self.sample_count,
            seed: self.seed,
            strategy: Some(self.strategy),
        })
    }
}

fn check_radii(radii: &[f64]) -> Result<(), CarlesonError> {
    let ok = !radii.is_empty()
        && radii.iter().all(|&r| (0.0..1.0).contains(&r))
        && radii.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(CarlesonError::BadRadii(radii.to_vec()))
    }
}

/// Per-annulus suprema with the verdict they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub quantity: String,
    pub symbol: String,
    pub weight: String,
    pub multiplier: String,
    pub pseudo_radius: Option<f64>,
    pub radii: Vec<f64>,
    pub angular: usize,
    pub sups: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub flagged: Vec<bool>,
    pub verdict: Limit,
    pub thresholds: Thresholds,
    pub samples: usize,
    pub seed: u64,
    pub strategy: Option<Strategy>,
}

/// Annulus suprema of `u(z)(1 - |z|)/(1 - |φ(z)|)`.
pub fn lemma5_premise(phi: &SelfMap, u: &Multiplier, radii: &[f64], angular: usize) -> Result<ScanReport, CarlesonError> {
    check_radii(radii)?;
    if angular == 0 {
        return Err(CarlesonError::NoAngles);
    }
    let sups: Vec<f64> = radii
        .par_iter()
        .map(|&rad| {
            (0..angular)
                .map(|j| {
                    let z = Complex64::from_polar(rad, std::f64::consts::TAU * j as f64 / angular as f64);
                    let v = u.eval(z);
                    if v == 0.0 {
                        return 0.0;
                    }
                    let w = phi.eval(z).norm_sqr();
                    v * (1.0 - rad) * (1.0 + w.sqrt()) / (1.0 - w)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let thresholds = Thresholds::default();
    Ok(ScanReport {
        quantity: "premise".into(),
        symbol: phi.spec(),
        weight: String::new(),
        multiplier: u.describe(),
        pseudo_radius: None,
        radii: radii.to_vec(),
        angular,
        stderrs: vec![0.0; sups.len()],
        flagged: vec![false; sups.len()],
        verdict: thresholds.classify(&sups),
        sups,
        thresholds,
        samples: 0,
        seed: 0,
        strategy: None,
    })
}

/// `1 - 2^-k` for `k` in `ks`.
pub fn dyadic_radii(ks: std::ops::RangeInclusive<u32>) -> Vec<f64> {
    ks.map(|k| 1.0 - (-(k as f64)).exp2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampler(spec: &str, alpha: f64) -> PullbackSampler {
        PullbackSampler::new(SelfMap::parse(spec).unwrap(), RadialWeight::standard(alpha).unwrap()).with_samples(100_000)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_examples() {
        let s = sampler("id", 0.0);
        let e = s.pullback_box_ratio(c(0.0), 0.5).unwrap();
        assert!((e.ratio - 0.25).abs() < 3.0 * e.stderr + 1e-12, "{e:?}");
        let e = s.pullback_box_ratio(c(0.9), 0.5).unwrap();
        let t: f64 = 0.11912225705329153;
        assert!((e.ratio - t * t / 0.01).abs() < 3.0 * e.stderr.max(1e-12) + 1e-3, "{e:?}");
        assert!(!e.flagged);
    }

    #[test]
    fn dilation_is_exactly_zero() {
        let e = sampler("dilate:0.5", 0.0).pullback_box_ratio(c(0.95), 0.5).unwrap();
        assert_eq!((e.ratio, e.stderr, e.samples), (0.0, 0.0, 0));
    }

    #[test]
    fn off_axis_and_rotation_agree() {
        let a = Complex64::from_polar(0.99, 1.0);
        let id = sampler("id", 1.0).pullback_box_ratio(a, 0.5).unwrap();
        let rot = sampler("rot:0.5", 1.0).pullback_box_ratio(a * Complex64::from_polar(1.0, 0.5), 0.5).unwrap();
        assert!((id.ratio - rot.ratio).abs() < 3.0 * (id.stderr + rot.stderr) + 1e-3);
    }

    #[test]
    fn deterministic_per_seed() {
        let s = sampler("halfmap", 0.0).with_seed(7);
        let a = Complex64::new(0.9, 0.1);
        let x = s.pullback_box_ratio(a, 0.5).unwrap();
        let y = s.pullback_box_ratio(a, 0.5).unwrap();
        assert_eq!(x.ratio.to_bits(), y.ratio.to_bits());
        let z = s.clone().with_seed(8).pullback_box_ratio(a, 0.5).unwrap();
        assert!((x.ratio - z.ratio).abs() < 4.0 * (x.stderr + z.stderr));
    }

    #[test]
    fn strategies_agree() {
        let a = Complex64::new(0.8, 0.3);
        let mc = sampler("halfmap", 1.0).pullback_box_ratio(a, 0.5).unwrap();
        let tq = sampler("halfmap", 1.0)
            .with_strategy(Strategy::TensorQuadrature)
            .pullback_box_ratio(a, 0.5)
            .unwrap();
        assert!((mc.ratio - tq.ratio).abs() < 0.01 * mc.ratio, "{mc:?} {tq:?}");
    }

    #[test]
    fn monotone_in_multiplier() {
        let phi = SelfMap::parse("halfmap").unwrap();
        let psi = SelfMap::parse("zhalfmap").unwrap();
        let a = Complex64::new(0.7, 0.2);
        let full = sampler("halfmap", 0.0).pullback_box_ratio(a, 0.5).unwrap();
        let part = sampler("halfmap", 0.0)
            .with_multiplier(Multiplier::separation(&phi, &psi, 0.1))
            .pullback_box_ratio(a, 0.5)
            .unwrap();
        assert!(part.ratio <= full.ratio + 3.0 * (part.stderr + full.stderr));
        let half = sampler("halfmap", 0.0)
            .with_multiplier(Multiplier::custom("1/2", 0.5, |_| 0.5))
            .pullback_box_ratio(a, 0.5)
            .unwrap();
        assert!((half.ratio - 0.5 * full.ratio).abs() < 3.0 * (half.stderr + full.stderr) + 1e-3);
    }

    #[test]
    fn scans() {
        let radii = dyadic_radii(4..=10);
        let dil = sampler("dilate:0.5", 0.0).vanishing_scan(0.5, &radii, 8).unwrap();
        assert_eq!(dil.verdict, Limit::Vanishing);
        assert!(dil.sups.iter().skip(1).all(|&s| s == 0.0));
        let id = sampler("id", 0.0).vanishing_scan(0.5, &radii, 8).unwrap();
        assert_eq!(id.verdict, Limit::BoundedAway, "{id:?}");
        assert!(id.sups.iter().all(|&s| (0.25..=4.0).contains(&s)));
        let rot = sampler("rot:2", 0.0).vanishing_scan(0.5, &radii, 8).unwrap();
        assert_eq!(rot.verdict, Limit::BoundedAway);
    }

    #[test]
    fn premise_examples() {
        let radii = dyadic_radii(4..=14);
        let dil = SelfMap::parse("dilate:0.5").unwrap();
        assert_eq!(lemma5_premise(&dil, &Multiplier::One, &radii, 64).unwrap().verdict, Limit::Vanishing);
        let half = SelfMap::parse("halfmap").unwrap();
        let rep = lemma5_premise(&half, &Multiplier::One, &radii, 64).unwrap();
        assert_eq!(rep.verdict, Limit::BoundedAway);
        assert!((rep.sups.last().unwrap() - 2.0).abs() < 1e-3);
        let tan = SelfMap::parse("tangentmap").unwrap();
        let chi = Multiplier::separation(&half, &tan, DEFAULT_RADIUS);
        assert_eq!(lemma5_premise(&half, &chi, &radii, 512).unwrap().verdict, Limit::Vanishing);
    }

    #[test]
    fn bad_inputs() {
        let s = sampler("id", 0.0);
        assert!(s.vanishing_scan(0.5, &[0.9, 0.5], 4).is_err());
        assert!(s.vanishing_scan(0.5, &[0.5], 0).is_err());
        assert!(s.pullback_box_ratio(c(1.0), 0.5).is_err());
    }
}

//! Radial weights on the unit disk: tail mass, Carleson-box mass, monomial
//! moments, doubling-class certificates and the power-shifted weight.
//!
//! Internally everything near the boundary is evaluated in the gap variable
//! `u = 1 - r`, so tail masses keep their relative accuracy as `r -> 1`.

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{integrate, QuadError, Tolerance};

/// Relative tolerance for tail-mass pieces.
const TAIL_REL_TOL: f64 = 1e-12;
/// Relative tolerance for moments (monomial norms feed the operator matrix).
const MOMENT_REL_TOL: f64 = 1e-13;
/// Tail table knots sit at `u_j = 2^{-j / KNOTS_PER_OCTAVE}`.
const KNOTS_PER_OCTAVE: usize = 4;
const TAIL_OCTAVES: usize = 64;
/// Dilation factors scanned for the lower doubling condition.
pub const CHECK_DILATIONS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
/// Exponent fits use `u = 1 - r` in `[2^-20, 0.1]`, in sub-windows of this many octaves.
pub const FIT_WINDOW_OCTAVES: f64 = 4.0;
pub const FIT_OUTER_GAP: f64 = 0.1;
pub const FIT_INNER_GAP: f64 = 1.0 / 1_048_576.0;
/// Largest admissible relative growth of the doubling ratio between the middle
/// and the outer part of the grid before the bound is declared non-uniform.
pub const RATIO_GROWTH_SLACK: f64 = 0.05;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("invalid weight spec '{spec}': {reason} (expected 'std:<alpha>' with alpha > -1, or 'table:<path>')")]
    InvalidSpec { spec: String, reason: String },
    #[error("cannot read weight table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid weight table: {0}")]
    InvalidTable(String),
    #[error("{context}: {source}")]
    Quadrature {
        context: String,
        #[source]
        source: QuadError,
    },
    #[error("weight {weight}: {detail}")]
    TailTable { weight: String, detail: String },
    #[error("invalid radius grid: {0}")]
    InvalidGrid(String),
    #[error("tail mass underflows before the boundary window; effective range ends at r = {effective_max_r}")]
    Underflow { effective_max_r: f64 },
    #[error("shift exponent {lambda} must satisfy 0 < lambda < alpha = {alpha}")]
    ShiftOutOfRange { lambda: f64, alpha: f64 },
}

/// Sampled density with linear interpolation, held constant outside the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    /// Knot gaps `1 - r_i`, strictly decreasing.
    gaps: Vec<f64>,
    values: Vec<f64>,
}

impl DensityTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, WeightError> {
        if points.len() < 2 {
            return Err(WeightError::InvalidTable("need at least two rows".into()));
        }
        for (i, &(r, w)) in points.iter().enumerate() {
            if !(0.0..1.0).contains(&r) {
                return Err(WeightError::InvalidTable(format!("row {i}: radius {r} outside [0,1)")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(WeightError::InvalidTable(format!("row {i}: density {w} is not a finite nonnegative number")));
            }
            if i > 0 && r <= points[i - 1].0 {
                return Err(WeightError::InvalidTable(format!("row {i}: radii must be strictly increasing")));
            }
        }
        if points.iter().all(|&(_, w)| w == 0.0) {
            return Err(WeightError::InvalidTable("density vanishes identically".into()));
        }
        let (gaps, values) = points.into_iter().map(|(r, w)| (1.0 - r, w)).unzip();
        Ok(Self { gaps, values })
    }

    /// Reads a two-column `r,w` CSV. A non-numeric first line is treated as a header.
    pub fn from_csv(path: &Path) -> Result<Self, WeightError> {
        let text = std::fs::read_to_string(path).map_err(|source| WeightError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(WeightError::InvalidTable(format!("line {}: expected two columns", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(r), Ok(w)) => points.push((r, w)),
                _ if points.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(WeightError::InvalidTable(format!(
                        "line {}: cannot parse '{line}' as two numbers",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(points)
    }

    /// Interpolates in the gap variable so knots near `r = 1` stay resolved.
    fn eval_gap(&self, u: f64) -> f64 {
        let n = self.gaps.len();
        if u >= self.gaps[0] {
            return self.values[0];
        }
        if u <= self.gaps[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.gaps.partition_point(|&g| g > u);
        let lo = hi - 1;
        let t = (self.gaps[lo] - u) / (self.gaps[lo] - self.gaps[hi]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }
}

#[derive(Debug, Clone)]
pub enum WeightKind {
    /// `(1 - r^2)^alpha`, alpha > -1.
    Standard { alpha: f64 },
    Table(DensityTable),
    /// `base(r) / (1 - r)^lambda`.
    Shifted { base: RadialWeight, lambda: f64 },
}

#[derive(Debug)]
struct TailTable {
    /// `cumulative[j] = ∫_0^{u_j} ω(1 - v) dv`.
    cumulative: Vec<f64>,
}

#[derive(Debug)]
struct Inner {
    kind: WeightKind,
    label: String,
    tail: OnceLock<Result<TailTable, String>>,
}

/// A radial weight. Cheap to clone; the tail-mass table is built once on first use
/// and shared between clones and threads.
#[derive(Debug, Clone)]
pub struct RadialWeight {
    inner: Arc<Inner>,
}

impl fmt::Display for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.inner.label)
    }
}

fn knot(j: usize) -> f64 {
    (-(j as f64) / KNOTS_PER_OCTAVE as f64).exp2()
}

impl RadialWeight {
    fn from_kind(kind: WeightKind, label: String) -> Self {
        Self {
            inner: Arc::new(Inner {
                kind,
                label,
                tail: OnceLock::new(),
            }),
        }
    }

    pub fn standard(alpha: f64) -> Result<Self, WeightError> {
        if !alpha.is_finite() || alpha <= -1.0 {
            return Err(WeightError::InvalidSpec {
                spec: format!("std:{alpha}"),
                reason: "alpha must be a finite number greater than -1".into(),
            });
        }
        Ok(Self::from_kind(WeightKind::Standard { alpha }, format!("std:{alpha}")))
    }

    pub fn from_table(table: DensityTable, label: impl Into<String>) -> Self {
        Self::from_kind(WeightKind::Table(table), label.into())
    }

    /// Parses `std:<alpha>` or `table:<path>`.
    pub fn parse(spec: &str) -> Result<Self, WeightError> {
        let spec = spec.trim();
        let bad = |reason: &str| WeightError::InvalidSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (head, rest) = spec.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        match head {
            "std" => {
                let alpha: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| bad(&format!("'{rest}' is not a number")))?;
                let w = Self::standard(alpha).map_err(|_| bad("alpha must be finite and > -1"))?;
                Ok(Self::from_kind(w.inner.kind.clone(), spec.to_string()))
            }
            "table" => {
                if rest.is_empty() {
                    return Err(bad("empty path"));
                }
                let table = DensityTable::from_csv(Path::new(rest))?;
                Ok(Self::from_table(table, spec))
            }
            other => Err(bad(&format!("unknown weight family '{other}'"))),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.inner.kind
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// `ω(r)` for `r ∈ [0, 1)`.
    pub fn density(&self, r: f64) -> f64 {
        self.density_gap(1.0 - r)
    }

    /// `ω(1 - u)`; `u ∈ (0, 1]`.
    pub fn density_gap(&self, u: f64) -> f64 {
        match &self.inner.kind {
            WeightKind::Standard { alpha } => {
                if *alpha == 0.0 {
                    1.0
                } else {
                    (u * (2.0 - u)).powf(*alpha)
                }
            }
            WeightKind::Table(t) => t.eval_gap(u),
            WeightKind::Shifted { base, lambda } => base.density_gap(u) / u.powf(*lambda),
        }
    }

    fn tail_table(&self) -> Result<&TailTable, WeightError> {
        let built = self.inner.tail.get_or_init(|| {
            let last = KNOTS_PER_OCTAVE * TAIL_OCTAVES;
            let f = |v: f64| self.density_gap(v);
            let mut cumulative = vec![0.0; last + 1];
            let innermost = integrate(f, 0.0, knot(last), Tolerance::relative(TAIL_REL_TOL))
                .map_err(|e| format!("tail mass on (0, {:e}]: {e}", knot(last)))?;
            cumulative[last] = innermost.value;
            for j in (0..last).rev() {
                let piece = integrate(f, knot(j + 1), knot(j), Tolerance::relative(TAIL_REL_TOL))
                    .map_err(|e| format!("tail mass on [{:e}, {:e}] (in 1 - r): {e}", knot(j + 1), knot(j)))?;
                cumulative[j] = cumulative[j + 1] + piece.value;
            }
            Ok(TailTable { cumulative })
        });
        built.as_ref().map_err(|detail| WeightError::TailTable {
            weight: self.label().to_string(),
            detail: detail.clone(),
        })
    }

    /// Tail mass `ω̂(r) = ∫_r^1 ω(s) ds`.
    pub fn omega_hat(&self, r: f64) -> Result<f64, WeightError> {
        if !(0.0..1.0).contains(&r) {
            return Err(WeightError::InvalidGrid(format!("radius {r} outside [0,1)")));
        }
        self.omega_hat_gap(1.0 - r)
    }

    /// Tail mass as a function of the gap `u = 1 - r`.
    pub fn omega_hat_gap(&self, u: f64) -> Result<f64, WeightError> {
        if u <= 0.0 {
            return Ok(0.0);
        }
        let u = u.min(1.0);
        let table = self.tail_table()?;
        let last = KNOTS_PER_OCTAVE * TAIL_OCTAVES;
        let pos = -(u.log2()) * KNOTS_PER_OCTAVE as f64;
        // u lies in (knot(j + 1), knot(j)]
        let mut j = pos.floor().max(0.0) as usize;
        while j > 0 && knot(j) < u {
            j -= 1;
        }
        while j < last && knot(j + 1) >= u {
            j += 1;
        }
        let f = |v: f64| self.density_gap(v);
        if j >= last {
            return integrate(f, 0.0, u, Tolerance::relative(TAIL_REL_TOL))
                .map(|q| q.value)
                .map_err(|source| WeightError::Quadrature {
                    context: format!("weight {}: tail mass on (0, {u:e}] in 1 - r", self.label()),
                    source,
                });
        }
        let lo = knot(j + 1);
        let piece = integrate(f, lo, u, Tolerance::relative(TAIL_REL_TOL)).map_err(|source| {
            WeightError::Quadrature {
                context: format!("weight {}: tail mass on [{lo:e}, {u:e}] in 1 - r", self.label()),
                source,
            }
        })?;
        Ok(table.cumulative[j + 1] + piece.value)
    }

    /// `ω̃(r) = ω̂(r) / (1 - r)`.
    pub fn omega_tilde(&self, r: f64) -> Result<f64, WeightError> {
        Ok(self.omega_hat(r)? / (1.0 - r))
    }

    /// Carleson-box mass, defined as `ω̂(|a|)(1 - |a|)`.
    pub fn box_mass(&self, a: Complex64) -> Result<f64, WeightError> {
        let u = 1.0 - a.norm();
        if u <= 0.0 {
            return Err(WeightError::InvalidGrid(format!("box anchor {a} is not inside the disk")));
        }
        Ok(self.omega_hat_gap(u)? * u)
    }

    /// Box mass for an anchor given by its gap `u = 1 - |a|`.
    pub fn box_mass_gap(&self, u: f64) -> Result<f64, WeightError> {
        Ok(self.omega_hat_gap(u)? * u)
    }

    /// `m_n = 2∫_0^1 r^{2n+1} ω(r) dr = ‖z^n‖²` in `A²_ω` with normalized area measure.
    pub fn moment(&self, n: usize) -> Result<f64, WeightError> {
        let power = 2 * n + 1;
        let f = |u: f64| 2.0 * (1.0 - u).powi(power as i32) * self.density_gap(u);
        // Split at dyadic gaps so the boundary peak and any endpoint singularity
        // each get their own panels.
        let mut total = 0.0;
        let mut hi = 1.0;
        for k in 1..=60 {
            let lo = (-(k as f64)).exp2();
            let piece = integrate(f, lo, hi, Tolerance::relative(MOMENT_REL_TOL).with_abs(1e-300))
                .map_err(|source| WeightError::Quadrature {
                    context: format!("weight {}: moment n = {n}", self.label()),
                    source,
                })?;
            total += piece.value;
            hi = lo;
        }
        let piece = integrate(f, 0.0, hi, Tolerance::relative(MOMENT_REL_TOL).with_abs(1e-300)).map_err(
            |source| WeightError::Quadrature {
                context: format!("weight {}: moment n = {n}", self.label()),
                source,
            },
        )?;
        Ok(total + piece.value)
    }

    pub fn moments(&self, count: usize) -> Result<Vec<f64>, WeightError> {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(|n| self.moment(n)).collect()
    }

    /// `2∫_{r0}^{r1} r ω(r) dr`, the normalized-area mass of the annulus, with the
    /// radii given through their gaps `u0 = 1 - r0 ≥ u1 = 1 - r1`.
    pub fn annulus_mass_gap(&self, u0: f64, u1: f64) -> Result<f64, WeightError> {
        if u1 >= u0 {
            return Ok(0.0);
        }
        match &self.inner.kind {
            WeightKind::Standard { alpha } => {
                let e = alpha + 1.0;
                let outer = |u: f64| (u * (2.0 - u)).powf(e);
                Ok((outer(u0) - outer(u1)) / e)
            }
            _ => {
                let f = |u: f64| 2.0 * (1.0 - u) * self.density_gap(u);
                integrate(f, u1, u0, Tolerance::relative(1e-10).with_abs(1e-300))
                    .map(|q| q.value)
                    .map_err(|source| WeightError::Quadrature {
                        context: format!("weight {}: annulus mass on [{u1:e}, {u0:e}] in 1 - r", self.label()),
                        source,
                    })
            }
        }
    }

    /// Total normalized mass `2∫_0^1 r ω(r) dr`.
    pub fn total_mass(&self) -> Result<f64, WeightError> {
        self.annulus_mass_gap(1.0, 0.0)
    }

    /// The weight `ω(r) / (1 - r)^λ`; requires `0 < λ < α(ω)` from a certificate of this weight.
    pub fn lambda_shift(&self, lambda: f64, cert: &DoublingCertificate) -> Result<RadialWeight, WeightError> {
        if !(lambda > 0.0 && lambda < cert.alpha) {
            return Err(WeightError::ShiftOutOfRange {
                lambda,
                alpha: cert.alpha,
            });
        }
        Ok(Self::from_kind(
            WeightKind::Shifted {
                base: self.clone(),
                lambda,
            },
            format!("shift({};{lambda})", self.label()),
        ))
    }

    /// Certifies the doubling classes on `grid` and fits the boundary exponents.
    pub fn doubling_check(&self, grid: &[f64]) -> Result<DoublingCertificate, WeightError> {
        doubling_check(self, grid)
    }
}

/// Outcome of the doubling-class scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingCertificate {
    pub in_dhat: bool,
    /// `sup ω̂(r) / ω̂((1 + r)/2)` over the grid.
    pub c_hat: f64,
    pub in_dcheck: bool,
    /// `inf ω̂(r) / ω̂(1 - (1 - r)/K)` for the reported `k`.
    pub c_check: f64,
    pub k: f64,
    /// Lower boundary exponent (decay at least this fast).
    pub alpha: f64,
    /// Upper boundary exponent (decay at most this fast).
    pub beta: f64,
    /// Smallest `C` with `ω̂(r) ≤ C ((1-r)/(1-t))^β ω̂(t)` on all grid pairs `r ≤ t`.
    pub c_upper_envelope: f64,
    /// Smallest `C` with `ω̂(t) ≤ C ((1-t)/(1-r))^α ω̂(r)` on all grid pairs `r ≤ t`.
    pub c_lower_envelope: f64,
    pub grid_resolution: usize,
    pub effective_max_r: f64,
    pub truncated: bool,
}

impl DoublingCertificate {
    pub fn in_d(&self) -> bool {
        self.in_dhat && self.in_dcheck
    }
}

/// Default certification grid: 90 uniform radii on `[0, 0.9)` then 8 points per
/// octave in `1 - r` down to `2^-20`.
pub fn default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..90).map(|i| i as f64 * 0.01).collect();
    let mut j = 0;
    loop {
        let u = FIT_OUTER_GAP * (-(j as f64) / 8.0).exp2();
        if u <= FIT_INNER_GAP {
            break;
        }
        grid.push(1.0 - u);
        j += 1;
    }
    grid.push(1.0 - FIT_INNER_GAP);
    grid
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn doubling_check(w: &RadialWeight, grid: &[f64]) -> Result<DoublingCertificate, WeightError> {
    if grid.len() < 8 {
        return Err(WeightError::InvalidGrid("need at least 8 radii".into()));
    }
    for (i, &r) in grid.iter().enumerate() {
        if !(0.0..1.0).contains(&r) {
            return Err(WeightError::InvalidGrid(format!("radius {r} outside [0,1)")));
        }
        if i > 0 && r <= grid[i - 1] {
            return Err(WeightError::InvalidGrid("radii must be strictly increasing".into()));
        }
    }
    let requested_max = *grid.last().expect("nonempty");
    if requested_max < 1.0 - FIT_INNER_GAP {
        return Err(WeightError::InvalidGrid(format!(
            "largest radius {requested_max} is below 1 - 2^-20"
        )));
    }

    struct Row {
        u: f64,
        hat: f64,
        half: f64,
        dilated: [f64; 4],
    }
    let usable = |x: f64| x.is_finite() && x > f64::MIN_POSITIVE * 1e3;
    let mut rows = Vec::with_capacity(grid.len());
    for &r in grid {
        let u = 1.0 - r;
        let hat = w.omega_hat_gap(u)?;
        let half = w.omega_hat_gap(u / 2.0)?;
        let mut dilated = [0.0; 4];
        for (slot, k) in dilated.iter_mut().zip(CHECK_DILATIONS) {
            *slot = w.omega_hat_gap(u / k)?;
        }
        if !(usable(hat) && usable(half) && dilated.iter().all(|&x| usable(x))) {
            break;
        }
        rows.push(Row { u, hat, half, dilated });
    }
    let effective_max_r = rows.last().map_or(0.0, |row| 1.0 - row.u);
    if rows.len() < 8 || rows.last().is_none_or(|row| row.u > FIT_OUTER_GAP) {
        return Err(WeightError::Underflow { effective_max_r });
    }
    let truncated = rows.len() < grid.len();

    // Outer / middle split for the uniformity checks.
    let outer_gap = (-14.0f64).exp2();
    let middle_gap = (-7.0f64).exp2();
    let window = |lo: f64, hi: f64| rows.iter().filter(move |row| row.u > lo && row.u <= hi);

    let hat_ratio = |row: &Row| row.hat / row.half;
    let c_hat = rows.iter().map(hat_ratio).fold(f64::NEG_INFINITY, f64::max);
    let outer_max = window(0.0, outer_gap).map(hat_ratio).fold(f64::NEG_INFINITY, f64::max);
    let middle_max = window(outer_gap, middle_gap).map(hat_ratio).fold(f64::NEG_INFINITY, f64::max);
    let uniform_hat = !outer_max.is_finite()
        || !middle_max.is_finite()
        || outer_max <= (1.0 + RATIO_GROWTH_SLACK) * middle_max;
    let in_dhat = c_hat.is_finite() && c_hat > 1.0 && uniform_hat;

    let mut chosen = None;
    let mut last_seen = (CHECK_DILATIONS[3], f64::NAN);
    for (idx, k) in CHECK_DILATIONS.iter().enumerate() {
        let ratio = |row: &Row| row.hat / row.dilated[idx];
        let c = rows.iter().map(ratio).fold(f64::INFINITY, f64::min);
        let outer_min = window(0.0, outer_gap).map(ratio).fold(f64::INFINITY, f64::min);
        let middle_min = window(outer_gap, middle_gap).map(ratio).fold(f64::INFINITY, f64::min);
        let uniform = !outer_min.is_finite()
            || !middle_min.is_finite()
            || outer_min - 1.0 >= 0.5 * (middle_min - 1.0);
        last_seen = (*k, c);
        if c > 1.0 && uniform {
            chosen = Some((*k, c));
            break;
        }
    }
    let in_dcheck = chosen.is_some();
    let (k, c_check) = chosen.unwrap_or(last_seen);

    // Boundary exponent fits over sliding four-octave windows.
    let logs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.u <= FIT_OUTER_GAP * (1.0 + 1e-12) && row.u >= FIT_INNER_GAP * (1.0 - 1e-12))
        .map(|row| (row.u.log2(), row.hat.ln()))
        .collect();
    let mut slopes = Vec::new();
    let top = FIT_OUTER_GAP.log2();
    let bottom = FIT_INNER_GAP.log2();
    let mut start = top;
    while start - FIT_WINDOW_OCTAVES >= bottom - 1e-9 {
        let pts: Vec<(f64, f64)> = logs
            .iter()
            .filter(|p| p.0 <= start + 1e-9 && p.0 >= start - FIT_WINDOW_OCTAVES - 1e-9)
            .map(|p| (p.0 * std::f64::consts::LN_2, p.1))
            .collect();
        if pts.len() >= 3 {
            slopes.push(least_squares_slope(&pts));
        }
        start -= 1.0;
    }
    if slopes.is_empty() {
        return Err(WeightError::InvalidGrid(
            "too few radii in the boundary window 1 - r in [2^-20, 0.1] to fit exponents".into(),
        ));
    }
    let alpha = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let beta = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut c_upper_envelope: f64 = 0.0;
    let mut c_lower_envelope: f64 = 0.0;
    for (i, ri) in rows.iter().enumerate() {
        for rj in &rows[i..] {
            let gap_ratio = rj.u / ri.u; // (1-t)/(1-r) ≤ 1
            c_upper_envelope = c_upper_envelope.max(ri.hat / rj.hat * gap_ratio.powf(beta));
            c_lower_envelope = c_lower_envelope.max(rj.hat / ri.hat * gap_ratio.powf(-alpha));
        }
    }

    Ok(DoublingCertificate {
        in_dhat,
        c_hat,
        in_dcheck,
        c_check,
        k,
        alpha,
        beta,
        c_upper_envelope,
        c_lower_envelope,
        grid_resolution: rows.len(),
        effective_max_r,
        truncated,
    })
}

/// Band `[min, max]` of `ω̂_λ(r)(1-r)^λ / ω̂(r)` over `radii`.
pub fn shift_band(base: &RadialWeight, shifted: &RadialWeight, lambda: f64, radii: &[f64]) -> Result<(f64, f64), WeightError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &r in radii {
        let u = 1.0 - r;
        let ratio = shifted.omega_hat_gap(u)? * u.powf(lambda) / base.omega_hat_gap(u)?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

//! Julia quotients, angular derivatives and contact sets.
//!
//! Quotients are evaluated in double-double: at `t = 1 - 2^-40` the gap
//! `1 - |φ(tζ)|` sits twelve digits below one.

use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::{dd_to_f64, div_dd, unit_dd, SelfMap, SymbolError};

/// Dyadic depths `k` with `t_k = 1 - 2^-k`.
pub const FIRST_DEPTH: u32 = 4;
pub const LAST_DEPTH: u32 = 40;
/// Depths whose minimum defines the angular derivative.
pub const TAIL_WINDOW: (u32, u32) = (30, 40);
pub const DIVERGENCE_LEVEL: f64 = 1e6;
pub const OSCILLATION_RATIO: f64 = 10.0;
/// First-order data match when `|η_i - η_j| ≤ DATA_ETA_TOL` and `|d_i - d_j| ≤ DATA_REL_D_TOL · max(d)`.
pub const DATA_ETA_TOL: f64 = 1e-6;
pub const DATA_REL_D_TOL: f64 = 1e-3;

fn check_unimodular(zeta: Complex64) -> Result<(), SymbolError> {
    if (zeta.norm() - 1.0).abs() > 1e-9 {
        return Err(SymbolError::NotUnimodular(zeta));
    }
    Ok(())
}

fn quotient_dd(phi: &SelfMap, zeta: Complex<TwoFloat>, t: f64) -> (f64, Complex64) {
    let td = TwoFloat::from_f64(t);
    let w = phi.eval_dd(zeta * td);
    let m2 = w.re * w.re + w.im * w.im;
    let gap = div_dd(TwoFloat::from_f64(1.0) - m2, TwoFloat::from_f64(1.0) + m2.sqrt());
    let q = dd_to_f64(gap) / (1.0 - t);
    (q, Complex64::new(dd_to_f64(w.re), dd_to_f64(w.im)))
}

/// `(1 - |φ(tζ)|) / (1 - t)`.
pub fn julia_quotient(phi: &SelfMap, zeta: Complex64, t: f64) -> Result<f64, SymbolError> {
    check_unimodular(zeta)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(SymbolError::BadRadius(t));
    }
    Ok(quotient_dd(phi, unit_dd(zeta), t).0)
}

/// The first-order data `(η, d)` at a contact point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderData {
    pub boundary_point: Complex64,
    pub image: Complex64,
    pub derivative_modulus: f64,
}

impl FirstOrderData {
    pub fn matches(&self, other: &FirstOrderData) -> bool {
        let scale = self.derivative_modulus.max(other.derivative_modulus);
        (self.image - other.image).norm() <= DATA_ETA_TOL
            && (self.derivative_modulus - other.derivative_modulus).abs() <= DATA_REL_D_TOL * scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AngularDerivative {
    Finite(FirstOrderData),
    Infinite { last_quotient: f64 },
    Inconclusive { window_min: f64, window_max: f64 },
}

impl AngularDerivative {
    pub fn finite(&self) -> Option<&FirstOrderData> {
        match self {
            AngularDerivative::Finite(d) => Some(d),
            _ => None,
        }
    }
}

/// Radial estimate of `d_φ(ζ)` from the quotients at `t_k = 1 - 2^-k`, `k = 4..=40`.
pub fn angular_derivative(phi: &SelfMap, zeta: Complex64) -> Result<AngularDerivative, SymbolError> {
    check_unimodular(zeta)?;
    let z = unit_dd(zeta);
    let mut window = Vec::new();
    let mut last_image = Complex64::new(0.0, 0.0);
    for k in FIRST_DEPTH..=LAST_DEPTH {
        let (q, w) = quotient_dd(phi, z, 1.0 - (-(k as f64)).exp2());
        if k >= TAIL_WINDOW.0 {
            window.push(q);
        }
        last_image = w;
    }
    let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = *window.last().expect("nonempty window");
    let increasing = window.windows(2).all(|p| p[1] >= p[0]) && last > window[0];
    if last > DIVERGENCE_LEVEL && increasing {
        return Ok(AngularDerivative::Infinite { last_quotient: last });
    }
    if !(lo > 0.0) || hi / lo > OSCILLATION_RATIO || !hi.is_finite() {
        return Ok(AngularDerivative::Inconclusive {
            window_min: lo,
            window_max: hi,
        });
    }
    Ok(AngularDerivative::Finite(FirstOrderData {
        boundary_point: zeta,
        image: last_image / last_image.norm(),
        derivative_modulus: lo,
    }))
}

/// Contact points found on a uniform boundary grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactScan {
    pub resolution: usize,
    pub hits: Vec<FirstOrderData>,
    /// Grid points whose tail window neither settled nor diverged.
    pub unresolved: Vec<Complex64>,
}

impl ContactScan {
    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    /// Whether some hit lies within `tol` of `zeta`.
    pub fn contains(&self, zeta: Complex64, tol: f64) -> bool {
        self.hits.iter().any(|h| (h.boundary_point - zeta).norm() <= tol)
    }
}

fn grid_point(j: f64, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * j / n as f64)
}

/// Angular derivatives on `resolution` equally spaced boundary points, plus the
/// midpoints next to every finite hit.
pub fn contact_scan(phi: &SelfMap, resolution: usize) -> Result<ContactScan, SymbolError> {
    let n = resolution.max(1);
    let coarse: Vec<(f64, AngularDerivative)> = (0..n)
        .into_par_iter()
        .map(|j| angular_derivative(phi, grid_point(j as f64, n)).map(|a| (j as f64, a)))
        .collect::<Result<_, _>>()?;
    let mut refine = Vec::new();
    for (j, a) in &coarse {
        if a.finite().is_some() {
            refine.push((j - 0.5).rem_euclid(n as f64));
            refine.push((j + 0.5).rem_euclid(n as f64));
        }
    }
    refine.sort_by(f64::total_cmp);
    refine.dedup();
    let fine: Vec<(f64, AngularDerivative)> = refine
        .into_par_iter()
        .map(|j| angular_derivative(phi, grid_point(j, n)).map(|a| (j, a)))
        .collect::<Result<_, _>>()?;
    let mut all: Vec<(f64, AngularDerivative)> = coarse.into_iter().chain(fine).collect();
    all.sort_by(|a, b| a.0.rem_euclid(n as f64).total_cmp(&b.0.rem_euclid(n as f64)));
    let mut hits = Vec::new();
    let mut unresolved = Vec::new();
    for (j, a) in all {
        match a {
            AngularDerivative::Finite(d) => hits.push(d),
            AngularDerivative::Inconclusive { .. } => unresolved.push(grid_point(j, n)),
            AngularDerivative::Infinite { .. } => {}
        }
    }
    Ok(ContactScan {
        resolution: n,
        hits,
        unresolved,
    })
}

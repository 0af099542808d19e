//! Normalized kernel-type test functions and the partial-converse gap estimate.

use std::cell::RefCell;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{mobius, rho};
use crate::quadrature::{integrate, QuadError, Tolerance};
use crate::weights::{RadialWeight, WeightError};

/// Dilation parameters scanned by [`lemma_d_scan`].
pub const GAP_SCAN_N: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Debug, Error)]
pub enum TestFnError {
    #[error("anchor {0} is not inside the disk")]
    OutsideDisk(Complex64),
    #[error("exponent p = {0} must be positive")]
    BadExponent(f64),
    #[error("dilation N = {n} needs 1 - |a| < 1/(2N), but 1 - |a| = {gap}")]
    DilationTooLarge { n: f64, gap: f64 },
    #[error("z = {z} lies outside the pseudo-hyperbolic disk of radius {r0} about {a}")]
    OutsidePseudoDisk { a: Complex64, z: Complex64, r0: f64 },
    #[error("kernel base {0} left the right half-plane")]
    Branch(Complex64),
    #[error("norm quadrature at radius gap {gap:e}: {source}; tighten the breakpoints or relax the tolerance")]
    Quadrature {
        gap: f64,
        #[source]
        source: QuadError,
    },
    #[error(transparent)]
    Weight(#[from] WeightError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Flavor {
    Plain,
    /// Denominator `1 - t_N conj(a) z` with `t_N = 1 - N(1 - |a|)`.
    Dilated { n: f64 },
}

/// `γ = max(β + 2, p + 1)`.
pub fn policy_gamma(beta: f64, p: f64) -> f64 {
    (beta + 2.0).max(p + 1.0)
}

/// `((1 - |a|^2) / (1 - t conj(a) z))^{(γ+1)/p} · box(a)^{-1/p}`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    anchor: Complex64,
    gamma: f64,
    p: f64,
    weight: RadialWeight,
    flavor: Flavor,
    box_mass: f64,
}

impl TestFunction {
    pub fn new(anchor: Complex64, gamma: f64, p: f64, weight: &RadialWeight, flavor: Flavor) -> Result<Self, TestFnError> {
        if anchor.norm() >= 1.0 {
            return Err(TestFnError::OutsideDisk(anchor));
        }
        if !(p > 0.0) {
            return Err(TestFnError::BadExponent(p));
        }
        if let Flavor::Dilated { n } = flavor {
            let gap = 1.0 - anchor.norm();
            if !(n > 0.0 && gap < 1.0 / (2.0 * n)) {
                return Err(TestFnError::DilationTooLarge { n, gap });
            }
        }
        Ok(Self {
            anchor,
            gamma,
            p,
            weight: weight.clone(),
            flavor,
            box_mass: weight.box_mass(anchor)?,
        })
    }

    pub fn plain(anchor: Complex64, gamma: f64, p: f64, weight: &RadialWeight) -> Result<Self, TestFnError> {
        Self::new(anchor, gamma, p, weight, Flavor::Plain)
    }

    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Dilation of the kernel pole: `1` for the plain flavor, `t_N` otherwise.
    pub fn pole_scale(&self) -> f64 {
        match self.flavor {
            Flavor::Plain => 1.0,
            Flavor::Dilated { n } => 1.0 - n * (1.0 - self.anchor.norm()),
        }
    }

    pub fn exponent(&self) -> f64 {
        (self.gamma + 1.0) / self.p
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, TestFnError> {
        let a = self.anchor;
        let base = (1.0 - a.norm_sqr()) / (1.0 - self.pole_scale() * a.conj() * z);
        if !(base.re > 0.0) {
            return Err(TestFnError::Branch(base));
        }
        Ok(base.powf(self.exponent()) * self.box_mass.powf(-1.0 / self.p))
    }

    /// `‖f‖_{A^p_ω}` by nested adaptive quadrature in `(1 - |z|, arg z)`.
    pub fn norm(&self) -> Result<f64, TestFnError> {
        let s = self.anchor.norm();
        let ts = self.pole_scale() * s;
        let power = self.gamma + 1.0;
        let numer = 1.0 - s * s;
        let inner_tol = Tolerance::relative(1e-11).with_abs(1e-300);
        // ∫_0^π ((1-|a|^2)/|1 - ts r e^{iθ}|)^{γ+1} dθ
        let angular = |r: f64| -> Result<f64, QuadError> {
            let x = ts * r;
            let near = (1.0 - x) * (1.0 - x);
            let f = |theta: f64| {
                let sh = (0.5 * theta).sin();
                (numer * numer / (near + 4.0 * x * sh * sh)).powf(0.5 * power)
            };
            let width = (1.0 - x).max(1e-300);
            let mut total = 0.0;
            let mut lo = 0.0;
            let mut hi = width.min(std::f64::consts::PI);
            loop {
                total += integrate(f, lo, hi, inner_tol)?.value;
                if hi >= std::f64::consts::PI {
                    break;
                }
                lo = hi;
                hi = (2.0 * hi).min(std::f64::consts::PI);
            }
            Ok(total)
        };
        let failure: RefCell<Option<QuadError>> = RefCell::new(None);
        let radial = |u: f64| -> f64 {
            match angular(1.0 - u) {
                Ok(v) => 2.0 * (1.0 - u) * self.weight.density_gap(u) * v / std::f64::consts::PI,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        // Dyadic breakpoints around the anchor's gap.
        let ua = (1.0 - ts).max(1e-300);
        let mut breaks = vec![0.0];
        let mut b = ua * (-12.0f64).exp2();
        while b < 1.0 {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(1.0);
        let outer_tol = Tolerance::relative(1e-10).with_abs(1e-300);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let piece = integrate(radial, w[0], w[1], outer_tol);
            if let Some(source) = failure.borrow_mut().take() {
                return Err(TestFnError::Quadrature { gap: w[1], source });
            }
            total += piece.map_err(|source| TestFnError::Quadrature { gap: w[1], source })?.value;
        }
        Ok((total / self.box_mass).powf(1.0 / self.p))
    }
}

/// Both sides of the partial-converse gap inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSides {
    pub lhs: f64,
    pub rhs_scale: f64,
}

impl GapSides {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs_scale
    }
}

/// `lhs = |(1-āz)^{-s} - (1-āw)^{-s}| + |(1-t_N āz)^{-s} - (1-t_N āw)^{-s}|`,
/// `rhs_scale = ρ(z, w) |1 - āz|^{-s}`.
pub fn lemma_d_gap(a: Complex64, z: Complex64, w: Complex64, s: f64, n: f64, r0: f64) -> Result<GapSides, TestFnError> {
    for p in [a, z, w] {
        if p.norm() >= 1.0 {
            return Err(TestFnError::OutsideDisk(p));
        }
    }
    let gap = 1.0 - a.norm();
    if !(n > 0.0 && gap < 1.0 / (2.0 * n)) {
        return Err(TestFnError::DilationTooLarge { n, gap });
    }
    if rho(a, z) >= r0 {
        return Err(TestFnError::OutsidePseudoDisk { a, z, r0 });
    }
    let t = 1.0 - n * gap;
    let k = |scale: f64, x: Complex64| (1.0 - scale * a.conj() * x).powf(-s);
    let lhs = (k(1.0, z) - k(1.0, w)).norm() + (k(t, z) - k(t, w)).norm();
    let rhs_scale = rho(z, w) * (1.0 - a.conj() * z).norm().powf(-s);
    Ok(GapSides { lhs, rhs_scale })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub s: f64,
    pub r0: f64,
    pub triples: usize,
    /// `(N, min lhs/rhs_scale)` for each scanned `N`.
    pub per_n: Vec<(f64, f64)>,
    pub best_n: f64,
    pub best_constant: f64,
}

/// Empirical gap constant over seeded admissible triples for each `N` in [`GAP_SCAN_N`].
pub fn lemma_d_scan(s: f64, r0: f64, triples: usize, seed: u64) -> Result<GapScan, TestFnError> {
    let mut per_n = Vec::with_capacity(GAP_SCAN_N.len());
    for (idx, &n) in GAP_SCAN_N.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9e37_79b9));
        let max_gap = 1.0 / (2.0 * n);
        let mut worst = f64::INFINITY;
        let mut used = 0;
        while used < triples {
            let gap = max_gap * (rng.gen::<f64>() * (1e-4f64).ln()).exp() * 0.999;
            let a = Complex64::from_polar(1.0 - gap, rng.gen_range(0.0..std::f64::consts::TAU));
            let local = Complex64::from_polar(r0 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
            let z = mobius(a, local);
            let w = if rng.gen_bool(0.5) {
                crate::geometry::uniform_disk_point(&mut rng)
            } else {
                // Near z, where the two sides are both small.
                let near = Complex64::from_polar(rng.gen::<f64>() * 0.5, rng.gen_range(0.0..std::f64::consts::TAU));
                mobius(z, near)
            };
            if rho(z, w) < 1e-9 || rho(a, z) >= r0 {
                continue;
            }
            let sides = lemma_d_gap(a, z, w, s, n, r0)?;
            worst = worst.min(sides.ratio());
            used += 1;
        }
        per_n.push((n, worst));
    }
    let (best_n, best_constant) = per_n
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(GapScan {
        s,
        r0,
        triples,
        per_n,
        best_n,
        best_constant,
    })
}

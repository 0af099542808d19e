//! Möbius automorphisms, the pseudo-hyperbolic metric and its disks, the
//! doubling radius chain and nontangential approach curves.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point {0} is not inside the unit disk")]
    OutsideDisk(Complex64),
    #[error("pseudo-hyperbolic radius {0} must lie in (0, 1)")]
    BadRadius(f64),
    #[error("approach target {0} is not unimodular")]
    NotUnimodular(Complex64),
    #[error("aperture {0} must exceed 1")]
    BadAperture(f64),
    #[error("approach path needs at least two samples, got {0}")]
    TooFewSamples(usize),
}

fn check_interior(z: Complex64) -> Result<(), GeometryError> {
    if z.norm_sqr() < 1.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::OutsideDisk(z))
    }
}

/// The disk automorphism `σ_z(w) = (z - w) / (1 - conj(z) w)`; an involution in `w`.
#[inline]
pub fn mobius(z: Complex64, w: Complex64) -> Complex64 {
    (z - w) / (1.0 - z.conj() * w)
}

/// Pseudo-hyperbolic distance `|σ_z(w)|`.
#[inline]
pub fn rho(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    if num == 0.0 {
        return 0.0;
    }
    (num / (1.0 - w.conj() * z).norm()).min(1.0)
}

/// `1 - ρ(z, w)^2`, evaluated without cancellation.
#[inline]
pub fn one_minus_rho_sq(z: Complex64, w: Complex64) -> f64 {
    (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()) / (1.0 - w.conj() * z).norm_sqr()
}

/// Composition rule for pseudo-hyperbolic distances: `(x + y) / (1 + xy)`.
#[inline]
pub fn rho_sum(x: f64, y: f64) -> f64 {
    (x + y) / (1.0 + x * y)
}

/// The pseudo-hyperbolic disk `Δ(a, r)` and its Euclidean description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoDisk {
    pub anchor: Complex64,
    pub radius_rho: f64,
    pub euclid_center: Complex64,
    pub euclid_radius: f64,
}

impl PseudoDisk {
    pub fn new(a: Complex64, r: f64) -> Result<Self, GeometryError> {
        check_interior(a)?;
        if !(r > 0.0 && r < 1.0) {
            return Err(GeometryError::BadRadius(r));
        }
        let a2 = a.norm_sqr();
        let denom = 1.0 - r * r * a2;
        Ok(Self {
            anchor: a,
            radius_rho: r,
            euclid_center: a * ((1.0 - r * r) / denom),
            euclid_radius: (1.0 - a2) * r / denom,
        })
    }

    pub fn contains(&self, w: Complex64) -> bool {
        rho(self.anchor, w) < self.radius_rho
    }

    pub fn contains_euclid(&self, w: Complex64) -> bool {
        (w - self.euclid_center).norm() < self.euclid_radius
    }

    /// Bounds `(lo, hi)` on `1 - |w|` for `w` in the disk.
    pub fn radial_extent(&self) -> (f64, f64) {
        let s = self.anchor.norm();
        let r = self.radius_rho;
        let denom = 1.0 - r * r * s * s;
        (
            (1.0 - s) * (1.0 - r * s) * (1.0 - r) / denom,
            (1.0 - s) * (1.0 + r * s) * (1.0 + r) / denom,
        )
    }

    /// Normalized area `t^2` of the disk.
    pub fn normalized_area(&self) -> f64 {
        self.euclid_radius * self.euclid_radius
    }
}

/// `r = 2r1/(1+r1^2)`, `δ = 2r/(1+r^2)`, `r2 = 2δ/(1+δ^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusChain {
    pub r1: f64,
    pub r: f64,
    pub delta: f64,
    pub r2: f64,
}

pub fn radius_chain(r1: f64) -> Result<RadiusChain, GeometryError> {
    if !(r1 > 0.0 && r1 < 1.0) {
        return Err(GeometryError::BadRadius(r1));
    }
    let double = |x: f64| 2.0 * x / (1.0 + x * x);
    let r = double(r1);
    let delta = double(r);
    Ok(RadiusChain {
        r1,
        r,
        delta,
        r2: double(delta),
    })
}

/// Samples of the curve `|z - ζ| = M(1 - |z|^2)` on its positive-angle side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachPath {
    pub target: Complex64,
    pub aperture: f64,
    pub samples: Vec<Complex64>,
    /// Requested depths with no solution on the curve.
    pub unsolved: usize,
}

impl ApproachPath {
    /// `|z - ζ| - M(1 - |z|^2)` for each sample.
    pub fn residuals(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|&z| (z - self.target).norm() - self.aperture * (1.0 - z.norm_sqr()))
            .collect()
    }
}

/// Point on the curve at modulus `1 - u`, or `None` when the circle `|z| = 1 - u`
/// misses it.
fn path_point(zeta: Complex64, m: f64, u: f64) -> Option<Complex64> {
    let r = 1.0 - u;
    // 1 - cos θ = u^2 (M^2 (2 - u)^2 - 1) / (2r)
    let one_minus_cos = u * u * (m * m * (2.0 - u) * (2.0 - u) - 1.0) / (2.0 * r);
    if !(0.0..=2.0).contains(&one_minus_cos) {
        return None;
    }
    let theta = 2.0 * (one_minus_cos / 2.0).sqrt().asin();
    Some(zeta * Complex64::from_polar(r, theta))
}

/// Dyadic schedule `1 - |z_k| = 2^{-k} u_1` starting from `u_1 = 1/(2M)`.
pub fn approach_path(zeta: Complex64, m: f64, n: usize) -> Result<ApproachPath, GeometryError> {
    approach_path_from(zeta, m, n, 1.0 / (2.0 * m))
}

/// As [`approach_path`] with an explicit first gap `u_1 = 1 - |z_1|`.
pub fn approach_path_from(zeta: Complex64, m: f64, n: usize, u1: f64) -> Result<ApproachPath, GeometryError> {
    if ((zeta.norm() - 1.0).abs()) > 1e-12 {
        return Err(GeometryError::NotUnimodular(zeta));
    }
    if !(m > 1.0 && m.is_finite()) {
        return Err(GeometryError::BadAperture(m));
    }
    if n < 2 {
        return Err(GeometryError::TooFewSamples(n));
    }
    let mut samples = Vec::with_capacity(n);
    let mut unsolved = 0;
    for k in 0..n {
        let u = u1 * (-(k as f64)).exp2();
        match path_point(zeta, m, u) {
            Some(z) => samples.push(z),
            None => unsolved += 1,
        }
    }
    Ok(ApproachPath {
        target: zeta,
        aperture: m,
        samples,
        unsolved,
    })
}

/// Area-uniform point in the unit disk.
pub fn uniform_disk_point<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Point with `1 - |z|` log-uniform in `[gap_min, 1]`, angle uniform.
pub fn boundary_biased_point<R: Rng + ?Sized>(rng: &mut R, gap_min: f64) -> Complex64 {
    let u = (rng.gen::<f64>() * gap_min.ln()).exp();
    Complex64::from_polar(1.0 - u, rng.gen_range(0.0..std::f64::consts::TAU))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_examples() {
        let z = c(0.3, -0.4);
        assert_eq!(mobius(z, c(0.0, 0.0)), z);
        assert_eq!(mobius(z, z), c(0.0, 0.0));
        assert!((mobius(c(0.5, 0.0), c(-0.5, 0.0)) - c(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rho_examples() {
        let w = c(0.1, 0.7);
        assert!((rho(c(0.0, 0.0), w) - w.norm()).abs() < 1e-15);
        assert!((rho(c(0.5, 0.0), c(-0.5, 0.0)) - 0.8).abs() < 1e-15);
        assert_eq!(rho(w, w), 0.0);
    }

    #[test]
    fn pseudo_disk_examples() {
        let d = PseudoDisk::new(c(0.0, 0.0), 0.3).unwrap();
        assert_eq!(d.euclid_center, c(0.0, 0.0));
        assert!((d.euclid_radius - 0.3).abs() < 1e-15);
        let d = PseudoDisk::new(c(0.5, 0.0), 0.5).unwrap();
        assert!((d.euclid_center.re - 0.4).abs() < 1e-15 && (d.euclid_radius - 0.4).abs() < 1e-15);
        let d = PseudoDisk::new(c(0.9, 0.0), 0.5).unwrap();
        assert!((d.euclid_center.re - 0.675 / 0.7975).abs() < 1e-15);
        assert!((d.euclid_center.re - 0.846_394_984_326_018_8).abs() < 1e-12);
        assert!((d.euclid_radius - 0.119_122_257_053_291_54).abs() < 1e-12);
        assert!(PseudoDisk::new(c(1.0, 0.0), 0.5).is_err());
        assert!(PseudoDisk::new(c(0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn radius_chain_examples() {
        let ch = radius_chain(0.5).unwrap();
        assert!((ch.r - 0.8).abs() < 1e-15);
        assert!((ch.delta - 1.6 / 1.64).abs() < 1e-15);
        assert!((ch.r2 - 0.999_695_214_873_514_2).abs() < 1e-12);
        assert!(ch.r1 < ch.r && ch.r < ch.delta && ch.delta < ch.r2 && ch.r2 < 1.0);
        assert!((radius_chain(1e-9).unwrap().r - 2e-9).abs() < 1e-20);
        assert!((radius_chain(0.9).unwrap().r - 1.8 / 1.81).abs() < 1e-15);
        assert!(radius_chain(0.0).is_err());
    }

    #[test]
    fn approach_path_satisfies_curve() {
        let p = approach_path(c(1.0, 0.0), 2.0, 3).unwrap();
        assert_eq!(p.samples.len(), 3);
        assert!(p.residuals().iter().all(|r| r.abs() < 1e-10));
        let deep = approach_path(c(1.0, 0.0), 3.0, 40).unwrap();
        assert!(deep.residuals().iter().all(|r| r.abs() < 1e-10));
        assert!((deep.samples.last().unwrap() - c(1.0, 0.0)).norm() < 1e-9);
        for w in deep.samples.windows(2) {
            assert!(w[1].norm() > w[0].norm());
        }
    }

    #[test]
    fn approach_path_rotates() {
        let base = approach_path(c(1.0, 0.0), 4.0, 5).unwrap();
        let rot = approach_path(c(0.0, 1.0), 4.0, 5).unwrap();
        for (a, b) in base.samples.iter().zip(&rot.samples) {
            assert!((a * c(0.0, 1.0) - b).norm() < 1e-15);
        }
    }

    #[test]
    fn approach_path_truncates_when_circle_misses() {
        // |z| = 0.005 is too far from the boundary for aperture 1.01
        let p = approach_path_from(c(1.0, 0.0), 1.01, 6, 0.995).unwrap();
        assert!(p.unsolved > 0);
        assert!(p.samples.len() + p.unsolved == 6);
        assert!(approach_path(c(0.5, 0.0), 2.0, 3).is_err());
        assert!(approach_path(c(1.0, 0.0), 1.0, 3).is_err());
    }

    fn disk_point() -> impl Strategy<Value = Complex64> {
        (0.0f64..0.999, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn involution(z in disk_point(), w in disk_point()) {
            prop_assert!((mobius(z, mobius(z, w)) - w).norm() < 1e-9);
        }

        #[test]
        fn mobius_identity(z in disk_point(), w in disk_point()) {
            let lhs = 1.0 - mobius(z, w).norm_sqr();
            prop_assert!((lhs - one_minus_rho_sq(z, w)).abs() < 1e-12);
        }

        #[test]
        fn metric_axioms(z in disk_point(), w in disk_point(), a in disk_point()) {
            prop_assert!((rho(z, w) - rho(w, z)).abs() < 1e-15);
            prop_assert!(rho(z, w) <= rho_sum(rho(z, a), rho(a, w)) + 1e-12);
            prop_assert!(rho(z, w) <= rho(z, a) + rho(a, w) + 1e-12);
        }

        #[test]
        fn pseudo_disk_membership(a in disk_point(), r in 0.05f64..0.95, w in disk_point()) {
            let d = PseudoDisk::new(a, r).unwrap();
            let margin = (rho(a, w) - r).abs();
            if margin > 1e-9 {
                prop_assert_eq!(d.contains(w), d.contains_euclid(w));
            }
            prop_assert!(d.euclid_center.norm() + d.euclid_radius <= 1.0 + 1e-12);
            if d.contains(w) {
                let (lo, hi) = d.radial_extent();
                let gap = 1.0 - w.norm();
                prop_assert!(gap >= lo * (1.0 - 1e-9) && gap <= hi * (1.0 + 1e-9));
            }
        }
    }
}

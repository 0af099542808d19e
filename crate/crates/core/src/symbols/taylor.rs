//! Taylor coefficients of `φ^n`.
//!
//! Polynomial symbols use exact truncated convolution. Everything else is
//! sampled on a circle of radius `ρ_s` and inverted with an FFT; a second
//! radius `ρ_v` must reproduce every coefficient to `tolerance`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{truncated_mul, SelfMap, SymbolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaylorMethod {
    Convolution,
    CircleSampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorConfig {
    /// `None` picks convolution whenever the symbol is a polynomial.
    pub method: Option<TaylorMethod>,
    /// Sampling radius; default `1 - 1/(K + 2)`.
    pub radius: Option<f64>,
    /// Verification radius; default `1 - 1.5/(K + 2)`.
    pub verify_radius: Option<f64>,
    /// FFT length; default `2^ceil(log2(32 (K + 2)))`.
    pub samples: Option<usize>,
    pub tolerance: f64,
}

impl Default for TaylorConfig {
    fn default() -> Self {
        Self {
            method: None,
            radius: None,
            verify_radius: None,
            samples: None,
            tolerance: 1e-10,
        }
    }
}

impl TaylorConfig {
    pub fn sampling() -> Self {
        Self {
            method: Some(TaylorMethod::CircleSampling),
            ..Self::default()
        }
    }
}

fn circle_rows(
    phi: &SelfMap,
    powers: usize,
    max_degree: usize,
    radius: f64,
    len: usize,
) -> Vec<Vec<Complex64>> {
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let values: Vec<Complex64> = (0..len)
        .map(|j| phi.eval(Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / len as f64)))
        .collect();
    let scale: Vec<f64> = (0..=max_degree).map(|k| radius.powi(-(k as i32)) / len as f64).collect();
    let mut power = vec![Complex64::new(1.0, 0.0); len];
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut rows = Vec::with_capacity(powers);
    for _ in 0..powers {
        buf.copy_from_slice(&power);
        fft.process(&mut buf);
        rows.push((0..=max_degree).map(|k| buf[k] * scale[k]).collect());
        for (p, v) in power.iter_mut().zip(&values) {
            *p *= v;
        }
    }
    rows
}

/// Rows `n = 0..powers`, each holding the coefficients of `φ^n` up to degree `max_degree`.
pub fn power_coefficients(
    phi: &SelfMap,
    powers: usize,
    max_degree: usize,
    cfg: &TaylorConfig,
) -> Result<Vec<Vec<Complex64>>, SymbolError> {
    let poly = phi.symbol().polynomial_coefficients(max_degree);
    let method = cfg.method.unwrap_or(if poly.is_some() {
        TaylorMethod::Convolution
    } else {
        TaylorMethod::CircleSampling
    });
    match (method, poly) {
        (TaylorMethod::Convolution, Some(base)) => {
            let mut rows = Vec::with_capacity(powers);
            let mut row = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..powers {
                let mut padded = row.clone();
                padded.resize(max_degree + 1, Complex64::new(0.0, 0.0));
                rows.push(padded);
                row = truncated_mul(&row, &base, max_degree);
            }
            Ok(rows)
        }
        _ => {
            let k2 = (max_degree + 2) as f64;
            let radius = cfg.radius.unwrap_or(1.0 - 1.0 / k2);
            let verify = cfg.verify_radius.unwrap_or(1.0 - 1.5 / k2);
            for r in [radius, verify] {
                if !(r > 0.0 && r < 1.0) {
                    return Err(SymbolError::BadRadius(r));
                }
            }
            let len = cfg
                .samples
                .unwrap_or_else(|| (32.0 * k2).log2().ceil().exp2() as usize)
                .max(max_degree + 1);
            let rows = circle_rows(phi, powers, max_degree, radius, len);
            let check = circle_rows(phi, powers, max_degree, verify, len);
            for (n, (a, b)) in rows.iter().zip(&check).enumerate() {
                for (k, (x, y)) in a.iter().zip(b).enumerate() {
                    let discrepancy = (x - y).norm();
                    if !(discrepancy <= cfg.tolerance) {
                        return Err(SymbolError::TaylorMismatch {
                            power: n,
                            degree: k,
                            discrepancy,
                        });
                    }
                }
            }
            Ok(rows)
        }
    }
}

/// Coefficients `c_{n,0..=K}` of `φ^n`.
pub fn taylor_coeffs(phi: &SelfMap, n: usize, max_degree: usize, cfg: &TaylorConfig) -> Result<Vec<Complex64>, SymbolError> {
    let mut rows = power_coefficients(phi, n + 1, max_degree, cfg)?;
    Ok(rows.pop().expect("n + 1 rows"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[Complex64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - Complex64::new(*y, 0.0)).norm() < tol)
    }

    #[test]
    fn examples_both_methods() {
        for cfg in [TaylorConfig::default(), TaylorConfig::sampling()] {
            let half = SelfMap::parse("halfmap").unwrap();
            assert!(close(&taylor_coeffs(&half, 2, 2, &cfg).unwrap(), &[0.25, 0.5, 0.25], 1e-12));
            let zh = SelfMap::parse("zhalfmap").unwrap();
            assert!(close(&taylor_coeffs(&zh, 1, 2, &cfg).unwrap(), &[0.0, 0.5, 0.5], 1e-12));
            let dil = SelfMap::parse("dilate:0.5").unwrap();
            let c = taylor_coeffs(&dil, 3, 5, &cfg).unwrap();
            assert!(close(&c, &[0.0, 0.0, 0.0, 0.125, 0.0, 0.0], 1e-12));
        }
    }

    #[test]
    fn convolution_is_exact_for_dilations() {
        let dil = SelfMap::parse("dilate:0.5").unwrap();
        let rows = power_coefficients(&dil, 64, 63, &TaylorConfig::default()).unwrap();
        for (n, row) in rows.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                let expect = if k == n { 0.5f64.powi(n as i32) } else { 0.0 };
                assert_eq!(*c, Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn sampling_matches_convolution_at_full_size() {
        let phi = SelfMap::parse("tangentmap").unwrap();
        let a = power_coefficients(&phi, 256, 255, &TaylorConfig::default()).unwrap();
        let b = power_coefficients(&phi, 256, 255, &TaylorConfig::sampling()).unwrap();
        let worst = a
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-11, "worst {worst}");
    }

    #[test]
    fn linear_fractional_geometric_series() {
        // z / (2 - z) = Σ_{k≥1} z^k / 2^k
        let phi = SelfMap::parse("linfrac:1,0,-1,2").unwrap();
        let c = taylor_coeffs(&phi, 1, 40, &TaylorConfig::default()).unwrap();
        for (k, x) in c.iter().enumerate() {
            let expect = if k == 0 { 0.0 } else { 0.5f64.powi(k as i32) };
            assert!((x - Complex64::new(expect, 0.0)).norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn coarse_radius_is_rejected() {
        // An outer radius with too few samples aliases badly and must be caught.
        let phi = SelfMap::parse("linfrac:1,0,-1,2").unwrap();
        let cfg = TaylorConfig {
            radius: Some(0.99),
            verify_radius: Some(0.5),
            samples: Some(64),
            ..TaylorConfig::sampling()
        };
        assert!(matches!(
            power_coefficients(&phi, 8, 40, &cfg),
            Err(SymbolError::TaylorMismatch { .. })
        ));
    }
}

//! Analytic self-maps of the disk: construction, validation, evaluation in
//! double and double-double precision, Taylor coefficients of powers and
//! boundary first-order data.

mod boundary;
mod parse;
mod taylor;

use std::fmt;

use num_complex::{Complex, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

pub use boundary::{
    angular_derivative, contact_scan, julia_quotient, AngularDerivative, ContactScan, FirstOrderData,
    DATA_ETA_TOL, DATA_REL_D_TOL, DIVERGENCE_LEVEL, OSCILLATION_RATIO, TAIL_WINDOW,
};
pub use parse::parse_complex;
pub use taylor::{power_coefficients, taylor_coeffs, TaylorConfig, TaylorMethod};

/// Complex double-double.
pub type ComplexDd = Complex<TwoFloat>;

pub const BOUNDARY_GRID: usize = 4096;
pub const INTERIOR_SAMPLES: usize = 10_000;
pub const BOUNDARY_SLACK: f64 = 1e-12;
const VALIDATION_SEED: u64 = 0x05e1_f3a9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("cannot parse symbol '{token}': {reason}. Grammar: dilate:<s> | rot:<theta> | linfrac:<a>,<b>,<c>,<d> | poly:<c0>,<c1>,... | halfmap | zhalfmap | tangentmap | compose(<outer>;<inner>)")]
    Parse { token: String, reason: String },
    #[error("{symbol} is not a self-map of the disk: {reason} (max modulus {max_modulus:.6})")]
    NotSelfMap {
        symbol: String,
        reason: String,
        max_modulus: f64,
    },
    #[error("Taylor coefficient of phi^{power} at degree {degree} differs by {discrepancy:.3e} between sampling radii; increase the sample count or move the radius inward")]
    TaylorMismatch {
        power: usize,
        degree: usize,
        discrepancy: f64,
    },
    #[error("boundary point {0} is not unimodular")]
    NotUnimodular(Complex64),
    #[error("radius {0} must lie in (0, 1)")]
    BadRadius(f64),
}

/// Symbol expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    /// `s z`
    Dilation(f64),
    /// `e^{iθ} z`
    Rotation(f64),
    /// `(a z + b) / (c z + d)`
    LinearFractional {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
    /// `Σ c_k z^k`
    Polynomial(Vec<Complex64>),
    /// `(1 + z) / 2`
    HalfMap,
    /// `z (1 + z) / 2`
    ZHalfMap,
    /// `(1 + z) / 2 + (1 - z)^2 / 8`
    TangentMap,
    /// `outer ∘ inner`
    Compose(Box<Symbol>, Box<Symbol>),
}

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from_f64(x)
}

fn cdd(z: Complex64) -> ComplexDd {
    Complex::new(dd(z.re), dd(z.im))
}

pub(crate) fn dd_to_f64(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

/// Double-double quotient with one Newton correction; the built-in `/` is only
/// accurate to double precision.
pub(crate) fn div_dd(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b;
    let r = a - q * b;
    q + dd(dd_to_f64(r) / dd_to_f64(b))
}

pub(crate) fn cdiv_dd(a: ComplexDd, b: ComplexDd) -> ComplexDd {
    let den = b.re * b.re + b.im * b.im;
    let num = a * b.conj();
    Complex::new(div_dd(num.re, den), div_dd(num.im, den))
}

/// `z / |z|` rounded to double-double, so the result is unimodular to ~1e-32.
pub(crate) fn unit_dd(z: Complex64) -> ComplexDd {
    let v = cdd(z);
    let r = (v.re * v.re + v.im * v.im).sqrt();
    Complex::new(div_dd(v.re, r), div_dd(v.im, r))
}

fn poly_eval<C>(coeffs: &[C], z: C, zero: C) -> C
where
    C: Clone + std::ops::Mul<Output = C> + std::ops::Add<Output = C>,
{
    coeffs.iter().rev().fold(zero, |acc, c| acc * z.clone() + c.clone())
}

impl Symbol {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Dilation(s) => z * *s,
            Symbol::Rotation(theta) => Complex64::from_polar(1.0, *theta) * z,
            Symbol::LinearFractional { a, b, c, d } => (a * z + b) / (c * z + d),
            Symbol::Polynomial(coeffs) => poly_eval(coeffs, z, c64(0.0)),
            Symbol::HalfMap => (1.0 + z) * 0.5,
            Symbol::ZHalfMap => z * (1.0 + z) * 0.5,
            Symbol::TangentMap => {
                let w = 1.0 - z;
                (1.0 + z) * 0.5 + w * w * 0.125
            }
            Symbol::Compose(outer, inner) => outer.eval(inner.eval(z)),
        }
    }

    /// Evaluation in double-double; rotation constants are renormalized to unit modulus.
    pub fn eval_dd(&self, z: ComplexDd) -> ComplexDd {
        let one = Complex::new(dd(1.0), dd(0.0));
        let half = dd(0.5);
        match self {
            Symbol::Dilation(s) => z * dd(*s),
            Symbol::Rotation(theta) => unit_dd(Complex64::from_polar(1.0, *theta)) * z,
            Symbol::LinearFractional { a, b, c, d } => {
                cdiv_dd(cdd(*a) * z + cdd(*b), cdd(*c) * z + cdd(*d))
            }
            Symbol::Polynomial(coeffs) => {
                let cs: Vec<ComplexDd> = coeffs.iter().map(|&c| cdd(c)).collect();
                poly_eval(&cs, z, Complex::new(dd(0.0), dd(0.0)))
            }
            Symbol::HalfMap => (one + z) * half,
            Symbol::ZHalfMap => z * (one + z) * half,
            Symbol::TangentMap => {
                let w = one - z;
                (one + z) * half + w * w * dd(0.125)
            }
            Symbol::Compose(outer, inner) => outer.eval_dd(inner.eval_dd(z)),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Dilation(s) => c64(*s),
            Symbol::Rotation(theta) => Complex64::from_polar(1.0, *theta),
            Symbol::LinearFractional { a, b, c, d } => {
                let den = c * z + d;
                (a * d - b * c) / (den * den)
            }
            Symbol::Polynomial(coeffs) => {
                let deriv: Vec<Complex64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| c * k as f64)
                    .collect();
                poly_eval(&deriv, z, c64(0.0))
            }
            Symbol::HalfMap => c64(0.5),
            Symbol::ZHalfMap => z + 0.5,
            Symbol::TangentMap => 0.5 - (1.0 - z) * 0.25,
            Symbol::Compose(outer, inner) => outer.derivative(inner.eval(z)) * inner.derivative(z),
        }
    }

    /// Power-series coefficients when the symbol is a polynomial, truncated to degree `max_degree`.
    pub fn polynomial_coefficients(&self, max_degree: usize) -> Option<Vec<Complex64>> {
        let mut out = match self {
            Symbol::Dilation(s) => vec![c64(0.0), c64(*s)],
            Symbol::Rotation(theta) => vec![c64(0.0), Complex64::from_polar(1.0, *theta)],
            Symbol::Polynomial(c) => c.clone(),
            Symbol::HalfMap => vec![c64(0.5), c64(0.5)],
            Symbol::ZHalfMap => vec![c64(0.0), c64(0.5), c64(0.5)],
            Symbol::TangentMap => vec![c64(0.625), c64(0.25), c64(0.125)],
            Symbol::LinearFractional { .. } => return None,
            Symbol::Compose(outer, inner) => {
                let o = outer.polynomial_coefficients(max_degree)?;
                let i = inner.polynomial_coefficients(max_degree)?;
                // Horner in truncated series arithmetic.
                let mut acc = vec![c64(0.0)];
                for c in o.iter().rev() {
                    acc = truncated_mul(&acc, &i, max_degree);
                    acc[0] += c;
                }
                acc
            }
        };
        out.truncate(max_degree + 1);
        while out.len() > 1 && out.last() == Some(&c64(0.0)) {
            out.pop();
        }
        Some(out)
    }
}

/// Product of two series truncated to degree `max_degree`.
pub(crate) fn truncated_mul(a: &[Complex64], b: &[Complex64], max_degree: usize) -> Vec<Complex64> {
    let len = (a.len() + b.len() - 1).min(max_degree + 1);
    let mut out = vec![c64(0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if *x == c64(0.0) {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn fmt_list(zs: &[Complex64]) -> String {
    zs.iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join(",")
}

/// Canonical spec string; parses back to an equal symbol.
impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Dilation(s) => write!(f, "dilate:{s}"),
            Symbol::Rotation(t) => write!(f, "rot:{t}"),
            Symbol::LinearFractional { a, b, c, d } => write!(f, "linfrac:{}", fmt_list(&[*a, *b, *c, *d])),
            Symbol::Polynomial(c) => write!(f, "poly:{}", fmt_list(c)),
            Symbol::HalfMap => f.write_str("halfmap"),
            Symbol::ZHalfMap => f.write_str("zhalfmap"),
            Symbol::TangentMap => f.write_str("tangentmap"),
            Symbol::Compose(o, i) => write!(f, "compose({o};{i})"),
        }
    }
}

impl std::str::FromStr for Symbol {
    type Err = SymbolError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse_symbol(s)
    }
}

/// Outcome of the self-map check on the boundary grid and interior samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub passed: bool,
    pub max_boundary_modulus: f64,
    pub max_interior_modulus: f64,
    /// Where the largest modulus (or the singularity) was found.
    pub location: Complex64,
    pub failure: Option<String>,
}

/// Checks `|φ| ≤ 1 + 1e-12` on 4096 boundary points and `|φ| < 1` on seeded interior samples.
pub fn selfmap_validate(symbol: &Symbol) -> Validation {
    let fail = |reason: String, location: Complex64, modulus: f64| Validation {
        passed: false,
        max_boundary_modulus: modulus,
        max_interior_modulus: modulus,
        location,
        failure: Some(reason),
    };
    match symbol {
        Symbol::LinearFractional { c, d, .. } => {
            if c.norm() == 0.0 && d.norm() == 0.0 {
                return fail("denominator vanishes identically".into(), c64(0.0), f64::INFINITY);
            }
            if c.norm() > 0.0 {
                let pole = -d / c;
                if pole.norm() <= 1.0 + BOUNDARY_SLACK {
                    return fail(format!("pole at {pole} in the closed disk"), pole, f64::INFINITY);
                }
            }
        }
        Symbol::Compose(outer, inner) => {
            for part in [inner.as_ref(), outer.as_ref()] {
                let v = selfmap_validate(part);
                if !v.passed {
                    return Validation {
                        failure: Some(format!("component {part}: {}", v.failure.unwrap_or_default())),
                        ..v
                    };
                }
            }
        }
        _ => {}
    }

    let mut max_b = 0.0f64;
    let mut at_b = c64(1.0);
    for j in 0..BOUNDARY_GRID {
        let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / BOUNDARY_GRID as f64);
        let m = symbol.eval(z).norm();
        if !m.is_finite() {
            return fail(format!("non-finite value at {z}"), z, f64::INFINITY);
        }
        if m > max_b {
            max_b = m;
            at_b = z;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let mut max_i = 0.0f64;
    let mut at_i = c64(0.0);
    for _ in 0..INTERIOR_SAMPLES {
        let z = crate::geometry::uniform_disk_point(&mut rng);
        let m = symbol.eval(z).norm();
        if !m.is_finite() {
            return fail(format!("non-finite value at {z}"), z, f64::INFINITY);
        }
        if m > max_i {
            max_i = m;
            at_i = z;
        }
    }
    let mut failure = None;
    let mut location = at_b;
    if max_b > 1.0 + BOUNDARY_SLACK {
        failure = Some(format!("boundary modulus {max_b} exceeds 1"));
    } else if max_i >= 1.0 {
        failure = Some(format!("interior modulus {max_i} is not below 1"));
        location = at_i;
    }
    Validation {
        passed: failure.is_none(),
        max_boundary_modulus: max_b,
        max_interior_modulus: max_i,
        location,
        failure,
    }
}

/// A symbol that passed [`selfmap_validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelfMap {
    symbol: Symbol,
    validation: Validation,
    origin_image: Complex64,
}

impl SelfMap {
    pub fn new(symbol: Symbol) -> Result<Self, SymbolError> {
        let validation = selfmap_validate(&symbol);
        if !validation.passed {
            return Err(SymbolError::NotSelfMap {
                symbol: symbol.to_string(),
                reason: validation.failure.clone().unwrap_or_default(),
                max_modulus: validation.max_boundary_modulus.max(validation.max_interior_modulus),
            });
        }
        let origin_image = symbol.eval(c64(0.0));
        Ok(Self {
            symbol,
            validation,
            origin_image,
        })
    }

    pub fn parse(spec: &str) -> Result<Self, SymbolError> {
        Self::new(spec.parse()?)
    }

    pub fn identity() -> Self {
        Self::new(Symbol::Dilation(1.0)).expect("identity is a self-map")
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn spec(&self) -> String {
        self.symbol.to_string()
    }

    pub fn validation(&self) -> &Validation {
        &self.validation
    }

    pub fn origin_image(&self) -> Complex64 {
        self.origin_image
    }

    /// `(1 + |φ(0)|) / (1 - |φ(0)|)`.
    pub fn schwarz_constant(&self) -> f64 {
        let a = self.origin_image.norm();
        (1.0 + a) / (1.0 - a)
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.symbol.eval(z)
    }

    #[inline]
    pub fn eval_dd(&self, z: ComplexDd) -> ComplexDd {
        self.symbol.eval_dd(z)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.symbol.derivative(z)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SelfMap) -> Result<SelfMap, SymbolError> {
        SelfMap::new(Symbol::Compose(Box::new(self.symbol.clone()), Box::new(inner.symbol.clone())))
    }
}

impl fmt::Display for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbol.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rho, uniform_disk_point};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn validate_examples() {
        let v = selfmap_validate(&Symbol::HalfMap);
        assert!(v.passed);
        assert!((v.max_boundary_modulus - 1.0).abs() < 1e-15);
        assert!((v.location - c(1.0, 0.0)).norm() < 1e-12);

        let v = selfmap_validate(&Symbol::Dilation(2.0));
        assert!(!v.passed);
        assert!((v.max_boundary_modulus - 2.0).abs() < 1e-12);

        assert!(selfmap_validate(&Symbol::TangentMap).passed);
        assert!((Symbol::TangentMap.eval(c(0.0, 1.0)).norm() - 0.559_016_994_374_947_4).abs() < 1e-12);
    }

    #[test]
    fn linear_fractional_pole_is_reported() {
        let s = Symbol::LinearFractional {
            a: c(1.0, 0.0),
            b: c(0.0, 0.0),
            c: c(1.0, 0.0),
            d: c(-0.5, 0.0),
        };
        let v = selfmap_validate(&s);
        assert!(!v.passed);
        assert!((v.location - c(0.5, 0.0)).norm() < 1e-15);
        assert!(v.failure.unwrap().contains("pole"));

        // z / (2 - z) maps the disk into itself
        let ok = Symbol::LinearFractional {
            a: c(1.0, 0.0),
            b: c(0.0, 0.0),
            c: c(-1.0, 0.0),
            d: c(2.0, 0.0),
        };
        assert!(SelfMap::new(ok).is_ok());
    }

    #[test]
    fn presets_evaluate() {
        let z = c(0.3, -0.2);
        assert_eq!(Symbol::HalfMap.eval(z), (1.0 + z) / 2.0);
        assert!((Symbol::ZHalfMap.eval(z) - z * (1.0 + z) / 2.0).norm() < 1e-16);
        let tm = (1.0 + z) / 2.0 + (1.0 - z) * (1.0 - z) / 8.0;
        assert!((Symbol::TangentMap.eval(z) - tm).norm() < 1e-16);
        let comp = Symbol::Compose(Box::new(Symbol::HalfMap), Box::new(Symbol::Dilation(0.5)));
        assert_eq!(comp.eval(z), (1.0 + 0.5 * z) / 2.0);
    }

    #[test]
    fn double_double_agrees_with_f64() {
        let z = c(0.41, 0.37);
        for s in ["halfmap", "zhalfmap", "tangentmap", "rot:0.7", "linfrac:1,0,-1,2", "poly:0.1,0.2+0.1i,0.3"] {
            let sym: Symbol = s.parse().unwrap();
            let a = sym.eval(z);
            let b = sym.eval_dd(Complex::new(dd(z.re), dd(z.im)));
            assert!((a - c(dd_to_f64(b.re), dd_to_f64(b.im))).norm() < 1e-15, "{s}");
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let z = c(0.2, 0.3);
        let h = 1e-6;
        for s in ["halfmap", "zhalfmap", "tangentmap", "linfrac:1,0,-1,2", "compose(zhalfmap;linfrac:1,0,-1,2)"] {
            let sym: Symbol = s.parse().unwrap();
            let fd = (sym.eval(z + h) - sym.eval(z - h)) / (2.0 * h);
            assert!((fd - sym.derivative(z)).norm() < 1e-8, "{s}");
        }
    }

    #[test]
    fn polynomial_coefficients_of_compositions() {
        let comp: Symbol = "compose(zhalfmap;halfmap)".parse().unwrap();
        let coeffs = comp.polynomial_coefficients(10).unwrap();
        // h(1+h)/2 with h = (1+z)/2 is (3 + 4z + z^2)/8
        let expect = [0.375, 0.5, 0.125];
        assert_eq!(coeffs.len(), 3);
        for (a, b) in coeffs.iter().zip(expect) {
            assert!((a - c(b, 0.0)).norm() < 1e-16);
        }
        assert!(Symbol::LinearFractional {
            a: c(1.0, 0.0),
            b: c(0.0, 0.0),
            c: c(0.0, 0.0),
            d: c(2.0, 0.0)
        }
        .polynomial_coefficients(4)
        .is_none());
    }

    #[test]
    fn composition_of_self_maps_validates() {
        let a = SelfMap::parse("tangentmap").unwrap();
        let b = SelfMap::parse("linfrac:1,0,-1,2").unwrap();
        assert!(a.compose(&b).is_ok());
        assert!(b.compose(&a).is_ok());
    }

    fn any_map() -> impl Strategy<Value = SelfMap> {
        prop_oneof![
            Just("halfmap"),
            Just("zhalfmap"),
            Just("tangentmap"),
            Just("dilate:0.5"),
            Just("rot:1.1"),
            Just("linfrac:1,0,-1,2"),
            Just("poly:0.5625,0.3125,0.1875,-0.0625"),
            Just("compose(halfmap;zhalfmap)"),
        ]
        .prop_map(|s| SelfMap::parse(s).unwrap())
    }

    fn disk_point() -> impl Strategy<Value = Complex64> {
        (0.0f64..0.9999, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn schwarz_pick_quotient(phi in any_map(), z in disk_point()) {
            let q = (1.0 - z.norm()) / (1.0 - phi.eval(z).norm());
            prop_assert!(q <= phi.schwarz_constant() * (1.0 + 1e-9));
        }

        #[test]
        fn schwarz_modulus_bound(phi in any_map(), z in disk_point()) {
            let c = phi.schwarz_constant();
            prop_assert!(phi.eval(z).norm() <= (c - 1.0) / c + z.norm() / c + 1e-12);
        }

        #[test]
        fn contraction(phi in any_map(), z in disk_point(), w in disk_point()) {
            prop_assert!(rho(phi.eval(z), phi.eval(w)) <= rho(z, w) + 1e-9);
        }

        #[test]
        fn display_round_trips(phi in any_map()) {
            let again: Symbol = phi.spec().parse().unwrap();
            prop_assert_eq!(&again, phi.symbol());
        }
    }

    #[test]
    fn interior_images_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = SelfMap::parse("compose(tangentmap;rot:2)").unwrap();
        for _ in 0..1000 {
            assert!(phi.eval(uniform_disk_point(&mut rng)).norm() < 1.0);
        }
    }
}

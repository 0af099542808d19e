//! Finite sections of composition operators on `A²_ω` in the orthonormal basis
//! `e_k = z^k / √m_k`, their norms and the tail-projection essential-norm proxy.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbols::{power_coefficients, SelfMap, SymbolError, TaylorConfig};
use crate::weights::{RadialWeight, WeightError};

pub const DEFAULT_DIM: usize = 256;
pub const DEFAULT_PROXY_GRID: [usize; 4] = [16, 32, 64, 128];

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("a combination needs at least one term")]
    EmptyTerms,
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("operators of dimension {left} and {right} cannot be combined")]
    DimMismatch { left: usize, right: usize },
    #[error("projection rank {m} must be below the dimension {dim}")]
    BadRank { m: usize, dim: usize },
    #[error("cannot write matrix dump: {0}")]
    Io(#[from] std::io::Error),
}

/// One `λ C_φ` summand, recorded by spec string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub lambda: Complex64,
    pub symbol: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    entries: DMatrix<Complex64>,
    weight: String,
    terms: Vec<Term>,
}

/// Monomial norms `m_0..m_{N-1}`.
pub fn basis_moments(w: &RadialWeight, dim: usize) -> Result<Vec<f64>, OperatorError> {
    Ok(w.moments(dim)?)
}

fn fill(phi: &SelfMap, moments: &[f64], cfg: &TaylorConfig) -> Result<DMatrix<Complex64>, OperatorError> {
    let n = moments.len();
    let rows = power_coefficients(phi, n, n - 1, cfg)?;
    let ratio: Vec<f64> = moments.iter().map(|m| m.sqrt()).collect();
    Ok(DMatrix::from_fn(n, n, |m, col| {
        let c = rows[col][m];
        if m == col {
            c
        } else {
            c * (ratio[m] / ratio[col])
        }
    }))
}

/// `A[m][n] = c_{n,m} √(m_m / m_n)`, where `c_{n,m}` is the degree-`m` coefficient of `φ^n`.
pub fn composition_matrix(phi: &SelfMap, w: &RadialWeight, dim: usize) -> Result<TruncatedOperator, OperatorError> {
    combo_matrix(&[(Complex64::new(1.0, 0.0), phi.clone())], w, dim)
}

/// `Σ λ_j C_{φ_j}` truncated to `dim`.
pub fn combo_matrix(terms: &[(Complex64, SelfMap)], w: &RadialWeight, dim: usize) -> Result<TruncatedOperator, OperatorError> {
    combo_matrix_with(terms, w, dim, &TaylorConfig::default())
}

pub fn combo_matrix_with(
    terms: &[(Complex64, SelfMap)],
    w: &RadialWeight,
    dim: usize,
    cfg: &TaylorConfig,
) -> Result<TruncatedOperator, OperatorError> {
    if terms.is_empty() {
        return Err(OperatorError::EmptyTerms);
    }
    if dim == 0 {
        return Err(OperatorError::ZeroDim);
    }
    let moments = basis_moments(w, dim)?;
    let parts: Vec<DMatrix<Complex64>> = terms
        .par_iter()
        .map(|(_, phi)| fill(phi, &moments, cfg))
        .collect::<Result<_, _>>()?;
    let mut entries = DMatrix::zeros(dim, dim);
    for ((lambda, _), part) in terms.iter().zip(parts) {
        entries += part * *lambda;
    }
    Ok(TruncatedOperator {
        entries,
        weight: w.label().to_string(),
        terms: terms
            .iter()
            .map(|(lambda, phi)| Term {
                lambda: *lambda,
                symbol: phi.spec(),
            })
            .collect(),
    })
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn weight(&self) -> &str {
        &self.weight
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Matrix product `self · other`, i.e. apply `other` first.
    pub fn compose(&self, other: &TruncatedOperator) -> Result<TruncatedOperator, OperatorError> {
        if self.dim() != other.dim() {
            return Err(OperatorError::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(TruncatedOperator {
            entries: &self.entries * &other.entries,
            weight: self.weight.clone(),
            terms: Vec::new(),
        })
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        spectral_norm(self.entries.clone())
    }

    /// `‖T(I - P_M)‖` for each `M`: the norm with the first `M` basis columns removed.
    pub fn essnorm_proxy(&self, ms: &[usize]) -> Result<Vec<f64>, OperatorError> {
        let dim = self.dim();
        if let Some(&m) = ms.iter().find(|&&m| m >= dim) {
            return Err(OperatorError::BadRank { m, dim });
        }
        Ok(ms
            .par_iter()
            .map(|&m| spectral_norm(self.entries.columns(m, dim - m).into_owned()))
            .collect())
    }

    /// Row-major CSV dumps `<stem>_re.csv` and `<stem>_im.csv` in `dir`.
    pub fn write_csv(&self, dir: &Path, stem: &str) -> Result<(), OperatorError> {
        for (suffix, part) in [("re", 0), ("im", 1)] {
            let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}_{suffix}.csv")))?);
            for r in 0..self.dim() {
                let row: Vec<String> = (0..self.dim())
                    .map(|c| {
                        let z = self.entries[(r, c)];
                        format!("{:.16e}", if part == 0 { z.re } else { z.im })
                    })
                    .collect();
                writeln!(out, "{}", row.join(","))?;
            }
            out.flush()?;
        }
        Ok(())
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.entries * x).iter().copied().collect()
    }
}

fn spectral_norm(m: DMatrix<Complex64>) -> f64 {
    if m.is_empty() || m.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Orthonormal-basis coordinates of `(1 - conj(a) z)^{-s}` up to degree `moments.len() - 1`.
pub fn kernel_coordinates(a: Complex64, s: f64, moments: &[f64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(moments.len());
    let mut coeff = Complex64::new(1.0, 0.0);
    for (k, m) in moments.iter().enumerate() {
        out.push(coeff * m.sqrt());
        coeff *= a.conj() * ((k as f64 + s) / (k as f64 + 1.0));
    }
    out
}

/// `‖T f‖ / ‖f‖` for the truncated kernel `f = (1 - conj(a) z)^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessReading {
    pub ratio: f64,
    pub op_norm: f64,
    /// `‖f_N‖ / ‖f‖` when the full norm is supplied, otherwise 1.
    pub captured: f64,
}

pub fn lower_bound_harness(
    t: &TruncatedOperator,
    moments: &[f64],
    a: Complex64,
    s: f64,
    full_norm: Option<f64>,
) -> HarnessReading {
    let v = kernel_coordinates(a, s, moments);
    let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tv: f64 = t.apply(&v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    HarnessReading {
        ratio: tv / vn,
        op_norm: t.op_norm(),
        captured: full_norm.map_or(1.0, |n| vn / n),
    }
}

//! Numerical laboratory for composition operators on weighted Bergman spaces
//! `A^p_ω` with radial doubling weights.
//!
//! Modules are layered bottom-up: [`quadrature`] and [`geometry`] are
//! self-contained, [`weights`] and [`symbols`] build on them, and
//! [`criteria`] combines everything into compactness verdicts.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod quadrature;
pub mod geometry;
pub mod symbols;
pub mod carleson;
pub mod criteria;
pub mod operators;
pub mod policy;
pub mod testfns;
pub mod weights;

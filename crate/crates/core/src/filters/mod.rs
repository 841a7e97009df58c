//! Nonclassicality filters `Ω_w(β)`.
//!
//! | kind | `Ω_w(β)` | support |
//! |------|----------|---------|
//! | [`NCFilter::Triangular`] | `tri(β_r/w)·tri(β_i/w)`, `tri(x) = max(0, 1−\|x\|)` | `[−w, w]²` |
//! | [`NCFilter::Autocorrelation`] | `Ω(\|β\|/w)` from a [`RadialTable`] | disc of radius `w·r_max` |
//! | [`NCFilter::GaussianS`] | `exp((s−1)\|β\|²/2)` | unbounded |
//!
//! The first two are valid nonclassicality filters. The Gaussian family
//! is kept as a counterexample: for `s ≥ 0` it fails the integrability
//! condition checked in [`conditions`].
//!
//! ```
//! use nonclassical::filters::NCFilter;
//! use num_complex::Complex64;
//!
//! let f = NCFilter::autocorrelation(1.2).unwrap();
//! assert_eq!(f.eval(Complex64::new(0.0, 0.0)), 1.0);
//! assert!(f.eval(Complex64::new(0.0, 1.0)) < 1.0);
//! ```

pub mod autocorr;
pub mod conditions;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use autocorr::{build_autocorr_filter, Kernel, RadialTable, RadialTableMeta};
pub use conditions::{
    check_conditions, lemma1_bound_check, ConditionOutcome, ConditionReport, ConditionTolerances,
    LemmaReport, Status,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Triangular,
    Autocorrelation,
    GaussianS,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Triangular => "triangular",
            FilterKind::Autocorrelation => "autocorrelation",
            FilterKind::GaussianS => "gaussian-s",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "triangular" | "tri" => Ok(FilterKind::Triangular),
            "autocorrelation" | "autocorr" | "ac" => Ok(FilterKind::Autocorrelation),
            "gaussian-s" | "gaussian_s" | "gaussians" | "s" => Ok(FilterKind::GaussianS),
            other => Err(Error::domain(format!(
                "unknown filter `{other}` (expected triangular, autocorrelation or gaussian-s)"
            ))),
        }
    }
}

/// A filter with its width (or `s`) fixed.
#[derive(Clone, Debug)]
pub enum NCFilter {
    Triangular { width: f64 },
    Autocorrelation { width: f64, table: Arc<RadialTable> },
    GaussianS { s: f64 },
}

fn check_width(width: f64) -> Result<()> {
    if width.is_finite() && width > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("filter width must be > 0, got {width}")))
    }
}

impl NCFilter {
    pub fn triangular(width: f64) -> Result<Self> {
        check_width(width)?;
        Ok(NCFilter::Triangular { width })
    }

    /// Autocorrelation of `exp(−|β|⁴)` at width `w`.
    pub fn autocorrelation(width: f64) -> Result<Self> {
        Self::autocorrelation_with(RadialTable::quartic(), width)
    }

    pub fn autocorrelation_with(table: Arc<RadialTable>, width: f64) -> Result<Self> {
        check_width(width)?;
        Ok(NCFilter::Autocorrelation { width, table })
    }

    pub fn gaussian_s(s: f64) -> Result<Self> {
        if s.is_finite() && s <= 1.0 {
            Ok(NCFilter::GaussianS { s })
        } else {
            Err(Error::domain(format!("s must be <= 1, got {s}")))
        }
    }

    /// Builds a filter of `kind` with width (or `s`) `parameter`.
    pub fn new(kind: FilterKind, parameter: f64) -> Result<Self> {
        match kind {
            FilterKind::Triangular => Self::triangular(parameter),
            FilterKind::Autocorrelation => Self::autocorrelation(parameter),
            FilterKind::GaussianS => Self::gaussian_s(parameter),
        }
    }

    pub fn kind(&self) -> FilterKind {
        match self {
            NCFilter::Triangular { .. } => FilterKind::Triangular,
            NCFilter::Autocorrelation { .. } => FilterKind::Autocorrelation,
            NCFilter::GaussianS { .. } => FilterKind::GaussianS,
        }
    }

    /// Width `w`, or `s` for the Gaussian family.
    pub fn parameter(&self) -> f64 {
        match *self {
            NCFilter::Triangular { width } | NCFilter::Autocorrelation { width, .. } => width,
            NCFilter::GaussianS { s } => s,
        }
    }

    /// Same filter with a different width (or `s`).
    pub fn with_parameter(&self, parameter: f64) -> Result<Self> {
        match self {
            NCFilter::Triangular { .. } => Self::triangular(parameter),
            NCFilter::Autocorrelation { table, .. } => Self::autocorrelation_with(table.clone(), parameter),
            NCFilter::GaussianS { .. } => Self::gaussian_s(parameter),
        }
    }

    /// Radius outside which the filter vanishes, if bounded.
    ///
    /// For the triangular filter this is the half-diagonal of its square.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            NCFilter::Triangular { width } => Some(width * std::f64::consts::SQRT_2),
            NCFilter::Autocorrelation { width, table } => Some(width * table.r_max()),
            NCFilter::GaussianS { .. } => None,
        }
    }

    #[inline]
    pub fn eval(&self, beta: Complex64) -> f64 {
        match self {
            NCFilter::Triangular { width } => tri(beta.re / width) * tri(beta.im / width),
            NCFilter::Autocorrelation { width, table } => table.eval(beta.norm() / width),
            NCFilter::GaussianS { s } => eval_gaussian_s(beta, *s),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NCFilter::GaussianS { s } => format!("gaussian-s(s={s})"),
            other => format!("{}(w={})", other.kind(), other.parameter()),
        }
    }
}

#[inline]
fn tri(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// `tri(β_r/w)·tri(β_i/w)`.
pub fn eval_triangular(beta: Complex64, width: f64) -> Result<f64> {
    check_width(width)?;
    Ok(tri(beta.re / width) * tri(beta.im / width))
}

/// `exp((s−1)|β|²/2)`.
pub fn eval_gaussian_s(beta: Complex64, s: f64) -> f64 {
    ((s - 1.0) * beta.norm_sqr() / 2.0).exp()
}

pub fn eval_filter(filter: &NCFilter, beta: Complex64) -> f64 {
    filter.eval(beta)
}

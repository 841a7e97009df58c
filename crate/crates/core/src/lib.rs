//! Nonclassicality filters and regularized quasiprobabilities.
//!
//! The crate follows one pipeline:
//!
//! | step | module | result |
//! |------|--------|--------|
//! | sample | [`states`] | homodyne quadratures `x[φ]` |
//! | estimate | [`charfunc`] | `Φ(β)` on a lattice, with errors |
//! | filter | [`filters`], [`quasiprob`] | `Φ_Ω(β) = Φ(β)Ω_w(β)` |
//! | transform | [`quasiprob`] | `P_Ω(α)`, its error and significance |
//!
//! [`bochner`] holds the direct positivity tests on `Φ`.
//!
//! ```
//! use nonclassical::prelude::*;
//!
//! let state = AnalyticState::squeezed(0.2, 5.0);
//! let cf = CharFuncGrid::analytic(&state, GridSpec::new(6.0, 0.05).unwrap()).unwrap();
//! let filter = NCFilter::autocorrelation(1.2).unwrap();
//! let filtered = apply_filter(&cf, &filter).unwrap();
//! let map = fourier_to_quasiprob(&filtered, GridSpec::new(2.0, 0.1).unwrap(), TransformOptions::default()).unwrap();
//! assert!(significance(&map).min_value < 0.0);
//! ```

pub mod bochner;
pub mod charfunc;
pub mod error;
pub mod filters;
pub mod grid;
pub mod quasiprob;
pub mod states;

pub use error::{Error, Result};

/// Common imports.
pub mod prelude {
    pub use crate::bochner::{determinant_test, modulus_test, BochnerVerdict, Verdict};
    pub use crate::charfunc::{estimate_charfunc, estimate_on_grid, CharFuncGrid, CharacteristicFunction, SigmaMethod};
    pub use crate::error::{Error, Result};
    pub use crate::filters::{check_conditions, FilterKind, NCFilter};
    pub use crate::grid::GridSpec;
    pub use crate::quasiprob::{
        apply_filter, cross_section, fourier_to_quasiprob, normalization_check, propagate_error, significance,
        ErrorMethod, QuasiprobMap, TransformOptions,
    };
    pub use crate::states::{equally_spaced_phases, sample_quadratures, AnalyticState, QuadratureDataset};
}

// The guide's listings run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/charfunc.md")]
    mod charfunc {}
    #[doc = include_str!("../../../book/src/filters.md")]
    mod filters {}
    #[doc = include_str!("../../../book/src/quasiprob.md")]
    mod quasiprob {}
    #[doc = include_str!("../../../book/src/bochner.md")]
    mod bochner {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

//! Filtered characteristic functions and nonclassicality quasiprobabilities.
//!
//! The transform pair is
//!
//! ```text
//! Φ(β)   = ∫ P(α) e^{βα* − β*α} d²α
//! P_Ω(α) = π⁻² ∫ Φ(β) Ω_w(β) e^{αβ* − α*β} d²β
//! ```
//!
//! with kernel `e^{αβ*−α*β} = e^{2i(α_i β_r − α_r β_i)}`. The integral is a
//! Riemann sum over the β lattice, split into two one-dimensional passes
//! since the kernel factorises in `β_r` and `β_i`.
//!
//! | quantity | function |
//! |----------|----------|
//! | `Φ_Ω = Φ·Ω_w` | [`apply_filter`] |
//! | `P_Ω` on an α lattice | [`fourier_to_quasiprob`] |
//! | `P_Ω` along a line | [`cross_section`] |
//! | `σ(P_Ω)` | [`propagate_error`] |
//! | most negative node | [`significance`] |
//! | `Σ P_Ω Δα²` | [`normalization_check`] |
//!
//! Cross-sections take the angle `θ` of a β axis and trace `P_Ω` along the
//! Fourier-conjugate α axis `i·e^{iθ}`. For a state squeezed along real `β`
//! (`θ = 0`) the negativities therefore appear along imaginary `α`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charfunc::{estimate_on_grid_with, CharFuncGrid, CharacteristicFunction, EstimateOptions, GridSource};
use crate::error::{Error, Result};
use crate::filters::{FilterKind, NCFilter};
use crate::grid::GridSpec;
use crate::states::QuadratureDataset;

/// `|Φ_Ω|` above this on the lattice boundary means the lattice truncates
/// the filtered support.
pub const TAIL_LIMIT: f64 = 1e-6;
/// Largest accepted `max|Im P| / max|Re P|`.
pub const IMAG_TOLERANCE: f64 = 1e-8;
/// Accepted deviation of `Σ P_Ω Δα²` from one.
pub const NORMALIZATION_TOLERANCE: f64 = 0.01;
/// Values above `−NEGATIVITY_FLOOR` do not count as negative.
pub const NEGATIVITY_FLOOR: f64 = 1e-8;
/// Minima within this distance of each other are ties.
const TIE_TOLERANCE: f64 = 1e-12;

pub const CONVENTION: &str = "P(a) = pi^-2 sum Phi(b) Omega(b) exp(2i(a_i b_r - a_r b_i)) db^2";

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

/// A characteristic-function lattice multiplied by a filter.
#[derive(Clone, Debug)]
pub struct FilteredCharFunc {
    grid: CharFuncGrid,
    filter: NCFilter,
    boundary_max: f64,
}

impl FilteredCharFunc {
    pub fn grid(&self) -> &CharFuncGrid {
        &self.grid
    }

    pub fn filter(&self) -> &NCFilter {
        &self.filter
    }

    /// Largest `|Φ_Ω|` on the lattice boundary.
    pub fn boundary_max(&self) -> f64 {
        self.boundary_max
    }

    pub fn is_truncated(&self) -> bool {
        self.boundary_max > TAIL_LIMIT
    }
}

impl CharacteristicFunction for FilteredCharFunc {
    fn eval(&self, beta: Complex64) -> Result<(Complex64, f64)> {
        self.grid.lookup(beta)
    }

    fn is_sampled(&self) -> bool {
        self.grid.is_sampled()
    }
}

/// `Φ(β)·Ω_w(β)` evaluated pointwise on any source.
#[derive(Clone, Debug)]
pub struct Filtered<C> {
    pub inner: C,
    pub filter: NCFilter,
}

impl<C: CharacteristicFunction> CharacteristicFunction for Filtered<C> {
    fn eval(&self, beta: Complex64) -> Result<(Complex64, f64)> {
        let (v, s) = self.inner.eval(beta)?;
        let o = self.filter.eval(beta);
        Ok((v * o, s * o))
    }

    fn is_sampled(&self) -> bool {
        self.inner.is_sampled()
    }
}

/// Multiplies values and sigmas by `Ω_w(β)`.
///
/// Logs a warning when `|Φ_Ω|` exceeds [`TAIL_LIMIT`] on the lattice
/// boundary. A lattice estimated only inside a radius is rejected if the
/// filter reaches beyond it.
pub fn apply_filter(cf: &CharFuncGrid, filter: &NCFilter) -> Result<FilteredCharFunc> {
    if let Some(r) = cf.radius_limit() {
        match filter.support_radius() {
            Some(s) if s <= r => {}
            other => {
                return Err(Error::domain(format!(
                    "grid was estimated only for |beta| <= {r}, filter support extends to {}",
                    other.map_or("infinity".to_string(), |s| format!("{s}"))
                )))
            }
        }
    }
    let spec = cf.spec();
    let n = spec.len();
    let mut values = Vec::with_capacity(n * n);
    let mut sigma = Vec::with_capacity(n * n);
    for ir in 0..n {
        for ii in 0..n {
            let o = filter.eval(spec.point(ir, ii));
            values.push(cf.value(ir, ii) * o);
            sigma.push(cf.sigma_at(ir, ii) * o);
        }
    }
    let grid = cf.with_values(values, sigma);
    let boundary_max = grid.boundary_max_abs();
    if boundary_max > TAIL_LIMIT {
        log::warn!(
            "filtered characteristic function reaches {boundary_max:.3e} on the beta-grid boundary; \
             the grid truncates the support of {}",
            filter.label()
        );
    }
    Ok(FilteredCharFunc {
        grid,
        filter: filter.clone(),
        boundary_max,
    })
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum ErrorMethod {
    /// Every lattice node treated as an independent estimate.
    Independent,
    /// Pointwise spread over dataset resamples.
    Bootstrap { replicates: usize, seed: u64 },
}

impl ErrorMethod {
    pub fn bootstrap(replicates: usize, seed: u64) -> Self {
        ErrorMethod::Bootstrap { replicates, seed }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TransformOptions {
    /// Transform even if `|Φ_Ω|` exceeds [`TAIL_LIMIT`] on the boundary.
    pub allow_truncation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub filter: FilterKind,
    /// Width `w` (or `s`).
    pub width: f64,
    pub beta_grid: GridSpec,
    pub alpha_grid: GridSpec,
    pub convention: String,
    pub error_method: ErrorMethod,
    pub source: GridSource,
    pub n_samples: usize,
    pub boundary_max: f64,
    pub imaginary_residue: f64,
}

/// `P_Ω` and its standard deviation on an α lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiprobMap {
    spec: GridSpec,
    values: Vec<f64>,
    sigma: Vec<f64>,
    meta: MapMeta,
}

impl QuasiprobMap {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn meta(&self) -> &MapMeta {
        &self.meta
    }

    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[self.spec.index(i_re, i_im)]
    }

    pub fn sigma_at(&self, i_re: usize, i_im: usize) -> f64 {
        self.sigma[self.spec.index(i_re, i_im)]
    }

    /// Replaces the error map, e.g. with a bootstrap estimate.
    pub fn with_sigma(mut self, sigma: Vec<f64>, method: ErrorMethod) -> Result<Self> {
        if sigma.len() != self.values.len() {
            return Err(Error::domain(format!(
                "sigma map has {} entries, expected {}",
                sigma.len(),
                self.values.len()
            )));
        }
        self.sigma = sigma;
        self.meta.error_method = method;
        Ok(self)
    }

    /// `alpha_r,alpha_i,p,sigma` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "alpha_r,alpha_i,p,sigma")?;
        let n = self.spec.len();
        for ir in 0..n {
            for ii in 0..n {
                let a = self.spec.point(ir, ii);
                writeln!(out, "{},{},{},{}", a.re, a.im, self.value(ir, ii), self.sigma_at(ir, ii))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Phase factors `e^{i·sign·2·a·b}` for every `(a, b)` pair, `a` major.
fn phase_table(a: &[f64], b: &[f64], sign: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(Complex64::from_polar(1.0, sign * 2.0 * x * y));
        }
    }
    out
}

/// Independent-point error `π⁻² Δβ² √(Σσ_k²)`, identical at every α.
fn independent_sigma(grid: &CharFuncGrid) -> f64 {
    let step = grid.spec().step;
    let ss: f64 = grid.sigma().iter().map(|s| s * s).sum();
    step * step * ss.sqrt() / (PI * PI)
}

fn transform_values(grid: &CharFuncGrid, alpha: &GridSpec) -> (Vec<f64>, f64, f64) {
    let spec = grid.spec();
    let nb = spec.len();
    let na = alpha.len();
    let b = spec.coords();
    let a = alpha.coords();
    // First pass over β_i with e^{−2iα_rβ_i}, second over β_r with e^{2iα_iβ_r}.
    let e_first = phase_table(&a, &b, -1.0);
    let e_second = phase_table(&a, &b, 1.0);
    let values = grid.values();

    let mut partial = vec![Complex64::new(0.0, 0.0); nb * na];
    for ir in 0..nb {
        let row = &values[ir * nb..(ir + 1) * nb];
        if row.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
            continue;
        }
        for ar in 0..na {
            let e = &e_first[ar * nb..(ar + 1) * nb];
            let mut acc = Complex64::new(0.0, 0.0);
            for (v, p) in row.iter().zip(e) {
                acc += v * p;
            }
            partial[ir * na + ar] = acc;
        }
    }

    let scale = spec.step * spec.step / (PI * PI);
    let mut out = Vec::with_capacity(na * na);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for ar in 0..na {
        for ai in 0..na {
            let e = &e_second[ai * nb..(ai + 1) * nb];
            let mut acc = Complex64::new(0.0, 0.0);
            for ir in 0..nb {
                acc += partial[ir * na + ar] * e[ir];
            }
            let p = acc * scale;
            max_re = max_re.max(p.re.abs());
            max_im = max_im.max(p.im.abs());
            out.push(p.re);
        }
    }
    (out, max_re, max_im)
}

/// `P_Ω` on `alpha`, with the independent-point error attached.
pub fn fourier_to_quasiprob(
    filtered: &FilteredCharFunc,
    alpha: GridSpec,
    options: TransformOptions,
) -> Result<QuasiprobMap> {
    if filtered.is_truncated() && !options.allow_truncation {
        return Err(Error::TailTruncation {
            boundary_max: filtered.boundary_max,
            limit: TAIL_LIMIT,
        });
    }
    let grid = &filtered.grid;
    let (values, max_re, max_im) = transform_values(grid, &alpha);
    if max_im > IMAG_TOLERANCE * max_re {
        return Err(Error::ImaginaryResidue {
            residue: max_im,
            scale: max_re,
        });
    }
    let s = independent_sigma(grid);
    Ok(QuasiprobMap {
        spec: alpha,
        sigma: vec![s; values.len()],
        values,
        meta: MapMeta {
            filter: filtered.filter.kind(),
            width: filtered.filter.parameter(),
            beta_grid: grid.spec(),
            alpha_grid: alpha,
            convention: CONVENTION.into(),
            error_method: ErrorMethod::Independent,
            source: grid.source(),
            n_samples: grid.n_samples(),
            boundary_max: filtered.boundary_max,
            imaginary_residue: if max_re > 0.0 { max_im / max_re } else { 0.0 },
        },
    })
}

/// One point of a cross-section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub t: f64,
    pub value: f64,
    pub sigma: f64,
}

/// Unit α direction conjugate to the β axis at angle `theta`.
pub fn section_direction(theta: f64) -> Complex64 {
    Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, theta)
}

/// `P_Ω(t·i·e^{iθ})` by direct summation over the β lattice.
pub fn cross_section(filtered: &FilteredCharFunc, theta: f64, ts: &[f64]) -> Result<Vec<SectionPoint>> {
    if filtered.is_truncated() {
        log::warn!("cross-section of a truncated grid (boundary max {:.3e})", filtered.boundary_max);
    }
    let grid = &filtered.grid;
    let spec = grid.spec();
    let n = spec.len();
    let coords = spec.coords();
    let dir = section_direction(theta);
    let scale = spec.step * spec.step / (PI * PI);
    let sigma = independent_sigma(grid);
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let a = dir * t;
        let col: Vec<Complex64> = coords.iter().map(|&bi| Complex64::from_polar(1.0, -2.0 * a.re * bi)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (row, &br) in grid.values().chunks_exact(n).zip(&coords) {
            let mut s = Complex64::new(0.0, 0.0);
            for (v, p) in row.iter().zip(&col) {
                s += v * p;
            }
            acc += s * Complex64::from_polar(1.0, 2.0 * a.im * br);
        }
        out.push(SectionPoint {
            t,
            value: acc.re * scale,
            sigma,
        });
    }
    Ok(out)
}

/// `Φ_Ω(t·e^{iθ})` for any source.
pub fn cf_cross_section<C: CharacteristicFunction>(
    source: &C,
    filter: &NCFilter,
    theta: f64,
    ts: &[f64],
) -> Result<Vec<(f64, Complex64, f64)>> {
    let f = Filtered {
        inner: source,
        filter: filter.clone(),
    };
    ts.iter()
        .map(|&t| {
            let (v, s) = f.eval(Complex64::from_polar(t, theta))?;
            Ok((t, v, s))
        })
        .collect()
}

/// `t,p,sigma` rows.
pub fn write_section_csv(points: &[SectionPoint], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,p,sigma")?;
    for p in points {
        writeln!(out, "{},{},{}", p.t, p.value, p.sigma)?;
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Error map for `P_Ω` on `alpha`.
///
/// The bootstrap redraws every phase group with replacement, re-estimates
/// `Φ` on the same lattice and reports the pointwise sample standard
/// deviation of the resulting maps.
pub fn propagate_error(
    filtered: &FilteredCharFunc,
    alpha: GridSpec,
    method: ErrorMethod,
    dataset: Option<&QuadratureDataset>,
) -> Result<Vec<f64>> {
    match method {
        ErrorMethod::Independent => Ok(vec![independent_sigma(&filtered.grid); alpha.node_count()]),
        ErrorMethod::Bootstrap { replicates, seed } => {
            let dataset = dataset.ok_or_else(|| Error::MissingInput("bootstrap errors need the quadrature dataset".into()))?;
            if replicates < 2 {
                return Err(Error::domain(format!("bootstrap needs >= 2 replicates, got {replicates}")));
            }
            let spec = filtered.grid.spec();
            let options = EstimateOptions {
                radius: filtered.filter.support_radius().filter(|&r| r < spec.extent() * std::f64::consts::SQRT_2),
                ..Default::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut mean = vec![0.0; alpha.node_count()];
            let mut m2 = vec![0.0; alpha.node_count()];
            for b in 0..replicates {
                let resampled = dataset.resample(&mut rng);
                let cf = estimate_on_grid_with(&resampled, spec, options)?;
                let f = apply_filter(&cf, &filtered.filter)?;
                let (values, _, _) = transform_values(&f.grid, &alpha);
                let k = (b + 1) as f64;
                for ((m, q), v) in mean.iter_mut().zip(m2.iter_mut()).zip(values) {
                    let d = v - *m;
                    *m += d / k;
                    *q += d * (v - *m);
                }
            }
            Ok(m2.into_iter().map(|q| (q / (replicates - 1) as f64).sqrt()).collect())
        }
    }
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub min_value: f64,
    pub location: Complex64,
    pub sigma: f64,
    /// `|min|/σ`; infinite when `σ = 0` and the minimum is negative.
    pub ratio: f64,
    pub infinite: bool,
}

impl Significance {
    /// Negative beyond [`NEGATIVITY_FLOOR`].
    pub fn is_negative(&self) -> bool {
        self.min_value < -NEGATIVITY_FLOOR
    }

    /// Negative and at least `k` standard deviations below zero.
    pub fn is_significant(&self, k: f64) -> bool {
        self.is_negative() && self.ratio >= k
    }

    pub fn verdict(&self, k: f64) -> &'static str {
        if self.is_significant(k) {
            "negativity"
        } else if self.is_negative() {
            "insignificant negativity"
        } else {
            "no negativity"
        }
    }
}

fn arg_2pi(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Most negative node of `map`; ties go to the smallest `|α|`, then the
/// smallest `arg α ∈ [0, 2π)`.
pub fn significance(map: &QuasiprobMap) -> Significance {
    let spec = map.spec;
    let n = spec.len();
    let min = map.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for ir in 0..n {
        for ii in 0..n {
            if map.value(ir, ii) - min > TIE_TOLERANCE {
                continue;
            }
            let a = spec.point(ir, ii);
            let key = (a.norm(), arg_2pi(a));
            let better = match best {
                None => true,
                Some((r, g, _, _)) => key.0 < r || (key.0 == r && key.1 < g),
            };
            if better {
                best = Some((key.0, key.1, ir, ii));
            }
        }
    }
    let (_, _, ir, ii) = best.expect("map has at least one node");
    let value = map.value(ir, ii);
    let sigma = map.sigma_at(ir, ii);
    let (ratio, infinite) = if sigma > 0.0 {
        ((value.min(0.0)).abs() / sigma, false)
    } else if value < 0.0 {
        (f64::INFINITY, true)
    } else {
        (0.0, false)
    };
    Significance {
        min_value: value,
        location: spec.point(ir, ii),
        sigma,
        ratio,
        infinite,
    }
}

/// `Σ P_Ω Δα²`; should be within [`NORMALIZATION_TOLERANCE`] of one.
pub fn normalization_check(map: &QuasiprobMap) -> f64 {
    map.values.iter().sum::<f64>() * map.spec.step * map.spec.step
}

pub fn normalization_ok(total: f64) -> bool {
    (total - 1.0).abs() <= NORMALIZATION_TOLERANCE
}

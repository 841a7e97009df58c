//! Direct sampling of the characteristic function from homodyne data.
//!
//! For a point `β`, the estimator takes the samples recorded at the phase
//! nearest to `π/2 − arg β` and averages `e^{i|β|x}`, scaled by
//! `e^{|β|²/2}`. Its standard deviation never exceeds
//! `e^{|β|²/2}/√N` because every summand has unit modulus.
//!
//! Only points with `arg β ∈ [0, π)` are evaluated; the opposite half-plane
//! is filled by conjugation, so grids are Hermitian bit-for-bit.
//!
//! Nearest-phase lookup introduces an angular bias of up to half the phase
//! spacing (`π/24` for twelve phases). Samples are never interpolated
//! between phases.

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::states::{AnalyticState, QuadratureDataset};

/// Where the values of a [`CharFuncGrid`] come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    Analytic,
    Sampled,
}

impl GridSource {
    pub fn as_str(self) -> &'static str {
        match self {
            GridSource::Analytic => "analytic",
            GridSource::Sampled => "sampled",
        }
    }
}

/// Per-node error estimate attached to sampled grids.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    /// Plug-in standard error of the summands.
    #[default]
    Empirical,
    /// The universal bound `e^{|β|²/2}/√N`.
    Bound,
}

/// Sampling geometry for a single `β`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct PhaseLookup {
    phase: usize,
    /// Whether the mean of `e^{itx}` must be conjugated: either `β` was
    /// reflected into the upper half-plane or the phase was folded by `π`.
    conjugate: bool,
    t: f64,
}

fn lookup(dataset: &QuadratureDataset, beta: Complex64) -> Option<PhaseLookup> {
    if beta.re == 0.0 && beta.im == 0.0 {
        return None;
    }
    let upper = beta.im > 0.0 || (beta.im == 0.0 && beta.re > 0.0);
    let canonical = if upper { beta } else { -beta };
    let required = FRAC_PI_2 - canonical.im.atan2(canonical.re);
    let (phase, negate) = dataset.select_phase(required);
    Some(PhaseLookup {
        phase,
        conjugate: negate ^ !upper,
        t: beta.norm(),
    })
}

fn mean_phasor(samples: &[f64], t: f64) -> Complex64 {
    let sum: Complex64 = samples.iter().map(|&x| Complex64::from_polar(1.0, t * x)).sum();
    sum / samples.len() as f64
}

/// Sampling estimate of `Φ(β)`.
pub fn estimate_charfunc(dataset: &QuadratureDataset, beta: Complex64) -> Result<Complex64> {
    if dataset.total_samples() == 0 {
        return Err(Error::EmptyInput("dataset has no samples".into()));
    }
    let Some(l) = lookup(dataset, beta) else {
        return Ok(Complex64::new(1.0, 0.0));
    };
    let s = mean_phasor(dataset.samples(l.phase), l.t);
    let s = if l.conjugate { s.conj() } else { s };
    Ok(s * (l.t * l.t / 2.0).exp())
}

/// Upper bound `e^{|β|²/2}/√N` on the standard deviation of the estimate.
pub fn stddev_bound(n: usize, beta: Complex64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    Ok((beta.norm_sqr() / 2.0).exp() / (n as f64).sqrt())
}

/// Plug-in standard error of the estimate at `β`.
///
/// Uses the `1/N` sample variance of the unit-modulus summands, which is
/// at most one; the result therefore never exceeds [`stddev_bound`].
pub fn empirical_std(dataset: &QuadratureDataset, beta: Complex64) -> Result<f64> {
    let phase = match lookup(dataset, beta) {
        Some(l) => l.phase,
        None => dataset.select_phase(FRAC_PI_2).0,
    };
    let samples = dataset.samples(phase);
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} sample(s) at phase {}, need at least 2",
            samples.len(),
            dataset.phases()[phase]
        )));
    }
    let t = beta.norm();
    if t == 0.0 {
        return Ok(0.0);
    }
    // The variance is unchanged by a common phase; centring on the first
    // sample keeps constant data exactly at zero.
    let n = samples.len() as f64;
    let x0 = samples[0];
    let phasor = |x: f64| Complex64::from_polar(1.0, t * (x - x0));
    let mean = samples.iter().map(|&x| phasor(x)).sum::<Complex64>() / n;
    let var = samples.iter().map(|&x| (phasor(x) - mean).norm_sqr()).sum::<f64>() / n;
    Ok((var / n).sqrt() * (t * t / 2.0).exp())
}

// ---------------------------------------------------------------------------
// Tabulated empirical characteristic function
// ---------------------------------------------------------------------------

/// Interpolation stencil width.
const STENCIL: usize = 10;
/// Steps between exact re-evaluations of the phasor recurrence.
const RESYNC: usize = 64;
/// Largest phase advance `step · max|x|` between table nodes.
const MAX_PHASE_STEP: f64 = 0.1;

/// `S(t) = N⁻¹ Σ e^{itx_j}` tabulated on `t = k·step`, interpolated with a
/// ten-point barycentric Lagrange stencil. With at most 0.1 rad of phase
/// advance per node the interpolation error is below 1e-13.
struct EmpiricalCfTable {
    step: f64,
    values: Vec<Complex64>,
}

impl EmpiricalCfTable {
    fn build(samples: &[f64], t_max: f64) -> Self {
        let x_max = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let step = if x_max > 0.0 {
            (MAX_PHASE_STEP / x_max).min(0.05)
        } else {
            0.05
        };
        let len = (t_max / step).ceil() as usize + STENCIL + 2;
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for &x in samples {
            let rot = Complex64::from_polar(1.0, step * x);
            for (block, chunk) in acc.chunks_mut(RESYNC).enumerate() {
                let mut z = Complex64::from_polar(1.0, (block * RESYNC) as f64 * step * x);
                for a in chunk {
                    *a += z;
                    z *= rot;
                }
            }
        }
        let inv_n = 1.0 / samples.len() as f64;
        for a in &mut acc {
            *a *= inv_n;
        }
        acc[0] = Complex64::new(1.0, 0.0);
        EmpiricalCfTable { step, values: acc }
    }

    #[inline]
    fn node(&self, k: i64) -> Complex64 {
        if k >= 0 {
            self.values[k as usize]
        } else {
            self.values[(-k) as usize].conj()
        }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let s = t / self.step;
        let j = s.floor();
        if s == j {
            return self.node(j as i64);
        }
        let start = j as i64 - (STENCIL as i64 / 2 - 1);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (m, b) in BARYCENTRIC_10.iter().enumerate() {
            let w = b / (s - (start + m as i64) as f64);
            num += self.node(start + m as i64) * w;
            den += w;
        }
        num / den
    }
}

/// Barycentric weights `(−1)^m C(9, m)` for ten equispaced nodes.
const BARYCENTRIC_10: [f64; STENCIL] = [1.0, -9.0, 36.0, -84.0, 126.0, -126.0, 84.0, -36.0, 9.0, -1.0];

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Complex `Φ` values with per-node standard deviations on a square lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct CharFuncGrid {
    spec: GridSpec,
    values: Vec<Complex64>,
    sigma: Vec<f64>,
    n_samples: usize,
    source: GridSource,
    radius_limit: Option<f64>,
}

/// Options for [`estimate_on_grid_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EstimateOptions {
    pub sigma: SigmaMethod,
    /// Skip nodes with `|β|` beyond this radius, leaving them at zero.
    /// Only meaningful when the grid is subsequently multiplied by a filter
    /// that vanishes identically outside the radius.
    pub radius: Option<f64>,
}

impl CharFuncGrid {
    /// Exact characteristic function of `state` on the lattice, `σ ≡ 0`.
    pub fn analytic(state: &AnalyticState, spec: GridSpec) -> Result<Self> {
        state.validate()?;
        Ok(Self::fill_hermitian(spec, GridSource::Analytic, 0, None, |beta| {
            (state.charfunc_unchecked(beta), 0.0)
        }))
    }

    /// Builds a Hermitian grid by evaluating `f` on the canonical half-plane
    /// and conjugating into the other half. The origin is pinned to 1 ± 0.
    pub(crate) fn fill_hermitian(
        spec: GridSpec,
        source: GridSource,
        n_samples: usize,
        radius_limit: Option<f64>,
        mut f: impl FnMut(Complex64) -> (Complex64, f64),
    ) -> Self {
        let n = spec.len();
        let half = spec.half();
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        let mut sigma = vec![0.0; n * n];
        for ir in 0..n {
            for ii in half..n {
                if ii == half && ir < half {
                    continue;
                }
                let idx = spec.index(ir, ii);
                let mirror = spec.index(n - 1 - ir, n - 1 - ii);
                if ir == half && ii == half {
                    values[idx] = Complex64::new(1.0, 0.0);
                    sigma[idx] = 0.0;
                    continue;
                }
                let (v, s) = f(spec.point(ir, ii));
                values[idx] = v;
                sigma[idx] = s;
                values[mirror] = v.conj();
                sigma[mirror] = s;
            }
        }
        CharFuncGrid {
            spec,
            values,
            sigma,
            n_samples,
            source,
            radius_limit,
        }
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>, sigma: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        CharFuncGrid {
            spec: self.spec,
            values,
            sigma,
            n_samples: self.n_samples,
            source: self.source,
            radius_limit: self.radius_limit,
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Smallest per-phase sample count of the source data (0 for analytic grids).
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn source(&self) -> GridSource {
        self.source
    }

    pub fn radius_limit(&self) -> Option<f64> {
        self.radius_limit
    }

    pub fn value(&self, i_re: usize, i_im: usize) -> Complex64 {
        self.values[self.spec.index(i_re, i_im)]
    }

    pub fn sigma_at(&self, i_re: usize, i_im: usize) -> f64 {
        self.sigma[self.spec.index(i_re, i_im)]
    }

    /// Value and sigma at the node nearest `beta`.
    pub fn lookup(&self, beta: Complex64) -> Result<(Complex64, f64)> {
        let (ir, ii) = self.spec.nearest_node(beta).ok_or_else(|| {
            Error::OutOfRange(format!(
                "beta = {beta} outside grid [-{0}, {0}]^2",
                self.spec.extent()
            ))
        })?;
        Ok((self.value(ir, ii), self.sigma_at(ir, ii)))
    }

    /// Largest `|Φ|` on the outer boundary of the lattice.
    pub fn boundary_max_abs(&self) -> f64 {
        let n = self.spec.len();
        let mut m = 0.0f64;
        for k in 0..n {
            for (ir, ii) in [(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
                m = m.max(self.value(ir, ii).norm());
            }
        }
        m
    }

    /// Writes a CSV dump: one `#` metadata line, a header, then
    /// `beta_r,beta_i,re,im,sigma` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(
            out,
            "# range={},step={},n_samples={},source={}",
            self.spec.range,
            self.spec.step,
            self.n_samples,
            self.source.as_str()
        )?;
        writeln!(out, "beta_r,beta_i,re,im,sigma")?;
        let n = self.spec.len();
        for ir in 0..n {
            for ii in 0..n {
                let b = self.spec.point(ir, ii);
                let v = self.value(ir, ii);
                writeln!(out, "{},{},{},{},{}", b.re, b.im, v.re, v.im, self.sigma_at(ir, ii))?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a dump written by [`CharFuncGrid::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines().enumerate();
        let fmt_err = |line: usize, message: String| Error::Format {
            line: line as u64 + 1,
            message,
        };
        let (_, meta) = lines
            .next()
            .ok_or_else(|| Error::EmptyInput(format!("{} is empty", path.display())))?;
        let meta = meta?;
        let meta = meta
            .strip_prefix("# ")
            .ok_or_else(|| fmt_err(0, "missing `# range=...` metadata line".into()))?;
        let mut range = None;
        let mut step = None;
        let mut n_samples = 0;
        let mut source = GridSource::Analytic;
        for kv in meta.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| fmt_err(0, format!("bad metadata entry `{kv}`")))?;
            let num = || v.parse::<f64>().map_err(|_| fmt_err(0, format!("bad value `{v}`")));
            match k {
                "range" => range = Some(num()?),
                "step" => step = Some(num()?),
                "n_samples" => n_samples = v.parse().map_err(|_| fmt_err(0, format!("bad value `{v}`")))?,
                "source" => {
                    source = match v {
                        "analytic" => GridSource::Analytic,
                        "sampled" => GridSource::Sampled,
                        _ => return Err(fmt_err(0, format!("unknown source `{v}`"))),
                    }
                }
                _ => {}
            }
        }
        let spec = GridSpec::new(
            range.ok_or_else(|| fmt_err(0, "missing range".into()))?,
            step.ok_or_else(|| fmt_err(0, "missing step".into()))?,
        )?;
        let n = spec.len();
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        let mut sigma = vec![0.0; n * n];
        let mut count = 0usize;
        for (lineno, line) in lines {
            let line = line?;
            if lineno == 1 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fmt_err(lineno, format!("non-numeric row `{line}`")))?;
            if fields.len() != 5 {
                return Err(fmt_err(lineno, format!("expected 5 fields, found {}", fields.len())));
            }
            let (ir, ii) = spec
                .nearest_node(Complex64::new(fields[0], fields[1]))
                .ok_or_else(|| fmt_err(lineno, "node outside declared grid".into()))?;
            let idx = spec.index(ir, ii);
            values[idx] = Complex64::new(fields[2], fields[3]);
            sigma[idx] = fields[4];
            count += 1;
        }
        if count != n * n {
            return Err(Error::Format {
                line: 0,
                message: format!("expected {} rows, found {count}", n * n),
            });
        }
        Ok(CharFuncGrid {
            spec,
            values,
            sigma,
            n_samples,
            source,
            radius_limit: None,
        })
    }
}

/// Samples `Φ` on every lattice node with empirical error estimates.
pub fn estimate_on_grid(dataset: &QuadratureDataset, spec: GridSpec) -> Result<CharFuncGrid> {
    estimate_on_grid_with(dataset, spec, EstimateOptions::default())
}

pub fn estimate_on_grid_with(
    dataset: &QuadratureDataset,
    spec: GridSpec,
    options: EstimateOptions,
) -> Result<CharFuncGrid> {
    if dataset.total_samples() == 0 {
        return Err(Error::EmptyInput("dataset has no samples".into()));
    }
    if let Some(r) = options.radius {
        if r.is_nan() || r <= 0.0 {
            return Err(Error::domain(format!("estimation radius must be > 0, got {r}")));
        }
    }
    let within = |beta: Complex64| options.radius.map_or(true, |r| beta.norm() <= r);

    // The largest |β| each phase must serve decides its table length.
    let n = spec.len();
    let half = spec.half();
    let mut t_max = vec![0.0f64; dataset.num_phases()];
    for ir in 0..n {
        for ii in half..n {
            let beta = spec.point(ir, ii);
            if !within(beta) {
                continue;
            }
            if let Some(l) = lookup(dataset, beta) {
                t_max[l.phase] = t_max[l.phase].max(l.t);
            }
        }
    }
    let tables: Vec<Option<EmpiricalCfTable>> = t_max
        .iter()
        .enumerate()
        .map(|(k, &tm)| (tm > 0.0).then(|| EmpiricalCfTable::build(dataset.samples(k), tm)))
        .collect();

    let grid = CharFuncGrid::fill_hermitian(
        spec,
        GridSource::Sampled,
        dataset.min_samples(),
        options.radius,
        |beta| {
            if !within(beta) {
                return (Complex64::new(0.0, 0.0), 0.0);
            }
            let l = lookup(dataset, beta).expect("origin handled by fill_hermitian");
            let table = tables[l.phase].as_ref().expect("table built for every used phase");
            let s = table.eval(l.t);
            let n_k = dataset.samples(l.phase).len() as f64;
            let scale = (l.t * l.t / 2.0).exp();
            let sigma = match options.sigma {
                SigmaMethod::Empirical => ((1.0 - s.norm_sqr()).max(0.0) / n_k).sqrt() * scale,
                SigmaMethod::Bound => scale / n_k.sqrt(),
            };
            let s = if l.conjugate { s.conj() } else { s };
            (s * scale, sigma)
        },
    );
    Ok(grid)
}

// ---------------------------------------------------------------------------
// Point evaluation
// ---------------------------------------------------------------------------

/// Anything that yields `Φ(β)` with a standard deviation at arbitrary `β`.
pub trait CharacteristicFunction {
    /// `(Φ(β), σ)`; `σ = 0` for exact sources.
    fn eval(&self, beta: Complex64) -> Result<(Complex64, f64)>;

    /// Whether values carry statistical noise.
    fn is_sampled(&self) -> bool;
}

impl CharacteristicFunction for AnalyticState {
    fn eval(&self, beta: Complex64) -> Result<(Complex64, f64)> {
        Ok((crate::states::charfunc_analytic(self, beta)?, 0.0))
    }

    fn is_sampled(&self) -> bool {
        false
    }
}

/// Nearest-node lookup; `β` off the lattice is an error.
impl CharacteristicFunction for CharFuncGrid {
    fn eval(&self, beta: Complex64) -> Result<(Complex64, f64)> {
        self.lookup(beta)
    }

    fn is_sampled(&self) -> bool {
        self.source == GridSource::Sampled
    }
}

/// Direct estimate with the plug-in standard error.
impl CharacteristicFunction for QuadratureDataset {
    fn eval(&self, beta: Complex64) -> Result<(Complex64, f64)> {
        Ok((estimate_charfunc(self, beta)?, empirical_std(self, beta)?))
    }

    fn is_sampled(&self) -> bool {
        true
    }
}

impl<T: CharacteristicFunction + ?Sized> CharacteristicFunction for &T {
    fn eval(&self, beta: Complex64) -> Result<(Complex64, f64)> {
        (**self).eval(beta)
    }

    fn is_sampled(&self) -> bool {
        (**self).is_sampled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{equally_spaced_phases, sample_quadratures, DataSource};
    use approx::assert_relative_eq;

    fn single(x: f64) -> QuadratureDataset {
        QuadratureDataset::new(vec![0.0], vec![vec![x]], None, DataSource::File).unwrap()
    }

    #[test]
    fn origin_is_exactly_one() {
        let d = sample_quadratures(&AnalyticState::thermal(1.0), &[0.3], 50, 1).unwrap();
        assert_eq!(estimate_charfunc(&d, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn single_zero_sample() {
        // β = i needs phase π/2 − π/2 = 0
        let v = estimate_charfunc(&single(0.0), Complex64::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(v.re, 0.5f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(v.re, 1.648721, epsilon = 1e-6);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn single_sample_phase_and_sign() {
        // β = i·t reads x at phase 0: e^{itx}e^{t²/2}; β = −i·t conjugates.
        let d = single(0.7);
        let t = 1.3;
        let expect = Complex64::from_polar((t * t / 2.0f64).exp(), t * 0.7);
        let up = estimate_charfunc(&d, Complex64::new(0.0, t)).unwrap();
        let down = estimate_charfunc(&d, Complex64::new(0.0, -t)).unwrap();
        assert!((up - expect).norm() < 1e-14);
        assert_eq!(down, up.conj());
    }

    #[test]
    fn bound_values() {
        assert_relative_eq!(
            stddev_bound(10_000, Complex64::new(2.0, 0.0)).unwrap(),
            (2.0f64).exp() / 100.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(stddev_bound(10_000, Complex64::new(0.0, 2.0)).unwrap(), 0.0738906, epsilon = 1e-7);
        assert_eq!(stddev_bound(1, Complex64::new(0.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(
            stddev_bound(100, Complex64::from_polar(1.0, 0.4)).unwrap(),
            0.1648721,
            epsilon = 1e-7
        );
        assert!(stddev_bound(0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn empirical_std_cases() {
        let constant =
            QuadratureDataset::new(vec![0.0], vec![vec![0.4; 1000]], None, DataSource::File).unwrap();
        assert!(empirical_std(&constant, Complex64::new(0.3, 1.2)).unwrap() < 1e-12);

        let vac = sample_quadratures(&AnalyticState::coherent(0.0, 0.0), &equally_spaced_phases(12), 10_000, 4)
            .unwrap();
        let beta = Complex64::new(1.0, 0.0);
        let e = empirical_std(&vac, beta).unwrap();
        assert!(e > 0.0 && e <= 0.5f64.exp() / 100.0, "e={e}");
        assert_eq!(empirical_std(&vac, Complex64::new(0.0, 0.0)).unwrap(), 0.0);

        assert!(matches!(
            empirical_std(&single(1.0), beta),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn table_matches_direct_sum() {
        let d = sample_quadratures(&AnalyticState::squeezed(0.2, 5.0), &equally_spaced_phases(12), 3_000, 21)
            .unwrap();
        let spec = GridSpec::new(4.0, 0.13).unwrap();
        let grid = estimate_on_grid(&d, spec).unwrap();
        let n = spec.len();
        for ir in (0..n).step_by(3) {
            for ii in (0..n).step_by(5) {
                let beta = spec.point(ir, ii);
                let direct = estimate_charfunc(&d, beta).unwrap();
                let scale = (beta.norm_sqr() / 2.0).exp();
                assert!(
                    (grid.value(ir, ii) - direct).norm() <= 1e-11 * scale,
                    "beta={beta}: {} vs {direct}",
                    grid.value(ir, ii)
                );
                let e = empirical_std(&d, beta).unwrap();
                assert!((grid.sigma_at(ir, ii) - e).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn grid_is_exactly_hermitian() {
        let d = sample_quadratures(&AnalyticState::FockOne, &equally_spaced_phases(5), 500, 2).unwrap();
        let spec = GridSpec::new(2.0, 0.1).unwrap();
        let g = estimate_on_grid(&d, spec).unwrap();
        let n = spec.len();
        for ir in 0..n {
            for ii in 0..n {
                let a = g.value(ir, ii);
                let b = g.value(n - 1 - ir, n - 1 - ii);
                if ir == spec.half() && ii == spec.half() {
                    continue;
                }
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), (-b.im).to_bits());
            }
        }
        assert_eq!(g.value(spec.half(), spec.half()), Complex64::new(1.0, 0.0));
        assert_eq!(g.sigma_at(spec.half(), spec.half()), 0.0);
    }

    #[test]
    fn analytic_passthrough() {
        let s = AnalyticState::squeezed(0.2, 5.0);
        let spec = GridSpec::new(2.0, 0.25).unwrap();
        let g = CharFuncGrid::analytic(&s, spec).unwrap();
        assert!(g.sigma().iter().all(|&x| x == 0.0));
        let v = g.lookup(Complex64::new(1.0, 0.0)).unwrap().0;
        assert_relative_eq!(v.re, 0.4f64.exp(), max_relative = 1e-15);
        assert!(g.lookup(Complex64::new(3.0, 0.0)).is_err());
    }

    #[test]
    fn radius_limit_zeroes_outside() {
        let d = sample_quadratures(&AnalyticState::thermal(0.5), &equally_spaced_phases(4), 200, 2).unwrap();
        let spec = GridSpec::new(2.0, 0.1).unwrap();
        let g = estimate_on_grid_with(
            &d,
            spec,
            EstimateOptions {
                radius: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(g.lookup(Complex64::new(1.5, 0.0)).unwrap().0, Complex64::new(0.0, 0.0));
        assert_ne!(g.lookup(Complex64::new(0.5, 0.0)).unwrap().0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn squeezed_estimate_within_five_bounds() {
        let d = sample_quadratures(
            &AnalyticState::squeezed(0.2, 5.0),
            &equally_spaced_phases(12),
            100_000,
            42,
        )
        .unwrap();
        let beta = Complex64::new(1.0, 0.0);
        let est = estimate_charfunc(&d, beta).unwrap();
        let tol = 5.0 * 0.5f64.exp() / (1e5f64).sqrt();
        assert!((est - Complex64::new(1.491825, 0.0)).norm() < tol, "est={est}");
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cf.csv");
        let g = CharFuncGrid::analytic(&AnalyticState::coherent(0.5, 0.1), GridSpec::new(1.0, 0.25).unwrap())
            .unwrap();
        g.write_csv(&p).unwrap();
        let back = CharFuncGrid::read_csv(&p).unwrap();
        assert_eq!(back, g);
    }
}

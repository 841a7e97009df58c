//! Reference states, simulated homodyne data and dataset files.
//!
//! Quadrature convention: vacuum noise has unit variance, so a Gaussian
//! state with phase-dependent quadrature variance `V(φ)` has the
//! characteristic function `exp(|β|²(1 - V(π/2 - arg β))/2)` along every
//! ray. With this convention the `e^{|β|²/2}` factor of the sampling
//! estimator exactly cancels vacuum noise.
//!
//! | state | `Φ(β)` | `V(φ)` |
//! |---|---|---|
//! | coherent `α₀` | `exp(βα₀* − β*α₀)` | 1 (mean `2 Re(α₀ e^{iφ})`) |
//! | thermal `n̄` | `exp(−n̄\|β\|²)` | `2n̄ + 1` |
//! | squeezed vacuum | `exp(β_r²(1−V_x)/2 + β_i²(1−V_p)/2)` | `V_x sin²φ + V_p cos²φ` |
//! | single photon | `1 − \|β\|²` | non-Gaussian, density `x² e^{−x²/2}/√(2π)` |

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of mixture weights.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Name of the generator recorded in dataset metadata.
pub const RNG_NAME: &str = "ChaCha8Rng (stream = phase index)";

/// A single-mode state with a closed-form characteristic function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticState {
    Coherent { amplitude: Complex64 },
    Thermal { mean_photons: f64 },
    /// Squeezed vacuum with quadrature variances `0 < vx < 1 < vp`.
    SqueezedVacuum { vx: f64, vp: f64 },
    /// The single-photon Fock state.
    FockOne,
    /// Convex combination of states; weights are positive and sum to one.
    Mixture { components: Vec<(f64, AnalyticState)> },
}

impl AnalyticState {
    pub fn coherent(re: f64, im: f64) -> Self {
        AnalyticState::Coherent {
            amplitude: Complex64::new(re, im),
        }
    }

    pub fn thermal(mean_photons: f64) -> Self {
        AnalyticState::Thermal { mean_photons }
    }

    pub fn squeezed(vx: f64, vp: f64) -> Self {
        AnalyticState::SqueezedVacuum { vx, vp }
    }

    /// Equal-weight mixture of the given states.
    pub fn equal_mixture(states: Vec<AnalyticState>) -> Self {
        let w = 1.0 / states.len() as f64;
        AnalyticState::Mixture {
            components: states.into_iter().map(|s| (w, s)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnalyticState::Coherent { amplitude } => {
                if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
                    return Err(Error::domain("coherent amplitude must be finite"));
                }
            }
            AnalyticState::Thermal { mean_photons } => {
                if !(mean_photons.is_finite() && *mean_photons >= 0.0) {
                    return Err(Error::domain(format!(
                        "thermal mean photon number must be >= 0, got {mean_photons}"
                    )));
                }
            }
            AnalyticState::SqueezedVacuum { vx, vp } => {
                if !(vx.is_finite() && vp.is_finite() && 0.0 < *vx && *vx < 1.0 && 1.0 < *vp) {
                    return Err(Error::domain(format!(
                        "squeezed vacuum requires 0 < vx < 1 < vp, got vx={vx}, vp={vp}"
                    )));
                }
            }
            AnalyticState::FockOne => {}
            AnalyticState::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::domain("mixture has no components"));
                }
                let mut total = 0.0;
                for (w, s) in components {
                    if !(w.is_finite() && *w > 0.0) {
                        return Err(Error::domain(format!("mixture weight must be > 0, got {w}")));
                    }
                    s.validate()?;
                    total += w;
                }
                if (total - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::domain(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the state is a classical mixture of coherent states
    /// (non-negative regular or delta-like P function).
    pub fn is_classical(&self) -> bool {
        match self {
            AnalyticState::Coherent { .. } | AnalyticState::Thermal { .. } => true,
            AnalyticState::SqueezedVacuum { .. } | AnalyticState::FockOne => false,
            AnalyticState::Mixture { components } => components.iter().all(|(_, s)| s.is_classical()),
        }
    }

    /// Whether every quadrature distribution is a single Gaussian.
    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            AnalyticState::Coherent { .. }
                | AnalyticState::Thermal { .. }
                | AnalyticState::SqueezedVacuum { .. }
        )
    }

    /// Evaluates the characteristic function without re-validating parameters.
    pub(crate) fn charfunc_unchecked(&self, beta: Complex64) -> Complex64 {
        let r2 = beta.norm_sqr();
        match self {
            AnalyticState::Coherent { amplitude } => {
                // βα₀* − β*α₀ = 2i Im(βα₀*)
                let z = beta * amplitude.conj();
                Complex64::from_polar(1.0, 2.0 * z.im)
            }
            AnalyticState::Thermal { mean_photons } => Complex64::new((-mean_photons * r2).exp(), 0.0),
            AnalyticState::SqueezedVacuum { vx, vp } => {
                // (β+β*)² = 4β_r², (β−β*)² = −4β_i²
                let sum_sq = 4.0 * beta.re * beta.re;
                let diff_sq = -4.0 * beta.im * beta.im;
                let exponent = -sum_sq * vx / 8.0 + diff_sq * vp / 8.0 + r2 / 2.0;
                Complex64::new(exponent.exp(), 0.0)
            }
            AnalyticState::FockOne => Complex64::new(1.0 - r2, 0.0),
            AnalyticState::Mixture { components } => components
                .iter()
                .map(|(w, s)| s.charfunc_unchecked(beta) * *w)
                .sum(),
        }
    }

    /// Quadrature mean at local-oscillator phase `phi`.
    pub fn quadrature_mean(&self, phi: f64) -> Result<f64> {
        self.validate()?;
        match self {
            AnalyticState::Coherent { amplitude } => {
                Ok(2.0 * (amplitude * Complex64::from_polar(1.0, phi)).re)
            }
            AnalyticState::Thermal { .. } | AnalyticState::SqueezedVacuum { .. } => Ok(0.0),
            _ => Err(Error::Unsupported(format!(
                "quadrature mean is only tabulated for Gaussian states, not {self}"
            ))),
        }
    }

    fn draw<R: Rng>(&self, phi: f64, rng: &mut R) -> f64 {
        match self {
            AnalyticState::Coherent { .. }
            | AnalyticState::Thermal { .. }
            | AnalyticState::SqueezedVacuum { .. } => {
                let mean = self.quadrature_mean(phi).expect("validated gaussian");
                let var = quadrature_variance(self, phi).expect("validated gaussian");
                Normal::new(mean, var.sqrt())
                    .expect("finite variance")
                    .sample(rng)
            }
            AnalyticState::FockOne => fock_sampler().draw(rng),
            AnalyticState::Mixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, s) in components {
                    acc += w;
                    if u < acc {
                        return s.draw(phi, rng);
                    }
                }
                components.last().expect("non-empty mixture").1.draw(phi, rng)
            }
        }
    }
}

impl fmt::Display for AnalyticState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticState::Coherent { amplitude } => {
                write!(f, "coherent:{},{}", amplitude.re, amplitude.im)
            }
            AnalyticState::Thermal { mean_photons } => write!(f, "thermal:{mean_photons}"),
            AnalyticState::SqueezedVacuum { vx, vp } => write!(f, "squeezed:{vx},{vp}"),
            AnalyticState::FockOne => write!(f, "fock1"),
            AnalyticState::Mixture { components } => {
                for (i, (w, s)) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w}*{s}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for AnalyticState {
    type Err = Error;

    /// Parses `coherent:RE[,IM]`, `thermal:NBAR`, `squeezed:VX,VP`,
    /// `fock1`, `vacuum`, or a mixture `W1*SPEC1+W2*SPEC2+...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts = split_mixture(s);
        let state = if parts.len() > 1 || s.contains('*') {
            let mut components = Vec::with_capacity(parts.len());
            for part in parts {
                let (w, spec) = part
                    .split_once('*')
                    .ok_or_else(|| Error::domain(format!("mixture component `{part}` needs WEIGHT*STATE")))?;
                let w = parse_f64(w)?;
                components.push((w, parse_pure(spec.trim())?));
            }
            AnalyticState::Mixture { components }
        } else {
            parse_pure(s)?
        };
        state.validate()?;
        Ok(state)
    }
}

fn split_mixture(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        // a '+' directly after an exponent marker belongs to the number
        if b == b'+' && i > 0 && !matches!(bytes[i - 1], b'e' | b'E') {
            parts.push(s[start..i].trim());
            start = i + 1;
        }
    }
    parts.push(s[start..].trim());
    parts
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::domain(format!("`{s}` is not a number")))
}

fn parse_pure(s: &str) -> Result<AnalyticState> {
    let (name, args) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), a.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?),
        None => (s, Vec::new()),
    };
    let state = match (name.to_ascii_lowercase().as_str(), args.as_slice()) {
        ("coherent", [re]) => AnalyticState::coherent(*re, 0.0),
        ("coherent", [re, im]) => AnalyticState::coherent(*re, *im),
        ("vacuum", []) => AnalyticState::coherent(0.0, 0.0),
        ("thermal", [n]) => AnalyticState::thermal(*n),
        ("squeezed", [vx, vp]) => AnalyticState::squeezed(*vx, *vp),
        ("fock1", []) | ("fock", [1.0]) => AnalyticState::FockOne,
        _ => {
            return Err(Error::domain(format!(
                "unrecognised state `{s}` (expected coherent:RE[,IM], thermal:N, squeezed:VX,VP, fock1)"
            )))
        }
    };
    Ok(state)
}

/// Characteristic function `Φ(β)` of an analytic state.
pub fn charfunc_analytic(state: &AnalyticState, beta: Complex64) -> Result<Complex64> {
    state.validate()?;
    Ok(state.charfunc_unchecked(beta))
}

/// Quadrature variance at phase `phi` (vacuum = 1).
pub fn quadrature_variance(state: &AnalyticState, phi: f64) -> Result<f64> {
    state.validate()?;
    match state {
        AnalyticState::Coherent { .. } => Ok(1.0),
        AnalyticState::Thermal { mean_photons } => Ok(2.0 * mean_photons + 1.0),
        AnalyticState::SqueezedVacuum { vx, vp } => {
            let (s, c) = phi.sin_cos();
            Ok(vx * s * s + vp * c * c)
        }
        other => Err(Error::Unsupported(format!(
            "{other} has non-Gaussian quadrature statistics"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Single-photon quadrature sampler
// ---------------------------------------------------------------------------

const FOCK_NODES: usize = 4096;
const FOCK_SPAN: f64 = 8.0;

/// Single-photon quadrature density `x² e^{−x²/2}/√(2π)`.
pub fn fock_one_density(x: f64) -> f64 {
    x * x * (-x * x / 2.0).exp() / (2.0 * PI).sqrt()
}

/// Closed-form CDF of [`fock_one_density`]: `Φ_N(x) − x φ_N(x)`.
fn fock_one_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2)) - x * (-x * x / 2.0).exp() / (2.0 * PI).sqrt()
}

/// Inverse-CDF sampler on a fixed table over `[-8, 8]`.
struct InverseCdfTable {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdfTable {
    fn fock_one() -> Self {
        let nodes: Vec<f64> = (0..FOCK_NODES)
            .map(|i| -FOCK_SPAN + 2.0 * FOCK_SPAN * i as f64 / (FOCK_NODES - 1) as f64)
            .collect();
        let raw: Vec<f64> = nodes.iter().map(|&x| fock_one_cdf(x)).collect();
        let (lo, hi) = (raw[0], raw[FOCK_NODES - 1]);
        let cdf = raw.iter().map(|c| (c - lo) / (hi - lo)).collect();
        InverseCdfTable { nodes, cdf }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        // first index with cdf > u
        let j = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        if c1 > c0 {
            x0 + (x1 - x0) * (u - c0) / (c1 - c0)
        } else {
            x0
        }
    }
}

fn fock_sampler() -> &'static InverseCdfTable {
    static TABLE: OnceLock<InverseCdfTable> = OnceLock::new();
    TABLE.get_or_init(InverseCdfTable::fock_one)
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic,
    File,
}

/// Homodyne samples grouped by local-oscillator phase.
///
/// Phases are strictly increasing and lie in `[0, π)`; every phase carries
/// at least one sample. Samples at other phases follow from
/// `x[φ ± π] = −x[φ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureDataset {
    phases: Vec<f64>,
    samples: Vec<Vec<f64>>,
    seed: Option<u64>,
    source: DataSource,
}

impl QuadratureDataset {
    pub fn new(
        phases: Vec<f64>,
        samples: Vec<Vec<f64>>,
        seed: Option<u64>,
        source: DataSource,
    ) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::EmptyInput("dataset has no phases".into()));
        }
        if phases.len() != samples.len() {
            return Err(Error::domain(format!(
                "{} phases but {} sample groups",
                phases.len(),
                samples.len()
            )));
        }
        let mut order: Vec<usize> = (0..phases.len()).collect();
        order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
        let mut sorted_phases = Vec::with_capacity(phases.len());
        let mut sorted_samples = Vec::with_capacity(phases.len());
        let mut samples: Vec<Option<Vec<f64>>> = samples.into_iter().map(Some).collect();
        for i in order {
            let phi = phases[i];
            check_phase(phi)?;
            if sorted_phases.last() == Some(&phi) {
                return Err(Error::domain(format!("phase {phi} appears more than once")));
            }
            let group = samples[i].take().expect("each group moved once");
            if group.is_empty() {
                return Err(Error::EmptyInput(format!("phase {phi} has no samples")));
            }
            if let Some(bad) = group.iter().find(|x| !x.is_finite()) {
                return Err(Error::domain(format!("non-finite sample {bad} at phase {phi}")));
            }
            sorted_phases.push(phi);
            sorted_samples.push(group);
        }
        Ok(QuadratureDataset {
            phases: sorted_phases,
            samples: sorted_samples,
            seed,
            source,
        })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn samples(&self, phase_index: usize) -> &[f64] {
        &self.samples[phase_index]
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn source(&self) -> DataSource {
        self.source
    }

    pub fn num_phases(&self) -> usize {
        self.phases.len()
    }

    pub fn total_samples(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    /// Smallest per-phase sample count.
    pub fn min_samples(&self) -> usize {
        self.samples.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Nearest recorded phase to `phi` (any real angle), folded with the
    /// rule `x[φ − π] = −x[φ]`. Returns the phase index and whether the
    /// samples must be negated.
    pub fn select_phase(&self, phi: f64) -> (usize, bool) {
        let mut best = (0, false);
        let mut best_dist = f64::INFINITY;
        for (k, &pk) in self.phases.iter().enumerate() {
            let diff = phi - pk;
            let shifts = (diff / PI).round();
            let dist = (diff - shifts * PI).abs();
            if dist < best_dist {
                best_dist = dist;
                best = (k, (shifts as i64).rem_euclid(2) == 1);
            }
        }
        best
    }

    /// Bootstrap replica: every phase group resampled with replacement.
    pub fn resample<R: Rng>(&self, rng: &mut R) -> QuadratureDataset {
        let samples = self
            .samples
            .iter()
            .map(|g| (0..g.len()).map(|_| g[rng.random_range(0..g.len())]).collect())
            .collect();
        QuadratureDataset {
            phases: self.phases.clone(),
            samples,
            seed: self.seed,
            source: self.source,
        }
    }
}

fn check_phase(phi: f64) -> Result<()> {
    if !(phi.is_finite() && (0.0..PI).contains(&phi)) {
        return Err(Error::domain(format!("phase {phi} outside [0, pi)")));
    }
    Ok(())
}

/// `count` equally spaced phases `kπ/count`, `k = 0..count`.
pub fn equally_spaced_phases(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * PI / count as f64).collect()
}

/// Simulated balanced homodyne detection.
///
/// Each phase draws from its own ChaCha stream (stream id = phase index),
/// so the result depends only on `(state, phases, n_per_phase, seed)`.
pub fn sample_quadratures(
    state: &AnalyticState,
    phases: &[f64],
    n_per_phase: usize,
    seed: u64,
) -> Result<QuadratureDataset> {
    state.validate()?;
    if phases.is_empty() {
        return Err(Error::EmptyInput("no phases requested".into()));
    }
    if n_per_phase == 0 {
        return Err(Error::domain("n_per_phase must be >= 1"));
    }
    for &phi in phases {
        check_phase(phi)?;
    }
    let samples = phases
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            (0..n_per_phase).map(|_| state.draw(phi, &mut rng)).collect()
        })
        .collect();
    QuadratureDataset::new(phases.to_vec(), samples, Some(seed), DataSource::Synthetic)
}

/// JSON sidecar stored next to a dataset CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: Option<u64>,
    pub state: Option<String>,
    pub n_per_phase: usize,
    pub phases: usize,
    pub generator: String,
}

/// Path of the JSON sidecar belonging to a data file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `phase,x` CSV rows. Values use the shortest representation that
/// parses back to the identical `f64`.
pub fn save_dataset(dataset: &QuadratureDataset, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "phase,x")?;
    for (phi, group) in dataset.phases.iter().zip(&dataset.samples) {
        for x in group {
            writeln!(out, "{phi},{x}")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes the dataset and its JSON sidecar.
pub fn save_dataset_with_meta(
    dataset: &QuadratureDataset,
    state: Option<&AnalyticState>,
    path: &Path,
) -> Result<DatasetMeta> {
    save_dataset(dataset, path)?;
    let meta = DatasetMeta {
        seed: dataset.seed,
        state: state.map(ToString::to_string),
        n_per_phase: dataset.min_samples(),
        phases: dataset.num_phases(),
        generator: RNG_NAME.to_string(),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

/// Reads a `phase,x` CSV. Rows with the same phase are grouped; a JSON
/// sidecar, when present, supplies the seed and marks the data synthetic.
pub fn load_dataset(path: &Path) -> Result<QuadratureDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut phases: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut header_seen = false;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if !header_seen {
            header_seen = true;
            if record.len() == 2 && &record[0] == "phase" && &record[1] == "x" {
                continue;
            }
            return Err(Error::Format {
                line,
                message: "expected header `phase,x`".into(),
            });
        }
        if record.len() != 2 {
            return Err(Error::Format {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let parse = |field: &str, what: &str| {
            field.parse::<f64>().map_err(|_| Error::Format {
                line,
                message: format!("{what} `{field}` is not a number"),
            })
        };
        let phi = parse(&record[0], "phase")?;
        let x = parse(&record[1], "sample")?;
        if check_phase(phi).is_err() {
            return Err(Error::Format {
                line,
                message: format!("phase {phi} outside [0, pi)"),
            });
        }
        if !x.is_finite() {
            return Err(Error::Format {
                line,
                message: format!("sample {x} is not finite"),
            });
        }
        match phases.iter().position(|&p| p.to_bits() == phi.to_bits()) {
            Some(k) => groups[k].push(x),
            None => {
                phases.push(phi);
                groups.push(vec![x]);
            }
        }
    }
    if phases.is_empty() {
        return Err(Error::EmptyInput(format!("{} contains no samples", path.display())));
    }
    let sidecar = sidecar_path(path);
    let (seed, source) = match std::fs::read_to_string(&sidecar) {
        Ok(text) => {
            let meta: DatasetMeta = serde_json::from_str(&text)?;
            (meta.seed, DataSource::Synthetic)
        }
        Err(_) => (None, DataSource::File),
    };
    QuadratureDataset::new(phases, groups, seed, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sq() -> AnalyticState {
        AnalyticState::squeezed(0.2, 5.0)
    }

    #[test]
    fn squeezed_charfunc_on_real_axis() {
        let v = charfunc_analytic(&sq(), Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.4f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(v.re, 1.491825, epsilon = 1e-6);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn normalisation_at_origin() {
        let states = [
            sq(),
            AnalyticState::coherent(0.7, -1.1),
            AnalyticState::thermal(2.0),
            AnalyticState::FockOne,
            AnalyticState::equal_mixture(vec![
                AnalyticState::coherent(1.5, 0.0),
                AnalyticState::coherent(-1.5, 0.0),
            ]),
        ];
        for s in &states {
            assert_eq!(charfunc_analytic(s, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn thermal_and_fock_values() {
        let beta = Complex64::from_polar(1.0, 0.3);
        let t = charfunc_analytic(&AnalyticState::thermal(1.0), beta).unwrap();
        assert_relative_eq!(t.re, (-1.0f64).exp(), max_relative = 1e-14);
        let f = charfunc_analytic(&AnalyticState::FockOne, Complex64::from_polar(2.0, 1.1)).unwrap();
        assert_relative_eq!(f.re, -3.0, epsilon = 1e-14);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(charfunc_analytic(&AnalyticState::squeezed(1.2, 5.0), Complex64::default()).is_err());
        assert!(charfunc_analytic(&AnalyticState::squeezed(0.2, 0.9), Complex64::default()).is_err());
        assert!(charfunc_analytic(&AnalyticState::thermal(-0.1), Complex64::default()).is_err());
        let bad_mix = AnalyticState::Mixture {
            components: vec![(0.3, AnalyticState::FockOne), (0.3, AnalyticState::FockOne)],
        };
        assert!(bad_mix.validate().is_err());
    }

    #[test]
    fn variances() {
        assert_relative_eq!(quadrature_variance(&sq(), PI / 2.0).unwrap(), 0.2, epsilon = 1e-15);
        assert_relative_eq!(quadrature_variance(&sq(), 0.0).unwrap(), 5.0, epsilon = 1e-15);
        assert_eq!(quadrature_variance(&AnalyticState::coherent(3.0, 1.0), 0.4).unwrap(), 1.0);
        assert_eq!(quadrature_variance(&AnalyticState::thermal(1.0), 2.0).unwrap(), 3.0);
        assert!(matches!(
            quadrature_variance(&AnalyticState::FockOne, 0.0),
            Err(Error::Unsupported(_))
        ));
    }

    /// Consistency oracle: E[e^{itx}] e^{t²/2} for x ~ N(μ, V) must equal
    /// the analytic Φ at β = t e^{i(π/2 − φ)}.
    #[test]
    fn gaussian_variance_and_mean_match_charfunc() {
        let states = [sq(), AnalyticState::thermal(0.7), AnalyticState::coherent(0.4, -0.9)];
        for s in &states {
            for &phi in &[0.0, 0.3, 1.2, PI / 2.0, 2.9] {
                for &t in &[0.3, 1.0, 1.7] {
                    let v = quadrature_variance(s, phi).unwrap();
                    let mu = s.quadrature_mean(phi).unwrap();
                    let predicted = Complex64::from_polar((-t * t * v / 2.0 + t * t / 2.0).exp(), t * mu);
                    let beta = Complex64::from_polar(t, PI / 2.0 - phi);
                    let exact = charfunc_analytic(s, beta).unwrap();
                    assert!((predicted - exact).norm() < 1e-12 * exact.norm().max(1.0), "{s} phi={phi} t={t}");
                }
            }
        }
    }

    #[test]
    fn fock_density_normalised_with_variance_three() {
        // composite Simpson on [-12, 12]
        let n = 24_000;
        let h = 24.0 / n as f64;
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let mut s = f(-12.0) + f(12.0);
            for i in 1..n {
                let x = -12.0 + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            s * h / 3.0
        };
        assert_relative_eq!(simpson(&fock_one_density), 1.0, epsilon = 1e-12);
        assert_relative_eq!(simpson(&|x| x * x * fock_one_density(x)), 3.0, epsilon = 1e-11);
    }

    #[test]
    fn sampling_is_deterministic() {
        let phases = equally_spaced_phases(3);
        let a = sample_quadratures(&sq(), &phases, 500, 7).unwrap();
        let b = sample_quadratures(&sq(), &phases, 500, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_quadratures(&sq(), &phases, 500, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn squeezed_sample_variance() {
        let n = 100_000;
        let d = sample_quadratures(&sq(), &[PI / 2.0], n, 11).unwrap();
        let xs = d.samples(0);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // chi-square: sd of the sample variance is V·√(2/(n−1))
        let se = 0.2 * (2.0 / (n - 1) as f64).sqrt();
        assert!((var - 0.2).abs() < 5.0 * se, "var={var}");
    }

    #[test]
    fn coherent_sample_mean() {
        let n = 100_000;
        let d = sample_quadratures(&AnalyticState::coherent(1.0, 0.0), &[0.0], n, 3).unwrap();
        let mean = d.samples(0).iter().sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 5.0 * (1.0 / n as f64).sqrt(), "mean={mean}");
    }

    #[test]
    fn fock_samples_have_variance_three() {
        let n = 200_000;
        let d = sample_quadratures(&AnalyticState::FockOne, &[0.5], n, 5).unwrap();
        let xs = d.samples(0);
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // E x⁴ = 15 under this density, so Var(x²) = 6
        assert!((m2 - 3.0).abs() < 5.0 * (6.0 / n as f64).sqrt(), "m2={m2}");
        assert!(xs.iter().all(|x| x.abs() <= FOCK_SPAN));
    }

    #[test]
    fn sampling_errors() {
        assert!(matches!(sample_quadratures(&sq(), &[], 10, 1), Err(Error::EmptyInput(_))));
        assert!(sample_quadratures(&sq(), &[3.5], 10, 1).is_err());
        assert!(sample_quadratures(&sq(), &[0.0], 0, 1).is_err());
    }

    #[test]
    fn phase_selection_folds_with_sign() {
        let d = QuadratureDataset::new(
            equally_spaced_phases(12),
            vec![vec![0.0]; 12],
            None,
            DataSource::File,
        )
        .unwrap();
        assert_eq!(d.select_phase(PI / 2.0), (6, false));
        assert_eq!(d.select_phase(-0.01), (0, false));
        // -π/4 is π/4 away from phase 3π/4 shifted by -π
        assert_eq!(d.select_phase(-PI / 4.0), (9, true));
        assert_eq!(d.select_phase(PI - 0.01), (0, true));
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for text in [
            "squeezed:0.2,5",
            "coherent:1,0",
            "thermal:1",
            "fock1",
            "0.5*coherent:1.5,0+0.5*coherent:-1.5,0",
        ] {
            let s: AnalyticState = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
            assert_eq!(s.to_string().parse::<AnalyticState>().unwrap(), s);
        }
        assert!("squeezed:2,5".parse::<AnalyticState>().is_err());
        assert!("banana".parse::<AnalyticState>().is_err());
    }

    #[test]
    fn dataset_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = sample_quadratures(&sq(), &equally_spaced_phases(3), 200, 9).unwrap();
        save_dataset_with_meta(&d, Some(&sq()), &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, d);

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "phase,x\n0.1,0.5\n3.5,1.0\n").unwrap();
        match load_dataset(&bad) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&bad, "phase,x\n0.1,abc\n").unwrap();
        assert!(matches!(load_dataset(&bad), Err(Error::Format { line: 2, .. })));
        std::fs::write(&bad, "phase,x\n0.1\n").unwrap();
        assert!(matches!(load_dataset(&bad), Err(Error::Format { line: 2, .. })));
        std::fs::write(&bad, "").unwrap();
        assert!(matches!(load_dataset(&bad), Err(Error::EmptyInput(_))));
    }
}

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nonclassical::bochner::{determinant_test, modulus_test, scan_grid, scan_line, BochnerVerdict};
use nonclassical::charfunc::{estimate_on_grid_with, CharFuncGrid, EstimateOptions, SigmaMethod};
use nonclassical::filters::{
    check_conditions, lemma1_bound_check, ConditionReport, ConditionTolerances, FilterKind, LemmaReport, NCFilter,
    RadialTable,
};
use nonclassical::grid::GridSpec;
use nonclassical::quasiprob::{
    apply_filter, cf_cross_section, cross_section, fourier_to_quasiprob, normalization_check, normalization_ok,
    propagate_error, section_direction, significance, write_section_csv, ErrorMethod, Significance, TransformOptions,
};
use nonclassical::states::{
    equally_spaced_phases, sample_quadratures, save_dataset, AnalyticState, DatasetMeta, QuadratureDataset, RNG_NAME,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ErrorChoice, Options, TestChoice};
use crate::error::{CliError, StageExt};
use crate::output::Output;

pub const DEFAULT_STATE: &str = "squeezed:0.2,5.0";
pub const DEFAULT_WIDTHS: [f64; 2] = [1.2, 1.5];
pub const DEFAULT_PHASES: usize = 12;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_REPLICATES: usize = 100;
const CHECK_WIDTHS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
const CHECK_S: [f64; 3] = [-1.0, 0.0, 0.5];
/// Keeps the bootstrap stream apart from the sampling streams of the same seed.
const BOOTSTRAP_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

// ---------------------------------------------------------------------------
// Sources

pub enum Source {
    Analytic(AnalyticState),
    Sampled(QuadratureDataset),
}

impl Source {
    /// `--data`, or `--state` (sampled when `--samples` is given).
    pub fn resolve(opts: &mut Options) -> Result<Source, CliError> {
        match (&opts.state, &opts.data) {
            (Some(_), Some(_)) => Err(CliError::usage("give either --state or --data, not both")),
            (None, Some(path)) => Ok(Source::Sampled(
                nonclassical::states::load_dataset(path).stage("load")?,
            )),
            (None, None) => Err(CliError::usage("missing --state or --data")),
            (Some(spec), None) => {
                let state = parse_state(spec)?;
                match opts.samples {
                    None => Ok(Source::Analytic(state)),
                    Some(n) => {
                        let phases = *opts.phases.get_or_insert(DEFAULT_PHASES);
                        let seed = opts.seed_or_draw();
                        let data = sample_quadratures(&state, &equally_spaced_phases(phases), n, seed).stage("sample")?;
                        Ok(Source::Sampled(data))
                    }
                }
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Source::Analytic(_) => "analytic",
            Source::Sampled(_) => "sampled",
        }
    }
}

fn parse_state(spec: &str) -> Result<AnalyticState, CliError> {
    spec.parse().map_err(|e| CliError::usage(format!("--state: {e}")))
}

fn default_state(opts: &mut Options) {
    if opts.state.is_none() && opts.data.is_none() {
        opts.state = Some(DEFAULT_STATE.into());
    }
}

/// Parses `re,im;re,im;...`.
pub fn parse_points(text: &str) -> Result<Vec<Complex64>, CliError> {
    let bad = |p: &str| CliError::usage(format!("--points: `{p}` is not `re,im`"));
    let points = text
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (re, im) = p.split_once(',').ok_or_else(|| bad(p))?;
            let re: f64 = re.trim().parse().map_err(|_| bad(p))?;
            let im: f64 = im.trim().parse().map_err(|_| bad(p))?;
            if re.is_finite() && im.is_finite() {
                Ok(Complex64::new(re, im))
            } else {
                Err(bad(p))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() {
        return Err(CliError::usage("--points: no points given"));
    }
    Ok(points)
}

fn filters(opts: &Options, default: &[f64]) -> Result<Vec<NCFilter>, CliError> {
    let kind = opts.filter_kind();
    opts.widths(default)?
        .into_iter()
        .map(|w| NCFilter::new(kind, w).stage("filter"))
        .collect()
}

/// `Φ` on the β lattice. Sampled grids skip nodes outside the support of
/// every filter.
fn charfunc_grid(source: &Source, beta: GridSpec, filters: &[NCFilter], sigma: SigmaMethod) -> Result<CharFuncGrid, CliError> {
    match source {
        Source::Analytic(state) => CharFuncGrid::analytic(state, beta).stage("estimate"),
        Source::Sampled(data) => {
            let radius = filters
                .iter()
                .map(NCFilter::support_radius)
                .collect::<Option<Vec<f64>>>()
                .map(|r| r.into_iter().fold(0.0, f64::max))
                .filter(|&r| r < beta.extent() * SQRT_2);
            estimate_on_grid_with(data, beta, EstimateOptions { sigma, radius }).stage("estimate")
        }
    }
}

fn describe(sig: &Significance) -> String {
    let ratio = if sig.infinite {
        "exact".to_string()
    } else {
        format!("{:.2} sigma", sig.ratio)
    };
    format!(
        "min P = {:.6} at ({:.3}, {:.3}), {ratio}",
        sig.min_value, sig.location.re, sig.location.im
    )
}

// ---------------------------------------------------------------------------
// simulate

pub fn simulate(mut opts: Options) -> Result<(), CliError> {
    let spec = opts
        .state
        .clone()
        .ok_or_else(|| CliError::usage("simulate needs --state"))?;
    let state = parse_state(&spec)?;
    let n = *opts.samples.get_or_insert(DEFAULT_SAMPLES);
    let phases = *opts.phases.get_or_insert(DEFAULT_PHASES);
    let seed = opts.seed_or_draw();
    let data = sample_quadratures(&state, &equally_spaced_phases(phases), n, seed).stage("sample")?;

    let out = Output::create("simulate", &opts)?;
    let path = out.path("quadratures.csv");
    save_dataset(&data, &path).stage("write")?;
    let meta = DatasetMeta {
        seed: Some(seed),
        state: Some(state.to_string()),
        n_per_phase: n,
        phases,
        generator: RNG_NAME.into(),
    };
    out.sidecar(&path, &meta)?;
    println!(
        "{}: {phases} phases x {n} samples = {} rows, seed {seed}",
        path.display(),
        data.total_samples()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// pipeline

#[derive(Serialize)]
struct SectionMeta {
    filter: FilterKind,
    width: f64,
    angle: f64,
    /// `α = t · direction`.
    direction: Complex64,
}

#[derive(Serialize)]
struct WidthResult {
    width: f64,
    filter: String,
    verdict: &'static str,
    significant: bool,
    #[serde(flatten)]
    significance: Significance,
    normalization: f64,
    normalization_ok: bool,
    boundary_max: f64,
    map: String,
    section: String,
}

#[derive(Serialize)]
struct PipelineReport {
    source: &'static str,
    error_method: ErrorMethod,
    significance_level: f64,
    nonclassical: bool,
    widths: Vec<WidthResult>,
}

pub fn pipeline(mut opts: Options) -> Result<(), CliError> {
    let source = Source::resolve(&mut opts)?;
    let beta = opts.beta_grid()?;
    let alpha = opts.alpha_grid()?;
    let filters = filters(&opts, &DEFAULT_WIDTHS)?;
    let k = opts.significance_level()?;
    let choice = opts.error_method.unwrap_or(ErrorChoice::Empirical);
    let method = match (choice, &source) {
        (ErrorChoice::Bootstrap, Source::Analytic(_)) => {
            return Err(CliError::usage("bootstrap errors need sampled data (--data, or --state with --samples)"))
        }
        (ErrorChoice::Bootstrap, Source::Sampled(_)) => {
            let seed = opts.seed_or_draw() ^ BOOTSTRAP_SALT;
            ErrorMethod::bootstrap(opts.bootstrap.unwrap_or(DEFAULT_REPLICATES), seed)
        }
        _ => ErrorMethod::Independent,
    };
    let sigma = if choice == ErrorChoice::Bound {
        SigmaMethod::Bound
    } else {
        SigmaMethod::Empirical
    };
    let transform = TransformOptions {
        allow_truncation: opts.allow_truncation.unwrap_or(false),
    };
    let angle = opts.angle.unwrap_or(0.0);

    let out = Output::create("pipeline", &opts)?;
    let cf = charfunc_grid(&source, beta, &filters, sigma)?;
    let ts = alpha.coords();
    let mut results = Vec::with_capacity(filters.len());
    for filter in &filters {
        let w = filter.parameter();
        let filtered = apply_filter(&cf, filter).stage("filter")?;
        let mut map = fourier_to_quasiprob(&filtered, alpha, transform).stage("transform")?;
        if let (ErrorMethod::Bootstrap { .. }, Source::Sampled(data)) = (method, &source) {
            let s = propagate_error(&filtered, alpha, method, Some(data)).stage("error")?;
            map = map.with_sigma(s, method).stage("error")?;
        }
        let sig = significance(&map);
        let total = normalization_check(&map);
        if !normalization_ok(total) {
            log::warn!("w = {w}: P sums to {total:.4} on the alpha grid; widen --alpha-range");
        }
        let section = cross_section(&filtered, angle, &ts).stage("section")?;

        let map_path = out.path(&format!("p_w{w}.csv"));
        map.write_csv(&map_path).stage("write")?;
        out.sidecar(&map_path, map.meta())?;
        let section_path = out.path(&format!("section_w{w}.csv"));
        write_section_csv(&section, &section_path).stage("write")?;
        out.sidecar(
            &section_path,
            &SectionMeta {
                filter: filter.kind(),
                width: w,
                angle,
                direction: section_direction(angle),
            },
        )?;

        println!("{}: {} -> {}", filter.label(), describe(&sig), sig.verdict(k));
        results.push(WidthResult {
            width: w,
            filter: filter.label(),
            verdict: sig.verdict(k),
            significant: sig.is_significant(k),
            significance: sig,
            normalization: total,
            normalization_ok: normalization_ok(total),
            boundary_max: filtered.boundary_max(),
            map: file_name(&map_path),
            section: file_name(&section_path),
        });
    }
    let report = PipelineReport {
        source: source.kind(),
        error_method: method,
        significance_level: k,
        nonclassical: results.iter().any(|r| r.significant),
        widths: results,
    };
    let path = out.report("verdict.json", &report)?;
    println!(
        "{}: {}",
        path.display(),
        if report.nonclassical { "nonclassical" } else { "no significant negativity" }
    );
    Ok(())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// figures

#[derive(Serialize)]
struct CurveMeta {
    source: &'static str,
    filter: FilterKind,
    width: f64,
    axis: &'static str,
    angle: f64,
}

fn write_cf_section(rows: &[(f64, Complex64, f64)], path: &Path) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        stage: "write",
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "t,re,im,sigma").map_err(io)?;
    for (t, v, s) in rows {
        writeln!(w, "{t},{},{},{s}", v.re, v.im).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `Φ_Ω` along the squeezed (`--angle`) and unsqueezed (`--angle + π/2`)
/// axes of the β lattice.
pub fn fig1(mut opts: Options) -> Result<(), CliError> {
    default_state(&mut opts);
    let source = Source::resolve(&mut opts)?;
    let beta = opts.beta_grid()?;
    let filters = filters(&opts, &DEFAULT_WIDTHS)?;
    let angle = opts.angle.unwrap_or(0.0);
    let out = Output::create("fig1", &opts)?;
    let ts = beta.coords();
    for filter in &filters {
        for (axis, theta) in [("squeezed", angle), ("unsqueezed", angle + FRAC_PI_2)] {
            let rows = match &source {
                Source::Analytic(s) => cf_cross_section(s, filter, theta, &ts),
                Source::Sampled(d) => cf_cross_section(d, filter, theta, &ts),
            }
            .stage("filter")?;
            let path = out.path(&format!("fig1_w{}_{axis}.csv", filter.parameter()));
            write_cf_section(&rows, &path)?;
            out.sidecar(
                &path,
                &CurveMeta {
                    source: source.kind(),
                    filter: filter.kind(),
                    width: filter.parameter(),
                    axis,
                    angle: theta,
                },
            )?;
            let peak = rows.iter().map(|r| r.1.re).fold(f64::NEG_INFINITY, f64::max);
            println!("{}: {} axis, peak {peak:.6}", path.display(), axis);
        }
    }
    Ok(())
}

/// `P_Ω` along the squeezed axis of the α lattice.
pub fn fig2(mut opts: Options) -> Result<(), CliError> {
    default_state(&mut opts);
    let source = Source::resolve(&mut opts)?;
    let beta = opts.beta_grid()?;
    let alpha = opts.alpha_grid()?;
    let filters = filters(&opts, &DEFAULT_WIDTHS)?;
    let angle = opts.angle.unwrap_or(0.0);
    let out = Output::create("fig2", &opts)?;
    let cf = charfunc_grid(&source, beta, &filters, SigmaMethod::Empirical)?;
    let ts = alpha.coords();
    for filter in &filters {
        let filtered = apply_filter(&cf, filter).stage("filter")?;
        if filtered.is_truncated() && !opts.allow_truncation.unwrap_or(false) {
            return Err(CliError::Stage {
                stage: "transform",
                source: nonclassical::Error::TailTruncation {
                    boundary_max: filtered.boundary_max(),
                    limit: nonclassical::quasiprob::TAIL_LIMIT,
                },
            });
        }
        let section = cross_section(&filtered, angle, &ts).stage("section")?;
        let path = out.path(&format!("fig2_w{}.csv", filter.parameter()));
        write_section_csv(&section, &path).stage("write")?;
        out.sidecar(
            &path,
            &CurveMeta {
                source: source.kind(),
                filter: filter.kind(),
                width: filter.parameter(),
                axis: "squeezed",
                angle,
            },
        )?;
        let min = section.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        println!("{}: min P = {min:.6}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bochner

#[derive(Serialize)]
struct BochnerReport {
    source: &'static str,
    significance_level: f64,
    result: BochnerVerdict,
}

pub fn bochner(mut opts: Options) -> Result<(), CliError> {
    let points = opts.points.as_deref().map(parse_points).transpose()?;
    let source = Source::resolve(&mut opts)?;
    let beta = opts.beta_grid()?;
    let k = opts.significance_level()?;
    let test = opts.test.unwrap_or(if points.is_some() {
        TestChoice::Determinant
    } else {
        TestChoice::Modulus
    });
    let verdict = match test {
        TestChoice::Determinant => {
            let pts = points.ok_or_else(|| CliError::usage("the determinant test needs --points"))?;
            match &source {
                Source::Analytic(s) => determinant_test(s, &pts, k),
                Source::Sampled(d) => determinant_test(d, &pts, k),
            }
            .stage("bochner")?
        }
        TestChoice::Modulus => {
            let region = match (points, &source) {
                (Some(p), _) => p,
                (None, Source::Analytic(_)) => scan_grid(&beta),
                (None, Source::Sampled(_)) => {
                    scan_line(opts.angle.unwrap_or(0.0), beta.range, beta.step).stage("bochner")?
                }
            };
            match &source {
                Source::Analytic(s) => modulus_test(s, &region, k),
                Source::Sampled(d) => modulus_test(d, &region, k),
            }
            .stage("bochner")?
        }
    };
    let out = Output::create("bochner", &opts)?;
    let report = BochnerReport {
        source: source.kind(),
        significance_level: k,
        result: verdict,
    };
    let path = out.report("bochner.json", &report)?;
    let v = &report.result;
    let sig = v.significance.map_or("exact".to_string(), |s| format!("{s:.2} sigma"));
    println!(
        "{}: {:?} statistic {:.7} ({sig}) -> {:?}",
        path.display(),
        v.kind,
        v.statistic,
        v.verdict
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// filter-check

#[derive(Serialize)]
struct FilterCheckReport {
    conditions: ConditionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    lemma: Option<LemmaReport>,
}

pub fn filter_check(opts: Options) -> Result<(), CliError> {
    let kind = opts.filter_kind();
    let widths = opts.widths(if kind == FilterKind::GaussianS { &CHECK_S } else { &CHECK_WIDTHS })?;
    let tol = ConditionTolerances {
        grid: opts.beta_grid()?,
        ..Default::default()
    };
    let lemma_u = opts.lemma_u;
    if lemma_u.is_some() && kind != FilterKind::Autocorrelation {
        return Err(CliError::usage("--lemma-u applies to the autocorrelation filter only"));
    }
    let out = Output::create("filter-check", &opts)?;
    let base = NCFilter::new(kind, widths[0]).stage("filter")?;
    let conditions = check_conditions(&base, &widths, &tol).stage("conditions")?;
    let lemma = match lemma_u {
        Some(u) => {
            let alphas: Vec<Complex64> = (0..=40).map(|k| Complex64::new(0.1 * k as f64, 0.0)).collect();
            Some(lemma1_bound_check(&RadialTable::quartic(), u, &alphas).stage("lemma")?)
        }
        None => None,
    };
    if kind == FilterKind::Autocorrelation {
        let table = RadialTable::quartic();
        table
            .write(&out.path("radial_table.csv"), &out.path("radial_table.json"))
            .stage("write")?;
    }
    for w in &conditions.widths {
        println!(
            "{} {}: (a) {:?} (b) {:?} (c) {:?}",
            conditions.filter, w.parameter, w.a.status, w.b.status, w.c.status
        );
    }
    if let Some(l) = &lemma {
        println!("decay bound u = {}: premise {}, bound {}", l.u, l.premise_holds, l.all_hold);
    }
    let report = FilterCheckReport { conditions, lemma };
    let path = out.report("filter_check.json", &report)?;
    println!("{}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        let p = parse_points("0,0; 1.5,-0.5;").unwrap();
        assert_eq!(p, vec![Complex64::new(0.0, 0.0), Complex64::new(1.5, -0.5)]);
        for bad in ["", "1", "1,x", "1,2;3", "nan,0"] {
            assert!(matches!(parse_points(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }
}

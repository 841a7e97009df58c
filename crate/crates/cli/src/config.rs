//! Flags and config files.
//!
//! A config file is flat `key = value` text whose keys are the long flag
//! names without the leading `--` (`beta-range = 6`, `beta_range = 6`). Sections are
//! rejected. Every value goes through the same parser as the flag, and a
//! flag given on the command line overrides the file.
//!
//! ```ini
//! state = squeezed:0.2,5.0
//! filter = autocorrelation
//! width = 1.2, 1.5
//! beta-range = 6
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use ini::Ini;
use nonclassical::filters::FilterKind;
use nonclassical::grid::GridSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorChoice {
    /// Plug-in standard error of each grid node.
    Empirical,
    /// The universal bound `e^{|β|²/2}/√N`.
    Bound,
    /// Resample the dataset and rerun the transform.
    Bootstrap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestChoice {
    Modulus,
    Determinant,
}

/// Every tunable shared by the subcommands. Unset fields fall back to the
/// config file, then to per-command defaults.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Options {
    /// Analytic state: coherent:RE,IM, thermal:NBAR, squeezed:VX,VP, fock1,
    /// vacuum, or a mixture W1*STATE1+W2*STATE2
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,

    /// Quadrature dataset (`phase,x` CSV) instead of a state
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// triangular, autocorrelation or gaussian-s
    #[arg(long)]
    pub filter: Option<FilterKind>,

    /// Filter widths (values of s for gaussian-s), comma separated
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub width: Option<Vec<f64>>,

    /// Half-width of the square β lattice
    #[arg(long)]
    pub beta_range: Option<f64>,

    #[arg(long)]
    pub beta_step: Option<f64>,

    /// Half-width of the square α lattice
    #[arg(long)]
    pub alpha_range: Option<f64>,

    #[arg(long)]
    pub alpha_step: Option<f64>,

    /// Number of equally spaced phases in [0, π) for synthetic data
    #[arg(long)]
    pub phases: Option<usize>,

    /// Samples per phase; with --state this switches to synthetic data
    #[arg(long)]
    pub samples: Option<usize>,

    /// RNG seed; drawn at random and recorded when absent
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum)]
    pub error_method: Option<ErrorChoice>,

    /// Bootstrap replicates
    #[arg(long)]
    pub bootstrap: Option<usize>,

    /// Direction of cross-sections and line scans; 0 is the squeezed axis
    #[arg(long, allow_negative_numbers = true)]
    pub angle: Option<f64>,

    /// Bochner points as `re,im;re,im;...`
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,

    #[arg(long, value_enum)]
    pub test: Option<TestChoice>,

    /// Required distance from zero, in standard deviations
    #[arg(long)]
    pub significance: Option<f64>,

    /// Decay rate u for the autocorrelation bound check
    #[arg(long)]
    pub lemma_u: Option<f64>,

    /// Transform even when Φ_Ω does not vanish on the β boundary
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub allow_truncation: Option<bool>,

    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Parser)]
#[command(name = "config", no_binary_name = true)]
struct ConfigFile {
    #[command(flatten)]
    options: Options,
}

/// Reads a config file into [`Options`].
pub fn load_config(path: &Path) -> Result<Options, CliError> {
    let ini = Ini::load_from_file(path).map_err(|e| match e {
        ini::Error::Io(source) => CliError::Io {
            stage: "config",
            path: path.to_path_buf(),
            source,
        },
        ini::Error::Parse(p) => CliError::usage(format!("config {}: {p}", path.display())),
    })?;
    let mut argv = Vec::new();
    for (section, props) in ini.iter() {
        if let Some(name) = section {
            return Err(CliError::usage(format!(
                "config {}: sections are not supported (found [{name}])",
                path.display()
            )));
        }
        for (key, value) in props.iter() {
            let key = key.trim().replace('_', "-");
            if key == "config" {
                return Err(CliError::usage(format!("config {}: files cannot include other files", path.display())));
            }
            let value = value.split(',').map(str::trim).collect::<Vec<_>>().join(",");
            argv.push(format!("--{key}={value}"));
        }
    }
    ConfigFile::try_parse_from(argv)
        .map(|c| c.options)
        .map_err(|e| CliError::usage(format!("config {}: {}", path.display(), e.render().to_string().trim())))
}

/// Fields set in `flags` win; the rest come from `file`.
pub fn merge(flags: Options, file: Options) -> Options {
    let mut merged = serde_json::to_value(flags).expect("options serialize");
    let file = serde_json::to_value(file).expect("options serialize");
    if let (Some(m), Some(f)) = (merged.as_object_mut(), file.as_object()) {
        for (key, value) in f {
            if m.get(key).map_or(true, |v| v.is_null()) {
                m.insert(key.clone(), value.clone());
            }
        }
    }
    serde_json::from_value(merged).expect("merged options deserialize")
}

// ---------------------------------------------------------------------------
// Resolved values

impl Options {
    pub fn beta_grid(&self) -> Result<GridSpec, CliError> {
        grid(
            self.beta_range.unwrap_or(GridSpec::BETA_DEFAULT.range),
            self.beta_step.unwrap_or(GridSpec::BETA_DEFAULT.step),
            "beta",
        )
    }

    pub fn alpha_grid(&self) -> Result<GridSpec, CliError> {
        grid(
            self.alpha_range.unwrap_or(GridSpec::ALPHA_DEFAULT.range),
            self.alpha_step.unwrap_or(GridSpec::ALPHA_DEFAULT.step),
            "alpha",
        )
    }

    pub fn filter_kind(&self) -> FilterKind {
        self.filter.unwrap_or(FilterKind::Autocorrelation)
    }

    /// Widths, defaulting to `default` and checked positive unless the
    /// filter is the Gaussian family.
    pub fn widths(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let widths = self.width.clone().unwrap_or_else(|| default.to_vec());
        if widths.is_empty() {
            return Err(CliError::usage("--width needs at least one value"));
        }
        if self.filter_kind() != FilterKind::GaussianS {
            if let Some(w) = widths.iter().find(|&&w| !(w.is_finite() && w > 0.0)) {
                return Err(CliError::usage(format!("widths must be > 0, got {w}")));
            }
        }
        Ok(widths)
    }

    pub fn significance_level(&self) -> Result<f64, CliError> {
        let k = self.significance.unwrap_or(nonclassical::bochner::DEFAULT_SIGNIFICANCE);
        if !(k.is_finite() && k > 0.0) {
            return Err(CliError::usage(format!("--significance must be > 0, got {k}")));
        }
        Ok(k)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// The seed, drawing and recording one when absent.
    pub fn seed_or_draw(&mut self) -> u64 {
        *self.seed.get_or_insert_with(|| {
            let seed = rand::random();
            log::info!("no seed given, drew {seed}");
            seed
        })
    }
}

fn grid(range: f64, step: f64, name: &str) -> Result<GridSpec, CliError> {
    GridSpec::new(range, step).map_err(|e| CliError::usage(format!("{name} grid: {e}")))
}

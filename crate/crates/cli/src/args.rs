use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use maxfilter_core::formats::{self, FloatFormat};
use maxfilter_core::{
    BispectrumEmbedding, CircleSolverConfig, Embedding, Error as CoreError, Execution, FrequencyProfile, GroupAction,
    MaxFilterBank, OrbitPoint,
};

/// Options that control where and how a run executes, but never what it computes.
#[derive(Args, Debug, Clone, Default)]
pub struct RunOpts {
    /// Load every parameter from an echoed config.json; only --out and --sequential still apply
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; without it the primary result goes to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Disable data parallelism
    #[arg(long)]
    pub sequential: bool,
}

impl RunOpts {
    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

/// Implemented by every subcommand's argument struct.
pub trait Configurable: Serialize + DeserializeOwned {
    fn run_opts(&self) -> &RunOpts;
    fn run_opts_mut(&mut self) -> &mut RunOpts;

    /// Replaces the parsed flags with the contents of `--config` when given.
    fn with_config(self) -> Result<Self> {
        let Some(path) = self.run_opts().config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
        let mut loaded: Self = serde_json::from_str(&text)
            .map_err(|e| CoreError::Parse(format!("config {}: {e}", path.display())))?;
        *loaded.run_opts_mut() = self.run_opts().clone();
        Ok(loaded)
    }
}

macro_rules! configurable {
    ($($t:ty),*) => {$(
        impl Configurable for $t {
            fn run_opts(&self) -> &RunOpts { &self.run }
            fn run_opts_mut(&mut self) -> &mut RunOpts { &mut self.run }
        }
    )*};
}

configurable!(BankArgs, GenArgs, EmbedArgs, DistArgs, StabilityArgs, AnnArgs, Figure3Args);

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Maxfilter,
    Bispectrum,
    ScaledBispectrum,
}

/// Which group acts.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct ActionArgs {
    /// Action spec: inline JSON or a path to a JSON file
    #[arg(long)]
    pub action: Option<String>,
    /// Circle weights, e.g. 1,2 (shorthand for a circle action spec)
    #[arg(long, allow_hyphen_values = true)]
    pub weights: Option<String>,
    /// Frequency profile "k:p,k:p,..." for bispectrum backends and datasets
    #[arg(long, allow_hyphen_values = true)]
    pub profile: Option<String>,
}

impl ActionArgs {
    pub fn parsed_profile(&self) -> Result<Option<FrequencyProfile>> {
        Ok(self.profile.as_deref().map(FrequencyProfile::parse).transpose()?)
    }

    /// The action from --action or --weights, if either is given.
    pub fn explicit(&self) -> Result<Option<GroupAction>> {
        match (&self.action, &self.weights) {
            (Some(_), Some(_)) => bail!("--action and --weights are mutually exclusive"),
            (Some(spec), None) => Ok(Some(formats::load_action(spec)?)),
            (None, Some(w)) => {
                let weights = w
                    .split(',')
                    .map(|t| t.trim().parse::<i64>().map_err(|e| CoreError::Parse(format!("weight '{t}': {e}"))))
                    .collect::<std::result::Result<Vec<i64>, CoreError>>()?;
                Ok(Some(GroupAction::circle(weights)?))
            }
            (None, None) => Ok(None),
        }
    }

    /// Explicit action, else the one induced by `profile` or `fallback`.
    /// Rewrites `self` as an inline action spec.
    pub fn resolve(&mut self, fallback: Option<&FrequencyProfile>) -> Result<GroupAction> {
        let action = match self.explicit()? {
            Some(a) => a,
            None => match self.parsed_profile()?.or_else(|| fallback.cloned()) {
                Some(p) => GroupAction::Circle(p.induced_action()?),
                None => bail!("no action given: use --action, --weights or --profile"),
            },
        };
        self.action = Some(formats::action_to_json(&action));
        self.weights = None;
        Ok(action)
    }
}

/// Action and embedding selection shared by most commands.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value_t = Backend::Maxfilter)]
    pub backend: Backend,
    #[command(flatten)]
    pub target: ActionArgs,
    /// Bank file written by `maxfilter bank`
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// Explicit template (repeatable), comma-separated coordinates
    #[arg(long = "z", allow_hyphen_values = true)]
    pub templates: Vec<String>,
    /// Number of generated templates (default: the bilipschitz count)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid points per unit of bandwidth in the circle solver [default: 8]
    #[arg(long)]
    pub oversample: Option<usize>,
    /// Golden-section refinement iterations per peak [default: 40]
    #[arg(long)]
    pub refine: Option<usize>,
}

pub struct Resolved {
    pub action: GroupAction,
    pub embedding: Box<dyn Embedding>,
    pub bank: Option<MaxFilterBank>,
}

impl BackendArgs {
    fn solver_config(&self, base: CircleSolverConfig) -> Result<CircleSolverConfig> {
        let mut cfg = base;
        if let Some(o) = self.oversample {
            cfg.oversample = o;
        }
        if let Some(r) = self.refine {
            cfg.refine_iters = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the embedding and rewrites `self` with every default made explicit.
    /// `fallback` supplies a frequency profile when none is given on the command line.
    pub fn resolve(&mut self, fallback: Option<&FrequencyProfile>) -> Result<Resolved> {
        let profile = self.target.parsed_profile()?.or_else(|| fallback.cloned());
        match self.backend {
            Backend::Maxfilter => self.resolve_maxfilter(profile.as_ref()),
            Backend::Bispectrum | Backend::ScaledBispectrum => {
                if self.bank.is_some() || !self.templates.is_empty() {
                    bail!("--bank and --z only apply to the maxfilter backend");
                }
                let Some(profile) = profile else { bail!("the bispectrum backends need --profile") };
                let action = GroupAction::Circle(profile.induced_action()?);
                if let Some(explicit) = self.target.explicit()? {
                    if explicit != action {
                        return Err(CoreError::InvalidConfig("--action disagrees with the action induced by --profile".into()).into());
                    }
                }
                let emb = BispectrumEmbedding::new(&profile, self.backend == Backend::ScaledBispectrum);
                Ok(Resolved { action, embedding: Box::new(emb), bank: None })
            }
        }
    }

    fn resolve_maxfilter(&mut self, profile: Option<&FrequencyProfile>) -> Result<Resolved> {
        let bank = if let Some(path) = &self.bank {
            if self.target.action.is_some() || self.target.weights.is_some() || !self.templates.is_empty() || self.n.is_some() {
                bail!("--bank cannot be combined with --action, --weights, --z or --n");
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading bank {}", path.display()))?;
            let bank = formats::read_bank(&text)?;
            let cfg = self.solver_config(*bank.config())?;
            let seed = bank.seed();
            let mut rebuilt = MaxFilterBank::new(bank.action().clone(), bank.templates().to_vec(), cfg)?;
            if let Some(s) = seed {
                rebuilt = rebuilt.with_seed(s);
            }
            rebuilt
        } else {
            let action = self.target.resolve(profile)?;
            let cfg = self.solver_config(CircleSolverConfig::default())?;
            if self.templates.is_empty() {
                let bank = MaxFilterBank::generate(action, self.n, self.seed, cfg)?;
                self.n = Some(bank.len());
                bank
            } else {
                if self.n.is_some() {
                    bail!("--n cannot be combined with explicit --z templates");
                }
                let templates = self
                    .templates
                    .iter()
                    .map(|z| formats::parse_vector(z).map(OrbitPoint::new))
                    .collect::<std::result::Result<Vec<_>, CoreError>>()?;
                MaxFilterBank::new(action, templates, cfg)?
            }
        };
        self.oversample = Some(bank.config().oversample);
        self.refine = Some(bank.config().refine_iters);
        Ok(Resolved { action: bank.action().clone(), embedding: Box::new(bank.clone()), bank: Some(bank) })
    }
}

fn default_decay() -> f64 {
    1.0
}

/// Generate a max filter bank file.
#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct BankArgs {
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunOpts,
}

/// Generate a synthetic coefficient dataset.
#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct GenArgs {
    /// Frequency profile "k:p,k:p,..."
    #[arg(long, allow_hyphen_values = true)]
    pub profile: Option<String>,
    /// Number of points
    #[arg(long)]
    pub m: Option<usize>,
    /// Coefficients at frequency k are scaled by (1+|k|)^-decay
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunOpts,
}

/// Embed one point (--x) or every point of a dataset.
#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Single input point, comma-separated coordinates
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Dataset file (JSONL) to embed row by row
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Print floats with full round-trip precision instead of 12 significant digits
    #[arg(long)]
    pub full_precision: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunOpts,
}

/// Quotient distance between two points.
#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct DistArgs {
    #[command(flatten)]
    pub target: ActionArgs,
    /// First point, comma-separated coordinates
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Second point, comma-separated coordinates
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Grid oversampling (default: the high-resolution distance solver)
    #[arg(long)]
    pub oversample: Option<usize>,
    /// Golden-section refinement iterations per peak
    #[arg(long)]
    pub refine: Option<usize>,
    /// Print floats with full round-trip precision instead of 12 significant digits
    #[arg(long)]
    pub full_precision: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunOpts,
}

/// Empirical bilipschitz bounds and local probes.
#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Number of random Gaussian pairs
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    /// Standard deviation of the sampled coordinates
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Equal-width histogram buckets spanning the observed ratio range
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Base point for a local lower-ratio probe
    #[arg(long, allow_hyphen_values = true)]
    pub probe_x: Option<String>,
    #[arg(long, default_value = "0.1,0.01,0.001,0.0001")]
    pub probe_scales: String,
    #[arg(long, default_value_t = 200)]
    pub probe_pairs: usize,
    /// Also search for a degenerate direction at --probe-x
    #[arg(long)]
    pub degenerate: bool,
    /// Print floats with full round-trip precision instead of 12 significant digits
    #[arg(long)]
    pub full_precision: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunOpts,
}

/// Nearest-neighbor benchmark through the embedding.
#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct AnnArgs {
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Dataset file; otherwise one is synthesized from --profile, --m, --decay and --seed
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Points in the synthesized dataset [default: 200]
    #[arg(long)]
    pub m: Option<usize>,
    /// Decay exponent for the synthesized dataset [default: 1]
    #[arg(long)]
    pub decay: Option<f64>,
    /// Number of synthesized queries
    #[arg(long, default_value_t = 50)]
    pub queries: usize,
    /// Print floats with full round-trip precision instead of 12 significant digits
    #[arg(long)]
    pub full_precision: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunOpts,
}

/// Curves k·cos θ − cos 2θ and their solver maxima.
#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct Figure3Args {
    /// Values of k, comma-separated
    #[arg(long, default_value = "1,2,3,3.5,4")]
    pub k: String,
    /// Curve samples over [-π, π)
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// Grid points per unit of bandwidth in the circle solver [default: 8]
    #[arg(long)]
    pub oversample: Option<usize>,
    /// Golden-section refinement iterations per peak [default: 40]
    #[arg(long)]
    pub refine: Option<usize>,
    /// Print floats with full round-trip precision instead of 12 significant digits
    #[arg(long)]
    pub full_precision: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunOpts,
}

pub fn float_format(full: bool) -> FloatFormat {
    if full {
        FloatFormat::Full
    } else {
        FloatFormat::Short
    }
}

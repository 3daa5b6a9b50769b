//! JSON run configuration shared by the library training loop and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::checks::{IdentitySpec, PointSampling, PsdSweepSpec, SweepKernel, DEFAULT_PSD_TOL};
use crate::diff::kernel::{Projection, ScoreMode};
use crate::diff::optim::OptimizerConfig;
use crate::diff::params::{KernelSpec, ParamVector, Trainable};
use crate::error::{Error, Result};
use crate::geometry::{validate_clip, Curvature};
use crate::kernels::{KernelVariant, DEFAULT_TRUNCATION};
use crate::learning::data::TreeSpec;
use crate::learning::episode::EpisodeSpec;
use crate::learning::losses::AffineMap;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Fsl,
    Zsl,
    Sts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub projection: Projection,
    #[serde(default)]
    pub score: ScoreMode,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub episode: EpisodeSpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub checks: ChecksSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            task: Task::default(),
            seed: 0,
            kernel: KernelSection::default(),
            projection: Projection::default(),
            score: ScoreMode::default(),
            dataset: DatasetSection::default(),
            episode: EpisodeSpec::default(),
            optimizer: OptimizerConfig::default(),
            training: TrainingSection::default(),
            checks: ChecksSection::default(),
        }
    }
}

/// Kernel family, its fixed hyperparameters and parameter initialization.
/// Fields that do not apply to `variant` must be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub variant: KernelVariant,
    pub curvature: f64,
    pub num_poles: usize,
    /// Standard deviation of the Gaussian pole raws.
    pub pole_init_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    pub trainable: Trainable,
    /// Explicit starting parameters; overrides the random initialization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamVector>,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            variant: KernelVariant::AhRad,
            curvature: 1.0,
            num_poles: 3,
            pole_init_scale: 0.5,
            truncation: None,
            offset: None,
            degree: None,
            bandwidth: None,
            trainable: Trainable::default(),
            params: None,
        }
    }
}

impl KernelSection {
    pub fn spec(&self) -> KernelSpec {
        KernelSpec {
            variant: self.variant,
            offset: self.offset.unwrap_or(1.0),
            degree: self.degree.unwrap_or(2),
        }
    }

    pub fn truncation(&self) -> usize {
        self.truncation.unwrap_or(DEFAULT_TRUNCATION)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.variant;
        let reject = |field: &str| {
            Err(Error::InvalidConfig(format!("kernel.{field} does not apply to variant {v}")))
        };
        if self.truncation.is_some() && v != KernelVariant::AhRad {
            return reject("truncation");
        }
        if (self.offset.is_some() || self.degree.is_some()) && v != KernelVariant::AhPoly {
            return reject(if self.offset.is_some() { "offset" } else { "degree" });
        }
        if self.bandwidth.is_some() && !v.is_exponential() {
            return reject("bandwidth");
        }
        Curvature::new(self.curvature)?;
        if v != KernelVariant::Da && self.num_poles == 0 {
            return Err(Error::InvalidConfig(format!("{v} needs kernel.num_poles >= 1")));
        }
        if v == KernelVariant::Da && self.num_poles != 0 && self.params.is_none() {
            return Err(Error::InvalidConfig("da has no poles; set kernel.num_poles to 0".into()));
        }
        if !(self.pole_init_scale.is_finite() && self.pole_init_scale >= 0.0) {
            return Err(Error::InvalidConfig("kernel.pole_init_scale must be >= 0".into()));
        }
        if self.truncation == Some(0) {
            return Err(Error::InvalidConfig("kernel.truncation must be >= 1".into()));
        }
        if let Some(b) = self.offset {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidConfig("kernel.offset must be positive".into()));
            }
        }
        if self.degree == Some(0) {
            return Err(Error::InvalidConfig("kernel.degree must be >= 1".into()));
        }
        if let Some(t) = self.bandwidth {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidConfig("kernel.bandwidth must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Dataset shape; the generator seed is the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub depth: usize,
    pub branching: usize,
    pub dim: usize,
    pub noise_sigma: f64,
    pub samples_per_leaf: usize,
    pub step_length: f64,
    pub random_labels: bool,
}

impl Default for DatasetSection {
    fn default() -> Self {
        let t = TreeSpec::default();
        Self {
            depth: t.depth,
            branching: t.branching,
            dim: t.dim,
            noise_sigma: t.noise_sigma,
            samples_per_leaf: t.samples_per_leaf,
            step_length: t.step_length,
            random_labels: t.random_labels,
        }
    }
}

impl DatasetSection {
    pub fn tree_spec(&self, seed: u64) -> TreeSpec {
        TreeSpec {
            seed,
            depth: self.depth,
            branching: self.branching,
            dim: self.dim,
            noise_sigma: self.noise_sigma,
            samples_per_leaf: self.samples_per_leaf,
            step_length: self.step_length,
            random_labels: self.random_labels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub steps: usize,
    pub eval_episodes: usize,
    /// Samples per zero-shot batch, triples per contrastive batch.
    pub batch: usize,
    /// Contrastive temperature; unrelated to the kernel bandwidth.
    pub temperature: f64,
    pub semantic_dim: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            steps: 200,
            eval_episodes: 200,
            batch: 16,
            temperature: 0.1,
            semantic_dim: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksSection {
    pub psd: PsdSection,
    pub isometry: IsometrySection,
    pub identities: IdentitySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdSection {
    pub kernels: Vec<SweepKernel>,
    pub curvatures: Vec<f64>,
    pub dims: Vec<usize>,
    pub pole_counts: Vec<usize>,
    pub points: usize,
    pub tol: f64,
    pub complex: bool,
}

impl Default for PsdSection {
    fn default() -> Self {
        let d = PsdSweepSpec::default();
        Self {
            kernels: d.kernels,
            curvatures: d.curvatures,
            dims: d.dims,
            pole_counts: d.pole_counts,
            points: d.points,
            tol: DEFAULT_PSD_TOL,
            complex: d.complex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsometrySection {
    pub curvatures: Vec<f64>,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub tol: f64,
}

impl Default for IsometrySection {
    fn default() -> Self {
        Self {
            curvatures: vec![0.25, 1.0, 2.5],
            dims: vec![1, 4, 16],
            trials: 1000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitySection {
    pub trials: usize,
    pub tol: f64,
    pub rel_tol: f64,
    pub curvatures: Vec<f64>,
    pub dims: Vec<usize>,
    pub poles: usize,
    /// Tolerance for the near-boundary pass at `sqrt(c)||z|| = 0.999`.
    pub boundary_tol: f64,
}

impl Default for IdentitySection {
    fn default() -> Self {
        let d = IdentitySpec::default();
        Self {
            trials: d.trials,
            tol: d.tol,
            rel_tol: d.rel_tol,
            curvatures: d.curvatures,
            dims: d.dims,
            poles: d.poles,
            boundary_tol: 1e-8,
        }
    }
}

impl ChecksSection {
    pub fn psd_spec(&self, seed: u64, tol: Option<f64>) -> PsdSweepSpec {
        PsdSweepSpec {
            kernels: self.psd.kernels.clone(),
            curvatures: self.psd.curvatures.clone(),
            dims: self.psd.dims.clone(),
            pole_counts: self.psd.pole_counts.clone(),
            points: self.psd.points,
            tol: tol.unwrap_or(self.psd.tol),
            seed,
            complex: self.psd.complex,
        }
    }

    /// Uniform and near-boundary identity sweeps.
    pub fn identity_specs(&self, seed: u64, tol: Option<f64>) -> [IdentitySpec; 2] {
        let s = &self.identities;
        let base = IdentitySpec {
            trials: s.trials,
            tol: tol.unwrap_or(s.tol),
            rel_tol: tol.unwrap_or(s.rel_tol),
            seed,
            curvatures: s.curvatures.clone(),
            dims: s.dims.clone(),
            poles: s.poles,
            sampling: PointSampling::Uniform,
        };
        let near = IdentitySpec {
            tol: tol.unwrap_or(s.boundary_tol),
            rel_tol: tol.unwrap_or(s.boundary_tol),
            seed: seed.wrapping_add(1),
            sampling: PointSampling::Shell(0.999),
            ..base.clone()
        };
        [base, near]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        let p = &self.psd;
        if p.points == 0 || p.points > crate::kernels::DEFAULT_MAX_GRAM {
            return bad("checks.psd.points must lie in 1..=1024");
        }
        if p.dims.contains(&0) || p.pole_counts.contains(&0) {
            return bad("checks.psd dims and pole counts must be >= 1");
        }
        for &c in p.curvatures.iter().chain(&self.isometry.curvatures).chain(&self.identities.curvatures) {
            Curvature::new(c)?;
        }
        if self.isometry.trials == 0 || self.identities.trials == 0 {
            return bad("check trials must be >= 1");
        }
        if self.isometry.dims.contains(&0) || self.identities.dims.contains(&0) {
            return bad("check dimensions must be >= 1");
        }
        if self.identities.curvatures.is_empty() || self.identities.dims.is_empty() || self.identities.poles == 0 {
            return bad("identity sweeps need curvatures, dims and poles");
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            column: e.column(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Complete validation; nothing runs before this succeeds.
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.kernel.validate()?;
        if let Projection::Clip { beta, eps } = self.projection {
            validate_clip(beta, eps)?;
        }
        self.dataset.tree_spec(self.seed).validate()?;
        self.episode.validate()?;
        self.optimizer.validate()?;
        let t = &self.training;
        if t.eval_episodes == 0 {
            return Err(Error::InvalidConfig("training.eval_episodes must be >= 1".into()));
        }
        if t.batch == 0 || t.semantic_dim == 0 {
            return Err(Error::InvalidConfig("training.batch and training.semantic_dim must be >= 1".into()));
        }
        if !(t.temperature.is_finite() && t.temperature > 0.0) {
            return Err(Error::InvalidConfig("training.temperature must be positive".into()));
        }
        if let Some(p) = &self.kernel.params {
            self.check_params(p)?;
        }
        self.checks.validate()
    }

    fn head_len(&self) -> usize {
        match self.task {
            Task::Zsl => AffineMap::<f64>::len(self.training.semantic_dim, self.dataset.dim),
            _ => 0,
        }
    }

    fn radial_len(&self) -> usize {
        if self.kernel.variant == KernelVariant::AhRad {
            self.kernel.truncation() + 1
        } else {
            0
        }
    }

    /// Checks that `p` fits this configuration's shapes.
    pub fn check_params(&self, p: &ParamVector) -> Result<()> {
        let poles = if self.kernel.variant == KernelVariant::Da { 0 } else { self.kernel.num_poles };
        let shape_ok = p.num_poles() == poles
            && p.pole_raws.iter().all(|r| r.len() == self.dataset.dim)
            && p.weight_logits.len() == poles
            && p.radial_raws.len() == self.radial_len()
            && p.head.len() == self.head_len();
        if !shape_ok {
            return Err(Error::InvalidConfig(
                "parameter shapes do not match the kernel, dataset and task settings".into(),
            ));
        }
        if !p.is_finite() {
            return Err(Error::InvalidConfig("parameters must be finite".into()));
        }
        p.materialize()?;
        Ok(())
    }

    /// Seeded initial parameters, or the explicit ones from the config.
    pub fn initial_params(&self) -> ParamVector {
        self.initial_params_for_dim(self.dataset.dim)
    }

    /// As [`RunConfig::initial_params`] with poles of dimension `dim`.
    pub fn initial_params_for_dim(&self, dim: usize) -> ParamVector {
        if let Some(p) = &self.kernel.params {
            return p.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.seed, Stream::Init));
        let k = &self.kernel;
        let m = if k.variant == KernelVariant::Da { 0 } else { k.num_poles };
        let mut p = ParamVector::zeros(m, dim, self.radial_len());
        for row in &mut p.pole_raws {
            for x in row.iter_mut() {
                *x = k.pole_init_scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
        // alpha_l = 1/l!, an exponential-like profile
        let mut fact = 1.0;
        for (l, r) in p.radial_raws.iter_mut().enumerate() {
            if l > 0 {
                fact *= l as f64;
            }
            *r = (1.0 / fact).sqrt();
        }
        p.log_c = k.curvature.ln();
        p.log_bandwidth = k.bandwidth.unwrap_or(1.0).ln();
        let sem = self.training.semantic_dim;
        let scale = 1.0 / (sem as f64).sqrt();
        p.head = (0..self.head_len())
            .map(|i| {
                if i < dim * sem {
                    scale * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                }
            })
            .collect();
        p
    }
}

/// Independent random streams derived from the run seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Init,
    Split,
    Train,
    Eval,
    Semantic,
    Checks,
}

pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    let tag: u64 = match stream {
        Stream::Init => 0x1A17,
        Stream::Split => 0x5B17,
        Stream::Train => 0x78A1,
        Stream::Eval => 0xE7A1,
        Stream::Semantic => 0x5E3A,
        Stream::Checks => 0xC4EC,
    };
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag)
}

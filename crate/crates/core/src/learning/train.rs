//! Episodic training loop.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{gen_tree, LabeledSet};
use super::episode::{sample_episode, sample_sts_batch, sample_zsl_batch, split_classes, Episode, StsBatch, ZslBatch};
use super::eval::{baseline_accuracy, build_eval_set, class_semantics, evaluate, Baseline, EvalReport, EvalSet};
use super::losses::{fsl_loss, sts_loss, zsl_loss, AffineMap};
use crate::config::{stream_seed, RunConfig, Stream, Task};
use crate::diff::grad::{tape_value_and_grad, Objective};
use crate::diff::kernel::{Projection, ScoreMode};
use crate::diff::optim::{step, OptimizerState};
use crate::diff::params::{KernelSpec, ParamVector, Params};
use crate::diff::real::Real;
use crate::error::{Error, Result};

pub struct FslObjective<'a> {
    pub spec: KernelSpec,
    pub projection: Projection,
    pub mode: ScoreMode,
    pub episode: &'a Episode,
}

impl Objective for FslObjective<'_> {
    fn eval<R: Real>(&self, p: &Params<R>) -> Result<R> {
        fsl_loss(&p.kernel(&self.spec), self.projection, self.episode, self.mode)
    }
}

pub struct ZslObjective<'a> {
    pub spec: KernelSpec,
    pub projection: Projection,
    pub mode: ScoreMode,
    pub semantic_dim: usize,
    pub batch: &'a ZslBatch,
}

impl Objective for ZslObjective<'_> {
    fn eval<R: Real>(&self, p: &Params<R>) -> Result<R> {
        let out_dim = self.batch.visual.first().map_or(0, Vec::len);
        let map = AffineMap::new(&p.head, self.semantic_dim, out_dim)?;
        zsl_loss(
            &p.kernel(&self.spec),
            self.projection,
            &self.batch.class_embeddings,
            &self.batch.visual,
            &self.batch.labels,
            &map,
            self.mode,
        )
    }
}

pub struct StsObjective<'a> {
    pub spec: KernelSpec,
    pub projection: Projection,
    pub temperature: f64,
    pub batch: &'a StsBatch,
}

impl Objective for StsObjective<'_> {
    fn eval<R: Real>(&self, p: &Params<R>) -> Result<R> {
        sts_loss(
            &p.kernel(&self.spec),
            self.projection,
            &self.batch.anchors,
            &self.batch.positives,
            &self.batch.negatives,
            self.temperature,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub config: RunConfig,
    /// Training loss before each update.
    pub loss_trace: Vec<f64>,
    pub initial_params: ParamVector,
    pub final_params: ParamVector,
    pub initial_eval: EvalReport,
    pub final_eval: EvalReport,
    /// Distance baselines on the same evaluation episodes (few-shot only).
    pub baselines: Vec<EvalReport>,
}

/// Dataset, class split and evaluation episodes implied by a config.
pub struct Workspace {
    pub dataset: LabeledSet,
    pub train_classes: Vec<usize>,
    pub eval_classes: Vec<usize>,
    pub eval_set: EvalSet,
}

impl Workspace {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let dataset = gen_tree(&config.dataset.tree_spec(config.seed))?;
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, Stream::Split));
        let min_eval = match config.task {
            Task::Sts => 2,
            _ => config.episode.ways,
        };
        let (train_classes, eval_classes) = split_classes(dataset.num_classes(), min_eval, &mut rng)?;
        let eval_set = build_eval_set(config, &dataset, &eval_classes)?;
        Ok(Self {
            dataset,
            train_classes,
            eval_classes,
            eval_set,
        })
    }

    pub fn baselines(&self, config: &RunConfig, params: &ParamVector) -> Result<Vec<EvalReport>> {
        match &self.eval_set {
            EvalSet::Fsl(eps) => {
                let c = params.materialize()?.curvature;
                [Baseline::Euclidean, Baseline::Geodesic]
                    .iter()
                    .map(|&b| baseline_accuracy(eps, b, c, config.projection))
                    .collect()
            }
            _ => Ok(Vec::new()),
        }
    }
}

/// Runs seeded episodic optimization and evaluates before and after.
pub fn train(config: &RunConfig) -> Result<TrainRun> {
    let ws = Workspace::new(config)?;
    let initial = config.initial_params();
    config.check_params(&initial)?;
    let initial_eval = evaluate(&initial, config, &ws.eval_set)?;

    let by_class = ws.dataset.by_class();
    let semantics = match config.task {
        Task::Zsl => class_semantics(&ws.dataset, config),
        _ => Vec::new(),
    };
    let spec = config.kernel.spec();
    let trainable = config.kernel.trainable;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, Stream::Train));
    let mut state = OptimizerState::new(config.optimizer, initial.len());
    let mut params = initial.clone();
    let mut loss_trace = Vec::with_capacity(config.training.steps);

    for t in 0..config.training.steps {
        let (loss, g) = match config.task {
            Task::Fsl => {
                let episode = sample_episode(&ws.dataset, &by_class, &ws.train_classes, &config.episode, &mut rng)?;
                let obj = FslObjective {
                    spec,
                    projection: config.projection,
                    mode: config.score,
                    episode: &episode,
                };
                tape_value_and_grad(&obj, &params, trainable)?
            }
            Task::Zsl => {
                let ways = config.episode.ways.min(ws.train_classes.len());
                let classes: Vec<usize> = ws.train_classes.choose_multiple(&mut rng, ways).copied().collect();
                let batch = sample_zsl_batch(&ws.dataset, &by_class, &semantics, &classes, config.training.batch, &mut rng);
                let obj = ZslObjective {
                    spec,
                    projection: config.projection,
                    mode: config.score,
                    semantic_dim: config.training.semantic_dim,
                    batch: &batch,
                };
                tape_value_and_grad(&obj, &params, trainable)?
            }
            Task::Sts => {
                let batch = sample_sts_batch(&ws.dataset, &by_class, &ws.train_classes, config.training.batch, &mut rng)?;
                let obj = StsObjective {
                    spec,
                    projection: config.projection,
                    temperature: config.training.temperature,
                    batch: &batch,
                };
                tape_value_and_grad(&obj, &params, trainable)?
            }
        };
        if !loss.is_finite() {
            return Err(Error::Divergence { step: t, value: loss });
        }
        if !g.is_finite() {
            return Err(Error::Divergence { step: t, value: f64::NAN });
        }
        loss_trace.push(loss);
        let (next_state, next) = step(&state, &params, &g, config.optimizer.lr)?;
        if !next.is_finite() || next.materialize().is_err() {
            return Err(Error::Divergence { step: t, value: loss });
        }
        state = next_state;
        params = next;
    }

    let final_eval = evaluate(&params, config, &ws.eval_set)?;
    let baselines = ws.baselines(config, &params)?;
    Ok(TrainRun {
        config: config.clone(),
        loss_trace,
        initial_params: initial,
        final_params: params,
        initial_eval,
        final_eval,
        baselines,
    })
}

//! Accuracy and loss over fixed evaluation sets, plus distance baselines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{semantic_embeddings, LabeledSet};
use super::episode::{sample_episode, sample_sts_batch, sample_zsl_batch, Episode, StsBatch, ZslBatch};
use super::losses::{mean_cross_entropy, fsl_logits, sts_logits, zsl_logits, AffineMap};
use crate::config::{stream_seed, RunConfig, Stream, Task};
use crate::diff::kernel::{project, Projection};
use crate::diff::params::ParamVector;
use crate::error::{Error, Result};
use crate::geometry::{geodesic_distance, BallPoint, Curvature};

/// Negative squared Euclidean distance.
pub fn euclidean_baseline_score(q: &[f64], prototype: &[f64]) -> Result<f64> {
    if q.len() != prototype.len() {
        return Err(Error::DimensionMismatch {
            expected: prototype.len(),
            got: q.len(),
        });
    }
    Ok(-q.iter().zip(prototype).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// Negative geodesic distance in the ball.
pub fn geodesic_baseline_score(q: &BallPoint, prototype: &BallPoint) -> Result<f64> {
    Ok(-geodesic_distance(q, prototype)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub method: String,
    pub episodes: usize,
    pub accuracy: f64,
    /// `1.96 * stderr` of the per-episode accuracy.
    pub ci95: f64,
    /// Mean loss over episodes; absent for baselines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_loss: Option<f64>,
}

/// Fixed evaluation episodes for one task.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalSet {
    Fsl(Vec<Episode>),
    Zsl(Vec<ZslBatch>),
    Sts(Vec<StsBatch>),
}

impl EvalSet {
    pub fn len(&self) -> usize {
        match self {
            EvalSet::Fsl(v) => v.len(),
            EvalSet::Zsl(v) => v.len(),
            EvalSet::Sts(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            EvalSet::Fsl(_) => Task::Fsl,
            EvalSet::Zsl(_) => Task::Zsl,
            EvalSet::Sts(_) => Task::Sts,
        }
    }
}

/// Semantic descriptors for every class, built from class feature means.
pub fn class_semantics(set: &LabeledSet, config: &RunConfig) -> Vec<Vec<f64>> {
    let means: Vec<Vec<f64>> = set
        .by_class()
        .iter()
        .map(|idx| {
            let mut m = vec![0.0; set.dim()];
            for &i in idx {
                for (a, x) in m.iter_mut().zip(&set.features()[i]) {
                    *a += x;
                }
            }
            m.iter().map(|a| a / idx.len() as f64).collect()
        })
        .collect();
    semantic_embeddings(&means, config.training.semantic_dim, stream_seed(config.seed, Stream::Semantic))
}

/// Seeded evaluation episodes over the held-out classes.
pub fn build_eval_set(config: &RunConfig, set: &LabeledSet, eval_classes: &[usize]) -> Result<EvalSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, Stream::Eval));
    let by_class = set.by_class();
    let n = config.training.eval_episodes;
    let ways = config.episode.ways;
    Ok(match config.task {
        Task::Fsl => EvalSet::Fsl(
            (0..n)
                .map(|_| sample_episode(set, &by_class, eval_classes, &config.episode, &mut rng))
                .collect::<Result<_>>()?,
        ),
        Task::Zsl => {
            let sem = class_semantics(set, config);
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let classes: Vec<usize> = rand::seq::IndexedRandom::choose_multiple(eval_classes, &mut rng, ways.min(eval_classes.len()))
                    .copied()
                    .collect();
                out.push(sample_zsl_batch(set, &by_class, &sem, &classes, ways * config.episode.queries, &mut rng));
            }
            EvalSet::Zsl(out)
        }
        Task::Sts => EvalSet::Sts(
            (0..n)
                .map(|_| sample_sts_batch(set, &by_class, eval_classes, config.training.batch, &mut rng))
                .collect::<Result<_>>()?,
        ),
    })
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn accuracy(logits: &[Vec<f64>], targets: &[usize]) -> f64 {
    let hits = logits
        .iter()
        .zip(targets)
        .filter(|(l, &t)| argmax(l) == t)
        .count();
    hits as f64 / logits.len() as f64
}

fn summarize(task: Task, method: &str, per_episode: &[(f64, Option<f64>)]) -> EvalReport {
    let n = per_episode.len() as f64;
    let mean = per_episode.iter().map(|p| p.0).sum::<f64>() / n;
    let var = if per_episode.len() > 1 {
        per_episode.iter().map(|p| (p.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mean_loss = per_episode
        .iter()
        .map(|p| p.1)
        .sum::<Option<f64>>()
        .map(|s| s / n);
    EvalReport {
        task,
        method: method.to_string(),
        episodes: per_episode.len(),
        accuracy: mean,
        ci95: 1.96 * (var / n).sqrt(),
        mean_loss,
    }
}

/// Classification accuracy (argmax score) and mean loss of `params`.
pub fn evaluate(params: &ParamVector, config: &RunConfig, episodes: &EvalSet) -> Result<EvalReport> {
    if episodes.is_empty() {
        return Err(Error::InvalidParameter("evaluation needs at least one episode".into()));
    }
    let kernel = params.kernel(&config.kernel.spec());
    let projection = config.projection;
    let mode = config.score;
    let per: Vec<(f64, Option<f64>)> = match episodes {
        EvalSet::Fsl(eps) => eps
            .par_iter()
            .map(|ep| {
                let logits = fsl_logits(&kernel, projection, ep, mode)?;
                let loss = mean_cross_entropy(&logits, &ep.query_labels)?;
                Ok((accuracy(&logits, &ep.query_labels), Some(loss)))
            })
            .collect::<Result<_>>()?,
        EvalSet::Zsl(batches) => {
            let map = AffineMap::new(&params.head, config.training.semantic_dim, config.dataset.dim)?;
            batches
                .par_iter()
                .map(|b| {
                    let logits = zsl_logits(&kernel, projection, &b.class_embeddings, &b.visual, &map, mode)?;
                    let loss = mean_cross_entropy(&logits, &b.labels)?;
                    Ok((accuracy(&logits, &b.labels), Some(loss)))
                })
                .collect::<Result<_>>()?
        }
        EvalSet::Sts(batches) => batches
            .par_iter()
            .map(|b| {
                let logits = sts_logits(
                    &kernel,
                    projection,
                    &b.anchors,
                    &b.positives,
                    &b.negatives,
                    config.training.temperature,
                )?;
                let targets: Vec<usize> = (0..b.anchors.len()).collect();
                let loss = mean_cross_entropy(&logits, &targets)?;
                Ok((accuracy(&logits, &targets), Some(loss)))
            })
            .collect::<Result<_>>()?,
    };
    Ok(summarize(episodes.task(), config.kernel.variant.name(), &per))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Euclidean,
    Geodesic,
}

/// Nearest-prototype accuracy of a distance baseline on few-shot episodes.
pub fn baseline_accuracy(
    episodes: &[Episode],
    baseline: Baseline,
    c: Curvature,
    projection: Projection,
) -> Result<EvalReport> {
    if episodes.is_empty() {
        return Err(Error::InvalidParameter("evaluation needs at least one episode".into()));
    }
    let per: Vec<(f64, Option<f64>)> = episodes
        .par_iter()
        .map(|ep| {
            let protos = ep.prototypes();
            let logits: Vec<Vec<f64>> = match baseline {
                Baseline::Euclidean => ep
                    .query
                    .iter()
                    .map(|q| protos.iter().map(|p| euclidean_baseline_score(q, p)).collect::<Result<_>>())
                    .collect::<Result<_>>()?,
                Baseline::Geodesic => {
                    let to_ball = |x: &Vec<f64>| BallPoint::from_real(&project(x, c.value(), projection), c);
                    let pb: Vec<BallPoint> = protos.iter().map(to_ball).collect::<Result<_>>()?;
                    ep.query
                        .iter()
                        .map(|q| {
                            let qb = to_ball(q)?;
                            pb.iter().map(|p| geodesic_baseline_score(&qb, p)).collect::<Result<_>>()
                        })
                        .collect::<Result<_>>()?
                }
            };
            Ok((accuracy(&logits, &ep.query_labels), None))
        })
        .collect::<Result<_>>()?;
    let name = match baseline {
        Baseline::Euclidean => "euclidean",
        Baseline::Geodesic => "geodesic",
    };
    Ok(summarize(Task::Fsl, name, &per))
}

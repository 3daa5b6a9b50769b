//! The three training objectives, generic over [`Real`].

use super::episode::Episode;
use crate::diff::kernel::{project, DiffKernel, Projection, Rep, ScoreMode};
use crate::diff::real::{cross_entropy, dot, Real};
use crate::error::{Error, Result};

fn lift<R: Real>(x: &[f64]) -> Vec<R> {
    x.iter().map(|&v| R::from_f64(v)).collect()
}

fn check_dim<R>(kernel: &DiffKernel<R>, dim: usize) -> Result<()> {
    match kernel.poles.first() {
        Some(p) if p.len() != dim => Err(Error::DimensionMismatch {
            expected: p.len(),
            got: dim,
        }),
        _ => Ok(()),
    }
}

fn rep<R: Real>(kernel: &DiffKernel<R>, projection: Projection, x: Vec<R>) -> Rep<R> {
    kernel.prepare(project(&x, kernel.c, projection))
}

/// Per-query class scores for an episode.
pub fn fsl_logits<R: Real>(
    kernel: &DiffKernel<R>,
    projection: Projection,
    episode: &Episode,
    mode: ScoreMode,
) -> Result<Vec<Vec<R>>> {
    check_dim(kernel, episode.dim())?;
    let protos: Vec<Rep<R>> = episode
        .prototypes()
        .iter()
        .map(|p| rep(kernel, projection, lift(p)))
        .collect();
    Ok(episode
        .query
        .iter()
        .map(|q| {
            let q = rep(kernel, projection, lift(q));
            protos.iter().map(|p| kernel.score(mode, &q, p)).collect()
        })
        .collect())
}

/// Prototypical cross-entropy, averaged over queries.
pub fn fsl_loss<R: Real>(
    kernel: &DiffKernel<R>,
    projection: Projection,
    episode: &Episode,
    mode: ScoreMode,
) -> Result<R> {
    let logits = fsl_logits(kernel, projection, episode, mode)?;
    mean_cross_entropy(&logits, &episode.query_labels)
}

pub(crate) fn mean_cross_entropy<R: Real>(logits: &[Vec<R>], targets: &[usize]) -> Result<R> {
    if logits.is_empty() {
        return Err(Error::InvalidParameter("no queries to score".into()));
    }
    let total = logits
        .iter()
        .zip(targets)
        .fold(R::zero(), |acc, (l, &t)| acc + cross_entropy(l, t));
    Ok(total / logits.len() as f64)
}

/// Affine map `x -> W x + b` read from a flat slice: `W` row-major
/// (`out_dim x in_dim`) followed by `b`.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap<'a, R> {
    pub params: &'a [R],
    pub in_dim: usize,
    pub out_dim: usize,
}

impl<'a, R: Real> AffineMap<'a, R> {
    pub fn new(params: &'a [R], in_dim: usize, out_dim: usize) -> Result<Self> {
        let want = Self::len(in_dim, out_dim);
        if params.len() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                got: params.len(),
            });
        }
        Ok(Self {
            params,
            in_dim,
            out_dim,
        })
    }

    pub fn len(in_dim: usize, out_dim: usize) -> usize {
        out_dim * (in_dim + 1)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<R>> {
        if x.len() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                got: x.len(),
            });
        }
        let x: Vec<R> = lift(x);
        let bias = &self.params[self.out_dim * self.in_dim..];
        Ok((0..self.out_dim)
            .map(|r| dot(&self.params[r * self.in_dim..(r + 1) * self.in_dim], &x) + bias[r])
            .collect())
    }
}

/// Per-sample scores against every mapped class descriptor.
pub fn zsl_logits<R: Real>(
    kernel: &DiffKernel<R>,
    projection: Projection,
    class_embeddings: &[Vec<f64>],
    visual: &[Vec<f64>],
    map: &AffineMap<'_, R>,
    mode: ScoreMode,
) -> Result<Vec<Vec<R>>> {
    check_dim(kernel, map.out_dim)?;
    let anchors: Vec<Rep<R>> = class_embeddings
        .iter()
        .map(|s| Ok(rep(kernel, projection, map.apply(s)?)))
        .collect::<Result<_>>()?;
    visual
        .iter()
        .map(|v| {
            if v.len() != map.out_dim {
                return Err(Error::DimensionMismatch {
                    expected: map.out_dim,
                    got: v.len(),
                });
            }
            let v = rep(kernel, projection, lift(v));
            Ok(anchors.iter().map(|a| kernel.score(mode, &v, a)).collect())
        })
        .collect()
}

/// Cross-entropy of each visual sample against all class anchors.
pub fn zsl_loss<R: Real>(
    kernel: &DiffKernel<R>,
    projection: Projection,
    class_embeddings: &[Vec<f64>],
    visual: &[Vec<f64>],
    labels: &[usize],
    map: &AffineMap<'_, R>,
    mode: ScoreMode,
) -> Result<R> {
    if visual.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: visual.len(),
            got: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_embeddings.len()) {
        return Err(Error::InvalidParameter(format!("label {bad} has no class embedding")));
    }
    let logits = zsl_logits(kernel, projection, class_embeddings, visual, map, mode)?;
    mean_cross_entropy(&logits, labels)
}

/// In-batch logits `k(a_i, c)/tau` over candidates `[p_0..p_B, n_0..n_B]`.
pub fn sts_logits<R: Real>(
    kernel: &DiffKernel<R>,
    projection: Projection,
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    temperature: f64,
) -> Result<Vec<Vec<R>>> {
    if positives.len() != anchors.len() || negatives.len() != anchors.len() {
        return Err(Error::DimensionMismatch {
            expected: anchors.len(),
            got: if positives.len() != anchors.len() {
                positives.len()
            } else {
                negatives.len()
            },
        });
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if let Some(first) = anchors.first() {
        check_dim(kernel, first.len())?;
    }
    let reps = |xs: &[Vec<f64>]| -> Vec<Rep<R>> {
        xs.iter().map(|x| rep(kernel, projection, lift(x))).collect()
    };
    let cands: Vec<Rep<R>> = reps(positives).into_iter().chain(reps(negatives)).collect();
    Ok(reps(anchors)
        .iter()
        .map(|a| cands.iter().map(|c| kernel.value(a, c) / temperature).collect())
        .collect())
}

/// Contrastive cross-entropy where anchor `i` must pick positive `i`.
pub fn sts_loss<R: Real>(
    kernel: &DiffKernel<R>,
    projection: Projection,
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    temperature: f64,
) -> Result<R> {
    let logits = sts_logits(kernel, projection, anchors, positives, negatives, temperature)?;
    let targets: Vec<usize> = (0..anchors.len()).collect();
    mean_cross_entropy(&logits, &targets)
}

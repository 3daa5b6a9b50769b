//! Episode and batch samplers over a [`LabeledSet`].
//!
//! Episodes hold raw features; projection into the ball happens inside the
//! losses so prototypes can be averaged before projecting.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::LabeledSet;
use crate::diff::kernel::{project, Projection};
use crate::error::{Error, Result};
use crate::geometry::{BallPoint, Curvature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeSpec {
    pub ways: usize,
    pub shots: usize,
    pub queries: usize,
}

impl Default for EpisodeSpec {
    fn default() -> Self {
        Self {
            ways: 5,
            shots: 1,
            queries: 5,
        }
    }
}

impl EpisodeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ways < 2 || self.shots < 1 || self.queries < 1 {
            return Err(Error::InvalidConfig(
                "episodes need ways >= 2, shots >= 1 and queries >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A C-way M-shot task. `query_labels` index into `support`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub support: Vec<Vec<Vec<f64>>>,
    pub query: Vec<Vec<f64>>,
    pub query_labels: Vec<usize>,
}

impl Episode {
    pub fn new(support: Vec<Vec<Vec<f64>>>, query: Vec<Vec<f64>>, query_labels: Vec<usize>) -> Result<Self> {
        if support.is_empty() || support.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("episode has an empty class".into()));
        }
        if query.len() != query_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: query.len(),
                got: query_labels.len(),
            });
        }
        if let Some(&bad) = query_labels.iter().find(|&&l| l >= support.len()) {
            return Err(Error::InvalidParameter(format!("query label {bad} has no support class")));
        }
        let dim = support[0][0].len();
        let rows = support.iter().flatten().chain(&query);
        if let Some(row) = rows.clone().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        Ok(Self {
            support,
            query,
            query_labels,
        })
    }

    pub fn ways(&self) -> usize {
        self.support.len()
    }

    pub fn dim(&self) -> usize {
        self.support[0][0].len()
    }

    /// Mean of each class's support features.
    pub fn prototypes(&self) -> Vec<Vec<f64>> {
        self.support
            .iter()
            .map(|shots| {
                let mut mean = vec![0.0; self.dim()];
                for s in shots {
                    for (m, x) in mean.iter_mut().zip(s) {
                        *m += x;
                    }
                }
                mean.iter().map(|m| m / shots.len() as f64).collect()
            })
            .collect()
    }

    /// Projected prototypes and queries.
    pub fn ball_points(&self, c: Curvature, projection: Projection) -> Result<(Vec<BallPoint>, Vec<BallPoint>)> {
        let to_ball = |x: &Vec<f64>| BallPoint::from_real(&project(x, c.value(), projection), c);
        let protos = self.prototypes().iter().map(to_ball).collect::<Result<_>>()?;
        let queries = self.query.iter().map(to_ball).collect::<Result<_>>()?;
        Ok((protos, queries))
    }
}

/// Seeded split of class ids into `(train, eval)`; roughly a third is held out
/// and the held-out part always has at least `min_eval` classes.
pub fn split_classes<R: Rng + ?Sized>(num_classes: usize, min_eval: usize, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_eval = (num_classes / 3).max(min_eval);
    if n_eval >= num_classes || num_classes - n_eval < min_eval.min(2) {
        return Err(Error::InvalidConfig(format!(
            "{num_classes} classes cannot be split with {min_eval} held out"
        )));
    }
    let mut ids: Vec<usize> = (0..num_classes).collect();
    ids.shuffle(rng);
    let mut eval = ids.split_off(num_classes - n_eval);
    ids.sort_unstable();
    eval.sort_unstable();
    Ok((ids, eval))
}

/// Draws `ways` classes from `pool` and disjoint support/query samples.
pub fn sample_episode<R: Rng + ?Sized>(
    set: &LabeledSet,
    by_class: &[Vec<usize>],
    pool: &[usize],
    spec: &EpisodeSpec,
    rng: &mut R,
) -> Result<Episode> {
    if pool.len() < spec.ways {
        return Err(Error::InvalidConfig(format!(
            "{}-way episodes need {} classes, pool has {}",
            spec.ways,
            spec.ways,
            pool.len()
        )));
    }
    let need = spec.shots + spec.queries;
    let classes: Vec<usize> = pool.choose_multiple(rng, spec.ways).copied().collect();
    let mut support = Vec::with_capacity(spec.ways);
    let mut query = Vec::new();
    let mut query_labels = Vec::new();
    for (slot, &class) in classes.iter().enumerate() {
        let members = &by_class[class];
        if members.len() < need {
            return Err(Error::InvalidConfig(format!(
                "class {class} has {} samples, episodes need {need}",
                members.len()
            )));
        }
        let picked: Vec<usize> = members.choose_multiple(rng, need).copied().collect();
        support.push(picked[..spec.shots].iter().map(|&i| set.features()[i].clone()).collect());
        for &i in &picked[spec.shots..] {
            query.push(set.features()[i].clone());
            query_labels.push(slot);
        }
    }
    Episode::new(support, query, query_labels)
}

/// Visual samples scored against class semantic descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZslBatch {
    /// One semantic vector per candidate class.
    pub class_embeddings: Vec<Vec<f64>>,
    pub visual: Vec<Vec<f64>>,
    /// Index into `class_embeddings`.
    pub labels: Vec<usize>,
}

pub fn sample_zsl_batch<R: Rng + ?Sized>(
    set: &LabeledSet,
    by_class: &[Vec<usize>],
    semantics: &[Vec<f64>],
    classes: &[usize],
    batch: usize,
    rng: &mut R,
) -> ZslBatch {
    let class_embeddings = classes.iter().map(|&c| semantics[c].clone()).collect();
    let mut visual = Vec::with_capacity(batch);
    let mut labels = Vec::with_capacity(batch);
    for _ in 0..batch {
        let slot = rng.random_range(0..classes.len());
        let i = *by_class[classes[slot]].choose(rng).expect("classes are non-empty");
        visual.push(set.features()[i].clone());
        labels.push(slot);
    }
    ZslBatch {
        class_embeddings,
        visual,
        labels,
    }
}

/// Anchor/positive pairs share a class; negatives come from another class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StsBatch {
    pub anchors: Vec<Vec<f64>>,
    pub positives: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sample_sts_batch<R: Rng + ?Sized>(
    set: &LabeledSet,
    by_class: &[Vec<usize>],
    classes: &[usize],
    batch: usize,
    rng: &mut R,
) -> Result<StsBatch> {
    if classes.len() < 2 {
        return Err(Error::InvalidConfig("contrastive batches need two classes".into()));
    }
    let mut out = StsBatch {
        anchors: Vec::with_capacity(batch),
        positives: Vec::with_capacity(batch),
        negatives: Vec::with_capacity(batch),
    };
    for _ in 0..batch {
        let pair: Vec<usize> = classes.choose_multiple(rng, 2).copied().collect();
        let members = &by_class[pair[0]];
        if members.len() < 2 {
            return Err(Error::InvalidConfig(format!("class {} needs two samples", pair[0])));
        }
        let ap: Vec<usize> = members.choose_multiple(rng, 2).copied().collect();
        let neg = *by_class[pair[1]].choose(rng).expect("classes are non-empty");
        out.anchors.push(set.features()[ap[0]].clone());
        out.positives.push(set.features()[ap[1]].clone());
        out.negatives.push(set.features()[neg].clone());
    }
    Ok(out)
}

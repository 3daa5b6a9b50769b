//! Synthetic hierarchical datasets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator settings for [`gen_tree`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeSpec {
    pub seed: u64,
    /// Number of edges from the root to a leaf.
    pub depth: usize,
    pub branching: usize,
    pub dim: usize,
    pub noise_sigma: f64,
    pub samples_per_leaf: usize,
    /// Euclidean length of every parent-to-child edge.
    pub step_length: f64,
    /// Replace labels by a seeded permutation of themselves.
    pub random_labels: bool,
}

impl Default for TreeSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            depth: 3,
            branching: 3,
            dim: 8,
            noise_sigma: 0.275,
            samples_per_leaf: 20,
            step_length: 0.5,
            random_labels: false,
        }
    }
}

impl TreeSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.depth < 2 {
            return bad("tree depth must be >= 2");
        }
        if self.branching < 2 {
            return bad("tree branching must be >= 2");
        }
        if self.dim < 2 {
            return bad("feature dimension must be >= 2");
        }
        if self.samples_per_leaf < 1 {
            return bad("samples_per_leaf must be >= 1");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be finite and >= 0");
        }
        if !(self.step_length.is_finite() && self.step_length > 0.0) {
            return bad("step_length must be positive");
        }
        if self.num_classes() > 1_000_000 {
            return bad("tree has too many leaves");
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.branching.saturating_pow(self.depth as u32)
    }
}

/// Features with integer class labels `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
    /// Per-class centre (the leaf embedding) when generated.
    centers: Option<Vec<Vec<f64>>>,
    spec: Option<TreeSpec>,
}

impl LabeledSet {
    /// Labels must cover `0..max+1` with no gaps.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidParameter("dataset is empty".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("features must have dimension >= 1".into()));
        }
        for row in &features {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite feature".into()));
            }
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!("class {missing} has no samples")));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            centers: None,
            spec: None,
        })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn centers(&self) -> Option<&[Vec<f64>]> {
        self.centers.as_deref()
    }

    pub fn spec(&self) -> Option<&TreeSpec> {
        self.spec.as_ref()
    }

    /// Sample indices grouped by class.
    pub fn by_class(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Same features with labels permuted by a seeded shuffle.
    pub fn with_shuffled_labels(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels = self.labels.clone();
        labels.shuffle(&mut rng);
        Self {
            labels,
            centers: None,
            ..self.clone()
        }
    }
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Tree with the root at the origin; each child is its parent plus a random
/// unit direction times `step_length`. Leaves are classes and samples are
/// leaf embeddings plus isotropic Gaussian noise.
pub fn gen_tree(spec: &TreeSpec) -> Result<LabeledSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut level = vec![vec![0.0; spec.dim]];
    for _ in 0..spec.depth {
        let mut next = Vec::with_capacity(level.len() * spec.branching);
        for parent in &level {
            for _ in 0..spec.branching {
                let dir = random_direction(&mut rng, spec.dim);
                next.push(
                    parent
                        .iter()
                        .zip(&dir)
                        .map(|(p, d)| p + spec.step_length * d)
                        .collect::<Vec<f64>>(),
                );
            }
        }
        level = next;
    }
    let mut features = Vec::with_capacity(level.len() * spec.samples_per_leaf);
    let mut labels = Vec::with_capacity(features.capacity());
    for (class, leaf) in level.iter().enumerate() {
        for _ in 0..spec.samples_per_leaf {
            features.push(
                leaf.iter()
                    .map(|x| {
                        let e: f64 = rng.sample(StandardNormal);
                        x + spec.noise_sigma * e
                    })
                    .collect(),
            );
            labels.push(class);
        }
    }
    let mut set = LabeledSet::new(features, labels)?;
    set.centers = Some(level);
    set.spec = Some(*spec);
    if spec.random_labels {
        set = set.with_shuffled_labels(spec.seed ^ 0x5EED_1AB5);
        set.spec = Some(*spec);
    }
    Ok(set)
}

pub fn gen_tree_dataset(
    seed: u64,
    depth: usize,
    branching: usize,
    dim: usize,
    noise_sigma: f64,
    samples_per_leaf: usize,
) -> Result<LabeledSet> {
    gen_tree(&TreeSpec {
        seed,
        depth,
        branching,
        dim,
        noise_sigma,
        samples_per_leaf,
        ..TreeSpec::default()
    })
}

/// Seeded semantic descriptors: `M * center_c` with a random Gaussian
/// `sem_dim x dim` matrix `M` scaled by `1/sqrt(dim)`.
pub fn semantic_embeddings(centers: &[Vec<f64>], sem_dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = centers.first().map_or(0, Vec::len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (dim.max(1) as f64).sqrt();
    let m: Vec<Vec<f64>> = (0..sem_dim)
        .map(|_| {
            (0..dim)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    centers
        .iter()
        .map(|c| {
            m.iter()
                .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

//! Synthetic hierarchical tasks for the few-shot, zero-shot and contrastive
//! objectives, with training and evaluation harnesses.

pub mod data;
pub mod episode;
pub mod eval;
pub mod losses;
pub mod train;

pub use data::{gen_tree, gen_tree_dataset, LabeledSet, TreeSpec};
pub use episode::{sample_episode, Episode, EpisodeSpec, StsBatch, ZslBatch};
pub use eval::{
    baseline_accuracy, euclidean_baseline_score, evaluate, geodesic_baseline_score, Baseline, EvalReport, EvalSet,
};
pub use losses::{fsl_loss, sts_loss, zsl_loss, AffineMap};
pub use train::{train, TrainRun, Workspace};

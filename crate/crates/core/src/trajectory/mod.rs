//! Nether Knight trajectory analysis.

mod analysis;
mod canon;
mod dbscan;
mod features;
mod profile;
mod types;
mod umap;

pub use analysis::{analyze, TrajectoryAnalysis, TrajectoryConfig, TrialRow};
pub use canon::{
    canonicalize, extract_nk_trajectory, heading_series, reflect, resample, HeadingSeries,
    TrajSample, Trajectory, DEFAULT_LENGTH,
};
pub use dbscan::{dbscan, n_clusters, ClusterParams, NOISE};
pub use features::{
    classify_trial, features27, lateral_deviations, max_lateral_deviation, FeatureVector,
    ALIGNED_DEG, FEATURE_NAMES, N_FEATURES,
};
pub use profile::{
    identify, jsd, majority_mapping_accuracy, session_profile, Identification, SessionEntry,
    RANK_VOTES,
};
pub use types::{SessionProfile, TrajectoryError, TrialType};
pub use umap::{embed_2d, find_ab, fuzzy_graph, knn, smooth_knn, zscore, EmbedParams};

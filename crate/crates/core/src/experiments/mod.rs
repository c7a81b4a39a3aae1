//! Evaluation campaigns: patterns, noise, classification, faults.

pub mod dataset;
pub mod faults;
pub mod heatmap;
pub mod output;
pub mod patterns;
pub mod tasks;

pub use dataset::Dataset;
pub use faults::{apply_variation, inject_stuck, FaultSpec};
pub use heatmap::{binarize_column, export_heatmap, HeatmapFiles};
pub use output::{config_hash, write_sweep_csv, MetricsReport};
pub use patterns::{LabeledPattern, PatternSet};
pub use tasks::{
    build_network, encode_patterns, mean_std, run_classification, run_fault_campaign,
    run_fault_sweep, run_noise_sweep, run_pattern_task, test_patterns, CampaignSummary,
    ClassificationRun, FaultAxis, FeatureEncoder, SweepRow, TrainedPatterns,
};

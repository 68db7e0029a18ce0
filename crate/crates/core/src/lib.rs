//! Core library for Chinese back-translation evaluation: corpus loading,
//! segmentation, pairwise metrics, rank statistics and report emission.

pub mod corpus;
pub mod metrics;
pub mod report;
pub mod segmentation;
pub mod stats;

//! Unsupervised exploration and statistical screening.

mod kmeans;
mod mwu;

pub use kmeans::{
    elbow_curve, elbow_curve_with, kmeans, kmeans_with, top_terms, ClusterResult, Distance,
};
pub use mwu::{
    mann_whitney_u, parse_interval, screen_feature, ScreenFeature, UTestMethod, UTestResult,
};

use std::time::Duration;

use serde::{Serialize, Serializer};

/// Counters and bounds collected over one solver run.
///
/// Everything except [`RunStats::timing`] is a deterministic function of the
/// input and configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub phases: u64,
    pub paths: u64,
    /// Σ|P| over all augmenting paths.
    pub sum_path_edges: u64,
    /// Σ⌈|P|/2⌉, the number of forward edges over all augmenting paths.
    pub sum_half_ceil: u64,
    /// ⌊2C/δ′⌋ + 1.
    pub phase_bound: u64,
    /// 𝒰·(⌊2C/δ′⌋ + 1).
    pub path_bound: u64,
    /// Total integer supply 𝒰 routed by the run.
    pub total_supply: u64,
    pub dijkstra_edge_visits: u64,
    pub dfs_edge_visits: u64,
    pub augment_edge_updates: u64,
    pub timing: StageTiming,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTiming {
    #[serde(rename = "scale_ms", serialize_with = "as_millis")]
    pub scale: Duration,
    #[serde(rename = "search_ms", serialize_with = "as_millis")]
    pub search: Duration,
    /// DFS time, excluding the augmentations it triggers.
    #[serde(rename = "dfs_ms", serialize_with = "as_millis")]
    pub dfs: Duration,
    #[serde(rename = "augment_ms", serialize_with = "as_millis")]
    pub augment: Duration,
    #[serde(rename = "recover_ms", serialize_with = "as_millis")]
    pub recover: Duration,
    #[serde(rename = "total_ms", serialize_with = "as_millis")]
    pub total: Duration,
}

impl StageTiming {
    /// Fraction of total time spent inside augmentations, if any time was recorded.
    pub fn augment_share(&self) -> Option<f64> {
        let total = self.total.as_secs_f64();
        (total > 0.0).then(|| self.augment.as_secs_f64() / total)
    }
}

pub fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn as_millis<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(millis(*d))
}

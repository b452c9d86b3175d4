use serde::{Deserialize, Serialize};

/// Sampling and discretization knobs shared by the measurement pipeline.
///
/// All defaults are documented here and embedded verbatim in reports so a
/// run can be reproduced from its output alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Segments each mesh edge is split into before shortest-path sweeps.
    /// 1 leaves the plain edge graph; larger values add Steiner points and
    /// in-face chords, shrinking the edge-graph overestimate.
    pub subdivision: u32,
    /// Evenly spaced regular values sampled per critical interval, in
    /// addition to the interval midpoints.
    pub levels_per_interval: usize,
    /// Evenly spaced polyline points used when estimating a level
    /// component's diameter.
    pub diameter_samples: usize,
    /// Farthest-point landmarks for diameter lower bounds on large meshes.
    pub landmark_count: usize,
    /// Meshes with at most this many vertices get exact all-pairs sweeps
    /// for diameter and distortion; larger meshes fall back to sampling.
    pub exact_pair_threshold: usize,
    /// Farthest-point-seeded sources used in sampled distortion mode.
    pub sampled_pairs: usize,
    /// Relative slack budget applied when auditing paper inequalities
    /// against measured (overestimating) geodesics. Never applied to the
    /// bound formulas themselves.
    pub audit_slack: f64,
    /// Seed for randomized audits.
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            subdivision: 2,
            levels_per_interval: 8,
            diameter_samples: 24,
            landmark_count: 64,
            exact_pair_threshold: 3000,
            sampled_pairs: 256,
            audit_slack: 0.05,
            seed: 2026,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.subdivision == 0 {
            return Err(crate::ReebError::InvalidParameter(
                "subdivision must be >= 1".into(),
            ));
        }
        if self.diameter_samples < 2 {
            return Err(crate::ReebError::InvalidParameter(
                "diameter_samples must be >= 2".into(),
            ));
        }
        if self.landmark_count == 0 {
            return Err(crate::ReebError::InvalidParameter(
                "landmark_count must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

//! Scene → simulation → sample assembly, and the on-disk corpus.
//!
//! A sample pairs the rescaled receiver gather (`rows x 11` values in
//! `[-50, 50]`) with the binary obstacle mask of the scene that produced it.

mod corpus;
mod record;
mod split;

use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::Mask;
use crate::scenegen::{generate_scene, rasterize, SceneConfig, SceneSpec};
use crate::wavesim::{
    simulate, GridSpec, RawGather, ReceiverArray, SimError, SourceSpec, N_RECEIVERS,
};

pub use corpus::{
    ArrayLayout, Corpus, CorpusBuilder, DatasetManifest, PartialRun, SampleEntry, FORMAT_NAME,
    FORMAT_VERSION, MANIFEST_FILE,
};
pub use record::{decode_record, encode_record};
pub use split::{assign_splits, split_counts, split_key, Split, SplitCounts};

/// Bound of the rescaled gather: values lie in `[-GATHER_BOUND, GATHER_BOUND]`.
pub const GATHER_BOUND: f32 = 50.0;

/// Attempts made for one sample before giving up on substitutes.
pub const MAX_SUBSTITUTIONS: u32 = 4;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid dataset configuration: {0}")]
    Config(String),
    #[error("simulation failed for seed {seed}: {source}")]
    Simulation {
        seed: u64,
        #[source]
        source: SimError,
    },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corpus format error: {0}")]
    Format(String),
    #[error("{0}")]
    Mismatch(String),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

/// Physics and scene configuration shared by every sample of a corpus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub grid: GridSpec,
    pub source: SourceSpec,
    pub receivers: ReceiverArray,
    pub scene: SceneConfig,
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let cfg = |e: String| DatasetError::Config(e);
        self.scene.validate().map_err(cfg)?;
        let (w, h) = (self.scene.width, self.scene.height);
        let fastest = self.scene.water_speed.max(self.scene.obstacle_speed) as f64;
        self.grid
            .check_stability(fastest)
            .map_err(|e| cfg(e.to_string()))?;
        self.source.validate(w, h).map_err(|e| cfg(e.to_string()))?;
        self.receivers
            .validate(w, h, self.grid.n_steps)
            .map_err(|e| cfg(e.to_string()))?;
        if self.receivers.len() != N_RECEIVERS {
            return Err(cfg(format!(
                "expected {N_RECEIVERS} receivers, got {}",
                self.receivers.len()
            )));
        }
        Ok(())
    }

    /// `(rows, receivers)` of the stored gather.
    pub fn input_shape(&self) -> (usize, usize) {
        (
            self.receivers.recording_len(self.grid.n_steps),
            self.receivers.len(),
        )
    }

    /// `(rows, cols)` of the target mask.
    pub fn target_shape(&self) -> (usize, usize) {
        (self.scene.height, self.scene.width)
    }

    pub fn record_bytes(&self) -> usize {
        let (r, c) = self.input_shape();
        let (h, w) = self.target_shape();
        4 * r * c + h * w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    /// Seed the sample was requested under.
    pub seed: u64,
    /// Seed actually simulated; differs from `seed` after a substitution.
    pub effective_seed: u64,
    pub scene: SceneSpec,
    pub scale_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    /// Rescaled gather, row-major `input_shape`.
    pub input: Vec<f32>,
    pub input_shape: (usize, usize),
    pub target: Mask,
    pub meta: SampleMeta,
}

/// Scales the whole gather by one factor so that its largest magnitude is
/// exactly [`GATHER_BOUND`]. Returns the values and the factor; an all-zero
/// gather stays zero with factor 0.
pub fn rescale_gather(raw: &RawGather) -> (Vec<f32>, f64) {
    rescale_values(raw.samples())
}

pub(crate) fn rescale_values(values: &[f32]) -> (Vec<f32>, f64) {
    let max = values.iter().fold(0.0f32, |m, v| m.max(v.abs())) as f64;
    if max == 0.0 {
        return (vec![0.0; values.len()], 0.0);
    }
    let bound = GATHER_BOUND as f64;
    // v * bound / max rather than v * (bound / max): the product is exact for
    // f32 inputs, so the extremum maps to exactly +-bound.
    let out = values
        .iter()
        .map(|&v| ((v as f64 * bound / max) as f32).clamp(-GATHER_BOUND, GATHER_BOUND))
        .collect();
    (out, bound / max)
}

/// Builds the sample for `seed` without substitution.
pub fn build_sample(seed: u64, cfg: &DatasetConfig) -> Result<SamplePair, DatasetError> {
    build_sample_as(seed, seed, cfg)
}

fn build_sample_as(
    seed: u64,
    effective_seed: u64,
    cfg: &DatasetConfig,
) -> Result<SamplePair, DatasetError> {
    let scene = generate_scene(effective_seed, &cfg.scene);
    let sim_err = |source| DatasetError::Simulation {
        seed: effective_seed,
        source,
    };
    let (model, target) = rasterize(&scene, &cfg.scene).map_err(sim_err)?;
    let gather = simulate(&model, &cfg.grid, &cfg.source, &cfg.receivers).map_err(sim_err)?;
    let (input, scale_factor) = rescale_gather(&gather);
    Ok(SamplePair {
        input,
        input_shape: cfg.input_shape(),
        target,
        meta: SampleMeta {
            seed,
            effective_seed,
            scene,
            scale_factor,
        },
    })
}

/// The `attempt`-th replacement for a seed whose simulation diverged:
/// `seed + attempt * 2^32` (wrapping).
pub fn substitute_seed(seed: u64, attempt: u32) -> u64 {
    seed.wrapping_add((attempt as u64) << 32)
}

/// Runs `build` on `seed`, retrying on substitute seeds while it reports a
/// numerical instability. Other errors are returned immediately.
pub fn with_substitution<T>(
    seed: u64,
    mut build: impl FnMut(u64) -> Result<T, DatasetError>,
) -> Result<T, DatasetError> {
    let mut attempt = 0;
    loop {
        let candidate = substitute_seed(seed, attempt);
        match build(candidate) {
            Err(DatasetError::Simulation {
                source: SimError::NonFinite { step },
                ..
            }) if attempt + 1 < MAX_SUBSTITUTIONS => {
                log::warn!(
                    "seed {candidate} diverged at timestep {step}; substituting {}",
                    substitute_seed(seed, attempt + 1)
                );
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// [`build_sample`] with the divergence substitution rule applied.
pub fn build_sample_substituted(
    seed: u64,
    cfg: &DatasetConfig,
) -> Result<SamplePair, DatasetError> {
    with_substitution(seed, |s| build_sample_as(seed, s, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavesim::Cell;

    /// 64x64 scenes and a short run, fast enough for unit tests.
    pub(crate) fn small_config() -> DatasetConfig {
        let scene = SceneConfig {
            width: 64,
            height: 64,
            max_objects: 3,
            min_size: 3,
            max_size: 6,
            center_rows: (20, 60),
            center_cols: (2, 61),
            top_row: 18,
            ..SceneConfig::default()
        };
        let receivers =
            ReceiverArray::new((0..11).map(|j| Cell::new(4, 2 + 6 * j)).collect(), 60).unwrap();
        DatasetConfig {
            grid: GridSpec {
                n_steps: 160,
                ..GridSpec::default()
            },
            source: SourceSpec {
                position: Cell::new(4, 32),
                f0: 40_000.0,
                delay: 30,
            },
            receivers,
            scene,
        }
    }

    #[test]
    fn rescale_by_max_abs() {
        let raw = RawGather::new(2, 0, vec![200.0, -100.0, 4.0, 0.0]);
        let (v, f) = rescale_gather(&raw);
        assert_eq!(v, vec![50.0, -25.0, 1.0, 0.0]);
        assert_eq!(f, 0.25);
    }

    #[test]
    fn rescale_zero_gather() {
        let raw = RawGather::new(2, 0, vec![0.0; 6]);
        assert_eq!(rescale_gather(&raw), (vec![0.0; 6], 0.0));
    }

    #[test]
    fn rescale_hits_bound_at_argmax() {
        let vals = [3.1e-9f32, -7.77e-8, 1.2345e-8, 5.5e-8];
        let (v, _) = rescale_values(&vals);
        assert_eq!(v[1], -50.0);
        assert!(v.iter().all(|x| x.abs() <= 50.0));
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = DatasetConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.input_shape(), (1400, 11));
        assert_eq!(cfg.target_shape(), (256, 256));
        assert_eq!(cfg.record_bytes(), 1400 * 11 * 4 + 65536);
    }

    #[test]
    fn config_rejects_bad_receivers_and_timestep() {
        let cfg = DatasetConfig {
            receivers: ReceiverArray::new(vec![Cell::new(8, 8)], 400).unwrap(),
            ..DatasetConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(DatasetError::Config(_))));
        let mut cfg = DatasetConfig::default();
        cfg.grid.dt = 5e-6;
        assert!(matches!(cfg.validate(), Err(DatasetError::Config(_))));
    }

    #[test]
    fn small_sample_is_deterministic_and_bounded() {
        let cfg = small_config();
        cfg.validate().unwrap();
        let a = build_sample(11, &cfg).unwrap();
        let b = build_sample(11, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.input.len(), 100 * 11);
        let max = a.input.iter().fold(0f32, |m, v| m.max(v.abs()));
        assert_eq!(max, 50.0);
        assert_eq!(a.meta.effective_seed, 11);
        assert_eq!(a.target.count_ones() > 0, a.meta.scene.n_objects > 0);
    }

    #[test]
    fn substitution_rule() {
        assert_eq!(substitute_seed(5, 0), 5);
        assert_eq!(substitute_seed(5, 1), 5 + (1 << 32));
        assert_eq!(substitute_seed(u64::MAX, 1), (1 << 32) - 1);
        let mut tried = Vec::new();
        let out = with_substitution(7, |s| {
            tried.push(s);
            if tried.len() < 3 {
                Err(DatasetError::Simulation {
                    seed: s,
                    source: SimError::NonFinite { step: 9 },
                })
            } else {
                Ok(s)
            }
        })
        .unwrap();
        assert_eq!(tried, vec![7, 7 + (1 << 32), 7 + (2 << 32)]);
        assert_eq!(out, 7 + (2 << 32));
    }

    #[test]
    fn substitution_gives_up() {
        let mut calls = 0;
        let err = with_substitution(1, |s| -> Result<(), _> {
            calls += 1;
            Err(DatasetError::Simulation {
                seed: s,
                source: SimError::NonFinite { step: 1 },
            })
        })
        .unwrap_err();
        assert_eq!(calls, MAX_SUBSTITUTIONS);
        assert!(matches!(err, DatasetError::Simulation { .. }));
        let mut calls = 0;
        let _ = with_substitution(1, |_| -> Result<(), _> {
            calls += 1;
            Err(DatasetError::Config("x".into()))
        });
        assert_eq!(calls, 1);
    }
}

//! Random obstacle scenes: 0 to 10 disks or squares of fast material in
//! water, plus their rasterized velocity models and target masks.
//!
//! Scenes are reproducible across implementations. The random stream is
//! ChaCha with 8 rounds seeded through `ChaCha8Rng::seed_from_u64(seed)`
//! (rand_core's PCG32 seed expansion), consumed one `u64` at a time. A
//! uniform integer in `[lo, hi]` is drawn by rejection: with
//! `span = hi - lo + 1`, draws `x >= 2^64 - (2^64 mod span)` are discarded
//! and the result is `lo + x mod span`. Draw order per scene:
//!
//! 1. object count in `[0, max_objects]`
//! 2. per object: kind (`0` disk, `1` square), size in
//!    `[min_size, max_size]`, centre row, centre column, each range clipped
//!    for the drawn size.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mask::Mask;
use crate::wavesim::{Cell, SimError, VelocityModel, OBSTACLE_SPEED, WATER_SPEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Disk,
    Square,
}

/// A disk of radius `size` or a square of half-side `size`, in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub kind: ShapeKind,
    pub center: Cell,
    pub size: usize,
}

impl Shape {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        let dr = row.abs_diff(self.center.row);
        let dc = col.abs_diff(self.center.col);
        match self.kind {
            ShapeKind::Disk => dr * dr + dc * dc <= self.size * self.size,
            ShapeKind::Square => dr.max(dc) <= self.size,
        }
    }

    /// Inclusive `(row, col)` bounds of the cells the shape may cover.
    /// `None` if the shape pokes past row or column 0.
    fn bounds(&self) -> Option<((usize, usize), (usize, usize))> {
        let c = self.center;
        Some((
            (c.row.checked_sub(self.size)?, c.row + self.size),
            (c.col.checked_sub(self.size)?, c.col + self.size),
        ))
    }
}

/// Generation ranges. Defaults produce 256x256 scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub width: usize,
    pub height: usize,
    pub max_objects: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Inclusive range of candidate centre rows before clipping.
    pub center_rows: (usize, usize),
    /// Inclusive range of candidate centre columns before clipping.
    pub center_cols: (usize, usize),
    /// First row an obstacle may occupy (keeps obstacles clear of the
    /// receiver line).
    pub top_row: usize,
    pub water_speed: f32,
    pub obstacle_speed: f32,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            max_objects: 10,
            min_size: 8,
            max_size: 24,
            center_rows: (48, 247),
            center_cols: (8, 247),
            top_row: 48,
            water_speed: WATER_SPEED,
            obstacle_speed: OBSTACLE_SPEED,
        }
    }
}

impl SceneConfig {
    /// Clipped centre ranges for a shape of `size`.
    fn center_ranges(&self, size: usize) -> ((usize, usize), (usize, usize)) {
        let rows = (
            self.center_rows.0.max(self.top_row + size),
            self.center_rows.1.min(self.height.saturating_sub(size + 1)),
        );
        let cols = (
            self.center_cols.0.max(size),
            self.center_cols.1.min(self.width.saturating_sub(size + 1)),
        );
        (rows, cols)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.min_size > self.max_size {
            return Err(format!(
                "min_size {} exceeds max_size {}",
                self.min_size, self.max_size
            ));
        }
        for size in [self.min_size, self.max_size] {
            let ((r0, r1), (c0, c1)) = self.center_ranges(size);
            if r0 > r1 || c0 > c1 {
                return Err(format!(
                    "no room for a shape of size {size} in a {}x{} grid below row {}",
                    self.width, self.height, self.top_row
                ));
            }
        }
        let ok = |v: f32| (0.0..=crate::wavesim::MAX_SPEED).contains(&v);
        if !ok(self.water_speed) || !ok(self.obstacle_speed) {
            return Err("speeds must lie in [0, 3000] m/s".into());
        }
        if self.water_speed == self.obstacle_speed {
            return Err("obstacle speed must differ from the water speed".into());
        }
        Ok(())
    }
}

/// A generated scene: the seed it came from and its shapes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub n_objects: usize,
    pub shapes: Vec<Shape>,
}

impl SceneSpec {
    pub fn new(seed: u64, shapes: Vec<Shape>) -> Self {
        Self {
            seed,
            n_objects: shapes.len(),
            shapes,
        }
    }

    pub fn validate(&self, cfg: &SceneConfig) -> Result<(), String> {
        if self.n_objects != self.shapes.len() {
            return Err(format!(
                "n_objects is {} but {} shapes are listed",
                self.n_objects,
                self.shapes.len()
            ));
        }
        if self.n_objects > cfg.max_objects {
            return Err(format!(
                "{} objects exceeds the maximum of {}",
                self.n_objects, cfg.max_objects
            ));
        }
        for s in &self.shapes {
            let inside = s.bounds().is_some_and(|((r0, r1), (_, c1))| {
                r0 >= cfg.top_row && r1 < cfg.height && c1 < cfg.width
            });
            if !inside {
                return Err(format!("shape {s:?} leaves the placeable region"));
            }
        }
        Ok(())
    }

    /// One-line JSON record.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("scene serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Uniform integers in inclusive ranges over a ChaCha8 stream.
pub struct SceneRng(ChaCha8Rng);

impl SceneRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi);
        let span = ((hi - lo) as u64).wrapping_add(1);
        if span == 0 {
            // full u64 range
            return self.next_u64() as usize;
        }
        let zone = u64::MAX - (u64::MAX - span + 1) % span;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return lo + (x % span) as usize;
            }
        }
    }
}

pub fn generate_scene(seed: u64, cfg: &SceneConfig) -> SceneSpec {
    let mut rng = SceneRng::new(seed);
    let n = rng.uniform(0, cfg.max_objects);
    let shapes = (0..n)
        .map(|_| {
            let kind = if rng.uniform(0, 1) == 0 {
                ShapeKind::Disk
            } else {
                ShapeKind::Square
            };
            let size = rng.uniform(cfg.min_size, cfg.max_size);
            let ((r0, r1), (c0, c1)) = cfg.center_ranges(size);
            let row = rng.uniform(r0, r1);
            let col = rng.uniform(c0, c1);
            Shape {
                kind,
                center: Cell::new(row, col),
                size,
            }
        })
        .collect();
    SceneSpec::new(seed, shapes)
}

/// Paints the shapes (union) at obstacle speed over water and derives the
/// mask `speed == obstacle_speed`.
pub fn rasterize(scene: &SceneSpec, cfg: &SceneConfig) -> Result<(VelocityModel, Mask), SimError> {
    let (w, h) = (cfg.width, cfg.height);
    let mut mask = Mask::zeros(w, h);
    for s in &scene.shapes {
        let Some(((r0, r1), (c0, c1))) = s.bounds() else {
            return Err(SimError::InvalidModel(format!(
                "shape {s:?} crosses the grid edge"
            )));
        };
        for row in r0..=r1.min(h.saturating_sub(1)) {
            for col in c0..=c1.min(w.saturating_sub(1)) {
                if s.contains(row, col) {
                    mask.set(row, col, true);
                }
            }
        }
    }
    let speeds = mask
        .as_bytes()
        .iter()
        .map(|&b| {
            if b == 1 {
                cfg.obstacle_speed
            } else {
                cfg.water_speed
            }
        })
        .collect();
    Ok((VelocityModel::new(w, h, speeds)?, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_seed_same_scene() {
        let cfg = SceneConfig::default();
        assert_eq!(generate_scene(42, &cfg), generate_scene(42, &cfg));
        assert_ne!(generate_scene(42, &cfg), generate_scene(43, &cfg));
    }

    #[test]
    fn stream_is_pinned() {
        // Regression pin recorded from this implementation; guards the
        // documented generator against silent upstream stream changes.
        let s = generate_scene(0, &SceneConfig::default());
        assert_eq!(s.to_json_line(), PINNED_SCENE_0);
    }

    const PINNED_SCENE_0: &str = r#"{"seed":0,"n_objects":1,"shapes":[{"kind":"square","center":{"row":82,"col":219},"size":10}]}"#;

    #[test]
    fn empty_scene_is_water() {
        let cfg = SceneConfig::default();
        let (model, mask) = rasterize(&SceneSpec::new(1, vec![]), &cfg).unwrap();
        assert!(model.speeds().iter().all(|&c| c == 1500.0));
        assert_eq!(mask.count_ones(), 0);
    }

    #[test]
    fn disk_area_within_rasterization_bounds() {
        let cfg = SceneConfig::default();
        for r in cfg.min_size..=cfg.max_size {
            let disk = Shape {
                kind: ShapeKind::Disk,
                center: Cell::new(128, 128),
                size: r,
            };
            let (_, mask) = rasterize(&SceneSpec::new(0, vec![disk]), &cfg).unwrap();
            let area = mask.count_ones() as f64;
            let pi = std::f64::consts::PI;
            let (lo, hi) = (pi * (r as f64 - 1.0).powi(2), pi * (r as f64 + 1.0).powi(2));
            assert!(lo <= area && area <= hi, "r={r} area={area}");
        }
    }

    #[test]
    fn square_is_chebyshev_ball() {
        let cfg = SceneConfig::default();
        let sq = Shape {
            kind: ShapeKind::Square,
            center: Cell::new(100, 50),
            size: 10,
        };
        let (_, mask) = rasterize(&SceneSpec::new(0, vec![sq]), &cfg).unwrap();
        assert_eq!(mask.count_ones(), 21 * 21);
        assert!(mask.get(90, 40) && mask.get(110, 60) && !mask.get(89, 50));
    }

    #[test]
    fn overlapping_shapes_union() {
        let cfg = SceneConfig::default();
        let a = Shape {
            kind: ShapeKind::Square,
            center: Cell::new(100, 100),
            size: 10,
        };
        let b = Shape {
            center: Cell::new(105, 105),
            ..a
        };
        let (model, mask) = rasterize(&SceneSpec::new(0, vec![a, b]), &cfg).unwrap();
        assert_eq!(mask.count_ones(), 2 * 21 * 21 - 16 * 16);
        assert_eq!(model.max_speed(), 3000.0);
    }

    #[test]
    fn json_line_roundtrip() {
        let s = generate_scene(9, &SceneConfig::default());
        let line = s.to_json_line();
        assert!(!line.contains('\n'));
        assert_eq!(SceneSpec::from_json(&line).unwrap(), s);
    }

    #[test]
    fn validate_catches_inconsistent_records() {
        let cfg = SceneConfig::default();
        let mut s = generate_scene(3, &cfg);
        s.n_objects += 1;
        assert!(s.validate(&cfg).is_err());
        let high = SceneSpec::new(
            0,
            vec![Shape {
                kind: ShapeKind::Disk,
                center: Cell::new(50, 100),
                size: 8,
            }],
        );
        assert!(high.validate(&cfg).is_err());
    }

    #[test]
    fn config_validation() {
        SceneConfig::default().validate().unwrap();
        let tiny = SceneConfig {
            width: 32,
            height: 32,
            ..SceneConfig::default()
        };
        assert!(tiny.validate().is_err());
        let swapped = SceneConfig {
            min_size: 30,
            ..SceneConfig::default()
        };
        assert!(swapped.validate().is_err());
    }

    #[test]
    fn uniform_stays_in_range() {
        let mut rng = SceneRng::new(5);
        for _ in 0..1000 {
            let v = rng.uniform(3, 7);
            assert!((3..=7).contains(&v));
        }
        assert_eq!(rng.uniform(4, 4), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn generated_scenes_are_valid(seed in any::<u64>()) {
            let cfg = SceneConfig::default();
            let scene = generate_scene(seed, &cfg);
            prop_assert!(scene.n_objects <= 10);
            prop_assert!(scene.validate(&cfg).is_ok());
            let (model, mask) = rasterize(&scene, &cfg).unwrap();
            for (c, m) in model.speeds().iter().zip(mask.as_bytes()) {
                prop_assert!(*c == 1500.0 || *c == 3000.0);
                prop_assert_eq!(*m == 1, *c == 3000.0);
            }
            // nothing reaches the receiver line
            prop_assert!((0..48).all(|r| (0..256).all(|c| !mask.get(r, c))));
        }
    }
}

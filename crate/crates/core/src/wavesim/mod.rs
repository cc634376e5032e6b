//! Explicit finite-difference solver for the 2D heterogeneous acoustic wave
//! equation `p_tt = c(x,z)^2 (p_xx + p_zz) + s`.
//!
//! Time is advanced with the 3-point leapfrog scheme and space is discretized
//! with the 7-point, sixth-order central second difference along each axis.
//! The physical grid is surrounded by a [`PAD`]-cell ring of ghost cells that
//! stay at zero (homogeneous Dirichlet walls).
//!
//! Indices are `(row, col)`: rows run along `z` with spacing `dz`, columns run
//! along `x` with spacing `dx`. Fields are stored row-major.

mod snapshot;
mod solver;
mod source;
mod stencil;

use thiserror::Error;

pub use snapshot::{export_snapshot, snapshot, Snapshot, SnapshotFormat};
pub use solver::{simulate, simulate_with, step, Simulator, WaveState};
pub use source::source_amplitude;
pub use stencil::{laplacian, second_difference, STENCIL, STENCIL_STABILITY_LIMIT};

/// Ghost-cell ring width, the half-width of the spatial stencil.
pub const PAD: usize = 3;

/// Grid edge used for dataset production.
pub const GRID_SIZE: usize = 256;

/// Speed of sound in the background water, m/s.
pub const WATER_SPEED: f32 = 1500.0;

/// Speed assigned to obstacles, m/s.
pub const OBSTACLE_SPEED: f32 = 3000.0;

/// Upper bound on any cell speed, m/s.
pub const MAX_SPEED: f32 = 3000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid velocity model: {0}")]
    InvalidModel(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(
        "unstable configuration: courant number {courant:.4} exceeds the stencil limit {limit:.4}"
    )]
    Unstable { courant: f64, limit: f64 },
    #[error("source at ({}, {}) is outside the {width}x{height} grid", .cell.row, .cell.col)]
    SourceOutside {
        cell: Cell,
        width: usize,
        height: usize,
    },
    #[error("invalid receiver array: {0}")]
    InvalidReceivers(String),
    #[error("numerical instability: non-finite pressure at timestep {step}")]
    NonFinite { step: usize },
}

/// A `(row, col)` index into the unpadded grid.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn is_inside(&self, width: usize, height: usize) -> bool {
        self.row < height && self.col < width
    }

    /// Euclidean distance in metres.
    pub fn distance(&self, other: &Cell, dx: f64, dz: f64) -> f64 {
        let dc = (self.col as f64 - other.col as f64) * dx;
        let dr = (self.row as f64 - other.row as f64) * dz;
        dc.hypot(dr)
    }
}

/// Propagation speed per cell (m/s), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityModel {
    width: usize,
    height: usize,
    speeds: Vec<f32>,
}

impl VelocityModel {
    pub fn new(width: usize, height: usize, speeds: Vec<f32>) -> Result<Self, SimError> {
        if width == 0 || height == 0 {
            return Err(SimError::InvalidModel("empty grid".into()));
        }
        if speeds.len() != width * height {
            return Err(SimError::InvalidModel(format!(
                "expected {} speeds for a {width}x{height} grid, got {}",
                width * height,
                speeds.len()
            )));
        }
        if let Some(bad) = speeds.iter().position(|c| !(0.0..=MAX_SPEED).contains(c)) {
            return Err(SimError::InvalidModel(format!(
                "speed {} at cell {} outside [0, {MAX_SPEED}] m/s",
                speeds[bad], bad
            )));
        }
        Ok(Self {
            width,
            height,
            speeds,
        })
    }

    pub fn uniform(width: usize, height: usize, speed: f32) -> Result<Self, SimError> {
        Self::new(width, height, vec![speed; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn speed(&self, cell: Cell) -> f32 {
        self.speeds[cell.row * self.width + cell.col]
    }

    pub fn speeds(&self) -> &[f32] {
        &self.speeds
    }

    pub fn max_speed(&self) -> f32 {
        self.speeds.iter().copied().fold(0.0, f32::max)
    }

    /// Returns a copy with every cell in `cells` set to `speed`.
    pub fn with_cells(
        &self,
        cells: impl IntoIterator<Item = Cell>,
        speed: f32,
    ) -> Result<Self, SimError> {
        let mut speeds = self.speeds.clone();
        for c in cells {
            if !c.is_inside(self.width, self.height) {
                return Err(SimError::InvalidModel(format!(
                    "cell ({}, {}) outside grid",
                    c.row, c.col
                )));
            }
            speeds[c.row * self.width + c.col] = speed;
        }
        Self::new(self.width, self.height, speeds)
    }
}

/// Discretization: cell spacings (m), time step (s) and run length.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dx: f64,
    pub dz: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl Default for GridSpec {
    /// 15 mm cells, 2.5 µs steps, 1800 steps.
    fn default() -> Self {
        Self {
            dx: 0.015,
            dz: 0.015,
            dt: 2.5e-6,
            n_steps: 1800,
        }
    }
}

impl GridSpec {
    /// `c · dt · sqrt(1/dx² + 1/dz²)`.
    pub fn courant_number(&self, max_speed: f64) -> f64 {
        max_speed * self.dt * (self.dx.powi(-2) + self.dz.powi(-2)).sqrt()
    }

    /// Per-axis Courant numbers `(c·dt/dx, c·dt/dz)`.
    pub fn axis_courant(&self, max_speed: f64) -> (f64, f64) {
        (max_speed * self.dt / self.dx, max_speed * self.dt / self.dz)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.dx) && positive(self.dz) && positive(self.dt)) {
            return Err(SimError::InvalidGrid(format!(
                "dx, dz and dt must be positive and finite (dx={}, dz={}, dt={})",
                self.dx, self.dz, self.dt
            )));
        }
        Ok(())
    }

    /// Rejects time steps the leapfrog/7-point scheme cannot run stably at
    /// `max_speed`.
    pub fn check_stability(&self, max_speed: f64) -> Result<(), SimError> {
        self.validate()?;
        let courant = self.courant_number(max_speed);
        if courant > STENCIL_STABILITY_LIMIT {
            return Err(SimError::Unstable {
                courant,
                limit: STENCIL_STABILITY_LIMIT,
            });
        }
        Ok(())
    }

    /// Physical extent of a `width x height` grid in square metres.
    pub fn surface(&self, width: usize, height: usize) -> f64 {
        width as f64 * self.dx * height as f64 * self.dz
    }
}

/// Point source emitting the first derivative of a Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSpec {
    pub position: Cell,
    /// Maximum signal frequency, Hz.
    pub f0: f64,
    /// Timestep at which the wavelet crosses zero.
    pub delay: usize,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            position: Cell::new(8, 128),
            f0: 40_000.0,
            delay: 100,
        }
    }
}

impl SourceSpec {
    pub fn validate(&self, width: usize, height: usize) -> Result<(), SimError> {
        if !self.position.is_inside(width, height) {
            return Err(SimError::SourceOutside {
                cell: self.position,
                width,
                height,
            });
        }
        if !(self.f0.is_finite() && self.f0 > 0.0) {
            return Err(SimError::InvalidGrid(format!(
                "source frequency must be positive, got {}",
                self.f0
            )));
        }
        Ok(())
    }
}

/// Number of receivers in a production array.
pub const N_RECEIVERS: usize = 11;

/// Fixed receiver positions and the first recorded timestep.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverArray {
    positions: Vec<Cell>,
    record_start: usize,
}

impl ReceiverArray {
    /// Builds an array of distinct positions. Production arrays hold
    /// [`N_RECEIVERS`] positions; other counts are accepted for experiments.
    pub fn new(positions: Vec<Cell>, record_start: usize) -> Result<Self, SimError> {
        check_distinct(&positions)?;
        Ok(Self {
            positions,
            record_start,
        })
    }

    /// Evenly spaced line of 11 receivers on row 8, columns 16..=236.
    pub fn production_layout() -> Self {
        let positions = (0..N_RECEIVERS)
            .map(|j| Cell::new(8, 16 + 22 * j))
            .collect();
        Self {
            positions,
            record_start: 400,
        }
    }

    pub fn positions(&self) -> &[Cell] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn record_start(&self) -> usize {
        self.record_start
    }

    pub fn validate(&self, width: usize, height: usize, n_steps: usize) -> Result<(), SimError> {
        check_distinct(&self.positions)?;
        if let Some(c) = self.positions.iter().find(|c| !c.is_inside(width, height)) {
            return Err(SimError::InvalidReceivers(format!(
                "receiver ({}, {}) outside the {width}x{height} grid",
                c.row, c.col
            )));
        }
        if self.record_start >= n_steps {
            return Err(SimError::InvalidReceivers(format!(
                "record_start {} leaves nothing to record in {n_steps} steps",
                self.record_start
            )));
        }
        Ok(())
    }

    /// Number of recorded timesteps for a run of `n_steps`.
    pub fn recording_len(&self, n_steps: usize) -> usize {
        n_steps.saturating_sub(self.record_start)
    }
}

fn check_distinct(positions: &[Cell]) -> Result<(), SimError> {
    if positions.is_empty() {
        return Err(SimError::InvalidReceivers("no receivers".into()));
    }
    for (i, a) in positions.iter().enumerate() {
        if positions[..i].contains(a) {
            return Err(SimError::InvalidReceivers(format!(
                "duplicate receiver at ({}, {})",
                a.row, a.col
            )));
        }
    }
    Ok(())
}

impl Default for ReceiverArray {
    fn default() -> Self {
        Self::production_layout()
    }
}

/// Unscaled receiver recording. Row `n` holds timestep `record_start + n`;
/// columns follow the receiver order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGather {
    n_receivers: usize,
    record_start: usize,
    samples: Vec<f32>,
}

impl RawGather {
    pub fn new(n_receivers: usize, record_start: usize, samples: Vec<f32>) -> Self {
        assert!(n_receivers > 0 && samples.len().is_multiple_of(n_receivers));
        Self {
            n_receivers,
            record_start,
            samples,
        }
    }

    pub fn n_receivers(&self) -> usize {
        self.n_receivers
    }

    pub fn n_rows(&self) -> usize {
        self.samples.len() / self.n_receivers
    }

    pub fn record_start(&self) -> usize {
        self.record_start
    }

    pub fn get(&self, row: usize, receiver: usize) -> f32 {
        self.samples[row * self.n_receivers + receiver]
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    /// The time series of one receiver.
    pub fn trace(&self, receiver: usize) -> Vec<f32> {
        self.samples
            .iter()
            .skip(receiver)
            .step_by(self.n_receivers)
            .copied()
            .collect()
    }

    pub fn max_abs(&self) -> f32 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

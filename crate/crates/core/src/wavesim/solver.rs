use rayon::prelude::*;

use super::stencil::STENCIL;
use super::{
    source_amplitude, Cell, GridSpec, RawGather, ReceiverArray, SimError, SourceSpec,
    VelocityModel, PAD,
};

/// Three consecutive pressure levels over the padded grid.
///
/// Only interior cells are ever written, so the ghost ring of every level
/// stays zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    width: usize,
    height: usize,
    prev: Vec<f32>,
    cur: Vec<f32>,
    next: Vec<f32>,
}

impl WaveState {
    /// Quiescent medium: every level is zero.
    pub fn new(width: usize, height: usize) -> Self {
        let n = (width + 2 * PAD) * (height + 2 * PAD);
        Self {
            width,
            height,
            prev: vec![0.0; n],
            cur: vec![0.0; n],
            next: vec![0.0; n],
        }
    }

    /// Starts from given previous and current levels (unpadded, row-major).
    pub fn from_levels(width: usize, height: usize, prev: &[f32], cur: &[f32]) -> Self {
        assert_eq!(prev.len(), width * height);
        assert_eq!(cur.len(), width * height);
        let mut s = Self::new(width, height);
        let stride = s.row_stride();
        for row in 0..height {
            let dst = (row + PAD) * stride + PAD;
            let src = row * width;
            s.prev[dst..dst + width].copy_from_slice(&prev[src..src + width]);
            s.cur[dst..dst + width].copy_from_slice(&cur[src..src + width]);
        }
        s
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Cells per padded row.
    pub fn row_stride(&self) -> usize {
        self.width + 2 * PAD
    }

    /// Flat padded index of an interior cell.
    pub fn index(&self, cell: Cell) -> usize {
        debug_assert!(cell.is_inside(self.width, self.height));
        (cell.row + PAD) * self.row_stride() + cell.col + PAD
    }

    /// Current level, padded.
    pub fn current(&self) -> &[f32] {
        &self.cur
    }

    /// Previous level, padded.
    pub fn previous(&self) -> &[f32] {
        &self.prev
    }

    /// Current pressure at an interior cell.
    pub fn pressure(&self, cell: Cell) -> f32 {
        self.cur[self.index(cell)]
    }

    /// Current level without the ghost ring, row-major.
    pub fn interior(&self) -> Vec<f32> {
        let stride = self.row_stride();
        (0..self.height)
            .flat_map(|row| {
                let start = (row + PAD) * stride + PAD;
                self.cur[start..start + self.width].iter().copied()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f32 {
        self.cur.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn ghost_ring_is_zero(&self) -> bool {
        let stride = self.row_stride();
        let ghost = |i: usize| {
            let (r, c) = (i / stride, i % stride);
            r < PAD || r >= self.height + PAD || c < PAD || c >= self.width + PAD
        };
        [&self.prev, &self.cur, &self.next].iter().all(|level| {
            level
                .iter()
                .enumerate()
                .all(|(i, v)| !ghost(i) || *v == 0.0)
        })
    }

    fn rotate(&mut self) {
        std::mem::swap(&mut self.prev, &mut self.cur);
        std::mem::swap(&mut self.cur, &mut self.next);
    }
}

/// Bit pattern of |v|. For non-negative floats the bit order is the numeric
/// order, and every NaN sorts above infinity, so an integer max over these
/// detects non-finite values and vectorizes.
#[inline(always)]
fn abs_bits(v: f32) -> u32 {
    v.to_bits() & 0x7fff_ffff
}

const INFINITY_BITS: u32 = 0x7f80_0000;

struct Sweep<'a> {
    cur: &'a [f32],
    prev: &'a [f32],
    speeds: &'a [f32],
    width: usize,
    stride: usize,
    inv_dx2: f32,
    inv_dz2: f32,
    dt2: f32,
}

impl Sweep<'_> {
    /// Writes the interior of padded row `row + PAD` and returns the bit
    /// pattern of its max |p|. Same arithmetic as [`laplacian`], unrolled over
    /// row slices.
    fn row(&self, row: usize, next_row: &mut [f32]) -> u32 {
        let [w1, w2, w3] = [STENCIL[1], STENCIL[2], STENCIL[3]];
        let w = self.width;
        let s = self.stride;
        let base = (row + PAD) * s + PAD;
        let line = |off: usize| &self.cur[off..off + w];
        let (l1, l2, l3) = (line(base - 1), line(base - 2), line(base - 3));
        let (r1, r2, r3) = (line(base + 1), line(base + 2), line(base + 3));
        let (up1, up2, up3) = (line(base - s), line(base - 2 * s), line(base - 3 * s));
        let (dn1, dn2, dn3) = (line(base + s), line(base + 2 * s), line(base + 3 * s));
        let centre = line(base);
        let prev = &self.prev[base..base + w];
        let speeds = &self.speeds[row * w..(row + 1) * w];
        let out = &mut next_row[PAD..PAD + w];
        let mut m = 0u32;
        for i in 0..w {
            let c = centre[i];
            let xs = w1 * ((r1[i] - c) + (l1[i] - c))
                + w2 * ((r2[i] - c) + (l2[i] - c))
                + w3 * ((r3[i] - c) + (l3[i] - c));
            let zs = w1 * ((dn1[i] - c) + (up1[i] - c))
                + w2 * ((dn2[i] - c) + (up2[i] - c))
                + w3 * ((dn3[i] - c) + (up3[i] - c));
            let lap = xs * self.inv_dx2 + zs * self.inv_dz2;
            let v = 2.0 * c - prev[i] + self.dt2 * speeds[i] * speeds[i] * lap;
            out[i] = v;
            m = m.max(abs_bits(v));
        }
        m
    }
}

fn advance(
    state: &mut WaveState,
    model: &VelocityModel,
    grid: &GridSpec,
    src: &SourceSpec,
    n: usize,
    parallel: bool,
) -> Result<f32, SimError> {
    if model.width() != state.width || model.height() != state.height {
        return Err(SimError::InvalidModel(format!(
            "model is {}x{} but the wave state is {}x{}",
            model.width(),
            model.height(),
            state.width,
            state.height
        )));
    }
    let stride = state.row_stride();
    let height = state.height;
    let sweep = Sweep {
        cur: &state.cur,
        prev: &state.prev,
        speeds: model.speeds(),
        width: state.width,
        stride,
        inv_dx2: (1.0 / (grid.dx * grid.dx)) as f32,
        inv_dz2: (1.0 / (grid.dz * grid.dz)) as f32,
        dt2: (grid.dt * grid.dt) as f32,
    };
    let mut max = if parallel {
        state.next[PAD * stride..(PAD + height) * stride]
            .par_chunks_mut(stride)
            .enumerate()
            .map(|(row, next_row)| sweep.row(row, next_row))
            .reduce(|| 0, u32::max)
    } else {
        state.next[PAD * stride..(PAD + height) * stride]
            .chunks_mut(stride)
            .enumerate()
            .map(|(row, next_row)| sweep.row(row, next_row))
            .fold(0, u32::max)
    };

    let at = state.index(src.position);
    let injected = (grid.dt * grid.dt * source_amplitude(n, src, grid.dt)) as f32;
    state.next[at] += injected;
    max = max.max(abs_bits(state.next[at]));

    if max >= INFINITY_BITS {
        return Err(SimError::NonFinite { step: n + 1 });
    }
    state.rotate();
    Ok(f32::from_bits(max))
}

/// Advances `state` from level `n` to `n + 1`:
///
/// ```text
/// p^{n+1} = 2 p^n - p^{n-1} + dt^2 (c^2 lap(p^n) + s^n delta_src)
/// ```
///
/// Returns the max |p| of the new current level. A non-finite value aborts
/// with [`SimError::NonFinite`] naming the timestep that produced it, leaving
/// the state unrotated.
pub fn step(
    state: &mut WaveState,
    model: &VelocityModel,
    grid: &GridSpec,
    src: &SourceSpec,
    n: usize,
) -> Result<f32, SimError> {
    advance(state, model, grid, src, n, false)
}

/// Owns a wave state and steps it through a validated configuration.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    model: &'a VelocityModel,
    grid: GridSpec,
    source: SourceSpec,
    state: WaveState,
    n: usize,
    parallel: bool,
}

impl<'a> Simulator<'a> {
    /// Checks the grid, stability bound and source position, then starts
    /// from a quiescent medium at timestep 0.
    pub fn new(
        model: &'a VelocityModel,
        grid: GridSpec,
        source: SourceSpec,
    ) -> Result<Self, SimError> {
        grid.check_stability(model.max_speed() as f64)?;
        source.validate(model.width(), model.height())?;
        Ok(Self {
            model,
            grid,
            source,
            state: WaveState::new(model.width(), model.height()),
            n: 0,
            parallel: false,
        })
    }

    /// Starts from an explicit state instead of the quiescent medium.
    pub fn with_state(mut self, state: WaveState) -> Self {
        assert_eq!(
            (state.width, state.height),
            (self.model.width(), self.model.height())
        );
        self.state = state;
        self
    }

    /// Sweeps rows on the rayon pool. Results are identical to the serial
    /// sweep.
    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn step(&mut self) -> Result<f32, SimError> {
        let max = advance(
            &mut self.state,
            self.model,
            &self.grid,
            &self.source,
            self.n,
            self.parallel,
        )?;
        self.n += 1;
        Ok(max)
    }

    /// Steps until the current level is `n`.
    pub fn run_to(&mut self, n: usize) -> Result<(), SimError> {
        while self.n < n {
            self.step()?;
        }
        Ok(())
    }

    /// Timestep of the current level.
    pub fn timestep(&self) -> usize {
        self.n
    }

    pub fn state(&self) -> &WaveState {
        &self.state
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
}

/// Runs `grid.n_steps` steps from rest and records the receivers.
pub fn simulate(
    model: &VelocityModel,
    grid: &GridSpec,
    src: &SourceSpec,
    rcv: &ReceiverArray,
) -> Result<RawGather, SimError> {
    simulate_with(model, grid, src, rcv, |_, _| {})
}

/// Like [`simulate`], calling `observe(n, state)` with every level
/// `n in 0..n_steps` before it is advanced.
pub fn simulate_with(
    model: &VelocityModel,
    grid: &GridSpec,
    src: &SourceSpec,
    rcv: &ReceiverArray,
    mut observe: impl FnMut(usize, &WaveState),
) -> Result<RawGather, SimError> {
    rcv.validate(model.width(), model.height(), grid.n_steps)?;
    let mut sim = Simulator::new(model, *grid, *src)?;
    let indices: Vec<usize> = rcv
        .positions()
        .iter()
        .map(|&c| sim.state.index(c))
        .collect();
    let mut samples = Vec::with_capacity(rcv.recording_len(grid.n_steps) * rcv.len());
    for n in 0..grid.n_steps {
        observe(n, &sim.state);
        if n >= rcv.record_start() {
            samples.extend(indices.iter().map(|&i| sim.state.cur[i]));
        }
        sim.step()?;
    }
    Ok(RawGather::new(rcv.len(), rcv.record_start(), samples))
}

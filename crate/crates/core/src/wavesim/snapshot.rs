use std::io;
use std::path::Path;

use super::WaveState;
use crate::image::{extension, f32_to_le_bytes, GrayImage};

/// The unpadded current pressure plane at timestep `timestep`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub timestep: usize,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
}

pub fn snapshot(state: &WaveState, timestep: usize) -> Snapshot {
    Snapshot {
        timestep,
        width: state.width(),
        height: state.height(),
        values: state.interior(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    /// Binary graymap, linear min-max normalization.
    Pgm,
    /// Raw little-endian f32, row-major.
    RawF32,
}

impl SnapshotFormat {
    /// `.pgm` selects the graymap; `.f32`, `.raw` and `.bin` the float dump.
    pub fn from_path(path: &Path) -> Option<Self> {
        match extension(path)?.as_str() {
            "pgm" => Some(Self::Pgm),
            "f32" | "raw" | "bin" => Some(Self::RawF32),
            _ => None,
        }
    }
}

impl Snapshot {
    pub fn encode(&self, format: SnapshotFormat) -> Vec<u8> {
        match format {
            SnapshotFormat::Pgm => {
                GrayImage::from_values_minmax(self.width, self.height, &self.values).to_pgm()
            }
            SnapshotFormat::RawF32 => f32_to_le_bytes(&self.values),
        }
    }
}

/// Writes `snap` in the format implied by the file extension.
pub fn export_snapshot(snap: &Snapshot, path: &Path) -> io::Result<()> {
    let format = SnapshotFormat::from_path(path).ok_or_else(|| {
        io::Error::new(
            io::ErrorKind::InvalidInput,
            format!(
                "unknown snapshot extension for {} (use .pgm or .f32)",
                path.display()
            ),
        )
    })?;
    std::fs::write(path, snap.encode(format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_gives_zero_image() {
        let s = snapshot(&WaveState::new(5, 4), 0);
        assert_eq!(s.values, vec![0.0; 20]);
        assert_eq!(s.encode(SnapshotFormat::Pgm)[11..], [0u8; 20]);
        assert_eq!(snapshot(&WaveState::new(5, 4), 0), s);
    }

    #[test]
    fn format_by_extension() {
        assert_eq!(
            SnapshotFormat::from_path(Path::new("a/b.PGM")),
            Some(SnapshotFormat::Pgm)
        );
        assert_eq!(
            SnapshotFormat::from_path(Path::new("x.f32")),
            Some(SnapshotFormat::RawF32)
        );
        assert_eq!(SnapshotFormat::from_path(Path::new("x.png")), None);
    }

    #[test]
    fn raw_dump_is_row_major() {
        let state = WaveState::from_levels(2, 2, &[0.0; 4], &[1.0, 2.0, 3.0, 4.0]);
        let bytes = snapshot(&state, 7).encode(SnapshotFormat::RawF32);
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[4..8], &2.0f32.to_le_bytes());
        assert_eq!(&bytes[8..12], &3.0f32.to_le_bytes());
    }
}

//! Binary frame dumps.
//!
//! Layout, little-endian throughout:
//!
//! | bytes        | content                 |
//! |--------------|-------------------------|
//! | 4            | magic `VMP1`            |
//! | 4            | `u32` particle count    |
//! | 4            | `u32` frame index       |
//! | 4            | `f32` frame interval, s |
//! | 12 × count   | `f32` x, y, z per particle |

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::tensor3::Vec3;
use crate::trajectory::Trajectory;

pub const MAGIC: &[u8; 4] = b"VMP1";
const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("frame {frame}: {msg}")]
    Mismatch { frame: usize, msg: String },
    #[error("no frame dumps in {0}")]
    NoFrames(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameDump {
    pub frame_index: u32,
    pub frame_dt: f32,
    pub positions: Vec<[f32; 3]>,
}

impl FrameDump {
    pub fn from_positions(frame_index: usize, frame_dt: f64, positions: &[Vec3]) -> Self {
        FrameDump {
            frame_index: frame_index as u32,
            frame_dt: frame_dt as f32,
            positions: positions.iter().map(|p| [p.x as f32, p.y as f32, p.z as f32]).collect(),
        }
    }

    pub fn positions_f64(&self) -> Vec<Vec3> {
        self.positions.iter().map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64)).collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(HEADER_LEN + 12 * self.positions.len());
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&(self.positions.len() as u32).to_le_bytes());
        b.extend_from_slice(&self.frame_index.to_le_bytes());
        b.extend_from_slice(&self.frame_dt.to_le_bytes());
        for p in &self.positions {
            for c in p {
                b.extend_from_slice(&c.to_le_bytes());
            }
        }
        b
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err("missing VMP1 header".into());
        }
        let word = |i: usize| <[u8; 4]>::try_from(&bytes[i..i + 4]).unwrap();
        let count = u32::from_le_bytes(word(4)) as usize;
        let frame_index = u32::from_le_bytes(word(8));
        let frame_dt = f32::from_le_bytes(word(12));
        let expected = HEADER_LEN + 12 * count;
        if bytes.len() != expected {
            return Err(format!("expected {expected} bytes for {count} particles, found {}", bytes.len()));
        }
        let positions = bytes[HEADER_LEN..]
            .chunks_exact(12)
            .map(|c| {
                let f = |o: usize| f32::from_le_bytes(c[o..o + 4].try_into().unwrap());
                [f(0), f(4), f(8)]
            })
            .collect();
        Ok(FrameDump { frame_index, frame_dt, positions })
    }
}

pub fn frame_file_name(frame: usize) -> String {
    format!("frame_{frame:04}.bin")
}

pub fn write_frame(dir: &Path, dump: &FrameDump) -> Result<PathBuf, DumpError> {
    let path = dir.join(frame_file_name(dump.frame_index as usize));
    fs::write(&path, dump.encode()).map_err(|source| DumpError::Io { path: path.clone(), source })?;
    Ok(path)
}

pub fn read_frame(path: &Path) -> Result<FrameDump, DumpError> {
    let bytes = fs::read(path).map_err(|source| DumpError::Io { path: path.to_owned(), source })?;
    FrameDump::decode(&bytes).map_err(|msg| DumpError::Format { path: path.to_owned(), msg })
}

pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<(), DumpError> {
    for (i, frame) in traj.frames.iter().enumerate() {
        write_frame(dir, &FrameDump::from_positions(i, traj.frame_dt, frame))?;
    }
    Ok(())
}

/// Reads `frame_0000.bin`, `frame_0001.bin`, ... until the first missing
/// index, checking that every frame is consistent with frame 0.
pub fn read_trajectory(dir: &Path) -> Result<Trajectory, DumpError> {
    let mut traj: Option<Trajectory> = None;
    for i in 0.. {
        let path = dir.join(frame_file_name(i));
        if !path.exists() {
            break;
        }
        let dump = read_frame(&path)?;
        if dump.frame_index as usize != i {
            return Err(DumpError::Mismatch { frame: i, msg: format!("header says frame {}", dump.frame_index) });
        }
        match &mut traj {
            None => {
                let mut t = Trajectory::new(dump.frame_dt as f64);
                t.push(dump.positions_f64());
                traj = Some(t);
            }
            Some(t) => {
                if dump.positions.len() != t.particle_count() {
                    return Err(DumpError::Mismatch {
                        frame: i,
                        msg: format!("{} particles, frame 0 has {}", dump.positions.len(), t.particle_count()),
                    });
                }
                if dump.frame_dt as f64 != t.frame_dt {
                    return Err(DumpError::Mismatch { frame: i, msg: "frame interval differs from frame 0".into() });
                }
                t.push(dump.positions_f64());
            }
        }
    }
    traj.ok_or_else(|| DumpError::NoFrames(dir.to_owned()))
}

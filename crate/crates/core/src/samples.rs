//! Sample sets: homogeneous collections of points in one of the two spaces
//! the lab aligns distributions over.

use crate::error::{Error, Result};
use crate::lie::{Rotation, Vec3};
use crate::scalar::Scalar;
use ndarray::Array2;

/// The two sample spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    R3,
    So3,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::R3 => "r3",
            Space::So3 => "so3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "r3" | "R3" => Ok(Space::R3),
            "so3" | "SO3" | "So3" => Ok(Space::So3),
            other => Err(Error::InvalidConfig(format!(
                "unknown space '{other}' (expected r3 or so3)"
            ))),
        }
    }

    /// Flattened state width fed to the networks: 3 coordinates or a
    /// row-major 3x3 rotation.
    pub fn state_dim(self) -> usize {
        match self {
            Space::R3 => 3,
            Space::So3 => 9,
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of samples from one space.
#[derive(Clone, Debug)]
pub enum SampleSet<S: Scalar> {
    R3(Vec<Vec3<S>>),
    So3(Vec<Rotation<S>>),
}

impl<S: Scalar> SampleSet<S> {
    pub fn space(&self) -> Space {
        match self {
            SampleSet::R3(_) => Space::R3,
            SampleSet::So3(_) => Space::So3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SampleSet::R3(v) => v.len(),
            SampleSet::So3(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_r3(&self) -> Result<&[Vec3<S>]> {
        match self {
            SampleSet::R3(v) => Ok(v),
            SampleSet::So3(_) => Err(Error::SpaceMismatch),
        }
    }

    pub fn as_so3(&self) -> Result<&[Rotation<S>]> {
        match self {
            SampleSet::So3(v) => Ok(v),
            SampleSet::R3(_) => Err(Error::SpaceMismatch),
        }
    }

    /// First `n` samples.
    pub fn truncated(&self, n: usize) -> Self {
        match self {
            SampleSet::R3(v) => SampleSet::R3(v.iter().take(n).copied().collect()),
            SampleSet::So3(v) => SampleSet::So3(v.iter().take(n).copied().collect()),
        }
    }

    /// Flatten into the network state layout, one row per sample.
    pub fn state_matrix(&self) -> Array2<S> {
        match self {
            SampleSet::R3(v) => {
                let mut m = Array2::zeros((v.len(), 3));
                for (i, p) in v.iter().enumerate() {
                    m[[i, 0]] = p.x;
                    m[[i, 1]] = p.y;
                    m[[i, 2]] = p.z;
                }
                m
            }
            SampleSet::So3(v) => {
                let mut m = Array2::zeros((v.len(), 9));
                for (i, r) in v.iter().enumerate() {
                    for (j, e) in r.flatten().into_iter().enumerate() {
                        m[[i, j]] = e;
                    }
                }
                m
            }
        }
    }

    /// Every rotation satisfies the `SO(3)` invariants; `R3` points are
    /// finite. Used by validity sweeps.
    pub fn all_valid(&self) -> bool {
        match self {
            SampleSet::R3(v) => v.iter().all(|p| p.is_finite()),
            SampleSet::So3(v) => v.iter().all(|r| r.is_valid()),
        }
    }
}

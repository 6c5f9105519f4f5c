//! JSON description of a frame at a chart point.
//!
//! ```json
//! { "algebra": "C", "n": 2,
//!   "base": [[0.0, 0.0], [0.0, 0.0]],
//!   "frame": [[1, 0, 0, 0], [0, 1, 0, 0]] }
//! ```
//!
//! `base` lists the slots of `Q` (each of length `d`; a single row of
//! length `m` for `"Rm"`). Frame rows are coefficients over the orthonormal
//! tangent basis at the base point.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraTag;
use crate::chart::{PFrame, ProjectiveSpace};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub algebra: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub n: usize,
    pub base: Vec<Vec<f64>>,
    pub frame: Vec<Vec<f64>>,
}

/// Parse `"R" | "C" | "H" | "O" | "Rm"` (with `m` for the sphere).
pub fn parse_algebra(name: &str, m: Option<usize>) -> Result<AlgebraTag> {
    match name {
        "R" => Ok(AlgebraTag::R),
        "C" => Ok(AlgebraTag::C),
        "H" => Ok(AlgebraTag::H),
        "O" => Ok(AlgebraTag::O),
        "Rm" => match m {
            Some(m) if m >= 1 => Ok(AlgebraTag::SpinFactor(m)),
            _ => Err(Error::FrameSpec("algebra \"Rm\" needs a positive \"m\"".into())),
        },
        other => Err(Error::FrameSpec(format!("unknown algebra {other:?}"))),
    }
}

impl FrameSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::FrameSpec(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn space(&self) -> Result<ProjectiveSpace> {
        let tag = parse_algebra(&self.algebra, self.m)?;
        ProjectiveSpace::new(tag, self.n).map_err(|e| Error::FrameSpec(e.to_string()))
    }

    /// Validate and build the frame; `tol` bounds the orthonormality residual.
    pub fn build(&self, tol: f64) -> Result<(ProjectiveSpace, PFrame)> {
        let space = self.space()?;
        let row_len = match space.tag() {
            AlgebraTag::SpinFactor(m) => m,
            t => t.dim()?,
        };
        if self.base.iter().any(|r| r.len() != row_len) {
            return Err(Error::FrameSpec(format!("base rows must have length {row_len}")));
        }
        let q: Vec<f64> = self.base.iter().flatten().copied().collect();
        if q.len() != space.dim() {
            return Err(Error::FrameSpec(format!(
                "base has {} coordinates, expected {}",
                q.len(),
                space.dim()
            )));
        }
        let pt = space.point(q).map_err(|e| Error::FrameSpec(e.to_string()))?;
        let d = space.dim();
        if self.frame.is_empty() || self.frame.iter().any(|r| r.len() != d) {
            return Err(Error::FrameSpec(format!("frame needs between 1 and {d} rows of length {d}")));
        }
        let rows = DMatrix::from_fn(self.frame.len(), d, |i, j| self.frame[i][j]);
        let frame = space.frame_from_orthonormal(&pt, &rows, tol)?;
        Ok((space, frame))
    }

    /// Inverse of [`FrameSpec::build`].
    pub fn from_frame(space: &ProjectiveSpace, frame: &PFrame) -> Result<Self> {
        let rows = space.frame_rows(frame)?;
        let (algebra, m) = match space.tag() {
            AlgebraTag::SpinFactor(m) => ("Rm".to_string(), Some(m)),
            t => (t.name().to_string(), None),
        };
        let chunk = match space.tag() {
            AlgebraTag::SpinFactor(m) => m,
            t => t.dim()?,
        };
        Ok(Self {
            algebra,
            m,
            n: space.n(),
            base: frame.base.q.chunks(chunk).map(|c| c.to_vec()).collect(),
            frame: rows.row_iter().map(|r| r.iter().copied().collect()).collect(),
        })
    }
}

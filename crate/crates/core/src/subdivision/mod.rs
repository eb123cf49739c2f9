//! Centroid subdivision.
//!
//! Joining the centroid of a triangle to its vertices gives three children of
//! equal area. Child `k` is the one opposite vertex `k`; its shape is
//! `Λσᵏ a`, with the angle at the centroid listed first. For a parent with
//! vertices `(v0, v1, v2)` and centroid `c` the children are
//! `(c, v1, v2)`, `(c, v2, v0)` and `(c, v0, v1)`.

mod flow;
mod mesh;

pub use flow::{random_flow, write_flow_csv, FlowStats};
pub use mesh::{build_mesh, mesh_shape_audit, HierMesh, MeshTriangle, MAX_LEVELS};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape_space::{CotangentVector, GroupElement};

/// Path through the subdivision tree: one child index (0, 1 or 2) per level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct SubdivisionWord(Vec<u8>);

impl SubdivisionWord {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&k| k > 2) {
            return Err(Error::InvalidArgument(format!("child index {bad} is not 0, 1 or 2")));
        }
        Ok(Self(letters))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, k: u8) -> Self {
        let mut v = self.0.clone();
        v.push(k);
        Self(v)
    }

    /// Matrix taking the root shape to the shape of the triangle this word
    /// names: `Λσ^{w_n} ⋯ Λσ^{w_1}`.
    pub fn matrix(&self) -> GroupElement {
        self.0
            .iter()
            .fold(GroupElement::identity(), |acc, &k| child_matrix(k).compose(&acc))
    }
}

impl fmt::Display for SubdivisionWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in &self.0 {
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for SubdivisionWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::InvalidArgument(format!("bad subdivision letter {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self(letters))
    }
}

impl From<SubdivisionWord> for String {
    fn from(w: SubdivisionWord) -> Self {
        w.to_string()
    }
}

impl TryFrom<String> for SubdivisionWord {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `Λσᵏ`.
pub fn child_matrix(k: u8) -> GroupElement {
    GroupElement::lambda().compose(&GroupElement::sigma().pow(k as usize))
}

/// Shapes of the three centroid children, `(Λa, Λσa, Λσ²a)`.
pub fn subdivide_shape(a: &CotangentVector) -> Result<[CotangentVector; 3]> {
    Ok([child_matrix(0).apply(a)?, child_matrix(1).apply(a)?, child_matrix(2).apply(a)?])
}

/// Shape reached from `a` by following `w`; the matrices are composed exactly
/// and applied once.
pub fn run_word(w: &SubdivisionWord, a: &CotangentVector) -> Result<CotangentVector> {
    w.matrix().apply(a)
}

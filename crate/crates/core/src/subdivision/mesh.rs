//! Explicit hierarchical triangulations.
//!
//! Vertices are numbered level by level: the three root vertices first, then
//! the centroids created at each level in the order of their parent
//! triangles. Leaf triangles are listed in child order, so the triangle at
//! position `t` of a level-`n` mesh has the base-3 digits of `t` as its word.

use serde::{Deserialize, Serialize};

use super::SubdivisionWord;
use crate::error::{Error, Result};
use crate::shape_space::{check_nondegenerate, cot_from_coords, CotangentVector};
use crate::Point2;

/// Default depth cap (6561 leaf triangles).
pub const MAX_LEVELS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshTriangle {
    /// Vertex indices; `v[0]` is the centroid of the parent for `level > 0`.
    pub v: [usize; 3],
    pub level: usize,
    pub word: SubdivisionWord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierMesh {
    pub vertices: Vec<Point2>,
    /// Leaf triangles, all of depth `levels`.
    pub triangles: Vec<MeshTriangle>,
    /// Root vertices, in the counterclockwise order used for marking.
    pub boundary: [usize; 3],
    pub interior: Vec<usize>,
    #[serde(default)]
    pub levels: usize,
}

impl HierMesh {
    /// Level at which vertex `v` was created (0 for the root vertices).
    pub fn vertex_level(&self, v: usize) -> usize {
        if v < 3 {
            return 0;
        }
        // Level m contributes 3^(m-1) centroids.
        let mut first = 3;
        let mut count = 1;
        let mut level = 1;
        while v >= first + count {
            first += count;
            count *= 3;
            level += 1;
        }
        level
    }

    pub fn root_shape(&self) -> Result<CotangentVector> {
        let [i, j, k] = self.boundary;
        cot_from_coords(self.vertices[i], self.vertices[j], self.vertices[k])
    }

    pub fn triangle_points(&self, t: &MeshTriangle) -> [Point2; 3] {
        t.v.map(|i| self.vertices[i])
    }
}

/// Subdivides `(x0, x1, x2)` at centroids `levels` times.
pub fn build_mesh(x0: Point2, x1: Point2, x2: Point2, levels: usize, max_levels: usize) -> Result<HierMesh> {
    if levels > max_levels {
        return Err(Error::DepthExceeded { levels, max: max_levels });
    }
    let area2 = check_nondegenerate(x0, x1, x2)?;
    let mut vertices = vec![x0, x1, x2];
    let root = if area2 > 0.0 { [0, 1, 2] } else { [0, 2, 1] };
    let mut current = vec![MeshTriangle { v: root, level: 0, word: SubdivisionWord::empty() }];
    for level in 0..levels {
        let mut next = Vec::with_capacity(current.len() * 3);
        for t in &current {
            let [p, q, r] = t.v.map(|i| vertices[i]);
            let c = vertices.len();
            vertices.push([(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]);
            let [v0, v1, v2] = t.v;
            for (k, v) in [[c, v1, v2], [c, v2, v0], [c, v0, v1]].into_iter().enumerate() {
                next.push(MeshTriangle { v, level: level + 1, word: t.word.child(k as u8) });
            }
        }
        current = next;
    }
    let interior = (3..vertices.len()).collect();
    Ok(HierMesh { vertices, triangles: current, boundary: root, interior, levels })
}

/// Largest componentwise gap between the cotangents measured from each leaf
/// triangle's coordinates and those predicted by its subdivision word.
pub fn mesh_shape_audit(mesh: &HierMesh) -> Result<f64> {
    let root = mesh.root_shape()?;
    let mut worst = 0.0f64;
    for t in &mesh.triangles {
        let [p, q, r] = mesh.triangle_points(t);
        let measured = cot_from_coords(p, q, r)?.as_array();
        let predicted = super::run_word(&t.word, &root)?.as_array();
        for i in 0..3 {
            worst = worst.max((measured[i] - predicted[i]).abs());
        }
    }
    Ok(worst)
}

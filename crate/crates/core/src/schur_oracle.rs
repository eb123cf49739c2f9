//! Brute-force check of the decimation map on whole meshes.
//!
//! The stiffness matrix of a hierarchically subdivided triangle is assembled
//! from per-triangle action matrices, every interior vertex is eliminated by
//! a Schur complement, and the resulting 3×3 form on the root vertices is
//! compared with the root triangle's own action matrix. For a fixed point of
//! the decimation map the two agree at every depth.
//!
//! Storage and factorization are dense; [`schur_complement`] is the only
//! place that touches the factorization, so a sparse backend can replace it.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix3};
use serde::{Deserialize, Serialize};

use crate::action::{action_matrix, ActionFamily, QuadForm3};
use crate::error::{Error, Result};
use crate::sampling::par_map;
use crate::shape_space::{cot_from_coords, from_halfplane, HalfPlanePoint};
use crate::subdivision::{build_mesh, HierMesh};

/// Depth cap for dense elimination (3283 vertices at depth 7).
pub const SCHUR_MAX_LEVELS: usize = 7;

/// Interior blocks whose smallest eigenvalue is below this fraction of their
/// Frobenius norm are rejected.
pub const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct StiffnessMatrix {
    pub k: DMatrix<f64>,
    pub boundary: [usize; 3],
    pub interior: Vec<usize>,
    /// Creation level of each vertex; 0 for the boundary.
    pub vertex_levels: Vec<usize>,
}

/// Result of eliminating the interior: the effective form on the boundary
/// vertices and `ln det` of the eliminated block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Elimination {
    pub effective: QuadForm3,
    pub logdet: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationReport {
    pub levels: usize,
    pub z: [f64; 2],
    pub family: String,
    pub root_shape: [f64; 3],
    pub effective: QuadForm3,
    pub reference: QuadForm3,
    pub rel_frobenius: f64,
    /// Least-squares `λ` with `effective ≈ λ · reference`.
    pub lambda_estimate: f64,
    pub logdet: f64,
    pub elapsed_ms: Option<f64>,
}

/// Sums the family's action matrix of every leaf triangle into a global
/// vertex-indexed matrix. Element matrices are computed in parallel and
/// accumulated in triangle order.
pub fn assemble_stiffness(mesh: &HierMesh, fam: &ActionFamily, workers: usize) -> Result<StiffnessMatrix> {
    let elements = par_map(mesh.triangles.len(), workers, |t| -> Result<Matrix3<f64>> {
        let [p, q, r] = mesh.triangle_points(&mesh.triangles[t]);
        let a = cot_from_coords(p, q, r)?;
        let e = *action_matrix(fam, &a).matrix();
        if e.iter().any(|x| !x.is_finite()) {
            return Err(Error::InadmissibleTriangle { family: fam.name().to_string(), triangle: t, a: a.as_array() });
        }
        Ok(e)
    });
    let n = mesh.vertices.len();
    let mut k = DMatrix::zeros(n, n);
    for (t, e) in mesh.triangles.iter().zip(elements) {
        let e = e?;
        for i in 0..3 {
            for j in 0..3 {
                k[(t.v[i], t.v[j])] += e[(i, j)];
            }
        }
    }
    Ok(StiffnessMatrix {
        k,
        boundary: mesh.boundary,
        interior: mesh.interior.clone(),
        vertex_levels: (0..n).map(|v| mesh.vertex_level(v)).collect(),
    })
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Smallest eigenvalue of an SPD matrix by inverse iteration on its
/// Cholesky factor.
fn smallest_eigenvalue(m: &DMatrix<f64>, chol: &Cholesky<f64, Dyn>) -> f64 {
    let n = m.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i % 7) as f64 * 0.1);
    v /= v.norm();
    for _ in 0..50 {
        let w = chol.solve(&v);
        let norm = w.norm();
        if !norm.is_finite() || norm <= 0.0 {
            break;
        }
        v = w / norm;
    }
    v.dot(&(m * &v))
}

/// `M_kk − M_kd M_dd⁻¹ M_dk` over the index sets `keep` and `drop`, with
/// `ln det M_dd`.
pub fn schur_complement(
    m: &DMatrix<f64>,
    keep: &[usize],
    drop: &[usize],
    level: Option<usize>,
) -> Result<(DMatrix<f64>, f64)> {
    let m_kk = submatrix(m, keep, keep);
    if drop.is_empty() {
        return Ok((m_kk, 0.0));
    }
    let m_dd = submatrix(m, drop, drop);
    let m_dk = submatrix(m, drop, keep);
    let norm = m_dd.norm();
    let singular = |min_eig: f64| Error::SingularInterior { min_eig, norm, level };
    let chol = match Cholesky::new(m_dd.clone()) {
        Some(c) => c,
        None => {
            let min_eig = if m_dd.nrows() <= 512 {
                m_dd.symmetric_eigenvalues().min()
            } else {
                f64::NAN
            };
            return Err(singular(min_eig));
        }
    };
    let min_eig = smallest_eigenvalue(&m_dd, &chol);
    if min_eig.is_nan() || min_eig <= SINGULAR_RATIO * norm {
        return Err(singular(min_eig));
    }
    let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let x = chol.solve(&m_dk);
    let s = m_kk - m_dk.transpose() * x;
    Ok((0.5 * (&s + s.transpose()), logdet))
}

fn to_quadform(m: &DMatrix<f64>) -> QuadForm3 {
    QuadForm3::from_matrix(Matrix3::from_fn(|i, j| m[(i, j)]))
}

/// Eliminates all interior vertices at once.
pub fn eliminate_interior(k: &StiffnessMatrix) -> Result<Elimination> {
    let (s, logdet) = schur_complement(&k.k, &k.boundary, &k.interior, None)?;
    Ok(Elimination { effective: to_quadform(&s), logdet })
}

/// Eliminates the deepest level first, then the next, down to level 1.
pub fn eliminate_by_level(k: &StiffnessMatrix) -> Result<Elimination> {
    let deepest = k.vertex_levels.iter().copied().max().unwrap_or(0);
    let mut remaining: Vec<usize> = (0..k.k.nrows()).collect();
    let mut m = k.k.clone();
    let mut logdet = 0.0;
    for level in (1..=deepest).rev() {
        let (drop, keep): (Vec<usize>, Vec<usize>) =
            (0..remaining.len()).partition(|&i| k.vertex_levels[remaining[i]] == level);
        let (s, ld) = schur_complement(&m, &keep, &drop, Some(level))?;
        m = s;
        logdet += ld;
        remaining = keep.iter().map(|&i| remaining[i]).collect();
    }
    let pos: Vec<usize> = k
        .boundary
        .iter()
        .map(|b| remaining.iter().position(|r| r == b).expect("boundary vertices are never eliminated"))
        .collect();
    Ok(Elimination { effective: to_quadform(&submatrix(&m, &pos, &pos)), logdet })
}

/// Relative Frobenius distance `‖x − y‖ / ‖y‖`.
pub fn rel_frobenius(x: &QuadForm3, y: &QuadForm3) -> f64 {
    (x.matrix() - y.matrix()).norm() / y.matrix().norm()
}

/// Builds the depth-`levels` mesh on `x0 = z, x1 = 0, x2 = 1`, eliminates
/// its interior and compares with the family's action on the root shape.
pub fn verify_hierarchical(
    z: HalfPlanePoint,
    levels: usize,
    fam: &ActionFamily,
    max_levels: usize,
    workers: usize,
) -> Result<EliminationReport> {
    let start = Instant::now();
    let root = from_halfplane(z)?;
    let mesh = build_mesh([z.re, z.im], [0.0, 0.0], [1.0, 0.0], levels, max_levels)?;
    let k = assemble_stiffness(&mesh, fam, workers)?;
    let elim = eliminate_interior(&k)?;
    let reference = action_matrix(fam, &root);
    let (e, r) = (elim.effective.matrix(), reference.matrix());
    Ok(EliminationReport {
        levels,
        z: [z.re, z.im],
        family: fam.name().to_string(),
        root_shape: root.as_array(),
        effective: elim.effective,
        reference,
        rel_frobenius: rel_frobenius(&elim.effective, &reference),
        lambda_estimate: e.dot(r) / r.dot(r),
        logdet: elim.logdet,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

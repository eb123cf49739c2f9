//! Quadratic actions on the three field values of a triangle.
//!
//! A permutation-covariant quadratic action is fixed by two coefficient
//! functions `P, Q` on shape space:
//!
//! ```text
//! S(φ|a) = P(a)φ0² + Q(a)φ1φ2 + P(σa)φ1² + Q(σa)φ2φ0 + P(σ²a)φ2² + Q(σ²a)φ0φ1
//! ```
//!
//! The cotangent family `P = (a1+a2)/4, Q = -a0/2` is the energy of the
//! linear interpolant.

mod rg;

pub use rg::{
    assemble_subdivided, fixed_point_residual, integrate_out_center, projective_residual, rg_step,
    subdivided_matrix, RGStepBreakdown, ResidualReport,
};

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expr::Expr;
use crate::sampling::random_shape;
use crate::shape_space::{check_nondegenerate, CotangentVector};
use crate::Point2;

pub type Coefficient = Arc<dyn Fn(&CotangentVector) -> f64 + Send + Sync>;

/// A pair of coefficient functions `(P, Q)`.
///
/// Both are expected to be invariant under `τ` (swapping vertices 1 and 2);
/// [`ActionFamily::tau_symmetry_defect`] measures how far a family is from
/// that.
#[derive(Clone)]
pub struct ActionFamily {
    name: String,
    p: Coefficient,
    q: Coefficient,
}

impl fmt::Debug for ActionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ActionFamily").field("name", &self.name).finish_non_exhaustive()
    }
}

impl ActionFamily {
    pub fn cotangent() -> Self {
        Self::custom("cotangent", |a| (a.a1() + a.a2()) / 4.0, |a| -a.a0() / 2.0)
    }

    pub fn constant(p: f64, q: f64) -> Self {
        Self::custom("constant", move |_| p, move |_| q)
    }

    pub fn custom<P, Q>(name: impl Into<String>, p: P, q: Q) -> Self
    where
        P: Fn(&CotangentVector) -> f64 + Send + Sync + 'static,
        Q: Fn(&CotangentVector) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), p: Arc::new(p), q: Arc::new(q) }
    }

    pub fn from_exprs(name: impl Into<String>, p: Expr, q: Expr) -> Self {
        Self::custom(name, move |a| p.eval(&a.as_array()), move |a| q.eval(&a.as_array()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn p(&self, a: &CotangentVector) -> f64 {
        (self.p)(a)
    }

    #[inline]
    pub fn q(&self, a: &CotangentVector) -> f64 {
        (self.q)(a)
    }

    /// Largest `|P(τa) - P(a)|` or `|Q(τa) - Q(a)|` over `samples` random shapes.
    pub fn tau_symmetry_defect(&self, samples: usize, seed: u64) -> f64 {
        (0..samples as u64)
            .map(|i| {
                let a = random_shape(seed, i);
                let t = a.swapped();
                f64::max((self.p(&t) - self.p(&a)).abs(), (self.q(&t) - self.q(&a)).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Symmetric matrix `M` of a quadratic form `S(φ) = φᵀ M φ`.
///
/// A cross term `c φi φj` is stored as `M_ij = M_ji = c / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[[f64; 3]; 3]", from = "[[f64; 3]; 3]")]
pub struct QuadForm3(Matrix3<f64>);

impl QuadForm3 {
    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        Self(0.5 * (m + m.transpose()))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn energy(&self, phi: [f64; 3]) -> f64 {
        let v = Vector3::from(phi);
        v.dot(&(self.0 * v))
    }

    /// Coefficient of `φi²`.
    pub fn square_coeff(&self, i: usize) -> f64 {
        self.0[(i, i)]
    }

    /// Coefficient of `φi φj` for `i != j`.
    pub fn cross_coeff(&self, i: usize, j: usize) -> f64 {
        2.0 * self.0[(i, j)]
    }
}

impl From<QuadForm3> for [[f64; 3]; 3] {
    fn from(q: QuadForm3) -> Self {
        std::array::from_fn(|i| std::array::from_fn(|j| q.0[(i, j)]))
    }
}

impl From<[[f64; 3]; 3]> for QuadForm3 {
    fn from(rows: [[f64; 3]; 3]) -> Self {
        Self::from_matrix(Matrix3::from_fn(|i, j| rows[i][j]))
    }
}

/// `¼[a0(φ1−φ2)² + a1(φ2−φ0)² + a2(φ0−φ1)²]`.
pub fn cotangent_action(a: &CotangentVector, phi: [f64; 3]) -> f64 {
    let [p0, p1, p2] = phi;
    0.25 * (a.a0() * (p1 - p2).powi(2) + a.a1() * (p2 - p0).powi(2) + a.a2() * (p0 - p1).powi(2))
}

/// Dirichlet energy `½∫|∇φ|²` of the linear interpolant, computed from the
/// metric of the side vectors `e1 = x1 - x0`, `e2 = x2 - x0`.
pub fn interpolant_energy(x0: Point2, x1: Point2, x2: Point2, phi: [f64; 3]) -> Result<f64> {
    check_nondegenerate(x0, x1, x2)?;
    let e1 = Vector2::new(x1[0] - x0[0], x1[1] - x0[1]);
    let e2 = Vector2::new(x2[0] - x0[0], x2[1] - x0[1]);
    let dot = e1.dot(&e2);
    let cross = (e1.x * e2.y - e1.y * e2.x).abs();
    // √det g · g⁻¹, written out as the adjugate of g over |e1 × e2|
    let metric = Matrix2::new(e2.dot(&e2), -dot, -dot, e1.dot(&e1)) / cross;
    let d = Vector2::new(phi[1] - phi[0], phi[2] - phi[0]);
    // ∫ d²u over the reference triangle is ½.
    Ok(0.5 * 0.5 * d.dot(&(metric * d)))
}

/// Area coordinates of `x` with respect to `(x0, x1, x2)`.
pub fn barycentric(x: Point2, x0: Point2, x1: Point2, x2: Point2) -> Result<[f64; 3]> {
    use crate::shape_space::signed_area2;
    let total = check_nondegenerate(x0, x1, x2)?;
    let u0 = signed_area2(x, x1, x2) / total;
    let u1 = signed_area2(x0, x, x2) / total;
    let u2 = signed_area2(x0, x1, x) / total;
    Ok([u0, u1, u2])
}

/// `½∫|∇φ|²` by brute force: the triangle is cut into `n²` congruent pieces,
/// the gradient of the interpolant is taken by central differences at each
/// piece's centroid, and the pieces are summed with their areas.
pub fn quadrature_energy(x0: Point2, x1: Point2, x2: Point2, phi: [f64; 3], n: usize) -> Result<f64> {
    let area = 0.5 * check_nondegenerate(x0, x1, x2)?.abs();
    let diam = [(x0, x1), (x1, x2), (x2, x0)]
        .iter()
        .map(|(p, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let h = 1e-3 * diam;
    let field = |x: Point2| -> Result<f64> {
        let u = barycentric(x, x0, x1, x2)?;
        Ok(u[0] * phi[0] + u[1] * phi[1] + u[2] * phi[2])
    };
    let point = |u1: f64, u2: f64| -> Point2 {
        let u0 = 1.0 - u1 - u2;
        [u0 * x0[0] + u1 * x1[0] + u2 * x2[0], u0 * x0[1] + u1 * x1[1] + u2 * x2[1]]
    };
    let nf = n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n - i {
            let mut mids = vec![((i as f64 + 1.0 / 3.0) / nf, (j as f64 + 1.0 / 3.0) / nf)];
            if i + j + 2 <= n {
                mids.push(((i as f64 + 2.0 / 3.0) / nf, (j as f64 + 2.0 / 3.0) / nf));
            }
            for (u1, u2) in mids {
                let c = point(u1, u2);
                let gx = (field([c[0] + h, c[1]])? - field([c[0] - h, c[1]])?) / (2.0 * h);
                let gy = (field([c[0], c[1] + h])? - field([c[0], c[1] - h])?) / (2.0 * h);
                total += 0.5 * (gx * gx + gy * gy) * area / (nf * nf);
            }
        }
    }
    Ok(total)
}

/// Matrix of the family's action on a triangle of shape `a`.
pub fn action_matrix(fam: &ActionFamily, a: &CotangentVector) -> QuadForm3 {
    let (s1, s2) = (a.rotated(1), a.rotated(2));
    let (q0, q1, q2) = (fam.q(a), fam.q(&s1), fam.q(&s2));
    QuadForm3(Matrix3::new(
        fam.p(a), q2 / 2.0, q1 / 2.0,
        q2 / 2.0, fam.p(&s1), q0 / 2.0,
        q1 / 2.0, q0 / 2.0, fam.p(&s2),
    ))
}

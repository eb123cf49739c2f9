//! Similarity classes of marked triangles.
//!
//! A marked triangle is described by the cotangents `(a0, a1, a2)` of its
//! angles, which satisfy `a0 a1 + a1 a2 + a2 a0 = 1`. The same point can be
//! viewed on the forward sheet of the unit hyperboloid in Minkowski space, or
//! as the position `z` of vertex 0 in the upper half plane once vertex 1 is
//! placed at 0 and vertex 2 at 1.

mod group;

pub use group::{eta, Generator, GroupElement};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Point2;

/// Default scale of the cotangent-identity tolerance.
pub const IDENTITY_TOL_SCALE: f64 = 1e-9;

/// Relative area threshold below which a triangle is treated as degenerate.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-14;

/// Cotangents of the angles at vertices 0, 1, 2 of a marked triangle.
///
/// Construction checks the cotangent identity against a tolerance that grows
/// with flatness, `scale * max(1, flatness^2)`, and reflects inputs whose
/// components sum to a negative number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct CotangentVector([f64; 3]);

impl CotangentVector {
    pub fn new(a0: f64, a1: f64, a2: f64) -> Result<Self> {
        Self::with_tolerance([a0, a1, a2], IDENTITY_TOL_SCALE)
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self> {
        Self::with_tolerance(a, IDENTITY_TOL_SCALE)
    }

    pub fn with_tolerance(a: [f64; 3], tol_scale: f64) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::IdentityViolation { a, residual: f64::INFINITY, tol: 0.0 });
        }
        let a = if a[0] + a[1] + a[2] < 0.0 { [-a[0], -a[1], -a[2]] } else { a };
        let residual = identity_residual(&a);
        let tol = identity_tolerance(&a, tol_scale);
        if residual > tol {
            return Err(Error::IdentityViolation { a, residual, tol });
        }
        Ok(Self(a))
    }

    #[inline]
    pub fn a0(&self) -> f64 {
        self.0[0]
    }
    #[inline]
    pub fn a1(&self) -> f64 {
        self.0[1]
    }
    #[inline]
    pub fn a2(&self) -> f64 {
        self.0[2]
    }
    #[inline]
    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
    #[inline]
    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn identity_residual(&self) -> f64 {
        identity_residual(&self.0)
    }

    /// Cyclic relabelling `σᵏ a`; exact, no validation needed.
    #[inline]
    pub fn rotated(&self, k: usize) -> Self {
        let a = self.0;
        Self([a[k % 3], a[(k + 1) % 3], a[(k + 2) % 3]])
    }

    /// Interchange of vertices 1 and 2 (`τ a`).
    #[inline]
    pub fn swapped(&self) -> Self {
        Self([self.0[0], self.0[2], self.0[1]])
    }

    pub fn equilateral() -> Self {
        let c = 1.0 / 3f64.sqrt();
        Self([c, c, c])
    }
}

impl From<CotangentVector> for [f64; 3] {
    fn from(a: CotangentVector) -> Self {
        a.0
    }
}

impl TryFrom<[f64; 3]> for CotangentVector {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        Self::from_array(a)
    }
}

/// `|a0 a1 + a1 a2 + a2 a0 - 1|`.
pub fn identity_residual(a: &[f64; 3]) -> f64 {
    (a[0] * a[1] + a[1] * a[2] + a[2] * a[0] - 1.0).abs()
}

pub fn identity_tolerance(a: &[f64; 3], scale: f64) -> f64 {
    let f = 4.0 * (a[0] + a[1] + a[2]);
    scale * f64::max(1.0, f * f)
}

/// Point `(p0, p1, p2)` on the forward sheet of `p0² - p1² - p2² = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiVector {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl MinkowskiVector {
    pub fn norm_sq(&self) -> f64 {
        self.p0 * self.p0 - self.p1 * self.p1 - self.p2 * self.p2
    }
}

/// Position of vertex 0 when vertex 1 sits at 0 and vertex 2 at 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub re: f64,
    pub im: f64,
}

impl HalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() || im <= 0.0 {
            return Err(Error::HalfPlaneDomain { im });
        }
        Ok(Self { re, im })
    }

    pub fn equilateral() -> Self {
        Self { re: 0.5, im: 3f64.sqrt() / 2.0 }
    }
}

/// Cotangents of three angles given in radians.
pub fn cot_from_angles(t0: f64, t1: f64, t2: f64) -> Result<CotangentVector> {
    for (i, t) in [t0, t1, t2].into_iter().enumerate() {
        if !(t > 0.0 && t < PI) {
            return Err(Error::AngleDomain(format!("angle {i} = {t} is not in (0, π)")));
        }
    }
    let excess = t0 + t1 + t2 - PI;
    if excess.abs() > 1e-9 {
        return Err(Error::AngleDomain(format!("angles sum to π{excess:+e}")));
    }
    let cot = |t: f64| t.cos() / t.sin();
    CotangentVector::new(cot(t0), cot(t1), cot(t2))
}

/// Twice the signed area of `(x0, x1, x2)`; positive when counterclockwise.
pub fn signed_area2(x0: Point2, x1: Point2, x2: Point2) -> f64 {
    (x1[0] - x0[0]) * (x2[1] - x0[1]) - (x1[1] - x0[1]) * (x2[0] - x0[0])
}

pub(crate) fn check_nondegenerate(x0: Point2, x1: Point2, x2: Point2) -> Result<f64> {
    let dist = |p: Point2, q: Point2| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let perimeter = dist(x0, x1) + dist(x1, x2) + dist(x2, x0);
    let area2 = signed_area2(x0, x1, x2);
    let area = 0.5 * area2;
    if !area.is_finite() || area.abs() < DEGENERATE_AREA_RATIO * perimeter * perimeter {
        return Err(Error::DegenerateTriangle { area, perimeter });
    }
    Ok(area2)
}

/// Cotangents of the angles of the triangle with vertices `x0, x1, x2`.
///
/// Clockwise input is reflected, so the result always has a positive sum.
pub fn cot_from_coords(x0: Point2, x1: Point2, x2: Point2) -> Result<CotangentVector> {
    let area2 = check_nondegenerate(x0, x1, x2)?;
    let x = [x0, x1, x2];
    let mut a = [0.0; 3];
    for i in 0..3 {
        let (p, q, r) = (x[i], x[(i + 1) % 3], x[(i + 2) % 3]);
        let dot = (q[0] - p[0]) * (r[0] - p[0]) + (q[1] - p[1]) * (r[1] - p[1]);
        a[i] = dot / area2.abs();
    }
    CotangentVector::from_array(a)
}

pub fn to_minkowski(a: &CotangentVector) -> MinkowskiVector {
    let s3 = 3f64.sqrt();
    let [a0, a1, a2] = a.as_array();
    MinkowskiVector {
        p0: (a0 + a1 + a2) / s3,
        p1: (a2 - a1) / 2.0,
        p2: (2.0 * a0 - a1 - a2) / (2.0 * s3),
    }
}

/// `z = (a1 + i) / (a1 + a2)`.
pub fn to_halfplane(a: &CotangentVector) -> HalfPlanePoint {
    let d = a.a1() + a.a2();
    HalfPlanePoint { re: a.a1() / d, im: 1.0 / d }
}

pub fn from_halfplane(z: HalfPlanePoint) -> Result<CotangentVector> {
    let z = HalfPlanePoint::new(z.re, z.im)?;
    let a1 = z.re / z.im;
    let a2 = (1.0 - z.re) / z.im;
    let a0 = (1.0 - a1 * a2) / (a1 + a2);
    CotangentVector::new(a0, a1, a2)
}

/// Applies `g` to `a` in floating point and re-validates the identity.
pub fn apply_group(g: &GroupElement, a: &CotangentVector) -> Result<CotangentVector> {
    g.apply(a)
}

/// Action of a generator on the half-plane coordinate.
pub fn moebius(g: Generator, z: HalfPlanePoint) -> Result<HalfPlanePoint> {
    let z = HalfPlanePoint::new(z.re, z.im)?;
    let w = match g {
        // 1 / (1 - z)
        Generator::Sigma => {
            let (x, y) = (1.0 - z.re, -z.im);
            let d = x * x + y * y;
            (x / d, -y / d)
        }
        // 1 - conj(z)
        Generator::Tau => (1.0 - z.re, z.im),
        // (1 + z) / 3
        Generator::Lambda => ((1.0 + z.re) / 3.0, z.im / 3.0),
    };
    HalfPlanePoint::new(w.0, w.1)
}

/// `4 (a0 + a1 + a2)`: squared side lengths summed over area.
pub fn flatness(a: &CotangentVector) -> f64 {
    4.0 * a.sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const S3: f64 = 1.732_050_807_568_877_2;

    fn close3(a: [f64; 3], b: [f64; 3], eps: f64) {
        for i in 0..3 {
            assert_abs_diff_eq!(a[i], b[i], epsilon = eps);
        }
    }

    #[test]
    fn angles_equilateral_and_right_isoceles() {
        let a = cot_from_angles(PI / 3.0, PI / 3.0, PI / 3.0).unwrap();
        close3(a.as_array(), [1.0 / S3; 3], 1e-15);
        let b = cot_from_angles(PI / 2.0, PI / 4.0, PI / 4.0).unwrap();
        close3(b.as_array(), [0.0, 1.0, 1.0], 1e-15);
    }

    #[test]
    fn angles_generic_direct_cot() {
        let t2 = PI - 0.5;
        let a = cot_from_angles(0.2, 0.3, t2).unwrap();
        let expect = [1.0 / 0.2f64.tan(), 1.0 / 0.3f64.tan(), 1.0 / t2.tan()];
        close3(a.as_array(), expect, 1e-12);
        assert!(a.identity_residual() < 1e-12);
    }

    #[test]
    fn angles_domain_errors() {
        assert!(matches!(cot_from_angles(0.0, PI / 2.0, PI / 2.0), Err(Error::AngleDomain(_))));
        assert!(matches!(cot_from_angles(1.0, 1.0, 1.0), Err(Error::AngleDomain(_))));
        assert!(matches!(cot_from_angles(-0.1, 1.0, PI - 0.9), Err(Error::AngleDomain(_))));
    }

    #[test]
    fn coords_examples() {
        let a = cot_from_coords([0.5, S3 / 2.0], [0.0, 0.0], [1.0, 0.0]).unwrap();
        close3(a.as_array(), [1.0 / S3; 3], 1e-15);
        let b = cot_from_coords([0.5, 0.5], [0.0, 0.0], [1.0, 0.0]).unwrap();
        close3(b.as_array(), [0.0, 1.0, 1.0], 1e-15);
        // clockwise is reflected
        let c = cot_from_coords([0.5, 0.5], [1.0, 0.0], [0.0, 0.0]).unwrap();
        close3(c.as_array(), [0.0, 1.0, 1.0], 1e-15);
        assert!(matches!(
            cot_from_coords([0.0, 0.0], [1.0, 0.0], [2.0, 0.0]),
            Err(Error::DegenerateTriangle { .. })
        ));
    }

    #[test]
    fn reflection_of_negative_sum() {
        let a = CotangentVector::new(0.0, -1.0, -1.0).unwrap();
        assert_eq!(a.as_array(), [0.0, 1.0, 1.0]);
        assert!(matches!(CotangentVector::new(1.0, 1.0, 1.0), Err(Error::IdentityViolation { .. })));
    }

    #[test]
    fn minkowski_examples() {
        let p = to_minkowski(&CotangentVector::equilateral());
        assert_abs_diff_eq!(p.p0, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p2, 0.0, epsilon = 1e-15);
        let q = to_minkowski(&CotangentVector::new(0.0, 1.0, 1.0).unwrap());
        close3([q.p0, q.p1, q.p2], [2.0 / S3, 0.0, -1.0 / S3], 1e-15);
    }

    #[test]
    fn halfplane_examples() {
        let z = to_halfplane(&CotangentVector::equilateral());
        assert_abs_diff_eq!(z.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, S3 / 2.0, epsilon = 1e-15);
        let w = to_halfplane(&CotangentVector::new(0.0, 1.0, 1.0).unwrap());
        assert_eq!((w.re, w.im), (0.5, 0.5));
        assert!(matches!(from_halfplane(HalfPlanePoint { re: 0.3, im: 0.0 }), Err(Error::HalfPlaneDomain { .. })));
        assert!(HalfPlanePoint::new(0.3, -1.0).is_err());
    }

    #[test]
    fn moebius_examples() {
        let s = moebius(Generator::Sigma, HalfPlanePoint { re: 0.0, im: 1.0 }).unwrap();
        assert_abs_diff_eq!(s.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.im, 0.5, epsilon = 1e-15);
        let t = moebius(Generator::Tau, HalfPlanePoint { re: 0.5, im: 0.5 }).unwrap();
        assert_eq!((t.re, t.im), (0.5, 0.5));
        let l = moebius(Generator::Lambda, HalfPlanePoint::equilateral()).unwrap();
        assert_abs_diff_eq!(l.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(l.im, 1.0 / (2.0 * S3), epsilon = 1e-15);
    }

    #[test]
    fn flatness_examples() {
        assert_abs_diff_eq!(flatness(&CotangentVector::equilateral()), 4.0 * S3, epsilon = 1e-14);
        assert_eq!(flatness(&CotangentVector::new(0.0, 1.0, 1.0).unwrap()), 8.0);
        let child = GroupElement::lambda().apply(&CotangentVector::equilateral()).unwrap();
        assert_abs_diff_eq!(flatness(&child), 20.0 / S3, epsilon = 1e-13);
    }

    fn shape() -> impl Strategy<Value = CotangentVector> {
        (0.05f64..0.95, 0.05f64..2.0)
            .prop_map(|(re, im)| from_halfplane(HalfPlanePoint { re, im }).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn minkowski_unit_forward_sheet(a in shape()) {
            let p = to_minkowski(&a);
            prop_assert!((p.norm_sq() - 1.0).abs() < 1e-10);
            prop_assert!(p.p0 > 0.0);
        }

        #[test]
        fn halfplane_round_trip(a in shape()) {
            let b = from_halfplane(to_halfplane(&a)).unwrap();
            for i in 0..3 {
                let scale = 1.0 + a.as_array()[i].abs();
                prop_assert!((a.as_array()[i] - b.as_array()[i]).abs() < 1e-12 * scale);
            }
        }

        #[test]
        fn moebius_commutes_with_matrices(a in shape()) {
            for (gen, g) in [
                (Generator::Sigma, GroupElement::sigma()),
                (Generator::Tau, GroupElement::tau()),
                (Generator::Lambda, GroupElement::lambda()),
            ] {
                let lhs = moebius(gen, to_halfplane(&a)).unwrap();
                let rhs = to_halfplane(&g.apply(&a).unwrap());
                prop_assert!((lhs.re - rhs.re).abs() < 1e-12);
                prop_assert!((lhs.im - rhs.im).abs() < 1e-12);
            }
        }

        #[test]
        fn flatness_bounded_and_permutation_invariant(a in shape()) {
            let f = flatness(&a);
            prop_assert!(f >= 4.0 * S3 - 1e-12);
            prop_assert!((flatness(&a.rotated(1)) - f).abs() < 1e-12 * f);
            prop_assert!((flatness(&a.swapped()) - f).abs() < 1e-12 * f);
        }
    }
}

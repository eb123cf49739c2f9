//! One decimation step: subdivide at the centroid, integrate out the
//! centroid field, and read off the new coefficient functions.

use std::sync::OnceLock;

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use super::{action_matrix, ActionFamily, QuadForm3};
use crate::error::{Error, Result};
use crate::sampling::{par_map, random_shape};
use crate::shape_space::{CotangentVector, Generator, GroupElement};
use crate::subdivision::subdivide_shape;

/// `S_sub = A φ3² + B φ3 + C`, with `B = Σ b_i φ_i` and `C` a form on
/// `(φ0, φ1, φ2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RGStepBreakdown {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: [f64; 3],
    #[serde(rename = "C")]
    pub c: QuadForm3,
    /// `½ ln(3(a0+a1+a2)/(2π))`; bookkeeping only.
    #[serde(rename = "logZ")]
    pub log_z: f64,
}

/// 4×4 form of the subdivided triangle on `(φ0, φ1, φ2, φ3)`, `φ3` at the
/// centroid, assembled by scattering each child's action matrix.
pub fn subdivided_matrix(fam: &ActionFamily, a: &CotangentVector) -> Result<Matrix4<f64>> {
    let children = subdivide_shape(a)?;
    // child k has local vertices (centroid, k+1, k+2)
    let local = [[3, 1, 2], [3, 2, 0], [3, 0, 1]];
    let mut m = Matrix4::zeros();
    for (child, idx) in children.iter().zip(local) {
        let e = action_matrix(fam, child);
        for i in 0..3 {
            for j in 0..3 {
                m[(idx[i], idx[j])] += e.matrix()[(i, j)];
            }
        }
    }
    Ok(m)
}

pub fn assemble_subdivided(fam: &ActionFamily, a: &CotangentVector) -> Result<RGStepBreakdown> {
    let m = subdivided_matrix(fam, a)?;
    let big_a = m[(3, 3)];
    if big_a.is_nan() || big_a <= 0.0 {
        return Err(Error::NonPositiveA { a: a.as_array(), value: big_a });
    }
    Ok(RGStepBreakdown {
        a: big_a,
        b: [2.0 * m[(3, 0)], 2.0 * m[(3, 1)], 2.0 * m[(3, 2)]],
        c: QuadForm3::from_matrix(m.fixed_view::<3, 3>(0, 0).into_owned()),
        log_z: 0.5 * (3.0 * a.sum() / (2.0 * std::f64::consts::PI)).ln(),
    })
}

/// `C − B²/(4A)`.
pub fn integrate_out_center(b: &RGStepBreakdown) -> Result<QuadForm3> {
    if b.a.is_nan() || b.a <= 0.0 {
        return Err(Error::NonPositiveA { a: [f64::NAN; 3], value: b.a });
    }
    let v = nalgebra::Vector3::from(b.b);
    let outer: Matrix3<f64> = v * v.transpose();
    Ok(QuadForm3::from_matrix(b.c.matrix() - outer / (4.0 * b.a)))
}

struct Words {
    l: GroupElement,
    ls: GroupElement,
    ls2: GroupElement,
    sls: GroupElement,
    s2ls2: GroupElement,
    s2ls: GroupElement,
    sls2: GroupElement,
    s2l: GroupElement,
    sl: GroupElement,
}

fn words() -> &'static Words {
    use Generator::{Lambda as L, Sigma as S};
    static W: OnceLock<Words> = OnceLock::new();
    W.get_or_init(|| Words {
        l: GroupElement::from_word(&[L]),
        ls: GroupElement::from_word(&[L, S]),
        ls2: GroupElement::from_word(&[L, S, S]),
        sls: GroupElement::from_word(&[S, L, S]),
        s2ls2: GroupElement::from_word(&[S, S, L, S, S]),
        s2ls: GroupElement::from_word(&[S, S, L, S]),
        sls2: GroupElement::from_word(&[S, L, S, S]),
        s2l: GroupElement::from_word(&[S, S, L]),
        sl: GroupElement::from_word(&[S, L]),
    })
}

/// `(P̃(a), Q̃(a))` from the closed-form coefficient comparison.
pub fn rg_step(fam: &ActionFamily, a: &CotangentVector) -> Result<(f64, f64)> {
    let w = words();
    let p = |g: &GroupElement| g.apply(a).map(|x| fam.p(&x));
    let q = |g: &GroupElement| g.apply(a).map(|x| fam.q(&x));

    let denom = p(&w.l)? + p(&w.ls)? + p(&w.ls2)?;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::NonPositiveA { a: a.as_array(), value: denom });
    }
    let b0 = q(&w.sls)? + q(&w.s2ls2)?;
    let b1 = q(&w.s2l)? + q(&w.sls2)?;
    let b2 = q(&w.sl)? + q(&w.s2ls)?;
    let p_new = p(&w.s2ls)? + p(&w.sls2)? - b0 * b0 / (4.0 * denom);
    let q_new = q(&w.l)? - b1 * b2 / (2.0 * denom);
    Ok((p_new, q_new))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub family: String,
    pub samples: usize,
    pub seed: u64,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    pub inadmissible_count: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

type Evaluation = Option<([f64; 2], [f64; 2])>;

fn evaluate(fam: &ActionFamily, samples: usize, seed: u64, workers: usize) -> Result<Vec<Evaluation>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    par_map(samples, workers, |i| {
        let a = random_shape(seed, i as u64);
        match rg_step(fam, &a) {
            Ok((pt, qt)) => Ok(Some(([fam.p(&a), fam.q(&a)], [pt, qt]))),
            Err(Error::NonPositiveA { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect()
}

fn scaled_residual(old: [f64; 2], new: [f64; 2], lambda: f64) -> f64 {
    let d = f64::max((new[0] - lambda * old[0]).abs(), (new[1] - lambda * old[1]).abs());
    d / (1.0 + old[0].abs() + old[1].abs())
}

fn report(fam: &ActionFamily, samples: usize, seed: u64, evals: &[Evaluation], lambda: f64) -> ResidualReport {
    let admissible: Vec<_> = evals.iter().flatten().collect();
    let mut warnings = Vec::new();
    let max_residual = if admissible.is_empty() {
        warnings.push("no admissible samples".to_string());
        f64::NAN
    } else {
        admissible.iter().map(|(o, n)| scaled_residual(*o, *n, lambda)).fold(0.0, f64::max)
    };
    ResidualReport {
        family: fam.name().to_string(),
        samples,
        seed,
        max_residual,
        lambda: None,
        inadmissible_count: evals.len() - admissible.len(),
        warnings,
    }
}

/// Largest `max(|P̃−P|, |Q̃−Q|) / (1 + |P| + |Q|)` over random shapes.
/// Shapes where `A ≤ 0` are counted, not included.
pub fn fixed_point_residual(fam: &ActionFamily, samples: usize, seed: u64, workers: usize) -> Result<ResidualReport> {
    let evals = evaluate(fam, samples, seed, workers)?;
    Ok(report(fam, samples, seed, &evals, 1.0))
}

/// Least-squares scale `λ` with `(P̃, Q̃) ≈ λ (P, Q)` over random shapes, and
/// the residual after removing it. A positive `λ` can be absorbed by
/// rescaling the field by `1/√λ`.
pub fn projective_residual(fam: &ActionFamily, samples: usize, seed: u64, workers: usize) -> Result<ResidualReport> {
    let evals = evaluate(fam, samples, seed, workers)?;
    let (num, den) = evals.iter().flatten().fold((0.0, 0.0), |(n, d), (o, m)| {
        (n + o[0] * m[0] + o[1] * m[1], d + o[0] * o[0] + o[1] * o[1])
    });
    let lambda = num / den;
    let mut r = report(fam, samples, seed, &evals, lambda);
    r.lambda = Some(lambda);
    if lambda <= 0.0 {
        r.warnings.push(format!("scale factor {lambda} is not positive; no real field rescaling absorbs it"));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{stream, uniform};
    use approx::assert_abs_diff_eq;

    const S3: f64 = 1.732_050_807_568_877_2;

    fn rel_close(x: f64, y: f64, eps: f64) -> bool {
        (x - y).abs() <= eps * (1.0 + x.abs().max(y.abs()))
    }

    #[test]
    fn cotangent_breakdown_equilateral() {
        let b = assemble_subdivided(&ActionFamily::cotangent(), &CotangentVector::equilateral()).unwrap();
        assert_abs_diff_eq!(b.a, 3.0 * S3 / 2.0, epsilon = 1e-14);
        for x in b.b {
            assert_abs_diff_eq!(x, -S3, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(b.log_z, 0.5 * (3.0 * S3 / (2.0 * std::f64::consts::PI)).ln(), epsilon = 1e-15);
    }

    #[test]
    fn constant_breakdown() {
        let (p, q) = (0.7, -0.3);
        let a = random_shape(2, 2);
        let b = assemble_subdivided(&ActionFamily::constant(p, q), &a).unwrap();
        assert_abs_diff_eq!(b.a, 3.0 * p, epsilon = 1e-15);
        for x in b.b {
            assert_abs_diff_eq!(x, 2.0 * q, epsilon = 1e-15);
        }
        for i in 0..3 {
            assert_abs_diff_eq!(b.c.square_coeff(i), 2.0 * p, epsilon = 1e-15);
        }
    }

    #[test]
    fn cotangent_a_is_three_halves_sum() {
        let fam = ActionFamily::cotangent();
        for i in 0..100 {
            let a = random_shape(8, i);
            let b = assemble_subdivided(&fam, &a).unwrap();
            assert!(rel_close(b.a, 1.5 * a.sum(), 1e-12));
        }
    }

    #[test]
    fn equilateral_is_one_step_fixed() {
        let fam = ActionFamily::cotangent();
        let e = CotangentVector::equilateral();
        let eff = integrate_out_center(&assemble_subdivided(&fam, &e).unwrap()).unwrap();
        let want = action_matrix(&fam, &e);
        assert!((eff.matrix() - want.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn zero_q_leaves_c_untouched() {
        let fam = ActionFamily::custom("pq0", |a| a.sum(), |_| 0.0);
        let b = assemble_subdivided(&fam, &random_shape(1, 1)).unwrap();
        assert_eq!(integrate_out_center(&b).unwrap(), b.c);
    }

    #[test]
    fn constant_family_scales_by_five_thirds() {
        let fam = ActionFamily::constant(0.5, -0.5);
        for i in 0..20 {
            let a = random_shape(6, i);
            let eff = integrate_out_center(&assemble_subdivided(&fam, &a).unwrap()).unwrap();
            let want = action_matrix(&fam, &a).matrix() * (5.0 / 3.0);
            assert!((eff.matrix() - want).abs().max() < 1e-12);
        }
    }

    #[test]
    fn rg_step_examples() {
        let fam = ActionFamily::cotangent();
        let (p, q) = rg_step(&fam, &CotangentVector::equilateral()).unwrap();
        assert_abs_diff_eq!(p, 1.0 / (2.0 * S3), epsilon = 1e-14);
        assert_abs_diff_eq!(q, -1.0 / (2.0 * S3), epsilon = 1e-14);
        let (p, q) = rg_step(&fam, &CotangentVector::new(0.0, 1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-14);

        let (cp, cq) = (0.8, 0.25);
        let (p, q) = rg_step(&ActionFamily::constant(cp, cq), &random_shape(0, 9)).unwrap();
        assert_abs_diff_eq!(p, 2.0 * cp - cq * cq / (3.0 * cp), epsilon = 1e-15);
        assert_abs_diff_eq!(q, cq - 2.0 * cq * cq / (3.0 * cp), epsilon = 1e-15);
    }

    #[test]
    fn non_positive_a_is_an_error() {
        let fam = ActionFamily::constant(-1.0, 0.2);
        let a = CotangentVector::equilateral();
        assert!(matches!(rg_step(&fam, &a), Err(Error::NonPositiveA { .. })));
        assert!(matches!(assemble_subdivided(&fam, &a), Err(Error::NonPositiveA { .. })));
        let broken = RGStepBreakdown { a: 0.0, b: [0.0; 3], c: QuadForm3::from([[0.0; 3]; 3]), log_z: 0.0 };
        assert!(integrate_out_center(&broken).is_err());
    }

    fn random_family(rng: &mut rand_pcg::Pcg32) -> ActionFamily {
        let c: Vec<f64> = (0..6).map(|_| uniform(rng) * 2.0 - 0.5).collect();
        let (c0, c1, c2, d0, d1, d2) = (c[0] + 1.0, c[1], c[2], c[3], c[4], c[5]);
        ActionFamily::custom(
            "random",
            move |a| c0 + c1 * (a.a1() + a.a2()) + c2 * a.a1() * a.a2(),
            move |a| d0 + d1 * a.a0() + d2 * (a.a1() * a.a1() + a.a2() * a.a2()),
        )
    }

    #[test]
    fn closed_form_matches_matrix_pipeline() {
        let mut rng = stream(30, 0);
        for i in 0..200 {
            let fam = if i % 2 == 0 { ActionFamily::cotangent() } else { random_family(&mut rng) };
            let a = random_shape(31, i);
            let (Ok((p, q)), Ok(b)) = (rg_step(&fam, &a), assemble_subdivided(&fam, &a)) else {
                continue;
            };
            let eff = integrate_out_center(&b).unwrap();
            assert!(rel_close(p, eff.square_coeff(0), 1e-12), "{p} {}", eff.square_coeff(0));
            assert!(rel_close(q, eff.cross_coeff(1, 2), 1e-12), "{q} {}", eff.cross_coeff(1, 2));
        }
    }

    #[test]
    fn new_coefficients_tau_invariant_and_a_permutation_invariant() {
        let mut rng = stream(40, 0);
        for i in 0..100 {
            let fam = random_family(&mut rng);
            let a = random_shape(41, i);
            let Ok(here) = rg_step(&fam, &a) else { continue };
            let there = rg_step(&fam, &a.swapped()).unwrap();
            assert!(rel_close(here.0, there.0, 1e-12) && rel_close(here.1, there.1, 1e-12));
            let big_a = assemble_subdivided(&fam, &a).unwrap().a;
            for b in [a.rotated(1), a.rotated(2), a.swapped()] {
                assert!(rel_close(assemble_subdivided(&fam, &b).unwrap().a, big_a, 1e-12));
            }
        }
    }

    #[test]
    fn residual_reports() {
        let cot = fixed_point_residual(&ActionFamily::cotangent(), 200, 0, 0).unwrap();
        assert!(cot.max_residual < 1e-10);
        assert_eq!(cot.inadmissible_count, 0);

        let constant = fixed_point_residual(&ActionFamily::constant(0.5, -0.5), 50, 0, 0).unwrap();
        assert!(constant.max_residual > 0.1);

        let perturbed = ActionFamily::custom("perturbed", |a| (a.a1() + a.a2()) / 4.0, |a| -a.a0() / 2.0 + 0.01);
        assert!(fixed_point_residual(&perturbed, 200, 0, 0).unwrap().max_residual > 1e-3);

        let proj = projective_residual(&ActionFamily::constant(0.5, -0.5), 50, 0, 0).unwrap();
        assert_abs_diff_eq!(proj.lambda.unwrap(), 5.0 / 3.0, epsilon = 1e-12);
        assert!(proj.max_residual < 1e-12);

        let other_root = projective_residual(&ActionFamily::constant(0.5, 1.5), 50, 0, 0).unwrap();
        assert_abs_diff_eq!(other_root.lambda.unwrap(), -1.0, epsilon = 1e-12);
        assert!(!other_root.warnings.is_empty());

        let cot_proj = projective_residual(&ActionFamily::cotangent(), 200, 0, 0).unwrap();
        assert_abs_diff_eq!(cot_proj.lambda.unwrap(), 1.0, epsilon = 1e-12);
        assert!(cot_proj.max_residual < 1e-10);

        let bad = fixed_point_residual(&ActionFamily::constant(-1.0, 0.0), 10, 0, 0).unwrap();
        assert_eq!(bad.inadmissible_count, 10);
        assert!(bad.max_residual.is_nan());
        assert!(fixed_point_residual(&ActionFamily::cotangent(), 0, 0, 0).is_err());
    }

    #[test]
    fn residuals_independent_of_workers() {
        let fam = ActionFamily::cotangent();
        assert_eq!(
            projective_residual(&fam, 100, 5, 1).unwrap(),
            projective_residual(&fam, 100, 5, 3).unwrap()
        );
    }
}

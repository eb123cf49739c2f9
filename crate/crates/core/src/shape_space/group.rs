//! Exact 3×3 matrices acting on cotangent vectors.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::CotangentVector;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    /// Cyclic relabelling 012 ↦ 120.
    Sigma,
    /// Interchange of vertices 1 and 2.
    Tau,
    /// Passage to the centroid child opposite vertex 0.
    Lambda,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Sigma => "σ",
            Generator::Tau => "τ",
            Generator::Lambda => "Λ",
        })
    }
}

type Exact = [[BigRational; 3]; 3];

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn exact_from(rows: [[(i64, i64); 3]; 3]) -> Exact {
    rows.map(|r| r.map(|(n, d)| rat(n, d)))
}

fn exact_mul(x: &Exact, y: &Exact) -> Exact {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            (0..3).fold(BigRational::zero(), |acc, k| acc + &x[i][k] * &y[k][j])
        })
    })
}

fn exact_transpose(x: &Exact) -> Exact {
    std::array::from_fn(|i| std::array::from_fn(|j| x[j][i].clone()))
}

/// The quadratic form with `aᵀ η a = a0 a1 + a1 a2 + a2 a0`.
pub fn eta() -> [[BigRational; 3]; 3] {
    exact_from([[(0, 1), (1, 2), (1, 2)], [(1, 2), (0, 1), (1, 2)], [(1, 2), (1, 2), (0, 1)]])
}

/// A product of generators, stored as an exact rational matrix together with
/// the word it came from. The word is read as a matrix product, so `[Λ, σ]`
/// is the matrix `Λσ`, which acts on a vector by `σ` first.
#[derive(Clone, Debug)]
pub struct GroupElement {
    m: Exact,
    word: Vec<Generator>,
    approx: Matrix3<f64>,
}

impl PartialEq for GroupElement {
    /// Matrix equality; the words may differ.
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl GroupElement {
    fn from_exact(m: Exact, word: Vec<Generator>) -> Self {
        let approx = Matrix3::from_fn(|i, j| m[i][j].to_f64().unwrap_or(f64::NAN));
        Self { m, word, approx }
    }

    pub fn identity() -> Self {
        Self::from_exact(
            std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { BigRational::one() } else { BigRational::zero() })
            }),
            Vec::new(),
        )
    }

    pub fn sigma() -> Self {
        Self::from_exact(
            exact_from([[(0, 1), (1, 1), (0, 1)], [(0, 1), (0, 1), (1, 1)], [(1, 1), (0, 1), (0, 1)]]),
            vec![Generator::Sigma],
        )
    }

    pub fn tau() -> Self {
        Self::from_exact(
            exact_from([[(1, 1), (0, 1), (0, 1)], [(0, 1), (0, 1), (1, 1)], [(0, 1), (1, 1), (0, 1)]]),
            vec![Generator::Tau],
        )
    }

    pub fn lambda() -> Self {
        Self::from_exact(
            exact_from([[(1, 3), (-2, 3), (-2, 3)], [(0, 1), (2, 1), (1, 1)], [(0, 1), (1, 1), (2, 1)]]),
            vec![Generator::Lambda],
        )
    }

    pub fn generator(g: Generator) -> Self {
        match g {
            Generator::Sigma => Self::sigma(),
            Generator::Tau => Self::tau(),
            Generator::Lambda => Self::lambda(),
        }
    }

    pub fn from_word(word: &[Generator]) -> Self {
        word.iter()
            .fold(Self::identity(), |acc, &g| acc.compose(&Self::generator(g)))
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        Self::from_exact(exact_mul(&self.m, &other.m), word)
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc.compose(self))
    }

    pub fn word(&self) -> &[Generator] {
        &self.word
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.m[i][j]
    }

    pub fn to_f64(&self) -> Matrix3<f64> {
        self.approx
    }

    /// `mᵀ η m == η`, checked exactly.
    pub fn preserves_eta(&self) -> bool {
        let eta = eta();
        exact_mul(&exact_mul(&exact_transpose(&self.m), &eta), &self.m) == eta
    }

    pub fn is_identity(&self) -> bool {
        self.m == Self::identity().m
    }

    pub fn apply(&self, a: &CotangentVector) -> Result<CotangentVector> {
        let v = self.approx * Vector3::from(a.as_array());
        CotangentVector::from_array([v[0], v[1], v[2]])
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("1");
        }
        for g in &self.word {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn generator_relations_exact() {
        let (s, t, l) = (GroupElement::sigma(), GroupElement::tau(), GroupElement::lambda());
        assert!(s.pow(3).is_identity());
        assert!(!s.is_identity() && !s.pow(2).is_identity());
        assert!(t.pow(2).is_identity());
        assert_eq!(t.compose(&s).compose(&t), s.pow(2));
        assert_eq!(l.compose(&t), t.compose(&l));
        for g in [&s, &t, &l] {
            assert!(g.preserves_eta());
        }
    }

    #[test]
    fn eta_preserved_for_all_words_up_to_length_4() {
        let gens = [Generator::Sigma, Generator::Tau, Generator::Lambda];
        let mut frontier = vec![GroupElement::identity()];
        for _ in 0..4 {
            frontier = frontier
                .iter()
                .flat_map(|w| gens.iter().map(move |&g| w.compose(&GroupElement::generator(g))))
                .collect();
            assert!(frontier.iter().all(GroupElement::preserves_eta));
        }
        assert_eq!(frontier.len(), 81);
    }

    #[test]
    fn apply_examples() {
        let a = CotangentVector::new(0.0, 1.0, 1.0).unwrap();
        assert_eq!(GroupElement::sigma().apply(&a).unwrap().as_array(), [1.0, 1.0, 0.0]);
        assert_eq!(GroupElement::tau().apply(&a).unwrap().as_array(), [0.0, 1.0, 1.0]);
        let la = GroupElement::lambda().apply(&a).unwrap().as_array();
        assert_abs_diff_eq!(la[0], -4.0 / 3.0, epsilon = 1e-15);
        assert_eq!([la[1], la[2]], [3.0, 3.0]);

        let s3 = 3f64.sqrt();
        let le = GroupElement::lambda().apply(&CotangentVector::equilateral()).unwrap().as_array();
        for (x, y) in le.iter().zip([-1.0 / s3, s3, s3]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn sigma_powers_match_rotation() {
        let r = 2f64.sqrt() - 1.0;
        let b = CotangentVector::new(r, 1.0, r).unwrap();
        for k in 0..3 {
            let via_matrix = GroupElement::sigma().pow(k).apply(&b).unwrap();
            assert_eq!(via_matrix.as_array(), b.rotated(k).as_array());
        }
    }

    #[test]
    fn display_word() {
        let g = GroupElement::from_word(&[Generator::Lambda, Generator::Sigma, Generator::Sigma]);
        assert_eq!(g.to_string(), "Λσσ");
        assert_eq!(GroupElement::identity().to_string(), "1");
    }
}

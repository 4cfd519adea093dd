use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::rational;

/// The registered number fields.
///
/// `RealQuartic` is Q(√3, √5); it is not a tiling field but holds the exact
/// real and imaginary parts of the quartic embeddings (τ = (1+√5)/2,
/// ξ = 1/2 + (√3/2)i, λ = 4+√15), so lattice matrices stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldId {
    Silver,
    Cap,
    Spectre,
    RealQuartic,
}

impl FieldId {
    pub const ALL: [FieldId; 4] = [FieldId::Silver, FieldId::Cap, FieldId::Spectre, FieldId::RealQuartic];

    pub fn spec(self) -> &'static FieldSpec {
        &REGISTRY[self as usize]
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldId::Silver => "silver",
            FieldId::Cap => "cap",
            FieldId::Spectre => "spectre",
            FieldId::RealQuartic => "real_quartic",
        }
    }
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        FieldId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse { input: s.to_string(), reason: "unknown field".into() })
    }
}

/// A quadratic generator g with g² = p·g + q.
#[derive(Debug)]
pub struct Generator {
    pub symbol: &'static str,
    pub aliases: &'static [&'static str],
    pub p: i64,
    pub q: i64,
    /// Complex value under the physical embedding.
    pub value: (f64, f64),
    /// Star image a + b·g.
    pub star: (i64, i64),
    /// Complex-conjugation image a + b·g.
    pub conj: (i64, i64),
    /// Exact real and imaginary parts, as coordinates in the target real field.
    pub exact_re: &'static [(i64, i64)],
    pub exact_im: &'static [(i64, i64)],
}

/// Immutable description of one number field with power-product basis
/// `{∏_{g∈S} g : S ⊆ generators}`, indexed by bitmask.
#[derive(Debug)]
pub struct FieldSpec {
    pub id: FieldId,
    pub degree: usize,
    /// 1 for a real embedding, 2 for a complex embedding read as (Re, Im).
    pub real_dim: usize,
    pub basis: Vec<&'static str>,
    pub generators: Vec<Generator>,
    /// `mul_table[i][j]` = sparse coordinates of `e_i · e_j`.
    pub mul_table: Vec<Vec<Vec<(usize, BigRational)>>>,
    /// Column j is the star image of basis element j.
    pub star_matrix: Vec<Vec<BigRational>>,
    pub conj_matrix: Vec<Vec<BigRational>>,
    /// Complex value of each basis element under the physical embedding.
    pub phys_basis: Vec<(f64, f64)>,
    /// Scale of the trace form ⟨x, y⟩ = scale · Tr(x · conj(y)), which is the
    /// Euclidean inner product of Minkowski lifts.
    pub inner_scale: BigRational,
    /// Field holding the exact coordinates of the embeddings.
    pub exact_target: FieldId,
    /// Extra parse aliases for basis elements that are not single generators.
    pub basis_aliases: Vec<(&'static str, usize)>,
}

impl FieldSpec {
    fn build(
        id: FieldId,
        real_dim: usize,
        basis: Vec<&'static str>,
        generators: Vec<Generator>,
        inner_scale: BigRational,
        exact_target: FieldId,
        basis_aliases: Vec<(&'static str, usize)>,
    ) -> Self {
        let ng = generators.len();
        let degree = 1usize << ng;
        let mul_table = (0..degree)
            .map(|i| (0..degree).map(|j| basis_product(&generators, i, j)).collect())
            .collect();
        let image = |pick: fn(&Generator) -> (i64, i64)| -> Vec<Vec<BigRational>> {
            // Column j: ∏_{g ∈ j} (a_g + b_g g), expanded as a tensor product.
            let mut cols = Vec::with_capacity(degree);
            for j in 0..degree {
                let mut v = vec![BigRational::zero(); degree];
                v[0] = BigRational::one();
                for (gi, g) in generators.iter().enumerate() {
                    if j >> gi & 1 == 0 {
                        continue;
                    }
                    let (a, b) = pick(g);
                    let mut next = vec![BigRational::zero(); degree];
                    for (idx, c) in v.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        // c·e_idx·(a + b g) with g not yet in idx.
                        next[idx] += c * rational(a, 1);
                        next[idx | 1 << gi] += c * rational(b, 1);
                    }
                    v = next;
                }
                cols.push(v);
            }
            // Convert columns to a row-major matrix.
            (0..degree).map(|r| (0..degree).map(|c| cols[c][r].clone()).collect()).collect()
        };
        let star_matrix = image(|g| g.star);
        let conj_matrix = image(|g| g.conj);
        let phys_basis = (0..degree)
            .map(|j| {
                generators
                    .iter()
                    .enumerate()
                    .filter(|(gi, _)| j >> gi & 1 == 1)
                    .fold((1.0, 0.0), |(re, im), (_, g)| {
                        (re * g.value.0 - im * g.value.1, re * g.value.1 + im * g.value.0)
                    })
            })
            .collect();
        FieldSpec {
            id,
            degree,
            real_dim,
            basis,
            generators,
            mul_table,
            star_matrix,
            conj_matrix,
            phys_basis,
            inner_scale,
            exact_target,
            basis_aliases,
        }
    }
}

/// Coordinates of e_i · e_j: per generator, the 1-d factor is 1, g, or g² = p g + q.
fn basis_product(gens: &[Generator], i: usize, j: usize) -> Vec<(usize, BigRational)> {
    let mut terms: Vec<(usize, BigRational)> = vec![(0, BigRational::one())];
    for (gi, g) in gens.iter().enumerate() {
        let bit = 1usize << gi;
        let (a, b) = (i & bit != 0, j & bit != 0);
        let factor: Vec<(usize, BigRational)> = match (a, b) {
            (false, false) => vec![(0, BigRational::one())],
            (true, true) => vec![(0, rational(g.q, 1)), (bit, rational(g.p, 1))],
            _ => vec![(bit, BigRational::one())],
        };
        let mut next = Vec::new();
        for (idx, c) in &terms {
            for (fidx, fc) in &factor {
                if !fc.is_zero() {
                    next.push((idx | fidx, c * fc));
                }
            }
        }
        terms = next;
    }
    terms
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

static REGISTRY: Lazy<Vec<FieldSpec>> = Lazy::new(|| {
    let sqrt3 = 3f64.sqrt();
    let sqrt5 = 5f64.sqrt();
    let tau = (1.0 + sqrt5) / 2.0;
    let lambda = 4.0 + 15f64.sqrt();
    let xi = (0.5, sqrt3 / 2.0);
    let xi_gen = || Generator {
        symbol: "ξ",
        aliases: &["xi", "x"],
        p: 1,
        q: -1,
        value: xi,
        star: (1, -1),
        conj: (1, -1),
        exact_re: &[(1, 2), (0, 1), (0, 1), (0, 1)],
        exact_im: &[(0, 1), (1, 2), (0, 1), (0, 1)],
    };
    let half = rational(1, 2);
    vec![
        FieldSpec::build(
            FieldId::Silver,
            1,
            vec!["1", "√2"],
            vec![Generator {
                symbol: "√2",
                aliases: &["sqrt2", "s2", "r2"],
                p: 0,
                q: 2,
                value: (SQRT2, 0.0),
                star: (0, -1),
                conj: (0, 1),
                exact_re: &[(0, 1), (1, 1)],
                exact_im: &[(0, 1), (0, 1)],
            }],
            BigRational::one(),
            FieldId::Silver,
            vec![],
        ),
        FieldSpec::build(
            FieldId::Cap,
            2,
            vec!["1", "τ", "ξ", "τξ"],
            vec![
                Generator {
                    symbol: "τ",
                    aliases: &["tau", "t"],
                    p: 1,
                    q: 1,
                    value: (tau, 0.0),
                    star: (1, -1),
                    conj: (0, 1),
                    exact_re: &[(1, 2), (0, 1), (1, 2), (0, 1)],
                    exact_im: &[(0, 1), (0, 1), (0, 1), (0, 1)],
                },
                xi_gen(),
            ],
            half.clone(),
            FieldId::RealQuartic,
            vec![],
        ),
        FieldSpec::build(
            FieldId::Spectre,
            2,
            vec!["1", "ξ", "λ", "ξλ"],
            vec![
                xi_gen(),
                Generator {
                    symbol: "λ",
                    aliases: &["lambda", "l"],
                    p: 8,
                    q: -1,
                    value: (lambda, 0.0),
                    star: (8, -1),
                    conj: (0, 1),
                    exact_re: &[(4, 1), (0, 1), (0, 1), (1, 1)],
                    exact_im: &[(0, 1), (0, 1), (0, 1), (0, 1)],
                },
            ],
            half,
            FieldId::RealQuartic,
            vec![],
        ),
        FieldSpec::build(
            FieldId::RealQuartic,
            1,
            vec!["1", "√3", "√5", "√15"],
            vec![
                Generator {
                    symbol: "√3",
                    aliases: &["sqrt3", "s3"],
                    p: 0,
                    q: 3,
                    value: (sqrt3, 0.0),
                    // Only used as a coefficient field; no star map is needed.
                    star: (0, 1),
                    conj: (0, 1),
                    exact_re: &[(0, 1), (1, 1), (0, 1), (0, 1)],
                    exact_im: &[(0, 1), (0, 1), (0, 1), (0, 1)],
                },
                Generator {
                    symbol: "√5",
                    aliases: &["sqrt5", "s5"],
                    p: 0,
                    q: 5,
                    value: (sqrt5, 0.0),
                    star: (0, 1),
                    conj: (0, 1),
                    exact_re: &[(0, 1), (0, 1), (1, 1), (0, 1)],
                    exact_im: &[(0, 1), (0, 1), (0, 1), (0, 1)],
                },
            ],
            BigRational::one(),
            FieldId::RealQuartic,
            vec![("√15", 3), ("sqrt15", 3), ("s15", 3)],
        ),
    ]
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_order_matches_ids() {
        for id in FieldId::ALL {
            assert_eq!(id.spec().id, id);
            assert_eq!(id.name().parse::<FieldId>().unwrap(), id);
        }
    }

    #[test]
    fn mul_table_is_commutative_and_associative() {
        for id in FieldId::ALL {
            let s = id.spec();
            let d = s.degree;
            let dense = |i: usize, j: usize| {
                let mut v = vec![BigRational::zero(); d];
                for (k, c) in &s.mul_table[i][j] {
                    v[*k] += c;
                }
                v
            };
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(dense(i, j), dense(j, i), "{id}: e{i} e{j}");
                    for k in 0..d {
                        // (e_i e_j) e_k vs e_i (e_j e_k)
                        let mut left = vec![BigRational::zero(); d];
                        for (m, c) in dense(i, j).into_iter().enumerate() {
                            for (o, v) in dense(m, k).into_iter().enumerate() {
                                left[o] += &c * v;
                            }
                        }
                        let mut right = vec![BigRational::zero(); d];
                        for (m, c) in dense(j, k).into_iter().enumerate() {
                            for (o, v) in dense(i, m).into_iter().enumerate() {
                                right[o] += &c * v;
                            }
                        }
                        assert_eq!(left, right, "{id}: associativity {i},{j},{k}");
                    }
                }
            }
        }
    }

    #[test]
    fn cap_star_matrix_matches_closed_formula() {
        // (a + bτ + cξ + dτξ)★ = a+b+c+d − (b+d)τ − (c+d)ξ + dτξ
        let s = FieldId::Cap.spec();
        let expect = [[1, 1, 1, 1], [0, -1, 0, -1], [0, 0, -1, -1], [0, 0, 0, 1]];
        for (r, row) in expect.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert_eq!(s.star_matrix[r][c], rational(v, 1));
            }
        }
    }
}

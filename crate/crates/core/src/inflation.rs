//! Control-point patches from the inflation fixed-point equations, and
//! Perron–Frobenius data of substitution matrices.

use std::collections::HashSet;

use crate::algebra::AlgebraicElement;
use crate::error::{Error, Result};
use crate::linalg::{is_primitive, power_iteration};
use crate::models::ModelSpec;

/// Points tagged with their tile type.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypedPointSet {
    pub points: Vec<(usize, AlgebraicElement)>,
}

impl TypedPointSet {
    /// A single tile of `tile_type` at the origin.
    pub fn seed(model: &ModelSpec, tile_type: usize) -> Self {
        Self { points: vec![(tile_type, AlgebraicElement::zero(model.field))] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keep points with |x| ≤ r in physical space.
    pub fn truncate(&self, r: f64) -> Self {
        let points = self
            .points
            .iter()
            .filter(|(_, x)| x.embed_phys::<f64>().iter().map(|v| v * v).sum::<f64>().sqrt() <= r)
            .cloned()
            .collect();
        Self { points }
    }

    /// Points translated by `t`.
    pub fn translate(&self, t: &AlgebraicElement) -> Self {
        Self { points: self.points.iter().map(|(i, x)| (*i, x.clone() + t)).collect() }
    }

    /// Sort by the first physical coordinate (then the second, then type).
    pub fn sort_by_position(&mut self) {
        let key = |x: &AlgebraicElement| x.embed_phys::<f64>();
        self.points.sort_by(|(ia, a), (ib, b)| {
            key(a)
                .partial_cmp(&key(b))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ia.cmp(ib))
        });
    }

    /// Counts per type.
    pub fn type_counts(&self, n_types: usize) -> Vec<usize> {
        let mut c = vec![0; n_types];
        for (i, _) in &self.points {
            c[*i] += 1;
        }
        c
    }
}

/// Apply Λ_i ↦ ⋃_j ⋃_{t∈T_ij} Q(Λ_j) + t, `steps` times.
pub fn inflate(seed: &TypedPointSet, model: &ModelSpec, steps: usize) -> Result<TypedPointSet> {
    let d = model.displacement()?;
    let mut current = seed.clone();
    for _ in 0..steps {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for (j, x) in &current.points {
            let qx = model.expansion.apply(x);
            for i in 0..d.n {
                for t in &d.entries[i][*j] {
                    let p = (i, qx.clone() + t);
                    if seen.insert(p.clone()) {
                        next.push(p);
                    }
                }
            }
        }
        current = TypedPointSet { points: next };
    }
    Ok(current)
}

pub fn substitution_matrix(model: &ModelSpec) -> Result<Vec<Vec<u64>>> {
    Ok(model.displacement()?.substitution_matrix())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PfData {
    pub eigenvalue: f64,
    /// Left eigenvector, scaled so its smallest entry is 1.
    pub left: Vec<f64>,
    /// Right eigenvector, normalized to unit sum (type frequencies).
    pub right: Vec<f64>,
}

pub fn pf_data(m: &[Vec<u64>]) -> Result<PfData> {
    if !is_primitive(m) {
        return Err(Error::NotPrimitive);
    }
    let mf: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let mt: Vec<Vec<f64>> = (0..mf.len()).map(|j| mf.iter().map(|r| r[j]).collect()).collect();
    let (eigenvalue, right) = power_iteration(&mf, 1e-16, 100_000);
    let (_, mut left) = power_iteration(&mt, 1e-16, 100_000);
    let min = left.iter().cloned().fold(f64::INFINITY, f64::min);
    for v in &mut left {
        *v /= min;
    }
    Ok(PfData { eigenvalue, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FieldId;
    use crate::models::builtin;

    fn s(x: &str) -> AlgebraicElement {
        AlgebraicElement::parse(FieldId::Silver, x).unwrap()
    }

    #[test]
    fn silver_one_step() {
        let m = builtin("silver").unwrap();
        let p = inflate(&TypedPointSet::seed(&m, 0), &m, 1).unwrap();
        assert_eq!(p.points, vec![(0, s("0")), (1, s("√2")), (1, s("1+√2"))]);
    }

    #[test]
    fn zero_steps_is_identity() {
        let m = builtin("cap").unwrap();
        let seed = TypedPointSet::seed(&m, 3);
        assert_eq!(inflate(&seed, &m, 0).unwrap(), seed);
    }

    #[test]
    fn silver_two_steps_spell_the_word() {
        let m = builtin("silver").unwrap();
        let mut p = inflate(&TypedPointSet::seed(&m, 0), &m, 2).unwrap();
        assert_eq!(p.len(), 7);
        p.sort_by_position();
        let word: String = p.points.iter().map(|(i, _)| if *i == 0 { 'a' } else { 'b' }).collect();
        assert_eq!(word, "abbabab");
        let pos: Vec<AlgebraicElement> = p.points.iter().map(|(_, x)| x.clone()).collect();
        let expect = ["0", "√2", "1+√2", "2+√2", "2+2√2", "3+2√2", "3+3√2"].map(s);
        assert_eq!(pos, expect);
    }

    #[test]
    fn scaffold_refuses_inflation() {
        let m = builtin("casper_scaffold").unwrap();
        assert!(matches!(
            inflate(&TypedPointSet::seed(&m, 0), &m, 1),
            Err(Error::MissingDisplacement(_))
        ));
    }

    #[test]
    fn pf_examples() {
        let lam = 1.0 + 2f64.sqrt();
        let p = pf_data(&[vec![1, 1], vec![2, 1]]).unwrap();
        assert!((p.eigenvalue - lam).abs() < 1e-12);
        assert!((p.right[0] - (lam - 2.0)).abs() < 1e-12 && (p.right[1] - (3.0 - lam)).abs() < 1e-12);
        assert!((p.left[0] - 2f64.sqrt()).abs() < 1e-12 && (p.left[1] - 1.0).abs() < 1e-12);
        let one = pf_data(&[vec![1]]).unwrap();
        assert_eq!((one.eigenvalue, one.left.clone(), one.right.clone()), (1.0, vec![1.0], vec![1.0]));
        assert!(matches!(pf_data(&[vec![0, 1], vec![1, 0]]), Err(Error::NotPrimitive)));
        let m = builtin("cap").unwrap();
        let cap = pf_data(&substitution_matrix(&m).unwrap()).unwrap();
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((cap.eigenvalue - tau.powi(4)).abs() < 1e-10);
    }
}

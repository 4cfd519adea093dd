//! Lattices of the cut-and-project schemes, their duals, and enumeration of
//! Fourier-module points.

use num_rational::BigRational;

use crate::algebra::{AlgebraicElement, FieldId};
use crate::error::{Error, Result};
use crate::linalg::{det_exact, inverse_exact, transpose};
use crate::models::{DeformationMap, ModelSpec};
use crate::scalar::Real;

/// Lattice basis B (columns = Minkowski lifts (x, x★) of the module
/// generators) with its exact dual B* = (B⁻¹)ᵀ.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    /// Physical (= internal) dimension d; the lattice has rank 2d.
    pub d: usize,
    pub columns: Vec<Vec<AlgebraicElement>>,
    pub det: AlgebraicElement,
    pub dual_columns: Vec<Vec<AlgebraicElement>>,
    columns_f64: Vec<Vec<f64>>,
    dual_f64: Vec<Vec<f64>>,
}

impl LatticeBasis {
    pub fn from_model(model: &ModelSpec) -> Result<Self> {
        let cols = model
            .lattice_generators
            .iter()
            .map(|g| {
                let mut c = g.embed_phys_exact();
                c.extend(g.embed_int_exact());
                c
            })
            .collect();
        Self::from_columns(model.dim(), cols)
    }

    pub fn from_columns(d: usize, columns: Vec<Vec<AlgebraicElement>>) -> Result<Self> {
        let n = columns.len();
        if n != 2 * d {
            return Err(Error::Dimension { expected: 2 * d, found: n });
        }
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::Dimension { expected: n, found: c.len() });
        }
        // Row-major B from the columns.
        let b = transpose(&columns);
        let det = det_exact(&b)?;
        let inv = inverse_exact(&b)?;
        // Columns of (B⁻¹)ᵀ are the rows of B⁻¹.
        let dual_columns = inv;
        let f = |m: &Vec<Vec<AlgebraicElement>>| -> Vec<Vec<f64>> {
            m.iter().map(|c| c.iter().map(AlgebraicElement::to_f64).collect()).collect()
        };
        Ok(Self { d, columns_f64: f(&columns), dual_f64: f(&dual_columns), columns, det, dual_columns })
    }

    pub fn rank(&self) -> usize {
        2 * self.d
    }

    /// dens(𝓛) = 1/|det B|.
    pub fn density(&self) -> AlgebraicElement {
        let inv = self.det.inverse().expect("nonsingular basis");
        if inv.to_f64() < 0.0 {
            -inv
        } else {
            inv
        }
    }

    /// Physical projections of the dual columns (d rows × 2d columns).
    pub fn dual_phys_generators(&self) -> Vec<Vec<f64>> {
        (0..self.d).map(|r| self.dual_f64.iter().map(|c| c[r]).collect()).collect()
    }

    pub fn dual_f64(&self) -> &[Vec<f64>] {
        &self.dual_f64
    }

    /// Dual-lattice vector B*·c split into (k, k★).
    pub fn dual_point<T: Real>(&self, coords: &[i64]) -> ModulePoint<T> {
        let n = self.rank();
        let mut v = vec![0.0f64; n];
        for (c, col) in coords.iter().zip(&self.dual_f64) {
            for (vi, x) in v.iter_mut().zip(col) {
                *vi += *c as f64 * x;
            }
        }
        ModulePoint {
            coords: coords.to_vec(),
            k_phys: v[..self.d].iter().map(|&x| T::from_f64_lossy(x)).collect(),
            k_int: v[self.d..].iter().map(|&x| T::from_f64_lossy(x)).collect(),
        }
    }

    /// Exact ⟨dual_i, col_j⟩ matrix (the identity).
    pub fn pairing(&self) -> Vec<Vec<AlgebraicElement>> {
        self.dual_columns
            .iter()
            .map(|y| {
                self.columns
                    .iter()
                    .map(|x| {
                        y.iter()
                            .zip(x)
                            .fold(AlgebraicElement::zero(y[0].field()), |acc, (a, b)| acc + a.clone() * b)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Dual generators y_j = Σ_k (G⁻¹)_{jk} u_k of the trace form
/// ⟨x, y⟩ = scale·Tr(x·ȳ); their Minkowski lifts are the dual basis columns.
pub fn trace_form_dual(generators: &[AlgebraicElement]) -> Result<Vec<AlgebraicElement>> {
    let gram: Vec<Vec<BigRational>> = generators
        .iter()
        .map(|a| generators.iter().map(|b| a.inner(b)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let ginv = inverse_exact(&gram)?;
    let field: FieldId = generators[0].field();
    Ok(ginv
        .iter()
        .map(|row| {
            row.iter()
                .zip(generators)
                .fold(AlgebraicElement::zero(field), |acc, (c, u)| acc + u.scale(c))
        })
        .collect())
}

/// A Fourier-module point: integer coordinates in the dual basis with its
/// physical projection k and internal projection k★.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulePoint<T> {
    pub coords: Vec<i64>,
    pub k_phys: Vec<T>,
    pub k_int: Vec<T>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// All dual-lattice points with |k − center| ≤ radius and |k★| ≤ internal_cutoff,
/// in lexicographic coordinate order. The physical projection is dense, so the
/// internal cutoff is mandatory.
pub fn enumerate_module<T: Real>(
    lattice: &LatticeBasis,
    center: &[f64],
    radius: f64,
    internal_cutoff: Option<f64>,
) -> Result<Vec<ModulePoint<T>>> {
    let cutoff = internal_cutoff.ok_or(Error::MissingCutoff)?;
    let d = lattice.d;
    if center.len() != d {
        return Err(Error::Dimension { expected: d, found: center.len() });
    }
    if !(radius >= 0.0) || !(cutoff >= 0.0) {
        return Err(Error::InvalidArgument("radius and cutoff must be nonnegative".into()));
    }
    // c_j = ⟨b_j, x⟩ since (B*)⁻¹ = Bᵀ; bound each coordinate by Cauchy–Schwarz.
    let eps = 1e-9;
    let ranges: Vec<(i64, i64)> = lattice
        .columns_f64
        .iter()
        .map(|b| {
            let (bp, bi) = (&b[..d], &b[d..]);
            let mid: f64 = bp.iter().zip(center).map(|(a, c)| a * c).sum();
            let half = norm(bp) * radius + norm(bi) * cutoff + eps;
            ((mid - half).floor() as i64, (mid + half).ceil() as i64)
        })
        .collect();
    let mut out = Vec::new();
    let mut c: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let p = lattice.dual_point::<f64>(&c);
        let dp: Vec<f64> = p.k_phys.iter().zip(center).map(|(a, b)| a - b).collect();
        if norm(&dp) <= radius + eps && norm(&p.k_int) <= cutoff + eps {
            out.push(lattice.dual_point::<T>(&c));
        }
        // Odometer increment, last coordinate fastest (lexicographic order).
        let mut idx = c.len();
        loop {
            if idx == 0 {
                return Ok(out);
            }
            idx -= 1;
            if c[idx] < ranges[idx].1 {
                c[idx] += 1;
                break;
            }
            c[idx] = ranges[idx].0;
        }
    }
}

/// k★ − Dᵀk, or k★ when no deformation is given.
pub fn internal_argument<T: Real>(k: &ModulePoint<T>, deformation: Option<&DeformationMap>) -> Vec<T> {
    match deformation {
        None => k.k_int.clone(),
        Some(def) => deformed_argument(&k.k_phys, &k.k_int, &def.matrix_f64()),
    }
}

/// k_int − Dᵀ k_phys for an explicit matrix.
pub fn deformed_argument<T: Real>(k_phys: &[T], k_int: &[T], d: &[Vec<f64>]) -> Vec<T> {
    (0..k_int.len())
        .map(|j| {
            let dt: T = (0..k_phys.len()).map(|i| T::from_f64_lossy(d[i][j]) * k_phys[i]).sum();
            k_int[j] - dt
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin;

    fn s(x: &str) -> AlgebraicElement {
        AlgebraicElement::parse(FieldId::Silver, x).unwrap()
    }

    #[test]
    fn silver_dual_by_hand() {
        let l = LatticeBasis::from_model(&builtin("silver").unwrap()).unwrap();
        assert_eq!(l.dual_columns[0], vec![s("1/2"), s("1/2")]);
        assert_eq!(l.dual_columns[1], vec![s("(1/4)√2"), s("-(1/4)√2")]);
        assert_eq!(l.density(), s("(1/4)√2"));
    }

    #[test]
    fn identity_basis_is_self_dual() {
        let one = AlgebraicElement::one(FieldId::Silver);
        let zero = AlgebraicElement::zero(FieldId::Silver);
        let cols = vec![vec![one.clone(), zero.clone()], vec![zero, one]];
        let l = LatticeBasis::from_columns(1, cols.clone()).unwrap();
        assert_eq!(l.dual_columns, cols);
    }

    #[test]
    fn pairing_is_kronecker_exactly() {
        for name in ["silver", "cap", "casper_scaffold"] {
            let l = LatticeBasis::from_model(&builtin(name).unwrap()).unwrap();
            let p = l.pairing();
            for (i, row) in p.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let expect = if i == j { AlgebraicElement::one(v.field()) } else { AlgebraicElement::zero(v.field()) };
                    assert_eq!(v, &expect, "{name} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn trace_form_dual_matches_lifted_dual() {
        for name in ["silver", "cap", "casper_scaffold"] {
            let m = builtin(name).unwrap();
            let l = LatticeBasis::from_model(&m).unwrap();
            let y = trace_form_dual(&m.lattice_generators).unwrap();
            for (yj, col) in y.iter().zip(&l.dual_columns) {
                let mut lift = yj.embed_phys_exact();
                lift.extend(yj.embed_int_exact());
                assert_eq!(&lift, col, "{name}");
            }
        }
    }

    #[test]
    fn silver_enumeration_contains_known_points() {
        let l = LatticeBasis::from_model(&builtin("silver").unwrap()).unwrap();
        let pts = enumerate_module::<f64>(&l, &[0.0], 1.0, Some(20.0)).unwrap();
        let has = |k: f64| pts.iter().any(|p| (p.k_phys[0] - k).abs() < 1e-12);
        assert!(has(2f64.sqrt() / 4.0) && has(0.5) && has(0.0));
        // Brute force over |m|,|n| ≤ 60.
        let mut brute = 0;
        for m in -60..=60 {
            for n in -60..=60 {
                let p = l.dual_point::<f64>(&[m, n]);
                if p.k_phys[0].abs() <= 1.0 && p.k_int[0].abs() <= 20.0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(pts.len(), brute);
        let mut sorted = pts.iter().map(|p| p.coords.clone()).collect::<Vec<_>>();
        sorted.sort();
        assert_eq!(sorted, pts.iter().map(|p| p.coords.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn radius_zero_gives_origin_and_cutoff_is_required() {
        let l = LatticeBasis::from_model(&builtin("cap").unwrap()).unwrap();
        let pts = enumerate_module::<f64>(&l, &[0.0, 0.0], 0.0, Some(3.0)).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].coords, vec![0, 0, 0, 0]);
        assert!(matches!(enumerate_module::<f64>(&l, &[0.0, 0.0], 1.0, None), Err(Error::MissingCutoff)));
    }

    #[test]
    fn internal_argument_with_and_without_deformation() {
        let m = builtin("silver").unwrap();
        let l = LatticeBasis::from_model(&m).unwrap();
        let k = l.dual_point::<f64>(&[0, 1]);
        assert_eq!(internal_argument(&k, None), k.k_int);
        let d = m.deformation("equal-lengths").unwrap();
        let lam = 1.0 + 2f64.sqrt();
        let arg = internal_argument(&k, Some(d));
        assert!((arg[0] - (k.k_int[0] - k.k_phys[0] / (lam * lam))).abs() < 1e-15);
        let zero = deformed_argument(&k.k_phys, &k.k_int, &[vec![0.0]]);
        assert_eq!(zero, k.k_int);
    }
}

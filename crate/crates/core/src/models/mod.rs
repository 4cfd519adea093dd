//! Tiling models: fields, return modules, inflation maps, displacement data
//! and deformation catalogs.

mod builtin;
mod displacement;
mod symmetry;

pub use builtin::{builtin, builtin_names};
pub use displacement::DisplacementMatrix;
pub use symmetry::{validate_symmetry, SymmetryReport, SymmetryViolation};

use crate::algebra::{AlgebraicElement, FieldId};
use crate::error::{Error, Result};
use crate::linalg::{det_exact, mat_mul_exact};
use crate::scalar::Real;

/// The inflation map x ↦ μ·σ(x) in physical coordinates, σ ∈ {id, conj}.
#[derive(Clone, Debug, PartialEq)]
pub struct SemilinearMap {
    pub factor: AlgebraicElement,
    pub conjugate: bool,
}

impl SemilinearMap {
    pub fn apply(&self, x: &AlgebraicElement) -> AlgebraicElement {
        if self.conjugate {
            self.factor.clone() * x.conj()
        } else {
            self.factor.clone() * x
        }
    }

    /// The induced map on internal coordinates: μ★·σ.
    pub fn star(&self) -> SemilinearMap {
        SemilinearMap { factor: self.factor.star(), conjugate: self.conjugate }
    }

    /// Exact real matrix acting on physical embeddings.
    pub fn phys_matrix_exact(&self) -> Vec<Vec<AlgebraicElement>> {
        let v = self.factor.embed_phys_exact();
        if v.len() == 1 {
            return vec![v];
        }
        let (a, b) = (v[0].clone(), v[1].clone());
        if self.conjugate {
            vec![vec![a.clone(), b.clone()], vec![b, -a]]
        } else {
            vec![vec![a.clone(), -b.clone()], vec![b, a]]
        }
    }

    /// Exact real matrix acting on internal embeddings.
    pub fn int_matrix_exact(&self) -> Vec<Vec<AlgebraicElement>> {
        self.star().phys_matrix_exact()
    }

    pub fn phys_matrix<T: Real>(&self) -> Vec<Vec<T>> {
        to_real_matrix(&self.phys_matrix_exact())
    }

    pub fn int_matrix<T: Real>(&self) -> Vec<Vec<T>> {
        to_real_matrix(&self.int_matrix_exact())
    }
}

pub fn to_real_matrix<T: Real>(m: &[Vec<AlgebraicElement>]) -> Vec<Vec<T>> {
    m.iter()
        .map(|r| r.iter().map(|e| T::from_f64_lossy(e.to_f64())).collect())
        .collect()
}

/// Named linear deformation D: internal space → physical space.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationMap {
    pub name: String,
    /// Exact real matrix (entries in the model's real field).
    pub matrix: Vec<Vec<AlgebraicElement>>,
    /// g with the diffraction periods g·Z[ξ] (or g·Z in 1d), physical embedding.
    pub period_generator: Option<AlgebraicElement>,
    /// g with the internal arguments k★ − Dᵀk contained in g·Z[ξ].
    pub argument_lattice: Option<AlgebraicElement>,
}

impl DeformationMap {
    pub fn matrix_f64(&self) -> Vec<Vec<f64>> {
        to_real_matrix(&self.matrix)
    }
}

/// Built-in evaluation defaults per model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDefaults {
    pub iterations: usize,
    pub internal_cutoff: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub threshold: f64,
}

/// One tiling system.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub field: FieldId,
    pub tile_labels: Vec<String>,
    /// Generators of the return module; their Minkowski lifts span the lattice.
    pub generators: Vec<AlgebraicElement>,
    /// Module basis whose lifts are the lattice basis columns (same Z-span as
    /// `generators`).
    pub lattice_generators: Vec<AlgebraicElement>,
    pub expansion: SemilinearMap,
    pub pf_eigenvalue: AlgebraicElement,
    pub displacement: Option<DisplacementMatrix>,
    /// Control-point density, exact in the real field.
    pub density: AlgebraicElement,
    /// Total window volume where it is known in closed form.
    pub window_volume: Option<AlgebraicElement>,
    pub fourier_module_prefactor: String,
    pub deformations: Vec<DeformationMap>,
    /// Number of orientations per shape (6 for the rotation-block CAP data).
    pub orientations: usize,
    /// Per-shape weights that extinguish the central peak.
    pub zero_central_weights: Option<Vec<AlgebraicElement>>,
    pub defaults: ModelDefaults,
}

impl ModelSpec {
    pub fn n_types(&self) -> usize {
        self.displacement.as_ref().map_or(self.tile_labels.len(), |d| d.n)
    }

    /// Physical (and internal) dimension d.
    pub fn dim(&self) -> usize {
        self.field.spec().real_dim
    }

    pub fn has_data(&self) -> bool {
        self.displacement.is_some()
    }

    pub fn displacement(&self) -> Result<&DisplacementMatrix> {
        self.displacement.as_ref().ok_or_else(|| Error::MissingDisplacement(self.name.clone()))
    }

    pub fn int_contraction(&self) -> SemilinearMap {
        self.expansion.star()
    }

    pub fn deformation(&self, name: &str) -> Result<&DeformationMap> {
        self.deformations.iter().find(|d| d.name == name).ok_or_else(|| Error::UnknownDeformation {
            model: self.name.clone(),
            name: name.to_string(),
        })
    }

    pub fn density_f64(&self) -> f64 {
        self.density.to_f64()
    }

    pub fn pf_f64(&self) -> f64 {
        self.pf_eigenvalue.to_f64()
    }

    /// Attach externally supplied displacement data (validated).
    pub fn with_displacement(mut self, data: DisplacementMatrix) -> Result<Self> {
        data.validate(&self)?;
        if self.tile_labels.len() != data.n {
            self.tile_labels = (0..data.n).map(|i| format!("T{i}")).collect();
        }
        self.displacement = Some(data);
        Ok(self)
    }

    /// |det| of the physical expansion, exactly; equals λ_PF for every model.
    pub fn expansion_det(&self) -> AlgebraicElement {
        let m = self.expansion.phys_matrix_exact();
        let d = det_exact(&m).expect("square matrix");
        if d.to_f64() < 0.0 {
            -d
        } else {
            d
        }
    }

    /// Square of the physical expansion matrix (λ_PF·𝟙 for the reflecting inflation).
    pub fn expansion_squared(&self) -> Vec<Vec<AlgebraicElement>> {
        let m = self.expansion.phys_matrix_exact();
        mat_mul_exact(&m, &m)
    }

    /// Return-module coordinates of `t` w.r.t. the generators, if integral.
    pub fn module_coords(&self, t: &AlgebraicElement) -> Result<Option<Vec<num_bigint::BigInt>>> {
        if t.field() != self.field {
            return Err(Error::FieldMismatch { left: self.field, right: t.field() });
        }
        let d = self.field.spec().degree;
        let g: Vec<Vec<num_rational::BigRational>> = (0..d)
            .map(|r| self.generators.iter().map(|gen| gen.coords()[r].clone()).collect())
            .collect();
        let rhs: Vec<Vec<num_rational::BigRational>> = t.coords().iter().map(|c| vec![c.clone()]).collect();
        let sol = crate::linalg::solve_exact(&g, &rhs)?;
        if sol.iter().all(|r| r[0].is_integer()) {
            Ok(Some(sol.into_iter().map(|r| r[0].to_integer()).collect()))
        } else {
            Ok(None)
        }
    }
}

use std::collections::HashSet;

use super::ModelSpec;
use crate::algebra::{AlgebraicElement, FieldId};
use crate::cocycle::FourierEvaluator;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryViolation {
    pub row: usize,
    pub col: usize,
    /// 4×4 block position (shape indices) of the offending entry.
    pub block: (usize, usize),
}

#[derive(Clone, Debug, Default)]
pub struct SymmetryReport {
    /// False when the model has no rotation-block structure.
    pub applicable: bool,
    pub violations: Vec<SymmetryViolation>,
    /// max over samples of ‖Sᵀ B(k) S − B(ξk)‖ (entrywise).
    pub fourier_residual: Option<f64>,
}

impl SymmetryReport {
    pub fn exact_pass(&self) -> bool {
        self.applicable && self.violations.is_empty()
    }
}

/// Rotate the orientation index inside each block: σ(6s + r) = 6s + (r+1 mod 6).
fn rotate(i: usize, orientations: usize) -> usize {
    let (s, r) = (i / orientations, i % orientations);
    s * orientations + (r + 1) % orientations
}

/// Check Sᵀ T S = ξ T exactly (S = 𝟙 ⊗ C, C the companion matrix of X⁶−1),
/// i.e. T_{σ(a),σ(b)} = ξ·T_{a,b} as sets, and the Fourier identity
/// Sᵀ B(k) S = B(ξk) numerically at the sample arguments.
pub fn validate_symmetry(model: &ModelSpec, samples: &[Vec<f64>]) -> Result<SymmetryReport> {
    let o = model.orientations;
    if o != 6 || model.field != FieldId::Cap {
        return Ok(SymmetryReport::default());
    }
    let d = model.displacement()?;
    let xi = AlgebraicElement::parse(FieldId::Cap, "ξ")?;
    let mut violations = Vec::new();
    for a in 0..d.n {
        for b in 0..d.n {
            let rotated: HashSet<AlgebraicElement> = d.entries[a][b].iter().map(|t| xi.clone() * t).collect();
            let target: HashSet<AlgebraicElement> =
                d.entries[rotate(a, o)][rotate(b, o)].iter().cloned().collect();
            if rotated != target {
                violations.push(SymmetryViolation {
                    row: rotate(a, o),
                    col: rotate(b, o),
                    block: (a / o, b / o),
                });
            }
        }
    }
    let fourier_residual = if samples.is_empty() {
        None
    } else {
        let ev = FourierEvaluator::<f64>::new(model)?;
        let (c, s) = (0.5f64, 3f64.sqrt() / 2.0);
        let mut worst = 0.0f64;
        for k in samples {
            let b = ev.fourier_matrix(k);
            let xk = vec![c * k[0] - s * k[1], s * k[0] + c * k[1]];
            let bx = ev.fourier_matrix(&xk);
            for i in 0..d.n {
                for j in 0..d.n {
                    let diff = (b[(rotate(i, o), rotate(j, o))] - bx[(i, j)]).norm();
                    worst = worst.max(diff);
                }
            }
        }
        Some(worst)
    };
    Ok(SymmetryReport { applicable: true, violations, fourier_residual })
}

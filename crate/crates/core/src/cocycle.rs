//! Internal Fourier matrix, its cocycle products, and the per-type window
//! Fourier transforms extracted from the rank-1 limit.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::inflation::pf_data;
use crate::linalg::CMatrix;
use crate::models::ModelSpec;
use crate::scalar::Real;

/// Precomputed data for evaluating B(k) = [Σ_{t∈T_ij} e^{2πi⟨t★, k⟩}]_ij.
#[derive(Clone, Debug)]
pub struct FourierEvaluator<T> {
    n: usize,
    d: usize,
    /// Sparse (i, j, t★) triples; t★ padded to two components.
    entries: Vec<(usize, usize, [T; 2])>,
    /// Aᵀ for the internal contraction A (row-major d×d).
    contraction_t: Vec<Vec<T>>,
    pf: T,
    left: Vec<T>,
    right: Vec<T>,
    density: T,
    /// Σ_j c_j(0) with c(0) = x/⟨u|x⟩.
    c0_sum: T,
    substitution: Vec<Vec<u64>>,
}

/// Per-type amplitudes H_i at one internal argument.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeVector<T> {
    pub h: Vec<Complex<T>>,
    pub n_iters: usize,
    /// σ₂/σ₁ of λ⁻ⁿB⁽ⁿ⁾; only computed on the diagnostics path.
    pub rank1_residual: Option<T>,
    /// ‖C_n − C_{n−1}‖ (entrywise max); only computed on the diagnostics path.
    pub step_difference: Option<T>,
}

impl<T: Real> AmplitudeVector<T> {
    /// Σ_i w_i H_i.
    pub fn weighted(&self, w: &[Complex<T>]) -> Complex<T> {
        self.h.iter().zip(w).fold(Complex::new(T::zero(), T::zero()), |acc, (h, w)| acc + *h * *w)
    }
}

impl<T: Real> FourierEvaluator<T> {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        let disp = model.displacement()?;
        let d = model.dim();
        let entries = disp
            .iter()
            .map(|(i, j, t)| {
                let v = t.embed_int::<T>();
                (i, j, [v[0], if d == 2 { v[1] } else { T::zero() }])
            })
            .collect();
        let a = model.int_contraction().phys_matrix::<T>();
        let contraction_t = (0..d).map(|r| (0..d).map(|c| a[c][r]).collect()).collect();
        let substitution = disp.substitution_matrix();
        let pfd = pf_data(&substitution)?;
        let left: Vec<T> = pfd.left.iter().map(|&v| T::from_f64_lossy(v)).collect();
        let right: Vec<T> = pfd.right.iter().map(|&v| T::from_f64_lossy(v)).collect();
        let ux: T = left.iter().zip(&right).map(|(a, b)| *a * *b).sum();
        if ux.abs() < T::epsilon() {
            return Err(Error::Degenerate("⟨u|x⟩ vanishes".into()));
        }
        let c0_sum = right.iter().copied().sum::<T>() / ux;
        Ok(Self {
            n: disp.n,
            d,
            entries,
            contraction_t,
            pf: T::from_f64_lossy(model.pf_f64()),
            left,
            right,
            density: T::from_f64_lossy(model.density_f64()),
            c0_sum,
            substitution,
        })
    }

    pub fn n_types(&self) -> usize {
        self.n
    }

    pub fn substitution_matrix(&self) -> &[Vec<u64>] {
        &self.substitution
    }

    pub fn right_pf(&self) -> &[T] {
        &self.right
    }

    pub fn left_pf(&self) -> &[T] {
        &self.left
    }

    fn phase(&self, t: &[T; 2], k: &[T]) -> Complex<T> {
        let mut dot = t[0] * k[0];
        if self.d == 2 {
            dot = dot + t[1] * k[1];
        }
        let arg = T::TAU() * dot;
        Complex::new(arg.cos(), arg.sin())
    }

    /// B(k).
    pub fn fourier_matrix(&self, k: &[T]) -> CMatrix<T> {
        let mut b = CMatrix::zeros(self.n, self.n);
        for (i, j, t) in &self.entries {
            b[(*i, *j)] = b[(*i, *j)] + self.phase(t, k);
        }
        b
    }

    /// k, Aᵀk, (Aᵀ)²k, … (n terms).
    pub fn progression(&self, k: &[T], n: usize) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(n);
        let mut cur = k.to_vec();
        for _ in 0..n {
            let next = self
                .contraction_t
                .iter()
                .map(|row| row.iter().zip(&cur).map(|(a, b)| *a * *b).sum())
                .collect();
            out.push(std::mem::replace(&mut cur, next));
        }
        out
    }

    /// Unnormalized B⁽ⁿ⁾(k) = B(k)·B(Aᵀk)⋯B((Aᵀ)ⁿ⁻¹k).
    pub fn cocycle(&self, k: &[T], n: usize) -> CMatrix<T> {
        let mut acc = CMatrix::identity(self.n);
        for km in self.progression(k, n) {
            acc = acc.matmul(&self.fourier_matrix(&km));
        }
        acc
    }

    /// C_n(k) = λ⁻ⁿ B⁽ⁿ⁾(k), rescaled by λ⁻¹ at every step.
    pub fn cocycle_limit(&self, k: &[T], n: usize) -> Result<CMatrix<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("cocycle needs n ≥ 1".into()));
        }
        let inv = T::one() / self.pf;
        let mut acc = CMatrix::identity(self.n);
        for km in self.progression(k, n) {
            acc = acc.matmul(&self.fourier_matrix(&km));
            acc.scale(inv);
        }
        Ok(acc)
    }

    /// C_n(k)·x evaluated right to left, without forming matrices.
    pub fn apply_limit(&self, k: &[T], n: usize, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let inv = T::one() / self.pf;
        let zero = Complex::new(T::zero(), T::zero());
        let mut v = x.to_vec();
        for km in self.progression(k, n).iter().rev() {
            let mut next = vec![zero; self.n];
            for (i, j, t) in &self.entries {
                next[*i] = next[*i] + self.phase(t, km) * v[*j];
            }
            for z in &mut next {
                *z = *z * inv;
            }
            v = next;
        }
        v
    }

    fn normalize(&self, cx: Vec<Complex<T>>) -> Vec<Complex<T>> {
        let ux: T = self.left.iter().zip(&self.right).map(|(a, b)| *a * *b).sum();
        let scale = self.density / (ux * self.c0_sum);
        cx.into_iter().map(|z| z * scale).collect()
    }

    fn right_complex(&self) -> Vec<Complex<T>> {
        self.right.iter().map(|&v| Complex::new(v, T::zero())).collect()
    }

    /// H(k) = density · c(k)/Σ_j c_j(0), with c = C_n x/⟨u|x⟩.
    pub fn amplitudes(&self, k: &[T], n: usize) -> Result<AmplitudeVector<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("cocycle needs n ≥ 1".into()));
        }
        let cx = self.apply_limit(k, n, &self.right_complex());
        Ok(AmplitudeVector { h: self.normalize(cx), n_iters: n, rank1_residual: None, step_difference: None })
    }

    /// As [`amplitudes`](Self::amplitudes), forming C_n to report σ₂/σ₁ and
    /// the last step difference.
    pub fn amplitudes_with_diagnostics(&self, k: &[T], n: usize) -> Result<AmplitudeVector<T>> {
        let prev = if n > 1 { Some(self.cocycle_limit(k, n - 1)?) } else { None };
        let c = self.cocycle_limit(k, n)?;
        let sv = c.singular_values();
        let rank1 = if sv.len() > 1 && sv[0] > T::zero() { sv[1] / sv[0] } else { T::zero() };
        let cx = c.matvec(&self.right_complex());
        Ok(AmplitudeVector {
            h: self.normalize(cx),
            n_iters: n,
            rank1_residual: Some(rank1),
            step_difference: prev.map(|p| p.max_abs_diff(&c)),
        })
    }

    /// σ₂/σ₁ of C_n(k).
    pub fn rank1_residual(&self, k: &[T], n: usize) -> Result<T> {
        let sv = self.cocycle_limit(k, n)?.singular_values();
        Ok(if sv.len() > 1 && sv[0] > T::zero() { sv[1] / sv[0] } else { T::zero() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin;

    #[test]
    fn b_zero_is_substitution_matrix() {
        for name in ["silver", "silver_twisted", "cap"] {
            let m = builtin(name).unwrap();
            let ev = FourierEvaluator::<f64>::new(&m).unwrap();
            let b = ev.fourier_matrix(&vec![0.0; m.dim()]);
            let s = ev.substitution_matrix();
            for i in 0..ev.n_types() {
                for j in 0..ev.n_types() {
                    assert!((b[(i, j)].re - s[i][j] as f64).abs() < 1e-12 && b[(i, j)].im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn twisted_matrix_closed_form() {
        let m = builtin("silver_twisted").unwrap();
        let ev = FourierEvaluator::<f64>::new(&m).unwrap();
        let e = |x: f64| Complex::new(0.0, 2.0 * std::f64::consts::PI * x).exp();
        for &k in &[0.13, -0.7, 2.4] {
            let b = ev.fourier_matrix(&[k]);
            let expect = [
                [e(2.0 * k), Complex::new(1.0, 0.0)],
                [Complex::new(1.0, 0.0) + e(k), e(-2f64.sqrt() * k)],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((b[(i, j)] - expect[i][j]).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn limit_at_zero_is_pf_projector() {
        let m = builtin("cap").unwrap();
        let ev = FourierEvaluator::<f64>::new(&m).unwrap();
        let c = ev.cocycle_limit(&[0.0, 0.0], 40).unwrap();
        let c2 = c.matmul(&c);
        assert!(c.max_abs_diff(&c2) < 1e-10);
    }

    #[test]
    fn scaffold_refuses_evaluation() {
        let m = builtin("casper_scaffold").unwrap();
        assert!(matches!(FourierEvaluator::<f64>::new(&m), Err(Error::MissingDisplacement(_))));
    }

    #[test]
    fn fast_path_matches_matrix_path() {
        let m = builtin("cap").unwrap();
        let ev = FourierEvaluator::<f64>::new(&m).unwrap();
        let k = [0.31, -0.57];
        let a = ev.amplitudes(&k, 15).unwrap();
        let b = ev.amplitudes_with_diagnostics(&k, 15).unwrap();
        for (x, y) in a.h.iter().zip(&b.h) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!(b.rank1_residual.is_some() && b.step_difference.is_some());
    }

    #[test]
    fn f32_evaluator_tracks_f64() {
        let m = builtin("silver").unwrap();
        let e32 = FourierEvaluator::<f32>::new(&m).unwrap();
        let e64 = FourierEvaluator::<f64>::new(&m).unwrap();
        let a = e32.amplitudes(&[0.4f32], 20).unwrap();
        let b = e64.amplitudes(&[0.4f64], 20).unwrap();
        for (x, y) in a.h.iter().zip(&b.h) {
            assert!((x.re as f64 - y.re).abs() < 1e-5 && (x.im as f64 - y.im).abs() < 1e-5);
        }
    }
}

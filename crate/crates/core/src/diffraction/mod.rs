//! Weighted Fourier–Bohr amplitudes, Bragg-peak lists, deformations and the
//! independent oracles used to check them.

mod export;

pub use export::{peaks_csv, peaks_json, peaks_svg, write_peaks, PeakRecord, SvgOptions};

use std::cmp::Ordering;

use num_complex::Complex;
use rayon::prelude::*;

use crate::algebra::{AlgebraicElement, FieldId};
use crate::cocycle::{AmplitudeVector, FourierEvaluator};
use crate::cps::{enumerate_module, internal_argument, LatticeBasis, ModulePoint};
use crate::error::{Error, Result};
use crate::inflation::TypedPointSet;
use crate::models::{DeformationMap, ModelSpec};
use crate::scalar::Real;

/// Complex weight α_i per tile type.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    pub values: Vec<Complex<T>>,
}

impl<T: Real> WeightVector<T> {
    pub fn equal(model: &ModelSpec) -> Self {
        Self { values: vec![Complex::new(T::one(), T::zero()); model.n_types()] }
    }

    /// The preset that extinguishes the central peak.
    pub fn zero_central(model: &ModelSpec) -> Result<Self> {
        let w = model.zero_central_weights.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("model {} has no zero-central preset", model.name))
        })?;
        Self::from_values(model, w.iter().map(embed_weight).collect())
    }

    /// Full per-type vector, or one value per shape replicated over the
    /// orientations.
    pub fn from_values(model: &ModelSpec, values: Vec<Complex<T>>) -> Result<Self> {
        let n = model.n_types();
        let o = model.orientations.max(1);
        if values.len() == n {
            Ok(Self { values })
        } else if o > 1 && values.len() * o == n {
            Ok(Self { values: values.iter().flat_map(|v| std::iter::repeat(*v).take(o)).collect() })
        } else {
            Err(Error::Dimension { expected: n, found: values.len() })
        }
    }

    /// `equal`, `zero-central`, or a comma-separated list of exact field
    /// elements (complex values through the physical embedding, e.g. `ξ`).
    pub fn parse(model: &ModelSpec, s: &str) -> Result<Self> {
        match s.trim() {
            "equal" => Ok(Self::equal(model)),
            "zero-central" => Self::zero_central(model),
            list => {
                let vals = list
                    .split(',')
                    .map(|x| AlgebraicElement::parse(model.field, x.trim()).map(|e| embed_weight(&e)))
                    .collect::<Result<Vec<_>>>()?;
                Self::from_values(model, vals)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn embed_weight<T: Real>(e: &AlgebraicElement) -> Complex<T> {
    let v = e.embed_phys::<T>();
    Complex::new(v[0], if v.len() > 1 { v[1] } else { T::zero() })
}

/// One Bragg peak.
#[derive(Clone, Debug, PartialEq)]
pub struct Peak<T> {
    pub k: ModulePoint<T>,
    pub deformation: Option<String>,
    pub amplitude: Complex<T>,
    pub intensity: T,
    pub n_iters: usize,
}

/// Parameters of a peak sweep.
#[derive(Clone, Debug)]
pub struct PeakQuery<T> {
    pub center: Vec<f64>,
    pub radius: f64,
    pub internal_cutoff: f64,
    pub threshold: f64,
    pub weights: WeightVector<T>,
    pub deformation: Option<DeformationMap>,
    pub n_iters: usize,
}

impl<T: Real> PeakQuery<T> {
    /// The model's defaults with equal weights and no deformation.
    pub fn defaults(model: &ModelSpec) -> Self {
        let d = &model.defaults;
        Self {
            center: d.center.clone(),
            radius: d.radius,
            internal_cutoff: d.internal_cutoff,
            threshold: d.threshold,
            weights: WeightVector::equal(model),
            deformation: None,
            n_iters: d.iterations,
        }
    }
}

/// A model together with its lattice and (when data is present) the cocycle
/// evaluator.
#[derive(Clone, Debug)]
pub struct Diffraction<T> {
    pub model: ModelSpec,
    pub lattice: LatticeBasis,
    evaluator: Option<FourierEvaluator<T>>,
}

impl<T: Real> Diffraction<T> {
    pub fn new(model: ModelSpec) -> Result<Self> {
        let lattice = LatticeBasis::from_model(&model)?;
        let evaluator = if model.has_data() { Some(FourierEvaluator::new(&model)?) } else { None };
        Ok(Self { model, lattice, evaluator })
    }

    pub fn evaluator(&self) -> Result<&FourierEvaluator<T>> {
        self.evaluator.as_ref().ok_or_else(|| Error::MissingDisplacement(self.model.name.clone()))
    }

    pub fn module_point(&self, coords: &[i64]) -> ModulePoint<T> {
        self.lattice.dual_point(coords)
    }

    /// Per-type amplitudes H_i(k★ − Dᵀk).
    pub fn amplitudes(
        &self,
        k: &ModulePoint<T>,
        deformation: Option<&DeformationMap>,
        n: usize,
    ) -> Result<AmplitudeVector<T>> {
        let arg = internal_argument(k, deformation);
        self.evaluator()?.amplitudes(&arg, n)
    }

    /// Σ_i w_i H_i(k★ − Dᵀk).
    pub fn amplitude_at(
        &self,
        k: &ModulePoint<T>,
        w: &WeightVector<T>,
        deformation: Option<&DeformationMap>,
        n: usize,
    ) -> Result<Complex<T>> {
        if w.len() != self.model.n_types() {
            return Err(Error::Dimension { expected: self.model.n_types(), found: w.len() });
        }
        Ok(self.amplitudes(k, deformation, n)?.weighted(&w.values))
    }

    pub fn intensity_at(
        &self,
        k: &ModulePoint<T>,
        w: &WeightVector<T>,
        deformation: Option<&DeformationMap>,
        n: usize,
    ) -> Result<T> {
        Ok(self.amplitude_at(k, w, deformation, n)?.norm_sqr())
    }

    /// Peaks with intensity ≥ threshold in the query region, by descending
    /// intensity, then lexicographic coordinates.
    pub fn peak_list(&self, q: &PeakQuery<T>) -> Result<Vec<Peak<T>>> {
        if !(q.threshold > 0.0) {
            return Err(Error::InvalidArgument("threshold must be positive".into()));
        }
        let ev = self.evaluator()?;
        if q.weights.len() != ev.n_types() {
            return Err(Error::Dimension { expected: ev.n_types(), found: q.weights.len() });
        }
        let points = enumerate_module::<T>(&self.lattice, &q.center, q.radius, Some(q.internal_cutoff))?;
        let def = q.deformation.as_ref();
        let name = def.map(|d| d.name.clone());
        let thr = T::from_f64_lossy(q.threshold);
        let mut peaks = points
            .into_par_iter()
            .map(|k| {
                let arg = internal_argument(&k, def);
                let amp = ev.amplitudes(&arg, q.n_iters)?.weighted(&q.weights.values);
                Ok((k, amp))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter_map(|(k, amplitude)| {
                let intensity = amplitude.norm_sqr();
                (intensity >= thr).then(|| Peak {
                    k,
                    deformation: name.clone(),
                    amplitude,
                    intensity,
                    n_iters: q.n_iters,
                })
            })
            .collect::<Vec<_>>();
        peaks.sort_by(|a, b| {
            b.intensity.partial_cmp(&a.intensity).unwrap_or(Ordering::Equal).then_with(|| a.k.coords.cmp(&b.k.coords))
        });
        Ok(peaks)
    }

    /// Period generators of a deformed pattern as dual-lattice coordinates
    /// (g and ξg in 2d, g in 1d), when they lie in the Fourier module.
    pub fn period_coords(&self, deformation: &DeformationMap) -> Result<Vec<Vec<i64>>> {
        let g = deformation
            .period_generator
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("{} has no period lattice", deformation.name)))?;
        let mut gens = vec![g.clone()];
        if self.model.dim() == 2 {
            gens.push(g.clone() * AlgebraicElement::parse(self.model.field, "ξ")?);
        }
        gens.iter().map(|p| self.dual_coords(p)).collect()
    }

    /// Integer coordinates c with B*c = (p, p★); errors if p ∉ L^⊛.
    pub fn dual_coords(&self, p: &AlgebraicElement) -> Result<Vec<i64>> {
        let mut v = p.embed_phys_exact();
        v.extend(p.embed_int_exact());
        self.lattice
            .columns
            .iter()
            .map(|b| {
                let c = b.iter().zip(&v).fold(AlgebraicElement::zero(v[0].field()), |acc, (x, y)| acc + x.clone() * y);
                let r = &c.coords()[0];
                if c.coords()[1..].iter().all(num_traits::Zero::is_zero) && r.is_integer() {
                    num_traits::ToPrimitive::to_i64(&r.to_integer())
                        .ok_or_else(|| Error::InvalidArgument("coordinate overflow".into()))
                } else {
                    Err(Error::InvalidArgument(format!("{p} is not in the Fourier module")))
                }
            })
            .collect()
    }
}

/// Σ_i w_i H_i(k★ − Dᵀk) for a pre-built engine-less call.
pub fn amplitude_at<T: Real>(
    model: &ModelSpec,
    k: &ModulePoint<T>,
    w: &WeightVector<T>,
    deformation: Option<&DeformationMap>,
    n: usize,
) -> Result<Complex<T>> {
    let ev = FourierEvaluator::<T>::new(model)?;
    Ok(ev.amplitudes(&internal_argument(k, deformation), n)?.weighted(&w.values))
}

fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::from_f64_lossy(1e-8) {
        T::one() - x * x / T::from_f64_lossy(6.0)
    } else {
        x.sin() / x
    }
}

/// Closed-form (H_a, H_b) of the silver-mean windows.
pub fn analytic_silver<T: Real>(k_int: T) -> (Complex<T>, Complex<T>) {
    let pi = T::PI();
    let s2 = T::SQRT_2();
    let lam = T::one() + s2;
    let two = T::from_f64_lossy(2.0);
    let four = T::from_f64_lossy(4.0);
    let ha = Complex::from_polar(s2 / four, pi * k_int * (lam - two)) * sinc(pi * k_int);
    let hb = Complex::from_polar(T::one() / two, -two * pi * k_int) * sinc(pi * k_int * (lam - T::one()));
    (ha, hb)
}

/// (1/measure)·Σ w_type(x) e^{−2πi k·x} over a finite patch.
pub fn weyl_sum<T: Real>(
    patch: &TypedPointSet,
    k_phys: &[T],
    w: &WeightVector<T>,
    region_measure: T,
) -> Result<Complex<T>> {
    if patch.is_empty() {
        return Err(Error::Degenerate("empty patch".into()));
    }
    if !(region_measure > T::zero()) {
        return Err(Error::InvalidArgument("region measure must be positive".into()));
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    for (i, x) in &patch.points {
        let xv = x.embed_phys::<T>();
        let dot: T = xv.iter().zip(k_phys).map(|(a, b)| *a * *b).sum();
        let wi = *w.values.get(*i).ok_or(Error::Dimension { expected: *i + 1, found: w.len() })?;
        acc = acc + wi * Complex::from_polar(T::one(), -T::TAU() * dot);
    }
    Ok(acc / region_measure)
}

/// Silver-mean shape change with tile lengths ℓ_a + √2·ℓ_b = 2√2, i.e.
/// D = 1 − ℓ_a/√2. Both lengths must be exact and positive.
pub fn deformation_from_lengths(ell_a: &AlgebraicElement, ell_b: &AlgebraicElement) -> Result<DeformationMap> {
    let f = FieldId::Silver;
    if ell_a.field() != f || ell_b.field() != f {
        return Err(Error::FieldMismatch { left: f, right: if ell_a.field() != f { ell_a.field() } else { ell_b.field() } });
    }
    let s2 = AlgebraicElement::parse(f, "√2")?;
    let lhs = ell_a.clone() + s2.clone() * ell_b;
    if lhs != s2.clone() * AlgebraicElement::from_i64(f, 2) {
        return Err(Error::InvalidArgument(format!("lengths violate ℓ_a + √2ℓ_b = 2√2 (got {lhs})")));
    }
    if !(ell_a.to_f64() > 0.0 && ell_b.to_f64() > 0.0) {
        return Err(Error::InvalidArgument("tile lengths must be positive".into()));
    }
    let d = AlgebraicElement::one(f) - ell_a.checked_div(&s2)?;
    let preset = crate::models::builtin("silver")?.deformation("equal-lengths")?.clone();
    if preset.matrix[0][0] == d {
        return Ok(preset);
    }
    Ok(DeformationMap {
        name: format!("from-lengths:{ell_a},{ell_b}"),
        matrix: vec![vec![d]],
        period_generator: None,
        argument_lattice: None,
    })
}

/// Point-group actions on physical Fourier space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryGroup {
    /// Rotation by 60°.
    Rotation6,
    /// Reflection in the x-axis (k ↦ −k in 1d).
    Mirror,
    /// Reflection in the best line through the origin: candidate axes map a
    /// brightest non-central peak onto a peak of equal modulus and intensity.
    /// Unmatched images count with discrepancy I(k) − min I, a lower bound
    /// since the image lies below every listed intensity.
    BestMirror,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryCheck {
    pub group: SymmetryGroup,
    pub compared: usize,
    pub max_discrepancy: f64,
    /// Indices of peaks whose image is not in the list.
    pub unmatched: Vec<usize>,
    /// Angle of the mirror line in radians (mirror groups only).
    pub axis: Option<f64>,
}

const MATCH_TOL: f64 = 1e-9;

struct Positions {
    pos: Vec<[f64; 2]>,
    order: Vec<usize>,
    xs: Vec<f64>,
}

impl Positions {
    fn new<T: Real>(peaks: &[Peak<T>]) -> Self {
        let pos: Vec<[f64; 2]> = peaks
            .iter()
            .map(|p| [p.k.k_phys[0].to_f64_lossy(), p.k.k_phys.get(1).map_or(0.0, |v| v.to_f64_lossy())])
            .collect();
        let mut order: Vec<usize> = (0..pos.len()).collect();
        order.sort_by(|&a, &b| pos[a][0].partial_cmp(&pos[b][0]).unwrap_or(Ordering::Equal));
        let xs = order.iter().map(|&i| pos[i][0]).collect();
        Self { pos, order, xs }
    }

    fn find(&self, img: [f64; 2]) -> Option<usize> {
        let start = self.xs.partition_point(|&x| x < img[0] - MATCH_TOL);
        self.order[start..]
            .iter()
            .take_while(|&&j| self.pos[j][0] <= img[0] + MATCH_TOL)
            .find(|&&j| (self.pos[j][0] - img[0]).hypot(self.pos[j][1] - img[1]) <= MATCH_TOL)
            .copied()
    }
}

fn compare<T: Real>(
    peaks: &[Peak<T>],
    at: &Positions,
    group: SymmetryGroup,
    axis: Option<f64>,
    act: impl Fn([f64; 2]) -> [f64; 2],
    penalize_unmatched: bool,
) -> SymmetryCheck {
    let floor = peaks.iter().map(|p| p.intensity.to_f64_lossy()).fold(f64::INFINITY, f64::min);
    let mut out = SymmetryCheck { group, compared: 0, max_discrepancy: 0.0, unmatched: Vec::new(), axis };
    for (idx, p) in peaks.iter().enumerate() {
        let i = p.intensity.to_f64_lossy();
        match at.find(act(at.pos[idx])) {
            Some(j) => {
                out.compared += 1;
                out.max_discrepancy = out.max_discrepancy.max((peaks[j].intensity.to_f64_lossy() - i).abs());
            }
            None => {
                if penalize_unmatched {
                    out.max_discrepancy = out.max_discrepancy.max(i - floor);
                }
                out.unmatched.push(idx);
            }
        }
    }
    out
}

fn reflect(k: [f64; 2], theta: f64) -> [f64; 2] {
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    [c * k[0] + s * k[1], s * k[0] - c * k[1]]
}

/// Largest |I(gk) − I(k)| over the peaks, matching images by nearest k.
pub fn symmetry_report<T: Real>(peaks: &[Peak<T>], group: SymmetryGroup) -> Result<SymmetryCheck> {
    let axis = (group != SymmetryGroup::Rotation6).then_some(0.0);
    if peaks.is_empty() {
        return Ok(SymmetryCheck { group, compared: 0, max_discrepancy: 0.0, unmatched: Vec::new(), axis });
    }
    let planar = peaks[0].k.k_phys.len() == 2;
    if !planar && group != SymmetryGroup::Mirror {
        return Err(Error::InvalidArgument(format!("{group:?} needs a planar model")));
    }
    let at = Positions::new(peaks);
    let (c, s) = (0.5, 3f64.sqrt() / 2.0);
    Ok(match group {
        SymmetryGroup::Rotation6 => compare(peaks, &at, group, None, |k| [c * k[0] - s * k[1], s * k[0] + c * k[1]], false),
        SymmetryGroup::Mirror if !planar => compare(peaks, &at, group, axis, |k| [-k[0], 0.0], false),
        SymmetryGroup::Mirror => compare(peaks, &at, group, axis, |k| [k[0], -k[1]], false),
        SymmetryGroup::BestMirror => {
            let r = |k: [f64; 2]| k[0].hypot(k[1]);
            let Some(p) = (0..peaks.len()).find(|&i| r(at.pos[i]) > MATCH_TOL) else {
                return Ok(compare(peaks, &at, group, axis, |k| k, true));
            };
            let (ip, rp) = (peaks[p].intensity.to_f64_lossy(), r(at.pos[p]));
            let arg = |k: [f64; 2]| k[1].atan2(k[0]);
            let mut best: Option<SymmetryCheck> = None;
            for q in 0..peaks.len() {
                let same = (peaks[q].intensity.to_f64_lossy() - ip).abs() <= MATCH_TOL * ip.max(1.0)
                    && (r(at.pos[q]) - rp).abs() <= MATCH_TOL;
                if !same {
                    continue;
                }
                let theta = 0.5 * (arg(at.pos[p]) + arg(at.pos[q]));
                for t in [theta, theta + std::f64::consts::FRAC_PI_2] {
                    let t = t.rem_euclid(std::f64::consts::PI);
                    let cand = compare(peaks, &at, group, Some(t), |k| reflect(k, t), true);
                    if best.as_ref().map_or(true, |b| cand.max_discrepancy < b.max_discrepancy) {
                        best = Some(cand);
                    }
                }
            }
            best.expect("p matches itself")
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin;

    fn engine(name: &str) -> Diffraction<f64> {
        Diffraction::new(builtin(name).unwrap()).unwrap()
    }

    #[test]
    fn silver_central_amplitudes() {
        let e = engine("silver");
        let k0 = e.module_point(&[0, 0]);
        let a = e.amplitude_at(&k0, &WeightVector::equal(&e.model), None, 30).unwrap();
        assert!((a.re - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12 && a.im.abs() < 1e-12);
        let z = e.amplitude_at(&k0, &WeightVector::zero_central(&e.model).unwrap(), None, 30).unwrap();
        assert!(z.norm() < 1e-12);
    }

    #[test]
    fn analytic_at_zero() {
        let (a, b) = analytic_silver(0.0f64);
        assert!((a.re - 2f64.sqrt() / 4.0).abs() < 1e-15 && a.im == 0.0);
        assert!((b.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn analytic_equal_weight_intensity() {
        let lam = 1.0 + 2f64.sqrt();
        for i in 0..10 {
            let k = -2.3 + 0.51 * i as f64;
            let (a, b) = analytic_silver(k);
            let x = std::f64::consts::PI * lam * k;
            let expect = lam * lam / 8.0 * (x.sin() / x).powi(2);
            assert!(((a + b).norm_sqr() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_parse_and_replicate() {
        let cap = builtin("cap").unwrap();
        let w = WeightVector::<f64>::parse(&cap, "0,0,τ,-1").unwrap();
        assert_eq!(w.len(), 24);
        assert_eq!(w, WeightVector::zero_central(&cap).unwrap());
        assert!(WeightVector::<f64>::parse(&cap, "1,2").is_err());
        let s = builtin("silver").unwrap();
        let w = WeightVector::<f64>::parse(&s, "√2, -1").unwrap();
        assert_eq!(w, WeightVector::zero_central(&s).unwrap());
    }

    #[test]
    fn lengths_to_deformation() {
        let s = |x: &str| AlgebraicElement::parse(FieldId::Silver, x).unwrap();
        let d = deformation_from_lengths(&s("4-2√2"), &s("4-2√2")).unwrap();
        assert_eq!(d.matrix[0][0], s("3-2√2"));
        assert_eq!(d.name, "equal-lengths");
        let id = deformation_from_lengths(&s("√2"), &s("1")).unwrap();
        assert!(id.matrix[0][0].is_zero());
        assert!(deformation_from_lengths(&s("2√2"), &s("0")).is_err());
        assert!(deformation_from_lengths(&s("1"), &s("1")).is_err());
    }

    #[test]
    fn peak_list_is_sorted_and_thresholded() {
        let e = engine("silver");
        let q = PeakQuery::defaults(&e.model);
        let peaks = e.peak_list(&q).unwrap();
        assert!(!peaks.is_empty());
        assert!(peaks.windows(2).all(|w| w[0].intensity >= w[1].intensity));
        assert!(peaks.iter().all(|p| p.intensity >= 1e-3));
        assert!(peaks.iter().all(|p| (p.intensity - p.amplitude.norm_sqr()).abs() <= 1e-14 * p.intensity));
        let bad = PeakQuery { threshold: 0.0, ..q };
        assert!(e.peak_list(&bad).is_err());
    }

    #[test]
    fn empty_symmetry_report() {
        let r = symmetry_report::<f64>(&[], SymmetryGroup::Mirror).unwrap();
        assert_eq!((r.compared, r.unmatched.len()), (0, 0));
    }

    #[test]
    fn hat_periods_are_module_points() {
        let e = engine("cap");
        let hat = e.model.deformation("hat").unwrap().clone();
        let pc = e.period_coords(&hat).unwrap();
        assert_eq!(pc.len(), 2);
        for c in pc {
            let p = e.module_point(&c);
            let arg = internal_argument(&p, Some(&hat));
            assert!(arg.iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn scaffold_evaluation_needs_data() {
        let e = engine("casper_scaffold");
        let k = e.module_point(&[0, 0, 0, 0]);
        assert!(matches!(e.amplitudes(&k, None, 10), Err(Error::MissingDisplacement(_))));
    }
}

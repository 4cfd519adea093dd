//! Invariants checked over randomly generated inputs.

use aperiodic_diffraction::cocycle::FourierEvaluator;
use aperiodic_diffraction::diffraction::{peaks_csv, weyl_sum, PeakQuery};
use aperiodic_diffraction::inflation::{inflate, TypedPointSet};
use aperiodic_diffraction::models::builtin;
use aperiodic_diffraction::verify::cocycle_factorization_error;
use aperiodic_diffraction::{AlgebraicElement, Engine, FieldId, Weights};
use num_complex::Complex;
use once_cell::sync::Lazy;
use proptest::prelude::*;

const FIELDS: [FieldId; 4] = [FieldId::Silver, FieldId::Cap, FieldId::Spectre, FieldId::RealQuartic];

fn element(field: FieldId) -> impl Strategy<Value = AlgebraicElement> {
    let deg = field.spec().degree;
    prop::collection::vec((-20i64..=20, 1i64..=6), deg)
        .prop_map(move |c| AlgebraicElement::from_pairs(field, &c).expect("valid coordinates"))
}

fn pair() -> impl Strategy<Value = (AlgebraicElement, AlgebraicElement)> {
    prop::sample::select(FIELDS.to_vec()).prop_flat_map(|f| (element(f), element(f)))
}

fn as_complex(v: &[f64]) -> Complex<f64> {
    Complex::new(v[0], v.get(1).copied().unwrap_or(0.0))
}

fn close(a: Complex<f64>, b: Complex<f64>, scale: f64) -> bool {
    (a - b).norm() <= 1e-9 * scale.max(1.0)
}

static SILVER_PATCH: Lazy<TypedPointSet> = Lazy::new(|| {
    let m = builtin("silver").unwrap();
    inflate(&TypedPointSet::seed(&m, 0), &m, 6).unwrap()
});

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn star_and_conj_are_involutions((x, _) in pair()) {
        prop_assert_eq!(x.star().star(), x.clone());
        prop_assert_eq!(x.conj().conj(), x);
    }

    #[test]
    fn star_is_a_ring_homomorphism((x, y) in pair()) {
        prop_assert_eq!((x.clone() * &y).star(), x.star() * y.star());
        prop_assert_eq!((x.clone() + &y).star(), x.star() + y.star());
    }

    #[test]
    fn embeddings_respect_products((x, y) in pair()) {
        let p = as_complex(&(x.clone() * &y).embed_phys::<f64>());
        let q = as_complex(&x.embed_phys::<f64>()) * as_complex(&y.embed_phys::<f64>());
        prop_assert!(close(p, q, q.norm()));
        let p = as_complex(&(x.clone() * &y).embed_int::<f64>());
        let q = as_complex(&x.embed_int::<f64>()) * as_complex(&y.embed_int::<f64>());
        prop_assert!(close(p, q, q.norm()));
    }

    #[test]
    fn exact_embedding_matches_float((x, _) in pair()) {
        let exact: Vec<f64> = x.embed_phys_exact().iter().map(AlgebraicElement::to_f64).collect();
        let float = x.embed_phys::<f64>();
        for (a, b) in exact.iter().zip(&float) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn nonzero_elements_invert((x, _) in pair()) {
        prop_assume!(!x.is_zero());
        prop_assert_eq!(x.clone() * x.inverse().unwrap(), AlgebraicElement::one(x.field()));
    }

    #[test]
    fn display_round_trips((x, _) in pair()) {
        prop_assert_eq!(AlgebraicElement::parse(x.field(), &x.to_string()).unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cocycle_factorizes(model in prop::sample::select(vec!["silver", "silver_twisted", "cap"]),
                          k in prop::collection::vec(-3.0f64..3.0, 2)) {
        let m = builtin(model).unwrap();
        let ev = FourierEvaluator::<f64>::new(&m).unwrap();
        let err = cocycle_factorization_error(&ev, &[k[..m.dim()].to_vec()], 4);
        prop_assert!(err < 1e-10, "{}", err);
    }

    #[test]
    fn amplitudes_are_linear_in_weights(k in prop::collection::vec(-2.0f64..2.0, 2),
                                        w in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 24),
                                        v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 24),
                                        a in -2.0f64..2.0) {
        let m = builtin("cap").unwrap();
        let h = FourierEvaluator::<f64>::new(&m).unwrap().amplitudes(&k, 10).unwrap();
        let w: Vec<Complex<f64>> = w.into_iter().map(|(r, i)| Complex::new(r, i)).collect();
        let v: Vec<Complex<f64>> = v.into_iter().map(|(r, i)| Complex::new(r, i)).collect();
        let mix: Vec<Complex<f64>> = w.iter().zip(&v).map(|(x, y)| x * a + y).collect();
        let lhs = h.weighted(&mix);
        let rhs = h.weighted(&w) * a + h.weighted(&v);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn weyl_sums_are_translation_covariant(k in -5.0f64..5.0, p in -6i64..6, q in -6i64..6) {
        let m = builtin("silver").unwrap();
        let w = Weights::equal(&m);
        let t = AlgebraicElement::from_ints(FieldId::Silver, &[p, q]);
        let a = weyl_sum(&SILVER_PATCH, &[k], &w, 100.0).unwrap();
        let b = weyl_sum(&SILVER_PATCH.translate(&t), &[k], &w, 100.0).unwrap();
        let phase = Complex::from_polar(1.0, -std::f64::consts::TAU * k * t.to_f64());
        prop_assert!((b - phase * a).norm() < 1e-9);
    }
}

#[test]
fn central_amplitudes_sum_to_density() {
    for name in ["silver", "silver_twisted", "cap"] {
        let m = builtin(name).unwrap();
        let h = FourierEvaluator::<f64>::new(&m).unwrap().amplitudes(&vec![0.0; m.dim()], 20).unwrap();
        let s: Complex<f64> = h.h.iter().sum();
        assert!((s - Complex::new(m.density_f64(), 0.0)).norm() < 1e-10, "{name}");
    }
}

#[test]
fn peak_csv_is_deterministic() {
    for name in ["silver", "cap"] {
        let e = Engine::new(builtin(name).unwrap()).unwrap();
        let q = PeakQuery::defaults(&e.model);
        let first = peaks_csv(&e.peak_list(&q).unwrap());
        for _ in 0..3 {
            assert_eq!(peaks_csv(&e.peak_list(&q).unwrap()), first);
        }
    }
}

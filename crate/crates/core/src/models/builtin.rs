use once_cell::sync::Lazy;

use super::{DeformationMap, DisplacementMatrix, ModelDefaults, ModelSpec, SemilinearMap};
use crate::algebra::{AlgebraicElement, FieldId};
use crate::error::{Error, Result};

/// 24×24 CAP displacement sets (4 shapes × 6 orientations). Entry [3][4] of
/// blocks (4,3) and (4,4) carries +2ξ, as forced by T_{σa,σb} = ξ·T_ab.
const CAP_DATA: &str = include_str!("../../data/cap_displacement.json");

static CAP_DISPLACEMENT: Lazy<DisplacementMatrix> =
    Lazy::new(|| DisplacementMatrix::from_json_str(CAP_DATA).expect("bundled CAP data parses"));

pub fn builtin_names() -> &'static [&'static str] {
    &["silver", "silver_twisted", "cap", "casper_scaffold"]
}

pub fn builtin(name: &str) -> Result<ModelSpec> {
    match name {
        "silver" => Ok(silver(false)),
        "silver_twisted" => Ok(silver(true)),
        "cap" => Ok(cap()),
        "casper_scaffold" | "casper" | "caspr" => Ok(casper_scaffold()),
        _ => Err(Error::UnknownModel(name.to_string())),
    }
}

fn el(field: FieldId, s: &str) -> AlgebraicElement {
    AlgebraicElement::parse(field, s).expect("valid built-in constant")
}

fn rq(s: &str) -> AlgebraicElement {
    el(FieldId::RealQuartic, s)
}

fn silver(twisted: bool) -> ModelSpec {
    let f = FieldId::Silver;
    let displacement = if twisted {
        DisplacementMatrix::from_strs(f, &[&[&["2"], &["0"]], &[&["0", "1"], &["√2"]]])
    } else {
        DisplacementMatrix::from_strs(f, &[&[&["0"], &["0"]], &[&["√2", "1+√2"], &["√2"]]])
    };
    ModelSpec {
        name: if twisted { "silver_twisted" } else { "silver" }.into(),
        field: f,
        tile_labels: vec!["a".into(), "b".into()],
        generators: vec![el(f, "1"), el(f, "√2")],
        lattice_generators: vec![el(f, "1"), el(f, "√2")],
        expansion: SemilinearMap { factor: el(f, "1+√2"), conjugate: false },
        pf_eigenvalue: el(f, "1+√2"),
        displacement: Some(displacement),
        density: el(f, "1/2 + (1/4)√2"),
        window_volume: Some(el(f, "1+√2")),
        fourier_module_prefactor: "√2/4 · Z[√2]".into(),
        deformations: vec![DeformationMap {
            name: "equal-lengths".into(),
            matrix: vec![vec![el(f, "3-2√2")]],
            // Λ' = (4−2√2)Z, whose dual is (2+√2)/4 · Z.
            period_generator: Some(el(f, "1/2 + (1/4)√2")),
            argument_lattice: None,
        }],
        orientations: 1,
        zero_central_weights: Some(vec![el(f, "√2"), el(f, "-1")]),
        defaults: ModelDefaults {
            iterations: 20,
            internal_cutoff: 30.0,
            center: vec![2.5],
            radius: 2.5,
            threshold: 1e-3,
        },
    }
}

fn cap() -> ModelSpec {
    let f = FieldId::Cap;
    // τ² = (3+√5)/2 and √75 = 5√3 in Q(√3, √5).
    let tau2 = rq("3/2 + (1/2)√5");
    let density = (tau2 * rq("5√3")).inverse().expect("nonzero");
    // i/√15 = (2τ−1)(2ξ−1)/15.
    let i_over_sqrt15 = el(f, "2τ-1") * el(f, "2ξ-1") * el(f, "1/15");
    let hat_periods = el(f, "1+ξ") * el(f, "τ-ξ").pow(3) * i_over_sqrt15 * el(f, "1/3");
    let generators: Vec<AlgebraicElement> =
        ["3τ+2-ξ", "2τ+1-τξ+ξ", "1+3τξ+ξ", "τ-1+τξ+2ξ"].iter().map(|s| el(f, s)).collect();
    let labels = (1..=4)
        .flat_map(|shape| (0..6).map(move |rot| format!("{shape}.{rot}")))
        .collect();
    ModelSpec {
        name: "cap".into(),
        field: f,
        tile_labels: labels,
        lattice_generators: generators.clone(),
        generators,
        expansion: SemilinearMap { factor: el(f, "τ+1"), conjugate: false },
        pf_eigenvalue: el(f, "3τ+2"),
        displacement: Some(CAP_DISPLACEMENT.clone()),
        density,
        window_volume: None,
        fourier_module_prefactor: "(1+ξ)(τ−ξ)i/(3√15) · Z[τ,ξ]".into(),
        deformations: vec![DeformationMap {
            name: "hat".into(),
            matrix: vec![
                vec![rq("-11/16"), rq("(3/16)√15")],
                vec![rq("(3/16)√15"), rq("11/16")],
            ],
            period_generator: Some(hat_periods),
            argument_lattice: Some(el(f, "(1/12)τ - 1/6 + (1/4)ξ")),
        }],
        orientations: 6,
        zero_central_weights: Some(vec![el(f, "0"), el(f, "0"), el(f, "τ"), el(f, "-1")]),
        defaults: ModelDefaults {
            iterations: 15,
            internal_cutoff: 3.0,
            center: vec![0.0, 0.0],
            radius: 0.6,
            threshold: 1e-6,
        },
    }
}

fn casper_scaffold() -> ModelSpec {
    let f = FieldId::Spectre;
    let sp_factor = rq("1/2 - (1/6)√15");
    let sp = |s: &str| sp_factor.clone() * rq(s);
    let g: Vec<AlgebraicElement> =
        ["-1-ξ+λ-2ξλ", "1-2ξ+2λ-ξλ", "-2+ξ+2λ+2ξλ", "-2-2ξ-λ+2ξλ"].iter().map(|s| el(f, s)).collect();
    // The lattice basis uses g₁ − g₂ as its second column.
    let lattice_generators = vec![g[0].clone(), g[0].clone() - &g[1], g[2].clone(), g[3].clone()];
    ModelSpec {
        name: "casper_scaffold".into(),
        field: f,
        tile_labels: Vec::new(),
        generators: g,
        lattice_generators,
        // Reflection followed by a rotation-dilation: x ↦ μ·x̄ with μμ̄ = λ.
        expansion: SemilinearMap { factor: el(f, "1/3 + (1/3)λ - (1/3)ξ"), conjugate: true },
        pf_eigenvalue: el(f, "λ"),
        displacement: None,
        density: rq("(2/27)√3 - (1/18)√5"),
        window_volume: Some(rq("270√3 - (405/2)√5")),
        fourier_module_prefactor: "i√5/135 · R_CASPr".into(),
        deformations: vec![
            DeformationMap {
                name: "spectre".into(),
                matrix: vec![vec![sp("√5"), sp("1")], vec![sp("1"), sp("-√5")]],
                period_generator: None,
                argument_lattice: None,
            },
            DeformationMap {
                name: "ht".into(),
                matrix: vec![
                    vec![rq("-231/201 + (44/201)√15"), rq("(80/201)√3 - (84/201)√5")],
                    vec![rq("(80/201)√3 - (84/201)√5"), rq("231/201 - (44/201)√15")],
                ],
                period_generator: Some(el(f, "-17/135 + (16/135)ξ + (8/135)λ - (4/135)ξλ")),
                argument_lattice: None,
            },
            DeformationMap {
                name: "hex".into(),
                matrix: vec![vec![rq("-1"), rq("0")], vec![rq("0"), rq("1")]],
                period_generator: Some(el(f, "(1/45)λ - 4/45")),
                argument_lattice: None,
            },
        ],
        orientations: 1,
        zero_central_weights: None,
        defaults: ModelDefaults {
            iterations: 10,
            internal_cutoff: 3.0,
            center: vec![0.0, 0.0],
            radius: 0.5,
            threshold: 1e-9,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::power_iteration;

    #[test]
    fn catalog() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            assert_eq!(&m.name, name);
        }
        assert!(matches!(builtin("penrose"), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn silver_substitution_and_pf() {
        let m = builtin("silver").unwrap();
        assert_eq!(m.displacement().unwrap().substitution_matrix(), vec![vec![1, 1], vec![2, 1]]);
        assert_eq!(m.pf_eigenvalue, el(FieldId::Silver, "1+√2"));
        let t = builtin("silver_twisted").unwrap();
        assert_eq!(t.displacement().unwrap().substitution_matrix(), vec![vec![1, 1], vec![2, 1]]);
        assert_eq!(t.displacement().unwrap().entries[0][0], vec![el(FieldId::Silver, "2")]);
    }

    #[test]
    fn cap_data_is_consistent() {
        let m = builtin("cap").unwrap();
        let d = m.displacement().unwrap();
        assert_eq!(d.n, 24);
        d.validate(&m).unwrap();
        let mf: Vec<Vec<f64>> =
            d.substitution_matrix().iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let (pf, _) = power_iteration(&mf, 1e-15, 100_000);
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((pf - tau.powi(4)).abs() < 1e-10);
    }

    #[test]
    fn expansion_determinant_is_pf() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            assert!((m.expansion_det().to_f64() - m.pf_f64()).abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn spectre_expansion_squares_to_lambda() {
        let m = builtin("casper_scaffold").unwrap();
        let sq = m.expansion_squared();
        let lam = rq("4+√15");
        assert_eq!(sq[0][0], lam);
        assert_eq!(sq[1][1], lam);
        assert!(sq[0][1].is_zero() && sq[1][0].is_zero());
        // R and R★ in closed form.
        let r = m.expansion.phys_matrix_exact();
        assert_eq!(r[0][0], rq("3/2 + (1/3)√15"));
        assert_eq!(r[0][1], rq("-(1/6)√3"));
        assert_eq!(r[1][1], rq("-3/2 - (1/3)√15"));
        let rs = m.int_contraction().phys_matrix_exact();
        assert_eq!(rs[0][0], rq("3/2 - (1/3)√15"));
        assert_eq!(rs[0][1], rq("(1/6)√3"));
        let rs2 = crate::linalg::mat_mul_exact(&rs, &rs);
        assert_eq!(rs2[0][0], rq("4-√15"));
    }

    #[test]
    fn int_contraction_is_contractive() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let a = m.int_contraction().phys_matrix::<f64>();
            // Similarity (scaled isometry) matrices: spectral radius = sqrt|det|.
            let det = if a.len() == 1 { a[0][0].abs() } else { (a[0][0] * a[1][1] - a[0][1] * a[1][0]).abs().sqrt() };
            assert!(det < 1.0, "{name}");
        }
    }

    #[test]
    fn densities() {
        let s = builtin("silver").unwrap();
        assert!((s.density_f64() - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-15);
        let c = builtin("cap").unwrap();
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((c.density_f64().powi(2) - 1.0 / (75.0 * tau.powi(4))).abs() < 1e-15);
        let k = builtin("casper_scaffold").unwrap();
        let s15 = 15f64.sqrt();
        assert!((k.density_f64().powi(2) - (31.0 - 8.0 * s15) / 972.0).abs() < 1e-12);
        // density = dens(L) · vol(W) with dens(L) = 1/3645.
        let v = k.window_volume.clone().unwrap() * rq("1/3645");
        assert_eq!(v, k.density);
        let sv = s.window_volume.clone().unwrap() * el(FieldId::Silver, "(1/4)√2");
        assert_eq!(sv, s.density);
    }
}

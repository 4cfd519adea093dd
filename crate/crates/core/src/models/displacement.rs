use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::algebra::{AlgebraicElement, FieldId};
use crate::error::{Error, Result};
use crate::linalg::{is_primitive, power_iteration};

/// Set-valued displacement matrix: `entries[i][j]` lists the translations of
/// type-i tiles inside an inflated type-j tile.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementMatrix {
    pub field: FieldId,
    pub n: usize,
    pub entries: Vec<Vec<Vec<AlgebraicElement>>>,
}

#[derive(Serialize, Deserialize)]
struct FileFormat {
    field: FieldId,
    n: usize,
    entries: Vec<Vec<Vec<Vec<[i64; 2]>>>>,
}

impl DisplacementMatrix {
    /// Build from string entries, e.g. `&[&[&["0"], &["0"]], ...]`; panics on bad input.
    pub fn from_strs(field: FieldId, rows: &[&[&[&str]]]) -> Self {
        let entries: Vec<Vec<Vec<AlgebraicElement>>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|set| set.iter().map(|s| AlgebraicElement::parse(field, s).expect("valid element")).collect())
                    .collect()
            })
            .collect();
        Self { field, n: entries.len(), entries }
    }

    /// M_ij = card(T_ij).
    pub fn substitution_matrix(&self) -> Vec<Vec<u64>> {
        self.entries.iter().map(|r| r.iter().map(|s| s.len() as u64).collect()).collect()
    }

    pub fn n_translations(&self) -> usize {
        self.entries.iter().flatten().map(Vec::len).sum()
    }

    /// Iterate over (i, j, t).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &AlgebraicElement)> {
        self.entries.iter().enumerate().flat_map(|(i, r)| {
            r.iter().enumerate().flat_map(move |(j, s)| s.iter().map(move |t| (i, j, t)))
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: FileFormat = serde_json::from_str(s)?;
        let perr = |reason: String| Error::Parse { input: "displacement file".into(), reason };
        if f.entries.len() != f.n {
            return Err(Error::Dimension { expected: f.n, found: f.entries.len() });
        }
        let mut entries = Vec::with_capacity(f.n);
        for (i, row) in f.entries.into_iter().enumerate() {
            if row.len() != f.n {
                return Err(Error::Dimension { expected: f.n, found: row.len() });
            }
            let mut r = Vec::with_capacity(f.n);
            for (j, set) in row.into_iter().enumerate() {
                let mut s = Vec::with_capacity(set.len());
                for coords in set {
                    if coords.iter().any(|c| c[1] == 0) {
                        return Err(perr(format!("zero denominator at entry ({i}, {j})")));
                    }
                    let q = coords
                        .iter()
                        .map(|c| BigRational::new(BigInt::from(c[0]), BigInt::from(c[1])))
                        .collect();
                    s.push(AlgebraicElement::new(f.field, q)?);
                }
                r.push(s);
            }
            entries.push(r);
        }
        Ok(Self { field: f.field, n: f.n, entries })
    }

    /// Serialize as JSON with one matrix row per line.
    pub fn to_json_string(&self) -> Result<String> {
        let mut out = format!("{{\"field\":\"{}\",\"n\":{},\"entries\":[\n", self.field, self.n);
        for (i, row) in self.entries.iter().enumerate() {
            let mut jr: Vec<Vec<Vec<[i64; 2]>>> = Vec::with_capacity(row.len());
            for set in row {
                let mut js = Vec::with_capacity(set.len());
                for t in set {
                    let mut c = Vec::with_capacity(t.coords().len());
                    for q in t.coords() {
                        let (Some(n), Some(d)) = (q.numer().to_i64(), q.denom().to_i64()) else {
                            return Err(Error::InvalidArgument(format!("coordinate {q} exceeds 64 bits")));
                        };
                        c.push([n, d]);
                    }
                    js.push(c);
                }
                jr.push(js);
            }
            out.push_str(&serde_json::to_string(&jr)?);
            out.push_str(if i + 1 < self.n { ",\n" } else { "\n" });
        }
        out.push_str("]}\n");
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    /// Check field, return-module membership, primitivity and the PF eigenvalue.
    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        if self.field != model.field {
            return Err(Error::FieldMismatch { left: model.field, right: self.field });
        }
        if !model.tile_labels.is_empty() && model.tile_labels.len() != self.n {
            return Err(Error::Dimension { expected: model.tile_labels.len(), found: self.n });
        }
        for (i, j, t) in self.iter() {
            if model.module_coords(t)?.is_none() {
                return Err(Error::NotInReturnModule { row: i, col: j, translation: t.to_string() });
            }
        }
        let m = self.substitution_matrix();
        if !is_primitive(&m) {
            return Err(Error::NotPrimitive);
        }
        let mf: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let (pf, _) = power_iteration(&mf, 1e-15, 100_000);
        let expected = model.pf_f64();
        if (pf - expected).abs() > 1e-9 {
            return Err(Error::EigenvalueMismatch { expected, found: pf });
        }
        Ok(())
    }
}

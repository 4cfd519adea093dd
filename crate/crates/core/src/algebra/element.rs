use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use super::field::{FieldId, FieldSpec};
use crate::error::{Error, Result};
use crate::linalg::solve_exact;
use crate::scalar::{rational, rational_to_f64, ExactField, Real};

/// Exact element of a registered number field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraicElement {
    field: FieldId,
    coords: Vec<BigRational>,
}

impl AlgebraicElement {
    pub fn new(field: FieldId, coords: Vec<BigRational>) -> Result<Self> {
        let d = field.spec().degree;
        if coords.len() != d {
            return Err(Error::Dimension { expected: d, found: coords.len() });
        }
        Ok(Self { field, coords })
    }

    /// Integer coordinates; panics on wrong length.
    pub fn from_ints(field: FieldId, coords: &[i64]) -> Self {
        Self::new(field, coords.iter().map(|&c| rational(c, 1)).collect()).expect("coordinate count")
    }

    pub fn from_pairs(field: FieldId, coords: &[(i64, i64)]) -> Result<Self> {
        if coords.iter().any(|&(_, d)| d == 0) {
            return Err(Error::DivisionByZero(field));
        }
        Self::new(field, coords.iter().map(|&(n, d)| rational(n, d)).collect())
    }

    pub fn zero(field: FieldId) -> Self {
        Self { field, coords: vec![BigRational::zero(); field.spec().degree] }
    }

    pub fn one(field: FieldId) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_rational(field: FieldId, q: BigRational) -> Self {
        let mut e = Self::zero(field);
        e.coords[0] = q;
        e
    }

    pub fn from_i64(field: FieldId, n: i64) -> Self {
        Self::from_rational(field, rational(n, 1))
    }

    pub fn basis_element(field: FieldId, i: usize) -> Self {
        let mut e = Self::zero(field);
        e.coords[i] = BigRational::one();
        e
    }

    pub fn field(&self) -> FieldId {
        self.field
    }

    pub fn spec(&self) -> &'static FieldSpec {
        self.field.spec()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// True if all coordinates are integers.
    pub fn is_integral_coords(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { left: self.field, right: other.field });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        Ok(Self { field: self.field, coords })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        Ok(Self { field: self.field, coords })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let spec = self.spec();
        let mut out = vec![BigRational::zero(); spec.degree];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in &spec.mul_table[i][j] {
                    out[*k] += &ab * c;
                }
            }
        }
        Ok(Self { field: self.field, coords: out })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.checked_mul(&other.inverse()?)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self { field: self.field, coords: self.coords.iter().map(|c| c * q).collect() }
    }

    /// Matrix of multiplication by `self` in the basis (column j = self·e_j).
    pub fn mul_matrix(&self) -> Vec<Vec<BigRational>> {
        let d = self.spec().degree;
        let cols: Vec<Self> =
            (0..d).map(|j| self.clone() * Self::basis_element(self.field, j)).collect();
        (0..d).map(|r| (0..d).map(|c| cols[c].coords[r].clone()).collect()).collect()
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero(self.field));
        }
        let d = self.spec().degree;
        let mut rhs = vec![vec![BigRational::zero()]; d];
        rhs[0][0] = BigRational::one();
        let sol = solve_exact(&self.mul_matrix(), &rhs).map_err(|_| Error::DivisionByZero(self.field))?;
        Ok(Self { field: self.field, coords: sol.into_iter().map(|mut r| r.remove(0)).collect() })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.field);
        for _ in 0..n {
            out = out * self;
        }
        out
    }

    fn apply(&self, m: &[Vec<BigRational>]) -> Self {
        let coords = m
            .iter()
            .map(|row| row.iter().zip(&self.coords).map(|(a, b)| a * b).sum())
            .collect();
        Self { field: self.field, coords }
    }

    /// Galois star map ★.
    pub fn star(&self) -> Self {
        self.apply(&self.spec().star_matrix)
    }

    /// Complex conjugation (identity on real fields).
    pub fn conj(&self) -> Self {
        self.apply(&self.spec().conj_matrix)
    }

    /// Field trace Tr_{K/Q}.
    pub fn trace(&self) -> BigRational {
        let m = self.mul_matrix();
        (0..m.len()).map(|i| m[i][i].clone()).sum()
    }

    /// Euclidean inner product of Minkowski lifts, as the exact rational
    /// `scale · Tr(x · conj(y))`.
    pub fn inner(&self, other: &Self) -> Result<BigRational> {
        Ok(self.checked_mul(&other.conj())?.trace() * &self.spec().inner_scale)
    }

    /// Physical embedding as a real 1- or 2-vector.
    pub fn embed_phys<T: Real>(&self) -> Vec<T> {
        let spec = self.spec();
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (c, (br, bi)) in self.coords.iter().zip(&spec.phys_basis) {
            if c.is_zero() {
                continue;
            }
            let v = rational_to_f64(c);
            re += v * br;
            im += v * bi;
        }
        if spec.real_dim == 1 {
            vec![T::from_f64_lossy(re)]
        } else {
            vec![T::from_f64_lossy(re), T::from_f64_lossy(im)]
        }
    }

    /// Internal embedding, `embed_phys ∘ star`.
    pub fn embed_int<T: Real>(&self) -> Vec<T> {
        self.star().embed_phys()
    }

    /// Exact physical embedding: components in the target real field.
    pub fn embed_phys_exact(&self) -> Vec<AlgebraicElement> {
        let spec = self.spec();
        let basis = &EXACT_BASIS[self.field as usize];
        let target = spec.exact_target;
        let mut re = Self::zero(target);
        let mut im = Self::zero(target);
        for (c, (br, bi)) in self.coords.iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            re = re + br.scale(c);
            im = im + bi.scale(c);
        }
        if spec.real_dim == 1 {
            vec![re]
        } else {
            vec![re, im]
        }
    }

    pub fn embed_int_exact(&self) -> Vec<AlgebraicElement> {
        self.star().embed_phys_exact()
    }

    /// Numerical value of an element of a real field.
    pub fn to_f64(&self) -> f64 {
        self.embed_phys::<f64>()[0]
    }

    /// Parse e.g. `3τ+2-ξ`, `3t + 2 - x`, `-1/2 + (3/4)√2`, `2*s2`.
    pub fn parse(field: FieldId, input: &str) -> Result<Self> {
        parse_element(field, input)
    }
}

/// Exact (Re, Im) of each basis element in the target real field.
static EXACT_BASIS: Lazy<Vec<Vec<(AlgebraicElement, AlgebraicElement)>>> = Lazy::new(|| {
    FieldId::ALL
        .iter()
        .map(|&id| {
            let spec = id.spec();
            let target = spec.exact_target;
            let gens: Vec<(AlgebraicElement, AlgebraicElement)> = spec
                .generators
                .iter()
                .map(|g| {
                    (
                        AlgebraicElement::from_pairs(target, g.exact_re).expect("valid generator data"),
                        AlgebraicElement::from_pairs(target, g.exact_im).expect("valid generator data"),
                    )
                })
                .collect();
            (0..spec.degree)
                .map(|j| {
                    let mut acc = (AlgebraicElement::one(target), AlgebraicElement::zero(target));
                    for (gi, (gr, gim)) in gens.iter().enumerate() {
                        if j >> gi & 1 == 1 {
                            let re = acc.0.clone() * gr - acc.1.clone() * gim;
                            let im = acc.0.clone() * gim + acc.1.clone() * gr;
                            acc = (re, im);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
});

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&AlgebraicElement> for AlgebraicElement {
            type Output = AlgebraicElement;
            fn $method(self, rhs: &AlgebraicElement) -> AlgebraicElement {
                self.$checked(rhs).expect("operands from the same field")
            }
        }
        impl $tr<AlgebraicElement> for AlgebraicElement {
            type Output = AlgebraicElement;
            fn $method(self, rhs: AlgebraicElement) -> AlgebraicElement {
                self.$checked(&rhs).expect("operands from the same field")
            }
        }
        impl $tr<&AlgebraicElement> for &AlgebraicElement {
            type Output = AlgebraicElement;
            fn $method(self, rhs: &AlgebraicElement) -> AlgebraicElement {
                self.$checked(rhs).expect("operands from the same field")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for AlgebraicElement {
    type Output = AlgebraicElement;
    fn neg(self) -> AlgebraicElement {
        Self { field: self.field, coords: self.coords.into_iter().map(|c| -c).collect() }
    }
}

impl ExactField for AlgebraicElement {
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }

    fn zero_like(&self) -> Self {
        Self::zero(self.field)
    }

    fn one_like(&self) -> Self {
        Self::one(self.field)
    }

    fn try_inv(&self) -> Option<Self> {
        self.inverse().ok()
    }
}

impl fmt::Display for AlgebraicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spec = self.spec();
        let mut first = true;
        for (c, sym) in self.coords.iter().zip(&spec.basis) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let is_unit = *sym == "1";
            if a.is_one() && !is_unit {
                f.write_str(sym)?;
            } else if a.is_integer() {
                write!(f, "{}", a.numer())?;
                if !is_unit {
                    f.write_str(sym)?;
                }
            } else if is_unit {
                write!(f, "{}/{}", a.numer(), a.denom())?;
            } else {
                write!(f, "({}/{}){}", a.numer(), a.denom(), sym)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.field, self)
    }
}

fn parse_element(field: FieldId, input: &str) -> Result<AlgebraicElement> {
    let err = |reason: &str| Error::Parse { input: input.to_string(), reason: reason.to_string() };
    let spec = field.spec();
    // Symbol table, longest first so `tx` is not read as `t`, `x` twice needlessly and
    // `sqrt15` wins over `s1`.
    let mut symbols: Vec<(String, AlgebraicElement)> = Vec::new();
    for (gi, g) in spec.generators.iter().enumerate() {
        let e = AlgebraicElement::basis_element(field, 1 << gi);
        symbols.push((g.symbol.to_string(), e.clone()));
        for a in g.aliases {
            symbols.push((a.to_string(), e.clone()));
        }
    }
    for (name, idx) in &spec.basis_aliases {
        symbols.push((name.to_string(), AlgebraicElement::basis_element(field, *idx)));
    }
    symbols.sort_by(|a, b| b.0.len().cmp(&a.0.len()));

    let chars: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(err("empty input"));
    }
    let s: String = chars.iter().collect();
    let mut pos = 0usize; // byte offset
    let mut total = AlgebraicElement::zero(field);
    let bytes = s.as_str();

    let read_int = |p: &mut usize| -> Option<BigInt> {
        let start = *p;
        while *p < bytes.len() && bytes.as_bytes()[*p].is_ascii_digit() {
            *p += 1;
        }
        (start < *p).then(|| bytes[start..*p].parse().expect("digits"))
    };
    let read_rational = |p: &mut usize| -> Result<Option<BigRational>> {
        let Some(n) = read_int(p) else { return Ok(None) };
        if *p < bytes.len() && bytes.as_bytes()[*p] == b'/' {
            *p += 1;
            let d = read_int(p).ok_or_else(|| err("missing denominator"))?;
            if d.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Some(BigRational::new(n, d)));
        }
        Ok(Some(BigRational::from_integer(n)))
    };

    while pos < bytes.len() {
        let mut sign = BigRational::one();
        let mut saw_sign = false;
        while pos < bytes.len() {
            let rest = &bytes[pos..];
            if rest.starts_with('+') {
                pos += 1;
            } else if rest.starts_with('-') {
                sign = -sign;
                pos += 1;
            } else if rest.starts_with('−') {
                sign = -sign;
                pos += '−'.len_utf8();
            } else {
                break;
            }
            saw_sign = true;
        }
        if pos > 0 && !saw_sign {
            return Err(err("expected `+` or `-` between terms"));
        }
        let mut coeff: Option<BigRational> = None;
        if bytes[pos..].starts_with('(') {
            pos += 1;
            let mut neg = false;
            if bytes[pos..].starts_with('-') {
                neg = true;
                pos += 1;
            }
            let q = read_rational(&mut pos)?.ok_or_else(|| err("expected rational in parentheses"))?;
            if !bytes[pos..].starts_with(')') {
                return Err(err("unbalanced parenthesis"));
            }
            pos += 1;
            coeff = Some(if neg { -q } else { q });
        } else if let Some(q) = read_rational(&mut pos)? {
            coeff = Some(q);
        }
        let mut term = AlgebraicElement::from_rational(field, sign * coeff.clone().unwrap_or_else(BigRational::one));
        let mut nsym = 0;
        loop {
            if bytes[pos..].starts_with('*') || bytes[pos..].starts_with('·') {
                pos += bytes[pos..].chars().next().map_or(1, char::len_utf8);
            }
            let rest = &bytes[pos..];
            // `^2` style exponents on the preceding symbol.
            let Some((name, e)) = symbols.iter().find(|(name, _)| rest.starts_with(name.as_str())) else {
                break;
            };
            pos += name.len();
            let mut factor = e.clone();
            if bytes[pos..].starts_with('^') {
                pos += 1;
                let n = read_int(&mut pos).ok_or_else(|| err("missing exponent"))?;
                factor = factor.pow(n.to_u32().ok_or_else(|| err("exponent too large"))?);
            }
            term = term * factor;
            nsym += 1;
        }
        if coeff.is_none() && nsym == 0 {
            return Err(err("expected a number or a field symbol"));
        }
        total = total + term;
        if pos < bytes.len() {
            let c = &bytes[pos..];
            if !(c.starts_with('+') || c.starts_with('-') || c.starts_with('−')) {
                return Err(err("unexpected character"));
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cap(s: &str) -> AlgebraicElement {
        AlgebraicElement::parse(FieldId::Cap, s).unwrap()
    }

    fn spec_el(s: &str) -> AlgebraicElement {
        AlgebraicElement::parse(FieldId::Spectre, s).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let u1 = cap("3τ+2-ξ");
        assert_eq!(u1, AlgebraicElement::from_ints(FieldId::Cap, &[2, 3, -1, 0]));
        assert_eq!(cap("3t + 2 - x"), u1);
        assert_eq!(u1.to_string(), "2 + 3τ - ξ");
        assert_eq!(AlgebraicElement::parse(FieldId::Cap, &u1.to_string()).unwrap(), u1);
        let q = AlgebraicElement::parse(FieldId::Silver, "-1/2 + (3/4)√2").unwrap();
        assert_eq!(q.to_string(), "-1/2 + (3/4)√2");
        assert_eq!(AlgebraicElement::parse(FieldId::Silver, &q.to_string()).unwrap(), q);
        assert_eq!(cap("τ^2"), cap("τ+1"));
        assert_eq!(cap("t*x"), AlgebraicElement::basis_element(FieldId::Cap, 3));
        assert_eq!(
            AlgebraicElement::parse(FieldId::RealQuartic, "s15").unwrap(),
            AlgebraicElement::basis_element(FieldId::RealQuartic, 3)
        );
        assert!(AlgebraicElement::parse(FieldId::Silver, "t").is_err());
        assert!(AlgebraicElement::parse(FieldId::Silver, "1/0").is_err());
        assert!(AlgebraicElement::parse(FieldId::Silver, "").is_err());
    }

    #[test]
    fn add_examples() {
        assert_eq!(cap("1+τ") + cap("τ-1"), cap("2τ"));
        assert_eq!(cap("3τ+2-ξ") + AlgebraicElement::zero(FieldId::Cap), cap("3τ+2-ξ"));
        let u2 = cap("2τ+1-τξ+ξ");
        let u4 = cap("τ-1+τξ+2ξ");
        assert_eq!(u2 + u4, cap("3τ+3ξ"));
    }

    #[test]
    fn mul_examples() {
        let s2 = AlgebraicElement::basis_element(FieldId::Silver, 1);
        assert_eq!(s2.clone() * &s2, AlgebraicElement::from_i64(FieldId::Silver, 2));
        let xi = cap("ξ");
        assert_eq!(xi.clone() * &xi, cap("ξ-1"));
        let l = spec_el("λ");
        assert_eq!(l.clone() * &l, spec_el("8λ-1"));
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = AlgebraicElement::one(FieldId::Cap);
        let b = AlgebraicElement::one(FieldId::Silver);
        assert!(matches!(a.checked_add(&b), Err(Error::FieldMismatch { .. })));
        assert!(matches!(a.checked_mul(&b), Err(Error::FieldMismatch { .. })));
    }

    #[test]
    fn star_examples() {
        let s2 = AlgebraicElement::basis_element(FieldId::Silver, 1);
        assert_eq!(s2.star(), -s2);
        assert_eq!(cap("τ").star(), cap("1-τ"));
        assert_eq!(cap("ξ").star(), cap("1-ξ"));
        // i√15 = (2τ−1)(2ξ−1) is fixed.
        let i15 = cap("2τ-1") * cap("2ξ-1");
        assert_eq!(i15.star(), i15);
        assert_eq!(spec_el("λ").star(), spec_el("8-λ"));
    }

    #[test]
    fn inverse_and_division() {
        let u1 = cap("3τ+2-ξ");
        let inv = u1.inverse().unwrap();
        assert_eq!(u1.clone() * &inv, AlgebraicElement::one(FieldId::Cap));
        assert!(AlgebraicElement::zero(FieldId::Cap).inverse().is_err());
        let lam = AlgebraicElement::parse(FieldId::Silver, "1+√2").unwrap();
        assert_eq!(lam.inverse().unwrap(), AlgebraicElement::parse(FieldId::Silver, "-1+√2").unwrap());
    }

    #[test]
    fn embedding_examples() {
        let lam = AlgebraicElement::parse(FieldId::Silver, "1+√2").unwrap();
        assert!((lam.embed_phys::<f64>()[0] - 2.414213562373095).abs() < 1e-14);
        assert!((lam.embed_int::<f64>()[0] + 0.41421356237309515).abs() < 1e-14);

        let u1 = cap("3τ+2-ξ");
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        let h3 = 3f64.sqrt() / 2.0;
        let p = u1.embed_phys::<f64>();
        assert!((p[0] - (3.0 * tau + 1.5)).abs() < 1e-13 && (p[1] + h3).abs() < 1e-13);
        // −3τ + 4 + ξ evaluated numerically.
        let i = u1.embed_int::<f64>();
        assert!((i[0] - (-3.0 * tau + 4.5)).abs() < 1e-13 && (i[1] - h3).abs() < 1e-13);

        let xl = spec_el("ξλ");
        let s15 = 15f64.sqrt();
        let (s3, s5) = (3f64.sqrt(), 5f64.sqrt());
        let p = xl.embed_phys::<f64>();
        assert!((p[0] - (4.0 + s15) / 2.0).abs() < 1e-13);
        assert!((p[1] - (4.0 * s3 + 3.0 * s5) / 2.0).abs() < 1e-13);
        let i = xl.embed_int::<f64>();
        assert!((i[0] - (4.0 - s15) / 2.0).abs() < 1e-13);
        assert!((i[1] - (-4.0 * s3 + 3.0 * s5) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn exact_embedding_agrees_with_numeric() {
        for (field, s) in [(FieldId::Cap, "3τ+2-ξ"), (FieldId::Spectre, "-1-ξ+λ-2ξλ"), (FieldId::Silver, "3-5√2")] {
            let a = AlgebraicElement::parse(field, s).unwrap();
            for (ex, num) in [
                (a.embed_phys_exact(), a.embed_phys::<f64>()),
                (a.embed_int_exact(), a.embed_int::<f64>()),
            ] {
                for (e, n) in ex.iter().zip(num) {
                    assert!((e.to_f64() - n).abs() < 1e-12, "{a} {}", e);
                }
            }
        }
    }

    #[test]
    fn inner_product_is_minkowski_dot() {
        let a = cap("3τ+2-ξ");
        let b = cap("1+3τξ+ξ");
        let ip = rational_to_f64(&a.inner(&b).unwrap());
        let (pa, pb) = (a.embed_phys::<f64>(), b.embed_phys::<f64>());
        let (ia, ib) = (a.embed_int::<f64>(), b.embed_int::<f64>());
        let dot = pa[0] * pb[0] + pa[1] * pb[1] + ia[0] * ib[0] + ia[1] * ib[1];
        assert!((ip - dot).abs() < 1e-11);
    }
}

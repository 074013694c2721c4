//! Exact rational scalars and coordinate-keyed sparse matrices.
//!
//! Every matrix entry produced by the exact layer lives here. Matrices never
//! store an explicit zero, so two matrices are equal iff their entry maps are
//! equal, and "the residual vanishes" is the same as "the residual has no
//! entries".

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BiError, Result};

/// Arbitrary-precision rational, always stored reduced with a positive
/// denominator.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"`. Floats are rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || BiError::ParseRational(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketKind {
    Commutator,
    Anticommutator,
}

#[derive(Clone, PartialEq, Eq)]
pub struct SparseRatMatrix {
    nrows: usize,
    ncols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl fmt::Debug for SparseRatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseRatMatrix({}x{}", self.nrows, self.ncols)?;
        for ((i, j), v) in &self.entries {
            write!(f, ", ({i},{j})={v}")?;
        }
        write!(f, ")")
    }
}

impl SparseRatMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Rational::one())
    }

    pub fn scalar(n: usize, value: Rational) -> Self {
        Self::from_diagonal(std::iter::repeat_n(value, n).collect())
    }

    pub fn from_diagonal(diag: Vec<Rational>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in diag.into_iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Duplicate coordinates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for (i, j, v) in triplets {
            m.add_at(i, j, &v);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        assert!(i < self.nrows && j < self.ncols, "index ({i},{j}) out of bounds");
        if value.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), value);
        }
    }

    pub fn add_at(&mut self, i: usize, j: usize, value: &Rational) {
        if value.is_zero() {
            return;
        }
        assert!(i < self.nrows && j < self.ncols, "index ({i},{j}) out of bounds");
        match self.entries.get_mut(&(i, j)) {
            Some(slot) => {
                *slot += value;
                if slot.is_zero() {
                    self.entries.remove(&(i, j));
                }
            }
            None => {
                self.entries.insert((i, j), value.clone());
            }
        }
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(BiError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let mut out = self.clone();
        for (i, j, v) in other.iter() {
            out.add_at(i, j, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let mut out = self.clone();
        for (i, j, v) in other.iter() {
            out.add_at(i, j, &-v);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zeros(self.nrows, self.ncols);
        }
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self
                .entries
                .iter()
                .map(|(&k, v)| (k, v * factor))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self.entries.iter().map(|(&k, v)| (k, -v)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), v)| ((j, i), v.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(BiError::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut rows: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); other.nrows];
        for (k, j, v) in other.iter() {
            rows[k].push((j, v));
        }
        let mut acc: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (i, k, a) in self.iter() {
            for &(j, b) in &rows[k] {
                let term = a * b;
                acc.entry((i, j))
                    .and_modify(|slot| *slot += &term)
                    .or_insert(term);
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            entries: acc,
        })
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut row_pos = vec![usize::MAX; self.nrows];
        for (p, &r) in rows.iter().enumerate() {
            row_pos[r] = p;
        }
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (p, &c) in cols.iter().enumerate() {
            col_pos[c] = p;
        }
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, j, v) in self.iter() {
            let (pi, pj) = (row_pos[i], col_pos[j]);
            if pi != usize::MAX && pj != usize::MAX {
                out.entries.insert((pi, pj), v.clone());
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.keys().all(|&(i, j)| i == j)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = to_f64(v);
        }
        m
    }

    /// Largest absolute entry, exactly.
    pub fn max_abs(&self) -> Rational {
        self.entries
            .values()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Kronecker product: entry `(i*b.rows + k, j*b.cols + l)` is `a[i,j] * b[k,l]`.
pub fn kron(a: &SparseRatMatrix, b: &SparseRatMatrix) -> SparseRatMatrix {
    let mut out = SparseRatMatrix::zeros(a.nrows * b.nrows, a.ncols * b.ncols);
    for (i, j, x) in a.iter() {
        for (k, l, y) in b.iter() {
            out.entries
                .insert((i * b.nrows + k, j * b.ncols + l), x * y);
        }
    }
    out
}

/// `ab - ba` or `ab + ba`.
pub fn bracket(kind: BracketKind, a: &SparseRatMatrix, b: &SparseRatMatrix) -> Result<SparseRatMatrix> {
    if !a.is_square() {
        return Err(BiError::NotSquare(a.nrows, a.ncols));
    }
    if !b.is_square() {
        return Err(BiError::NotSquare(b.nrows, b.ncols));
    }
    a.check_same_shape(b, "bracket")?;
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    match kind {
        BracketKind::Commutator => ab.sub(&ba),
        BracketKind::Anticommutator => ab.add(&ba),
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, String)>,
}

impl Serialize for SparseRatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.nrows,
            cols: self.ncols,
            entries: self
                .iter()
                .map(|(i, j, v)| (i, j, format_rational(v)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseRatMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = MatrixJson::deserialize(d)?;
        let mut m = SparseRatMatrix::zeros(raw.rows, raw.cols);
        for (i, j, text) in raw.entries {
            if i >= raw.rows || j >= raw.cols {
                return Err(D::Error::custom(format!("entry ({i},{j}) out of bounds")));
            }
            let v = parse_rational(&text).map_err(D::Error::custom)?;
            m.add_at(i, j, &v);
        }
        Ok(m)
    }
}

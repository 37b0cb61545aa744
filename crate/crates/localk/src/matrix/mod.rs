//! Square matrices over localized algebras with filtration bookkeeping.

mod cert;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use cert::{
    block_permutation, check_idempotent, conjugate, elementary_expand, o_map, permutation, rotation, swap,
    ElementaryMatrix, IdempotentCert, InvertibleCert,
};

use crate::algebra::{FilteredHom, LocalizedAlgebra, Value};
use crate::error::{Error, Result};
use crate::scalars::Rational;

/// An `n x n` matrix over a localized algebra; its level is recomputed from the entries.
#[derive(Clone)]
pub struct FilteredMatrix {
    algebra: LocalizedAlgebra,
    n: usize,
    entries: Vec<Value>,
    level: u32,
}

impl PartialEq for FilteredMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.algebra == other.algebra && self.entries == other.entries
    }
}

impl Eq for FilteredMatrix {}

impl fmt::Debug for FilteredMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {} (level {})", self.render(), self.algebra, self.level)
    }
}

impl fmt::Display for FilteredMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl FilteredMatrix {
    fn from_trusted(algebra: &LocalizedAlgebra, n: usize, entries: Vec<Value>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        let level = entries.iter().map(|v| algebra.degree(v)).min().unwrap_or(algebra.max_level());
        FilteredMatrix { algebra: algebra.clone(), n, entries, level }
    }

    /// Builds a matrix from row-major entries, validating every payload.
    pub fn new(algebra: &LocalizedAlgebra, n: usize, entries: Vec<Value>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::SizeMismatch(format!("{} entries for a {n}x{n} matrix", entries.len())));
        }
        for v in &entries {
            algebra.validate(v)?;
        }
        Ok(Self::from_trusted(algebra, n, entries))
    }

    pub fn from_rows(algebra: &LocalizedAlgebra, rows: Vec<Vec<Value>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::SizeMismatch("matrix rows must form a square".into()));
        }
        Self::new(algebra, n, rows.into_iter().flatten().collect())
    }

    /// Matrix with entries `c_ij * 1`.
    pub fn from_scalars(algebra: &LocalizedAlgebra, rows: &[Vec<Rational>]) -> Self {
        let n = rows.len();
        let entries = rows.iter().flat_map(|r| r.iter().map(|c| algebra.scalar(c))).collect();
        Self::from_trusted(algebra, n, entries)
    }

    pub fn scalar_diag(algebra: &LocalizedAlgebra, diag: &[Rational]) -> Self {
        let n = diag.len();
        let mut entries = vec![algebra.zero(); n * n];
        for (i, c) in diag.iter().enumerate() {
            entries[i * n + i] = algebra.scalar(c);
        }
        Self::from_trusted(algebra, n, entries)
    }

    pub fn diag(algebra: &LocalizedAlgebra, diag: &[Value]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![algebra.zero(); n * n];
        for (i, v) in diag.iter().enumerate() {
            entries[i * n + i] = v.clone();
        }
        Self::new(algebra, n, entries)
    }

    pub fn identity(algebra: &LocalizedAlgebra, n: usize) -> Self {
        Self::scalar_diag(algebra, &vec![Rational::one(); n])
    }

    pub fn zero(algebra: &LocalizedAlgebra, n: usize) -> Self {
        Self::from_trusted(algebra, n, vec![algebra.zero(); n * n])
    }

    /// The projector `0_m + 1_n`.
    pub fn projector(algebra: &LocalizedAlgebra, zeros: usize, ones: usize) -> Self {
        let diag: Vec<Rational> =
            std::iter::repeat_n(Rational::zero(), zeros).chain(std::iter::repeat_n(Rational::one(), ones)).collect();
        Self::scalar_diag(algebra, &diag)
    }

    pub fn algebra(&self) -> &LocalizedAlgebra {
        &self.algebra
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn entries(&self) -> &[Value] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Value {
        &self.entries[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| self.algebra.is_zero(v))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(&self.algebra, self.n)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        self.algebra.check_same(&other.algebra)?;
        if self.n != other.n {
            return Err(Error::SizeMismatch(format!("{}x{} vs {}x{}", self.n, self.n, other.n, other.n)));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let n = self.n;
        let alg = &self.algebra;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = alg.zero();
                for k in 0..n {
                    let a = &self.entries[i * n + k];
                    if alg.is_zero(a) {
                        continue;
                    }
                    let b = &other.entries[k * n + j];
                    if !alg.is_zero(b) {
                        alg.mul_acc(&mut acc, a, b);
                    }
                }
                out.push(alg.finish(acc));
            }
        }
        Ok(Self::from_trusted(alg, n, out))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| self.algebra.add(a, b)).collect();
        Ok(Self::from_trusted(&self.algebra, self.n, entries))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| self.algebra.sub(a, b)).collect();
        Ok(Self::from_trusted(&self.algebra, self.n, entries))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let entries = self.entries.iter().map(|a| self.algebra.scale(c, a)).collect();
        Self::from_trusted(&self.algebra, self.n, entries)
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        &Self::identity(&self.algebra, self.n) - self
    }

    /// Block-diagonal sum `self + other`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.algebra.check_same(&other.algebra)?;
        let (a, b) = (self.n, other.n);
        let n = a + b;
        let mut entries = vec![self.algebra.zero(); n * n];
        for i in 0..a {
            for j in 0..a {
                entries[i * n + j] = self.get(i, j).clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                entries[(a + i) * n + a + j] = other.get(i, j).clone();
            }
        }
        Ok(Self::from_trusted(&self.algebra, n, entries))
    }

    /// Direct sum of a nonempty list of blocks.
    pub fn direct_sum_all<'a>(blocks: impl IntoIterator<Item = &'a FilteredMatrix>) -> Result<Self> {
        let mut it = blocks.into_iter();
        let first = it.next().ok_or_else(|| Error::SizeMismatch("empty direct sum".into()))?.clone();
        it.try_fold(first, |acc, b| acc.direct_sum(b))
    }

    /// Stabilization by a zero block.
    pub fn pad_zero(&self, k: usize) -> Self {
        self.direct_sum(&Self::zero(&self.algebra, k)).expect("same algebra")
    }

    /// Stabilization by an identity block.
    pub fn pad_one(&self, k: usize) -> Self {
        self.direct_sum(&Self::identity(&self.algebra, k)).expect("same algebra")
    }

    /// The `size x size` block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> Self {
        assert!(row + size <= self.n && col + size <= self.n, "block out of range");
        let entries =
            (0..size).flat_map(|i| (0..size).map(move |j| (i, j))).map(|(i, j)| self.get(row + i, col + j).clone());
        Self::from_trusted(&self.algebra, size, entries.collect())
    }

    /// Assembles a square grid of equally sized square blocks.
    pub fn from_blocks(grid: &[Vec<FilteredMatrix>]) -> Result<Self> {
        let k = grid.len();
        let first = grid.first().and_then(|r| r.first()).ok_or_else(|| Error::SizeMismatch("empty grid".into()))?;
        let (alg, b) = (first.algebra.clone(), first.n);
        if grid.iter().any(|r| r.len() != k) {
            return Err(Error::SizeMismatch("block grid must be square".into()));
        }
        let n = k * b;
        let mut entries = vec![alg.zero(); n * n];
        for (bi, row) in grid.iter().enumerate() {
            for (bj, m) in row.iter().enumerate() {
                alg.check_same(&m.algebra)?;
                if m.n != b {
                    return Err(Error::SizeMismatch("blocks must share one size".into()));
                }
                for i in 0..b {
                    for j in 0..b {
                        entries[(bi * b + i) * n + bj * b + j] = m.get(i, j).clone();
                    }
                }
            }
        }
        Ok(Self::from_trusted(&alg, n, entries))
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|t| self.get(t % n, t / n).clone()).collect();
        Self::from_trusted(&self.algebra, n, entries)
    }

    /// Entrywise image under a homomorphism.
    pub fn apply_hom(&self, h: &FilteredHom) -> Result<Self> {
        h.source().check_same(&self.algebra)?;
        Ok(Self::from_trusted(h.target(), self.n, self.entries.iter().map(|v| h.apply(v)).collect()))
    }

    /// Entrywise lift through the section of a homomorphism.
    pub fn lift_through(&self, h: &FilteredHom) -> Result<Self> {
        h.target().check_same(&self.algebra)?;
        let entries = self.entries.iter().map(|v| h.section(v)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_trusted(h.source(), self.n, entries))
    }

    /// Multiplicative lift `section(m) + 1 (x) complement`, available for
    /// restrictions and identities. Sends identity to identity and products
    /// to products.
    pub fn unital_lift(&self, h: &FilteredHom) -> Result<Option<Self>> {
        let Some(unit) = h.complement_unit() else { return Ok(None) };
        let base = self.lift_through(&h.with_section())?;
        let src = h.source();
        let n = self.n;
        let entries = (0..n * n)
            .map(|t| {
                let v = &base.entries[t];
                if t / n == t % n {
                    src.add(v, &unit)
                } else {
                    v.clone()
                }
            })
            .collect();
        Ok(Some(Self::from_trusted(src, n, entries)))
    }

    /// First entry where the two matrices differ, with both encodings.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize, String, String)> {
        if self.n != other.n {
            return Some((0, 0, format!("size {}", self.n), format!("size {}", other.n)));
        }
        let n = self.n;
        (0..n * n).find(|&t| self.entries[t] != other.entries[t]).map(|t| {
            (t / n, t % n, self.algebra.encode(&self.entries[t]), other.algebra.encode(&other.entries[t]))
        })
    }

    /// Canonical nested-array text encoding.
    pub fn render(&self) -> String {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let cells: Vec<String> = (0..self.n).map(|j| self.algebra.encode(self.get(i, j))).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

macro_rules! matrix_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&FilteredMatrix> for &FilteredMatrix {
            type Output = FilteredMatrix;
            fn $method(self, rhs: &FilteredMatrix) -> FilteredMatrix {
                self.$inner(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

matrix_binop!(Mul, mul, try_mul);
matrix_binop!(Add, add, try_add);
matrix_binop!(Sub, sub, try_sub);

impl Neg for &FilteredMatrix {
    type Output = FilteredMatrix;
    fn neg(self) -> FilteredMatrix {
        let entries = self.entries.iter().map(|a| self.algebra.neg(a)).collect();
        FilteredMatrix::from_trusted(&self.algebra, self.n, entries)
    }
}

/// Checked product; `level(a*b) >= min(level a, level b) - 1`.
pub fn mat_mul(a: &FilteredMatrix, b: &FilteredMatrix) -> Result<FilteredMatrix> {
    a.try_mul(b)
}

pub fn direct_sum(a: &FilteredMatrix, b: &FilteredMatrix) -> Result<FilteredMatrix> {
    a.direct_sum(b)
}

pub fn apply_hom_matrix(h: &FilteredHom, m: &FilteredMatrix) -> Result<FilteredMatrix> {
    m.apply_hom(h)
}

/// Lower bound on the level after `steps` multiplications starting at `level`.
pub fn level_floor(level: u32, steps: u32) -> u32 {
    level.saturating_sub(steps)
}

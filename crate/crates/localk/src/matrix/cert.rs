use super::FilteredMatrix;
use crate::algebra::{FilteredHom, LocalizedAlgebra, Value};
use crate::error::{Error, Result};
use crate::scalars::Rational;

/// A matrix together with an exactly verified two-sided inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvertibleCert {
    m: FilteredMatrix,
    m_inv: FilteredMatrix,
}

fn check_identity(prod: &FilteredMatrix, label: &str) -> Result<()> {
    let id = FilteredMatrix::identity(prod.algebra(), prod.size());
    match prod.first_difference(&id) {
        None => Ok(()),
        Some((row, col, value, _)) => Err(Error::NotInverse { row, col, product: label.into(), value }),
    }
}

impl InvertibleCert {
    /// Verifies `m * m_inv = m_inv * m = 1` exactly.
    pub fn new(m: FilteredMatrix, m_inv: FilteredMatrix) -> Result<Self> {
        check_identity(&m.try_mul(&m_inv)?, "m * m_inv")?;
        check_identity(&m_inv.try_mul(&m)?, "m_inv * m")?;
        Ok(InvertibleCert { m, m_inv })
    }

    /// For pairs that are inverse by construction (elementary inverses,
    /// permutations, products and sums of certified factors).
    pub(crate) fn trusted(m: FilteredMatrix, m_inv: FilteredMatrix) -> Self {
        InvertibleCert { m, m_inv }
    }

    pub fn identity(algebra: &LocalizedAlgebra, n: usize) -> Self {
        let id = FilteredMatrix::identity(algebra, n);
        Self::trusted(id.clone(), id)
    }

    /// Scalar diagonal `diag(c_i)` with nonzero entries.
    pub fn scalar_diag(algebra: &LocalizedAlgebra, diag: &[Rational]) -> Result<Self> {
        let inv = diag.iter().map(Rational::recip).collect::<Result<Vec<_>>>()?;
        Ok(Self::trusted(FilteredMatrix::scalar_diag(algebra, diag), FilteredMatrix::scalar_diag(algebra, &inv)))
    }

    pub fn matrix(&self) -> &FilteredMatrix {
        &self.m
    }

    pub fn inverse(&self) -> &FilteredMatrix {
        &self.m_inv
    }

    pub fn algebra(&self) -> &LocalizedAlgebra {
        self.m.algebra()
    }

    pub fn size(&self) -> usize {
        self.m.size()
    }

    pub fn level(&self) -> u32 {
        self.m.level().min(self.m_inv.level())
    }

    /// The certificate of the inverse.
    pub fn inv(&self) -> Self {
        Self::trusted(self.m_inv.clone(), self.m.clone())
    }

    /// Product `self * other` with inverse `other^-1 * self^-1`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self::trusted(self.m.try_mul(&other.m)?, other.m_inv.try_mul(&self.m_inv)?))
    }

    /// Product of a nonempty list of certificates, left to right.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a InvertibleCert>) -> Result<Self> {
        let mut it = factors.into_iter();
        let first = it.next().ok_or_else(|| Error::SizeMismatch("empty product".into()))?.clone();
        it.try_fold(first, |acc, f| acc.compose(f))
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        Ok(Self::trusted(self.m.direct_sum(&other.m)?, self.m_inv.direct_sum(&other.m_inv)?))
    }

    pub fn pad_one(&self, k: usize) -> Self {
        Self::trusted(self.m.pad_one(k), self.m_inv.pad_one(k))
    }

    /// Entrywise image; homomorphisms carry inverse pairs to inverse pairs.
    pub fn apply_hom(&self, h: &FilteredHom) -> Result<Self> {
        Ok(Self::trusted(self.m.apply_hom(h)?, self.m_inv.apply_hom(h)?))
    }

    /// Re-runs the exact inverse check.
    pub fn verify(&self) -> Result<()> {
        check_identity(&self.m.try_mul(&self.m_inv)?, "m * m_inv")?;
        check_identity(&self.m_inv.try_mul(&self.m)?, "m_inv * m")
    }

    /// Splits an O-shaped certificate `diag(a, b)` with `ab = 1` into its blocks.
    pub fn o_blocks(&self) -> Result<(FilteredMatrix, FilteredMatrix)> {
        let n = self.size();
        if n % 2 != 0 {
            return Err(Error::NotOShaped(format!("odd size {n}")));
        }
        let k = n / 2;
        let (a, b) = (self.m.block(0, 0, k), self.m.block(k, k, k));
        if !self.m.block(0, k, k).is_zero() || !self.m.block(k, 0, k).is_zero() {
            return Err(Error::NotOShaped("off-diagonal blocks are nonzero".into()));
        }
        let id = FilteredMatrix::identity(self.algebra(), k);
        if a.try_mul(&b)? != id || b.try_mul(&a)? != id {
            return Err(Error::NotOShaped("diagonal blocks are not mutually inverse".into()));
        }
        Ok((a, b))
    }

    pub fn is_o_shaped(&self) -> bool {
        self.o_blocks().is_ok()
    }
}

/// Verified idempotent matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentCert {
    p: FilteredMatrix,
}

impl IdempotentCert {
    pub fn matrix(&self) -> &FilteredMatrix {
        &self.p
    }

    pub fn into_matrix(self) -> FilteredMatrix {
        self.p
    }

    pub fn size(&self) -> usize {
        self.p.size()
    }

    pub fn level(&self) -> u32 {
        self.p.level()
    }

    pub fn algebra(&self) -> &LocalizedAlgebra {
        self.p.algebra()
    }

    /// `1 - p`, again idempotent.
    pub fn complement(&self) -> Self {
        IdempotentCert { p: self.p.complement() }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        Ok(IdempotentCert { p: self.p.direct_sum(&other.p)? })
    }

    pub fn pad_zero(&self, k: usize) -> Self {
        IdempotentCert { p: self.p.pad_zero(k) }
    }

    /// Conjugates and re-certifies.
    pub fn conjugate(&self, u: &InvertibleCert) -> Result<Self> {
        check_idempotent(&conjugate(&self.p, u)?)
    }

    pub fn apply_hom(&self, h: &FilteredHom) -> Result<Self> {
        check_idempotent(&self.p.apply_hom(h)?)
    }
}

/// Certifies `m * m = m`, reporting the first offending entry otherwise.
pub fn check_idempotent(m: &FilteredMatrix) -> Result<IdempotentCert> {
    let sq = m.try_mul(m)?;
    match sq.first_difference(m) {
        None => Ok(IdempotentCert { p: m.clone() }),
        Some((row, col, _, _)) => {
            let residual = m.algebra().sub(sq.get(row, col), m.get(row, col));
            Err(Error::NotIdempotent { row, col, residual: m.algebra().encode(&residual) })
        }
    }
}

/// `E_ij(a)`: the identity plus `a` at position `(i, j)`, `i != j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryMatrix {
    algebra: LocalizedAlgebra,
    n: usize,
    i: usize,
    j: usize,
    a: Value,
}

impl ElementaryMatrix {
    pub fn new(algebra: &LocalizedAlgebra, n: usize, i: usize, j: usize, a: Value) -> Result<Self> {
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidIndices(format!("({i}, {j}) in size {n}")));
        }
        algebra.validate(&a)?;
        Ok(ElementaryMatrix { algebra: algebra.clone(), n, i, j, a })
    }

    pub fn entry(&self) -> &Value {
        &self.a
    }

    pub fn position(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    fn build(&self, a: Value) -> FilteredMatrix {
        let mut entries = FilteredMatrix::identity(&self.algebra, self.n).entries;
        entries[self.i * self.n + self.j] = a;
        FilteredMatrix::from_trusted(&self.algebra, self.n, entries)
    }

    pub fn to_matrix(&self) -> FilteredMatrix {
        self.build(self.a.clone())
    }

    /// Certificate with inverse `E_ij(-a)`.
    pub fn expand(&self) -> InvertibleCert {
        InvertibleCert::trusted(self.build(self.a.clone()), self.build(self.algebra.neg(&self.a)))
    }
}

pub fn elementary_expand(e: &ElementaryMatrix) -> InvertibleCert {
    e.expand()
}

/// `u p u^-1`; level at least `min(level p, level u) - 2`.
pub fn conjugate(p: &FilteredMatrix, u: &InvertibleCert) -> Result<FilteredMatrix> {
    u.matrix().try_mul(p)?.try_mul(u.inverse())
}

/// `O(u) = diag(u, u^-1)` with inverse `diag(u^-1, u)`.
pub fn o_map(u: &InvertibleCert) -> InvertibleCert {
    InvertibleCert::trusted(
        u.matrix().direct_sum(u.inverse()).expect("same algebra"),
        u.inverse().direct_sum(u.matrix()).expect("same algebra"),
    )
}

fn signed_blocks(algebra: &LocalizedAlgebra, n: usize, signs: [[i64; 2]; 2]) -> FilteredMatrix {
    let blocks: Vec<Vec<FilteredMatrix>> = signs
        .iter()
        .map(|row| {
            row.iter()
                .map(|&s| FilteredMatrix::scalar_diag(algebra, &vec![Rational::from_int(s); n]))
                .collect()
        })
        .collect();
    FilteredMatrix::from_blocks(&blocks).expect("uniform blocks")
}

/// Block rotation `[[0, -1], [1, 0]]`; conjugation turns `A + B` into `B + A`.
pub fn rotation(algebra: &LocalizedAlgebra, n: usize) -> InvertibleCert {
    InvertibleCert::trusted(signed_blocks(algebra, n, [[0, -1], [1, 0]]), signed_blocks(algebra, n, [[0, 1], [-1, 0]]))
}

/// Block swap `[[0, 1], [1, 0]]`, its own inverse.
pub fn swap(algebra: &LocalizedAlgebra, n: usize) -> InvertibleCert {
    let s = signed_blocks(algebra, n, [[0, 1], [1, 0]]);
    InvertibleCert::trusted(s.clone(), s)
}

/// Permutation matrix sending basis vector `j` to `perm[j]`, so that
/// `(P M P^-1)[perm[r]][perm[c]] = M[r][c]`.
pub fn permutation(algebra: &LocalizedAlgebra, perm: &[usize]) -> Result<InvertibleCert> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidIndices(format!("{perm:?} is not a permutation")));
        }
    }
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for (j, &p) in perm.iter().enumerate() {
        rows[p][j] = Rational::one();
    }
    let m = FilteredMatrix::from_scalars(algebra, &rows);
    let inv = m.transpose();
    Ok(InvertibleCert::trusted(m, inv))
}

/// Permutation reordering a block-diagonal sum: conjugating
/// `B_0 + B_1 + ...` (block sizes `sizes`) yields `B_order[0] + B_order[1] + ...`.
pub fn block_permutation(algebra: &LocalizedAlgebra, sizes: &[usize], order: &[usize]) -> Result<InvertibleCert> {
    if order.len() != sizes.len() {
        return Err(Error::InvalidIndices(format!("order {order:?} does not match {} blocks", sizes.len())));
    }
    let mut starts = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for s in sizes {
        starts.push(acc);
        acc += s;
    }
    let mut perm = vec![usize::MAX; acc];
    let mut next = 0;
    for &b in order {
        if b >= sizes.len() {
            return Err(Error::InvalidIndices(format!("block {b} out of range")));
        }
        for t in 0..sizes[b] {
            if perm[starts[b] + t] != usize::MAX {
                return Err(Error::InvalidIndices(format!("block {b} repeated")));
            }
            perm[starts[b] + t] = next;
            next += 1;
        }
    }
    permutation(algebra, &perm)
}

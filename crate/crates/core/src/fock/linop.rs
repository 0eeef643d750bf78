use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::basis::FockBasis;
use crate::dd::{self, cx, real, Dd, Scalar};
use crate::error::{Error, Result};

/// How far an operator may move the total occupation number.
///
/// `up` is the largest increase of `n` carried by any nonzero matrix element,
/// `down` the largest decrease. Products add grades, sums take the maximum,
/// adjoints swap the two. The values are upper bounds, never underestimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grade {
    pub up: usize,
    pub down: usize,
}

impl Grade {
    pub const ZERO: Grade = Grade { up: 0, down: 0 };

    pub const fn new(up: usize, down: usize) -> Self {
        Grade { up, down }
    }

    /// Guard width: the highest total number any intermediate state can reach
    /// above the starting state while this operator is applied.
    pub fn width(&self) -> usize {
        self.up
    }

    pub fn compose(self, rhs: Grade) -> Grade {
        Grade::new(self.up + rhs.up, self.down + rhs.down)
    }

    pub fn join(self, rhs: Grade) -> Grade {
        Grade::new(self.up.max(rhs.up), self.down.max(rhs.down))
    }

    pub fn swapped(self) -> Grade {
        Grade::new(self.down, self.up)
    }

    fn admits(&self, row_n: usize, col_n: usize) -> bool {
        if row_n >= col_n {
            row_n - col_n <= self.up
        } else {
            col_n - row_n <= self.down
        }
    }
}

/// Which boson mode a ladder operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Lower,
    Raise,
}

/// Dense column-major block coupling the `col_n` states to the `row_n` states.
#[derive(Clone, PartialEq)]
pub(crate) struct Block {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Block {
    fn zeros(rows: usize, cols: usize) -> Self {
        Block {
            rows,
            cols,
            data: vec![cx(0.0, 0.0); rows * cols],
        }
    }

    #[inline]
    pub(crate) fn get(&self, r: usize, c: usize) -> Scalar {
        self.data[c * self.rows + r]
    }

    #[inline]
    fn get_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.data[c * self.rows + r]
    }

    fn has_nonzero(&self) -> bool {
        self.data.iter().any(|z| !dd::is_zero(z))
    }

    fn map(&self, f: impl Fn(Scalar) -> Scalar) -> Block {
        Block {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn conj_transpose(&self) -> Block {
        let mut out = Block::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                *out.get_mut(c, r) = self.get(r, c).conj();
            }
        }
        out
    }

    fn add_assign(&mut self, other: &Block, sign: Dd) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !dd::is_zero(b) {
                *a = *a + *b * real(sign);
            }
        }
    }

    /// `self += a * b`, skipping structural zeros of both factors.
    fn gemm_acc(&mut self, a: &Block, b: &Block) {
        debug_assert_eq!(a.cols, b.rows);
        let rows = self.rows;
        for j in 0..b.cols {
            let c_col = &mut self.data[j * rows..(j + 1) * rows];
            for q in 0..b.rows {
                let bv = b.data[j * b.rows + q];
                if dd::is_zero(&bv) {
                    continue;
                }
                let a_col = &a.data[q * rows..(q + 1) * rows];
                for (cv, av) in c_col.iter_mut().zip(a_col) {
                    if !dd::is_zero(av) {
                        *cv = *cv + *av * bv;
                    }
                }
            }
        }
    }
}

/// Complex operator on a truncated Fock basis, stored as dense blocks between
/// total-number sectors inside its grade band.
#[derive(Clone)]
pub struct LinOp {
    basis: Arc<FockBasis>,
    grade: Grade,
    blocks: BTreeMap<(usize, usize), Block>,
}

impl fmt::Debug for LinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinOp")
            .field("n_max", &self.basis.n_max())
            .field("grade", &self.grade)
            .field("blocks", &self.blocks.len())
            .finish()
    }
}

impl LinOp {
    pub fn zero(basis: &Arc<FockBasis>, grade: Grade) -> Self {
        LinOp {
            basis: basis.clone(),
            grade,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Self {
        Self::scalar(basis, cx(1.0, 0.0))
    }

    /// `value` times the identity.
    pub fn scalar(basis: &Arc<FockBasis>, value: Scalar) -> Self {
        let mut op = Self::zero(basis, Grade::ZERO);
        if dd::is_zero(&value) {
            return op;
        }
        for n in 0..=basis.n_max() {
            let mut b = Block::zeros(n + 1, n + 1);
            for p in 0..=n {
                *b.get_mut(p, p) = value;
            }
            op.blocks.insert((n, n), b);
        }
        op
    }

    /// Diagonal operator with `values[n]` on every state of total number `n`.
    pub(crate) fn diagonal_by_total(basis: &Arc<FockBasis>, values: &[Scalar]) -> Self {
        let mut op = Self::zero(basis, Grade::ZERO);
        for (n, v) in values.iter().enumerate() {
            if dd::is_zero(v) {
                continue;
            }
            let mut b = Block::zeros(n + 1, n + 1);
            for p in 0..=n {
                *b.get_mut(p, p) = *v;
            }
            op.blocks.insert((n, n), b);
        }
        op
    }

    /// Builds an operator from `(row index, column index, value)` triples.
    ///
    /// Panics if an entry falls outside the declared grade band.
    pub fn from_entries(
        basis: &Arc<FockBasis>,
        grade: Grade,
        entries: impl IntoIterator<Item = (usize, usize, Scalar)>,
    ) -> Self {
        let mut op = Self::zero(basis, grade);
        for (r, c, v) in entries {
            let (rs, cs) = (basis.state(r), basis.state(c));
            let (rn, cn) = (rs.total(), cs.total());
            assert!(
                grade.admits(rn, cn),
                "entry ({r},{c}) couples n={cn} to n={rn}, outside grade {grade:?}"
            );
            let blk = op
                .blocks
                .entry((rn, cn))
                .or_insert_with(|| Block::zeros(rn + 1, cn + 1));
            let cell = blk.get_mut(
                FockBasis::offset_in_block(rs.n1, rs.n2),
                FockBasis::offset_in_block(cs.n1, cs.n2),
            );
            *cell = *cell + v;
        }
        op.prune();
        op
    }

    /// Annihilation (`Lower`) or creation (`Raise`) operator of one mode.
    ///
    /// Creation operators are hard-truncated: components that would leave the
    /// basis are dropped.
    pub fn ladder(basis: &Arc<FockBasis>, mode: Mode, kind: LadderKind) -> Self {
        let entries = basis.states().iter().enumerate().filter_map(|(c, s)| {
            let (target, k) = match mode {
                Mode::One if s.n1 > 0 => ((s.n1 - 1, s.n2), s.n1),
                Mode::Two if s.n2 > 0 => ((s.n1, s.n2 - 1), s.n2),
                _ => return None,
            };
            let r = basis.index_of(target.0, target.1)?;
            Some((r, c, real(Dd::new(k as f64).sqrt())))
        });
        let lower = Self::from_entries(basis, Grade::new(0, 1), entries);
        match kind {
            LadderKind::Lower => lower,
            LadderKind::Raise => lower.adjoint(),
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn grade(&self) -> Grade {
        self.grade
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub(crate) fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Block)> {
        self.blocks.iter()
    }

    fn prune(&mut self) {
        self.blocks.retain(|_, b| b.has_nonzero());
    }

    fn check_basis(&self, other: &LinOp) -> Result<()> {
        if self.basis.n_max() != other.basis.n_max() {
            return Err(Error::BasisMismatch {
                left: self.basis.n_max(),
                right: other.basis.n_max(),
            });
        }
        Ok(())
    }

    pub fn entry(&self, row: usize, col: usize) -> Scalar {
        let (rs, cs) = (self.basis.state(row), self.basis.state(col));
        match self.blocks.get(&(rs.total(), cs.total())) {
            Some(b) => b.get(
                FockBasis::offset_in_block(rs.n1, rs.n2),
                FockBasis::offset_in_block(cs.n1, cs.n2),
            ),
            None => cx(0.0, 0.0),
        }
    }

    pub fn entry_c64(&self, row: usize, col: usize) -> Complex64 {
        dd::to_c64(self.entry(row, col))
    }

    /// All nonzero entries as `(row, col, value)`, sorted by row then column.
    pub fn nonzeros(&self) -> Vec<(usize, usize, Scalar)> {
        let mut out = Vec::new();
        for (&(rn, cn), b) in &self.blocks {
            let (r0, c0) = (
                self.basis.block_range(rn).start,
                self.basis.block_range(cn).start,
            );
            for c in 0..b.cols {
                for r in 0..b.rows {
                    let v = b.get(r, c);
                    if !dd::is_zero(&v) {
                        out.push((r0 + r, c0 + c, v));
                    }
                }
            }
        }
        out.sort_by_key(|&(r, c, _)| (r, c));
        out
    }

    /// Entries coupling total numbers outside the declared grade band.
    pub fn band_violations(&self) -> usize {
        self.nonzeros()
            .iter()
            .filter(|&&(r, c, _)| {
                !self
                    .grade
                    .admits(self.basis.state(r).total(), self.basis.state(c).total())
            })
            .count()
    }

    pub fn adjoint(&self) -> LinOp {
        LinOp {
            basis: self.basis.clone(),
            grade: self.grade.swapped(),
            blocks: self
                .blocks
                .iter()
                .map(|(&(r, c), b)| ((c, r), b.conj_transpose()))
                .collect(),
        }
    }

    pub fn scale(&self, s: Scalar) -> LinOp {
        let mut out = LinOp {
            basis: self.basis.clone(),
            grade: self.grade,
            blocks: self
                .blocks
                .iter()
                .map(|(&k, b)| (k, b.map(|z| z * s)))
                .collect(),
        };
        out.prune();
        out
    }

    fn combine(&self, other: &LinOp, sign: Dd) -> Result<LinOp> {
        self.check_basis(other)?;
        let mut blocks = self.blocks.clone();
        for (&k, b) in &other.blocks {
            match blocks.get_mut(&k) {
                Some(acc) => acc.add_assign(b, sign),
                None => {
                    blocks.insert(k, b.map(|z| z * real(sign)));
                }
            }
        }
        let mut out = LinOp {
            basis: self.basis.clone(),
            grade: self.grade.join(other.grade),
            blocks,
        };
        out.prune();
        Ok(out)
    }

    pub fn checked_add(&self, other: &LinOp) -> Result<LinOp> {
        self.combine(other, Dd::ONE)
    }

    pub fn checked_sub(&self, other: &LinOp) -> Result<LinOp> {
        self.combine(other, -Dd::ONE)
    }

    /// Operator product `self * rhs` (`rhs` acts first).
    pub fn checked_mul(&self, rhs: &LinOp) -> Result<LinOp> {
        self.check_basis(rhs)?;
        let mut left_by_col: BTreeMap<usize, Vec<(usize, &Block)>> = BTreeMap::new();
        for (&(r, c), b) in &self.blocks {
            left_by_col.entry(c).or_default().push((r, b));
        }
        let mut right_by_col: BTreeMap<usize, Vec<(usize, &Block)>> = BTreeMap::new();
        for (&(r, c), b) in &rhs.blocks {
            right_by_col.entry(c).or_default().push((r, b));
        }
        let cols: Vec<(usize, Vec<(usize, &Block)>)> = right_by_col.into_iter().collect();
        let produced: Vec<((usize, usize), Block)> = cols
            .par_iter()
            .flat_map_iter(|(col_n, mids)| {
                let mut acc: BTreeMap<usize, Block> = BTreeMap::new();
                for (mid_n, rb) in mids {
                    let Some(lefts) = left_by_col.get(mid_n) else {
                        continue;
                    };
                    for (row_n, lb) in lefts {
                        acc.entry(*row_n)
                            .or_insert_with(|| Block::zeros(lb.rows, rb.cols))
                            .gemm_acc(lb, rb);
                    }
                }
                acc.into_iter()
                    .filter(|(_, b)| b.has_nonzero())
                    .map(move |(row_n, b)| ((row_n, *col_n), b))
            })
            .collect();
        Ok(LinOp {
            basis: self.basis.clone(),
            grade: self.grade.compose(rhs.grade),
            blocks: produced.into_iter().collect(),
        })
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &LinOp) -> Result<LinOp> {
        self.checked_mul(other)?
            .checked_sub(&other.checked_mul(self)?)
    }

    /// `{self, other} = self·other + other·self`.
    pub fn anticommutator(&self, other: &LinOp) -> Result<LinOp> {
        self.checked_mul(other)?
            .checked_add(&other.checked_mul(self)?)
    }

    /// Applies `f` entrywise with the total number of the row and column block.
    pub(crate) fn try_map_blocks(
        &self,
        mut f: impl FnMut(usize, usize) -> Result<Scalar>,
    ) -> Result<LinOp> {
        let mut blocks = BTreeMap::new();
        for (&(r, c), b) in &self.blocks {
            let s = f(r, c)?;
            blocks.insert((r, c), b.map(|z| z * s));
        }
        let mut out = LinOp {
            basis: self.basis.clone(),
            grade: self.grade,
            blocks,
        };
        out.prune();
        Ok(out)
    }

    /// Largest `|A − A†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self - &self.adjoint();
        d.max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|b| b.data.iter())
            .map(dd::abs)
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `self · v` for a state vector indexed like the basis.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x: Vec<Scalar> = v.iter().map(|&z| dd::from_c64(z)).collect();
        self.apply_dd(&x).into_iter().map(dd::to_c64).collect()
    }

    pub fn apply_dd(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.dim(), "vector length does not match basis");
        let mut y = vec![cx(0.0, 0.0); v.len()];
        for (&(rn, cn), b) in &self.blocks {
            let (r0, c0) = (
                self.basis.block_range(rn).start,
                self.basis.block_range(cn).start,
            );
            for c in 0..b.cols {
                let xv = v[c0 + c];
                if dd::is_zero(&xv) {
                    continue;
                }
                for r in 0..b.rows {
                    let a = b.get(r, c);
                    if !dd::is_zero(&a) {
                        y[r0 + r] = y[r0 + r] + a * xv;
                    }
                }
            }
        }
        y
    }

    /// Dense `f64` submatrix on the given row and column state indices.
    pub fn to_dense(&self, rows: &[usize], cols: &[usize]) -> DMatrix<Complex64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.entry_c64(rows[i], cols[j])
        })
    }

    pub fn to_dense_full(&self) -> DMatrix<Complex64> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.to_dense(&all, &all)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&LinOp> for &LinOp {
            type Output = LinOp;
            fn $method(self, rhs: &LinOp) -> LinOp {
                self.$checked(rhs)
                    .expect("operator arithmetic across bases")
            }
        }
        impl $tr<LinOp> for LinOp {
            type Output = LinOp;
            fn $method(self, rhs: LinOp) -> LinOp {
                (&self)
                    .$checked(&rhs)
                    .expect("operator arithmetic across bases")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Mul<Scalar> for &LinOp {
    type Output = LinOp;
    fn mul(self, s: Scalar) -> LinOp {
        self.scale(s)
    }
}

impl Mul<f64> for &LinOp {
    type Output = LinOp;
    fn mul(self, s: f64) -> LinOp {
        self.scale(cx(s, 0.0))
    }
}

impl Neg for &LinOp {
    type Output = LinOp;
    fn neg(self) -> LinOp {
        self.scale(cx(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::new(n).unwrap())
    }

    fn c(re: f64) -> Scalar {
        cx(re, 0.0)
    }

    #[test]
    fn ladder_examples() {
        let b = basis(4);
        let a1 = LinOp::ladder(&b, Mode::One, LadderKind::Lower);
        let a2d = LinOp::ladder(&b, Mode::Two, LadderKind::Raise);
        let i10 = b.index_of(1, 0).unwrap();
        let i00 = b.index_of(0, 0).unwrap();
        let i01 = b.index_of(0, 1).unwrap();
        let i02 = b.index_of(0, 2).unwrap();
        assert_eq!(a1.entry(i00, i10), c(1.0));
        assert!((a2d.entry_c64(i02, i01).re - 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(a1.grade(), Grade::new(0, 1));
        assert_eq!(a2d.grade(), Grade::new(1, 0));
        // hard truncation: nothing leaves the basis
        let top = b.index_of(0, 4).unwrap();
        let col: Vec<_> = a2d.nonzeros().into_iter().filter(|e| e.1 == top).collect();
        assert!(col.is_empty());
    }

    #[test]
    fn algebra_basics() {
        let b = basis(5);
        let a1 = LinOp::ladder(&b, Mode::One, LadderKind::Lower);
        let a2 = LinOp::ladder(&b, Mode::Two, LadderKind::Lower);
        let prod = &a1 * &a2.adjoint();
        assert!(a1.commutator(&a1).unwrap().is_zero());
        let back = a1.adjoint().adjoint();
        assert!((&back - &a1).is_zero());
        // (AB)† = B†A†
        let lhs = prod.adjoint();
        let rhs = &a2 * &a1.adjoint();
        assert!((&lhs - &rhs).max_abs() < 1e-30);
        assert_eq!(prod.grade(), Grade::new(1, 1));
        assert_eq!(prod.band_violations(), 0);
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let a = LinOp::identity(&basis(3));
        let b = LinOp::identity(&basis(4));
        assert_eq!(
            a.checked_add(&b).unwrap_err(),
            Error::BasisMismatch { left: 3, right: 4 }
        );
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn dense_matches_entry_lookup() {
        let b = basis(3);
        let a1 = LinOp::ladder(&b, Mode::One, LadderKind::Lower);
        let d = a1.to_dense_full();
        let v: Vec<Complex64> = (0..b.dim())
            .map(|i| Complex64::new(i as f64, 1.0))
            .collect();
        let w = a1.apply(&v);
        let dv = &d * nalgebra::DVector::from_vec(v.clone());
        for i in 0..b.dim() {
            assert!((w[i] - dv[i]).norm() < 1e-14);
        }
    }
}

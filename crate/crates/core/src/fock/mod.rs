//! Truncated two-mode Fock space and the graded operator algebra built on it.
//!
//! Units are `ħ = 1` and sphere radius `a = 1` throughout.

mod basis;
mod linop;
mod vecop;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

pub use basis::{FockBasis, FockState};
pub use linop::{Grade, LadderKind, LinOp, Mode};
pub use vecop::{cross, dot, levi_civita, VecOp};

use crate::dd::{self, Dd, Scalar};
use crate::error::{Error, Result};

/// `S = (n + 1)/2` as a double-double.
pub fn s_of(n: usize) -> Dd {
    Dd::new(FockBasis::s_value(n))
}

fn eval_s_fn(f: &impl Fn(Dd) -> Scalar, n: usize) -> Result<Scalar> {
    let v = f(s_of(n));
    if dd::is_finite(&v) {
        Ok(v)
    } else {
        Err(Error::SingularFunction {
            n,
            s: FockBasis::s_value(n),
        })
    }
}

/// Diagonal operator `f(S)` with entry `f((n+1)/2)` on every state of total `n`.
///
/// Fails, naming the offending `n`, if `f` is not finite at some occurring `S`.
pub fn diag_s_fn(basis: &Arc<FockBasis>, f: impl Fn(Dd) -> Scalar) -> Result<LinOp> {
    let values = (0..=basis.n_max())
        .map(|n| eval_s_fn(&f, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinOp::diagonal_by_total(basis, &values))
}

/// `f(S) · M` without materializing `f(S)`: each entry `⟨n'|M|n⟩` is scaled by
/// `f((n'+1)/2)`, so `f` is only evaluated on total numbers `M` actually reaches.
pub fn fused_apply(f: impl Fn(Dd) -> Scalar, monomial: &LinOp) -> Result<LinOp> {
    monomial.try_map_blocks(|row_n, _| eval_s_fn(&f, row_n))
}

/// `M · f(S)`: each entry `⟨n'|M|n⟩` is scaled by `f((n+1)/2)`.
pub fn fused_apply_right(monomial: &LinOp, f: impl Fn(Dd) -> Scalar) -> Result<LinOp> {
    monomial.try_map_blocks(|_, col_n| eval_s_fn(&f, col_n))
}

/// Restriction of the basis by parity of the total number `n = 2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    All,
    /// Even `n`: the states with a spherical-harmonic counterpart.
    IntegerJ,
    /// Odd `n`.
    HalfIntegerJ,
}

impl Sector {
    pub fn admits(&self, n: usize) -> bool {
        match self {
            Sector::All => true,
            Sector::IntegerJ => n.is_multiple_of(2),
            Sector::HalfIntegerJ => n % 2 == 1,
        }
    }
}

/// A set of whole total-number blocks of a basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subspace {
    totals: Vec<usize>,
    warning: Option<String>,
}

impl Subspace {
    pub fn from_totals(totals: impl IntoIterator<Item = usize>) -> Self {
        let totals: BTreeSet<usize> = totals.into_iter().collect();
        Subspace {
            totals: totals.into_iter().collect(),
            warning: None,
        }
    }

    pub fn full(basis: &FockBasis) -> Self {
        Self::from_totals(0..=basis.n_max())
    }

    pub fn totals(&self) -> &[usize] {
        &self.totals
    }

    pub fn contains_total(&self, n: usize) -> bool {
        self.totals.binary_search(&n).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }

    /// Number of basis states covered.
    pub fn dim(&self) -> usize {
        self.totals.iter().map(|n| n + 1).sum()
    }

    pub fn indices(&self, basis: &FockBasis) -> Vec<usize> {
        self.totals
            .iter()
            .filter(|&&n| n <= basis.n_max())
            .flat_map(|&n| basis.block_range(n))
            .collect()
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    pub fn restrict(&self, sector: Sector) -> Subspace {
        Subspace {
            totals: self
                .totals
                .iter()
                .copied()
                .filter(|&n| sector.admits(n))
                .collect(),
            warning: self.warning.clone(),
        }
    }

    /// Keeps only blocks with total number at most `max_total`.
    pub fn cap(&self, max_total: usize) -> Subspace {
        Subspace {
            totals: self
                .totals
                .iter()
                .copied()
                .filter(|&n| n <= max_total)
                .collect(),
            warning: self.warning.clone(),
        }
    }
}

/// All states with `n <= n_max − width`, on which an expression of guard
/// width `width` is free of truncation error.
pub fn guarded_subspace(basis: &FockBasis, width: usize) -> Subspace {
    if width > basis.n_max() {
        return Subspace {
            totals: Vec::new(),
            warning: Some(format!(
                "guard width {width} exceeds n_max {}; no state is truncation-exact",
                basis.n_max()
            )),
        };
    }
    Subspace::from_totals(0..=basis.n_max() - width)
}

/// `max |(expr − reference)_ij| / (1 + max |reference_ij|)` over `i, j` in the subspace.
pub fn residual(expr: &LinOp, reference: &LinOp, subspace: &Subspace) -> f64 {
    let keys: BTreeSet<(usize, usize)> = expr
        .blocks()
        .chain(reference.blocks())
        .map(|(&k, _)| k)
        .filter(|&(r, c)| subspace.contains_total(r) && subspace.contains_total(c))
        .collect();
    let e_blocks: std::collections::BTreeMap<_, _> = expr.blocks().collect();
    let r_blocks: std::collections::BTreeMap<_, _> = reference.blocks().collect();
    let mut max_diff = 0.0f64;
    let mut max_ref = 0.0f64;
    for k in keys {
        let (rows, cols) = (k.0 + 1, k.1 + 1);
        let e = e_blocks.get(&k);
        let r = r_blocks.get(&k);
        for c in 0..cols {
            for i in 0..rows {
                let ev = e.map_or(dd::cx(0.0, 0.0), |b| b.get(i, c));
                let rv = r.map_or(dd::cx(0.0, 0.0), |b| b.get(i, c));
                max_diff = max_diff.max(dd::abs(&(ev - rv)));
                max_ref = max_ref.max(dd::abs(&rv));
            }
        }
    }
    max_diff / (1.0 + max_ref)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::{cx, real};

    fn basis(n: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::new(n).unwrap())
    }

    #[test]
    fn guarded_subspace_examples() {
        let b = basis(40);
        let g = guarded_subspace(&b, 4);
        assert_eq!(g.totals().last(), Some(&36));
        assert_eq!(g.dim(), 37 * 38 / 2);
        assert_eq!(guarded_subspace(&b, 0).dim(), b.dim());
        let small = basis(2);
        let e = guarded_subspace(&small, 6);
        assert!(e.is_empty());
        assert!(e.warning().is_some());
    }

    #[test]
    fn canonical_commutators_on_guard() {
        let b = basis(12);
        let a = [
            LinOp::ladder(&b, Mode::One, LadderKind::Lower),
            LinOp::ladder(&b, Mode::Two, LadderKind::Lower),
        ];
        let id = LinOp::identity(&b);
        let zero = LinOp::zero(&b, Grade::ZERO);
        let g = guarded_subspace(&b, 1);
        for i in 0..2 {
            for j in 0..2 {
                let c = a[i].commutator(&a[j].adjoint()).unwrap();
                let want = if i == j { &id } else { &zero };
                assert!(residual(&c, want, &g) < 1e-14);
                assert!(residual(&a[i].commutator(&a[j]).unwrap(), &zero, &g) < 1e-14);
            }
        }
        // the top block is where truncation shows up
        let c = a[0].commutator(&a[0].adjoint()).unwrap();
        assert!(residual(&c, &id, &Subspace::full(&b)) > 0.1);
    }

    #[test]
    fn residual_of_shifted_reference() {
        let b = basis(4);
        let a1 = LinOp::ladder(&b, Mode::One, LadderKind::Lower);
        let full = Subspace::full(&b);
        assert_eq!(residual(&a1, &a1, &full), 0.0);
        let eps = 1e-3;
        let shifted = &a1 + &LinOp::scalar(&b, cx(eps, 0.0));
        let maxref = a1.max_abs();
        let r = residual(&shifted, &a1, &full);
        assert!((r - eps / (1.0 + maxref)).abs() < 1e-15);
    }

    #[test]
    fn diag_s_fn_values_and_singularity() {
        let b = basis(3);
        let s = diag_s_fn(&b, real).unwrap();
        let i = b.index_of(1, 1).unwrap();
        assert_eq!(s.entry_c64(i, i).re, 1.5);
        let j = diag_s_fn(&b, |s| real(s - Dd::new(0.5))).unwrap();
        let casimir = diag_s_fn(&b, |s| real(s.sqr() - Dd::new(0.25))).unwrap();
        for (k, st) in b.states().iter().enumerate() {
            let jv = st.total() as f64 / 2.0;
            assert_eq!(j.entry_c64(k, k).re, jv);
            assert_eq!(casimir.entry_c64(k, k).re, jv * (jv + 1.0));
        }
        let err = diag_s_fn(&b, |s| real((s * (s - Dd::ONE)).sqrt().recip())).unwrap_err();
        assert!(matches!(
            err,
            Error::SingularFunction { n: 0, .. } | Error::SingularFunction { n: 1, .. }
        ));
    }

    #[test]
    fn singular_at_s_equal_one_is_reported() {
        let b = basis(3);
        // finite (negative under root gives NaN) everywhere but n = 1
        let err = diag_s_fn(&b, |s| real((s - Dd::ONE).recip())).unwrap_err();
        assert_eq!(err, Error::SingularFunction { n: 1, s: 1.0 });
    }

    #[test]
    fn fused_apply_after_raise() {
        let b = basis(6);
        let a1d = LinOp::ladder(&b, Mode::One, LadderKind::Raise);
        let raise2 = &a1d * &a1d;
        let f = |s: Dd| real((s * (s - Dd::ONE)).sqrt().recip());
        let fused = fused_apply(f, &raise2).unwrap();
        let i00 = b.index_of(0, 0).unwrap();
        let i20 = b.index_of(2, 0).unwrap();
        // sqrt(2) / sqrt(3/2 * 1/2) = 2 sqrt(2) / sqrt(3)
        let want = 2.0 * 2f64.sqrt() / 3f64.sqrt();
        assert!((fused.entry_c64(i20, i00).re - want).abs() < 1e-15);
        // same thing through a diagonal on a range that excludes S = 1 rows
        let diag = diag_s_fn(&b, |s| {
            if s.to_f64() < 1.25 {
                real(Dd::ZERO)
            } else {
                f(s)
            }
        })
        .unwrap();
        assert!(residual(&fused, &(&diag * &raise2), &Subspace::full(&b)) < 1e-30);
        // materializing the diagonal itself is refused
        assert!(diag_s_fn(&b, f).is_err());
        // trivial functions
        let one = fused_apply(|_| cx(1.0, 0.0), &raise2).unwrap();
        assert!((&one - &raise2).is_zero());
        let id = LinOp::identity(&b);
        let e1 = fused_apply(|s| real((-s).exp()), &id).unwrap();
        let e2 = diag_s_fn(&b, |s| real((-s).exp())).unwrap();
        assert!((&e1 - &e2).is_zero());
    }

    #[test]
    fn cross_and_dot_basics() {
        let b = basis(6);
        let a1 = LinOp::ladder(&b, Mode::One, LadderKind::Lower);
        let v = VecOp::splat(&a1);
        let c = cross(&v, &v).unwrap();
        assert!(c.components().iter().all(LinOp::is_zero));
        let d = dot(&v, &v).unwrap();
        assert!((&d - &(&(&a1 * &a1) * 3.0)).max_abs() < 1e-30);
    }
}

use std::ops::{Add, Sub};
use std::sync::Arc;

use super::basis::FockBasis;
use super::linop::{Grade, LinOp};
use crate::dd::Scalar;
use crate::error::{Error, Result};

/// Ordered triple of operators `(x, y, z)` on one basis.
#[derive(Debug, Clone)]
pub struct VecOp {
    comps: [LinOp; 3],
}

/// Levi-Civita symbol on `{0, 1, 2}`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> i32 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

impl VecOp {
    pub fn new(x: LinOp, y: LinOp, z: LinOp) -> Result<Self> {
        for other in [&y, &z] {
            if other.basis().n_max() != x.basis().n_max() {
                return Err(Error::BasisMismatch {
                    left: x.basis().n_max(),
                    right: other.basis().n_max(),
                });
            }
        }
        Ok(VecOp { comps: [x, y, z] })
    }

    /// Vector with the same operator in every slot.
    pub fn splat(op: &LinOp) -> Self {
        VecOp {
            comps: [op.clone(), op.clone(), op.clone()],
        }
    }

    pub fn x(&self) -> &LinOp {
        &self.comps[0]
    }

    pub fn y(&self) -> &LinOp {
        &self.comps[1]
    }

    pub fn z(&self) -> &LinOp {
        &self.comps[2]
    }

    pub fn component(&self, i: usize) -> &LinOp {
        &self.comps[i]
    }

    pub fn components(&self) -> &[LinOp; 3] {
        &self.comps
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.comps[0].basis()
    }

    pub fn grade(&self) -> Grade {
        self.comps
            .iter()
            .fold(Grade::ZERO, |g, c| g.join(c.grade()))
    }

    pub fn try_map(&self, mut f: impl FnMut(&LinOp) -> Result<LinOp>) -> Result<VecOp> {
        VecOp::new(f(&self.comps[0])?, f(&self.comps[1])?, f(&self.comps[2])?)
    }

    pub fn map(&self, mut f: impl FnMut(&LinOp) -> LinOp) -> VecOp {
        VecOp {
            comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])],
        }
    }

    pub fn adjoint(&self) -> VecOp {
        self.map(LinOp::adjoint)
    }

    pub fn scale(&self, s: Scalar) -> VecOp {
        self.map(|c| c.scale(s))
    }

    fn zip(&self, other: &VecOp, f: impl Fn(&LinOp, &LinOp) -> Result<LinOp>) -> Result<VecOp> {
        VecOp::new(
            f(&self.comps[0], &other.comps[0])?,
            f(&self.comps[1], &other.comps[1])?,
            f(&self.comps[2], &other.comps[2])?,
        )
    }

    pub fn checked_add(&self, other: &VecOp) -> Result<VecOp> {
        self.zip(other, LinOp::checked_add)
    }

    pub fn checked_sub(&self, other: &VecOp) -> Result<VecOp> {
        self.zip(other, LinOp::checked_sub)
    }

    /// `op · V` componentwise, with `op` on the left.
    pub fn left_mul(&self, op: &LinOp) -> Result<VecOp> {
        self.try_map(|c| op.checked_mul(c))
    }

    /// `V · op` componentwise, with `op` on the right.
    pub fn right_mul(&self, op: &LinOp) -> Result<VecOp> {
        self.try_map(|c| c.checked_mul(op))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(LinOp::hermiticity_defect)
            .fold(0.0, f64::max)
    }
}

/// `(U × V)_i = Σ_jk ε_ijk U_j V_k`, keeping `U_j` to the left of `V_k`.
pub fn cross(u: &VecOp, v: &VecOp) -> Result<VecOp> {
    let comp = |j: usize, k: usize| -> Result<LinOp> {
        u.component(j)
            .checked_mul(v.component(k))?
            .checked_sub(&u.component(k).checked_mul(v.component(j))?)
    };
    VecOp::new(comp(1, 2)?, comp(2, 0)?, comp(0, 1)?)
}

/// `U · V = Σ_i U_i V_i`.
pub fn dot(u: &VecOp, v: &VecOp) -> Result<LinOp> {
    let mut acc = u.component(0).checked_mul(v.component(0))?;
    for i in 1..3 {
        acc = acc.checked_add(&u.component(i).checked_mul(v.component(i))?)?;
    }
    Ok(acc)
}

impl Add<&VecOp> for &VecOp {
    type Output = VecOp;
    fn add(self, rhs: &VecOp) -> VecOp {
        self.checked_add(rhs)
            .expect("vector operator arithmetic across bases")
    }
}

impl Sub<&VecOp> for &VecOp {
    type Output = VecOp;
    fn sub(self, rhs: &VecOp) -> VecOp {
        self.checked_sub(rhs)
            .expect("vector operator arithmetic across bases")
    }
}

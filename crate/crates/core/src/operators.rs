//! Every named operator of the particle on the unit sphere, built on a
//! truncated Schwinger-boson Fock space.
//!
//! Functions of `S` are always applied in the written left-to-right order
//! through [`fused_apply`] / [`fused_apply_right`]; construction code never
//! reorders factors, so identity checks test the formulas as written.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::dd::{cx, real, Dd, Scalar};
use crate::error::{Error, Result};
use crate::fock::{
    cross, diag_s_fn, fused_apply, fused_apply_right, FockBasis, Grade, LadderKind, LinOp, Mode,
    VecOp,
};

struct Ladders {
    a1: LinOp,
    a2: LinOp,
    a1d: LinOp,
    a2d: LinOp,
}

impl Ladders {
    fn new(basis: &Arc<FockBasis>) -> Self {
        Ladders {
            a1: LinOp::ladder(basis, Mode::One, LadderKind::Lower),
            a2: LinOp::ladder(basis, Mode::Two, LadderKind::Lower),
            a1d: LinOp::ladder(basis, Mode::One, LadderKind::Raise),
            a2d: LinOp::ladder(basis, Mode::Two, LadderKind::Raise),
        }
    }
}

/// `J_k = a†(σ_k/2)a`.
///
/// Each term lowers before it raises, so no intermediate state leaves the
/// basis and the components are exact with grade (0, 0).
pub fn angular_momentum(basis: &Arc<FockBasis>) -> VecOp {
    let l = Ladders::new(basis);
    let up = &l.a1d * &l.a2;
    let down = &l.a2d * &l.a1;
    let jx = (&up + &down).scale(cx(0.5, 0.0));
    let jy = (&up - &down).scale(cx(0.0, -0.5));
    let jz = (&(&l.a1d * &l.a1) - &(&l.a2d * &l.a2)).scale(cx(0.5, 0.0));
    VecOp::new(exact(jx), exact(jy), exact(jz)).expect("components share a basis")
}

fn exact(op: LinOp) -> LinOp {
    let basis = op.basis().clone();
    let entries = op.nonzeros();
    LinOp::from_entries(&basis, Grade::ZERO, entries)
}

/// Shifted angular momentum `S = sqrt(J² + 1/4)`, diagonal with `(n+1)/2`.
pub fn shifted_s(basis: &Arc<FockBasis>) -> LinOp {
    diag_s_fn(basis, real).expect("S is finite on every block")
}

/// `A = (½(a₂a₂ − a₁a₁), −(i/2)(a₂a₂ + a₁a₁), a₂a₁)`, non-Hermitian, grade (0, 2).
pub fn a_vec(basis: &Arc<FockBasis>) -> VecOp {
    let l = Ladders::new(basis);
    let a22 = &l.a2 * &l.a2;
    let a11 = &l.a1 * &l.a1;
    VecOp::new(
        (&a22 - &a11).scale(cx(0.5, 0.0)),
        (&a22 + &a11).scale(cx(0.0, -0.5)),
        &l.a2 * &l.a1,
    )
    .expect("components share a basis")
}

/// `B = (i/2)(A† − A)`, Hermitian componentwise.
pub fn b_vec(basis: &Arc<FockBasis>) -> VecOp {
    b_from_a(&a_vec(basis))
}

fn b_from_a(a: &VecOp) -> VecOp {
    a.map(|c| (&c.adjoint() - c).scale(cx(0.0, 0.5)))
}

fn inv_sqrt_s_s1(s: Dd) -> Scalar {
    real((s * (s + Dd::ONE)).sqrt().recip())
}

/// Unit direction `N = ½(f(S)·A + A†·f(S))` with `f(S) = 1/sqrt(S(S+1))`.
pub fn direction_n(basis: &Arc<FockBasis>) -> VecOp {
    n_from_a(&a_vec(basis)).expect("1/sqrt(S(S+1)) is finite for S >= 1/2")
}

fn n_from_a(a: &VecOp) -> Result<VecOp> {
    a.try_map(|c| {
        let left = fused_apply(inv_sqrt_s_s1, c)?;
        let right = fused_apply_right(&c.adjoint(), inv_sqrt_s_s1)?;
        Ok((&left + &right).scale(cx(0.5, 0.0)))
    })
}

/// Geometric momentum `Π = ½(√S·B·(1/√S) + (1/√S)·B·√S)`.
pub fn momentum_pi(basis: &Arc<FockBasis>) -> VecOp {
    pi_from_b(&b_vec(basis)).expect("S^(±1/2) is finite for S >= 1/2")
}

fn pi_from_b(b: &VecOp) -> Result<VecOp> {
    let sqrt_s = |s: Dd| real(s.sqrt());
    let inv_sqrt_s = |s: Dd| real(s.sqrt().recip());
    b.try_map(|c| {
        let t1 = fused_apply(sqrt_s, &fused_apply_right(c, inv_sqrt_s)?)?;
        let t2 = fused_apply(inv_sqrt_s, &fused_apply_right(c, sqrt_s)?)?;
        Ok((&t1 + &t2).scale(cx(0.5, 0.0)))
    })
}

/// Symmetrized momentum `½(J×N − N×J)`, built independently of [`momentum_pi`].
pub fn momentum_pi_sym(basis: &Arc<FockBasis>) -> VecOp {
    pi_sym_from(&angular_momentum(basis), &direction_n(basis)).expect("shared basis")
}

fn pi_sym_from(j: &VecOp, n: &VecOp) -> Result<VecOp> {
    let jn = cross(j, n)?;
    let nj = cross(n, j)?;
    Ok(jn.checked_sub(&nj)?.scale(cx(0.5, 0.0)))
}

/// Non-Hermitian `P = J × N`.
pub fn nonhermitian_p(basis: &Arc<FockBasis>) -> VecOp {
    cross(&angular_momentum(basis), &direction_n(basis)).expect("shared basis")
}

fn check_eta(basis: &FockBasis, eta: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidEta(eta));
    }
    let log_scale = eta * (basis.n_max() as f64 + 1.0) / 2.0 + 0.5 * (basis.dim() as f64).ln();
    if log_scale >= f64::MAX.ln() {
        return Err(Error::Overflow {
            eta,
            n_max: basis.n_max(),
        });
    }
    Ok(())
}

/// `α(S) = e^{η/2}(cosh ηS − sinh ηS / 2S)`.
pub fn alpha(eta: f64) -> impl Fn(Dd) -> Scalar + Copy {
    let eta = Dd::new(eta);
    move |s: Dd| {
        let x = eta * s;
        real((eta * Dd::new(0.5)).exp() * (x.cosh() - x.sinh() / (s + s)))
    }
}

/// `β(S) = e^{η/2} sinh(ηS) / S`.
pub fn beta(eta: f64) -> impl Fn(Dd) -> Scalar + Copy {
    let eta = Dd::new(eta);
    move |s: Dd| real((eta * Dd::new(0.5)).exp() * (eta * s).sinh() / s)
}

/// `e^{η/2}(cosh ηS + sinh ηS / 2S)`, the position coefficient in the `P` form.
fn alpha_via_p(eta: f64) -> impl Fn(Dd) -> Scalar + Copy {
    let eta = Dd::new(eta);
    move |s: Dd| {
        let x = eta * s;
        real((eta * Dd::new(0.5)).exp() * (x.cosh() + x.sinh() / (s + s)))
    }
}

fn times_i(f: impl Fn(Dd) -> Scalar + Copy) -> impl Fn(Dd) -> Scalar + Copy {
    move |s| f(s) * cx(0.0, 1.0)
}

fn z_from(
    n: &VecOp,
    mom: &VecOp,
    pos_coeff: impl Fn(Dd) -> Scalar + Copy,
    mom_coeff: impl Fn(Dd) -> Scalar + Copy,
) -> Result<VecOp> {
    let comps = (0..3)
        .map(|k| {
            let pos = fused_apply(pos_coeff, n.component(k))?;
            let m = fused_apply(times_i(mom_coeff), mom.component(k))?;
            pos.checked_add(&m)
        })
        .collect::<Result<Vec<_>>>()?;
    let [x, y, z]: [LinOp; 3] = comps.try_into().expect("three components");
    VecOp::new(x, y, z)
}

/// `Z = α(S)N + iβ(S)Π`, the annihilation operators written with the
/// geometric momentum.
pub fn annihilation_z_general(basis: &Arc<FockBasis>, eta: f64) -> Result<VecOp> {
    check_eta(basis, eta)?;
    z_from(
        &direction_n(basis),
        &momentum_pi(basis),
        alpha(eta),
        beta(eta),
    )
}

/// `Z = e^{η/2}([cosh ηS + sinh ηS / 2S]N + (i/S) sinh(ηS) P)` with `P = J × N`.
pub fn annihilation_z_via_p(basis: &Arc<FockBasis>, eta: f64) -> Result<VecOp> {
    check_eta(basis, eta)?;
    z_from(
        &direction_n(basis),
        &nonhermitian_p(basis),
        alpha_via_p(eta),
        beta(eta),
    )
}

/// Closed Schwinger-boson form of `Z` at `η = 1`:
///
/// ```text
/// Z± = Zx ± iZy,  Z+ = c(g+(S) a2a2 − g−(S) a1†a1†),  Z− = c(−g+(S) a1a1 + g−(S) a2†a2†)
/// Zz = c(g+(S) a2a1 + g−(S) a2†a1†)
/// c = e^{1/2}/2,  g+(S) = e^S/sqrt(S(S+1)),  g−(S) = e^{−S}/sqrt(S(S−1))
/// ```
///
/// `g−` is singular at `S = 1` and only ever evaluated after a two-quantum raise.
pub fn annihilation_z_closed(basis: &Arc<FockBasis>) -> Result<VecOp> {
    check_eta(basis, 1.0)?;
    let l = Ladders::new(basis);
    let g_plus = |s: Dd| real(s.exp() / (s * (s + Dd::ONE)).sqrt());
    let g_minus = |s: Dd| real((-s).exp() / (s * (s - Dd::ONE)).sqrt());
    let c = real(Dd::new(0.5).exp() * Dd::new(0.5));

    let lowered = |m: &LinOp| fused_apply(g_plus, m);
    let raised = |m: &LinOp| fused_apply(g_minus, m);

    let z_plus = lowered(&(&l.a2 * &l.a2))?
        .checked_sub(&raised(&(&l.a1d * &l.a1d))?)?
        .scale(c);
    let z_minus = raised(&(&l.a2d * &l.a2d))?
        .checked_sub(&lowered(&(&l.a1 * &l.a1))?)?
        .scale(c);
    let z_z = lowered(&(&l.a2 * &l.a1))?
        .checked_add(&raised(&(&l.a2d * &l.a1d))?)?
        .scale(c);

    let z_x = z_plus.checked_add(&z_minus)?.scale(cx(0.5, 0.0));
    let z_y = z_plus.checked_sub(&z_minus)?.scale(cx(0.0, -0.5));
    VecOp::new(z_x, z_y, z_z)
}

/// The operator family on one basis, at one coupling `η`.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub basis: Arc<FockBasis>,
    pub j: VecOp,
    pub s: LinOp,
    pub a: VecOp,
    pub b: VecOp,
    pub n: VecOp,
    pub pi: VecOp,
    pub pi_sym: VecOp,
    pub p: VecOp,
    /// `Z = α(S)N + iβ(S)Π` at this set's `η`.
    pub z: VecOp,
    pub eta: f64,
}

impl OperatorSet {
    pub fn build(n_max: usize, eta: f64) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(n_max)?);
        Self::on_basis(basis, eta)
    }

    pub fn on_basis(basis: Arc<FockBasis>, eta: f64) -> Result<Self> {
        check_eta(&basis, eta)?;
        let j = angular_momentum(&basis);
        let s = shifted_s(&basis);
        let a = a_vec(&basis);
        let b = b_from_a(&a);
        let n = n_from_a(&a)?;
        let pi = pi_from_b(&b)?;
        let pi_sym = pi_sym_from(&j, &n)?;
        let p = cross(&j, &n)?;
        let z = z_from(&n, &pi, alpha(eta), beta(eta))?;
        Ok(OperatorSet {
            basis,
            j,
            s,
            a,
            b,
            n,
            pi,
            pi_sym,
            p,
            z,
            eta,
        })
    }

    pub fn n_max(&self) -> usize {
        self.basis.n_max()
    }

    /// `Z` written through `P`, at this set's `η`.
    pub fn z_via_p(&self) -> Result<VecOp> {
        z_from(&self.n, &self.p, alpha_via_p(self.eta), beta(self.eta))
    }

    /// `Z` in its `α N + iβ Π` form at an arbitrary `η`, reusing this set's `N` and `Π`.
    pub fn z_at(&self, eta: f64) -> Result<VecOp> {
        check_eta(&self.basis, eta)?;
        z_from(&self.n, &self.pi, alpha(eta), beta(eta))
    }

    /// Looks up an operator component by its export name (`Jx`, `Piz`, ...).
    pub fn named(&self, name: &str) -> Result<LinOp> {
        let (vec, comp) = match name {
            "S" => return Ok(self.s.clone()),
            _ if name.len() >= 2 => name.split_at(name.len() - 1),
            _ => return Err(Error::UnknownOperator(name.to_string())),
        };
        let k = match comp {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            _ => return Err(Error::UnknownOperator(name.to_string())),
        };
        let v = match vec {
            "J" => &self.j,
            "N" => &self.n,
            "Pi" => &self.pi,
            "Z" => &self.z,
            "P" => &self.p,
            _ => return Err(Error::UnknownOperator(name.to_string())),
        };
        Ok(v.component(k).clone())
    }
}

/// Export names accepted by [`OperatorSet::named`].
pub const OPERATOR_NAMES: [&str; 16] = [
    "Jx", "Jy", "Jz", "S", "Nx", "Ny", "Nz", "Pix", "Piy", "Piz", "Zx", "Zy", "Zz", "Px", "Py",
    "Pz",
];

const PHASE_POINT_TOL: f64 = 1e-12;

/// A point `(x, p)` of the cotangent bundle of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalPhasePoint {
    pub x: [f64; 3],
    pub p: [f64; 3],
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl ClassicalPhasePoint {
    /// Validates `x·x = 1` and `x·p = 0`.
    pub fn new(x: [f64; 3], p: [f64; 3]) -> Result<Self> {
        if x.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPhasePoint("non-finite coordinate".into()));
        }
        let r2 = dot3(&x, &x);
        if (r2 - 1.0).abs() > PHASE_POINT_TOL {
            return Err(Error::InvalidPhasePoint(format!("x·x = {r2}, expected 1")));
        }
        let xp = dot3(&x, &p);
        if xp.abs() > PHASE_POINT_TOL {
            return Err(Error::InvalidPhasePoint(format!("x·p = {xp}, expected 0")));
        }
        Ok(ClassicalPhasePoint { x, p })
    }

    /// Magnitude of the classical angular momentum `|x × p|`.
    pub fn angular_momentum(&self) -> f64 {
        let l = cross3(&self.x, &self.p);
        dot3(&l, &l).sqrt()
    }
}

/// Classical annihilation vector `z = cosh(ηℓ) x + i (sinh(ηℓ)/ℓ) p`, with the
/// `ℓ → 0` limit `sinh(ηℓ)/ℓ → η`.
pub fn classical_annihilation(pt: &ClassicalPhasePoint, eta: f64) -> Result<[Complex64; 3]> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidEta(eta));
    }
    let l = pt.angular_momentum();
    let ch = (eta * l).cosh();
    let sh_over_l = if l == 0.0 { eta } else { (eta * l).sinh() / l };
    Ok([0, 1, 2].map(|k| Complex64::new(ch * pt.x[k], sh_over_l * pt.p[k])))
}

/// Complex bilinear `z·z` (no conjugation).
pub fn bilinear_square(z: &[Complex64; 3]) -> Complex64 {
    z.iter().map(|v| v * v).sum()
}

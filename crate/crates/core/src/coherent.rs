//! Coherent states as joint eigenvectors of the commuting annihilation
//! operators `Z`, found as the smallest right singular vector of the stacked
//! system `(Z_i − z_i)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dd::{from_c64, real, to_c64, Dd, Scalar};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, LinOp, Sector, VecOp};
use crate::operators::{bilinear_square, classical_annihilation, ClassicalPhasePoint, OperatorSet};

const LABEL_TOL: f64 = 1e-10;

/// Eigenvalue triple of `Z`, constrained to the complex sphere `z·z = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentLabel {
    #[serde(serialize_with = "ser_c3")]
    pub z: [Complex64; 3],
}

fn ser_c3<S: serde::Serializer>(z: &[Complex64; 3], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for v in z {
        seq.serialize_element(&[v.re, v.im])?;
    }
    seq.end()
}

impl CoherentLabel {
    pub fn new(z: [Complex64; 3]) -> Result<Self> {
        if z.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidLabel("non-finite component".into()));
        }
        let zz = bilinear_square(&z);
        if (zz - Complex64::new(1.0, 0.0)).norm() > LABEL_TOL {
            return Err(Error::InvalidLabel(format!(
                "z·z = {} + {}i, expected 1",
                zz.re, zz.im
            )));
        }
        Ok(CoherentLabel { z })
    }
}

/// Label of the coherent state peaked at a classical phase point.
pub fn label_of(pt: &ClassicalPhasePoint, eta: f64) -> Result<CoherentLabel> {
    CoherentLabel::new(classical_annihilation(pt, eta)?)
}

/// Thresholds and restrictions for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub residual_threshold: f64,
    pub tail_threshold: f64,
    /// Smallest acceptable gap between the two lowest singular values.
    pub gap_threshold: f64,
    pub sector: Sector,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            residual_threshold: 1e-6,
            tail_threshold: 1e-8,
            gap_threshold: 1e-10,
            sector: Sector::IntegerJ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveWarning {
    ResidualAboveThreshold,
    TailAboveThreshold,
    DegenerateSingularValues,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentState {
    pub label: CoherentLabel,
    pub n_max: usize,
    pub eta: f64,
    /// Unit vector over the full basis ordering.
    #[serde(skip)]
    pub coeffs: Vec<Complex64>,
    /// `max_i ‖(Z_i − z_i)ψ‖`, evaluated in extended precision.
    pub residual: f64,
    /// Weight in the two highest total-number blocks of the support.
    pub tail_mass: f64,
    pub smallest_singular_values: [f64; 2],
    pub warnings: Vec<SolveWarning>,
}

impl CoherentState {
    /// Nonzero coefficients as `(n₁, n₂, c)` in basis order.
    pub fn coefficients(&self, basis: &FockBasis) -> Vec<(usize, usize, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, c)| {
                let st = basis.state(i);
                (st.n1, st.n2, *c)
            })
            .collect()
    }
}

/// Totals on which `ψ` may be supported: in the sector and at least one
/// grade-2 step below the truncation, so `Zψ` is exact.
fn support_totals(n_max: usize, sector: Sector) -> Vec<usize> {
    (0..=n_max.saturating_sub(2))
        .filter(|&n| sector.admits(n))
        .collect()
}

fn indices_for(
    basis: &FockBasis,
    totals: &[usize],
    keep: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    totals
        .iter()
        .flat_map(|&n| basis.block_range(n))
        .filter(|&i| {
            let st = basis.state(i);
            keep(st.n1, st.n2)
        })
        .collect()
}

fn shifted_dense(
    op: &LinOp,
    shift: Complex64,
    rows: &[usize],
    cols: &[usize],
) -> DMatrix<Complex64> {
    let mut m = op.to_dense(rows, cols);
    for (c, col) in cols.iter().enumerate() {
        if let Some(r) = rows.iter().position(|x| x == col) {
            m[(r, c)] -= shift;
        }
    }
    m
}

/// The stacked operator `(Z_k − z_k)` for the chosen axes, restricted to
/// `rows × cols`, with its QR and SVD factors.
struct Stacked<'a> {
    set: &'a OperatorSet,
    label: CoherentLabel,
    axes: Vec<usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    q: DMatrix<Complex64>,
    u: DMatrix<Complex64>,
    sigma: Vec<f64>,
    v_t: DMatrix<Complex64>,
}

impl<'a> Stacked<'a> {
    fn new(
        set: &'a OperatorSet,
        label: CoherentLabel,
        axes: &[usize],
        rows: Vec<usize>,
        cols: Vec<usize>,
    ) -> Self {
        let nr = rows.len() * axes.len();
        let mut m = DMatrix::<Complex64>::zeros(nr, cols.len());
        for (b, &k) in axes.iter().enumerate() {
            let block = shifted_dense(set.z.component(k), label.z[k], &rows, &cols);
            m.view_mut((b * rows.len(), 0), (rows.len(), cols.len()))
                .copy_from(&block);
        }
        let qr = m.qr();
        let (q, r) = (qr.q(), qr.r());
        let svd = r.svd(true, true);
        Stacked {
            set,
            label,
            axes: axes.to_vec(),
            rows,
            cols,
            q,
            u: svd.u.expect("requested U"),
            sigma: svd.singular_values.iter().copied().collect(),
            v_t: svd.v_t.expect("requested V^T"),
        }
    }

    fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.sigma.len()).collect();
        order.sort_by(|&a, &b| self.sigma[a].total_cmp(&self.sigma[b]));
        order
    }

    fn embed(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); self.set.basis.dim()];
        for (&i, c) in self.cols.iter().zip(v) {
            psi[i] = *c;
        }
        psi
    }

    /// `(Z_k − z_k)ψ` for each axis, accumulated in double-double.
    fn residual_vectors(&self, psi: &[Complex64]) -> Vec<Vec<Scalar>> {
        let psi_dd: Vec<Scalar> = psi.iter().map(|&c| from_c64(c)).collect();
        self.axes
            .iter()
            .map(|&k| {
                let shift = from_c64(self.label.z[k]);
                self.set
                    .z
                    .component(k)
                    .apply_dd(&psi_dd)
                    .into_iter()
                    .zip(&psi_dd)
                    .map(|(a, p)| a - shift * *p)
                    .collect()
            })
            .collect()
    }

    fn residual(&self, psi: &[Complex64]) -> f64 {
        self.residual_vectors(psi)
            .iter()
            .map(|r| {
                r.iter()
                    .map(|d| (d.re * d.re + d.im * d.im).to_f64())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Least-squares correction `δ ⊥ v` minimizing `‖M(v + δ)‖`, with `Mv`
    /// evaluated in extended precision.
    fn correction(&self, psi: &[Complex64], null: usize) -> Vec<Complex64> {
        let rv = self.residual_vectors(psi);
        let r: Vec<Complex64> = rv
            .iter()
            .flat_map(|block| self.rows.iter().map(|&i| to_c64(block[i])))
            .collect();
        let r = DVector::from_vec(r);
        let coeff = self.u.adjoint() * (self.q.adjoint() * r);
        let mut delta = DVector::<Complex64>::zeros(self.cols.len());
        for i in 0..self.sigma.len() {
            if i == null || self.sigma[i] == 0.0 {
                continue;
            }
            let scale = -coeff[i] / self.sigma[i];
            delta += self.v_t.row(i).adjoint() * scale;
        }
        delta.iter().copied().collect()
    }

    /// Smallest right singular vector, refined while the residual improves.
    fn solve(&self) -> (Vec<Complex64>, [f64; 2]) {
        let order = self.order();
        let null = order[0];
        let second = order.get(1).map_or(f64::INFINITY, |&i| self.sigma[i]);
        let mut v: Vec<Complex64> = self.v_t.row(null).iter().map(|c| c.conj()).collect();
        let mut best = self.residual(&self.embed(&v));
        for _ in 0..REFINE_STEPS {
            let delta = self.correction(&self.embed(&v), null);
            let mut next: Vec<Complex64> = v.iter().zip(&delta).map(|(a, d)| a + d).collect();
            let norm = next.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            next.iter_mut().for_each(|c| *c /= norm);
            let res = self.residual(&self.embed(&next));
            if res >= best {
                break;
            }
            best = res;
            v = next;
        }
        (self.embed(&v), [self.sigma[null], second])
    }
}

const REFINE_STEPS: usize = 3;

/// Normalizes and rotates so the largest-magnitude coefficient is real positive.
fn fix_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(b.0.cmp(&a.0)))
        .map(|(_, c)| c)
        .unwrap_or(Complex64::new(1.0, 0.0));
    let rot = pivot.conj() / (pivot.norm() * norm);
    for c in v.iter_mut() {
        *c *= rot;
    }
}

fn tail_mass(basis: &FockBasis, psi: &[Complex64], totals: &[usize]) -> f64 {
    totals
        .iter()
        .rev()
        .take(2)
        .flat_map(|&n| basis.block_range(n))
        .map(|i| psi[i].norm_sqr())
        .sum()
}

fn run(sys: Stacked, totals: &[usize], opts: &SolveOptions) -> CoherentState {
    let (mut psi, sv) = sys.solve();
    fix_phase(&mut psi);
    let residual = sys.residual(&psi);
    let tail = tail_mass(&sys.set.basis, &psi, totals);
    let mut warnings = Vec::new();
    if residual > opts.residual_threshold {
        warnings.push(SolveWarning::ResidualAboveThreshold);
    }
    if tail > opts.tail_threshold {
        warnings.push(SolveWarning::TailAboveThreshold);
    }
    if sv[1] - sv[0] < opts.gap_threshold {
        warnings.push(SolveWarning::DegenerateSingularValues);
    }
    CoherentState {
        label: sys.label,
        n_max: sys.set.n_max(),
        eta: sys.set.eta,
        coeffs: psi,
        residual,
        tail_mass: tail,
        smallest_singular_values: sv,
        warnings,
    }
}

/// Joint eigenvector of `Z_x, Z_y, Z_z` with eigenvalues `label.z`.
pub fn solve(
    set: &OperatorSet,
    label: &CoherentLabel,
    opts: &SolveOptions,
) -> Result<CoherentState> {
    let totals = support_totals(set.n_max(), opts.sector);
    let cols = indices_for(&set.basis, &totals, |_, _| true);
    let row_totals: Vec<usize> = (0..=set.n_max())
        .filter(|&n| opts.sector.admits(n))
        .collect();
    let rows = indices_for(&set.basis, &row_totals, |_, _| true);
    let sys = Stacked::new(set, *label, &[0, 1, 2], rows, cols);
    Ok(run(sys, &totals, opts))
}

/// Eigenvector of `Z_z` alone within the `m = 0` (`n₁ = n₂`) states.
///
/// For axial labels `(0, 0, z_z)` this must reproduce [`solve`].
pub fn solve_axial(
    set: &OperatorSet,
    z_z: Complex64,
    opts: &SolveOptions,
) -> Result<CoherentState> {
    let label = CoherentLabel::new([Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), z_z])?;
    let totals = support_totals(set.n_max(), opts.sector);
    let cols = indices_for(&set.basis, &totals, |a, b| a == b);
    let row_totals: Vec<usize> = (0..=set.n_max())
        .filter(|&n| opts.sector.admits(n))
        .collect();
    let rows = indices_for(&set.basis, &row_totals, |a, b| a == b);
    let sys = Stacked::new(set, label, &[2], rows, cols);
    Ok(run(sys, &totals, opts))
}

/// Expectation values and variances in a solved state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectations {
    pub j: [f64; 3],
    pub n: [f64; 3],
    pub pi: [f64; 3],
    #[serde(serialize_with = "ser_c3")]
    pub z: [Complex64; 3],
    pub var_n: [f64; 3],
    pub var_pi: [f64; 3],
    /// `⟨N·N⟩`
    pub n_squared: f64,
    /// `⟨N·Π + Π·N⟩`
    pub tangency: f64,
    /// Weight of the state in its top guard blocks; bounds truncation effects.
    pub tail_mass: f64,
    #[serde(skip)]
    z_dd: [Scalar; 3],
}

fn inner_dd(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x.conj() * *y).sum()
}

/// `⟨O⟩ = ψ†Oψ / ψ†ψ`, accumulated in double-double. Products of Hermitian
/// operators are taken as inner products of `Oψ` vectors, which stay exact
/// because `ψ` sits below the guard band.
pub fn expectations(state: &CoherentState, set: &OperatorSet) -> Result<Expectations> {
    if state.coeffs.len() != set.basis.dim() {
        return Err(Error::BasisMismatch {
            left: state.n_max,
            right: set.n_max(),
        });
    }
    let psi: Vec<Scalar> = state.coeffs.iter().map(|&c| from_c64(c)).collect();
    let applied =
        |v: &VecOp| -> [Vec<Scalar>; 3] { [0, 1, 2].map(|k| v.component(k).apply_dd(&psi)) };
    let (jp, np, pp, zp) = (
        applied(&set.j),
        applied(&set.n),
        applied(&set.pi),
        applied(&set.z),
    );
    let norm2 = inner_dd(&psi, &psi).re;
    let mean = |v: &[Vec<Scalar>; 3]| [0, 1, 2].map(|k| inner_dd(&psi, &v[k]) / real(norm2));
    let second = |v: &[Vec<Scalar>; 3]| [0, 1, 2].map(|k| inner_dd(&v[k], &v[k]).re / norm2);
    let re = |c: [Scalar; 3]| c.map(|x| x.re.to_f64());
    let var = |s: [Dd; 3], m: [Scalar; 3]| {
        [0, 1, 2].map(|k| (s[k] - m[k].re * m[k].re).to_f64().max(0.0))
    };
    let (n_mean, pi_mean) = (mean(&np), mean(&pp));
    let (n2, pi2) = (second(&np), second(&pp));
    let z_dd = mean(&zp);
    let tangency: Dd = (0..3)
        .map(|k| inner_dd(&np[k], &pp[k]).re * Dd::new(2.0) / norm2)
        .sum();
    Ok(Expectations {
        j: re(mean(&jp)),
        n: re(n_mean),
        pi: re(pi_mean),
        z: z_dd.map(to_c64),
        var_n: var(n2, n_mean),
        var_pi: var(pi2, pi_mean),
        n_squared: n2.iter().copied().sum::<Dd>().to_f64(),
        tangency: tangency.to_f64(),
        tail_mass: state.tail_mass,
        z_dd,
    })
}

/// Largest `|⟨Z_i⟩ − z_i|`.
pub fn label_mismatch(exp: &Expectations, label: &CoherentLabel) -> f64 {
    (0..3)
        .map(|k| crate::dd::abs(&(exp.z_dd[k] - from_c64(label.z[k]))))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn north() -> CoherentLabel {
        CoherentLabel::new([c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn label_validation() {
        assert!(CoherentLabel::new([c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        let eq = ClassicalPhasePoint::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        let l = label_of(&eq, 1.0).unwrap();
        assert!((l.z[0] - c(1f64.cosh(), 0.0)).norm() < 1e-15);
        assert!((l.z[1] - c(0.0, 1f64.sinh())).norm() < 1e-15);
        let pole = ClassicalPhasePoint::new([0.0, 0.0, 1.0], [0.0; 3]).unwrap();
        assert_eq!(label_of(&pole, 1.0).unwrap(), north());
    }

    #[test]
    fn north_pole_state() {
        let set = OperatorSet::build(30, 1.0).unwrap();
        let st = solve(&set, &north(), &SolveOptions::default()).unwrap();
        assert!(st.residual < 1e-8, "{}", st.residual);
        assert!(st.warnings.is_empty(), "{:?}", st.warnings);
        let norm: f64 = st.coeffs.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-13);
        let e = expectations(&st, &set).unwrap();
        assert!(e.j[2].abs() < 1e-8);
        assert!(e.n[0].abs() < 1e-8 && e.n[1].abs() < 1e-8 && e.n[2] > 0.0);
        assert!((e.n_squared - 1.0).abs() < 1e-10);
        assert!(e.tangency.abs() < 1e-10);
        assert!(label_mismatch(&e, &north()) <= 10.0 * st.residual.max(f64::EPSILON));
    }

    #[test]
    fn axial_solve_agrees() {
        let set = OperatorSet::build(30, 1.0).unwrap();
        let opts = SolveOptions::default();
        let full = solve(&set, &north(), &opts).unwrap();
        let axial = solve_axial(&set, c(1.0, 0.0), &opts).unwrap();
        let overlap: Complex64 = full
            .coeffs
            .iter()
            .zip(&axial.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let overlap = overlap.norm();
        assert!(overlap > 1.0 - 1e-8, "{overlap}");
    }

    #[test]
    fn phase_convention() {
        let set = OperatorSet::build(16, 1.0).unwrap();
        let st = solve(&set, &north(), &SolveOptions::default()).unwrap();
        let pivot = st
            .coeffs
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        assert!(pivot.im == 0.0 && pivot.re > 0.0);
    }
}

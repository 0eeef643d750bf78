//! Spherical-harmonic representation of `N` and `Π` as multiplication and
//! differential operators, evaluated by exact quadrature.
//!
//! Serves as an independent oracle for the Schwinger-boson construction on
//! the integer-`j` (even `n`) sector.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockState};
use crate::operators::OperatorSet;

/// Gauss–Legendre rule in `cos θ` times a uniform grid in `φ`.
#[derive(Debug, Clone)]
pub struct SphGrid {
    /// `cos θ` at each node.
    pub theta_nodes: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phi_nodes: Vec<f64>,
}

impl SphGrid {
    pub fn new(l: usize, m: usize) -> Self {
        let (theta_nodes, theta_weights) = gauss_legendre(l);
        let phi_nodes = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
        SphGrid {
            theta_nodes,
            theta_weights,
            phi_nodes,
        }
    }

    fn len(&self) -> usize {
        self.theta_nodes.len() * self.phi_nodes.len()
    }

    /// Quadrature weight of grid point `(i, k)`, flattened as `i·M + k`.
    fn weights(&self) -> Vec<f64> {
        let dphi = 2.0 * PI / self.phi_nodes.len() as f64;
        self.theta_weights
            .iter()
            .flat_map(|&w| std::iter::repeat_n(w * dphi, self.phi_nodes.len()))
            .collect()
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Sign convention of the harmonics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    CondonShortley,
    /// Every `Y_jm` multiplied by `(-1)^m`; a negative control for calibration.
    Flipped,
}

/// Index of `(j, m)` in the harmonic basis: `j` ascending, then `m` descending.
pub fn harmonic_index(j: usize, m: i64) -> usize {
    j * j + (j as i64 - m) as usize
}

fn harmonic_dim(j_max: usize) -> usize {
    (j_max + 1) * (j_max + 1)
}

fn harmonic_labels(j_max: usize) -> impl Iterator<Item = (usize, i64)> {
    (0..=j_max).flat_map(|j| (-(j as i64)..=j as i64).rev().map(move |m| (j, m)))
}

/// `Y_jm` and `∂θ Y_jm` sampled on the grid for `j <= j_max + 1`.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    j_max: usize,
    convention: PhaseConvention,
    grid: SphGrid,
    weights: Vec<f64>,
    sin_theta: Vec<f64>,
    y: Vec<Vec<Complex64>>,
    /// `∂θ Y` from the `m`-ladder identity.
    dy: Vec<Vec<Complex64>>,
    /// `∂θ Y` from the Legendre derivative recurrence, used for calibration.
    dy_legendre: Vec<Vec<Complex64>>,
}

/// Normalized associated Legendre functions `Θ_lm(θ)` with the Condon–Shortley
/// phase, for `0 <= m <= l <= l_max`, so that `Y_lm = Θ_lm e^{imφ}`.
///
/// Returns `(Θ, dΘ/dθ)` indexed `[l][m]`.
#[allow(clippy::needless_range_loop)]
fn theta_parts(l_max: usize, x: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let s = (1.0 - x * x).sqrt();
    let mut p = vec![vec![0.0; l_max + 1]; l_max + 1];
    p[0][0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..l_max {
        p[m + 1][m] = x * (2.0 * m as f64 + 3.0).sqrt() * p[m][m];
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let a_prev = ((4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)
                / ((lf - 1.0) * (lf - 1.0) - mf * mf))
                .sqrt();
            p[l][m] = a * (x * p[l - 1][m] - p[l - 2][m] / a_prev);
        }
    }
    let mut dp = vec![vec![0.0; l_max + 1]; l_max + 1];
    for l in 0..=l_max {
        for m in 0..=l {
            let (lf, mf) = (l as f64, m as f64);
            let lower = if l > m {
                ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf - mf) * (lf + mf)).sqrt() * p[l - 1][m]
            } else {
                0.0
            };
            dp[l][m] = (lf * x * p[l][m] - lower) / s;
        }
    }
    (p, dp)
}

/// Builds the grid and table for comparisons up to `j_max`, with one unit of
/// headroom, in the Condon–Shortley convention.
pub fn build_table(j_max: usize) -> Result<HarmonicTable> {
    build_table_with(j_max, PhaseConvention::CondonShortley)
}

pub fn build_table_with(j_max: usize, convention: PhaseConvention) -> Result<HarmonicTable> {
    if j_max < 1 {
        return Err(Error::InvalidAngularMomentum {
            j: j_max,
            m: 0,
            reason: "table needs j_max >= 1".into(),
        });
    }
    let grid = SphGrid::new(2 * j_max + 4, 4 * j_max + 8);
    let l_top = j_max + 1;
    let dim = harmonic_dim(l_top);
    let npts = grid.len();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); npts]; dim];
    let mut dy_legendre = y.clone();
    let mut sin_theta = Vec::with_capacity(npts);

    let sign = |m: i64| -> f64 {
        let odd = m.rem_euclid(2) == 1;
        match convention {
            PhaseConvention::Flipped if odd => -1.0,
            _ => 1.0,
        }
    };

    for (i, &x) in grid.theta_nodes.iter().enumerate() {
        let (p, dp) = theta_parts(l_top, x);
        let s = (1.0 - x * x).sqrt();
        for (k, &phi) in grid.phi_nodes.iter().enumerate() {
            let pt = i * grid.phi_nodes.len() + k;
            sin_theta.push(s);
            for (l, m) in harmonic_labels(l_top) {
                let am = m.unsigned_abs() as usize;
                // Y_{l,-m} = (-1)^m conj(Y_lm)
                let reflect = if m < 0 && am % 2 == 1 { -1.0 } else { 1.0 };
                let phase = Complex64::from_polar(1.0, m as f64 * phi);
                let c = reflect * sign(m);
                let idx = harmonic_index(l, m);
                y[idx][pt] = phase * (c * p[l][am]);
                dy_legendre[idx][pt] = phase * (c * dp[l][am]);
            }
        }
    }

    let mut dy = vec![vec![Complex64::new(0.0, 0.0); npts]; dim];
    for (l, m) in harmonic_labels(l_top) {
        let idx = harmonic_index(l, m);
        let ladder = ((l as f64 - m as f64) * (l as f64 + m as f64 + 1.0)).sqrt();
        for (pt, out) in dy[idx].iter_mut().enumerate() {
            let x = grid.theta_nodes[pt / grid.phi_nodes.len()];
            let phi = grid.phi_nodes[pt % grid.phi_nodes.len()];
            let cot = x / sin_theta[pt];
            let mut v = y[idx][pt] * (m as f64 * cot);
            if m < l as i64 {
                v += Complex64::from_polar(ladder, -phi) * y[harmonic_index(l, m + 1)][pt];
            }
            *out = v;
        }
    }

    Ok(HarmonicTable {
        j_max,
        convention,
        weights: grid.weights(),
        grid,
        sin_theta,
        y,
        dy,
        dy_legendre,
    })
}

/// Which oracle operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kind {
    N,
    Pi,
}

impl Kind {
    pub fn label(&self) -> &'static str {
        match self {
            Kind::N => "N",
            Kind::Pi => "Pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn label(&self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

impl HarmonicTable {
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn convention(&self) -> PhaseConvention {
        self.convention
    }

    pub fn grid(&self) -> &SphGrid {
        &self.grid
    }

    /// `Y_jm` at every grid point, flattened `θ`-major.
    pub fn values(&self, j: usize, m: i64) -> &[Complex64] {
        &self.y[harmonic_index(j, m)]
    }

    /// `∂θ Y_jm` at every grid point.
    pub fn theta_derivative(&self, j: usize, m: i64) -> &[Complex64] {
        &self.dy[harmonic_index(j, m)]
    }

    fn point(&self, pt: usize) -> (f64, f64, f64) {
        let nphi = self.grid.phi_nodes.len();
        (
            self.grid.theta_nodes[pt / nphi],
            self.sin_theta[pt],
            self.grid.phi_nodes[pt % nphi],
        )
    }

    fn inner(&self, left: &[Complex64], right: &[Complex64]) -> Complex64 {
        left.iter()
            .zip(right)
            .zip(&self.weights)
            .map(|((l, r), w)| l.conj() * r * *w)
            .sum()
    }

    /// Quadrature Gram matrix over `j <= j_top`.
    pub fn gram(&self, j_top: usize) -> Result<DMatrix<Complex64>> {
        self.check_rows(j_top)?;
        let labels: Vec<_> = harmonic_labels(j_top).collect();
        let n = labels.len();
        Ok(DMatrix::from_fn(n, n, |r, c| {
            self.inner(
                self.values(labels[r].0, labels[r].1),
                self.values(labels[c].0, labels[c].1),
            )
        }))
    }

    fn check_rows(&self, j_top: usize) -> Result<()> {
        if j_top > self.j_max + 1 {
            return Err(Error::InsufficientHeadroom {
                j_max: j_top,
                n_max: 2 * (self.j_max + 1),
                needed: 2 * j_top,
            });
        }
        Ok(())
    }

    /// `op Y_jm` sampled on the grid.
    fn apply(&self, kind: Kind, axis: Axis, j: usize, m: i64) -> Vec<Complex64> {
        let idx = harmonic_index(j, m);
        let (y, dy) = (&self.y[idx], &self.dy[idx]);
        let i = Complex64::new(0.0, 1.0);
        let mf = m as f64;
        (0..y.len())
            .map(|pt| {
                let (c, s, phi) = self.point(pt);
                let (cp, sp) = (phi.cos(), phi.sin());
                match (kind, axis) {
                    (Kind::N, Axis::X) => y[pt] * (s * cp),
                    (Kind::N, Axis::Y) => y[pt] * (s * sp),
                    (Kind::N, Axis::Z) => y[pt] * c,
                    // ∂φ Y_jm = i m Y_jm
                    (Kind::Pi, Axis::X) => {
                        -i * (dy[pt] * (c * cp) - i * mf * y[pt] * (sp / s) - y[pt] * (s * cp))
                    }
                    (Kind::Pi, Axis::Y) => {
                        -i * (dy[pt] * (c * sp) + i * mf * y[pt] * (cp / s) - y[pt] * (s * sp))
                    }
                    (Kind::Pi, Axis::Z) => -i * (-dy[pt] * s - y[pt] * c),
                }
            })
            .collect()
    }

    /// `J₊ Y_jm` or `J_z Y_jm` on the grid, with `∂θ` from the Legendre recurrence.
    fn apply_j(&self, plus: bool, j: usize, m: i64) -> Vec<Complex64> {
        let idx = harmonic_index(j, m);
        let (y, dy) = (&self.y[idx], &self.dy_legendre[idx]);
        let i = Complex64::new(0.0, 1.0);
        (0..y.len())
            .map(|pt| {
                if !plus {
                    return y[pt] * m as f64;
                }
                let (c, s, phi) = self.point(pt);
                // J₊ = e^{iφ}(∂θ + i cotθ ∂φ)
                Complex64::from_polar(1.0, phi) * (dy[pt] + i * (c / s) * (i * m as f64) * y[pt])
            })
            .collect()
    }

    fn matrix_from(
        &self,
        row_top: usize,
        col_top: usize,
        column: impl Fn(usize, i64) -> Vec<Complex64> + Sync,
    ) -> Result<DMatrix<Complex64>> {
        self.check_rows(row_top)?;
        self.check_rows(col_top)?;
        let rows: Vec<_> = harmonic_labels(row_top).collect();
        let cols: Vec<_> = harmonic_labels(col_top).collect();
        let data: Vec<Vec<Complex64>> = cols
            .par_iter()
            .map(|&(j, m)| {
                let g = column(j, m);
                rows.iter()
                    .map(|&(jr, mr)| self.inner(self.values(jr, mr), &g))
                    .collect()
            })
            .collect();
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |r, c| data[c][r]))
    }

    /// `⟨j'm'|op|jm⟩` for `j' <= row_top`, `j <= col_top`.
    pub fn oracle_block(
        &self,
        kind: Kind,
        axis: Axis,
        row_top: usize,
        col_top: usize,
    ) -> Result<DMatrix<Complex64>> {
        self.matrix_from(row_top, col_top, |j, m| self.apply(kind, axis, j, m))
    }

    /// Square oracle matrix over `j <= j_max`.
    pub fn oracle_matrix(&self, kind: Kind, axis: Axis) -> Result<DMatrix<Complex64>> {
        self.oracle_block(kind, axis, self.j_max, self.j_max)
    }

    /// One oracle matrix element `⟨j'm'|op|jm⟩`.
    pub fn oracle_element(
        &self,
        kind: Kind,
        axis: Axis,
        row: (usize, i64),
        col: (usize, i64),
    ) -> Result<Complex64> {
        self.check_rows(row.0.max(col.0))?;
        Ok(self.inner(
            self.values(row.0, row.1),
            &self.apply(kind, axis, col.0, col.1),
        ))
    }
}

/// Fock state carrying the harmonic `(j, m)`: `(n₁, n₂) = (j + m, j − m)`.
pub fn embed(j: usize, m: i64, basis: &FockBasis) -> Result<FockState> {
    if m.unsigned_abs() as usize > j {
        return Err(Error::InvalidAngularMomentum {
            j,
            m,
            reason: "|m| exceeds j".into(),
        });
    }
    if 2 * j > basis.n_max() {
        return Err(Error::InvalidAngularMomentum {
            j,
            m,
            reason: format!("2j = {} exceeds n_max = {}", 2 * j, basis.n_max()),
        });
    }
    Ok(FockState {
        n1: (j as i64 + m) as usize,
        n2: (j as i64 - m) as usize,
    })
}

const CALIBRATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub jz_max_deviation: f64,
    pub jplus_max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XcheckEntry {
    pub kind: Kind,
    pub component: Axis,
    pub max_deviation: f64,
    pub compared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XcheckReport {
    pub j_max: usize,
    pub n_max: usize,
    pub calibration: Calibration,
    pub entries: Vec<XcheckEntry>,
}

impl XcheckReport {
    pub fn max_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_deviation)
            .fold(0.0, f64::max)
    }

    pub fn entry(&self, kind: Kind, axis: Axis) -> &XcheckEntry {
        self.entries
            .iter()
            .find(|e| e.kind == kind && e.component == axis)
            .expect("all six pairs are reported")
    }
}

fn fock_indices(j_max: usize, basis: &FockBasis) -> Result<Vec<usize>> {
    harmonic_labels(j_max)
        .map(|(j, m)| {
            let st = embed(j, m, basis)?;
            Ok(basis
                .index_of(st.n1, st.n2)
                .expect("embedded state is in the basis"))
        })
        .collect()
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Checks that the embedding reproduces `J_z` and `J₊` exactly, using a
/// `∂θ` independent of the ladder identity.
pub fn calibrate(set: &OperatorSet, table: &HarmonicTable, j_max: usize) -> Result<Calibration> {
    let idx = fock_indices(j_max, &set.basis)?;
    let jz_fock = set.j.z().to_dense(&idx, &idx);
    let jp = set.j.x() + &set.j.y().scale(crate::dd::cx(0.0, 1.0));
    let jp_fock = jp.to_dense(&idx, &idx);
    let jz_h = table.matrix_from(j_max, j_max, |j, m| table.apply_j(false, j, m))?;
    let jp_h = table.matrix_from(j_max, j_max, |j, m| table.apply_j(true, j, m))?;
    let cal = Calibration {
        jz_max_deviation: max_diff(&jz_fock, &jz_h),
        jplus_max_deviation: max_diff(&jp_fock, &jp_h),
    };
    if cal.jz_max_deviation > CALIBRATION_TOL || cal.jplus_max_deviation > CALIBRATION_TOL {
        return Err(Error::CalibrationFailed(format!(
            "embedding (j,m) -> (j+m, j-m) does not reproduce J: max |ΔJz| = {:.3e}, max |ΔJ+| = {:.3e} ({:?} table)",
            cal.jz_max_deviation, cal.jplus_max_deviation, table.convention
        )));
    }
    Ok(cal)
}

/// Compares every `⟨j'm'|op|jm⟩`, `j, j' <= j_max`, of `N` and `Π` between the
/// Schwinger construction and the quadrature oracle.
pub fn xcheck(set: &OperatorSet, table: &HarmonicTable, j_max: usize) -> Result<XcheckReport> {
    let needed = 2 * j_max + 2;
    if set.n_max() < needed || table.j_max() < j_max {
        return Err(Error::InsufficientHeadroom {
            j_max,
            n_max: set.n_max(),
            needed,
        });
    }
    let calibration = calibrate(set, table, j_max)?;
    let idx = fock_indices(j_max, &set.basis)?;
    let mut entries = Vec::new();
    for kind in [Kind::N, Kind::Pi] {
        for axis in Axis::ALL {
            let op = match kind {
                Kind::N => &set.n,
                Kind::Pi => &set.pi,
            };
            let fock = op.component(axis.index()).to_dense(&idx, &idx);
            let oracle = table.oracle_block(kind, axis, j_max, j_max)?;
            entries.push(XcheckEntry {
                kind,
                component: axis,
                max_deviation: max_diff(&fock, &oracle),
                compared: fock.len(),
            });
        }
    }
    Ok(XcheckReport {
        j_max,
        n_max: set.n_max(),
        calibration,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let int_x10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((int_x10 - 2.0 / 11.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn grid_sizes_and_orthonormality() {
        let t = build_table(8).unwrap();
        assert_eq!(t.grid().theta_nodes.len(), 20);
        assert_eq!(t.grid().phi_nodes.len(), 40);
        let g = t.gram(9).unwrap();
        let dev = (g - DMatrix::identity(100, 100))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn lowest_harmonic() {
        let t = build_table(1).unwrap();
        let y00 = 1.0 / (4.0 * PI).sqrt();
        assert!(t
            .values(0, 0)
            .iter()
            .all(|v| (v.re - y00).abs() < 1e-15 && v.im == 0.0));
        assert!(t.theta_derivative(0, 0).iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn derivative_routes_agree() {
        let t = build_table(6).unwrap();
        let dev =
            t.dy.iter()
                .zip(&t.dy_legendre)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
                .fold(0.0, f64::max);
        assert!(dev < 1e-11, "{dev}");
    }

    #[test]
    fn spot_values() {
        let t = build_table(2).unwrap();
        let inv3 = 1.0 / 3f64.sqrt();
        let nz = t.oracle_element(Kind::N, Axis::Z, (1, 0), (0, 0)).unwrap();
        assert!((nz - Complex64::new(inv3, 0.0)).norm() < 1e-12);
        let pz = t.oracle_element(Kind::Pi, Axis::Z, (1, 0), (0, 0)).unwrap();
        assert!((pz - Complex64::new(0.0, inv3)).norm() < 1e-12);
        assert!(
            t.oracle_element(Kind::N, Axis::Z, (0, 0), (0, 0))
                .unwrap()
                .norm()
                < 1e-12
        );
    }

    #[test]
    fn oracle_hermitian_and_pi_squared() {
        let j_max = 6;
        let t = build_table(j_max).unwrap();
        for kind in [Kind::N, Kind::Pi] {
            for axis in Axis::ALL {
                let m = t.oracle_matrix(kind, axis).unwrap();
                let dev = (&m - m.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-12, "{kind:?} {axis:?} {dev}");
            }
        }
        let mut pi2 = DMatrix::<Complex64>::zeros(harmonic_dim(j_max), harmonic_dim(j_max));
        for axis in Axis::ALL {
            let b = t.oracle_block(Kind::Pi, axis, j_max + 1, j_max).unwrap();
            pi2 += b.adjoint() * &b;
        }
        for (j, m) in harmonic_labels(j_max) {
            let k = harmonic_index(j, m);
            let want = (j * (j + 1) + 1) as f64;
            assert!((pi2[(k, k)] - Complex64::new(want, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn embedding() {
        let b = FockBasis::new(4).unwrap();
        assert_eq!(embed(0, 0, &b).unwrap(), FockState { n1: 0, n2: 0 });
        assert_eq!(embed(1, 0, &b).unwrap(), FockState { n1: 1, n2: 1 });
        assert_eq!(embed(2, -2, &b).unwrap(), FockState { n1: 0, n2: 4 });
        assert!(embed(3, 0, &b).is_err());
        assert!(embed(1, 2, &b).is_err());
    }

    #[test]
    fn jplus_element_in_both_representations() {
        let set = OperatorSet::build(6, 1.0).unwrap();
        let t = build_table(2).unwrap();
        let h = t.matrix_from(2, 2, |j, m| t.apply_j(true, j, m)).unwrap();
        let v = h[(harmonic_index(1, 1), harmonic_index(1, 0))];
        assert!((v - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-14);
        let b = &set.basis;
        let jp = set.j.x() + &set.j.y().scale(crate::dd::cx(0.0, 1.0));
        let f = jp.entry_c64(b.index_of(2, 0).unwrap(), b.index_of(1, 1).unwrap());
        assert!((f - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn xcheck_small() {
        let set = OperatorSet::build(8, 1.0).unwrap();
        let t = build_table(3).unwrap();
        let r = xcheck(&set, &t, 3).unwrap();
        assert_eq!(r.entries.len(), 6);
        assert!(r.max_deviation() < 1e-12, "{r:?}");
    }

    #[test]
    fn flipped_phase_fails_calibration() {
        let set = OperatorSet::build(8, 1.0).unwrap();
        let t = build_table_with(3, PhaseConvention::Flipped).unwrap();
        assert!(matches!(
            xcheck(&set, &t, 3),
            Err(Error::CalibrationFailed(_))
        ));
    }

    #[test]
    fn headroom_is_enforced() {
        let set = OperatorSet::build(20, 1.0).unwrap();
        let t = build_table(10).unwrap();
        assert!(matches!(
            xcheck(&set, &t, 10),
            Err(Error::InsufficientHeadroom { needed: 22, .. })
        ));
    }
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use spherelab::coherent::{self, SolveOptions};
use spherelab::harmonics::{self, Axis, Kind};
use spherelab::identities::{self, Role, Status, SubspacePolicy};
use spherelab::operators::{
    bilinear_square, classical_annihilation, ClassicalPhasePoint, OperatorSet,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn core_policy(tol: f64) -> SubspacePolicy {
    SubspacePolicy {
        tolerance_override: Some(tol),
        ..SubspacePolicy::default()
    }
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let suite = identities::standard_suite();
    let core: Vec<_> = suite.into_iter().filter(|c| c.role == Role::Core).collect();
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    let mut count = 0;
    for eta in [0.1, 0.5, 1.0] {
        let set = OperatorSet::build(40, eta).expect("operator set");
        let reports = identities::run(&set, &core, &core_policy(1e-10)).expect("suite runs");
        for r in &reports {
            count += 1;
            let dev = r.relative_deviation.unwrap_or(f64::NAN);
            if r.status != Status::Pass || dev.is_nan() || dev >= 1e-10 {
                failures.push(format!("{}@eta={eta} ({dev:.3e})", r.name));
            } else {
                worst = worst.max(dev);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let families = core.len();
    let pass = failures.is_empty() && families == 12 && secs < 120.0;
    let detail = if failures.is_empty() {
        format!("{families} families, {count} scalar checks, max deviation {worst:.2e}, {secs:.1}s")
    } else {
        format!(
            "{families} families, {count} scalar checks, {secs:.1}s; failing: {}",
            failures.join(", ")
        )
    };
    Outcome { pass, detail }
}

fn s_spectrum() -> Outcome {
    let set = OperatorSet::build(40, 1.0).expect("operator set");
    let j2 = &(&(set.j.x() * set.j.x()) + &(set.j.y() * set.j.y())) + &(set.j.z() * set.j.z());
    let mut worst_s = 0.0_f64;
    let mut worst_casimir = 0.0_f64;
    let mut parities = [false; 2];
    for n in 0..=set.n_max() {
        let idx: Vec<usize> = set.basis.block_range(n).collect();
        let expected = (n as f64 + 1.0) / 2.0;
        let s_block: DMatrix<Complex64> = set.s.to_dense(&idx, &idx);
        for ev in s_block.symmetric_eigen().eigenvalues.iter() {
            worst_s = worst_s.max((ev - expected).abs());
        }
        let quarter =
            DMatrix::<Complex64>::identity(idx.len(), idx.len()) * Complex64::new(0.25, 0.0);
        let casimir = j2.to_dense(&idx, &idx) + quarter;
        for ev in casimir.symmetric_eigen().eigenvalues.iter() {
            worst_casimir = worst_casimir.max((ev.max(0.0).sqrt() - expected).abs());
        }
        parities[n % 2] = true;
    }
    let pass = worst_s < 1e-13 && worst_casimir < 1e-13 && parities == [true, true];
    Outcome {
        pass,
        detail: format!("n = 0..=40, |eig S - (n+1)/2| <= {worst_s:.2e}, |sqrt(eig(J^2+1/4)) - (n+1)/2| <= {worst_casimir:.2e}"),
    }
}

fn negative_control() -> Outcome {
    let set = OperatorSet::build(40, 1.0).expect("operator set");
    let suite = identities::standard_suite();
    let controls: Vec<_> = suite
        .into_iter()
        .filter(|c| c.role == Role::NegativeControl)
        .collect();
    let reports =
        identities::run(&set, &controls, &SubspacePolicy::default()).expect("control runs");
    let norm = reports
        .iter()
        .filter_map(|r| r.relative_deviation)
        .fold(f64::INFINITY, f64::min);
    let pass = !reports.is_empty() && norm > 0.5;
    Outcome {
        pass,
        detail: format!("guarded |N.P + P.N| = {norm:.4} (needs > 0.5)"),
    }
}

fn schwinger_element(
    set: &OperatorSet,
    kind: Kind,
    axis: Axis,
    row: (usize, i64),
    col: (usize, i64),
) -> Complex64 {
    let r = harmonics::embed(row.0, row.1, &set.basis).expect("embeds");
    let c = harmonics::embed(col.0, col.1, &set.basis).expect("embeds");
    let r = set.basis.index_of(r.n1, r.n2).expect("in basis");
    let c = set.basis.index_of(c.n1, c.n2).expect("in basis");
    let v = match kind {
        Kind::N => &set.n,
        Kind::Pi => &set.pi,
    };
    v.component(axis.index()).entry_c64(r, c)
}

fn cross_representation() -> Outcome {
    let j_max = 8;
    let set = OperatorSet::build(20, 1.0).expect("operator set");
    let table = harmonics::build_table(j_max).expect("table");
    let report = match harmonics::xcheck(&set, &table, j_max) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("xcheck error: {e}"),
            }
        }
    };
    let inv = 1.0 / 3.0_f64.sqrt();
    let targets = [
        (Kind::N, Complex64::new(inv, 0.0)),
        (Kind::Pi, Complex64::new(0.0, inv)),
    ];
    let mut spot = 0.0_f64;
    for (kind, want) in targets {
        let fock = schwinger_element(&set, kind, Axis::Z, (1, 0), (0, 0));
        let quad = table
            .oracle_element(kind, Axis::Z, (1, 0), (0, 0))
            .expect("element");
        spot = spot.max((fock - want).norm()).max((quad - want).norm());
    }
    let compared: usize = report.entries.iter().map(|e| e.compared).sum();
    let worst = report.max_deviation();
    let pass = report.entries.len() == 6 && worst < 1e-9 && spot < 1e-12;
    Outcome {
        pass,
        detail: format!(
            "{} components, {compared} elements, max deviation {worst:.2e}; spot values off by {spot:.2e}",
            report.entries.len()
        ),
    }
}

fn random_phase_point(rng: &mut StdRng, l_max: f64) -> ClassicalPhasePoint {
    let gauss = |rng: &mut StdRng| -> [f64; 3] {
        std::array::from_fn(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (-2.0 * u.ln()).sqrt() * v.cos()
        })
    };
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let g = gauss(rng);
    let r = dot(&g, &g).sqrt();
    let x = g.map(|c| c / r);
    let t = gauss(rng);
    let along = dot(&t, &x);
    let t: [f64; 3] = std::array::from_fn(|k| t[k] - along * x[k]);
    let tn = dot(&t, &t).sqrt();
    let ell = rng.gen_range(0.0..=l_max);
    let p = t.map(|c| ell * c / tn);
    ClassicalPhasePoint::new(x, p).expect("valid phase point")
}

fn coherent_states() -> Outcome {
    let eta = 1.0;
    let set = OperatorSet::build(40, eta).expect("operator set");
    let mut rng = StdRng::seed_from_u64(0x5eed_2024);
    let points: Vec<_> = (0..20).map(|_| random_phase_point(&mut rng, 2.0)).collect();
    let opts = SolveOptions::default();
    let rows: Vec<_> = points
        .par_iter()
        .map(|pt| {
            let z = classical_annihilation(pt, eta).expect("label");
            let zz = (bilinear_square(&z) - 1.0).norm();
            let label = coherent::label_of(pt, eta).expect("label");
            let state = coherent::solve(&set, &label, &opts).expect("solve");
            let exp = coherent::expectations(&state, &set).expect("expectations");
            let mismatch = coherent::label_mismatch(&exp, &label);
            (zz, state.residual, mismatch, state.tail_mass)
        })
        .collect();
    let mut bad = 0;
    let (mut zz_max, mut res_max, mut tail_max, mut ratio_max) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for &(zz, res, mismatch, tail) in &rows {
        if !(zz < 1e-12 && res < 1e-6 && mismatch <= 10.0 * res && tail < 1e-8) {
            bad += 1;
        }
        zz_max = zz_max.max(zz);
        res_max = res_max.max(res);
        tail_max = tail_max.max(tail);
        if res > 0.0 {
            ratio_max = ratio_max.max(mismatch / res);
        }
    }
    Outcome {
        pass: bad == 0 && rows.len() == 20,
        detail: format!(
            "{} labels, {bad} failing; max residual {res_max:.2e}, max <Z> mismatch/residual {ratio_max:.2}, max tail {tail_max:.2e}, max |z.z-1| {zz_max:.2e}",
            rows.len()
        ),
    }
}

fn truncation_discipline() -> Outcome {
    let suite = identities::standard_suite();
    let policy = SubspacePolicy {
        reference_n_max: Some(20),
        ..SubspacePolicy::default()
    };
    let small =
        identities::run(&OperatorSet::build(20, 1.0).expect("set"), &suite, &policy).expect("runs");
    let large =
        identities::run(&OperatorSet::build(40, 1.0).expect("set"), &suite, &policy).expect("runs");
    let mut worst = 0.0_f64;
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for (a, b) in small.iter().zip(&large) {
        if a.name != b.name || a.guarded_dim != b.guarded_dim {
            mismatched.push(a.name.clone());
            continue;
        }
        match (a.relative_deviation, b.relative_deviation) {
            (Some(x), Some(y)) => {
                compared += 1;
                let d = (x - y).abs();
                worst = worst.max(d);
                if d.is_nan() || d >= 1e-13 {
                    mismatched.push(a.name.clone());
                }
            }
            (None, None) => {}
            _ => mismatched.push(a.name.clone()),
        }
    }
    let pass = mismatched.is_empty() && small.len() == large.len() && compared > 0;
    Outcome {
        pass,
        detail: format!(
            "{compared} checks on shared guarded blocks, max |dev(20) - dev(40)| = {worst:.2e}{}",
            if mismatched.is_empty() {
                String::new()
            } else {
                format!("; differing: {}", mismatched.join(", "))
            }
        ),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        (
            "1 identity suite at n_max=40, eta in {0.1, 0.5, 1}",
            identity_suite,
        ),
        ("2 S spectrum", s_spectrum),
        ("3 negative control for the naive P", negative_control),
        ("4 cross-representation oracle", cross_representation),
        ("5 coherent states", coherent_states),
        ("6 truncation discipline", truncation_discipline),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let out = f();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {name}: {} [{:.1}s]",
            out.detail,
            start.elapsed().as_secs_f64()
        );
        if !out.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 6 criteria pass", 6 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

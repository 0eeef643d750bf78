//! Declarative registry of operator identities and their guard-band-aware
//! evaluation.
//!
//! Each [`IdentityCheck`] is a family: a builder producing one `(lhs, rhs)`
//! pair per scalar check. The CLI and the test suites run the same registry.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::dd::cx;
use crate::error::Result;
use crate::fock::{cross, diag_s_fn, dot, levi_civita, residual, LinOp, Sector, Subspace, VecOp};
use crate::operators::{alpha, annihilation_z_closed, beta, OperatorSet};

/// How a scalar check's deviation is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "bound")]
pub enum CheckKind {
    /// Passes when `relative_deviation <= tolerance`.
    Equality,
    /// Passes when the deviation from zero exceeds the bound.
    NormExceeds(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// One of the twelve identity families under test.
    Core,
    /// A relation expected not to hold.
    NegativeControl,
    /// Extra structural checks reported alongside the core families.
    Supplementary,
}

type Pairs = Vec<(LinOp, LinOp)>;
type Builder = fn(&Context) -> Result<Pairs>;

/// A family of scalar identity checks sharing one citation and tolerance.
#[derive(Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub citation: &'static str,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub role: Role,
    labels: Vec<String>,
    build: Builder,
}

impl std::fmt::Debug for IdentityCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentityCheck")
            .field("name", &self.name)
            .field("labels", &self.labels)
            .field("tolerance", &self.tolerance)
            .field("kind", &self.kind)
            .field("role", &self.role)
            .finish()
    }
}

/// One built scalar check.
#[derive(Debug, Clone)]
pub struct ScalarCheck {
    pub name: String,
    pub lhs: LinOp,
    pub rhs: LinOp,
    /// Grade width of the wider side.
    pub width: usize,
}

impl IdentityCheck {
    /// Full names of the scalar checks this family expands to.
    pub fn scalar_names(&self) -> Vec<String> {
        self.labels
            .iter()
            .map(|l| format!("{}.{l}", self.name))
            .collect()
    }

    /// Builds every `(lhs, rhs)` pair of the family.
    pub fn expand(&self, set: &OperatorSet) -> Result<Vec<ScalarCheck>> {
        self.expand_in(&Context::new(set))
    }

    fn expand_in(&self, ctx: &Context) -> Result<Vec<ScalarCheck>> {
        let pairs = (self.build)(ctx)?;
        assert_eq!(pairs.len(), self.labels.len(), "{}: label count", self.name);
        Ok(self
            .scalar_names()
            .into_iter()
            .zip(pairs)
            .map(|(name, (lhs, rhs))| {
                let width = lhs.grade().width().max(rhs.grade().width());
                ScalarCheck {
                    name,
                    lhs,
                    rhs,
                    width,
                }
            })
            .collect())
    }
}

/// Shared products, computed at most once per run.
struct Context<'a> {
    set: &'a OperatorSet,
    j2: OnceLock<Result<LinOp>>,
    pi2: OnceLock<Result<LinOp>>,
    pi_cross_j: OnceLock<Result<VecOp>>,
    z_eta1: OnceLock<Result<VecOp>>,
}

fn cached<T>(cell: &OnceLock<Result<T>>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    match cell.get_or_init(f) {
        Ok(v) => Ok(v),
        Err(e) => Err(e.clone()),
    }
}

impl<'a> Context<'a> {
    fn new(set: &'a OperatorSet) -> Self {
        Context {
            set,
            j2: OnceLock::new(),
            pi2: OnceLock::new(),
            pi_cross_j: OnceLock::new(),
            z_eta1: OnceLock::new(),
        }
    }

    fn j2(&self) -> Result<&LinOp> {
        cached(&self.j2, || dot(&self.set.j, &self.set.j))
    }

    fn pi2(&self) -> Result<&LinOp> {
        cached(&self.pi2, || dot(&self.set.pi, &self.set.pi))
    }

    fn pi_cross_j(&self) -> Result<&VecOp> {
        cached(&self.pi_cross_j, || cross(&self.set.pi, &self.set.j))
    }

    fn z_eta1(&self) -> Result<&VecOp> {
        cached(&self.z_eta1, || {
            if self.set.eta == 1.0 {
                Ok(self.set.z.clone())
            } else {
                self.set.z_at(1.0)
            }
        })
    }

    fn identity(&self) -> LinOp {
        LinOp::identity(&self.set.basis)
    }

    fn constant(&self, v: f64) -> LinOp {
        LinOp::scalar(&self.set.basis, cx(v, 0.0))
    }

    fn zero(&self) -> LinOp {
        self.constant(0.0)
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];
const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

fn axis_labels(prefix: &str) -> Vec<String> {
    AXES.iter()
        .map(|a| {
            if prefix.is_empty() {
                a.to_string()
            } else {
                format!("{prefix}.{a}")
            }
        })
        .collect()
}

fn cyclic_labels() -> Vec<String> {
    CYCLIC
        .iter()
        .map(|&(i, j, _)| format!("{}{}", AXES[i], AXES[j]))
        .collect()
}

fn times_i(op: &LinOp) -> LinOp {
    op.scale(cx(0.0, 1.0))
}

fn componentwise(a: &VecOp, b: &VecOp) -> Pairs {
    (0..3)
        .map(|k| (a.component(k).clone(), b.component(k).clone()))
        .collect()
}

fn su2_algebra(ctx: &Context) -> Result<Pairs> {
    let j = &ctx.set.j;
    CYCLIC
        .iter()
        .map(|&(a, b, c)| {
            Ok((
                j.component(a).commutator(j.component(b))?,
                times_i(j.component(c)),
            ))
        })
        .collect()
}

fn shifted_s_squared(ctx: &Context) -> Result<Pairs> {
    let s = &ctx.set.s;
    Ok(vec![(
        s.checked_mul(s)?,
        ctx.j2()?.checked_add(&ctx.constant(0.25))?,
    )])
}

fn cross_j_n(ctx: &Context) -> Result<Pairs> {
    let set = ctx.set;
    let j_x_n = &set.p;
    let n_x_j = cross(&set.n, &set.j)?;
    let mut out = Pairs::new();
    for k in 0..3 {
        let rhs = set.pi.component(k) + &times_i(set.n.component(k));
        out.push((j_x_n.component(k).clone(), rhs));
    }
    for k in 0..3 {
        let rhs = &times_i(set.n.component(k)) - set.pi.component(k);
        out.push((n_x_j.component(k).clone(), rhs));
    }
    Ok(out)
}

fn cross_pi_j(ctx: &Context) -> Result<Pairs> {
    let set = ctx.set;
    let pi2 = ctx.pi2()?;
    let pi2_plus = pi2 + &ctx.identity();
    let one_minus_pi2 = &ctx.identity() - pi2;
    let pi_x_j = ctx.pi_cross_j()?;
    let j_x_pi = cross(&set.j, &set.pi)?;
    let mut out = Pairs::new();
    for k in 0..3 {
        out.push((
            pi_x_j.component(k).clone(),
            set.n.component(k).checked_mul(&pi2_plus)?,
        ));
    }
    for k in 0..3 {
        out.push((
            j_x_pi.component(k).clone(),
            one_minus_pi2.checked_mul(set.n.component(k))?,
        ));
    }
    Ok(out)
}

fn cross_pi_j_corrected(ctx: &Context) -> Result<Pairs> {
    let set = ctx.set;
    let pi2_minus = ctx.pi2()? - &ctx.identity();
    let pi_x_j = ctx.pi_cross_j()?;
    (0..3)
        .map(|k| {
            Ok((
                pi_x_j.component(k).clone(),
                set.n.component(k).checked_mul(&pi2_minus)?,
            ))
        })
        .collect()
}

fn pi_squared(ctx: &Context) -> Result<Pairs> {
    Ok(vec![(ctx.pi2()?.clone(), ctx.j2()? + &ctx.identity())])
}

fn n_squared(ctx: &Context) -> Result<Pairs> {
    Ok(vec![(dot(&ctx.set.n, &ctx.set.n)?, ctx.identity())])
}

fn tangency(ctx: &Context) -> Result<Pairs> {
    let (n, pi) = (&ctx.set.n, &ctx.set.pi);
    Ok(vec![(dot(n, pi)?.checked_add(&dot(pi, n)?)?, ctx.zero())])
}

fn naive_p_tangency(ctx: &Context) -> Result<Pairs> {
    let (n, p) = (&ctx.set.n, &ctx.set.p);
    Ok(vec![(dot(n, p)?.checked_add(&dot(p, n)?)?, ctx.zero())])
}

fn vector_operator_labels() -> Vec<String> {
    (0..3)
        .flat_map(|i| (0..3).map(move |j| format!("j{}_z{}", AXES[i], AXES[j])))
        .collect()
}

fn vector_operator_z(ctx: &Context) -> Result<Pairs> {
    let (j, z) = (&ctx.set.j, &ctx.set.z);
    let mut out = Pairs::new();
    for a in 0..3 {
        for b in 0..3 {
            let lhs = j.component(a).commutator(z.component(b))?;
            let mut rhs = ctx.zero();
            for c in 0..3 {
                let eps = levi_civita(a, b, c);
                if eps != 0 {
                    rhs = rhs.checked_add(&z.component(c).scale(cx(0.0, eps as f64)))?;
                }
            }
            out.push((lhs, rhs));
        }
    }
    Ok(out)
}

fn z_commute(ctx: &Context) -> Result<Pairs> {
    let z = &ctx.set.z;
    CYCLIC
        .iter()
        .map(|&(a, b, _)| Ok((z.component(a).commutator(z.component(b))?, ctx.zero())))
        .collect()
}

fn z_squared(ctx: &Context) -> Result<Pairs> {
    Ok(vec![(dot(&ctx.set.z, &ctx.set.z)?, ctx.identity())])
}

fn z_via_p(ctx: &Context) -> Result<Pairs> {
    Ok(componentwise(&ctx.set.z_via_p()?, &ctx.set.z))
}

fn z_closed_form(ctx: &Context) -> Result<Pairs> {
    let closed = annihilation_z_closed(&ctx.set.basis)?;
    Ok(componentwise(&closed, ctx.z_eta1()?))
}

fn pi_sym_equals_pi(ctx: &Context) -> Result<Pairs> {
    Ok(componentwise(&ctx.set.pi_sym, &ctx.set.pi))
}

const HERMITIAN: [&str; 5] = ["j", "s", "n", "pi", "pi_sym"];

fn hermiticity_labels() -> Vec<String> {
    HERMITIAN
        .iter()
        .flat_map(|&v| {
            if v == "s" {
                vec!["s".to_string()]
            } else {
                axis_labels(v)
            }
        })
        .collect()
}

fn hermiticity(ctx: &Context) -> Result<Pairs> {
    let set = ctx.set;
    let pair = |c: &LinOp| (c.clone(), c.adjoint());
    let mut out: Pairs = set.j.components().iter().map(pair).collect();
    out.push(pair(&set.s));
    for v in [&set.n, &set.pi, &set.pi_sym] {
        out.extend(v.components().iter().map(pair));
    }
    Ok(out)
}

fn alpha_beta_decomposition(ctx: &Context) -> Result<Pairs> {
    let set = ctx.set;
    let a = diag_s_fn(&set.basis, alpha(set.eta))?;
    let b = diag_s_fn(&set.basis, beta(set.eta))?;
    (0..3)
        .map(|k| {
            let rhs = a
                .checked_mul(set.n.component(k))?
                .checked_add(&times_i(&b.checked_mul(set.pi.component(k))?))?;
            Ok((set.z.component(k).clone(), rhs))
        })
        .collect()
}

fn family(
    name: &'static str,
    citation: &'static str,
    tolerance: f64,
    labels: Vec<String>,
    build: Builder,
) -> IdentityCheck {
    IdentityCheck {
        name,
        citation,
        tolerance,
        kind: CheckKind::Equality,
        role: Role::Core,
        labels,
        build,
    }
}

fn single() -> Vec<String> {
    vec!["scalar".to_string()]
}

/// The registry: twelve core families, the negative control on the naive
/// momentum `P`, and supplementary structural checks.
pub fn standard_suite() -> Vec<IdentityCheck> {
    let mut checks = vec![
        family(
            "su2_algebra",
            "Schwinger-boson angular momentum J = a†(σ/2)a obeys [Ji, Jj] = iεijk Jk",
            1e-13,
            cyclic_labels(),
            su2_algebra,
        ),
        family(
            "shifted_s_squared",
            "shifted angular momentum S = sqrt(J² + 1/4), diagonal with (n+1)/2",
            1e-13,
            single(),
            shifted_s_squared,
        ),
        family(
            "cross_j_n",
            "cross-product relations J×N = Π + iN and N×J = −Π + iN",
            1e-12,
            [axis_labels("j_cross_n"), axis_labels("n_cross_j")].concat(),
            cross_j_n,
        ),
        family(
            "cross_pi_j",
            "cross-product relations Π×J = N(Π² + 1) and J×Π = (−Π² + 1)N, as printed",
            1e-11,
            [axis_labels("pi_cross_j"), axis_labels("j_cross_pi")].concat(),
            cross_pi_j,
        ),
        family(
            "pi_squared",
            "geometric momentum squared Π² = J² + 1 on the unit sphere",
            1e-12,
            single(),
            pi_squared,
        ),
        family(
            "n_squared",
            "unit direction operator N·N = 1, the operator form of x² = a²",
            1e-12,
            single(),
            n_squared,
        ),
        family(
            "tangency",
            "operator relation N·Π + Π·N = 0, the quantum form of x·p = 0",
            1e-12,
            single(),
            tangency,
        ),
        family(
            "vector_operator_z",
            "annihilation operators form a vector operator, [Ji, Zj] = iεijk Zk",
            1e-11,
            vector_operator_labels(),
            vector_operator_z,
        ),
        family(
            "z_commute",
            "annihilation operators commute, [Zi, Zj] = 0",
            1e-10,
            cyclic_labels(),
            z_commute,
        ),
        family(
            "z_squared",
            "annihilation operators square to one, Z·Z = 1",
            1e-10,
            single(),
            z_squared,
        ),
        family(
            "z_via_p",
            "Z written with the non-Hermitian P = J×N equals Z written with Π",
            1e-12,
            axis_labels(""),
            z_via_p,
        ),
        family(
            "z_closed_form",
            "closed Schwinger-boson form of Z±, Zz equals α(S)N + iβ(S)Π at η = 1",
            1e-10,
            axis_labels(""),
            z_closed_form,
        ),
    ];

    let mut negative = family(
        "naive_p_tangency",
        "the naive momentum P = J×N violates P·N + N·P = 0",
        0.5,
        single(),
        naive_p_tangency,
    );
    negative.kind = CheckKind::NormExceeds(0.5);
    negative.role = Role::NegativeControl;
    checks.push(negative);

    let supplementary = [
        family(
            "pi_sym_equals_pi",
            "symmetrized ½(J×N − N×J) equals the S-dressed Schwinger form of Π",
            1e-12,
            axis_labels(""),
            pi_sym_equals_pi,
        ),
        family(
            "cross_pi_j_corrected",
            "Π×J = N(Π² − 1), the sign-corrected first cross-product relation",
            1e-11,
            axis_labels("pi_cross_j"),
            cross_pi_j_corrected,
        ),
        family(
            "hermiticity",
            "J, S, N, Π and the symmetrized Π are Hermitian",
            1e-13,
            hermiticity_labels(),
            hermiticity,
        ),
        family(
            "alpha_beta_decomposition",
            "Z = α(S)N + iβ(S)Π with α = e^{η/2}(cosh ηS − sinh ηS/2S), β = e^{η/2} sinh(ηS)/S",
            1e-13,
            axis_labels(""),
            alpha_beta_decomposition,
        ),
    ];
    for mut s in supplementary {
        s.role = Role::Supplementary;
        checks.push(s);
    }
    checks
}

/// Which part of the basis the checks are evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubspacePolicy {
    /// Extra blocks excluded beyond each expression's grade width.
    pub guard_extra: usize,
    pub sector: Sector,
    /// Evaluate as if the basis stopped at this `n_max`, so runs at different
    /// truncations compare the same blocks.
    pub reference_n_max: Option<usize>,
    /// Replaces every equality tolerance when set.
    pub tolerance_override: Option<f64>,
}

impl Default for SubspacePolicy {
    fn default() -> Self {
        SubspacePolicy {
            guard_extra: 2,
            sector: Sector::IntegerJ,
            reference_n_max: None,
            tolerance_override: None,
        }
    }
}

impl SubspacePolicy {
    /// Blocks on which an expression of grade width `width` is truncation-exact.
    pub fn subspace(&self, n_max: usize, width: usize) -> Subspace {
        let top = self.reference_n_max.map_or(n_max, |r| r.min(n_max));
        let guard = width + self.guard_extra;
        if guard > top {
            return Subspace::from_totals([]);
        }
        Subspace::from_totals(0..=top - guard).restrict(self.sector)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub family: String,
    pub role: Role,
    pub citation: String,
    pub n_max: usize,
    pub eta: f64,
    pub sector: Sector,
    /// Grade width of the wider side plus the guard margin.
    pub width: usize,
    pub guarded_dim: usize,
    /// `None` when the guarded subspace is empty.
    pub relative_deviation: Option<f64>,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub status: Status,
    pub pass: bool,
    pub hint: Option<String>,
}

fn judge(kind: CheckKind, tolerance: f64, deviation: f64) -> bool {
    match kind {
        CheckKind::Equality => deviation <= tolerance,
        CheckKind::NormExceeds(bound) => deviation > bound,
    }
}

fn evaluate(
    check: &IdentityCheck,
    ctx: &Context,
    policy: &SubspacePolicy,
) -> Result<Vec<IdentityReport>> {
    let set = ctx.set;
    let tolerance = match (check.kind, policy.tolerance_override) {
        (CheckKind::Equality, Some(t)) => t,
        _ => check.tolerance,
    };
    let scalars = check.expand_in(ctx)?;
    Ok(scalars
        .into_par_iter()
        .map(|sc| {
            let width = sc.width + policy.guard_extra;
            let sub = policy.subspace(set.n_max(), sc.width);
            let (deviation, status, hint) = if sub.is_empty() {
                let hint = format!("guarded subspace is empty; raise n_max to at least {width}");
                (None, Status::Inconclusive, Some(hint))
            } else {
                let d = residual(&sc.lhs, &sc.rhs, &sub);
                let status = if judge(check.kind, tolerance, d) {
                    Status::Pass
                } else {
                    Status::Fail
                };
                (Some(d), status, None)
            };
            IdentityReport {
                name: sc.name,
                family: check.name.to_string(),
                role: check.role,
                citation: check.citation.to_string(),
                n_max: set.n_max(),
                eta: set.eta,
                sector: policy.sector,
                width,
                guarded_dim: sub.dim(),
                relative_deviation: deviation,
                tolerance,
                kind: check.kind,
                status,
                pass: status == Status::Pass,
                hint,
            }
        })
        .collect())
}

/// Evaluates every check on its guarded subspace; reports are ordered by name.
pub fn run(
    set: &OperatorSet,
    checks: &[IdentityCheck],
    policy: &SubspacePolicy,
) -> Result<Vec<IdentityReport>> {
    let ctx = Context::new(set);
    let nested = checks
        .par_iter()
        .map(|c| evaluate(c, &ctx, policy))
        .collect::<Result<Vec<_>>>()?;
    let mut reports: Vec<IdentityReport> = nested.into_iter().flatten().collect();
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

/// Summary status over a set of reports: any failure dominates, then any
/// inconclusive check.
pub fn overall(reports: &[IdentityReport]) -> Status {
    if reports.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else if reports.iter().any(|r| r.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}

/// Looks up a family by name.
pub fn find<'c>(checks: &'c [IdentityCheck], name: &str) -> Option<&'c IdentityCheck> {
    checks.iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn by_name<'r>(reports: &'r [IdentityReport], name: &str) -> &'r IdentityReport {
        reports.iter().find(|r| r.name == name).unwrap()
    }

    #[test]
    fn suite_shape() {
        let suite = standard_suite();
        let core: Vec<_> = suite.iter().filter(|c| c.role == Role::Core).collect();
        assert_eq!(core.len(), 12);
        let core_scalar: usize = core.iter().map(|c| c.scalar_names().len()).sum();
        assert_eq!(core_scalar, 38);
        let scalar: usize = suite.iter().map(|c| c.scalar_names().len()).sum();
        assert!(scalar >= 40, "{scalar}");
        assert_eq!(
            suite
                .iter()
                .filter(|c| c.role == Role::NegativeControl)
                .count(),
            1
        );
        assert!(suite.iter().all(|c| !c.citation.is_empty()));
        let mut names: Vec<_> = suite.iter().flat_map(|c| c.scalar_names()).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn small_truncation_passes_and_is_ordered() {
        let set = OperatorSet::build(12, 1.0).unwrap();
        let reports = run(&set, &standard_suite(), &SubspacePolicy::default()).unwrap();
        assert!(reports.windows(2).all(|w| w[0].name < w[1].name));
        for r in &reports {
            if r.name.starts_with("cross_pi_j.pi_cross_j") {
                assert_eq!(r.status, Status::Fail, "{r:?}");
            } else {
                assert_eq!(r.status, Status::Pass, "{r:?}");
            }
        }
        let neg = by_name(&reports, "naive_p_tangency.scalar");
        assert!(neg.relative_deviation.unwrap() > 0.5 && neg.pass);
        assert_eq!(by_name(&reports, "z_squared.scalar").width, 6);
        assert_eq!(by_name(&reports, "cross_pi_j.pi_cross_j.x").width, 8);
    }

    #[test]
    fn empty_guard_is_inconclusive() {
        let set = OperatorSet::build(2, 1.0).unwrap();
        let reports = run(&set, &standard_suite(), &SubspacePolicy::default()).unwrap();
        let wide = by_name(&reports, "cross_pi_j.pi_cross_j.x");
        assert_eq!(wide.status, Status::Inconclusive);
        assert!(!wide.pass && wide.hint.as_deref().unwrap().contains("raise n_max"));
        assert_eq!(by_name(&reports, "su2_algebra.xy").status, Status::Pass);
        assert_eq!(overall(&reports), Status::Inconclusive);
    }

    #[test]
    fn rerun_is_bit_identical() {
        let set = OperatorSet::build(8, 0.5).unwrap();
        let suite = standard_suite();
        let a = run(&set, &suite, &SubspacePolicy::default()).unwrap();
        let b = run(&set, &suite, &SubspacePolicy::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn override_applies_to_equalities_only() {
        let set = OperatorSet::build(6, 1.0).unwrap();
        let policy = SubspacePolicy {
            tolerance_override: Some(1e-3),
            ..SubspacePolicy::default()
        };
        let all = standard_suite();
        let suite = [
            find(&all, "naive_p_tangency").unwrap().clone(),
            find(&all, "su2_algebra").unwrap().clone(),
        ];
        let reports = run(&set, &suite, &policy).unwrap();
        assert_eq!(by_name(&reports, "naive_p_tangency.scalar").tolerance, 0.5);
        assert_eq!(by_name(&reports, "su2_algebra.xy").tolerance, 1e-3);
    }
}

//! Built-in cross-validation suite behind `esdlab verify`.
//!
//! Each check compares two independent computation paths (closed form vs
//! integrator, closed-form concurrence vs spectrum, closed-form roots vs the
//! generic solver, propagator derivative vs the generator) on seeded random
//! inputs. The optional propagator perturbation corrupts the closed form on
//! purpose so the harness itself can be validated end to end: a perturbed
//! run must fail.

use std::fmt;

use rand::Rng;

use crate::dynamics::{analytic_coefficients, evolve_numeric, ode_rhs_x, PropagatorPolynomials};
use crate::entanglement::{concurrence_general, concurrence_x};
use crate::esd::{
    certify_finite_death, closed_form_roots_wzero, death_quartics, esd_report, EsdError,
};
use crate::families::bell_psi_plus;
use crate::numerics::solve_quartic_real;
use crate::sampling::{random_entangled_xstate, random_xstate, seeded_rng};
use crate::state::{xstate_to_matrix, BathParams, XState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed,
    NotApplicable,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Passed => write!(f, "pass"),
            CheckStatus::Failed => write!(f, "FAIL"),
            CheckStatus::NotApplicable => write!(f, "n/a"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Largest deviation observed, comparable against `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn from_worst(name: &'static str, worst: f64, tolerance: f64, detail: String) -> Self {
        let status = if worst <= tolerance {
            CheckStatus::Passed
        } else {
            CheckStatus::Failed
        };
        Self {
            name,
            status,
            worst,
            tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Failed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<28} {:<6} {:>12} {:>12}",
            "check", "status", "worst", "tolerance"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<28} {:<6} {:>12.3e} {:>12.1e}",
                c.name, c.status, c.worst, c.tolerance
            )?;
            if !c.detail.is_empty() {
                writeln!(f, "    {}", c.detail)?;
            }
        }
        write!(
            f,
            "self-check: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Relative corruption of the propagator's linear coefficients; 0 runs
    /// the honest code, anything at or above ~1e-7 must fail the
    /// analytic-vs-numeric check.
    pub propagator_perturbation: f64,
    /// Occupation for the finite-death check; at 0 the certificate does not
    /// apply and the check reports n/a.
    pub nbar: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            propagator_perturbation: 0.0,
            nbar: None,
        }
    }
}

fn perturbed_coefficients(state: &XState, nbar: f64, epsilon: f64) -> PropagatorPolynomials {
    let mut p = analytic_coefficients(state, nbar).expect("sampled state is valid");
    p.a.c[1] *= 1.0 + epsilon;
    p.b.c[1] *= 1.0 + epsilon;
    p.c.c[1] *= 1.0 + epsilon;
    p.d.c[1] *= 1.0 + epsilon;
    p
}

fn state_distance(x: &XState, y: &XState) -> f64 {
    (x.a - y.a)
        .abs()
        .max((x.b - y.b).abs())
        .max((x.c - y.c).abs())
        .max((x.d - y.d).abs())
        .max((x.z - y.z).norm())
        .max((x.w - y.w).norm())
}

fn check_analytic_vs_numeric(config: &VerifyConfig) -> CheckResult {
    let mut rng = seeded_rng(config.seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let s = random_xstate(&mut rng);
        for nbar in [0.0, 0.5, 2.0] {
            let bath = BathParams::new(1.0, nbar).expect("valid bath");
            let coeffs = perturbed_coefficients(&s, nbar, config.propagator_perturbation);
            for t in [0.5, 2.0] {
                let x = (-bath.nu() * t).exp();
                let closed = coeffs.evaluate(x);
                let numeric = evolve_numeric(&s, &bath, t, 1e-3).expect("integration succeeds");
                worst = worst.max(state_distance(&closed, &numeric));
            }
        }
    }
    CheckResult::from_worst("analytic_vs_numeric", worst, 1e-8, String::new())
}

fn check_concurrence_dual_path(config: &VerifyConfig) -> CheckResult {
    let mut rng = seeded_rng(config.seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let s = random_xstate(&mut rng);
        let cx = concurrence_x(&s).expect("valid state").value();
        let rho = xstate_to_matrix(&s).expect("valid state");
        match concurrence_general(&rho) {
            Ok(cg) => worst = worst.max((cx - cg.value()).abs()),
            Err(e) => {
                return CheckResult {
                    name: "concurrence_dual_path",
                    status: CheckStatus::Failed,
                    worst: f64::INFINITY,
                    tolerance: 1e-10,
                    detail: format!("spectrum path failed: {e}"),
                }
            }
        }
    }
    CheckResult::from_worst("concurrence_dual_path", worst, 1e-10, String::new())
}

fn min_separation(roots: &[f64]) -> f64 {
    roots
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::INFINITY, f64::min)
}

fn check_closed_form_vs_quartic(config: &VerifyConfig) -> CheckResult {
    let mut rng = seeded_rng(config.seed.wrapping_add(2));
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    let mut skipped = 0usize;
    while compared < 100 {
        let raw = random_xstate(&mut rng);
        let nbar = 0.05 + 1.95 * rng.gen::<f64>();
        let s = XState::new(
            raw.a,
            raw.b,
            raw.c,
            raw.d,
            raw.z,
            num_complex::Complex64::new(0.0, 0.0),
        )
        .expect("dropping w keeps the state valid");
        let cf = match closed_form_roots_wzero(&s, nbar) {
            Ok(cf) => cf,
            Err(EsdError::DegenerateDenominator { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => {
                return CheckResult {
                    name: "closed_form_vs_quartic",
                    status: CheckStatus::Failed,
                    worst: f64::INFINITY,
                    tolerance: 1e-9,
                    detail: format!("closed form failed: {e}"),
                };
            }
        };
        // conditioning guards: well-scaled denominator and separated roots,
        // where both paths are accurate to the comparison tolerance
        if (4.0 * cf.e).abs() < 1e-6 || min_separation(&cf.roots) < 1e-4 {
            skipped += 1;
            continue;
        }
        compared += 1;
        let q = death_quartics(&analytic_coefficients(&s, nbar).expect("valid state"));
        let solver = match solve_quartic_real(&q.inner) {
            Ok(rs) => rs.values_with_multiplicity(),
            Err(e) => {
                return CheckResult {
                    name: "closed_form_vs_quartic",
                    status: CheckStatus::Failed,
                    worst: f64::INFINITY,
                    tolerance: 1e-9,
                    detail: format!("quartic solver failed: {e}"),
                };
            }
        };
        if solver.len() != cf.roots.len() {
            return CheckResult {
                name: "closed_form_vs_quartic",
                status: CheckStatus::Failed,
                worst: f64::INFINITY,
                tolerance: 1e-9,
                detail: format!("root count {} vs {}", solver.len(), cf.roots.len()),
            };
        }
        for (got, want) in solver.iter().zip(&cf.roots) {
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    CheckResult::from_worst(
        "closed_form_vs_quartic",
        worst,
        1e-9,
        format!("{compared} compared, {skipped} skipped as ill-conditioned"),
    )
}

fn check_quartic_anchors(config: &VerifyConfig) -> CheckResult {
    let mut rng = seeded_rng(config.seed.wrapping_add(3));
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = random_xstate(&mut rng);
        let nbar = 3.0 * rng.gen::<f64>();
        let q = death_quartics(&analytic_coefficients(&s, nbar).expect("valid state"));
        let nu2 = (2.0 * nbar + 1.0).powi(2);
        let q0 = -(nbar * (nbar + 1.0) / nu2).powi(2);
        worst = worst.max((q.inner.eval(0.0) - q0).abs());
        worst = worst.max((q.outer.eval(0.0) - q0).abs());
        worst = worst.max((q.inner.eval(1.0) - (s.z.norm_sqr() - s.a * s.d)).abs());
        worst = worst.max((q.outer.eval(1.0) - (s.w.norm_sqr() - s.b * s.c)).abs());
    }
    // frozen reference points
    let bell = death_quartics(&analytic_coefficients(&bell_psi_plus(), 1.0).expect("bell"));
    worst = worst.max((bell.inner.eval(0.0) + 4.0 / 81.0).abs());
    let half = (1.0 - 0.1 - 0.05) / 2.0;
    let edge = XState::new(
        0.1,
        half,
        half,
        0.05,
        num_complex::Complex64::new(0.3, 0.0),
        num_complex::Complex64::new(0.0, 0.0),
    )
    .expect("valid state");
    let q = death_quartics(&analytic_coefficients(&edge, 0.8).expect("valid state"));
    worst = worst.max((q.inner.eval(0.0) + 0.045376562445292532).abs());
    CheckResult::from_worst("quartic_anchors", worst, 1e-12, String::new())
}

fn check_generator_consistency(config: &VerifyConfig) -> CheckResult {
    let mut rng = seeded_rng(config.seed.wrapping_add(4));
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let s = random_xstate(&mut rng);
        for nbar in [0.0, 1.0, 2.5] {
            let nu = 2.0 * nbar + 1.0;
            let p = analytic_coefficients(&s, nbar).expect("valid state");
            for x in [0.3, 0.8] {
                // d/dt = dX/dt * d/dX with dX/dt = -nu X at gamma = 1
                let xdot = -nu * x;
                let rate = ode_rhs_x(&p.evaluate(x), nbar);
                worst = worst.max((p.a.eval_derivative(x) * xdot - rate.da).abs());
                worst = worst.max((p.b.eval_derivative(x) * xdot - rate.db).abs());
                worst = worst.max((p.c.eval_derivative(x) * xdot - rate.dc).abs());
                worst = worst.max((p.d.eval_derivative(x) * xdot - rate.dd).abs());
                worst = worst.max((p.z0 * xdot - rate.dz).norm());
                worst = worst.max((p.w0 * xdot - rate.dw).norm());
            }
        }
    }
    CheckResult::from_worst("generator_consistency", worst, 1e-11, String::new())
}

fn check_finite_death(config: &VerifyConfig) -> CheckResult {
    let nbar = config.nbar.unwrap_or(0.7);
    if nbar == 0.0 {
        return CheckResult {
            name: "finite_death_theorem",
            status: CheckStatus::NotApplicable,
            worst: 0.0,
            tolerance: 1e-9,
            detail: "certificate requires nbar > 0; some states stay entangled forever at nbar = 0"
                .into(),
        };
    }
    let mut rng = seeded_rng(config.seed.wrapping_add(5));
    let bath = BathParams::new(1.0, nbar).expect("valid bath");
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = random_entangled_xstate(&mut rng, 1e-4);
        let failure = |detail: String| CheckResult {
            name: "finite_death_theorem",
            status: CheckStatus::Failed,
            worst: f64::INFINITY,
            tolerance: 1e-9,
            detail,
        };
        let cert = match certify_finite_death(&s, nbar) {
            Ok(c) => c,
            Err(e) => return failure(format!("certificate failed: {e}")),
        };
        if !(cert.crossing_x > 0.0 && cert.crossing_x < 1.0) {
            return failure(format!("crossing {} outside (0,1)", cert.crossing_x));
        }
        let report = match esd_report(&s, &bath) {
            Ok(r) => r,
            Err(e) => return failure(format!("report failed: {e}")),
        };
        let death = match report.death_x {
            Some(x) if x > 0.0 && x < 1.0 && !report.asymptotically_entangled => x,
            other => return failure(format!("death coordinate {other:?}")),
        };
        let after = analytic_coefficients(&s, nbar)
            .expect("valid state")
            .evaluate(death * 0.999);
        worst = worst.max(concurrence_x(&after).expect("propagated state").value());
    }
    CheckResult::from_worst(
        "finite_death_theorem",
        worst,
        1e-9,
        format!("nbar = {nbar}"),
    )
}

/// Run every check; the report carries per-check outcomes and worst
/// deviations.
pub fn run_verify(config: &VerifyConfig) -> VerifyReport {
    VerifyReport {
        checks: vec![
            check_analytic_vs_numeric(config),
            check_concurrence_dual_path(config),
            check_closed_form_vs_quartic(config),
            check_quartic_anchors(config),
            check_generator_consistency(config),
            check_finite_death(config),
        ],
    }
}

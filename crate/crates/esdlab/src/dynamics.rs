//! Dissipative dynamics of X states under independent thermal baths.
//!
//! With nu = 2 nbar + 1 and the decay coordinate X = exp(-gamma nu t), the
//! populations evolve as quadratics in X and both coherences as z0 X, w0 X.
//! Writing u1 = 1 + nu (a0 - d0) and k = nu^2 a0 - nbar^2 - nbar u1, the
//! populations are, over nu^2:
//!
//! ```text
//! nu^2 a(X) = nbar^2        + nbar u1 X                        + k X^2
//! nu^2 b(X) = nbar (nbar+1) + (u1 + nu^2 (b0 - c0)) / 2 * X    - k X^2
//! nu^2 c(X) = nbar (nbar+1) + (u1 - nu^2 (b0 - c0)) / 2 * X    - k X^2
//! nu^2 d(X) = (nbar+1)^2    - (nbar+1) u1 X                    + k X^2
//! ```
//!
//! so the only decay modes are 1, X, X^2 (rates 0, gamma nu, 2 gamma nu).
//! The coefficients are built so that swapping b0 and c0 swaps the b and c
//! polynomials bitwise, and b(X) - c(X) = (b0 - c0) X holds to rounding.
//!
//! The same generator is also exposed as an ODE right-hand side (both in the
//! 8-real-component X parametrization and on full 4x4 matrices) so that a
//! fixed-step RK4 integration can cross-check the closed form.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{rk4_integrate, NumericsError};
use crate::state::{x_of_t, BathParams, StateError, XCoordinate, XState};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("time step dt = {dt} must be positive and finite")]
    InvalidTimeStep { dt: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Population as a quadratic in X: c[0] + c[1] X + c[2] X^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationQuadratic {
    pub c: [f64; 3],
}

impl PopulationQuadratic {
    fn new(c: [f64; 3]) -> Self {
        debug_assert!(c.iter().all(|v| v.is_finite()));
        Self { c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.c[2] * x + self.c[1]) * x + self.c[0]
    }

    /// d/dX of the quadratic.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        2.0 * self.c[2] * x + self.c[1]
    }
}

/// The closed-form propagator of one initial X state at one bath occupation:
/// population quadratics in X plus the initial coherences (which just pick up
/// a factor X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorPolynomials {
    pub a: PopulationQuadratic,
    pub b: PopulationQuadratic,
    pub c: PopulationQuadratic,
    pub d: PopulationQuadratic,
    pub z0: Complex64,
    pub w0: Complex64,
    pub nbar: f64,
}

impl PropagatorPolynomials {
    /// State at decay coordinate `x`. Exact propagation of a valid state
    /// stays valid for x in [0, 1], so no re-validation is performed.
    pub fn evaluate(&self, x: f64) -> XState {
        XState::new_unchecked(
            self.a.eval(x),
            self.b.eval(x),
            self.c.eval(x),
            self.d.eval(x),
            self.z0 * x,
            self.w0 * x,
        )
    }
}

/// Propagator coefficients for `state` at occupation `nbar`.
pub fn analytic_coefficients(
    state: &XState,
    nbar: f64,
) -> Result<PropagatorPolynomials, DynamicsError> {
    state.validate()?;
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(StateError::BadBathParams {
            reason: "nbar must be finite and nonnegative",
        }
        .into());
    }
    let nu = 2.0 * nbar + 1.0;
    let nu2 = nu * nu;
    let np1 = nbar + 1.0;
    let u1 = 1.0 + nu * (state.a - state.d);
    let k = nu2 * state.a - nbar * nbar - nbar * u1;
    // v flips sign exactly under b0 <-> c0, making the swap symmetry bitwise
    let v = nu2 * (state.b - state.c);
    let b1 = 0.5 * (u1 + v);
    let c1 = 0.5 * (u1 - v);
    let q = nbar * np1;
    Ok(PropagatorPolynomials {
        a: PopulationQuadratic::new([nbar * nbar / nu2, nbar * u1 / nu2, k / nu2]),
        b: PopulationQuadratic::new([q / nu2, b1 / nu2, -k / nu2]),
        c: PopulationQuadratic::new([q / nu2, c1 / nu2, -k / nu2]),
        d: PopulationQuadratic::new([np1 * np1 / nu2, -(np1 * u1) / nu2, k / nu2]),
        z0: state.z,
        w0: state.w,
        nbar,
    })
}

/// Closed-form state at time `t`.
pub fn evolve_analytic(state: &XState, bath: &BathParams, t: f64) -> Result<XState, DynamicsError> {
    let coeffs = analytic_coefficients(state, bath.nbar())?;
    let x = x_of_t(t, bath)?;
    Ok(coeffs.evaluate(x.value()))
}

/// Closed-form state at decay coordinate `x` (gamma drops out).
pub fn evolve_at_x(state: &XState, nbar: f64, x: XCoordinate) -> Result<XState, DynamicsError> {
    Ok(analytic_coefficients(state, nbar)?.evaluate(x.value()))
}

/// Time derivative of an X state under the thermal generator at gamma = 1
/// (rates scale linearly in gamma).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateRate {
    pub da: f64,
    pub db: f64,
    pub dc: f64,
    pub dd: f64,
    pub dz: Complex64,
    pub dw: Complex64,
}

/// Components in the order [a, b, c, d, Re z, Im z, Re w, Im w].
fn rhs8(y: &[f64], nbar: f64) -> Vec<f64> {
    let np1 = nbar + 1.0;
    let nu = 2.0 * nbar + 1.0;
    let (a, b, c, d) = (y[0], y[1], y[2], y[3]);
    vec![
        -2.0 * np1 * a + nbar * (b + c),
        np1 * a - nu * b + nbar * d,
        np1 * a - nu * c + nbar * d,
        np1 * (b + c) - 2.0 * nbar * d,
        -nu * y[4],
        -nu * y[5],
        -nu * y[6],
        -nu * y[7],
    ]
}

/// Generator applied to an X state, at gamma = 1.
pub fn ode_rhs_x(state: &XState, nbar: f64) -> XStateRate {
    let y = [
        state.a, state.b, state.c, state.d, state.z.re, state.z.im, state.w.re, state.w.im,
    ];
    let r = rhs8(&y, nbar);
    XStateRate {
        da: r[0],
        db: r[1],
        dc: r[2],
        dd: r[3],
        dz: Complex64::new(r[4], r[5]),
        dw: Complex64::new(r[6], r[7]),
    }
}

/// RK4 integration of the X-state generator from 0 to `t` with step `dt`
/// (both in the same units as 1/gamma; integration is carried out in the
/// dimensionless time gamma t).
pub fn evolve_numeric(
    state: &XState,
    bath: &BathParams,
    t: f64,
    dt: f64,
) -> Result<XState, DynamicsError> {
    state.validate()?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(DynamicsError::InvalidTimeStep { dt });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(StateError::NegativeTime { t }.into());
    }
    let nbar = bath.nbar();
    let y0 = [
        state.a, state.b, state.c, state.d, state.z.re, state.z.im, state.w.re, state.w.im,
    ];
    let y = rk4_integrate(|y| rhs8(y, nbar), &y0, bath.gamma() * t, bath.gamma() * dt)?;
    Ok(XState::new_unchecked(
        y[0],
        y[1],
        y[2],
        y[3],
        Complex64::new(y[4], y[5]),
        Complex64::new(y[6], y[7]),
    ))
}

pub(crate) fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    m
}

fn dissipator(l: &Matrix4<Complex64>, rho: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let ldag = l.adjoint();
    let ll = ldag * l;
    l * rho * ldag - (ll * rho + rho * ll) * Complex64::new(0.5, 0.0)
}

/// Thermal generator on an arbitrary 4x4 matrix at gamma = 1: each qubit
/// couples to its own bath through lowering/raising operators weighted by
/// (nbar + 1) and nbar. Basis order |11>, |10>, |01>, |00>, left ket = qubit A.
pub fn lindblad_rhs_full(rho: &Matrix4<Complex64>, nbar: f64) -> Matrix4<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // single-qubit basis [|1>, |0>]: lowering = |0><1|
    let sm = Matrix2::new(o, o, one, o);
    let id = Matrix2::identity();
    let sm_a = kron2(&sm, &id);
    let sm_b = kron2(&id, &sm);
    let np1 = Complex64::new(nbar + 1.0, 0.0);
    let nb = Complex64::new(nbar, 0.0);
    let mut out = Matrix4::zeros();
    for l in [sm_a, sm_b] {
        out += dissipator(&l, rho) * np1 + dissipator(&l.adjoint(), rho) * nb;
    }
    out
}

/// Unique stationary state: the product of single-qubit thermal states,
/// populations (nbar^2, nbar(nbar+1), nbar(nbar+1), (nbar+1)^2) / nu^2 and
/// no coherence.
pub fn steady_state(nbar: f64) -> XState {
    assert!(
        nbar.is_finite() && nbar >= 0.0,
        "nbar must be finite and nonnegative"
    );
    let nu = 2.0 * nbar + 1.0;
    let nu2 = nu * nu;
    let np1 = nbar + 1.0;
    let o = Complex64::new(0.0, 0.0);
    XState::new_unchecked(
        nbar * nbar / nu2,
        nbar * np1 / nu2,
        nbar * np1 / nu2,
        np1 * np1 / nu2,
        o,
        o,
    )
}

//! Death-coordinate analysis: where in X does entanglement vanish.
//!
//! An X state is entangled exactly when |z| > sqrt(a d) or |w| > sqrt(b c).
//! Along the flow both comparisons square into quartic sign conditions in X:
//!
//! ```text
//! q_inner(X) = |z0|^2 X^2 - a(X) d(X) > 0     (inner channel)
//! q_outer(X) = |w0|^2 X^2 - b(X) c(X) > 0     (outer channel)
//! ```
//!
//! For nbar > 0 both quartics equal -(nbar (nbar+1))^2 / nu^4 < 0 at X = 0,
//! so every entangled state disentangles at finite time: bracketing a root of
//! the initially positive channel between 0 and 1 is a constructive
//! certificate. At nbar = 0 the X = 0 value degenerates to 0 and some states
//! stay entangled for all times.
//!
//! When w0 = 0 the inner quartic factors through the population quadratics
//! and its four roots have a closed form; it is implemented here alongside
//! the generic solver as an independent cross-check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{analytic_coefficients, DynamicsError, PropagatorPolynomials};
use crate::entanglement::{concurrence_x, EntanglementError};
use crate::numerics::{refine_bracketed_root, solve_quartic_real, NumericsError, Poly4, RootSet};
use crate::state::{t_of_x, BathParams, StateError, XCoordinate, XState};

/// Breakpoints closer than this are treated as one.
const BREAKPOINT_DEDUP: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EsdError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("state is not entangled; there is no death coordinate to certify")]
    NotEntangled,
    #[error("the finite-death certificate requires nbar > 0")]
    ZeroTemperature,
    #[error("closed-form denominator 4E = {denominator} is degenerate; use the quartic solver")]
    DegenerateDenominator { denominator: f64 },
    #[error("closed form applies only when the outer coherence vanishes, |w| = {w_abs}")]
    WCoherencePresent { w_abs: f64 },
}

/// Which coherence carries the entanglement witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceChannel {
    /// z against sqrt(a d)
    Inner,
    /// w against sqrt(b c)
    Outer,
}

/// The two sign-condition quartics of one propagated state.
#[derive(Debug, Clone, PartialEq)]
pub struct DeathQuartics {
    pub inner: Poly4,
    pub outer: Poly4,
}

fn convolve3(u: &[f64; 3], v: &[f64; 3]) -> [f64; 5] {
    [
        u[0] * v[0],
        u[0] * v[1] + u[1] * v[0],
        u[0] * v[2] + u[1] * v[1] + u[2] * v[0],
        u[1] * v[2] + u[2] * v[1],
        u[2] * v[2],
    ]
}

/// Quartics whose positivity marks entanglement of each channel along X.
pub fn death_quartics(p: &PropagatorPolynomials) -> DeathQuartics {
    let ad = convolve3(&p.a.c, &p.d.c);
    let bc = convolve3(&p.b.c, &p.c.c);
    let z2 = p.z0.norm_sqr();
    let w2 = p.w0.norm_sqr();
    DeathQuartics {
        inner: Poly4::new([-ad[0], -ad[1], z2 - ad[2], -ad[3], -ad[4]]),
        outer: Poly4::new([-bc[0], -bc[1], w2 - bc[2], -bc[3], -bc[4]]),
    }
}

/// Full account of where the state is entangled along X, with the death
/// coordinate and death time if disentanglement happens at finite time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdReport {
    pub nbar: f64,
    pub gamma: f64,
    pub initial_concurrence: f64,
    /// Interior (0,1) roots of the inner/outer quartic, ascending.
    pub roots_inner: Vec<f64>,
    pub roots_outer: Vec<f64>,
    /// Roots within 1e-12 of X = 0 or X = 1, reported but not used as
    /// interval breakpoints.
    pub boundary_roots_inner: Vec<f64>,
    pub boundary_roots_outer: Vec<f64>,
    /// Maximal X intervals inside [0, 1] on which the concurrence is
    /// positive, ascending in X.
    pub entangled_intervals: Vec<[f64; 2]>,
    /// True when entanglement survives to X -> 0, i.e. for all finite times.
    pub asymptotically_entangled: bool,
    /// Largest X below which entanglement is gone for good; None when
    /// asymptotically entangled. A state that is separable from the start
    /// reports death_x = 1 (dead at t = 0).
    pub death_x: Option<f64>,
    /// Time corresponding to death_x at this gamma.
    pub death_time: Option<f64>,
}

fn channel_roots(q: &Poly4) -> Result<RootSet, EsdError> {
    match solve_quartic_real(q) {
        Ok(rs) => Ok(rs),
        // identically zero channel (e.g. z0 = 0 with a population that
        // vanishes for all X): never strictly positive, no breakpoints
        Err(NumericsError::ZeroPolynomial) => Ok(RootSet::default()),
        Err(e) => Err(e.into()),
    }
}

/// Sign analysis of both channels over X in [0, 1].
pub fn esd_report(state: &XState, bath: &BathParams) -> Result<EsdReport, EsdError> {
    let coeffs = analytic_coefficients(state, bath.nbar())?;
    let q = death_quartics(&coeffs);
    let inner = channel_roots(&q.inner)?.in_open_unit_interval();
    let outer = channel_roots(&q.outer)?.in_open_unit_interval();

    let mut pts: Vec<f64> = Vec::with_capacity(inner.interior.len() + outer.interior.len() + 2);
    pts.push(0.0);
    pts.extend_from_slice(&inner.interior);
    pts.extend_from_slice(&outer.interior);
    pts.push(1.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|next, kept| (*next - *kept).abs() <= BREAKPOINT_DEDUP);

    let entangled_at = |x: f64| q.inner.eval(x) > 0.0 || q.outer.eval(x) > 0.0;
    let mut intervals: Vec<[f64; 2]> = Vec::new();
    for pair in pts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if !entangled_at(0.5 * (lo + hi)) {
            continue;
        }
        // extend the previous interval unless the shared breakpoint is a
        // genuine (isolated) death point of both channels
        match intervals.last_mut() {
            Some(prev) if prev[1] == lo && entangled_at(lo) => prev[1] = hi,
            _ => intervals.push([lo, hi]),
        }
    }

    let initial_concurrence = concurrence_x(state)?.value();
    let (asymptotically_entangled, death_x) = match intervals.first() {
        None => (false, Some(1.0)),
        Some([lo, _]) if *lo == 0.0 => (true, None),
        Some([lo, _]) => (false, Some(*lo)),
    };
    let death_time = match death_x {
        Some(1.0) => Some(0.0),
        Some(x) => Some(t_of_x(XCoordinate::new(x)?, bath)?),
        None => None,
    };
    Ok(EsdReport {
        nbar: bath.nbar(),
        gamma: bath.gamma(),
        initial_concurrence,
        roots_inner: inner.interior,
        roots_outer: outer.interior,
        boundary_roots_inner: inner.boundary,
        boundary_roots_outer: outer.boundary,
        entangled_intervals: intervals,
        asymptotically_entangled,
        death_x,
        death_time,
    })
}

/// A constructive finite-death certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedDeath {
    /// Channel that witnesses the initial entanglement.
    pub channel: CoherenceChannel,
    /// A sign change of that channel's quartic inside (0, 1): below the
    /// smallest such crossing of both channels the state is separable.
    pub crossing_x: f64,
}

/// Prove that an entangled state at `nbar` > 0 disentangles at finite time.
///
/// The witnessing channel's quartic is strictly positive at X = 1 and equals
/// -(nbar (nbar+1))^2 / nu^4 < 0 at X = 0, so a root in (0, 1) exists and is
/// located by bracketed refinement. With both channels negative near X = 0,
/// concurrence vanishes from some finite time on.
pub fn certify_finite_death(state: &XState, nbar: f64) -> Result<CertifiedDeath, EsdError> {
    if nbar.is_nan() || nbar <= 0.0 {
        return Err(EsdError::ZeroTemperature);
    }
    if !concurrence_x(state)?.is_entangled() {
        return Err(EsdError::NotEntangled);
    }
    let q = death_quartics(&analytic_coefficients(state, nbar)?);
    let (channel, poly) = if q.inner.eval(1.0) >= q.outer.eval(1.0) {
        (CoherenceChannel::Inner, q.inner)
    } else {
        (CoherenceChannel::Outer, q.outer)
    };
    if poly.eval(0.0) >= 0.0 {
        // -(nbar (nbar+1))^2 / nu^4 underflowed to zero: numerically
        // indistinguishable from a zero-temperature bath
        return Err(EsdError::ZeroTemperature);
    }
    if poly.eval(1.0) <= 0.0 {
        // entangled by less than the quartic's rounding floor; the bracket
        // cannot distinguish this from a separable state
        return Err(EsdError::NotEntangled);
    }
    let crossing_x = refine_bracketed_root(|x| poly.eval(x), 0.0, 1.0, 1e-14)?;
    Ok(CertifiedDeath {
        channel,
        crossing_x,
    })
}

/// Closed-form root set of the inner quartic, applicable when w0 = 0 so that
/// the outer channel is never positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormRoots {
    /// Core denominator E = nu (a0 (nbar+1) + d0 nbar) - nbar (nbar+1); the
    /// quartic's leading coefficient is -E^2 / nu^4.
    pub e: f64,
    pub r: f64,
    /// None when the square-root argument is negative (then there are no
    /// real roots at all).
    pub s: Option<f64>,
    pub t_squared: f64,
    /// All real roots, ascending, repeated by multiplicity.
    pub roots: Vec<f64>,
}

/// Real roots of the inner quartic from the closed form
/// (r +/- s) +/- sqrt((r +/- s)^2 + t^2), with
/// r = (1 + (a0 - d0) nu) / (4E), s = nu^2 sqrt((1 - a0 - d0)^2 + 4(|z0|^2
/// - a0 d0)) / (4E), t^2 = nbar (nbar+1) / E.
pub fn closed_form_roots_wzero(state: &XState, nbar: f64) -> Result<ClosedFormRoots, EsdError> {
    state.validate()?;
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(StateError::BadBathParams {
            reason: "nbar must be finite and nonnegative",
        }
        .into());
    }
    let w_abs = state.w.norm();
    if w_abs > 0.0 {
        return Err(EsdError::WCoherencePresent { w_abs });
    }
    let nu = 2.0 * nbar + 1.0;
    let e = nu * (state.a * (nbar + 1.0) + state.d * nbar) - nbar * (nbar + 1.0);
    let denominator = 4.0 * e;
    if denominator.abs() <= 1e-12 {
        return Err(EsdError::DegenerateDenominator { denominator });
    }
    let r = (1.0 + (state.a - state.d) * nu) / denominator;
    let s_arg = (1.0 - state.a - state.d).powi(2) + 4.0 * (state.z.norm_sqr() - state.a * state.d);
    let s = (s_arg >= 0.0).then(|| nu * nu * s_arg.sqrt() / denominator);
    let t_squared = nbar * (nbar + 1.0) / e;
    let mut roots = Vec::new();
    if let Some(s) = s {
        for sigma in [r + s, r - s] {
            let disc = sigma * sigma + t_squared;
            if disc >= 0.0 {
                let root = disc.sqrt();
                roots.push(sigma + root);
                roots.push(sigma - root);
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ClosedFormRoots {
        e,
        r,
        s,
        t_squared,
        roots,
    })
}

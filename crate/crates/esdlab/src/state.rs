//! Two-qubit X states, their density matrices, and the bath/time coordinates.
//!
//! Basis order is |11>, |10>, |01>, |00> (left ket = qubit A). An X state
//! carries populations a, b, c, d down the diagonal, the inner coherence
//! z = <10|rho|01>, and the outer coherence w = <11|rho|00>; every other
//! entry is zero. Positivity then reduces to the two 2x2 blocks:
//! |z|^2 <= b c and |w|^2 <= a d.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Trace must match 1 within this.
pub const TRACE_TOL: f64 = 1e-12;
/// Slack on population nonnegativity and on the 2x2 block determinants.
pub const PSD_TOL: f64 = 1e-12;
/// Hermiticity slack for full density matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Minimum eigenvalue allowed for a full density matrix.
pub const MATRIX_PSD_TOL: f64 = 1e-9;
/// Default ceiling on entries that must vanish for a matrix to be of X form.
pub const OFF_X_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("non-finite entry in state")]
    NonFinite,
    #[error("trace is {trace}, must be 1 within {TRACE_TOL}")]
    TraceError { trace: f64 },
    #[error("population {label} = {value} is negative beyond {PSD_TOL}")]
    NegativePopulation { label: char, value: f64 },
    #[error("{block} 2x2 block violates positivity: |coherence|^2 exceeds its population product by {excess}")]
    BlockPositivityError { block: &'static str, excess: f64 },
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("matrix has eigenvalue {min_eigenvalue} below -{MATRIX_PSD_TOL}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("matrix is not of X form: off-pattern entry of magnitude {max_off_x}")]
    NotXForm { max_off_x: f64 },
    #[error("decay coordinate X = {x} outside [0, 1]")]
    XOutOfRange { x: f64 },
    #[error("time t = {t} must be nonnegative")]
    NegativeTime { t: f64 },
    #[error("X = 0 is reached only as t -> infinity")]
    UnreachableTime,
    #[error("invalid bath parameters: {reason}")]
    BadBathParams { reason: &'static str },
    #[error("state parse error: {0}")]
    Parse(String),
}

/// Two-qubit X state: populations (a, b, c, d) over |11>, |10>, |01>, |00>
/// plus the inner coherence z and outer coherence w.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub z: Complex64,
    pub w: Complex64,
}

/// Serialized form: coherences as [re, im] pairs, nothing else accepted.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct XStateDto {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    z: [f64; 2],
    w: [f64; 2],
}

impl XState {
    /// A validated X state: unit trace, nonnegative populations, and both
    /// coherences dominated by their population products.
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        z: Complex64,
        w: Complex64,
    ) -> Result<Self, StateError> {
        let s = Self { a, b, c, d, z, w };
        s.validate()?;
        Ok(s)
    }

    /// Skip validation; for internal paths whose output is valid by
    /// construction (exact propagation of an already-validated state).
    pub(crate) fn new_unchecked(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        z: Complex64,
        w: Complex64,
    ) -> Self {
        Self { a, b, c, d, z, w }
    }

    pub fn validate(&self) -> Result<(), StateError> {
        let pops = [self.a, self.b, self.c, self.d];
        let finite = pops.iter().all(|v| v.is_finite())
            && self.z.re.is_finite()
            && self.z.im.is_finite()
            && self.w.re.is_finite()
            && self.w.im.is_finite();
        if !finite {
            return Err(StateError::NonFinite);
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(StateError::TraceError { trace });
        }
        for (label, value) in ['a', 'b', 'c', 'd'].into_iter().zip(pops) {
            if value < -PSD_TOL {
                return Err(StateError::NegativePopulation { label, value });
            }
        }
        let inner_excess = self.z.norm_sqr() - self.b * self.c;
        if inner_excess > PSD_TOL {
            return Err(StateError::BlockPositivityError {
                block: "inner",
                excess: inner_excess,
            });
        }
        let outer_excess = self.w.norm_sqr() - self.a * self.d;
        if outer_excess > PSD_TOL {
            return Err(StateError::BlockPositivityError {
                block: "outer",
                excess: outer_excess,
            });
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    pub fn from_json_str(s: &str) -> Result<Self, StateError> {
        let dto: XStateDto =
            serde_json::from_str(s).map_err(|e| StateError::Parse(e.to_string()))?;
        let all = [
            dto.a, dto.b, dto.c, dto.d, dto.z[0], dto.z[1], dto.w[0], dto.w[1],
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(StateError::NonFinite);
        }
        Self::new(
            dto.a,
            dto.b,
            dto.c,
            dto.d,
            Complex64::new(dto.z[0], dto.z[1]),
            Complex64::new(dto.w[0], dto.w[1]),
        )
    }

    pub fn to_json_string(&self) -> String {
        let dto = XStateDto {
            a: self.a,
            b: self.b,
            c: self.c,
            d: self.d,
            z: [self.z.re, self.z.im],
            w: [self.w.re, self.w.im],
        };
        serde_json::to_string(&dto).expect("XState serialization cannot fail")
    }
}

/// A validated 4x4 density matrix: Hermitian, unit trace, eigenvalues
/// bounded below by -1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    matrix: Matrix4<Complex64>,
    min_eigenvalue: f64,
}

impl DensityMatrix4 {
    pub fn new(matrix: Matrix4<Complex64>) -> Result<Self, StateError> {
        if matrix
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        let mut max_asymmetry = 0.0f64;
        for i in 0..4 {
            for j in i..4 {
                let diff = matrix[(i, j)] - matrix[(j, i)].conj();
                max_asymmetry = max_asymmetry.max(diff.norm());
            }
        }
        if max_asymmetry > HERMITICITY_TOL {
            return Err(StateError::NotHermitian { max_asymmetry });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(StateError::TraceError { trace: trace.re });
        }
        let min_eigenvalue = matrix
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if min_eigenvalue < -MATRIX_PSD_TOL {
            return Err(StateError::NotPositiveSemidefinite { min_eigenvalue });
        }
        Ok(Self {
            matrix,
            min_eigenvalue,
        })
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }
}

/// Density matrix of an X state (the state is re-validated first).
pub fn xstate_to_matrix(s: &XState) -> Result<DensityMatrix4, StateError> {
    s.validate()?;
    let o = Complex64::new(0.0, 0.0);
    let re = |v: f64| Complex64::new(v, 0.0);
    let m = Matrix4::new(
        re(s.a),
        o,
        o,
        s.w, //
        o,
        re(s.b),
        s.z,
        o, //
        o,
        s.z.conj(),
        re(s.c),
        o, //
        s.w.conj(),
        o,
        o,
        re(s.d),
    );
    DensityMatrix4::new(m)
}

/// Extract the X-state content of a matrix. Entries outside the X pattern
/// larger than `off_x_tol` are rejected; Hermiticity mismatches inside the
/// pattern are averaged away if small and rejected otherwise. The result is
/// validated as a state.
pub fn matrix_to_xstate(m: &Matrix4<Complex64>, off_x_tol: f64) -> Result<XState, StateError> {
    let off_pattern = [
        (0, 1),
        (0, 2),
        (1, 0),
        (2, 0),
        (1, 3),
        (2, 3),
        (3, 1),
        (3, 2),
    ];
    let max_off_x = off_pattern
        .iter()
        .fold(0.0f64, |mx, &(i, j)| mx.max(m[(i, j)].norm()));
    if max_off_x > off_x_tol {
        return Err(StateError::NotXForm { max_off_x });
    }
    let mut max_asymmetry = 0.0f64;
    for i in 0..4 {
        max_asymmetry = max_asymmetry.max(m[(i, i)].im.abs());
    }
    max_asymmetry = max_asymmetry
        .max((m[(1, 2)] - m[(2, 1)].conj()).norm())
        .max((m[(0, 3)] - m[(3, 0)].conj()).norm());
    if max_asymmetry > HERMITICITY_TOL {
        return Err(StateError::NotHermitian { max_asymmetry });
    }
    XState::new(
        m[(0, 0)].re,
        m[(1, 1)].re,
        m[(2, 2)].re,
        m[(3, 3)].re,
        (m[(1, 2)] + m[(2, 1)].conj()) * 0.5,
        (m[(0, 3)] + m[(3, 0)].conj()) * 0.5,
    )
}

/// Bath coupling: decay rate `gamma` > 0 and mean thermal occupation
/// `nbar` >= 0, shared by both (identical, independent) reservoirs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    gamma: f64,
    nbar: f64,
}

impl BathParams {
    pub fn new(gamma: f64, nbar: f64) -> Result<Self, StateError> {
        if !gamma.is_finite() || !nbar.is_finite() {
            return Err(StateError::BadBathParams {
                reason: "gamma and nbar must be finite",
            });
        }
        if gamma <= 0.0 {
            return Err(StateError::BadBathParams {
                reason: "gamma must be positive",
            });
        }
        if nbar < 0.0 {
            return Err(StateError::BadBathParams {
                reason: "nbar must be nonnegative",
            });
        }
        Ok(Self { gamma, nbar })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Total relaxation factor 2 nbar + 1; the coherence decay rate is
    /// gamma * nu / 2 per qubit and every population mode decays as a power
    /// of exp(-gamma nu t).
    pub fn nu(&self) -> f64 {
        2.0 * self.nbar + 1.0
    }
}

/// Decay coordinate X = exp(-gamma nu t), confined to [0, 1]. X = 1 is t = 0
/// and X = 0 is the infinite-time limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XCoordinate(f64);

impl XCoordinate {
    pub fn new(x: f64) -> Result<Self, StateError> {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(StateError::XOutOfRange { x });
        }
        Ok(Self(x))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Decay coordinate reached at time `t`.
pub fn x_of_t(t: f64, bath: &BathParams) -> Result<XCoordinate, StateError> {
    if !t.is_finite() || t < 0.0 {
        return Err(StateError::NegativeTime { t });
    }
    XCoordinate::new((-bath.gamma() * bath.nu() * t).exp())
}

/// Time at which the decay coordinate reaches `x`; X = 0 is unreachable.
pub fn t_of_x(x: XCoordinate, bath: &BathParams) -> Result<f64, StateError> {
    if x.value() == 0.0 {
        return Err(StateError::UnreachableTime);
    }
    Ok(-x.value().ln() / (bath.gamma() * bath.nu()))
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use proptest::prelude::*;

    /// Random valid X states: stick-breaking populations, coherences scaled
    /// to sit strictly inside their positivity caps.
    pub(crate) fn arb_xstate() -> impl Strategy<Value = XState> {
        (
            0.0..1.0f64,
            0.0..1.0f64,
            0.0..1.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
        )
            .prop_map(|(p, q, r, zr, zi, wr, wi)| {
                let a = p * q;
                let b = p * (1.0 - q);
                let c = (1.0 - p) * r;
                let d = 1.0 - a - b - c;
                let zcap = (b * c).sqrt();
                let wcap = (a * d).sqrt();
                let zn = (zr * zr + zi * zi).sqrt().max(1.0);
                let wn = (wr * wr + wi * wi).sqrt().max(1.0);
                XState::new(
                    a,
                    b,
                    c,
                    d,
                    Complex64::new(zr, zi) * (0.999 * zcap / zn),
                    Complex64::new(wr, wi) * (0.999 * wcap / wn),
                )
                .expect("constructed state is valid")
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell_psi_plus() -> XState {
        XState::new(
            0.0,
            0.5,
            0.5,
            0.0,
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn valid_states_pass() {
        bell_psi_plus();
        XState::new(
            0.25,
            0.25,
            0.25,
            0.25,
            Complex64::new(0.1, 0.2),
            Complex64::new(0.0, -0.2),
        )
        .unwrap();
    }

    #[test]
    fn trace_violation_rejected() {
        let err = XState::new(
            0.3,
            0.3,
            0.3,
            0.3,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, StateError::TraceError { .. }));
    }

    #[test]
    fn negative_population_rejected() {
        let err = XState::new(
            -0.1,
            0.4,
            0.4,
            0.3,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap_err();
        assert_eq!(
            err,
            StateError::NegativePopulation {
                label: 'a',
                value: -0.1
            }
        );
    }

    #[test]
    fn block_positivity_rejected() {
        // |z| > sqrt(bc) with everything else fine
        let err = XState::new(
            0.25,
            0.25,
            0.25,
            0.25,
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            StateError::BlockPositivityError { block: "inner", .. }
        ));
        let err = XState::new(
            0.25,
            0.25,
            0.25,
            0.25,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.3),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            StateError::BlockPositivityError { block: "outer", .. }
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let err = XState::new(
            f64::NAN,
            0.5,
            0.5,
            0.0,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap_err();
        assert_eq!(err, StateError::NonFinite);
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let s = XState::new(
            0.3,
            0.3,
            0.2,
            0.2,
            Complex64::new(0.1, -0.05),
            Complex64::new(0.05, 0.2),
        )
        .unwrap();
        let m = xstate_to_matrix(&s).unwrap();
        let back = matrix_to_xstate(m.matrix(), OFF_X_TOL).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn density_matrix_rejects_negative_eigenvalue() {
        let mut m = Matrix4::<Complex64>::zeros();
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        let err = DensityMatrix4::new(m).unwrap_err();
        assert!(matches!(err, StateError::NotPositiveSemidefinite { .. }));
    }

    #[test]
    fn density_matrix_rejects_non_hermitian() {
        let mut m = Matrix4::<Complex64>::identity() * Complex64::new(0.25, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.0); // no conjugate partner
        let err = DensityMatrix4::new(m).unwrap_err();
        assert!(matches!(err, StateError::NotHermitian { .. }));
    }

    #[test]
    fn off_pattern_entry_rejected() {
        let s = bell_psi_plus();
        let mut m = *xstate_to_matrix(&s).unwrap().matrix();
        m[(0, 1)] = Complex64::new(1e-3, 0.0);
        m[(1, 0)] = Complex64::new(1e-3, 0.0);
        let err = matrix_to_xstate(&m, OFF_X_TOL).unwrap_err();
        assert!(matches!(err, StateError::NotXForm { .. }));
    }

    #[test]
    fn coordinate_maps_invert() {
        let bath = BathParams::new(0.7, 1.3).unwrap();
        let t = 0.83;
        let x = x_of_t(t, &bath).unwrap();
        assert_abs_diff_eq!(t_of_x(x, &bath).unwrap(), t, epsilon = 1e-14);
    }

    #[test]
    fn coordinate_map_anchor() {
        // gamma = 1, nbar = 1 (nu = 3) at t = ln(2)/3 gives X = 1/2
        let bath = BathParams::new(1.0, 1.0).unwrap();
        let x = x_of_t((2.0f64).ln() / 3.0, &bath).unwrap();
        assert_abs_diff_eq!(x.value(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn coordinate_domain_errors() {
        let bath = BathParams::new(1.0, 0.0).unwrap();
        assert!(matches!(
            x_of_t(-1.0, &bath),
            Err(StateError::NegativeTime { .. })
        ));
        assert!(matches!(
            XCoordinate::new(1.0 + 1e-9),
            Err(StateError::XOutOfRange { .. })
        ));
        assert!(matches!(
            XCoordinate::new(-0.1),
            Err(StateError::XOutOfRange { .. })
        ));
        let zero = XCoordinate::new(0.0).unwrap();
        assert_eq!(t_of_x(zero, &bath), Err(StateError::UnreachableTime));
    }

    #[test]
    fn bath_params_validated() {
        assert!(BathParams::new(0.0, 1.0).is_err());
        assert!(BathParams::new(-1.0, 1.0).is_err());
        assert!(BathParams::new(1.0, -0.5).is_err());
        assert!(BathParams::new(f64::NAN, 0.0).is_err());
        assert_eq!(BathParams::new(2.0, 0.5).unwrap().nu(), 2.0);
    }

    #[test]
    fn json_round_trip() {
        let s = XState::new(
            0.3,
            0.3,
            0.2,
            0.2,
            Complex64::new(0.1, -0.05),
            Complex64::new(0.05, 0.2),
        )
        .unwrap();
        let back = XState::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn json_rejects_unknown_fields_and_bad_shapes() {
        let err = XState::from_json_str(
            r#"{"a":0.25,"b":0.25,"c":0.25,"d":0.25,"z":[0,0],"w":[0,0],"extra":1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, StateError::Parse(_)));
        let err =
            XState::from_json_str(r#"{"a":0.25,"b":0.25,"c":0.25,"d":0.25,"z":[0],"w":[0,0]}"#)
                .unwrap_err();
        assert!(matches!(err, StateError::Parse(_)));
    }

    #[test]
    fn json_rejects_non_finite_numbers() {
        // overflows f64 to infinity if the parser accepts it at all
        let r =
            XState::from_json_str(r#"{"a":1e999,"b":0.25,"c":0.25,"d":0.25,"z":[0,0],"w":[0,0]}"#);
        assert!(matches!(
            r,
            Err(StateError::NonFinite) | Err(StateError::Parse(_))
        ));
    }
}

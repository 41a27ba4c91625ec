//! Named initial-state families used throughout the examples and sweeps.

use num_complex::Complex64;
use thiserror::Error;

use crate::state::{StateError, XState};

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("unknown state family \"{name}\"")]
    UnknownFamily { name: String },
    #[error("family \"{family}\" takes {expected} parameter(s), got {got}")]
    WrongParamCount {
        family: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("family \"{family}\" parameter {value} outside [{lo}, {hi}]")]
    ParamOutOfRange {
        family: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("cannot parse \"{token}\" as a number")]
    ParamParse { token: String },
    #[error(transparent)]
    State(#[from] StateError),
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_range(family: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), FamilyError> {
    if !value.is_finite() || !(lo..=hi).contains(&value) {
        return Err(FamilyError::ParamOutOfRange {
            family,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}

/// (|11> + |00>)/sqrt(2)
pub fn bell_phi_plus() -> XState {
    XState::new_unchecked(0.5, 0.0, 0.0, 0.5, c64(0.0, 0.0), c64(0.5, 0.0))
}

/// (|11> - |00>)/sqrt(2)
pub fn bell_phi_minus() -> XState {
    XState::new_unchecked(0.5, 0.0, 0.0, 0.5, c64(0.0, 0.0), c64(-0.5, 0.0))
}

/// (|10> + |01>)/sqrt(2)
pub fn bell_psi_plus() -> XState {
    XState::new_unchecked(0.0, 0.5, 0.5, 0.0, c64(0.5, 0.0), c64(0.0, 0.0))
}

/// (|10> - |01>)/sqrt(2)
pub fn bell_psi_minus() -> XState {
    XState::new_unchecked(0.0, 0.5, 0.5, 0.0, c64(-0.5, 0.0), c64(0.0, 0.0))
}

/// One-parameter family with uniform middle populations: populations
/// (alpha, 1, 1, 1 - alpha)/3 and inner coherence z = 1/3. Entangled for
/// every alpha in [0, 1] with concurrence (2/3)(1 - sqrt(alpha (1 - alpha))).
pub fn ye_state(alpha: f64) -> Result<XState, FamilyError> {
    check_range("ye", alpha, 0.0, 1.0)?;
    Ok(XState::new(
        alpha / 3.0,
        1.0 / 3.0,
        1.0 / 3.0,
        (1.0 - alpha) / 3.0,
        c64(1.0 / 3.0, 0.0),
        c64(0.0, 0.0),
    )?)
}

/// Singlet fraction p on top of white noise: concurrence max(0, (3p - 1)/2).
pub fn werner(p: f64) -> Result<XState, FamilyError> {
    check_range("werner", p, 0.0, 1.0)?;
    let edge = (1.0 - p) / 4.0;
    Ok(XState::new(
        edge,
        edge + p / 2.0,
        edge + p / 2.0,
        edge,
        c64(-p / 2.0, 0.0),
        c64(0.0, 0.0),
    )?)
}

/// Maximally entangled mixed state at concurrence `conc` in the
/// Munro-James-White-Kwiat parametrization (Phys. Rev. A 64, 030302):
/// outer coherence conc/2, corner populations g = max(conc/2, 1/3), middle
/// population 1 - 2g on one side.
pub fn mems(conc: f64) -> Result<XState, FamilyError> {
    check_range("mems", conc, 0.0, 1.0)?;
    let g = if conc >= 2.0 / 3.0 {
        conc / 2.0
    } else {
        1.0 / 3.0
    };
    Ok(XState::new(
        g,
        1.0 - 2.0 * g,
        0.0,
        g,
        c64(0.0, 0.0),
        c64(conc / 2.0, 0.0),
    )?)
}

/// Build a state from a family name and parameter list.
pub fn named_state(name: &str, params: &[f64]) -> Result<XState, FamilyError> {
    let expect = |family: &'static str, n: usize| -> Result<(), FamilyError> {
        if params.len() != n {
            Err(FamilyError::WrongParamCount {
                family,
                expected: n,
                got: params.len(),
            })
        } else {
            Ok(())
        }
    };
    match name {
        "bell-phi-plus" => expect("bell-phi-plus", 0).map(|_| bell_phi_plus()),
        "bell-phi-minus" => expect("bell-phi-minus", 0).map(|_| bell_phi_minus()),
        "bell-psi-plus" => expect("bell-psi-plus", 0).map(|_| bell_psi_plus()),
        "bell-psi-minus" => expect("bell-psi-minus", 0).map(|_| bell_psi_minus()),
        "ye" => expect("ye", 1).and_then(|_| ye_state(params[0])),
        "werner" => expect("werner", 1).and_then(|_| werner(params[0])),
        "mems" => expect("mems", 1).and_then(|_| mems(params[0])),
        _ => Err(FamilyError::UnknownFamily {
            name: name.to_string(),
        }),
    }
}

/// Parse "family" or "family:p1,p2" into a state.
pub fn parse_family_spec(spec: &str) -> Result<XState, FamilyError> {
    let (name, params) = match spec.split_once(':') {
        None => (spec, Vec::new()),
        Some((name, rest)) => {
            let params = rest
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| FamilyError::ParamParse {
                            token: tok.to_string(),
                        })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            (name, params)
        }
    };
    named_state(name.trim(), &params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::concurrence_x;
    use crate::esd::esd_report;
    use crate::state::BathParams;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_states_validate_and_are_maximal() {
        for s in [
            bell_phi_plus(),
            bell_phi_minus(),
            bell_psi_plus(),
            bell_psi_minus(),
        ] {
            s.validate().unwrap();
            assert_eq!(concurrence_x(&s).unwrap().value(), 1.0);
        }
    }

    #[test]
    fn ye_concurrence_identity() {
        for alpha in [0.0, 0.1, 1.0 / 3.0, 0.5, 0.77, 1.0] {
            let s = ye_state(alpha).unwrap();
            let want = (2.0 / 3.0) * (1.0 - (alpha * (1.0 - alpha)).sqrt());
            assert_abs_diff_eq!(concurrence_x(&s).unwrap().value(), want, epsilon = 1e-15);
        }
    }

    #[test]
    fn ye_zero_temperature_longevity_splits_at_one_third() {
        let bath = BathParams::new(1.0, 0.0).unwrap();
        for alpha in [0.0, 0.2, 1.0 / 3.0] {
            let report = esd_report(&ye_state(alpha).unwrap(), &bath).unwrap();
            assert!(
                report.asymptotically_entangled,
                "alpha = {alpha} should live forever"
            );
        }
        for alpha in [0.34, 0.5, 1.0] {
            let report = esd_report(&ye_state(alpha).unwrap(), &bath).unwrap();
            assert!(
                !report.asymptotically_entangled,
                "alpha = {alpha} should die"
            );
            assert!(report.death_x.is_some());
        }
    }

    #[test]
    fn werner_concurrence() {
        assert_abs_diff_eq!(
            concurrence_x(&werner(0.8).unwrap()).unwrap().value(),
            0.7,
            epsilon = 1e-15
        );
        assert_eq!(
            concurrence_x(&werner(1.0 / 3.0).unwrap()).unwrap().value(),
            0.0
        );
    }

    #[test]
    fn mems_concurrence_is_the_parameter() {
        for conc in [0.0, 0.1, 0.5, 2.0 / 3.0, 0.9, 1.0] {
            let s = mems(conc).unwrap();
            s.validate().unwrap();
            assert_abs_diff_eq!(concurrence_x(&s).unwrap().value(), conc, epsilon = 1e-15);
        }
    }

    #[test]
    fn named_state_dispatch_and_errors() {
        assert!(named_state("bell-psi-plus", &[]).is_ok());
        assert!(matches!(
            named_state("bell-psi-plus", &[0.1]),
            Err(FamilyError::WrongParamCount {
                expected: 0,
                got: 1,
                ..
            })
        ));
        assert!(matches!(
            named_state("ye", &[]),
            Err(FamilyError::WrongParamCount {
                expected: 1,
                got: 0,
                ..
            })
        ));
        assert!(matches!(
            named_state("ye", &[1.5]),
            Err(FamilyError::ParamOutOfRange { .. })
        ));
        assert!(matches!(
            named_state("ghz", &[]),
            Err(FamilyError::UnknownFamily { .. })
        ));
    }

    #[test]
    fn family_spec_parsing() {
        assert!(parse_family_spec("bell-phi-minus").is_ok());
        assert!(parse_family_spec("ye:0.25").is_ok());
        assert!(parse_family_spec("werner: 0.5 ").is_ok());
        assert!(matches!(
            parse_family_spec("ye:abc"),
            Err(FamilyError::ParamParse { .. })
        ));
        assert!(matches!(
            parse_family_spec("nope:1"),
            Err(FamilyError::UnknownFamily { .. })
        ));
    }
}

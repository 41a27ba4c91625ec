//! Parameter sweeps and their CSV/JSON serializations.
//!
//! All numeric text output goes through a fixed 17-significant-digit
//! scientific format, so identical inputs produce byte-identical files and
//! every value round-trips to the same f64.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::analytic_coefficients;
use crate::entanglement::concurrence_x;
use crate::esd::{death_quartics, EsdError};
use crate::families::{ye_state, FamilyError};
use crate::state::{StateError, XState};

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("cannot parse grid \"{spec}\": {reason}")]
    GridParse { spec: String, reason: String },
    #[error("grid value {value} outside [{lo}, {hi}]")]
    GridOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("sweep has an empty axis")]
    EmptyAxis,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Esd(#[from] EsdError),
}

/// Largest number of points a single grid may have.
const MAX_GRID_POINTS: usize = 10_000_001;

/// Parse "start:stop:step" into the inclusive grid start + i * step.
///
/// The step must divide the span: grids are index-generated, never
/// accumulated, so the same spec always produces the same values.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, SweepError> {
    let err = |reason: &str| SweepError::GridParse {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(err("expected start:stop:step"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| err(&e.to_string())))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
        return Err(err("grid endpoints and step must be finite"));
    }
    if step <= 0.0 {
        return Err(err("step must be positive"));
    }
    if stop < start {
        return Err(err("stop must not be below start"));
    }
    let count = (stop - start) / step;
    let n = count.round();
    if (count - n).abs() > 1e-9 * count.max(1.0) {
        return Err(err("step does not divide the span"));
    }
    if n as usize + 1 > MAX_GRID_POINTS {
        return Err(err("grid too large"));
    }
    Ok((0..=n as usize).map(|i| start + i as f64 * step).collect())
}

fn check_axis(values: &[f64], lo: f64, hi: f64) -> Result<(), SweepError> {
    if values.is_empty() {
        return Err(SweepError::EmptyAxis);
    }
    for &v in values {
        if !v.is_finite() || v < lo || v > hi {
            return Err(SweepError::GridOutOfRange { value: v, lo, hi });
        }
    }
    Ok(())
}

/// Concurrence surface of the uniform-middle family over occupation,
/// family parameter, and decay coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct YeSweepSpec {
    pub nbars: Vec<f64>,
    pub alphas: Vec<f64>,
    pub xs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub nbar: f64,
    pub alpha: f64,
    pub x: f64,
    pub concurrence: f64,
}

/// Evaluate the sweep, ordered nbar-major, then alpha, then X. Rows are
/// computed in parallel but collected in deterministic order.
pub fn sweep_ye(spec: &YeSweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    check_axis(&spec.nbars, 0.0, f64::INFINITY)?;
    check_axis(&spec.alphas, 0.0, 1.0)?;
    check_axis(&spec.xs, 0.0, 1.0)?;
    let mut pairs = Vec::with_capacity(spec.nbars.len() * spec.alphas.len());
    for &nbar in &spec.nbars {
        for &alpha in &spec.alphas {
            pairs.push((nbar, alpha));
        }
    }
    let blocks: Vec<Vec<SweepRow>> = pairs
        .par_iter()
        .map(|&(nbar, alpha)| -> Result<Vec<SweepRow>, SweepError> {
            let state = ye_state(alpha)?;
            let coeffs = analytic_coefficients(&state, nbar).map_err(EsdError::from)?;
            spec.xs
                .iter()
                .map(|&x| {
                    let concurrence = concurrence_x(&coeffs.evaluate(x))
                        .map_err(EsdError::from)?
                        .value();
                    Ok(SweepRow {
                        nbar,
                        alpha,
                        x,
                        concurrence,
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(blocks.concat())
}

/// One point of the death-boundary plot: the inner quartic's value at X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub x: f64,
    pub f: f64,
}

/// The inner death quartic of the X state with populations
/// (a0, (1-a0-d0)/2, (1-a0-d0)/2, d0) and real inner coherence z, sampled
/// on `xs`. The quartic involves only a0, d0, |z| and nbar, so the split of
/// the middle populations is irrelevant; the symmetric split always yields a
/// valid state for |z| <= (1 - a0 - d0)/2.
pub fn boundary_function(
    a0: f64,
    d0: f64,
    z: f64,
    nbar: f64,
    xs: &[f64],
) -> Result<Vec<BoundaryRow>, SweepError> {
    check_axis(xs, 0.0, 1.0)?;
    let half = (1.0 - a0 - d0) / 2.0;
    let state = XState::new(
        a0,
        half,
        half,
        d0,
        num_complex::Complex64::new(z, 0.0),
        num_complex::Complex64::new(0.0, 0.0),
    )
    .map_err(SweepError::from)?;
    let q = death_quartics(&analytic_coefficients(&state, nbar).map_err(EsdError::from)?);
    Ok(xs
        .iter()
        .map(|&x| BoundaryRow {
            x,
            f: q.inner.eval(x),
        })
        .collect())
}

/// 17 significant digits: enough for exact f64 round-trips, fixed width-ish.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_ye_csv<W: Write>(out: &mut W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "nbar,alpha,X,C")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt17(r.nbar),
            fmt17(r.alpha),
            fmt17(r.x),
            fmt17(r.concurrence)
        )?;
    }
    Ok(())
}

pub fn write_boundary_csv<W: Write>(out: &mut W, rows: &[BoundaryRow]) -> io::Result<()> {
    writeln!(out, "X,F")?;
    for r in rows {
        writeln!(out, "{},{}", fmt17(r.x), fmt17(r.f))?;
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(out: &mut W, rows: &[T]) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, rows)?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:1:0.25").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[4], 1.0);
        assert_abs_diff_eq!(g[3], 0.75, epsilon = 1e-15);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0.3").is_err());
        assert!(parse_grid("0:1:nope").is_err());
    }

    #[test]
    fn grid_is_index_generated() {
        // accumulation would drift; index generation hits the stop exactly
        let g = parse_grid("0:1:0.005").unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn ye_sweep_order_and_content() {
        let spec = YeSweepSpec {
            nbars: vec![0.0, 1.0],
            alphas: vec![0.0, 0.5],
            xs: vec![1.0, 0.5],
        };
        let rows = sweep_ye(&spec).unwrap();
        assert_eq!(rows.len(), 8);
        // nbar-major, then alpha, then x
        assert_eq!((rows[0].nbar, rows[0].alpha, rows[0].x), (0.0, 0.0, 1.0));
        assert_eq!((rows[1].nbar, rows[1].alpha, rows[1].x), (0.0, 0.0, 0.5));
        assert_eq!((rows[2].nbar, rows[2].alpha, rows[2].x), (0.0, 0.5, 1.0));
        assert_eq!((rows[4].nbar, rows[4].alpha, rows[4].x), (1.0, 0.0, 1.0));
        // at X = 1 the sweep reproduces the initial concurrence
        let c0 = (2.0 / 3.0) * (1.0 - 0.0f64.sqrt());
        assert_abs_diff_eq!(rows[0].concurrence, c0, epsilon = 1e-15);
    }

    #[test]
    fn sweep_rejects_bad_axes() {
        let bad = YeSweepSpec {
            nbars: vec![-0.1],
            alphas: vec![0.5],
            xs: vec![0.5],
        };
        assert!(matches!(
            sweep_ye(&bad),
            Err(SweepError::GridOutOfRange { .. })
        ));
        let empty = YeSweepSpec {
            nbars: vec![],
            alphas: vec![0.5],
            xs: vec![0.5],
        };
        assert_eq!(sweep_ye(&empty).unwrap_err(), SweepError::EmptyAxis);
        let bad_x = YeSweepSpec {
            nbars: vec![1.0],
            alphas: vec![0.5],
            xs: vec![1.5],
        };
        assert!(matches!(
            sweep_ye(&bad_x),
            Err(SweepError::GridOutOfRange { .. })
        ));
    }

    #[test]
    fn boundary_function_anchors() {
        // at X = 0 the quartic equals -(nbar (nbar+1))^2 / nu^4; at X = 1 it
        // equals z^2 - a0 d0
        let rows = boundary_function(0.1, 0.05, 0.3, 0.8, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(rows[0].f, -0.045376562445292532, epsilon = 1e-15);
        assert_abs_diff_eq!(rows[1].f, 0.085, epsilon = 1e-14);
    }

    #[test]
    fn boundary_function_ignores_middle_split() {
        // directly: the inner quartic of two states differing only in the
        // b/c split is identical coefficient by coefficient
        let z = num_complex::Complex64::new(0.3, 0.0);
        let o = num_complex::Complex64::new(0.0, 0.0);
        let s1 = XState::new(0.1, 0.425, 0.425, 0.05, z, o).unwrap();
        let s2 = XState::new(0.1, 0.6, 0.25, 0.05, z, o).unwrap();
        let q1 = death_quartics(&analytic_coefficients(&s1, 0.8).unwrap());
        let q2 = death_quartics(&analytic_coefficients(&s2, 0.8).unwrap());
        assert_eq!(q1.inner.c, q2.inner.c);
    }

    #[test]
    fn csv_output_is_stable() {
        let spec = YeSweepSpec {
            nbars: vec![1.0],
            alphas: vec![0.5],
            xs: vec![1.0, 0.5],
        };
        let rows = sweep_ye(&spec).unwrap();
        let mut one = Vec::new();
        write_ye_csv(&mut one, &rows).unwrap();
        let text = String::from_utf8(one.clone()).unwrap();
        assert!(text.starts_with("nbar,alpha,X,C\n"));
        assert!(text.contains("5.0000000000000000e-1"));
        // byte-identical across repeated evaluation
        let rows2 = sweep_ye(&spec).unwrap();
        let mut again = Vec::new();
        write_ye_csv(&mut again, &rows2).unwrap();
        assert_eq!(one, again);
    }
}

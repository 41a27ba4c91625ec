//! Scalar numerics shared by the dynamics and death-coordinate layers: real
//! roots of low-degree polynomials, bracketed root refinement, a fixed-step
//! RK4 integrator, and eigenvalues of 4x4 real-spectrum matrices through the
//! characteristic quartic.
//!
//! The polynomial solver isolates roots between critical points (obtained by
//! recursing on the derivative), so every sign change is bracketed and refined
//! by a Newton/bisection hybrid that cannot leave its bracket.  Even-order
//! roots that touch zero without a sign change are detected at critical points
//! and assigned multiplicities by derivative order.

use nalgebra::Matrix4;
use num_complex::Complex64;
use thiserror::Error;

/// Residual contract for reported roots: |p(root)| <= RESIDUAL_TOL * max(1, max|c_k|).
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;
/// Leading coefficients below this fraction of the largest coefficient drop the degree.
pub const DEGENERATE_LEADING_TOL: f64 = 1e-14;
/// Trailing coefficient c_k deflates as an exact root at zero when it is
/// below this fraction of c_{k+1}: the ratio |c_k|/|c_{k+1}| bounds the
/// distance of the nearest root from the origin to first order, and anything
/// closer than 1e-15 is indistinguishable from zero at f64 root resolution.
/// An absolute threshold would misjudge polynomials whose trailing
/// coefficients are legitimately tiny because several roots sit near zero at
/// once.
pub const TRAILING_ZERO_TOL: f64 = 1e-15;
/// Eigenvalues with magnitude below this are clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-12;
/// Imaginary content above this (relative) in the characteristic coefficients
/// or a deficient real root count signals a complex spectrum.
pub const EIGEN_IMAG_TOL: f64 = 1e-9;
/// Roots this close to 0 or 1 are classified as boundary, not interior.
pub const UNIT_BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("all polynomial coefficients are zero")]
    ZeroPolynomial,
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("non-finite value produced during integration")]
    NonFiniteState,
    #[error("matrix spectrum is not real within tolerance")]
    ComplexSpectrum,
}

/// Real polynomial c[0] + c[1] x + c[2] x^2 + c[3] x^3 + c[4] x^4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly4 {
    pub c: [f64; 5],
}

impl Poly4 {
    /// Coefficients in ascending degree. Panics on non-finite input; the
    /// callers construct these from validated states.
    pub fn new(c: [f64; 5]) -> Self {
        assert!(
            c.iter().all(|v| v.is_finite()),
            "non-finite polynomial coefficient"
        );
        Self { c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.c, x)
    }

    pub fn derivative_eval(&self, x: f64) -> f64 {
        let d = derivative(&self.c);
        horner(&d, x)
    }

    fn max_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One real root with its multiplicity and the residual |p(root)|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootRecord {
    pub value: f64,
    pub multiplicity: u32,
    pub residual: f64,
}

/// Real roots of a polynomial, ascending in value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    pub roots: Vec<RootRecord>,
}

/// Roots of the open interval (0,1), with near-boundary values reported
/// separately instead of silently included or dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UnitIntervalRoots {
    pub interior: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl RootSet {
    /// Distinct root values, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    /// Root values repeated by multiplicity, ascending.
    pub fn values_with_multiplicity(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for r in &self.roots {
            for _ in 0..r.multiplicity {
                out.push(r.value);
            }
        }
        out
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Split distinct roots into the open unit interval and its boundary zone.
    pub fn in_open_unit_interval(&self) -> UnitIntervalRoots {
        let mut out = UnitIntervalRoots::default();
        for r in &self.roots {
            let x = r.value;
            if (x - 0.0).abs() <= UNIT_BOUNDARY_TOL || (x - 1.0).abs() <= UNIT_BOUNDARY_TOL {
                out.boundary.push(x);
            } else if x > 0.0 && x < 1.0 {
                out.interior.push(x);
            }
        }
        out
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Magnitude bound on evaluation noise: sum |c_k| |x|^k.
fn horner_abs(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &ck| acc * ax + ck.abs())
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

/// All real roots of the quartic, with multiplicities and residuals.
///
/// Degenerate leading coefficients (|c4| < 1e-14 relative to the largest
/// coefficient) fall through to the cubic/quadratic/linear cases.
pub fn solve_quartic_real(p: &Poly4) -> Result<RootSet, NumericsError> {
    let scale = p.max_coeff();
    if scale == 0.0 {
        return Err(NumericsError::ZeroPolynomial);
    }
    // Normalize so tolerances are relative; roots are unchanged.
    let c: Vec<f64> = p.c.iter().map(|v| v / scale).collect();
    let mut roots = real_roots(&c);
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let records = roots
        .into_iter()
        .map(|(value, multiplicity)| RootRecord {
            value,
            multiplicity,
            residual: p.eval(value).abs(),
        })
        .collect();
    Ok(RootSet { roots: records })
}

/// Distinct real roots with multiplicities of a normalized polynomial given in
/// ascending coefficients. Recurses on the derivative for isolation.
fn real_roots(c: &[f64]) -> Vec<(f64, u32)> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let deg = match effective_degree(c, scale) {
        Some(d) => d,
        None => return Vec::new(),
    };
    let c = &c[..=deg];
    // Trailing near-zero coefficients are roots at exactly 0; factoring them
    // out first keeps the isolation grid off the cluster at the origin, where
    // the polynomial is legitimately tiny without vanishing.
    let zeros = (0..deg)
        .take_while(|&k| c[k].abs() <= TRAILING_ZERO_TOL * c[k + 1].abs())
        .count();
    let mut out: Vec<(f64, u32)> = Vec::new();
    if zeros > 0 {
        out.push((0.0, zeros as u32));
    }
    let c = &c[zeros..];
    match deg - zeros {
        0 => {}
        1 => out.push((-c[0] / c[1], 1)),
        _ => out.extend(isolate_roots(c, scale)),
    }
    out
}

fn effective_degree(c: &[f64], scale: f64) -> Option<usize> {
    (0..c.len())
        .rev()
        .find(|&k| c[k].abs() >= DEGENERATE_LEADING_TOL * scale)
}

/// Touching tolerance: |p(x)| below this means x is a root even without a
/// sign change. Purely relative to the local evaluation scale: both rounding
/// and coefficient noise are bounded by multiples of horner_abs, while an
/// absolute floor would misread the legitimately tiny values next to a root
/// cluster (roots at 0 never reach this test; they deflate first).
fn touch_tol(c: &[f64], x: f64) -> f64 {
    1e-12 * horner_abs(c, x)
}

fn isolate_roots(c: &[f64], scale: f64) -> Vec<(f64, u32)> {
    let deg = c.len() - 1;
    let lead = c[deg];
    // Cauchy bound: all real roots lie strictly inside (-bound, bound).
    let bound = 1.0 + c[..deg].iter().fold(0.0f64, |m, v| m.max((v / lead).abs()));

    let mut breaks: Vec<f64> = real_roots(&derivative(c))
        .into_iter()
        .map(|(x, _)| x)
        .filter(|x| x.abs() < bound)
        .collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut pts = Vec::with_capacity(breaks.len() + 2);
    pts.push(-bound);
    pts.extend_from_slice(&breaks);
    pts.push(bound);

    let vals: Vec<f64> = pts.iter().map(|&x| horner(c, x)).collect();
    let is_root: Vec<bool> = pts
        .iter()
        .zip(&vals)
        .map(|(&x, &f)| f.abs() <= touch_tol(c, x))
        .collect();

    let mut found: Vec<(f64, u32)> = Vec::new();
    // The polynomial is strictly monotone between consecutive critical points,
    // so each sign change brackets exactly one simple crossing, and intervals
    // with a (near-)root endpoint hold no further interior zero. Multiplicity
    // is 1 by construction; a derivative-magnitude test would misread tightly
    // clustered simple roots, whose |p'| is legitimately tiny.
    for i in 0..pts.len() - 1 {
        if is_root[i] || is_root[i + 1] {
            continue;
        }
        if vals[i].signum() != vals[i + 1].signum() {
            let r = refine_polynomial_root(c, pts[i], pts[i + 1], vals[i]);
            found.push((r, 1));
        }
    }
    // Interior breakpoints sitting on the axis are even-order (or exact) roots.
    for i in 1..pts.len() - 1 {
        if is_root[i] {
            found.push((pts[i], multiplicity_at(c, pts[i], scale).max(2)));
        }
    }
    found.truncate(deg); // monotone isolation cannot exceed this, but be safe
    found
}

/// Multiplicity by derivative order: the smallest k with p^(k)(x) clearly
/// nonzero relative to its own evaluation scale.
fn multiplicity_at(c: &[f64], x: f64, scale: f64) -> u32 {
    let deg = c.len() - 1;
    let mut d: Vec<f64> = c.to_vec();
    for k in 1..=deg {
        d = derivative(&d);
        let tol = (1e-7 * horner_abs(&d, x)).max(1e-10 * scale);
        if horner(&d, x).abs() > tol {
            return k as u32;
        }
    }
    deg as u32
}

/// Newton iteration safeguarded by the bracket [lo, hi]; falls back to
/// bisection whenever the Newton step leaves the bracket or stalls.
fn refine_polynomial_root(c: &[f64], mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let d = derivative(c);
    let mut sign_lo = flo.signum();
    let mut x = 0.5 * (lo + hi);
    let mut best = x;
    let mut best_f = f64::INFINITY;
    for _ in 0..160 {
        let f = horner(c, x);
        if f.abs() < best_f {
            best_f = f.abs();
            best = x;
        }
        if f == 0.0 {
            return x;
        }
        if f.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        let fp = horner(&d, x);
        let mut next = x - f / fp;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
        // keep the invariant that sign_lo matches the current lo endpoint
        sign_lo = horner(c, lo).signum();
        if sign_lo == 0.0 {
            return lo;
        }
    }
    best
}

/// Root of a scalar function on a bracketing interval by Brent's method.
///
/// Requires f(lo) and f(hi) of opposite sign (an endpoint that is exactly
/// zero is returned directly). Converges when the bracket shrinks below
/// `tol` (plus machine slack); every iterate stays inside the bracket.
pub fn refine_bracketed_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange { lo, hi });
    }
    // classic Brent: inverse quadratic / secant with bisection fallback
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            (a, b, c) = (b, c, b);
            (fa, fb, fc) = (fb, fc, fb);
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q / 2.0).abs() * 2.0) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Ok(b)
}

/// One classical Runge-Kutta 4 step of size `dt` for y' = rhs(y).
///
/// `dt` must be positive; the caller owns step-size policy (no adaptivity).
pub fn rk4_step<F: Fn(&[f64]) -> Vec<f64>>(
    rhs: F,
    state: &[f64],
    dt: f64,
) -> Result<Vec<f64>, NumericsError> {
    debug_assert!(dt > 0.0, "rk4_step requires dt > 0");
    let n = state.len();
    let k1 = rhs(state);
    let stage =
        |k: &[f64], h: f64| -> Vec<f64> { (0..n).map(|i| state[i] + h * k[i]).collect::<Vec<_>>() };
    let k2 = rhs(&stage(&k1, 0.5 * dt));
    let k3 = rhs(&stage(&k2, 0.5 * dt));
    let k4 = rhs(&stage(&k3, dt));
    let out: Vec<f64> = (0..n)
        .map(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(NumericsError::NonFiniteState)
    }
}

/// Integrate y' = rhs(y) from 0 to `t_total` with fixed step `dt` (a shorter
/// final step absorbs the remainder).
pub fn rk4_integrate<F: Fn(&[f64]) -> Vec<f64>>(
    rhs: F,
    state: &[f64],
    t_total: f64,
    dt: f64,
) -> Result<Vec<f64>, NumericsError> {
    debug_assert!(dt > 0.0 && t_total >= 0.0);
    let mut y = state.to_vec();
    let n_full = (t_total / dt).floor() as u64;
    for _ in 0..n_full {
        y = rk4_step(&rhs, &y, dt)?;
    }
    let rem = t_total - n_full as f64 * dt;
    if rem > t_total * 1e-14 {
        y = rk4_step(&rhs, &y, rem)?;
    }
    Ok(y)
}

/// Double-double value hi + lo, |lo| at most half an ulp of hi. Only the
/// operations the characteristic recursion needs.
#[derive(Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let t = s - a;
        Dd {
            hi: s,
            lo: (a - (s - t)) + (b - t),
        }
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_int(self, k: f64) -> Dd {
        let q1 = self.hi / k;
        let r = q1.mul_add(-k, self.hi) + self.lo;
        Dd::renorm(q1, r / k)
    }
}

/// Complex double-double, component-wise.
#[derive(Clone, Copy, Default)]
struct CDd {
    re: Dd,
    im: Dd,
}

impl CDd {
    fn new(v: Complex64) -> Self {
        CDd {
            re: Dd::new(v.re),
            im: Dd::new(v.im),
        }
    }

    fn add(self, o: CDd) -> CDd {
        CDd {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    fn neg(self) -> CDd {
        CDd {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
}

type MatDd = [[CDd; 4]; 4];

fn mat_mul_dd(x: &MatDd, y: &MatDd) -> MatDd {
    let mut out = MatDd::default();
    for (i, row) in x.iter().enumerate() {
        for j in 0..4 {
            let mut acc = CDd::default();
            for (xe, yr) in row.iter().zip(y.iter()) {
                acc = acc.add(xe.mul(yr[j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

fn trace_dd(x: &MatDd) -> CDd {
    (0..4).fold(CDd::default(), |acc, i| acc.add(x[i][i]))
}

fn add_diag_dd(x: &MatDd, s: CDd) -> MatDd {
    let mut out = *x;
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = row[i].add(s);
    }
    out
}

/// Characteristic coefficients [a4, a3, a2, a1] of x^4 + a1 x^3 + ... + a4 by
/// the Faddeev-LeVerrier recursion, accumulated in double-double arithmetic.
/// The trailing coefficients cancel catastrophically in plain f64 whenever the
/// spectrum holds small clustered values, and the concurrence path needs them
/// to full relative precision to split such clusters.
fn characteristic_coefficients(m: &Matrix4<Complex64>) -> [Complex64; 4] {
    let mut md = MatDd::default();
    for i in 0..4 {
        for j in 0..4 {
            md[i][j] = CDd::new(m[(i, j)]);
        }
    }
    let b1 = md;
    let a1 = trace_dd(&b1).neg();
    let b2 = mat_mul_dd(&md, &add_diag_dd(&b1, a1));
    let a2 = CDd {
        re: trace_dd(&b2).re.div_int(-2.0),
        im: trace_dd(&b2).im.div_int(-2.0),
    };
    let b3 = mat_mul_dd(&md, &add_diag_dd(&b2, a2));
    let a3 = CDd {
        re: trace_dd(&b3).re.div_int(-3.0),
        im: trace_dd(&b3).im.div_int(-3.0),
    };
    let b4 = mat_mul_dd(&md, &add_diag_dd(&b3, a3));
    let a4 = CDd {
        re: trace_dd(&b4).re.div_int(-4.0),
        im: trace_dd(&b4).im.div_int(-4.0),
    };
    [a4, a3, a2, a1].map(|v| Complex64::new(v.re.to_f64(), v.im.to_f64()))
}

/// Eigenvalues (descending) of a 4x4 matrix known by construction to have a
/// real spectrum, via Faddeev-LeVerrier characteristic coefficients and the
/// real quartic solver. Values with magnitude below 1e-12 are clamped to 0.
///
/// Complex structure (imaginary characteristic coefficients, or fewer than
/// four real roots counted with multiplicity) reports `ComplexSpectrum`.
pub fn eigvals_product4(m: &Matrix4<Complex64>) -> Result<[f64; 4], NumericsError> {
    let [a4, a3, a2, a1] = characteristic_coefficients(m);
    let coeffs = [a4, a3, a2, a1];
    let scale = coeffs.iter().fold(1.0f64, |m, v| m.max(v.norm()));
    if coeffs.iter().any(|v| v.im.abs() > EIGEN_IMAG_TOL * scale) {
        return Err(NumericsError::ComplexSpectrum);
    }
    // char poly: x^4 + a1 x^3 + a2 x^2 + a3 x + a4
    let p = Poly4::new([a4.re, a3.re, a2.re, a1.re, 1.0]);
    let roots = solve_quartic_real(&p).map_err(|_| NumericsError::ComplexSpectrum)?;
    let mut vals = roots.values_with_multiplicity();
    if vals.len() != 4 {
        return Err(NumericsError::ComplexSpectrum);
    }
    for v in &mut vals {
        if v.abs() < EIGEN_CLAMP {
            *v = 0.0;
        }
    }
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok([vals[0], vals[1], vals[2], vals[3]])
}

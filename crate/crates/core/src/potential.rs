//! The Flory–Huggins logarithmic potential
//!
//! ```text
//! W(u) = θ/2 ((1-u) ln(1-u) + (1+u) ln(1+u)) + (1-u²)/2,   |u| <= 1
//! ```
//!
//! together with its derivatives, the positive well `u_θ`, and the globally
//! defined modified potential `W̃` that agrees with `W` on `[-û_θ, û_θ]` and
//! continues it past the logarithmic singularity with a truncated series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from `±1` inside which `W'` and `W''` are guarded.
pub const GUARD_EPS: f64 = 1e-12;

/// Default threshold constant for [`ModifiedPotential::build`].
pub const DEFAULT_THRESHOLD_C: f64 = 1.5;

/// Upper limit on the truncation order of the modified potential.
pub const MAX_TRUNCATION_ORDER: usize = 10_000;

const NEWTON_MAX_ITER: usize = 200;

/// Behaviour of `W'` and `W''` near the singularities at `u = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardMode {
    /// Reject `|u| >= 1 - GUARD_EPS`.
    #[default]
    Strict,
    /// Evaluate at `sign(u) (1 - GUARD_EPS)` instead.
    Clamped,
}

/// Rescaled temperature of the mixture, restricted to `0 < θ < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    theta: f64,
}

/// `(W, W', W'')` at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValues {
    pub w: f64,
    pub dw: f64,
    pub d2w: f64,
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `θ atanh(|u|)` with the sign of `u`, i.e. `W_1'(u)`. Exactly odd.
#[inline]
pub(crate) fn w1_prime_raw(theta: f64, u: f64) -> f64 {
    let a = u.abs();
    (0.5 * theta * ((1.0 + a) / (1.0 - a)).ln()).copysign(u)
}

/// `W'(u)` without domain checks; callers guarantee `|u| < 1`.
#[inline]
pub(crate) fn w_prime_raw(theta: f64, u: f64) -> f64 {
    let a = u.abs();
    (0.5 * theta * ((1.0 + a) / (1.0 - a)).ln() - a) * 1f64.copysign(u)
}

#[inline]
pub(crate) fn w_raw(theta: f64, u: f64) -> f64 {
    0.5 * theta * (xlnx(1.0 - u) + xlnx(1.0 + u)) + 0.5 * (1.0 - u * u)
}

#[inline]
pub(crate) fn w1_raw(theta: f64, u: f64) -> f64 {
    0.5 * theta * (xlnx(1.0 - u) + xlnx(1.0 + u))
}

impl PotentialParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::invalid("theta", theta, "must satisfy 0 < theta < 1"));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Left edge of the spinodal interval: `W'' < 0` exactly for `|u| < √(1-θ)`.
    pub fn spinodal(&self) -> f64 {
        (1.0 - self.theta).sqrt()
    }

    /// `W(u)` for `|u| <= 1`, with `0 ln 0 = 0` at the endpoints.
    pub fn w(&self, u: f64) -> Result<f64> {
        if !(u.abs() <= 1.0) {
            return Err(Error::Domain { what: "W", u });
        }
        Ok(w_raw(self.theta, u))
    }

    fn guarded(&self, u: f64, guard: GuardMode, what: &'static str) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::Domain { what, u });
        }
        if u.abs() < 1.0 - GUARD_EPS {
            return Ok(u);
        }
        match guard {
            GuardMode::Strict => Err(Error::Domain { what, u }),
            GuardMode::Clamped => Ok((1.0 - GUARD_EPS).copysign(u)),
        }
    }

    /// `W'(u) = θ/2 ln((1+u)/(1-u)) - u`.
    pub fn dw(&self, u: f64, guard: GuardMode) -> Result<f64> {
        let u = self.guarded(u, guard, "W'")?;
        Ok(w_prime_raw(self.theta, u))
    }

    /// `W''(u) = θ/(1-u²) - 1`.
    pub fn d2w(&self, u: f64, guard: GuardMode) -> Result<f64> {
        let u = self.guarded(u, guard, "W''")?;
        Ok(self.theta / (1.0 - u * u) - 1.0)
    }

    pub fn values(&self, u: f64, guard: GuardMode) -> Result<PotentialValues> {
        let w = self.w(u)?;
        Ok(PotentialValues {
            w,
            dw: self.dw(u, guard)?,
            d2w: self.d2w(u, guard)?,
        })
    }
}

/// Output of [`find_u_theta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UTheta {
    pub u_theta: f64,
    pub iterations: usize,
    /// `|W'(u_theta)|` at the returned point.
    pub residual: f64,
}

/// Locates the positive well `u_θ`, the unique root of `W'` in `(0, 1)`.
///
/// Safeguarded Newton: iteration starts at the spinodal edge `√(1-θ)`, and
/// any step that leaves the current sign bracket (including the first one,
/// where `W''` vanishes) is replaced by bisection.
pub fn find_u_theta(p: &PotentialParams, tol: f64) -> Result<UTheta> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", tol, "must be positive"));
    }
    let theta = p.theta;
    let f = |u: f64| w_prime_raw(theta, u);
    let df = |u: f64| theta / (1.0 - u * u) - 1.0;

    // W' < 0 on (0, u_θ) and W' > 0 on (u_θ, 1).
    let mut lo = p.spinodal();
    let mut hi = 1.0 - f64::EPSILON / 2.0;
    let mut u = lo;
    for iterations in 1..=NEWTON_MAX_ITER {
        let fu = f(u);
        if fu == 0.0 {
            return Ok(UTheta {
                u_theta: u,
                iterations,
                residual: 0.0,
            });
        }
        if fu < 0.0 {
            lo = lo.max(u);
        } else {
            hi = hi.min(u);
        }
        let newton = u - fu / df(u);
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - u).abs();
        u = next;
        if step <= tol || hi - lo <= tol {
            return Ok(UTheta {
                u_theta: u,
                iterations,
                residual: f(u).abs(),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        lo,
        hi,
    })
}

/// The globally defined potential `W̃ = W̃_1 - W_2`.
///
/// Inside `[-û_θ, û_θ]` it is `W`. Beyond the anchor the logarithm `W_1` is
/// replaced by `W_1(û_θ)` plus the integral of the order-`k` truncation
/// `θ (t + t³/3 + … + t^{2k+1}/(2k+1))`, mirrored for negative `u`.
///
/// The construction picks the smallest `k` for which both truncated sums
/// can exceed `C` below 1, then the smallest representable `û_θ > u_θ` at
/// which they do. `W̃'` jumps at `±û_θ` by [`ModifiedPotential::derivative_jump`].
///
/// For large `k` the polynomial branch overflows to `+∞` once
/// `|u|^{2k+2}` leaves the f64 range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModifiedPotential {
    theta: f64,
    u_theta: f64,
    u_hat: f64,
    order: usize,
    threshold_c: f64,
    w1_at_uhat: f64,
    /// `θ/((2m+1)(2m+2))`, m = 0..=k
    #[serde(skip)]
    coeffs: Vec<f64>,
    /// `Σ coeffs[m] û^{2m+2}`
    #[serde(skip)]
    anchor_poly: f64,
}

/// Truncated sums `θ Σ x^{2m+1}/(2m+1)` and `θ Σ x^{2m}`, m = 0..=k.
fn truncated_sums(theta: f64, x: f64, k: usize) -> (f64, f64) {
    let x2 = x * x;
    let mut odd_pow = x;
    let mut even_pow = 1.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for m in 0..=k {
        s1 += odd_pow / (2 * m + 1) as f64;
        s2 += even_pow;
        odd_pow *= x2;
        even_pow *= x2;
    }
    (theta * s1, theta * s2)
}

impl ModifiedPotential {
    pub fn build(p: &PotentialParams, threshold_c: f64) -> Result<Self> {
        if !(threshold_c > 1.0 && threshold_c.is_finite()) {
            return Err(Error::invalid("C", threshold_c, "must be a finite value > 1"));
        }
        let theta = p.theta;
        let u_theta = find_u_theta(p, 1e-15)?.u_theta;
        let top = 1.0 - f64::EPSILON / 2.0;

        // W_1'(u) > C somewhere below 1 is necessary for any truncation.
        if w1_prime_raw(theta, top) <= threshold_c {
            return Err(Error::AnchorNotRepresentable {
                c: threshold_c,
                theta,
            });
        }

        let holds = |x: f64, k: usize| {
            let (s1, s2) = truncated_sums(theta, x, k);
            s1 > threshold_c && s2 > threshold_c
        };

        // Sums at x -> 1⁻ are θ Σ 1/(2m+1) and θ (k+1).
        let mut harmonic_odd = 0.0;
        for k in 0..=MAX_TRUNCATION_ORDER {
            harmonic_odd += 1.0 / (2 * k + 1) as f64;
            if theta * harmonic_odd <= threshold_c || theta * (k + 1) as f64 <= threshold_c {
                continue;
            }
            if !holds(top, k) {
                continue;
            }
            let mut lo = u_theta;
            let mut hi = top;
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if holds(mid, k) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Self::assemble(theta, u_theta, hi, k, threshold_c));
        }
        Err(Error::TruncationOrderExceeded {
            c: threshold_c,
            theta,
            cap: MAX_TRUNCATION_ORDER,
        })
    }

    fn assemble(theta: f64, u_theta: f64, u_hat: f64, order: usize, threshold_c: f64) -> Self {
        let coeffs: Vec<f64> = (0..=order)
            .map(|m| theta / ((2 * m + 1) as f64 * (2 * m + 2) as f64))
            .collect();
        let anchor_poly = Self::poly(&coeffs, u_hat);
        Self {
            theta,
            u_theta,
            u_hat,
            order,
            threshold_c,
            w1_at_uhat: w1_raw(theta, u_hat),
            coeffs,
            anchor_poly,
        }
    }

    /// `Σ c_m x^{2m+2}` by Horner in `x²`.
    fn poly(coeffs: &[f64], x: f64) -> f64 {
        let x2 = x * x;
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * x2 + c) * x2
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn u_theta(&self) -> f64 {
        self.u_theta
    }

    pub fn u_hat(&self) -> f64 {
        self.u_hat
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn threshold_c(&self) -> f64 {
        self.threshold_c
    }

    pub fn w1_at_uhat(&self) -> f64 {
        self.w1_at_uhat
    }

    /// `W̃(u)`, defined on all of ℝ.
    pub fn value(&self, u: f64) -> f64 {
        let a = u.abs();
        if a <= self.u_hat {
            return w_raw(self.theta, a);
        }
        let w1 = self.w1_at_uhat + (Self::poly(&self.coeffs, a) - self.anchor_poly);
        w1 - 0.5 * (a * a - 1.0)
    }

    /// `W̃'(u)`. At `|u| = û_θ` the inner (exact) branch is used.
    pub fn derivative(&self, u: f64) -> f64 {
        let a = u.abs();
        if a <= self.u_hat {
            return w_prime_raw(self.theta, u);
        }
        let (s1, _) = truncated_sums(self.theta, a, self.order);
        (s1 - a) * 1f64.copysign(u)
    }

    /// `W̃''(u)` away from `±û_θ`.
    pub fn second_derivative(&self, u: f64) -> f64 {
        let a = u.abs();
        if a <= self.u_hat {
            return self.theta / (1.0 - a * a) - 1.0;
        }
        let (_, s2) = truncated_sums(self.theta, a, self.order);
        s2 - 1.0
    }

    pub fn values(&self, u: f64) -> (f64, f64) {
        (self.value(u), self.derivative(u))
    }

    /// `W̃'(û_θ⁺) - W'(û_θ)`; negative since the truncated series undershoots.
    pub fn derivative_jump(&self) -> f64 {
        let (s1, _) = truncated_sums(self.theta, self.u_hat, self.order);
        s1 - w1_prime_raw(self.theta, self.u_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(theta: f64) -> PotentialParams {
        PotentialParams::new(theta).unwrap()
    }

    #[test]
    fn values_at_origin() {
        let v = p(0.7).values(0.0, GuardMode::Strict).unwrap();
        assert_eq!(v.w, 0.5);
        assert_eq!(v.dw, 0.0);
        assert_relative_eq!(v.d2w, -0.3, epsilon = 1e-15);
    }

    #[test]
    fn value_at_pure_phase() {
        assert_relative_eq!(p(0.7).w(1.0).unwrap(), 0.7 * 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(p(0.7).w(-1.0).unwrap(), 0.7 * 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn extended_precision_oracle_at_half() {
        // 30-digit evaluation of the closed forms at u = 0.5, θ = 0.7.
        let v = p(0.7).values(0.5, GuardMode::Strict).unwrap();
        assert!((v.w - 0.466_568_425_158_795_87).abs() < 1e-12, "{}", v.w);
        assert!((v.dw - (-0.115_485_698_966_161_61)).abs() < 1e-12, "{}", v.dw);
        assert!((v.d2w - (-0.066_666_666_666_666_67)).abs() < 1e-12, "{}", v.d2w);
    }

    #[test]
    fn domain_errors_and_guards() {
        let p = p(0.7);
        assert!(p.w(1.0 + 1e-9).is_err());
        assert!(p.dw(1.0, GuardMode::Strict).is_err());
        assert!(p.dw(1.0 - 1e-13, GuardMode::Strict).is_err());
        assert!(p.d2w(-1.0, GuardMode::Strict).is_err());
        let clamped = p.dw(1.5, GuardMode::Clamped).unwrap();
        assert_eq!(clamped, p.dw(1.0 - GUARD_EPS, GuardMode::Clamped).unwrap());
        assert!(clamped.is_finite() && clamped > 0.0);
        assert!(p.dw(f64::NAN, GuardMode::Clamped).is_err());
    }

    #[test]
    fn theta_validation() {
        for bad in [0.0, 1.0, -0.2, 1.2, f64::NAN] {
            assert!(PotentialParams::new(bad).is_err());
        }
    }

    #[test]
    fn u_theta_table_values() {
        for (theta, expected) in [
            (0.3, 0.997414),
            (0.5, 0.957504),
            (0.7, 0.828635),
            (0.9, 0.525430),
            (0.95, 0.379485),
        ] {
            let r = find_u_theta(&p(theta), 1e-14).unwrap();
            assert!((r.u_theta - expected).abs() < 1e-6, "θ={theta}: {}", r.u_theta);
            assert!(r.residual < 1e-12);
        }
    }

    fn bisection_oracle(theta: f64) -> f64 {
        let f = |u: f64| 0.5 * theta * ((1.0 + u) / (1.0 - u)).ln() - u;
        let (mut a, mut b) = (1e-12, 1.0 - 1e-12);
        // f(a) < 0 < f(b)
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn u_theta_matches_bisection() {
        for theta in [0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
            let newton = find_u_theta(&p(theta), 1e-14).unwrap().u_theta;
            assert!((newton - bisection_oracle(theta)).abs() < 1e-10, "θ={theta}");
        }
    }

    #[test]
    fn u_theta_rejects_bad_tolerance() {
        assert!(find_u_theta(&p(0.7), 0.0).is_err());
    }

    #[test]
    fn modified_potential_structure() {
        let m = ModifiedPotential::build(&p(0.7), DEFAULT_THRESHOLD_C).unwrap();
        assert!(m.u_theta() < m.u_hat() && m.u_hat() < 1.0);
        let (s1, s2) = truncated_sums(0.7, m.u_hat(), m.order());
        assert!(s1 > m.threshold_c() && s2 > m.threshold_c());
        // minimality of k
        let (s1, s2) = truncated_sums(0.7, 1.0 - f64::EPSILON / 2.0, m.order() - 1);
        assert!(s1 <= m.threshold_c() || s2 <= m.threshold_c());
        assert_eq!(m.value(m.u_theta()), p(0.7).w(m.u_theta()).unwrap());
        assert!(m.derivative_jump() < 0.0);
    }

    #[test]
    fn modified_potential_is_increasing_past_anchor() {
        let m = ModifiedPotential::build(&p(0.7), DEFAULT_THRESHOLD_C).unwrap();
        let (a, b) = (m.u_hat(), 2.0);
        let mut prev = m.value(a);
        for i in 1..=1000 {
            let u = a + (b - a) * i as f64 / 1000.0;
            let v = m.value(u);
            assert!(v > prev, "not increasing at {u}");
            prev = v;
        }
    }

    #[test]
    fn modified_potential_far_branch() {
        let m = ModifiedPotential::build(&p(0.7), DEFAULT_THRESHOLD_C).unwrap();
        let (w, dw) = m.values(1.5);
        assert!(w.is_finite());
        assert!(dw > 0.0);
        assert!(p(0.7).w(1.5).is_err());
        assert_eq!(m.value(0.0), 0.5);
    }

    #[test]
    fn constant_100_is_not_representable() {
        let err = ModifiedPotential::build(&p(0.7), 100.0).unwrap_err();
        assert!(matches!(err, Error::AnchorNotRepresentable { .. }), "{err}");
        let err = ModifiedPotential::build(&p(0.7), 10.0).unwrap_err();
        assert!(matches!(err, Error::TruncationOrderExceeded { .. }), "{err}");
        assert!(ModifiedPotential::build(&p(0.7), 1.0).is_err());
    }

    #[test]
    fn spinodal_sign_of_curvature() {
        let p = p(0.6);
        let edge = p.spinodal();
        for i in 0..=1000 {
            let u = -0.99 + 1.98 * i as f64 / 1000.0;
            if (u.abs() - edge).abs() < 1e-9 {
                continue;
            }
            let negative = p.d2w(u, GuardMode::Strict).unwrap() < 0.0;
            assert_eq!(negative, u.abs() < edge, "u={u}");
        }
    }
}

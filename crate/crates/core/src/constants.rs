//! Closed-form constants of the radial MEMS problem `Δ²u = λ/(1−u)^p` on the
//! unit ball: the singular-profile coefficient `K₀`, the Hardy-Rellich
//! constant `Hₙ`, the power-rule coefficient `K₁`, the critical exponents, the
//! sub-solution coefficients and the biharmonic extension of boundary data.
//!
//! Everything here is a pure function of its arguments.

use serde::Serialize;

use crate::error::{Error, Result};

/// Dimension and exponent of the problem. `λ` is deliberately not stored:
/// one parameter set serves a whole continuation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    n: usize,
    p: f64,
}

impl ProblemParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 1, got {n}")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!("exponent must be > 1, got {p}")));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `4/(p+1)`, the exponent of the explicit singular profile `1 − r^{4/(p+1)}`.
    pub fn alpha(&self) -> f64 {
        4.0 / (self.p + 1.0)
    }

    pub fn k0(&self) -> f64 {
        k0(self)
    }
}

/// Singular-profile coefficient
/// `K₀ = 8(p−1)/(p+1)² · [n − 2(p−1)/(p+1)] · [n − 4p/(p+1)]`.
///
/// The bracket terms are evaluated as `n − 2 + 4/(p+1)` and `n − 4 + 4/(p+1)`
/// so that large `p` does not cancel. The value is signed; it is positive
/// exactly when `n > 4p/(p+1)`.
pub fn k0(params: &ProblemParams) -> f64 {
    let n = params.n as f64;
    let p = params.p;
    let q = 4.0 / (p + 1.0);
    let lead = 8.0 * (p - 1.0) / ((p + 1.0) * (p + 1.0));
    lead * ((n - 2.0) + q) * ((n - 4.0) + q)
}

/// Best Hardy-Rellich constant `(n(n−4)/4)²`.
pub fn hn(n: usize) -> f64 {
    let n = n as f64;
    let t = n * (n - 4.0) / 4.0;
    t * t
}

/// Radial power-rule coefficient: `Δ²(r^m) = K₁(m, n) r^{m−4}` with
/// `K₁ = m(m−2)(m+n−2)(m+n−4)`.
pub fn k1(m: f64, n: usize) -> f64 {
    let n = n as f64;
    m * (m - 2.0) * (m + n - 2.0) * (m + n - 4.0)
}

/// Why a critical exponent has no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    /// The upper exponent is excluded in dimension four.
    DimensionFour,
    /// `4 + n² − 4√(n²+Hₙ)` is negative.
    NegativeDiscriminant,
    /// The closed form has a vanishing denominator.
    ZeroDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalValue {
    Defined(f64),
    Undefined(UndefinedReason),
}

impl CriticalValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            CriticalValue::Defined(v) => Some(*v),
            CriticalValue::Undefined(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponents {
    pub p_c: CriticalValue,
    pub p_c_plus: CriticalValue,
}

/// Left-hand side of the quartic that characterises the critical exponents,
/// `(t+4)(t+2)(n−2−t)(n−4−t)` with `t = 4/(−p−1)`, evaluated at `−p = value`.
pub fn quartic_lhs(n: usize, value: f64) -> f64 {
    let n = n as f64;
    let t = 4.0 / (value - 1.0);
    (t + 4.0) * (t + 2.0) * (n - 2.0 - t) * (n - 4.0 - t)
}

/// `|quartic_lhs − Hₙ|`.
pub fn quartic_residual(n: usize, value: f64) -> f64 {
    (quartic_lhs(n, value) - hn(n)).abs()
}

// One Newton step on the quartic in the `−p` variable; removes the rounding
// the closed form picks up from the nested square roots.
fn polish(n: usize, value: f64) -> f64 {
    let nf = n as f64;
    let t = 4.0 / (value - 1.0);
    let (f1, f2, f3, f4) = (t + 4.0, t + 2.0, nf - 2.0 - t, nf - 4.0 - t);
    let q = f1 * f2 * f3 * f4 - hn(n);
    let dq_dt = f2 * f3 * f4 + f1 * f3 * f4 - f1 * f2 * f4 - f1 * f2 * f3;
    let dt_dv = -4.0 / ((value - 1.0) * (value - 1.0));
    let slope = dq_dt * dt_dv;
    if slope == 0.0 || !slope.is_finite() {
        return value;
    }
    let next = value - q / slope;
    if quartic_residual(n, next) <= quartic_residual(n, value) {
        next
    } else {
        value
    }
}

/// Critical exponents `p_c` and `p_c⁺` (as values of `−p`) for `n ≥ 3`.
pub fn critical_exponents(n: usize) -> Result<CriticalExponents> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "critical exponents need n >= 3, got {n}"
        )));
    }
    let nf = n as f64;
    let disc = 4.0 + nf * nf - 4.0 * (nf * nf + hn(n)).sqrt();
    if disc < 0.0 {
        let u = CriticalValue::Undefined(UndefinedReason::NegativeDiscriminant);
        return Ok(CriticalExponents { p_c: u, p_c_plus: u });
    }
    let s = disc.sqrt();
    let closed = |num: f64, den: f64| {
        if den == 0.0 {
            CriticalValue::Undefined(UndefinedReason::ZeroDenominator)
        } else {
            CriticalValue::Defined(polish(n, num / den))
        }
    };
    let p_c = closed(nf + 2.0 - s, nf - 6.0 - s);
    let p_c_plus = if n == 4 {
        CriticalValue::Undefined(UndefinedReason::DimensionFour)
    } else {
        closed(nf + 2.0 + s, nf - 6.0 + s)
    };
    Ok(CriticalExponents { p_c, p_c_plus })
}

/// Coefficients `(a₁, a₂)` of the sub-solution candidate
/// `ω_m(r) = 1 − a₁ r^{4/(p+1)} + a₂ r^m`, fixed by `ω(1) = ω′(1) = 0`.
pub fn subsolution_coeffs(m: f64, p: f64) -> Result<(f64, f64)> {
    let alpha = 4.0 / (p + 1.0);
    if !(m.is_finite() && m > alpha) {
        return Err(Error::InvalidParameter(format!(
            "sub-solution exponent m = {m} must exceed 4/(p+1) = {alpha}"
        )));
    }
    let a2 = alpha / (m - alpha);
    Ok((1.0 + a2, a2))
}

/// Pointwise-bound constant `C₀ = (λ*/K₀)^{1/(p+1)}`.
pub fn c0(lambda_star: f64, params: &ProblemParams) -> Result<f64> {
    let k = k0(params);
    if !(lambda_star > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda* must be positive, got {lambda_star}"
        )));
    }
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("K0 must be positive, got {k}")));
    }
    Ok((lambda_star / k).powf(1.0 / (params.p + 1.0)))
}

/// Clamped boundary data `u(1) = alpha`, `u′(1) = gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundaryPair {
    pub alpha: f64,
    pub gamma: f64,
}

impl BoundaryPair {
    pub const HOMOGENEOUS: BoundaryPair = BoundaryPair { alpha: 0.0, gamma: 0.0 };

    pub fn new(alpha: f64, gamma: f64) -> Self {
        Self { alpha, gamma }
    }

    /// `γ ≤ 0` and `α − γ/2 < 1`.
    pub fn is_admissible(&self) -> bool {
        self.gamma <= 0.0 && self.alpha - self.gamma / 2.0 < 1.0
    }
}

/// Radial biharmonic function `Φ(r) = c1 + c2 r²` with prescribed clamped data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiharmonicExtension {
    pub c1: f64,
    pub c2: f64,
}

impl BiharmonicExtension {
    pub fn eval(&self, r: f64) -> f64 {
        self.c1 + self.c2 * r * r
    }

    pub fn derivative(&self, r: f64) -> f64 {
        2.0 * self.c2 * r
    }
}

pub fn biharmonic_extension(bc: BoundaryPair) -> BiharmonicExtension {
    BiharmonicExtension {
        c1: bc.alpha - bc.gamma / 2.0,
        c2: bc.gamma / 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(n: usize, p: f64) -> ProblemParams {
        ProblemParams::new(n, p).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProblemParams::new(0, 2.0).is_err());
        assert!(ProblemParams::new(3, 1.0).is_err());
        assert!(ProblemParams::new(3, f64::NAN).is_err());
    }

    #[test]
    fn k0_hand_values() {
        // 8/9 · (3 − 2/3) · (3 − 8/3) = 8/9 · 7/3 · 1/3
        assert_relative_eq!(k0(&params(3, 2.0)), 56.0 / 81.0, max_relative = 1e-14);
        // n = 13, p = 2: 8/9 · 37/3 · 31/3
        assert_relative_eq!(
            k0(&params(13, 2.0)),
            8.0 / 9.0 * 37.0 / 3.0 * 31.0 / 3.0,
            max_relative = 1e-14
        );
        let near_one = k0(&params(4, 1.0 + 1e-9));
        assert!(near_one.abs() < 1e-7);
    }

    #[test]
    fn k0_large_p_asymptote() {
        let p = 1e6;
        let scaled = p * k0(&params(13, p));
        assert!((scaled - 792.0).abs() / 792.0 < 1e-3);
        let errs: Vec<f64> = [1e3, 1e4, 1e5]
            .iter()
            .map(|&p| (p * k0(&params(7, p)) - 8.0 * 5.0 * 3.0).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn hn_values() {
        assert_eq!(hn(4), 0.0);
        assert_eq!(hn(13), 855.5625);
        assert_eq!(hn(8), 64.0);
    }

    #[test]
    fn k1_values() {
        assert_eq!(k1(2.0, 17), 0.0);
        assert_relative_eq!(k1(3.5, 13), 951.5625, max_relative = 1e-15);
        assert_eq!(k1(4.0, 3), 120.0);
    }

    #[test]
    fn critical_exponents_dimension_four() {
        let c = critical_exponents(4).unwrap();
        assert!(c.p_c.value().is_some());
        assert_eq!(
            c.p_c_plus,
            CriticalValue::Undefined(UndefinedReason::DimensionFour)
        );
    }

    #[test]
    fn critical_exponents_dimension_three_ordering() {
        let c = critical_exponents(3).unwrap();
        let pc = c.p_c.value().unwrap();
        let pcp = c.p_c_plus.value().unwrap();
        assert!(pcp < pc);
        // p = 2 lies in the multiplicity window p_c⁺ < −p < p_c.
        assert!(pcp < -2.0 && -2.0 < pc);
    }

    #[test]
    fn critical_exponents_residuals() {
        for n in (3..=40).filter(|&n| n != 4) {
            let c = critical_exponents(n).unwrap();
            for v in [c.p_c, c.p_c_plus] {
                let v = v.value().expect("defined");
                let res = quartic_residual(n, v);
                assert!(res < 1e-10, "n = {n}: residual {res:e}");
            }
        }
        assert!(critical_exponents(2).is_err());
    }

    #[test]
    fn subsolution_coefficients() {
        let (a1, a2) = subsolution_coeffs(2.0, 3.0).unwrap();
        assert_eq!((a1, a2), (2.0, 1.0));
        let p = 1e4;
        let (a1, _) = subsolution_coeffs(2.0, p).unwrap();
        let lead = 1.0 + 4.0 / ((p + 1.0) * 2.0);
        assert!((a1 - lead).abs() * p < 1e-2);
        assert!(subsolution_coeffs(1.0, 3.0).is_err());
        assert!(subsolution_coeffs(0.5, 3.0).is_err());
    }

    #[test]
    fn c0_values() {
        let pr = params(13, 2.0);
        assert_relative_eq!(c0(k0(&pr), &pr).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            c0(2.0 * k0(&pr), &pr).unwrap(),
            2f64.powf(1.0 / 3.0),
            max_relative = 1e-14
        );
        assert!(c0(0.0, &pr).is_err());
        // K₀ < 0 for n = 1, p = 3: n < 4p/(p+1)
        assert!(c0(1.0, &params(1, 3.0)).is_err());
    }

    #[test]
    fn extension_examples() {
        let zero = biharmonic_extension(BoundaryPair::HOMOGENEOUS);
        assert_eq!((zero.c1, zero.c2), (0.0, 0.0));

        let bc = BoundaryPair::new(1.0, -2.0);
        let phi = biharmonic_extension(bc);
        assert_eq!((phi.c1, phi.c2), (2.0, -1.0));
        assert!(!bc.is_admissible());

        let p = 3.0;
        let bc = BoundaryPair::new(0.0, -4.0 / (p + 1.0));
        let phi = biharmonic_extension(bc);
        assert_eq!((phi.c1, phi.c2), (0.5, -0.5));
        assert!(bc.is_admissible());
    }

    proptest! {
        #[test]
        fn a1_minus_a2_is_one(p in 1.1f64..1e4, frac in 0.0f64..1.0) {
            let lo = 4.0 / (p + 1.0) + 0.1;
            let m = lo + frac * (10.0 - lo);
            let (a1, a2) = subsolution_coeffs(m, p).unwrap();
            prop_assert!((a1 - a2 - 1.0).abs() <= 4.0 * f64::EPSILON * a1);
        }

        #[test]
        fn extension_reproduces_boundary_data(alpha in -5.0f64..5.0, gamma in -5.0f64..5.0) {
            let phi = biharmonic_extension(BoundaryPair::new(alpha, gamma));
            prop_assert!((phi.eval(1.0) - alpha).abs() < 1e-14);
            prop_assert!((phi.derivative(1.0) - gamma).abs() < 1e-14);
        }

        #[test]
        fn admissibility_rule(alpha in -5.0f64..5.0, gamma in -5.0f64..5.0) {
            let bc = BoundaryPair::new(alpha, gamma);
            prop_assert_eq!(bc.is_admissible(), gamma <= 0.0 && alpha - gamma / 2.0 < 1.0);
        }

        #[test]
        fn singular_profile_coefficient_matches_power_rule(n in 1usize..40, p in 1.01f64..1e4) {
            // Δ²(1 − r^α) = −k1(α, n) r^{α−4} must equal K₀ r^{α−4}.
            let pr = ProblemParams::new(n, p).unwrap();
            let a = pr.alpha();
            let lhs = -k1(a, n);
            let k = k0(&pr);
            prop_assert!((lhs - k).abs() <= 1e-12 * k.abs().max(1e-300) + 1e-14);
        }

        #[test]
        fn c0_monotone_in_lambda(l1 in 0.1f64..100.0, dl in 0.01f64..10.0) {
            let pr = ProblemParams::new(13, 5.0).unwrap();
            prop_assert!(c0(l1 + dl, &pr).unwrap() > c0(l1, &pr).unwrap());
        }
    }
}

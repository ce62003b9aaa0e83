//! Parameter derivation for the spanner constructions.
//!
//! All the geometric constants (frame span, meta-cone span, separation
//! bounds, size-ratio bounds) have to satisfy a system of inequalities for
//! the stretch, degree and weight guarantees to hold. `choose_parameters`
//! picks the closed-form solution `x = (t-1)/(25t+1)` and derives everything
//! from it; `verify_inequalities` re-checks the full system numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest stretch target the closed form is validated for. Larger requests
/// are built with the 3-spanner parameters, which only over-delivers.
pub const MAX_SOLVED_T: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpannerParams {
    /// Requested stretch target (> 1).
    pub t: f64,
    /// Dimension of the point set.
    pub d: usize,
    /// Frame angular span (radians).
    pub alpha: f64,
    /// Meta-cone angular span bound (radians).
    pub theta: f64,
    /// Lower separation constant for floating-virtual boxes.
    pub rho1: f64,
    /// Upper separation constant for floating-virtual boxes.
    pub rho2: f64,
    /// Separation constant of the underlying well-separated decomposition.
    pub wsep: f64,
    /// Lower size-ratio bound (= 1 / mu2).
    pub mu1: f64,
    /// Upper size-ratio bound.
    pub mu2: f64,
    /// Aspect-ratio bound for virtual boxes.
    pub beta: f64,
    /// Fault parameter; carried along for convenience, it does not change
    /// the geometric constants.
    pub k: usize,
    /// Set when `t > 3` forced a fallback to the `t = 3` parameters.
    #[serde(default)]
    pub t_clamped: bool,
}

impl SpannerParams {
    /// Stretch value the parameters were actually solved for.
    pub fn effective_t(&self) -> f64 {
        if self.t_clamped { MAX_SOLVED_T } else { self.t }
    }

    /// Half-width of the cone-selection window used when building
    /// meta-cones, chosen so the resulting span bound is exactly `theta`:
    /// a selected axis is within `theta1 + alpha/2` of the reference
    /// direction, so axis pairs span at most `2*theta1 + alpha = theta`.
    pub fn theta1(&self) -> f64 {
        (self.theta - self.alpha) / 2.0
    }
}

/// Derive a consistent parameter set from the stretch target and dimension.
pub fn choose_parameters(t: f64, d: usize, k: usize) -> Result<SpannerParams> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("stretch target must be > 1, got {t}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let t_clamped = t > MAX_SOLVED_T;
    let te = if t_clamped { MAX_SOLVED_T } else { t };
    let sd = (d as f64).sqrt();
    let x = (te - 1.0) / (25.0 * te + 1.0);
    let rho1 = sd / x;
    let p = SpannerParams {
        t,
        d,
        alpha: x,
        theta: 19.0 * x,
        rho1,
        rho2: 2.0 * rho1 + 6.0 * sd,
        wsep: rho1 + sd,
        mu1: 0.5,
        mu2: 2.0,
        beta: 2.0,
        k,
        t_clamped,
    };
    debug_assert!(verify_inequalities(&p));
    Ok(p)
}

/// Left-hand side of the composite stretch inequality.
fn stretch_lhs(t: f64, sd_over_rho1: f64, theta: f64) -> f64 {
    let x = sd_over_rho1;
    let denom = 1.0 - 2.0 * (theta / 2.0).sin() - 2.0 * x;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    2.0 * t * x + (1.0 + 2.0 * t * x) * (1.0 + x) / denom
}

/// Check every inequality the correctness arguments rely on.
pub fn verify_inequalities(p: &SpannerParams) -> bool {
    let sd = (p.d as f64).sqrt();
    let te = p.effective_t();
    let eps = 1e-9;
    let x = sd / p.rho1;

    // decomposition feasibility
    let c1 = p.rho2 + eps >= 2.0 * p.rho1 + 6.0 * sd;
    let c2 = p.rho1 <= p.wsep - sd + eps;
    let c3 = p.rho2 + eps >= 2.0 * p.wsep + 4.0 * sd;
    // stated alongside the decomposition theorem; redundant with c5 for all
    // accepted t, enforced anyway
    let c4 = p.rho1 + eps >= 4.0 * sd;
    // stretch conditions
    let c5 = p.rho1 * (te - 1.0) + eps >= 2.0 * sd * (te + 1.0);
    let c6 = p.theta + eps >= 3.0 * p.alpha + 16.0 * x;
    let c7 = p.theta < std::f64::consts::FRAC_PI_3;
    let c8 = stretch_lhs(te, x, p.theta) <= te + eps;
    // size and aspect bounds
    let c9 = (p.mu1 * p.mu2 - 1.0).abs() <= eps && p.mu2 == 2.0;
    let c10 = p.beta <= 2.0 && p.beta >= 1.0;

    c1 && c2 && c3 && c4 && c5 && c6 && c7 && c8 && c9 && c10
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_t2_d2() {
        let p = choose_parameters(2.0, 2, 0).unwrap();
        let sd = 2.0f64.sqrt();
        assert!((p.alpha - 1.0 / 51.0).abs() < 1e-15);
        assert!((p.theta - 19.0 / 51.0).abs() < 1e-15);
        assert!((p.rho1 - 51.0 * sd).abs() < 1e-9, "rho1 = {}", p.rho1);
        assert!((p.rho1 - 72.12489168102785).abs() < 1e-9);
        assert!((p.rho2 - (2.0 * 51.0 * sd + 6.0 * sd)).abs() < 1e-9);
        assert!((p.rho2 - 152.73506473629428).abs() < 1e-9);
        assert!(verify_inequalities(&p));
    }

    #[test]
    fn composite_inequality_holds_numerically_at_t15() {
        let p = choose_parameters(1.5, 2, 0).unwrap();
        let x = (2.0f64).sqrt() / p.rho1;
        let lhs = stretch_lhs(1.5, x, p.theta);
        assert!(lhs <= 1.5, "lhs = {lhs}");
    }

    #[test]
    fn rejects_t_at_most_one() {
        assert!(choose_parameters(1.0, 2, 0).is_err());
        assert!(choose_parameters(0.5, 2, 0).is_err());
        assert!(choose_parameters(f64::NAN, 2, 0).is_err());
    }

    #[test]
    fn clamps_large_t_with_flag() {
        let p = choose_parameters(5.0, 2, 0).unwrap();
        assert!(p.t_clamped);
        assert_eq!(p.t, 5.0);
        assert_eq!(p.effective_t(), 3.0);
        let p3 = choose_parameters(3.0, 2, 0).unwrap();
        assert_eq!(p.alpha, p3.alpha);
        assert!(verify_inequalities(&p));
    }

    #[test]
    fn verify_rejects_broken_params() {
        let mut p = choose_parameters(2.0, 2, 0).unwrap();
        p.rho2 = p.rho1;
        assert!(!verify_inequalities(&p));

        let mut q = choose_parameters(2.0, 2, 0).unwrap();
        q.theta = std::f64::consts::FRAC_PI_2;
        assert!(!verify_inequalities(&q));
    }

    #[test]
    fn monotone_in_t_and_side_condition() {
        let mut prev_rho1 = 0.0;
        let mut prev_alpha = f64::INFINITY;
        for i in 0..40 {
            let t = 3.0 - i as f64 * 0.05;
            if t <= 1.0 {
                break;
            }
            let p = choose_parameters(t, 2, 0).unwrap();
            assert!(verify_inequalities(&p), "t = {t}");
            // as t decreases toward 1, rho1 grows and alpha shrinks
            assert!(p.rho1 >= prev_rho1);
            assert!(p.alpha <= prev_alpha);
            prev_rho1 = p.rho1;
            prev_alpha = p.alpha;
            // side condition 21 x < 1
            assert!(21.0 * p.alpha < 1.0);
        }
    }

    #[test]
    fn serializes_with_expected_field_names() {
        let p = choose_parameters(2.0, 2, 1).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        for key in
            ["t", "d", "alpha", "theta", "rho1", "rho2", "wsep", "mu1", "mu2", "beta", "k"]
        {
            assert!(v.get(key).is_some(), "missing field {key}");
        }
    }
}

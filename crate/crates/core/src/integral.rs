//! The far-field interference integral shared by the OP model and the
//! fixed-point equation:
//!
//! ```text
//! J(a, c) = ∫_a^∞ s / (c + s^α / θ) ds,   c ∈ [0, 1], a > 0
//! ```
//!
//! With `c = 1` it is the Laplace-functional exponent of a PPP outside an
//! empty ball (scaled by `d`), with `c = 1 - p` the third term of the
//! fixed-point right-hand side.

/// Absolute tolerance requested from the quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// `J(a, c)` by double-exponential quadrature, valid for any `alpha > 2`.
///
/// The substitution `s = a u^(-1/(α-2))` maps the tail onto `(0, 1]` with a
/// bounded integrand:
/// `J = a² / (α−2) ∫_0^1 du / (c u^(α/(α−2)) + a^α / θ)`.
pub fn far_field_numeric(a: f64, c: f64, alpha: f64, theta: f64) -> f64 {
    let kappa = 1.0 / (alpha - 2.0);
    let a_alpha_over_theta = a.powf(alpha) / theta;
    let power = alpha * kappa;
    let integrand = |u: f64| 1.0 / (c * u.powf(power) + a_alpha_over_theta);
    a * a * kappa * quadrature::integrate(integrand, 0.0, 1.0, QUADRATURE_TOLERANCE / (a * a * kappa)).integral
}

/// `J(a, c)` in closed form for `alpha = 4`:
/// `√θ / (2√c) · (π/2 − arctan(a² / √(θc)))`.
pub fn far_field_alpha4(a: f64, c: f64, theta: f64) -> f64 {
    if c == 0.0 {
        return theta / (2.0 * a * a);
    }
    let root = (theta * c).sqrt();
    // π/2 − arctan(z) = atan2(1, z) for z > 0
    theta.sqrt() / (2.0 * c.sqrt()) * root.atan2(a * a)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on a truncated, log-mapped domain; independent of
    /// both the quadrature crate and the arctan reduction.
    fn simpson_oracle(a: f64, c: f64, alpha: f64, theta: f64) -> f64 {
        // s = a e^u, ds = s du, u ∈ [0, U]
        let upper = 60.0;
        let n = 200_000;
        let h = upper / n as f64;
        let f = |u: f64| {
            let s = a * u.exp();
            s * s / (c + s.powf(alpha) / theta)
        };
        let mut acc = f(0.0) + f(upper);
        for i in 1..n {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn alpha4_closed_form_matches_quadrature() {
        for &(a, c, theta) in &[(0.5, 1.0, 1.0), (2.5, 0.7, 2.0), (0.01, 0.2, 0.5), (10.0, 0.999, 8.0), (1.0, 1e-6, 1.0)] {
            let closed = far_field_alpha4(a, c, theta);
            let numeric = far_field_numeric(a, c, 4.0, theta);
            assert!((closed - numeric).abs() < 1e-9, "a={a} c={c}: {closed} vs {numeric}");
        }
    }

    #[test]
    fn numeric_matches_simpson_for_other_exponents() {
        for &alpha in &[2.5, 3.0, 3.5, 5.0] {
            for &(a, c) in &[(0.3, 1.0), (1.7, 0.4)] {
                let got = far_field_numeric(a, c, alpha, 1.5);
                let want = simpson_oracle(a, c, alpha, 1.5);
                // the Simpson oracle truncates the tail at s = a e^60
                let tail = 1.5 * (a * 60f64.exp()).powf(2.0 - alpha) / (alpha - 2.0);
                assert!((got - want).abs() < 1e-8 + tail, "alpha={alpha} a={a} c={c}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn p_equal_one_limit() {
        // c = 0: ∫ θ s^(1-α) ds = θ a^(2-α) / (α - 2)
        let got = far_field_numeric(1.3, 0.0, 3.0, 2.0);
        assert!((got - 2.0 * 1.3f64.powf(-1.0)).abs() < 1e-9);
        assert!((far_field_alpha4(1.3, 0.0, 2.0) - 2.0 / (2.0 * 1.69)).abs() < 1e-12);
    }
}

//! Scalar helpers shared by the covariance, spectral and representation code.

/// Gamma function. Lanczos approximation from `statrs`, relative error well
/// below 1e-13 on the arguments used here (all in (0, 3]).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Beta function as `Γ(a)Γ(b)/Γ(a+b)`. Arguments stay in (0.5, 1.5).
pub fn beta(a: f64, b: f64) -> f64 {
    gamma(a) * gamma(b) / gamma(a + b)
}

/// Sign with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `x log|x|` with `0 log 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(2.0) - 1.0).abs() < 1e-14);
        assert!((gamma(3.0) - 2.0).abs() < 1e-14);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma(1.5) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn beta_symmetric_and_known() {
        assert!((beta(1.0, 1.0) - 1.0).abs() < 1e-14);
        assert!((beta(0.7, 1.2) - beta(1.2, 0.7)).abs() < 1e-15);
        // B(1/2, 1/2) = π
        assert!((beta(0.5, 0.5) - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn conventions_at_zero() {
        assert_eq!(sign(0.0), 0.0);
        assert_eq!(xlogx(0.0), 0.0);
        assert_eq!(sign(-2.0), -1.0);
        assert!((xlogx(-std::f64::consts::E) + std::f64::consts::E).abs() < 1e-15);
    }
}

use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, norm_pdf};

fn check(theta: f64, sigma: f64) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("maturity must be positive, got {theta}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("volatility must be positive, got {sigma}")));
    }
    Ok(())
}

/// `e^k Φ(−d₂) − Φ(−d₁)` with `d₁ = (−k + σ²θ/2)/(σ√θ)`, `d₂ = d₁ − σ√θ`.
pub fn bs_put(k: f64, theta: f64, sigma: f64) -> Result<f64> {
    check(theta, sigma)?;
    let sd = sigma * theta.sqrt();
    let d1 = (-k + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    Ok((k.exp() * norm_cdf(-d2) - norm_cdf(-d1)).max(0.0))
}

/// `∂P/∂σ = √θ φ(d₁)`.
pub fn bs_vega(k: f64, theta: f64, sigma: f64) -> Result<f64> {
    check(theta, sigma)?;
    let sd = sigma * theta.sqrt();
    let d1 = (-k + 0.5 * sd * sd) / sd;
    Ok(theta.sqrt() * norm_pdf(d1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn atm_value() {
        let p = bs_put(0.0, 1.0, 0.2).unwrap();
        assert!((p - 0.079_655_674_554_057_98).abs() < 1e-15);
        assert!((p - (2.0 * norm_cdf(0.1) - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        assert_eq!(bs_put(-50.0, 1.0, 0.2).unwrap(), 0.0);
        let k = 0.3;
        assert!((bs_put(k, 1.0, 1e3).unwrap() - k.exp()).abs() < 1e-12);
        assert!(bs_put(0.0, 0.0, 0.2).is_err());
        assert!(bs_put(0.0, 1.0, -0.2).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_sigma(k in -0.3f64..0.3, lt in -4.0f64..0.0, s in 0.05f64..0.9) {
            let theta = 10f64.powf(lt);
            let lo = bs_put(k, theta, s).unwrap();
            let hi = bs_put(k, theta, s * 1.1).unwrap();
            prop_assert!(hi >= lo);
        }

        #[test]
        fn vega_matches_central_difference(k in -0.3f64..0.3, lt in -3.0f64..0.0, s in 0.1f64..1.0) {
            let theta = 10f64.powf(lt);
            let h = 1e-5 * s;
            let fd = (bs_put(k, theta, s + h).unwrap() - bs_put(k, theta, s - h).unwrap()) / (2.0 * h);
            let v = bs_vega(k, theta, s).unwrap();
            prop_assume!(v > 1e-3);
            prop_assert!((fd - v).abs() <= 1e-6 * v, "fd {} vega {}", fd, v);
        }

        #[test]
        fn convex_in_strike(lt in -3.0f64..0.0, s in 0.1f64..1.0, k in -0.3f64..0.3) {
            let theta = 10f64.powf(lt);
            let h = 0.01;
            // Convexity in the strike K = e^k.
            let (k0, k1, k2) = ((k - h).exp(), k.exp(), (k + h).exp());
            let p = |x: f64| bs_put(x.ln(), theta, s).unwrap();
            let lhs = p(k1);
            let w = (k2 - k1) / (k2 - k0);
            prop_assert!(lhs <= w * p(k0) + (1.0 - w) * p(k2) + 1e-15);
        }
    }
}

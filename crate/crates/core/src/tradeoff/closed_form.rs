use crate::error::{Error, Result};
use crate::info::binary_entropy;

/// Exact `(R, D)` pairs of the uniform Bloch-sphere ensemble, parametrized by `λ > 0`.
pub fn uniform_curve_closed_form(lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    lambdas.iter().map(|&l| uniform_point(l)).collect()
}

/// The exact curve at prescribed rates: `(λ, D)` per rate, found by bisection in `ln λ`.
pub fn uniform_curve_at_rates(rates: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = (1e-8f64.ln(), 1e8f64.ln());
    rates
        .iter()
        .map(|&r| {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::DomainError(format!(
                    "rate {r} must be finite and nonnegative"
                )));
            }
            let top = uniform_point(hi.exp())?;
            if r >= top.0 {
                return Ok((hi.exp(), top.1));
            }
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if uniform_point(m.exp())?.0 < r {
                    a = m;
                } else {
                    b = m;
                }
            }
            let lambda = (0.5 * (a + b)).exp();
            Ok((lambda, uniform_point(lambda)?.1))
        })
        .collect()
}

fn uniform_point(lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::DomainError(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    // written with e^{-λ} so that large λ does not overflow
    let one_minus = -(-lambda).exp_m1();
    let arg = if lambda < 1e-4 {
        0.5 - lambda / 12.0 + lambda.powi(3) / 720.0
    } else {
        1.0 / lambda - (-lambda).exp() / one_minus
    };
    let h = binary_entropy(arg.clamp(0.0, 1.0))?;
    let ratio = if lambda < 1e-4 {
        1.0 - lambda / 2.0 + lambda * lambda / 12.0
    } else {
        lambda * (-lambda).exp() / one_minus
    };
    // I(U;X) in nats: ln(λ e^λ / (e^λ − 1)) + λ/(e^λ − 1) − 1
    let i_ux = if lambda < 1e-4 {
        lambda * lambda / 24.0
    } else {
        (lambda / one_minus).ln() + ratio - 1.0
    };
    let r = i_ux / std::f64::consts::LN_2 - (1.0 - h);
    let d = 1.0 - h;
    Ok((r.max(0.0), d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_reference_value() {
        let v = uniform_curve_closed_form(&[0.01, 10.0, 30.0, 200.0]).unwrap();
        assert!(v[0].0.abs() < 1e-2 && v[0].1.abs() < 1e-5);
        let arg = 1.0 / 10.0 - 1.0 / (10f64.exp() - 1.0);
        assert!((arg - 0.09995).abs() < 1e-5);
        assert!((v[1].1 - 0.5311).abs() < 1e-4);
        assert!(v[2].1 > 0.75 && v[3].1 > v[2].1 && v[3].1 < 1.0);
        assert!(v[3].0 > v[2].0 && v[2].0 > v[1].0);
        assert!((v[1].0 - 1.3489).abs() < 1e-4, "{}", v[1].0);
        assert!(uniform_curve_closed_form(&[0.0]).is_err());
        assert!(uniform_curve_closed_form(&[-1.0]).is_err());
    }

    #[test]
    fn inversion_hits_requested_rates() {
        let rates = [0.0, 0.5, 1.3489, 3.0];
        let pts = uniform_curve_at_rates(&rates).unwrap();
        for (r, (l, d)) in rates.iter().zip(&pts) {
            let (r2, d2) = uniform_point(*l).unwrap();
            assert!(
                (r2 - r).abs() < 1e-6 && (d2 - d).abs() < 1e-15,
                "{r} {l} {r2} {d} {d2}"
            );
        }
        assert!((pts[2].1 - 0.5311).abs() < 1e-3);
        assert!(pts.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn matches_von_mises_fisher_channel() {
        // W(u|x) ∝ exp(κ u·x) on the sphere, κ = λ/2
        for lambda in [0.5, 2.0, 7.0, 25.0] {
            let kappa: f64 = lambda / 2.0;
            let mean_cos = 1.0 / kappa.tanh() - 1.0 / kappa;
            let i_ux = ((kappa / kappa.sinh()).ln() + kappa * mean_cos) / std::f64::consts::LN_2;
            let d = 1.0 - binary_entropy((1.0 - mean_cos) / 2.0).unwrap();
            let (r, d2) = uniform_point(lambda).unwrap();
            assert!(
                (d - d2).abs() < 1e-12 && (i_ux - d - r).abs() < 1e-12,
                "λ = {lambda}"
            );
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        let a = uniform_point(0.999_999e-4).unwrap();
        let b = uniform_point(1.000_001e-4).unwrap();
        assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
    }
}

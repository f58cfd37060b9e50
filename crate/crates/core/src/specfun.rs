//! Gamma and modified Bessel functions of the first kind, evaluated in log scale.
//!
//! `I_ν(x)` grows like `e^x / sqrt(2πx)`, and the arguments produced by the
//! power-law warping functions grow like `t^{1+α/2}`, so every quantity here is
//! returned as a logarithm. The value itself is never formed for large `x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Argument at which [`log_bessel_i`] switches from the power series to the
/// large-argument expansion.
pub const SERIES_SWITCH: f64 = 30.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate half-plane
        return Ok(PI / ((PI * x).sin() * gamma(1.0 - x)?));
    }
    if x > 171.0 {
        return Ok(f64::INFINITY);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Log-scale evaluation of `I_ν` at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselEval {
    pub nu: f64,
    pub x: f64,
    /// `ln I_ν(x)`.
    pub log_value: f64,
    /// `I_ν'(x) / I_ν(x)`.
    pub ratio: f64,
}

/// `ln I_μ(x)` from the ascending series, summed in log space.
///
/// Valid for any `x > 0` and `μ > -1`; the number of terms grows like `x/2`.
pub fn log_bessel_i_series(mu: f64, x: f64) -> f64 {
    debug_assert!(mu > -1.0 && x > 0.0);
    let log_q = (0.25 * x * x).ln();
    let first = -ln_gamma(mu + 1.0).expect("mu > -1");
    let mut terms = Vec::with_capacity(64);
    let mut term = first;
    let mut max_term = first;
    terms.push(term);
    let mut k = 1.0_f64;
    loop {
        term += log_q - k.ln() - (k + mu).ln();
        terms.push(term);
        if term > max_term {
            max_term = term;
        }
        // past the peak the terms decay super-geometrically
        if term < max_term - 40.0 && k * (k + mu) > 0.25 * x * x {
            break;
        }
        k += 1.0;
    }
    let sum: f64 = terms.iter().map(|t| (t - max_term).exp()).sum();
    mu * (0.5 * x).ln() + max_term + sum.ln()
}

/// `ln I_μ(x)` from the large-argument expansion
/// `I_μ(x) ~ e^x / sqrt(2πx) · Σ (-1)^k a_k(μ) / x^k`.
///
/// The series is truncated at its smallest term, so accuracy is limited to
/// roughly `e^{-2x}`; use only for `x` beyond about 15.
pub fn log_bessel_i_asymptotic(mu: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let four_mu2 = 4.0 * mu * mu;
    let mut sum = 1.0;
    let mut term = 1.0_f64;
    let mut k = 1.0_f64;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (four_mu2 - odd * odd) / (8.0 * k * x);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    x - 0.5 * (2.0 * PI * x).ln() + sum.ln()
}

fn log_bessel_i_any(mu: f64, x: f64) -> f64 {
    if x <= SERIES_SWITCH {
        log_bessel_i_series(mu, x)
    } else {
        log_bessel_i_asymptotic(mu, x)
    }
}

/// `ln I_ν(x)` and the logarithmic derivative `I_ν'(x)/I_ν(x)` for `ν ∈ (0, 1]`.
///
/// The ratio comes from `2 I_ν' = I_{ν+1} + I_{ν-1}`, evaluated as differences
/// of logarithms so it stays finite for arbitrarily large `x`.
pub fn log_bessel_i(nu: f64, x: f64) -> Result<BesselEval> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Domain(format!("bessel order must lie in (0, 1], got {nu}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(BesselEval {
            nu,
            x,
            log_value: f64::NEG_INFINITY,
            ratio: f64::INFINITY,
        });
    }
    let log_value = log_bessel_i_any(nu, x);
    let up = (log_bessel_i_any(nu + 1.0, x) - log_value).exp();
    let down = (log_bessel_i_any(nu - 1.0, x) - log_value).exp();
    Ok(BesselEval {
        nu,
        x,
        log_value,
        ratio: 0.5 * (up + down),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_half_order(x: f64) -> f64 {
        // I_{1/2}(x) = sqrt(2/(πx)) sinh x, written to survive large x
        0.5 * (2.0 / (PI * x)).ln() + x + (-(-2.0 * x).exp_m1()).ln() - 2.0_f64.ln()
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-12 * PI.sqrt());
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((gamma(4.0).unwrap() - 6.0).abs() < 6e-12);
        assert!((gamma(0.1).unwrap() - 9.513_507_698_668_732).abs() < 1e-11);
        assert!((ln_gamma(50.0).unwrap() - 144.565_743_946_344_9).abs() < 1e-11);
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn half_order_closed_form() {
        let e = log_bessel_i(0.5, 1.0).unwrap();
        assert!((e.log_value - (-0.064_351_991_073_531_8)).abs() < 1e-12);
        let mut x = 0.01;
        while x <= 300.0 {
            let e = log_bessel_i(0.5, x).unwrap();
            let exact = log_half_order(x);
            let denom = exact.abs().max(1.0);
            assert!(
                (e.log_value - exact).abs() <= 1e-10 * denom,
                "x={x}: {} vs {exact}",
                e.log_value
            );
            let ratio = 1.0 / x.tanh() - 0.5 / x;
            assert!((e.ratio - ratio).abs() <= 1e-10 * ratio, "ratio x={x}");
            x *= 1.07;
        }
    }

    #[test]
    fn large_argument_limit() {
        let e = log_bessel_i(0.5, 50.0).unwrap();
        assert!((e.log_value - (50.0 - 0.5 * (100.0 * PI).ln())).abs() < 1e-3);
    }

    #[test]
    fn small_argument_series_oracle() {
        // 30 explicit terms of the ascending series
        let (nu, x) = (0.25_f64, 0.01_f64);
        let mut sum = 0.0;
        for k in 0..30 {
            let kf = k as f64;
            sum += (0.25 * x * x).powf(kf) / (gamma(kf + 1.0).unwrap() * gamma(kf + nu + 1.0).unwrap());
        }
        let oracle = nu * (0.5 * x).ln() + sum.ln();
        let e = log_bessel_i(nu, x).unwrap();
        assert!((e.log_value - oracle).abs() < 1e-12);
        // the first correction is (x/2)²/(ν+1) = 2e-5
        let leading = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0).unwrap();
        assert!((e.log_value - leading - 2e-5).abs() < 1e-9);
    }

    #[test]
    fn branches_agree_in_overlap() {
        for &nu in &[0.25, 0.5, 0.9] {
            let mut x = 20.0;
            while x <= 60.0 {
                let s = log_bessel_i_series(nu, x);
                let a = log_bessel_i_asymptotic(nu, x);
                assert!((s - a).abs() < 1e-9, "nu={nu} x={x}: {s} vs {a}");
                x += 0.5;
            }
        }
    }

    #[test]
    fn scaled_ratio_increasing_and_ratio_tends_to_one() {
        // I'/I itself behaves like ν/x near 0; x·I'/I is the monotone quantity
        for &nu in &[0.25, 0.5, 0.9] {
            let mut prev = 0.0;
            let mut x: f64 = 0.1;
            while x <= 100.0 {
                let r = log_bessel_i(nu, x).unwrap().ratio;
                assert!(r > 0.0);
                if x > 0.1 {
                    assert!(x * r > prev, "nu={nu} x={x}");
                }
                prev = x * r;
                x += 0.1;
            }
            let far = log_bessel_i(nu, 1e6).unwrap().ratio;
            assert!((far - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn bessel_domain_errors() {
        assert!(log_bessel_i(0.5, -1.0).is_err());
        assert!(log_bessel_i(0.0, 1.0).is_err());
        assert!(log_bessel_i(1.5, 1.0).is_err());
        let z = log_bessel_i(0.5, 0.0).unwrap();
        assert_eq!(z.log_value, f64::NEG_INFINITY);
    }
}

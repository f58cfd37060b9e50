//! Cutoff families: Hessian cutoffs `χ_R = S(2 - r/R)` and λ-adapted
//! Laplacian cutoffs `χ_R = S(1 - h(r)/H_R)` with `h = ∫_R^r ds/λ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{smoothstep, smoothstep_d1, smoothstep_d2, Lambda};
use crate::error::{range_error, Error, Result};
use crate::geometry::ModelManifold;
use crate::radial::{hessian_norm, laplacian, Jet, RadialFunction};

/// `sup |S'|` of the quintic smoothstep, attained at `x = 1/2`.
pub const SMOOTHSTEP_SUP_D1: f64 = 1.875;
/// `sup |S''|`, attained at `x = 1/2 ± √3/6`.
pub const SMOOTHSTEP_SUP_D2: f64 = 5.773_502_691_896_258;

/// Smallest `H_R` accepted for a Laplacian cutoff.
pub const MIN_LOG_SPAN: f64 = 1e-6;

const SAMPLES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    Hessian,
    Laplacian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub kind: CutoffKind,
    pub r: f64,
    /// Outer radius factor (`2` for Hessian cutoffs).
    pub gamma: f64,
    pub profile_sup_d1: f64,
    pub profile_sup_d2: f64,
    pub beta: f64,
}

/// Measured suprema of one cutoff and their scale-free certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub family: CutoffFamily,
    pub sup_grad: f64,
    /// `sup |∇²χ|` for Hessian cutoffs, `sup |Δχ|` for Laplacian ones.
    pub sup_second: f64,
    /// `sup|∇χ|·R` (Hessian) or `sup|∇χ|·λ(R)` (Laplacian).
    pub grad_certificate: f64,
    /// `sup|∇²χ|·R^{1-β/2}` (Hessian) or `sup|Δχ|` (Laplacian).
    pub second_certificate: f64,
}

/// `χ_R(t) = S(2 - t/R)`.
pub fn make_hessian_cutoff(model: &ModelManifold, r: f64) -> Result<RadialFunction> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("cutoff radius must be positive, got {r}")));
    }
    if 2.0 * r > model.t_max * (1.0 + 1e-12) {
        return Err(range_error("hessian cutoff outer radius 2R", 2.0 * r, 0.0, model.t_max));
    }
    Ok(hessian_cutoff(r))
}

/// The Hessian cutoff without a model to check against.
pub fn hessian_cutoff(r: f64) -> RadialFunction {
    RadialFunction::new(format!("chi_hess[R={r}]"), (0.0, 2.0 * r), vec![r], move |t| {
        let x = 2.0 - t / r;
        Jet::plain(smoothstep(x), -smoothstep_d1(x) / r, smoothstep_d2(x) / (r * r))
    })
}

/// `χ_R = S(1 - h/H_R)` for the scale function `lambda`.
pub fn make_laplacian_cutoff_with(model: &ModelManifold, lambda: Lambda, r: f64, gamma: f64) -> Result<RadialFunction> {
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    let outer = gamma * r;
    if outer > model.t_max * (1.0 + 1e-12) {
        return Err(range_error("laplacian cutoff outer radius γR", outer, 0.0, model.t_max));
    }
    let span = lambda.inverse_integral(r, outer)?;
    if !(span >= MIN_LOG_SPAN) {
        return Err(Error::Configuration(format!(
            "H_R = {span:e} below {MIN_LOG_SPAN:e} at R = {r}: the scale function is too strong for gamma = {gamma}"
        )));
    }
    Ok(RadialFunction::new(
        format!("chi_lap[R={r},gamma={gamma}]"),
        (0.0, outer),
        vec![r],
        move |t| {
            if t <= r {
                return Jet::constant(1.0);
            }
            let Ok(h) = lambda.inverse_integral(r, t) else {
                return Jet::ZERO;
            };
            let lam = lambda.value(t).unwrap_or(f64::INFINITY);
            let dlog = lambda.log_derivative(t).unwrap_or(0.0);
            let x = 1.0 - h / span;
            let hp = 1.0 / lam;
            let hpp = -dlog / lam;
            let xp = -hp / span;
            let xpp = -hpp / span;
            Jet::plain(
                smoothstep(x),
                smoothstep_d1(x) * xp,
                smoothstep_d2(x) * xp * xp + smoothstep_d1(x) * xpp,
            )
        },
    ))
}

/// Laplacian cutoff using the model profile's own scale function.
pub fn make_laplacian_cutoff(model: &ModelManifold, r: f64, gamma: f64) -> Result<RadialFunction> {
    let lambda = model.profile.lambda().ok_or_else(|| {
        Error::Configuration("laplacian cutoffs need an IteratedLog or PowerLaw (alpha > 0) profile".into())
    })?;
    make_laplacian_cutoff_with(model, lambda, r, gamma)
}

fn annulus_samples(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..=SAMPLES).map(move |i| lo + (hi - lo) * i as f64 / SAMPLES as f64)
}

/// Suprema of `|∇χ|` and `|∇²χ|` over the transition annulus `[R, 2R]`.
pub fn certify_cutoff(model: &ModelManifold, chi: &RadialFunction, r: f64, beta: f64) -> Result<Certificate> {
    let (lo, hi) = (r, chi.support.1);
    model.check_range(hi)?;
    let mut sup_grad: f64 = 0.0;
    let mut sup_hess: f64 = 0.0;
    for t in annulus_samples(lo, hi) {
        let j = chi.jet(t);
        let w = model.w(t)?;
        sup_grad = sup_grad.max(j.deriv1().abs());
        sup_hess = sup_hess.max(hessian_norm(&j, w, model.n) * j.log_scale.exp());
    }
    Ok(Certificate {
        family: CutoffFamily {
            kind: CutoffKind::Hessian,
            r,
            gamma: hi / r,
            profile_sup_d1: SMOOTHSTEP_SUP_D1,
            profile_sup_d2: SMOOTHSTEP_SUP_D2,
            beta,
        },
        sup_grad,
        sup_second: sup_hess,
        grad_certificate: sup_grad * r,
        second_certificate: sup_hess * r.powf(1.0 - 0.5 * beta),
    })
}

/// Suprema of `|∇χ|·λ(R)` and `|Δχ|` for a Laplacian cutoff.
pub fn certify_laplacian_cutoff(model: &ModelManifold, lambda: Lambda, r: f64, gamma: f64) -> Result<Certificate> {
    let chi = make_laplacian_cutoff_with(model, lambda, r, gamma)?;
    let mut sup_grad: f64 = 0.0;
    let mut sup_lap: f64 = 0.0;
    for t in annulus_samples(r, gamma * r) {
        let j = chi.jet(t);
        let w = model.w(t)?;
        sup_grad = sup_grad.max(j.d1.abs());
        sup_lap = sup_lap.max(laplacian(&j, w, model.n).abs());
    }
    Ok(Certificate {
        family: CutoffFamily {
            kind: CutoffKind::Laplacian,
            r,
            gamma,
            profile_sup_d1: SMOOTHSTEP_SUP_D1,
            profile_sup_d2: SMOOTHSTEP_SUP_D2,
            beta: 0.0,
        },
        sup_grad,
        sup_second: sup_lap,
        grad_certificate: sup_grad * lambda.value(r)?,
        second_certificate: sup_lap,
    })
}

/// Hessian-cutoff certificates over a list of radii, in input order.
pub fn hessian_sweep(model: &ModelManifold, radii: &[f64], beta: f64) -> Result<Vec<Certificate>> {
    radii
        .par_iter()
        .map(|&r| certify_cutoff(model, &make_hessian_cutoff(model, r)?, r, beta))
        .collect()
}

pub fn laplacian_sweep(model: &ModelManifold, lambda: Lambda, radii: &[f64], gamma: f64) -> Result<Vec<Certificate>> {
    radii
        .par_iter()
        .map(|&r| certify_laplacian_cutoff(model, lambda, r, gamma))
        .collect()
}

/// `max/min` of a positive sequence (1 for constant sequences).
pub fn variation_factor(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::CurvatureProfile;
    use crate::geometry::build_model;

    #[test]
    fn hessian_cutoff_shape() {
        let m = build_model(3, CurvatureProfile::Flat, 100.0, 1e-8).unwrap();
        let r = 10.0;
        let chi = make_hessian_cutoff(&m, r).unwrap();
        assert_eq!(chi.value(r / 2.0), 1.0);
        assert_eq!(chi.value(3.0 * r), 0.0);
        assert_eq!(chi.d2(r), 0.0);
        assert_eq!(chi.d2(2.0 * r), 0.0);
        let c = certify_cutoff(&m, &chi, r, 0.0).unwrap();
        assert!((c.sup_grad - 1.875 / r).abs() < 1e-12);
        let sup2 = annulus_samples(r, 2.0 * r).map(|t| chi.d2(t).abs()).fold(0.0, f64::max);
        assert!((sup2 * r * r - 10.0 / 3f64.sqrt()).abs() < 1e-5);
        // flat: the tangential eigenvalue χ'/t dominates the oracle as well
        let direct = annulus_samples(r, 2.0 * r)
            .map(|t| (chi.d2(t).powi(2) + 2.0 * (chi.d1(t) / t).powi(2)).sqrt())
            .fold(0.0, f64::max);
        assert!((c.sup_second - direct).abs() < 1e-8 * direct);
        assert!(make_hessian_cutoff(&m, 60.0).is_err());
    }

    #[test]
    fn hyperbolic_scaling() {
        let m = build_model(3, CurvatureProfile::PowerLaw { a: 1.0, alpha: 0.0 }, 2048.0, 1e-8).unwrap();
        let radii: Vec<f64> = (4..=10).map(|k| 2f64.powi(k)).collect();
        let certs = hessian_sweep(&m, &radii, 0.0).unwrap();
        let g: Vec<f64> = certs.iter().map(|c| c.grad_certificate).collect();
        let h: Vec<f64> = certs.iter().map(|c| c.second_certificate).collect();
        assert!(variation_factor(&g) < 1.0 + 1e-9);
        assert!(variation_factor(&h) < 2.0);
    }

    #[test]
    fn laplacian_cutoff_linear_lambda() {
        let a = 1.0;
        let m = build_model(3, CurvatureProfile::IteratedLog { a, k: 0, t_onset: 1.0 }, 300.0, 1e-8).unwrap();
        let lambda = Lambda::IteratedLog { a, k: 0 };
        assert!((lambda.inverse_integral(10.0, 20.0).unwrap() - 2f64.ln() / a).abs() < 1e-15);
        let chi = make_laplacian_cutoff(&m, 10.0, 2.0).unwrap();
        assert_eq!(chi.value(10.0), 1.0);
        assert!(chi.value(20.0).abs() < 1e-15);
        let radii = [8.0, 16.0, 32.0, 64.0, 128.0];
        let certs = laplacian_sweep(&m, lambda, &radii, 2.0).unwrap();
        let s: Vec<f64> = certs.iter().map(|c| c.second_certificate).collect();
        let g: Vec<f64> = certs.iter().map(|c| c.grad_certificate).collect();
        assert!(variation_factor(&s) < 2.0, "{s:?}");
        assert!(variation_factor(&g) < 2.0, "{g:?}");
    }

    #[test]
    fn laplacian_span_floor() {
        let m = build_model(3, CurvatureProfile::Flat, 100.0, 1e-8).unwrap();
        let strong = Lambda::Power { a: 1e9, exponent: 1.0 };
        assert!(matches!(
            make_laplacian_cutoff_with(&m, strong, 10.0, 2.0),
            Err(Error::Configuration(_))
        ));
        assert!(make_laplacian_cutoff(&m, 10.0, 2.0).is_err());
    }
}

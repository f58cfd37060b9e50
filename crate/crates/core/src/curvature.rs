//! Radial curvature laws `κ(t) ≥ 0` for the Jacobi equation `j'' = κ j`.
//!
//! The radial Ricci curvature of the model is `-(n-1) κ(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{range_error, Error, Result};

/// Quintic smoothstep `6x⁵ - 15x⁴ + 10x³`, clamped to `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    }
}

pub fn smoothstep_d1(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        30.0 * x * x * (x - 1.0) * (x - 1.0)
    }
}

pub fn smoothstep_d2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        60.0 * x * (2.0 * x * x - 3.0 * x + 1.0)
    }
}

/// The prescribed curvature law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureProfile {
    /// `κ(t) = a² t^α`.
    PowerLaw { a: f64, alpha: f64 },
    /// `κ = λ²` with `λ(t) = a t Π_{j=1..k} log^[j](t)` beyond `t_onset`,
    /// blended to a constant below it.
    IteratedLog { a: f64, k: u32, t_onset: f64 },
    Flat,
    /// Piecewise-linear table of `(t, κ)` pairs.
    Tabulated { t: Vec<f64>, kappa: Vec<f64> },
}

/// `[log(t), log(log(t)), ...]` up to depth `k`, or `None` once an argument
/// becomes non-positive.
pub fn iterated_logs(t: f64, k: u32) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(k as usize);
    let mut arg = t;
    for _ in 0..k {
        if !(arg > 0.0) {
            return None;
        }
        arg = arg.ln();
        out.push(arg);
    }
    Some(out)
}

/// `exp` applied `k` times to 1: the point where `log^[k]` reaches 1.
fn iterated_exp_one(k: u32) -> f64 {
    let mut v = 1.0_f64;
    for _ in 0..k {
        v = v.exp();
    }
    v
}

fn lambda_unchecked(a: f64, k: u32, t: f64) -> Option<f64> {
    let logs = iterated_logs(t, k)?;
    Some(a * t * logs.iter().product::<f64>())
}

/// `λ(t) = a·t·Π_{j=1..k} log^[j](t)`.
///
/// Defined where every iterated logarithm is at least 1 (for `k = 0`, any
/// `t > 0`).
pub fn lambda_profile(a: f64, k: u32, t: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("lambda requires a > 0, got {a}")));
    }
    if k == 0 {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("lambda requires t > 0, got {t}")));
        }
        return Ok(a * t);
    }
    match iterated_logs(t, k) {
        Some(logs) if logs.iter().all(|&l| l >= 1.0 - 1e-12) => Ok(a * t * logs.iter().product::<f64>()),
        _ => Err(Error::Domain(format!(
            "t = {t} below the onset of the depth-{k} iterated logarithm ({})",
            iterated_exp_one(k)
        ))),
    }
}

/// Scale functions `λ` used by the Laplacian cutoffs and the gradient ratio
/// probe; both shapes admit a closed-form `∫ ds/λ(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lambda {
    IteratedLog { a: f64, k: u32 },
    Power { a: f64, exponent: f64 },
}

impl Lambda {
    pub fn value(&self, t: f64) -> Result<f64> {
        match *self {
            Lambda::IteratedLog { a, k } => lambda_profile(a, k, t),
            Lambda::Power { a, exponent } => {
                if !(t > 0.0) {
                    return Err(Error::Domain(format!("lambda requires t > 0, got {t}")));
                }
                Ok(a * t.powf(exponent))
            }
        }
    }

    /// `λ'(t)/λ(t)`.
    pub fn log_derivative(&self, t: f64) -> Result<f64> {
        self.value(t)?;
        match *self {
            Lambda::IteratedLog { k, .. } => {
                let logs = iterated_logs(t, k).expect("checked by value()");
                let mut acc = 1.0 / t;
                let mut prefix = t;
                for l in &logs {
                    // (log^[j])' = 1 / (t · Π_{i<j} log^[i])
                    acc += 1.0 / (prefix * l);
                    prefix *= l;
                }
                Ok(acc)
            }
            Lambda::Power { exponent, .. } => Ok(exponent / t),
        }
    }

    /// `∫_{t0}^{t1} ds / λ(s)`.
    pub fn inverse_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        self.value(t0)?;
        self.value(t1)?;
        match *self {
            Lambda::IteratedLog { a, k } => {
                // d/dt log^[k+1](t) = 1 / (t Π_{j=1..k} log^[j] t)
                let top = |t: f64| -> f64 {
                    let logs = iterated_logs(t, k + 1).expect("domain checked");
                    *logs.last().unwrap()
                };
                Ok((top(t1) - top(t0)) / a)
            }
            Lambda::Power { a, exponent } => {
                if (exponent - 1.0).abs() < 1e-14 {
                    Ok((t1 / t0).ln() / a)
                } else {
                    let e = 1.0 - exponent;
                    Ok((t1.powf(e) - t0.powf(e)) / (a * e))
                }
            }
        }
    }
}

impl CurvatureProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            CurvatureProfile::PowerLaw { a, alpha } => {
                if !(*a >= 0.0) || !a.is_finite() {
                    return Err(Error::Configuration(format!("power law needs a >= 0, got {a}")));
                }
                if !(*alpha >= 0.0) || !alpha.is_finite() {
                    return Err(Error::Configuration(format!("power law needs alpha >= 0, got {alpha}")));
                }
            }
            CurvatureProfile::IteratedLog { a, k, t_onset } => {
                if !(*a > 0.0) {
                    return Err(Error::Configuration(format!("iterated log needs a > 0, got {a}")));
                }
                if *k > 0 {
                    let need = iterated_exp_one(*k);
                    let half_ok = iterated_logs(0.5 * t_onset, *k)
                        .map(|l| l.iter().all(|&x| x > 0.0))
                        .unwrap_or(false);
                    if *t_onset < need || !half_ok {
                        return Err(Error::Configuration(format!(
                            "iterated log of depth {k} needs t_onset >= {need} with log^[{k}](t_onset/2) > 0, got {t_onset}"
                        )));
                    }
                } else if !(*t_onset >= 0.0) {
                    return Err(Error::Configuration(format!("t_onset must be >= 0, got {t_onset}")));
                }
            }
            CurvatureProfile::Flat => {}
            CurvatureProfile::Tabulated { t, kappa } => {
                if t.len() < 2 || t.len() != kappa.len() {
                    return Err(Error::Configuration(
                        "tabulated profile needs matching t/kappa arrays of length >= 2".into(),
                    ));
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Configuration("tabulated abscissae must increase strictly".into()));
                }
                if kappa.iter().any(|&k| !(k >= 0.0) || !k.is_finite()) {
                    return Err(Error::Configuration("tabulated curvature must be finite and >= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Coefficient `κ(t)` of the Jacobi equation.
    pub fn kappa(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("curvature queried at t = {t} < 0")));
        }
        match self {
            CurvatureProfile::PowerLaw { a, alpha } => Ok(if *alpha == 0.0 {
                a * a
            } else {
                a * a * t.powf(*alpha)
            }),
            CurvatureProfile::IteratedLog { a, k, t_onset } => {
                let sq = |s: f64| -> f64 {
                    let l = lambda_unchecked(*a, *k, s).expect("validated onset");
                    l * l
                };
                if t >= *t_onset {
                    return Ok(sq(t));
                }
                let half = 0.5 * t_onset;
                let base = sq(half);
                if t <= half {
                    return Ok(base);
                }
                let u = (t - half) / half;
                Ok(base + smoothstep(u) * (sq(t) - base))
            }
            CurvatureProfile::Flat => Ok(0.0),
            CurvatureProfile::Tabulated { t: ts, kappa } => {
                let lo = ts[0];
                let hi = *ts.last().unwrap();
                if t < lo || t > hi {
                    return Err(range_error("tabulated curvature", t, lo, hi));
                }
                let i = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                let (t0, t1) = (ts[i - 1], ts[i]);
                let s = (t - t0) / (t1 - t0);
                Ok(kappa[i - 1] + s * (kappa[i] - kappa[i - 1]))
            }
        }
    }

    /// Largest `γ` with `κ(t) ≳ t^γ` at infinity, used to bound admissible
    /// weight exponents.
    pub fn growth_exponent(&self) -> f64 {
        match self {
            CurvatureProfile::PowerLaw { a, alpha } => {
                if *a > 0.0 {
                    *alpha
                } else {
                    0.0
                }
            }
            CurvatureProfile::IteratedLog { .. } => 2.0,
            CurvatureProfile::Flat => 0.0,
            CurvatureProfile::Tabulated { t, kappa } => {
                let t_last = *t.last().unwrap();
                let pts: Vec<(f64, f64)> = t
                    .iter()
                    .zip(kappa)
                    .filter(|(&s, &k)| s >= t_last / 10.0 && s > 0.0 && k > 0.0)
                    .map(|(&s, &k)| (s.ln(), k.ln()))
                    .collect();
                if pts.len() < 2 {
                    return 0.0;
                }
                crate::fit::linear_fit(&pts).map(|(_, slope)| slope.max(0.0)).unwrap_or(0.0)
            }
        }
    }

    /// The scale function `λ ≈ √κ` used for Laplacian cutoffs, when the
    /// profile has one in closed form.
    pub fn lambda(&self) -> Option<Lambda> {
        match *self {
            CurvatureProfile::PowerLaw { a, alpha } if a > 0.0 && alpha > 0.0 => Some(Lambda::Power {
                a,
                exponent: 0.5 * alpha,
            }),
            CurvatureProfile::IteratedLog { a, k, .. } => Some(Lambda::IteratedLog { a, k }),
            _ => None,
        }
    }
}

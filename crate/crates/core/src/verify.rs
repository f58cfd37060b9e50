//! Numerical verification of the Hardy, Rellich-type, weight-embedding and
//! Calderón-Zygmund inequalities on a model manifold, plus the cutoff
//! density probe.
//!
//! All integrals are taken in log scale. A record keeps `lhs` and `rhs`
//! divided by `e^{log_scale}` so that huge volumes stay representable.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::smoothstep;
use crate::cutoff::{make_hessian_cutoff, SMOOTHSTEP_SUP_D1};
use crate::error::{Error, Result};
use crate::geometry::ModelManifold;
use crate::green::GreenFunction;
use crate::quad::{LogValue, QuadOptions, QuadResult};
use crate::radial::{hessian_norm, integrate_radial, laplacian, log_add, Jet, RadialFunction};

/// Largest `|log|` kept without rescaling a record.
const PLAIN_LOG_LIMIT: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    ReportOnly,
}

/// One tested function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `lhs` and `rhs` are stored divided by `e^{log_scale}`.
    pub log_scale: f64,
}

impl Record {
    /// Builds a record from `ln lhs` and `ln rhs` (either may be `-∞`).
    pub fn from_logs(label: impl Into<String>, log_lhs: f64, log_rhs: f64) -> Record {
        let ratio = if log_lhs == f64::NEG_INFINITY {
            0.0
        } else if log_rhs == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            (log_lhs - log_rhs).exp()
        };
        let top = log_lhs.max(log_rhs);
        let log_scale = if top.is_finite() && top.abs() > PLAIN_LOG_LIMIT { top } else { 0.0 };
        Record {
            label: label.into(),
            lhs: (log_lhs - log_scale).exp(),
            rhs: (log_rhs - log_scale).exp(),
            ratio,
            log_scale,
        }
    }

    pub fn plain(label: impl Into<String>, lhs: f64, rhs: f64) -> Record {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Record {
            label: label.into(),
            lhs,
            rhs,
            ratio,
            log_scale: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub p: Option<f64>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    /// Sorted by label.
    pub records: Vec<Record>,
    pub sharp_constant: Option<f64>,
    /// Largest ratio over the records.
    pub empirical_constant: f64,
    pub verdict: Verdict,
    /// Relative accuracy claimed for each ratio.
    pub quadrature_tol: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl InequalityReport {
    /// Sorts the records, reduces the empirical constant and sets the verdict
    /// from the sharp constant (report-only without one).
    pub fn new(name: &str, mut records: Vec<Record>, sharp_constant: Option<f64>, quadrature_tol: f64) -> Self {
        records.sort_by(|a, b| a.label.cmp(&b.label));
        let empirical_constant = records.iter().fold(0.0_f64, |m, r| m.max(r.ratio));
        let verdict = match sharp_constant {
            Some(c) if records.iter().any(|r| !(r.ratio <= c * (1.0 + 10.0 * quadrature_tol))) => Verdict::Violated,
            Some(_) => Verdict::Holds,
            None => Verdict::ReportOnly,
        };
        InequalityReport {
            name: name.to_string(),
            p: None,
            beta: None,
            epsilon: None,
            records,
            sharp_constant,
            empirical_constant,
            verdict,
            quadrature_tol,
            diagnostics: BTreeMap::new(),
        }
    }

    fn with_params(mut self, p: Option<f64>, beta: Option<f64>, epsilon: Option<f64>) -> Self {
        self.p = p;
        self.beta = beta;
        self.epsilon = epsilon;
        self
    }

    /// The record with the largest ratio.
    pub fn worst(&self) -> Option<&Record> {
        self.records.iter().fold(None, |best: Option<&Record>, r| match best {
            Some(b) if b.ratio >= r.ratio => Some(b),
            _ => Some(r),
        })
    }

    pub fn find(&self, label: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.label == label)
    }
}

/// Relative change of the empirical constant between a corpus and its
/// enrichment.
pub fn enrichment_change(base: &InequalityReport, enriched: &InequalityReport) -> f64 {
    let (a, b) = (base.empirical_constant, enriched.empirical_constant);
    if a == b {
        return 0.0;
    }
    (b - a).abs() / a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub quad: QuadOptions,
    /// Relative accuracy claimed for ratios; sharp verdicts allow
    /// `10 · tolerance` slack.
    pub tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quad: QuadOptions::default(),
            tolerance: 1e-7,
        }
    }
}

/// `(p/(p-1))^p`.
pub fn hardy_constant(p: f64) -> f64 {
    (p / (p - 1.0)).powf(p)
}

fn log_of(v: &LogValue) -> f64 {
    if v.is_zero() {
        f64::NEG_INFINITY
    } else {
        v.log_abs
    }
}

fn ln_abs(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.abs().ln()
    }
}

fn ln_jet_abs(j: &Jet, x: f64) -> f64 {
    ln_abs(x) + j.log_scale
}

/// Integrates `m` log integrands over the support of `f`.
fn integrate_signed<F>(model: &ModelManifold, f: &RadialFunction, m: usize, opts: &VerifyOptions, g: F) -> Result<Vec<LogValue>>
where
    F: Fn(&crate::radial::Point, &Jet, &mut [LogValue]),
{
    if f.is_empty() {
        return Ok(vec![LogValue::ZERO; m]);
    }
    let r: QuadResult = integrate_radial(model, f.support.0, f.support.1, &f.breaks, m, &opts.quad, |pt, out| {
        let j = f.jet(pt.t);
        g(pt, &j, out)
    })?;
    Ok(r.values)
}

/// As [`integrate_signed`] for positive integrands, returning logs.
fn integrate_member<F>(model: &ModelManifold, f: &RadialFunction, m: usize, opts: &VerifyOptions, g: F) -> Result<Vec<f64>>
where
    F: Fn(&crate::radial::Point, &Jet, &mut [LogValue]),
{
    Ok(integrate_signed(model, f, m, opts, g)?.iter().map(log_of).collect())
}

fn check_window(f: &RadialFunction, lo: f64, hi: f64) -> Result<()> {
    if f.is_empty() {
        return Ok(());
    }
    let slack = 1e-9 * hi.max(1.0);
    if f.support.0 < lo - slack || f.support.1 > hi + slack {
        return Err(Error::Precondition {
            label: f.label.clone(),
            reason: format!(
                "support [{}, {}] not inside [{lo}, {hi}]",
                f.support.0, f.support.1
            ),
        });
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent p must exceed 1, got {p}")));
    }
    Ok(())
}

fn check_hardy_inputs(model: &ModelManifold, green: &GreenFunction, p: f64, beta: f64, corpus: &[RadialFunction]) -> Result<()> {
    check_p(p)?;
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("beta must be non-negative, got {beta}")));
    }
    if (green.p - p).abs() > 1e-12 || green.n != model.n {
        return Err(Error::Configuration(format!(
            "Green function built for p = {}, n = {} used with p = {p}, n = {}",
            green.p, green.n, model.n
        )));
    }
    corpus
        .iter()
        .try_for_each(|f| check_window(f, green.r_k, 0.9 * model.t_max))
}

/// Log-Hardy inequality with weight `(1/z)^p (-log G)^{βp}` against
/// `(-log G)^{βp} |f'|^p`, with the sharp constant `(p/(p-1))^p`.
pub fn verify_hardy(
    model: &ModelManifold,
    green: &GreenFunction,
    p: f64,
    beta: f64,
    corpus: &[RadialFunction],
    opts: &VerifyOptions,
) -> Result<InequalityReport> {
    check_hardy_inputs(model, green, p, beta, corpus)?;
    let records: Vec<Record> = corpus
        .par_iter()
        .map(|f| {
            let v = integrate_member(model, f, 2, opts, |pt, j, out| {
                let Ok(g) = green.state(model, pt.t) else {
                    out.fill(LogValue::ZERO);
                    return;
                };
                let w = if beta > 0.0 { beta * p * (-g.log_g).ln() } else { 0.0 };
                out[0] = LogValue::positive(-p * g.z.ln() + w + p * ln_jet_abs(j, j.v) + pt.log_dv);
                out[1] = LogValue::positive(w + p * ln_jet_abs(j, j.d1) + pt.log_dv);
            })?;
            Ok(Record::from_logs(f.label.clone(), v[0], v[1]))
        })
        .collect::<Result<_>>()?;
    Ok(InequalityReport::new("hardy", records, Some(hardy_constant(p)), opts.tolerance).with_params(Some(p), Some(beta), None))
}

/// Second-order Hardy inequality: the Hardy left side against
/// `∫|∇²f|^p`. Report-only; the diagnostics check the chain
/// `lhs ≤ B·M₁ ≤ B·C·M₂ ≤ B²·C·rhs` with `B = (p/(p-1))^p`,
/// `M₁ = ∫(-log G)^{βp}|f'|^p`, `M₂ = ∫|∇log G|^p |f'|^p` and
/// `C = sup ((-log G)^β z)^p` over the corpus window.
pub fn verify_hardy2(
    model: &ModelManifold,
    green: &GreenFunction,
    p: f64,
    beta: f64,
    corpus: &[RadialFunction],
    opts: &VerifyOptions,
) -> Result<InequalityReport> {
    check_hardy_inputs(model, green, p, beta, corpus)?;
    let b = hardy_constant(p);
    let hi = 0.9 * model.t_max;
    let log_c = green
        .grid
        .iter()
        .zip(green.z.iter().zip(&green.log_g))
        .filter(|(&t, _)| t >= green.r_k && t <= hi)
        .map(|(_, (&z, &lg))| p * (beta * (-lg).ln() + z.ln()))
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = (1.0 + 10.0 * opts.tolerance).ln();
    let rows: Vec<(Record, bool)> = corpus
        .par_iter()
        .map(|f| {
            let n = model.n;
            let v = integrate_member(model, f, 4, opts, |pt, j, out| {
                let Ok(g) = green.state(model, pt.t) else {
                    out.fill(LogValue::ZERO);
                    return;
                };
                let w = if beta > 0.0 { beta * p * (-g.log_g).ln() } else { 0.0 };
                let lz = g.z.ln();
                let ld1 = p * ln_jet_abs(j, j.d1) + pt.log_dv;
                out[0] = LogValue::positive(-p * lz + w + p * ln_jet_abs(j, j.v) + pt.log_dv);
                out[1] = LogValue::positive(p * ln_jet_abs(j, hessian_norm(j, pt.state.w, n)) + pt.log_dv);
                out[2] = LogValue::positive(w + ld1);
                out[3] = LogValue::positive(-p * lz + ld1);
            })?;
            let (lhs, rhs, m1, m2) = (v[0], v[1], v[2], v[3]);
            let le = |a: f64, b: f64| a == f64::NEG_INFINITY || a <= b + slack;
            let ok = le(lhs, b.ln() + m1) && le(m1, log_c + m2) && le(m2, b.ln() + rhs);
            Ok((Record::from_logs(f.label.clone(), lhs, rhs), ok))
        })
        .collect::<Result<_>>()?;
    let violations = rows.iter().filter(|(_, ok)| !ok).count();
    let mut rep = InequalityReport::new("hardy2", rows.into_iter().map(|(r, _)| r).collect(), None, opts.tolerance)
        .with_params(Some(p), Some(beta), None);
    rep.diagnostics.insert("chain_constant".into(), log_c.exp());
    rep.diagnostics.insert("chain_violations".into(), violations as f64);
    Ok(rep)
}

/// Reports of the weight-embedding check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// `‖ωf‖_p / ‖f‖_{W^{2,p}}` with `ω ~ t^α`.
    pub second_order: InequalityReport,
    /// `‖ω₁f‖_p / ‖f‖_{W^{1,p}}` with `ω₁ ~ t^{α/2}`.
    pub first_order: InequalityReport,
    /// `‖ω_R f‖_p` over the radius sweep, relative to the first radius.
    pub sweep: InequalityReport,
}

/// `ln(t^a S((t - r)/r))`, or `ln t^a` for `r = 0`.
fn ln_weight(t: f64, a: f64, r: f64) -> f64 {
    let s = if r > 0.0 { smoothstep((t - r) / r) } else { 1.0 };
    a * t.ln() + ln_abs(s)
}

/// Weighted embedding of `W^{2,p}` (and `W^{1,p}`) into a polynomially
/// weighted `L^p`, with a tail sweep `ω_R = t^α S((t-R)/R)` applied to
/// [`density_surrogate`] (a compact bump's norm is dominated by its outer
/// edge, so its sweep is flat to machine precision).
pub fn verify_weight_embedding(
    model: &ModelManifold,
    corpus: &[RadialFunction],
    p: f64,
    alpha: f64,
    inner_radius: f64,
    sweep_radii: &[f64],
    opts: &VerifyOptions,
) -> Result<EmbeddingReport> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("exponent p must be at least 1, got {p}")));
    }
    let window = model.profile.growth_exponent();
    if !(alpha >= 0.0) || alpha > window + 1e-12 {
        return Err(Error::Configuration(format!(
            "weight exponent {alpha} outside the profile's growth window [0, {window}]"
        )));
    }
    if !(inner_radius >= 0.0) {
        return Err(Error::Domain(format!("inner radius must be non-negative, got {inner_radius}")));
    }
    corpus.iter().try_for_each(|f| f.check_support(model))?;
    let n = model.n;
    let rows: Vec<(Record, Record)> = corpus
        .par_iter()
        .map(|f| {
            let v = integrate_member(model, f, 5, opts, |pt, j, out| {
                let lv = ln_jet_abs(j, j.v);
                out[0] = LogValue::positive(p * (ln_weight(pt.t, alpha, inner_radius) + lv) + pt.log_dv);
                out[1] = LogValue::positive(p * (ln_weight(pt.t, 0.5 * alpha, inner_radius) + lv) + pt.log_dv);
                out[2] = LogValue::positive(p * lv + pt.log_dv);
                out[3] = LogValue::positive(p * ln_jet_abs(j, j.d1) + pt.log_dv);
                out[4] = LogValue::positive(p * ln_jet_abs(j, hessian_norm(j, pt.state.w, n)) + pt.log_dv);
            })?;
            let v: Vec<f64> = v.iter().map(|x| x / p).collect();
            let w1 = log_add(v[2], v[3]);
            let w2 = log_add(w1, v[4]);
            Ok((
                Record::from_logs(f.label.clone(), v[0], w2),
                Record::from_logs(f.label.clone(), v[1], w1),
            ))
        })
        .collect::<Result<_>>()?;
    let (second, first): (Vec<Record>, Vec<Record>) = rows.into_iter().unzip();
    let second_order = InequalityReport::new("embed", second, None, opts.tolerance).with_params(Some(p), Some(alpha), None);
    let first_order =
        InequalityReport::new("embed_first_order", first, None, opts.tolerance).with_params(Some(p), Some(0.5 * alpha), None);

    let tail = density_surrogate(model, p, 6.0)?;
    let sweep = weight_tail_sweep(model, Some(&tail), p, alpha, sweep_radii, opts)?;
    Ok(EmbeddingReport {
        second_order,
        first_order,
        sweep,
    })
}

/// Radii `1, 2, 4, ...` up to the first one past `0.9 t_max`.
pub fn doubling_radii(model: &ModelManifold) -> Vec<f64> {
    let mut r = vec![1.0];
    while *r.last().unwrap() < 0.9 * model.t_max {
        r.push(2.0 * r.last().unwrap());
    }
    r
}

/// `‖ω_R f‖_p` for each `R`; holds when the values decrease strictly until
/// they vanish and the last one is below `1e-3` of the first.
pub fn weight_tail_sweep(
    model: &ModelManifold,
    f: Option<&RadialFunction>,
    p: f64,
    alpha: f64,
    radii: &[f64],
    opts: &VerifyOptions,
) -> Result<InequalityReport> {
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("sweep radii must be positive and increasing".into()));
    }
    let logs: Vec<f64> = match f {
        None => vec![f64::NEG_INFINITY; radii.len()],
        Some(f) => radii
            .par_iter()
            .map(|&r| {
                let v = integrate_member(model, f, 1, opts, |pt, j, out| {
                    out[0] = LogValue::positive(p * (ln_weight(pt.t, alpha, r) + ln_jet_abs(j, j.v)) + pt.log_dv);
                })?;
                Ok(v[0] / p)
            })
            .collect::<Result<_>>()?,
    };
    let base = logs.first().copied().unwrap_or(f64::NEG_INFINITY);
    let records: Vec<Record> = radii
        .iter()
        .zip(&logs)
        .enumerate()
        .map(|(i, (r, &l))| Record::from_logs(format!("R{i:02}={r}"), l, base))
        .collect();
    let holds = decays(&logs);
    let mut rep = InequalityReport::new("embed_sweep", records, None, opts.tolerance).with_params(Some(p), Some(alpha), None);
    rep.verdict = if holds { Verdict::Holds } else { Verdict::Violated };
    Ok(rep)
}

/// Strict decrease until the values vanish, ending below `1e-3` of the
/// first value (log inputs; all-zero counts as decaying).
fn decays(logs: &[f64]) -> bool {
    let Some(&first) = logs.first() else {
        return true;
    };
    if first == f64::NEG_INFINITY {
        return logs.iter().all(|&l| l == f64::NEG_INFINITY);
    }
    let strict = logs
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] == f64::NEG_INFINITY && w[1] == f64::NEG_INFINITY));
    strict && *logs.last().unwrap() < first + 1e-3_f64.ln()
}

/// Minimal `A₁` for a declared `A₂` at one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedFit {
    pub epsilon: f64,
    pub a2: f64,
    pub a1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cz2Report {
    /// `‖∇²φ‖₂ / (‖Δφ‖₂ + ‖φ‖₂)`.
    pub cz2: InequalityReport,
    /// `|∫(Δφ)² - ∫|∇²φ|² + (n-1)∫κφ'²|` relative to the sum of the terms.
    pub bochner: InequalityReport,
    pub weighted: Vec<WeightedFit>,
    /// `(A₂, sup_ε A₁)` for each declared `A₂`.
    pub pareto: Vec<(f64, f64)>,
}

/// Bochner residual threshold for the identity check.
pub const BOCHNER_TOL: f64 = 1e-6;

/// The `L²` Calderón-Zygmund ratio, the Bochner identity and the weighted
/// variant `‖∇²φ‖² ≤ A₁²(‖Δφ‖+‖φ‖)² + A₂ε²‖t^β φ‖²`.
pub fn verify_cz2(
    model: &ModelManifold,
    corpus: &[RadialFunction],
    weight_beta: f64,
    epsilons: &[f64],
    a2_grid: &[f64],
    opts: &VerifyOptions,
) -> Result<Cz2Report> {
    corpus.iter().try_for_each(|f| f.check_support(model))?;
    if epsilons.iter().chain(a2_grid).any(|x| !(*x >= 0.0)) {
        return Err(Error::Domain("epsilon and A2 values must be non-negative".into()));
    }
    let n = model.n;
    let nm1 = n as f64 - 1.0;
    // logs of ∫|∇²φ|², ∫(Δφ)², ∫φ², ∫κφ'², ∫t^{2β}φ²
    let sums: Vec<([f64; 5], f64)> = corpus
        .par_iter()
        .map(|f| {
            let v = integrate_signed(model, f, 5, opts, |pt, j, out| {
                let w = pt.state.w;
                let kappa = model.profile.kappa(pt.t).unwrap_or(f64::NAN);
                let lv = ln_jet_abs(j, j.v);
                out[0] = LogValue::positive(2.0 * ln_jet_abs(j, hessian_norm(j, w, n)) + pt.log_dv);
                out[1] = LogValue::positive(2.0 * ln_jet_abs(j, laplacian(j, w, n)) + pt.log_dv);
                out[2] = LogValue::positive(2.0 * lv + pt.log_dv);
                out[3] = LogValue::new(kappa.signum(), ln_abs(kappa) + 2.0 * ln_jet_abs(j, j.d1) + pt.log_dv);
                out[4] = LogValue::positive(2.0 * (weight_beta * pt.t.ln() + lv) + pt.log_dv);
            })?;
            Ok(([log_of(&v[0]), log_of(&v[1]), log_of(&v[2]), log_of(&v[3]), log_of(&v[4])], v[3].sign))
        })
        .collect::<Result<_>>()?;

    let mut cz = Vec::with_capacity(corpus.len());
    let mut bo = Vec::with_capacity(corpus.len());
    for (f, (s, kappa_sign)) in corpus.iter().zip(&sums) {
        let (h, l, v) = (0.5 * s[0], 0.5 * s[1], 0.5 * s[2]);
        cz.push(Record::from_logs(f.label.clone(), h, log_add(l, v)));
        // signed combination relative to the largest term
        let kterm = s[3] + nm1.ln();
        let top = s[0].max(s[1]).max(kterm);
        if top == f64::NEG_INFINITY {
            bo.push(Record::plain(f.label.clone(), 0.0, 0.0));
            continue;
        }
        let e = |x: f64| (x - top).exp();
        let resid = e(s[1]) - e(s[0]) + kappa_sign * e(kterm);
        let scale = e(s[1]) + e(s[0]) + e(kterm);
        bo.push(Record::plain(f.label.clone(), resid.abs(), scale));
    }
    let cz2 = InequalityReport::new("cz2", cz, None, opts.tolerance).with_params(Some(2.0), None, None);
    let mut bochner = InequalityReport::new("bochner", bo, Some(BOCHNER_TOL), 0.0).with_params(Some(2.0), None, None);
    bochner.diagnostics.insert("max_residual".into(), bochner.empirical_constant);

    let mut weighted = Vec::new();
    for &a2 in a2_grid {
        for &eps in epsilons {
            let mut a1sq: f64 = 0.0;
            for (s, _) in &sums {
                let lv = log_add(0.5 * s[1], 0.5 * s[2]);
                if lv == f64::NEG_INFINITY {
                    continue;
                }
                let h = (s[0] - 2.0 * lv).exp();
                let wv = if a2 * eps > 0.0 { a2 * eps * eps * (s[4] - 2.0 * lv).exp() } else { 0.0 };
                a1sq = a1sq.max(h - wv);
            }
            weighted.push(WeightedFit {
                epsilon: eps,
                a2,
                a1: a1sq.max(0.0).sqrt(),
            });
        }
    }
    let pareto = a2_grid
        .iter()
        .map(|&a2| {
            let a1 = weighted.iter().filter(|w| w.a2 == a2).fold(0.0_f64, |m, w| m.max(w.a1));
            (a2, a1)
        })
        .collect();
    Ok(Cz2Report {
        cz2,
        bochner,
        weighted,
        pareto,
    })
}

/// `S(t-1) · t^{-m} · j^{-(n-1)/p} · S((end-t)/ramp)`: a function whose
/// `W^{2,p}` norms converge through a polynomial tail, ending smoothly on
/// `[0.8 t_max, 0.9 t_max]`.
pub fn density_surrogate(model: &ModelManifold, p: f64, m: f64) -> Result<RadialFunction> {
    let end = 0.9 * model.t_max;
    let ramp = 0.1 * model.t_max;
    if !(end - ramp > 2.0) {
        return Err(Error::Configuration(format!(
            "model too short for the density surrogate (t_max = {})",
            model.t_max
        )));
    }
    let c = (model.n as f64 - 1.0) / p;
    let mdl = model.clone();
    Ok(RadialFunction::new(
        format!("surrogate[m={m},p={p}]"),
        (1.0, end),
        vec![2.0, end - ramp],
        move |t| {
            let Ok(st) = mdl.state(t) else {
                return Jet::ZERO;
            };
            let tail = Jet::plain(1.0, -m / t, m * (m + 1.0) / (t * t));
            let warp = Jet {
                log_scale: -c * st.logj - m * t.ln(),
                v: 1.0,
                d1: -c * st.w,
                d2: c * c * st.w * st.w - c * st.dw,
            };
            Jet::ramp_up(t, 1.0, 1.0)
                .mul(&Jet::ramp_down(t, end, ramp))
                .mul(&tail)
                .mul(&warp)
        },
    ))
}

/// The three remainder columns of `χ_R f → f` for Hessian cutoffs at each
/// radius: the value, gradient and Hessian parts. Holds when every column
/// decreases strictly and ends below `1e-3` of its first value.
pub fn density_probe(
    model: &ModelManifold,
    f: &RadialFunction,
    p: f64,
    radii: &[f64],
    opts: &VerifyOptions,
) -> Result<InequalityReport> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("exponent p must be at least 1, got {p}")));
    }
    f.check_support(model)?;
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("probe radii must be positive and increasing".into()));
    }
    for &r in radii {
        model.check_range(2.0 * r)?;
    }
    let n = model.n;
    // per radius: logs of the six norms and the Hölder check
    let rows: Vec<([f64; 3], bool)> = radii
        .par_iter()
        .map(|&r| {
            let chi = make_hessian_cutoff(model, r)?;
            let lo = r.max(f.support.0);
            let hi = f.support.1;
            if f.is_empty() || !(hi > lo) {
                return Ok(([f64::NEG_INFINITY; 3], true));
            }
            let mut breaks = f.breaks.clone();
            breaks.push(2.0 * r);
            let q = integrate_radial(model, lo, hi, &breaks, 7, &opts.quad, |pt, out| {
                let j = f.jet(pt.t);
                let c = chi.jet(pt.t);
                let w = pt.state.w;
                let om = c.v - 1.0;
                let lp = |x: f64| LogValue::positive(p * x + pt.log_dv);
                out[0] = lp(ln_jet_abs(&j, j.v) + ln_abs(om));
                out[1] = lp(ln_jet_abs(&j, j.v) + ln_abs(c.d1));
                out[2] = lp(ln_jet_abs(&j, j.d1) + ln_abs(om));
                out[3] = lp(ln_jet_abs(&j, j.d1) + ln_abs(c.d1));
                out[4] = lp(ln_jet_abs(&j, hessian_norm(&j, w, n)) + ln_abs(om));
                out[5] = lp(ln_jet_abs(&j, j.v) + ln_abs(hessian_norm(&c, w, n)));
                out[6] = if pt.t <= 2.0 * r { lp(ln_jet_abs(&j, j.v)) } else { LogValue::ZERO };
            })?;
            let v: Vec<f64> = q.values.iter().map(|x| log_of(x) / p).collect();
            let c1 = v[0];
            let c2 = log_add(v[1], v[2]);
            let c3 = log_add(log_add(2f64.ln() + v[3], v[4]), v[5]);
            let slack = (1.0 + 10.0 * opts.tolerance).ln();
            let holder = v[1] == f64::NEG_INFINITY || v[1] <= (SMOOTHSTEP_SUP_D1 / r).ln() + v[6] + slack;
            Ok(([c1, c2, c3], holder))
        })
        .collect::<Result<_>>()?;
    let names = ["value", "gradient", "hessian"];
    let mut records = Vec::new();
    let mut holds = true;
    for (k, name) in names.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|(c, _)| c[k]).collect();
        holds &= decays(&col);
        let base = col.first().copied().unwrap_or(f64::NEG_INFINITY);
        for (i, (&r, &l)) in radii.iter().zip(&col).enumerate() {
            records.push(Record::from_logs(format!("{name}:R{i:02}={r}"), l, base));
        }
    }
    let holder_violations = rows.iter().filter(|(_, h)| !h).count();
    let mut rep = InequalityReport::new("density", records, None, opts.tolerance).with_params(Some(p), None, None);
    rep.verdict = if holds && holder_violations == 0 {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    rep.diagnostics.insert("holder_violations".into(), holder_violations as f64);
    Ok(rep)
}

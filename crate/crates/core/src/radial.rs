//! Radial functions on a model manifold: jets, norms, Laplacians and test
//! corpora.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{smoothstep, smoothstep_d1, smoothstep_d2};
use crate::error::{range_error, Error, Result};
use crate::geometry::{log_unit_sphere_area, ModelManifold, State};
use crate::quad::{integrate_log, merge_breaks, LogValue, QuadOptions, QuadResult};

/// Value and two derivatives of a radial function, all multiplied by
/// `e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub log_scale: f64,
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        log_scale: 0.0,
        v: 0.0,
        d1: 0.0,
        d2: 0.0,
    };

    pub fn plain(v: f64, d1: f64, d2: f64) -> Jet {
        Jet {
            log_scale: 0.0,
            v,
            d1,
            d2,
        }
    }

    pub fn constant(v: f64) -> Jet {
        Jet::plain(v, 0.0, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.v == 0.0 && self.d1 == 0.0 && self.d2 == 0.0
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        Jet {
            log_scale: self.log_scale + o.log_scale,
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }

    pub fn value(&self) -> f64 {
        self.v * self.log_scale.exp()
    }

    pub fn deriv1(&self) -> f64 {
        self.d1 * self.log_scale.exp()
    }

    pub fn deriv2(&self) -> f64 {
        self.d2 * self.log_scale.exp()
    }

    /// `S((t - a)/width)`.
    pub fn ramp_up(t: f64, a: f64, width: f64) -> Jet {
        let x = (t - a) / width;
        Jet::plain(smoothstep(x), smoothstep_d1(x) / width, smoothstep_d2(x) / (width * width))
    }

    /// `S((b - t)/width)`.
    pub fn ramp_down(t: f64, b: f64, width: f64) -> Jet {
        let x = (b - t) / width;
        Jet::plain(smoothstep(x), -smoothstep_d1(x) / width, smoothstep_d2(x) / (width * width))
    }
}

/// The derivative quantity whose `L^p` norm is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deriv {
    Value,
    Gradient,
    Hessian,
    Laplacian,
}

/// `|∇²f|` from the jet: the radial eigenvalue `f''` and `n-1` tangential
/// eigenvalues `w f'`.
pub fn hessian_norm(j: &Jet, w: f64, n: usize) -> f64 {
    (j.d2 * j.d2 + (n as f64 - 1.0) * (w * j.d1) * (w * j.d1)).sqrt()
}

pub fn laplacian(j: &Jet, w: f64, n: usize) -> f64 {
    j.d2 + (n as f64 - 1.0) * w * j.d1
}

/// `ln |D f|` for the requested derivative kind (`-∞` where it vanishes).
pub fn log_abs_deriv(j: &Jet, w: f64, n: usize, d: Deriv) -> f64 {
    let raw = match d {
        Deriv::Value => j.v.abs(),
        Deriv::Gradient => j.d1.abs(),
        Deriv::Hessian => hessian_norm(j, w, n),
        Deriv::Laplacian => laplacian(j, w, n).abs(),
    };
    if raw == 0.0 {
        f64::NEG_INFINITY
    } else {
        raw.ln() + j.log_scale
    }
}

/// Result of evaluating the radial p-Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PLaplacian {
    Value(f64),
    /// `p < 2` at a critical point, where `|f'|^{p-2}` is undefined.
    Singular,
}

/// `Δ_p f = |f'|^{p-2} (f'(n-1)w + (p-1) f'')`.
pub fn p_laplacian_jet(j: &Jet, w: f64, n: usize, p: f64) -> PLaplacian {
    let m = n as f64 - 1.0;
    if j.d1 == 0.0 {
        if p < 2.0 {
            return PLaplacian::Singular;
        }
        if p > 2.0 {
            return PLaplacian::Value(0.0);
        }
        return PLaplacian::Value(j.deriv2());
    }
    let inner = j.d1 * m * w + (p - 1.0) * j.d2;
    // e^{(p-1) log_scale} |d1|^{p-2} inner, formed in logs
    let lg = (p - 1.0) * j.log_scale + (p - 2.0) * j.d1.abs().ln();
    PLaplacian::Value(inner * lg.exp())
}

/// `|Δ_p f|` relative to the sum of the magnitudes of its two terms.
pub fn p_laplacian_relative(j: &Jet, w: f64, n: usize, p: f64) -> Option<f64> {
    if j.d1 == 0.0 {
        return if p < 2.0 { None } else { Some(0.0) };
    }
    let a = j.d1 * (n as f64 - 1.0) * w;
    let b = (p - 1.0) * j.d2;
    let scale = a.abs() + b.abs();
    Some(if scale == 0.0 { 0.0 } else { (a + b).abs() / scale })
}

type JetFn = dyn Fn(f64) -> Jet + Send + Sync;

/// A C² radial function with compact support `[s0, s1]`.
#[derive(Clone)]
pub struct RadialFunction {
    pub label: String,
    pub support: (f64, f64),
    /// Interior points where the formula changes (ramp joins and the like).
    pub breaks: Vec<f64>,
    jet: Arc<JetFn>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish()
    }
}

impl RadialFunction {
    pub fn new<F>(label: impl Into<String>, support: (f64, f64), breaks: Vec<f64>, jet: F) -> Self
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        RadialFunction {
            label: label.into(),
            support,
            breaks,
            jet: Arc::new(jet),
        }
    }

    pub fn zero(label: impl Into<String>) -> Self {
        RadialFunction::new(label, (0.0, 0.0), Vec::new(), |_| Jet::ZERO)
    }

    pub fn is_empty(&self) -> bool {
        !(self.support.1 > self.support.0)
    }

    pub fn jet(&self, t: f64) -> Jet {
        if self.is_empty() || t < self.support.0 || t > self.support.1 {
            return Jet::ZERO;
        }
        (self.jet)(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).value()
    }

    pub fn d1(&self, t: f64) -> f64 {
        self.jet(t).deriv1()
    }

    pub fn d2(&self, t: f64) -> f64 {
        self.jet(t).deriv2()
    }

    /// Pointwise product; the support is the intersection.
    pub fn product(&self, other: &RadialFunction) -> RadialFunction {
        let lo = self.support.0.max(other.support.0);
        let hi = self.support.1.min(other.support.1);
        let label = format!("{}*{}", self.label, other.label);
        if !(hi > lo) {
            return RadialFunction::zero(label);
        }
        let mut breaks: Vec<f64> = self
            .breaks
            .iter()
            .chain(&other.breaks)
            .chain([self.support.0, self.support.1, other.support.0, other.support.1].iter())
            .copied()
            .filter(|&b| b > lo && b < hi)
            .collect();
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup();
        let (a, b) = (self.clone(), other.clone());
        RadialFunction::new(label, (lo, hi), breaks, move |t| a.jet(t).mul(&b.jet(t)))
    }

    /// Quadrature breakpoints: the support, the declared breaks and the model
    /// nodes in between.
    pub fn quad_breaks(&self, model: &ModelManifold) -> Vec<f64> {
        let (a, b) = self.support;
        let mut extra: Vec<f64> = self.breaks.clone();
        extra.extend_from_slice(model.nodes_between(a, b));
        merge_breaks(a, b, &extra)
    }

    pub fn check_support(&self, model: &ModelManifold) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        if self.support.0 < 0.0 || self.support.1 > model.t_max * (1.0 + 1e-12) {
            return Err(range_error(
                &format!("support of {}", self.label),
                if self.support.0 < 0.0 { self.support.0 } else { self.support.1 },
                0.0,
                model.t_max,
            ));
        }
        Ok(())
    }
}

/// One quadrature point seen by a radial integrand.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub t: f64,
    pub state: State,
    /// `ln` of the volume density `|S^{n-1}| j^{n-1}`.
    pub log_dv: f64,
}

/// Integrates `m` log-valued integrands over `[a, b]` on a mesh that
/// contains `breaks` and every model node in between.
pub fn integrate_radial<F>(
    model: &ModelManifold,
    a: f64,
    b: f64,
    breaks: &[f64],
    m: usize,
    opts: &QuadOptions,
    f: F,
) -> Result<QuadResult>
where
    F: Fn(&Point, &mut [LogValue]),
{
    if !(b > a) {
        return integrate_log(|_, _| {}, m, &[a, a], opts);
    }
    model.check_range(b)?;
    let mut extra = breaks.to_vec();
    extra.extend_from_slice(model.nodes_between(a, b));
    let mesh = merge_breaks(a, b, &extra);
    let log_area = log_unit_sphere_area(model.n);
    let nm1 = model.n as f64 - 1.0;
    integrate_log(
        |t, out| {
            let Ok(state) = model.state(t.max(1e-300)) else {
                out.iter_mut().for_each(|o| *o = LogValue::ZERO);
                return;
            };
            let pt = Point {
                t,
                state,
                log_dv: nm1 * state.logj + log_area,
            };
            f(&pt, out)
        },
        m,
        &mesh,
        opts,
    )
}

/// `ln ‖D f‖_{L^p}` (`-∞` for the zero function).
pub fn log_lp_norm(model: &ModelManifold, f: &RadialFunction, p: f64, deriv: Deriv) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    f.check_support(model)?;
    if f.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let n = model.n;
    let r = integrate_radial(
        model,
        f.support.0,
        f.support.1,
        &f.breaks,
        1,
        &QuadOptions::default(),
        |pt, out| {
            let j = f.jet(pt.t);
            let l = log_abs_deriv(&j, pt.state.w, n, deriv);
            out[0] = LogValue::positive(p * l + pt.log_dv);
        },
    )?;
    Ok(if r.values[0].is_zero() {
        f64::NEG_INFINITY
    } else {
        r.values[0].log_abs / p
    })
}

pub fn lp_norm(model: &ModelManifold, f: &RadialFunction, p: f64, deriv: Deriv) -> Result<f64> {
    Ok(log_lp_norm(model, f, p, deriv)?.exp())
}

/// Radial p-Laplacian of `f` at `t`.
pub fn p_laplacian(model: &ModelManifold, f: &RadialFunction, p: f64, t: f64) -> Result<PLaplacian> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p-Laplacian needs p > 1, got {p}")));
    }
    let w = model.w(t)?;
    Ok(p_laplacian_jet(&f.jet(t), w, model.n, p))
}

/// `ln(e^a + e^b)` for two log magnitudes (either may be `-∞`).
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// How a bump's support is placed inside the admissible window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Linear,
    Logarithmic,
}

/// Window-relative description of one random corpus member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpDescriptor {
    pub placement: Placement,
    /// Centre as a fraction of the window (in log coordinates when logarithmic).
    pub center: f64,
    /// Support width as a fraction of the window.
    pub width: f64,
    /// Each ramp's share of the support width.
    pub ramp: f64,
    pub amplitude: f64,
    /// Number of cosine periods across the support (0 for none).
    pub oscillations: u32,
    /// When the window starts at the pole, extend the plateau to `t = 0`.
    pub pole_plateau: bool,
}

/// Seeded generator of a test corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCorpus {
    pub seed: u64,
    pub size: usize,
}

impl TestCorpus {
    pub fn new(seed: u64, size: usize) -> Self {
        TestCorpus { seed, size }
    }

    /// The first `count` descriptors of the seed's stream; longer requests
    /// extend shorter ones.
    pub fn descriptors(&self, count: usize) -> Vec<BumpDescriptor> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|i| {
                let placement = if i % 2 == 0 {
                    Placement::Logarithmic
                } else {
                    Placement::Linear
                };
                let center = rng.random_range(0.02..0.98);
                let width = rng.random_range(0.02..0.6_f64);
                let plateau = rng.random_bool(0.3);
                let ramp = if plateau {
                    rng.random_range(0.03..0.15)
                } else {
                    rng.random_range(0.2..0.5)
                };
                let amplitude = 10f64.powf(rng.random_range(-1.0..1.0));
                let oscillations = if rng.random_bool(0.4) {
                    rng.random_range(1..=8)
                } else {
                    0
                };
                let pole_plateau = rng.random_bool(0.25);
                BumpDescriptor {
                    placement,
                    center,
                    width,
                    ramp,
                    amplitude,
                    oscillations,
                    pole_plateau,
                }
            })
            .collect()
    }
}

/// `amp · S((t-a)/ℓa) · S((b-t)/ℓb) · cos(2πk(t-a)/(b-a))`; with `a = None` the
/// left ramp is dropped and the function is constant near the pole.
pub fn bump(label: impl Into<String>, a: Option<f64>, b: f64, ramp_left: f64, ramp_right: f64, amp: f64, osc: u32) -> RadialFunction {
    let lo = a.unwrap_or(0.0);
    let omega = if osc > 0 {
        2.0 * std::f64::consts::PI * osc as f64 / (b - lo)
    } else {
        0.0
    };
    let mut breaks = vec![b - ramp_right];
    if let Some(a) = a {
        breaks.push(a + ramp_left);
    }
    breaks.sort_by(|x, y| x.total_cmp(y));
    RadialFunction::new(label, (lo, b), breaks, move |t| {
        let mut j = Jet::ramp_down(t, b, ramp_right);
        if let Some(a) = a {
            j = j.mul(&Jet::ramp_up(t, a, ramp_left));
        }
        if osc > 0 {
            let ph = omega * (t - lo);
            j = j.mul(&Jet::plain(ph.cos(), -omega * ph.sin(), -omega * omega * ph.cos()));
        }
        Jet {
            v: amp * j.v,
            d1: amp * j.d1,
            d2: amp * j.d2,
            ..j
        }
    })
}

/// Maps a descriptor into the window `[lo, hi]`.
pub fn realize(desc: &BumpDescriptor, index: usize, lo: f64, hi: f64) -> RadialFunction {
    let log_ok = desc.placement == Placement::Logarithmic && hi > 0.0;
    let (x0, x1) = if log_ok {
        let l = if lo > 0.0 { lo } else { (hi / 1000.0).min(1.0) };
        (l.ln(), hi.ln())
    } else {
        (lo, hi)
    };
    let span = x1 - x0;
    let c = x0 + desc.center * span;
    let hw = 0.5 * desc.width * span;
    let (mut a, mut b) = ((c - hw).max(x0), (c + hw).min(x1));
    if log_ok {
        a = a.exp();
        b = b.exp();
    }
    let a = a.max(lo);
    let b = b.min(hi);
    let pole = lo == 0.0 && desc.pole_plateau;
    let label = format!(
        "bump{index:04}[{}{:.6e},{:.6e},k={}]",
        if pole { "pole," } else { "" },
        a,
        b,
        desc.oscillations
    );
    let a = if pole { 0.0 } else { a };
    let ramp = desc.ramp * (b - a);
    bump(label, if pole { None } else { Some(a) }, b, ramp, ramp, desc.amplitude, desc.oscillations)
}

/// The deterministic corpus: `prefix` members first (at most `size` of
/// them), then random bumps supported in `[inner_radius, 0.9 t_max]`.
pub fn generate_corpus(spec: &TestCorpus, model: &ModelManifold, inner_radius: f64, prefix: Vec<RadialFunction>) -> Result<Vec<RadialFunction>> {
    let hi = 0.9 * model.t_max;
    if spec.size == 0 {
        return Ok(Vec::new());
    }
    if !(inner_radius >= 0.0) || !(hi > inner_radius * (1.0 + 1e-9)) {
        return Err(Error::Configuration(format!(
            "empty corpus window [{inner_radius}, {hi}]"
        )));
    }
    let mut out: Vec<RadialFunction> = prefix.into_iter().take(spec.size).collect();
    let rest = spec.size - out.len();
    for (i, d) in spec.descriptors(rest).iter().enumerate() {
        out.push(realize(d, i, inner_radius, hi));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::CurvatureProfile;
    use crate::geometry::build_model;

    fn flat3() -> ModelManifold {
        build_model(3, CurvatureProfile::Flat, 12.0, 1e-10).unwrap()
    }

    #[test]
    fn zero_function_norms() {
        let m = flat3();
        let z = RadialFunction::zero("zero");
        for d in [Deriv::Value, Deriv::Gradient, Deriv::Hessian, Deriv::Laplacian] {
            assert_eq!(lp_norm(&m, &z, 2.0, d).unwrap(), 0.0);
        }
    }

    #[test]
    fn plateau_l1_against_simpson() {
        let m = flat3();
        let f = bump("plateau", Some(0.45), 0.95, 0.05, 0.05, 1.0, 0);
        let got = lp_norm(&m, &f, 1.0, Deriv::Value).unwrap();
        // dense composite Simpson on 4π t² f(t)
        let n = 20_000;
        let (a, b) = (0.45, 0.95);
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let t = a + h * i as f64;
            let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += wgt * 4.0 * std::f64::consts::PI * t * t * f.value(t);
        }
        s *= h / 3.0;
        assert!((got - s).abs() < 1e-9 * s, "{got} vs {s}");
        // symmetric ramps: the ball shell between the ramp midpoints, up to
        // the curvature of t²
        let shell = 4.0 / 3.0 * std::f64::consts::PI * (0.925f64.powi(3) - 0.475f64.powi(3));
        assert!((got - shell).abs() < 1e-2 * shell, "{got} vs {shell}");
    }

    #[test]
    fn laplacian_of_square_is_2n() {
        let m = flat3();
        let sq = bump("one", Some(0.1), 1.0, 0.1, 0.1, 1.0, 0);
        let t2 = RadialFunction::new("t2", (0.0, 2.0), vec![], |t| Jet::plain(t * t, 2.0 * t, 2.0));
        let f = sq.product(&t2);
        for &t in &[0.3, 0.5, 0.7] {
            let j = f.jet(t);
            let w = m.w(t).unwrap();
            assert!((laplacian(&j, w, 3) - 6.0).abs() < 1e-8);
        }
    }

    #[test]
    fn p_laplacian_examples() {
        let m = build_model(4, CurvatureProfile::Flat, 10.0, 1e-10).unwrap();
        let f = RadialFunction::new("fund", (1.0, 5.0), vec![], |t| {
            Jet::plain(t.powf(-0.5), -0.5 * t.powf(-1.5), 0.75 * t.powf(-2.5))
        });
        for &t in &[1.5, 2.0, 3.7] {
            match p_laplacian(&m, &f, 3.0, t).unwrap() {
                PLaplacian::Value(v) => assert!(v.abs() < 1e-8, "{v}"),
                PLaplacian::Singular => panic!(),
            }
            let PLaplacian::Value(v2) = p_laplacian(&m, &f, 2.0, t).unwrap() else { panic!() };
            assert!((v2 - laplacian(&f.jet(t), m.w(t).unwrap(), 4)).abs() < 1e-10);
        }
        let crit = Jet::plain(1.0, 0.0, -1.0);
        assert_eq!(p_laplacian_jet(&crit, 1.0, 3, 1.5), PLaplacian::Singular);
        assert_eq!(p_laplacian_jet(&crit, 1.0, 3, 3.0), PLaplacian::Value(0.0));
    }

    #[test]
    fn consistency_of_derivatives() {
        let spec = TestCorpus::new(7, 40);
        let m = flat3();
        let corpus = generate_corpus(&spec, &m, 0.0, vec![]).unwrap();
        for f in &corpus {
            let (a, b) = f.support;
            for i in 1..20 {
                let t = a + (b - a) * i as f64 / 20.0;
                let h = 1e-6 * (b - a);
                let fd = (f.value(t + h) - f.value(t - h)) / (2.0 * h);
                let scale = f.d1(t).abs() + f.value(t).abs() / (b - a) + 1e-300;
                assert!((fd - f.d1(t)).abs() <= 1e-5 * scale.max(1.0 / (b - a)), "{} at {t}", f.label);
                let fd2 = (f.d1(t + h) - f.d1(t - h)) / (2.0 * h);
                let s2 = f.d2(t).abs() + f.d1(t).abs() / (b - a);
                assert!((fd2 - f.d2(t)).abs() <= 1e-4 * s2.max(1.0 / ((b - a) * (b - a))), "{} at {t}", f.label);
            }
            // vanishes at the far end
            let j = f.jet(b);
            assert!(j.v.abs() < 1e-14 && j.d1.abs() < 1e-12 && j.d2.abs() < 1e-9);
        }
    }

    #[test]
    fn corpus_determinism() {
        let m = flat3();
        let spec = TestCorpus::new(42, 0);
        assert!(generate_corpus(&spec, &m, 1.0, vec![]).unwrap().is_empty());
        let spec = TestCorpus::new(42, 200);
        let a: Vec<String> = generate_corpus(&spec, &m, 1.0, vec![]).unwrap().into_iter().map(|f| f.label).collect();
        let b: Vec<String> = generate_corpus(&spec, &m, 1.0, vec![]).unwrap().into_iter().map(|f| f.label).collect();
        assert_eq!(a, b);
        let big = TestCorpus::new(42, 400).descriptors(400);
        assert_eq!(big[..200], spec.descriptors(200)[..]);
        assert!(generate_corpus(&spec, &m, 11.0, vec![]).is_err());
        for f in generate_corpus(&spec, &m, 1.0, vec![]).unwrap() {
            assert!(f.support.0 >= 1.0 && f.support.1 <= 0.9 * 12.0 + 1e-12);
        }
    }

    #[test]
    fn norm_refinement_is_stable() {
        let m = build_model(3, CurvatureProfile::PowerLaw { a: 1.0, alpha: 1.0 }, 12.0, 1e-10).unwrap();
        let f = bump("b", Some(1.0), 9.0, 2.0, 2.0, 1.0, 3);
        let r = integrate_radial(&m, 1.0, 9.0, &f.breaks, 1, &QuadOptions::default(), |pt, out| {
            let l = log_abs_deriv(&f.jet(pt.t), pt.state.w, 3, Deriv::Hessian);
            out[0] = LogValue::positive(2.0 * l + pt.log_dv);
        })
        .unwrap();
        let ch = crate::quad::refinement_change(
            |t, out: &mut [LogValue]| {
                let s = m.state(t).unwrap();
                let l = log_abs_deriv(&f.jet(t), s.w, 3, Deriv::Hessian);
                out[0] = LogValue::positive(2.0 * l + 2.0 * s.logj + log_unit_sphere_area(3));
            },
            1,
            &r,
        );
        assert!(ch[0] < 1e-8, "{ch:?}");
    }
}

//! Adaptive Gauss-Kronrod (7/15) quadrature of several integrands at once,
//! with integrands supplied as signed logarithms.
//!
//! Volume densities on the model are `e^{(n-1) log j}` and overflow long
//! before the interesting range ends, so each integrand value is passed as
//! `(sign, ln|g|)`. A per-component shift keeps the scaled sums representable.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SCALED_LOG: f64 = 600.0;

/// A real number stored as `sign · e^{log_abs}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub sign: f64,
    pub log_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0.0,
        log_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: f64, log_abs: f64) -> Self {
        if sign == 0.0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                sign: v.signum(),
                log_abs: v.abs().ln(),
            }
        }
    }

    pub fn positive(log_abs: f64) -> Self {
        Self::new(1.0, log_abs)
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Target error relative to `∫|g|` per component.
    pub rtol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rtol: 1e-11,
            max_panels: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    /// `∫ g_c`.
    pub values: Vec<LogValue>,
    /// `∫ |g_c|`.
    pub abs_values: Vec<LogValue>,
    /// Final mesh, in increasing order.
    pub panels: Vec<(f64, f64)>,
    /// Estimated absolute error relative to `∫|g_c|`.
    pub rel_error: Vec<f64>,
}

struct Panel {
    a: f64,
    b: f64,
    k: Vec<f64>,
    abs_k: Vec<f64>,
    err: Vec<f64>,
}

fn eval_panel<F>(f: &F, m: usize, a: f64, b: f64, shift: &[f64], buf: &mut [LogValue]) -> (Panel, f64)
where
    F: Fn(f64, &mut [LogValue]),
{
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let mut k = vec![0.0; m];
    let mut g = vec![0.0; m];
    let mut ak = vec![0.0; m];
    let mut worst = f64::NEG_INFINITY;
    for i in 0..15 {
        let (node, wk, wg) = if i < 7 {
            (c - hl * XGK[i], WGK[i], if i % 2 == 1 { WG[i / 2] } else { 0.0 })
        } else if i == 7 {
            (c, WGK[7], WG[3])
        } else {
            let j = 14 - i;
            (c + hl * XGK[j], WGK[j], if j % 2 == 1 { WG[j / 2] } else { 0.0 })
        };
        f(node, buf);
        for comp in 0..m {
            let lv = buf[comp];
            if lv.sign == 0.0 {
                continue;
            }
            let s = lv.log_abs - shift[comp];
            worst = worst.max(s);
            let v = lv.sign * s.exp();
            k[comp] += wk * v;
            g[comp] += wg * v;
            ak[comp] += wk * v.abs();
        }
    }
    let err = (0..m).map(|comp| (hl * (k[comp] - g[comp])).abs()).collect();
    for comp in 0..m {
        k[comp] *= hl;
        ak[comp] *= hl;
    }
    (
        Panel {
            a,
            b,
            k,
            abs_k: ak,
            err,
        },
        worst,
    )
}

fn prescan<F>(f: &F, m: usize, breaks: &[f64], buf: &mut [LogValue]) -> Vec<f64>
where
    F: Fn(f64, &mut [LogValue]),
{
    let mut shift = vec![f64::NEG_INFINITY; m];
    for w in breaks.windows(2) {
        for i in 0..=8 {
            let t = w[0] + (w[1] - w[0]) * (i as f64 + 0.5) / 9.0;
            f(t, buf);
            for comp in 0..m {
                if buf[comp].sign != 0.0 {
                    shift[comp] = shift[comp].max(buf[comp].log_abs);
                }
            }
        }
    }
    shift.iter().map(|&s| if s.is_finite() { s } else { 0.0 }).collect()
}

/// Integrates the `m` integrands supplied by `f` over `[breaks[0], breaks.last()]`,
/// starting from the panels delimited by `breaks`.
pub fn integrate_log<F>(f: F, m: usize, breaks: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64, &mut [LogValue]),
{
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
        if breaks.len() >= 2 && breaks.windows(2).all(|w| w[1] >= w[0]) {
            let clean = dedup(breaks);
            if clean.len() < 2 {
                return Ok(empty_result(m));
            }
            return integrate_log(f, m, &clean, opts);
        }
        return Err(Error::Domain("quadrature breakpoints must increase".into()));
    }
    let mut buf = vec![LogValue::ZERO; m];
    let mut shift = prescan(&f, m, breaks, &mut buf);
    'restart: loop {
        let mut panels: Vec<Panel> = Vec::with_capacity(breaks.len() * 2);
        for w in breaks.windows(2) {
            let (p, worst) = eval_panel(&f, m, w[0], w[1], &shift, &mut buf);
            if worst > MAX_SCALED_LOG {
                bump_shift(&f, m, w[0], w[1], &mut shift, &mut buf);
                continue 'restart;
            }
            panels.push(p);
        }
        loop {
            let mut tot_abs = vec![0.0; m];
            let mut tot_err = vec![0.0; m];
            for p in &panels {
                for c in 0..m {
                    tot_abs[c] += p.abs_k[c];
                    tot_err[c] += p.err[c];
                }
            }
            let ok = (0..m).all(|c| tot_err[c] <= opts.rtol * tot_abs[c] || tot_abs[c] == 0.0);
            if ok || panels.len() >= opts.max_panels {
                if !ok {
                    return Err(Error::Integration {
                        t: breaks[0],
                        reason: format!("quadrature did not converge within {} panels", opts.max_panels),
                    });
                }
                return Ok(finish(panels, &shift, &tot_abs, &tot_err, m));
            }
            // split every panel carrying more than its share of the error
            let npan = panels.len() as f64;
            let mut next: Vec<Panel> = Vec::with_capacity(panels.len() + 16);
            let mut split_any = false;
            for p in panels.into_iter() {
                let bad = (0..m).any(|c| {
                    tot_abs[c] > 0.0 && p.err[c] > opts.rtol * tot_abs[c] / npan && tot_err[c] > opts.rtol * tot_abs[c]
                });
                let mid = 0.5 * (p.a + p.b);
                if bad && mid > p.a && mid < p.b {
                    split_any = true;
                    for (a, b) in [(p.a, mid), (mid, p.b)] {
                        let (q, worst) = eval_panel(&f, m, a, b, &shift, &mut buf);
                        if worst > MAX_SCALED_LOG {
                            bump_shift(&f, m, a, b, &mut shift, &mut buf);
                            continue 'restart;
                        }
                        next.push(q);
                    }
                } else {
                    next.push(p);
                }
            }
            panels = next;
            if !split_any {
                let mut tot_abs = vec![0.0; m];
                let mut tot_err = vec![0.0; m];
                for p in &panels {
                    for c in 0..m {
                        tot_abs[c] += p.abs_k[c];
                        tot_err[c] += p.err[c];
                    }
                }
                return Ok(finish(panels, &shift, &tot_abs, &tot_err, m));
            }
        }
    }
}

fn bump_shift<F>(f: &F, m: usize, a: f64, b: f64, shift: &mut [f64], buf: &mut [LogValue])
where
    F: Fn(f64, &mut [LogValue]),
{
    for i in 0..=32 {
        let t = a + (b - a) * i as f64 / 32.0;
        f(t, buf);
        for c in 0..m {
            if buf[c].sign != 0.0 {
                shift[c] = shift[c].max(buf[c].log_abs);
            }
        }
    }
    // the K15 nodes themselves exceeded the bound: include them too
    let c0 = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    for x in XGK {
        for t in [c0 - hl * x, c0 + hl * x] {
            f(t, buf);
            for c in 0..m {
                if buf[c].sign != 0.0 {
                    shift[c] = shift[c].max(buf[c].log_abs);
                }
            }
        }
    }
}

fn finish(panels: Vec<Panel>, shift: &[f64], tot_abs: &[f64], tot_err: &[f64], m: usize) -> QuadResult {
    let mut sums = vec![0.0; m];
    for p in &panels {
        for (s, k) in sums.iter_mut().zip(&p.k) {
            *s += k;
        }
    }
    let values = (0..m)
        .map(|c| {
            if sums[c] == 0.0 {
                LogValue::ZERO
            } else {
                LogValue::new(sums[c].signum(), sums[c].abs().ln() + shift[c])
            }
        })
        .collect();
    let abs_values = (0..m)
        .map(|c| {
            if tot_abs[c] == 0.0 {
                LogValue::ZERO
            } else {
                LogValue::positive(tot_abs[c].ln() + shift[c])
            }
        })
        .collect();
    let rel_error = (0..m)
        .map(|c| if tot_abs[c] > 0.0 { tot_err[c] / tot_abs[c] } else { 0.0 })
        .collect();
    QuadResult {
        values,
        abs_values,
        panels: panels.iter().map(|p| (p.a, p.b)).collect(),
        rel_error,
    }
}

fn dedup(breaks: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(breaks.len());
    for &b in breaks {
        if out.last().is_none_or(|&l| b > l) {
            out.push(b);
        }
    }
    out
}

fn empty_result(m: usize) -> QuadResult {
    QuadResult {
        values: vec![LogValue::ZERO; m],
        abs_values: vec![LogValue::ZERO; m],
        panels: Vec::new(),
        rel_error: vec![0.0; m],
    }
}

/// Sorted, deduplicated breakpoints from `a` to `b` containing every point of
/// `extra` that falls strictly inside.
pub fn merge_breaks(a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(extra.len() + 2);
    v.push(a);
    v.extend(extra.iter().copied().filter(|&x| x > a && x < b));
    v.push(b);
    v.sort_by(|x, y| x.total_cmp(y));
    dedup(&v)
}

/// Relative change of each integral when every panel of a finished mesh is
/// halved (a Richardson-style convergence check).
pub fn refinement_change<F>(f: F, m: usize, result: &QuadResult) -> Vec<f64>
where
    F: Fn(f64, &mut [LogValue]),
{
    if result.panels.is_empty() {
        return vec![0.0; m];
    }
    let mut buf = vec![LogValue::ZERO; m];
    let shift: Vec<f64> = result
        .abs_values
        .iter()
        .map(|v| if v.is_zero() { 0.0 } else { v.log_abs })
        .collect();
    let mut sums = vec![0.0; m];
    for &(a, b) in &result.panels {
        let mid = 0.5 * (a + b);
        for (x, y) in [(a, mid), (mid, b)] {
            let (p, _) = eval_panel(&f, m, x, y, &shift, &mut buf);
            for (s, k) in sums.iter_mut().zip(&p.k) {
                *s += k;
            }
        }
    }
    (0..m)
        .map(|c| {
            if result.abs_values[c].is_zero() {
                return sums[c].abs();
            }
            // both integrals expressed relative to ∫|g_c|
            let old = result.values[c].sign * (result.values[c].log_abs - shift[c]).exp();
            (sums[c] - old).abs()
        })
        .collect()
}

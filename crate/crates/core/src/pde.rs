//! Radial elliptic problems on a model manifold: the Dirichlet exhaustion
//! for `(-Δ+1)v = ψ`, decaying solutions of `Δv = v`, the Li-Yau ratio, the
//! stochastic-completeness classifier and the positivity pairing probe.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::make_hessian_cutoff;
use crate::error::{range_error, Error, Result};
use crate::geometry::{log_unit_sphere_area, ModelManifold};
use crate::interp::{hermite, locate};
use crate::ode::{integrate, Options, System};
use crate::radial::{log_add, Jet, RadialFunction};
use crate::verify::{InequalityReport, Record};

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

#[derive(Debug, Clone, Copy)]
pub struct ExhaustionOptions {
    /// Cells per unit length, multiplied by `max(1, w)` on each segment.
    pub cells_per_unit: f64,
    /// Require `ψ` to vanish beyond the smallest radius.
    pub require_compact: bool,
    /// Convergence threshold for the last two levels, relative to `‖v‖_∞`.
    pub converge_tol: f64,
}

impl Default for ExhaustionOptions {
    fn default() -> Self {
        ExhaustionOptions {
            cells_per_unit: 64.0,
            require_compact: true,
            converge_tol: 1e-8,
        }
    }
}

/// Vertex-centred finite-volume mesh on `[0, R]`.
#[derive(Debug, Clone)]
struct Mesh {
    t: Vec<f64>,
    /// `ln` volume of the dual cell of each node except the last.
    log_vol: Vec<f64>,
    /// `ln(J(m)/h)` for the face between nodes `i` and `i+1`.
    log_face: Vec<f64>,
    /// Volume-weighted cell mean of `ψ`.
    psi_mean: Vec<f64>,
}

/// `ξ - sin(2πξ)/(4π)`: nodes cluster at both ends of a segment.
fn cluster(xi: f64) -> f64 {
    xi - (2.0 * std::f64::consts::PI * xi).sin() / (4.0 * std::f64::consts::PI)
}

fn segment_nodes(model: &ModelManifold, breaks: &[f64], density: f64, factor: usize) -> Result<Vec<f64>> {
    let mut t = vec![breaks[0]];
    for s in breaks.windows(2) {
        let (a, b) = (s[0], s[1]);
        let w = model.w(b)?.abs().max(1.0);
        let cells = ((density * (b - a) * w).ceil() as usize).max(8) * factor;
        for k in 1..=cells {
            t.push(a + (b - a) * cluster(k as f64 / cells as f64));
        }
    }
    Ok(t)
}

/// `ln ∫_a^b g J dt` and `ln ∫_a^b J dt` by 5-point Gauss-Legendre, with `J`
/// including the sphere area.
fn cell_integrals(model: &ModelManifold, a: f64, b: f64, psi: &RadialFunction, log_area: f64) -> Result<(f64, f64)> {
    let nm1 = model.n as f64 - 1.0;
    let half = 0.5 * (b - a);
    let mut logs = [0.0; 5];
    let mut vals = [0.0; 5];
    for k in 0..5 {
        let t = 0.5 * (a + b) + half * GL5_X[k];
        logs[k] = GL5_W[k].ln() + half.ln() + nm1 * model.logj(t)? + log_area;
        vals[k] = psi.value(t);
        if vals[k] < 0.0 {
            return Err(Error::Precondition {
                label: psi.label.clone(),
                reason: format!("negative value {} at t = {t}", vals[k]),
            });
        }
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sv = 0.0;
    let mut s1 = 0.0;
    for k in 0..5 {
        let e = (logs[k] - top).exp();
        s1 += e;
        sv += e * vals[k];
    }
    Ok((if sv > 0.0 { top + sv.ln() } else { f64::NEG_INFINITY }, top + s1.ln()))
}

impl Mesh {
    fn build(model: &ModelManifold, breaks: &[f64], psi: &RadialFunction, density: f64, factor: usize) -> Result<Mesh> {
        let t = segment_nodes(model, breaks, density, factor)?;
        let nm1 = model.n as f64 - 1.0;
        let la = log_unit_sphere_area(model.n);
        let n = t.len() - 1;
        let mut log_vol = Vec::with_capacity(n);
        let mut psi_mean = Vec::with_capacity(n);
        let mut log_face = Vec::with_capacity(n);
        for i in 0..n {
            let h = t[i + 1] - t[i];
            let m = 0.5 * (t[i] + t[i + 1]);
            log_face.push(nm1 * model.logj(m)? + la - h.ln());
        }
        for i in 0..n {
            let left = if i == 0 { t[0] } else { 0.5 * (t[i - 1] + t[i]) };
            let right = 0.5 * (t[i] + t[i + 1]);
            let mut lv = f64::NEG_INFINITY;
            let mut lp = f64::NEG_INFINITY;
            for (a, b) in [(left, t[i]), (t[i], right)] {
                if b > a {
                    let (p, v) = cell_integrals(model, a, b, psi, la)?;
                    lp = log_add(lp, p);
                    lv = log_add(lv, v);
                }
            }
            log_vol.push(lv);
            psi_mean.push(if lp == f64::NEG_INFINITY { 0.0 } else { (lp - lv).exp() });
        }
        Ok(Mesh {
            t,
            log_vol,
            log_face,
            psi_mean,
        })
    }

    /// Solves the volume-scaled system; the last node carries `v = 0`.
    fn solve(&self) -> Result<Vec<f64>> {
        let n = self.log_vol.len();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        for i in 0..n {
            let ap = (self.log_face[i] - self.log_vol[i]).exp();
            let am = if i > 0 { (self.log_face[i - 1] - self.log_vol[i]).exp() } else { 0.0 };
            diag[i] = 1.0 + ap + am;
            sub[i] = -am;
            sup[i] = if i + 1 < n { -ap } else { 0.0 };
            // M-matrix structure: positive diagonal, non-positive off
            // diagonal, strict diagonal dominance
            let ok = diag[i] > 0.0 && sub[i] <= 0.0 && sup[i] <= 0.0 && diag[i] > sub[i].abs() + sup[i].abs();
            if !ok || !diag[i].is_finite() {
                return Err(Error::Solver(format!(
                    "system matrix is not an M-matrix at t = {}",
                    self.t[i]
                )));
            }
        }
        let mut v = thomas(&sub, &diag, &sup, &self.psi_mean);
        v.push(0.0);
        Ok(v)
    }

    /// `(Σ V_i |x_i|^p)^{1/p}` over the unknown nodes.
    fn lp_norm(&self, x: &[f64], p: f64) -> f64 {
        let l = self
            .log_vol
            .iter()
            .zip(x)
            .filter(|(_, &v)| v != 0.0)
            .fold(f64::NEG_INFINITY, |acc, (&lv, &v)| log_add(acc, lv + p * v.abs().ln()));
        (l / p).exp()
    }
}

/// Tridiagonal solve; `sub[0]` and `sup[n-1]` are ignored.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    // subnormals lose relative precision and can stall at the smallest one
    let flush = |x: f64| if x.abs() < f64::MIN_POSITIVE { 0.0 } else { x };
    let mut beta = diag[0];
    c[0] = sup[0] / beta;
    d[0] = flush(rhs[0] / beta);
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / beta;
        d[i] = flush((rhs[i] - sub[i] * d[i - 1]) / beta);
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = flush(d[i] - c[i] * x[i + 1]);
    }
    x
}

/// One domain `B_R` of the exhaustion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExhaustionLevel {
    pub radius: f64,
    /// Mesh nodes, ending at `R`.
    pub t: Vec<f64>,
    /// Richardson-extrapolated solution from meshes `h` and `h/2`.
    pub v: Vec<f64>,
    /// Discrete solution on the mesh `h`.
    pub v_raw: Vec<f64>,
    /// `max |v_{h/2} - v_h| / 3`.
    pub richardson_error: f64,
    /// `(p, ‖v‖_{L^p(B_R)})` for the discrete solutions (larger of the two
    /// meshes).
    pub lp_norms: Vec<(f64, f64)>,
    pub sup_norm: f64,
    /// Smallest interior value of the discrete solutions.
    pub min_interior: f64,
    /// Interior nodes where the solution underflowed to zero.
    pub underflow_nodes: usize,
    #[serde(skip)]
    log_vol: Vec<f64>,
    #[serde(skip)]
    log_face: Vec<f64>,
    #[serde(skip)]
    psi_mean: Vec<f64>,
}

impl ExhaustionLevel {
    /// Linear interpolation of the extrapolated solution.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let i = locate(&self.t, t, "exhaustion radius")?;
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Ok(self.v[i] + s * (self.v[i + 1] - self.v[i]))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExhaustionSolution {
    pub radii: Vec<f64>,
    pub levels: Vec<ExhaustionLevel>,
    /// `(p, ‖ψ‖_{L^p})` by adaptive quadrature.
    pub psi_lp_norms: Vec<(f64, f64)>,
    pub psi_sup: f64,
    /// `max (v_k - v_{k+1})⁺ / ‖v‖_∞` over nested levels and both meshes.
    pub monotonicity_violation: f64,
    /// `sup |v_last - v_prev|` on the previous domain, over `‖v‖_∞`.
    pub last_change: f64,
    pub converged: bool,
    /// Last level restricted to the first level's nodes.
    pub limit: Vec<(f64, f64)>,
}

impl ExhaustionSolution {
    /// Largest `‖v_k‖_p - ‖ψ‖_p` over levels and exponents.
    pub fn lp_excess(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for lvl in &self.levels {
            for (&(_, v), &(_, s)) in lvl.lp_norms.iter().zip(&self.psi_lp_norms) {
                worst = worst.max(v - s);
            }
        }
        worst
    }

    /// Largest `‖v_k‖_∞ - sup ψ`.
    pub fn sup_excess(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.sup_norm - self.psi_sup)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn psi_sup(psi: &RadialFunction) -> f64 {
    if psi.is_empty() {
        return 0.0;
    }
    let (a, b) = psi.support;
    (0..=4000)
        .map(|k| psi.value(a + (b - a) * k as f64 / 4000.0))
        .fold(0.0, f64::max)
}

/// Mesh breakpoints on `[0, r]`: integers, the radii and the breaks of `ψ`.
fn mesh_breaks(psi: &RadialFunction, radii: &[f64], r: f64) -> Vec<f64> {
    let mut b: Vec<f64> = (1..r.ceil() as usize).map(|k| k as f64).collect();
    b.extend_from_slice(radii);
    if !psi.is_empty() {
        b.push(psi.support.0);
        b.push(psi.support.1);
        b.extend_from_slice(&psi.breaks);
    }
    crate::quad::merge_breaks(0.0, r, &b)
}

/// Solves `-(v'' + (n-1)wv') + v = ψ` on each ball `B_{R_k}` with `v'(0) = 0`
/// and `v(R_k) = 0`.
pub fn solve_dirichlet_exhaustion(
    model: &ModelManifold,
    psi: &RadialFunction,
    radii: &[f64],
    p_list: &[f64],
    opts: &ExhaustionOptions,
) -> Result<ExhaustionSolution> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("exhaustion radii must be positive and increasing".into()));
    }
    if p_list.iter().any(|p| !(*p >= 1.0)) {
        return Err(Error::Domain("norm exponents must be at least 1".into()));
    }
    model.check_range(*radii.last().unwrap())?;
    if opts.require_compact && !psi.is_empty() && psi.support.1 > radii[0] * (1.0 + 1e-12) {
        return Err(Error::Precondition {
            label: psi.label.clone(),
            reason: format!("support ends at {} beyond the first radius {}", psi.support.1, radii[0]),
        });
    }
    let levels: Vec<(ExhaustionLevel, Vec<f64>)> = radii
        .par_iter()
        .map(|&r| solve_level(model, psi, radii, r, p_list, opts))
        .collect::<Result<_>>()?;
    let psi_lp_norms = p_list
        .iter()
        .map(|&p| Ok((p, crate::radial::lp_norm(model, psi, p, crate::radial::Deriv::Value)?)))
        .collect::<Result<Vec<_>>>()?;
    let scale = levels.iter().map(|(l, _)| l.sup_norm).fold(0.0, f64::max);
    let mut viol: f64 = 0.0;
    for pair in levels.windows(2) {
        let ((a, af), (b, bf)) = (&pair[0], &pair[1]);
        for (x, y) in a.v_raw.iter().zip(&b.v_raw).chain(af.iter().zip(bf.iter())) {
            viol = viol.max(x - y);
        }
    }
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    let last_change = if levels.len() >= 2 {
        let (a, b) = (&levels[levels.len() - 2].0, &levels[levels.len() - 1].0);
        a.v.iter().zip(&b.v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        0.0
    };
    let first = &levels[0].0;
    let last = &levels[levels.len() - 1].0;
    let limit = first.t.iter().zip(&last.v).map(|(&t, &v)| (t, v)).collect();
    Ok(ExhaustionSolution {
        radii: radii.to_vec(),
        psi_sup: psi_sup(psi),
        psi_lp_norms,
        monotonicity_violation: rel(viol),
        last_change: rel(last_change),
        converged: rel(last_change) < opts.converge_tol,
        limit,
        levels: levels.into_iter().map(|(l, _)| l).collect(),
    })
}

/// One level; also returns the fine discrete solution at the coarse nodes.
fn solve_level(
    model: &ModelManifold,
    psi: &RadialFunction,
    radii: &[f64],
    r: f64,
    p_list: &[f64],
    opts: &ExhaustionOptions,
) -> Result<(ExhaustionLevel, Vec<f64>)> {
    let breaks = mesh_breaks(psi, radii, r);
    let coarse = Mesh::build(model, &breaks, psi, opts.cells_per_unit, 1)?;
    let fine = Mesh::build(model, &breaks, psi, opts.cells_per_unit, 2)?;
    let v1 = coarse.solve()?;
    let v2 = fine.solve()?;
    let v2c: Vec<f64> = v2.iter().step_by(2).copied().collect();
    debug_assert_eq!(v2c.len(), v1.len());
    let sup_norm = v1.iter().chain(&v2).fold(0.0_f64, |m, x| m.max(x.abs()));
    let interior = |v: &[f64]| v[..v.len() - 1].iter().copied().fold(f64::INFINITY, f64::min);
    let min_interior = interior(&v1).min(interior(&v2));
    if min_interior < -1e-12 * sup_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Solver(format!(
            "discrete maximum principle violated on B_{r}: min v = {min_interior}"
        )));
    }
    let underflow_nodes = if sup_norm > 0.0 {
        v1[..v1.len() - 1].iter().filter(|&&x| x == 0.0).count()
    } else {
        0
    };
    let mut err: f64 = 0.0;
    let v: Vec<f64> = v1
        .iter()
        .zip(&v2c)
        .map(|(&a, &b)| {
            err = err.max((b - a).abs() / 3.0);
            b + (b - a) / 3.0
        })
        .collect();
    let lp_norms = p_list
        .iter()
        .map(|&p| (p, coarse.lp_norm(&v1, p).max(fine.lp_norm(&v2, p))))
        .collect();
    Ok((
        ExhaustionLevel {
            radius: r,
            t: coarse.t.clone(),
            v,
            v_raw: v1,
            richardson_error: err,
            lp_norms,
            sup_norm,
            min_interior,
            underflow_nodes,
            log_vol: coarse.log_vol,
            log_face: coarse.log_face,
            psi_mean: coarse.psi_mean,
        },
        v2c,
    ))
}

struct Eigen<'a> {
    model: &'a ModelManifold,
}

impl System<2> for Eigen<'_> {
    fn rhs(&self, t: f64, x: &[f64; 2]) -> [f64; 2] {
        let w = self.model.w(t).unwrap_or(f64::NAN);
        let nm1 = self.model.n as f64 - 1.0;
        [1.0 - x[0] * x[0] - nm1 * w * x[0], x[0]]
    }

    fn jacobian(&self, t: f64, x: &[f64; 2]) -> [[f64; 2]; 2] {
        let w = self.model.w(t).unwrap_or(f64::NAN);
        let nm1 = self.model.n as f64 - 1.0;
        [[-2.0 * x[0] - nm1 * w, 0.0], [1.0, 0.0]]
    }
}

/// Positive decaying solution of `Δv = v` outside `B_{r0}`, stored through
/// `s = v'/v` and `ln v` with `v(r0) = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExteriorEigenfunction {
    pub n: usize,
    pub r0: f64,
    pub grid: Vec<f64>,
    pub s: Vec<f64>,
    pub log_v: Vec<f64>,
}

/// The negative root of `s² + (n-1)ws - 1 = 0`.
fn decaying_root(nm1: f64, w: f64) -> f64 {
    let b = nm1 * w;
    // -(b + sqrt(b² + 4))/2, written without cancellation
    -0.5 * (b + (b * b + 4.0).sqrt())
}

pub fn exterior_eigenfunction(model: &ModelManifold, r0: f64) -> Result<ExteriorEigenfunction> {
    model.check_range(r0)?;
    if !(r0 < model.t_max) {
        return Err(range_error("eigenfunction inner radius", r0, 0.0, model.t_max));
    }
    let nm1 = model.n as f64 - 1.0;
    let t_end = model.t_max;
    let w_end = *model.w.last().unwrap();
    let s_end = decaying_root(nm1, w_end);
    let mut stops: Vec<f64> = model.nodes_between(r0, t_end).iter().rev().copied().collect();
    stops.push(r0);
    let h0 = stops.first().map(|&s| t_end - s).unwrap_or(t_end - r0);
    let opts = Options {
        tol: model.tol,
        floors: [1.0, 1.0],
        h_init: 0.01 * h0.max(1e-12),
        max_steps: 4_000_000,
    };
    let traj = integrate(&Eigen { model }, t_end, [s_end, 0.0], &stops, &opts)?;
    let shift = traj.x.last().unwrap()[1];
    let mut grid = Vec::with_capacity(traj.t.len());
    let mut s = Vec::with_capacity(traj.t.len());
    let mut log_v = Vec::with_capacity(traj.t.len());
    for (&t, x) in traj.t.iter().zip(&traj.x).rev() {
        if grid.last().is_some_and(|&g| t <= g) {
            continue;
        }
        grid.push(t);
        s.push(x[0]);
        log_v.push(x[1] - shift);
    }
    Ok(ExteriorEigenfunction {
        n: model.n,
        r0,
        grid,
        s,
        log_v,
    })
}

impl ExteriorEigenfunction {
    fn ds_node(&self, model: &ModelManifold, i: usize) -> f64 {
        let w = model.w(self.grid[i]).unwrap_or(f64::NAN);
        1.0 - self.s[i] * self.s[i] - (self.n as f64 - 1.0) * w * self.s[i]
    }

    /// `(s, s', ln v)` at `t`.
    pub fn state(&self, model: &ModelManifold, t: f64) -> Result<(f64, f64, f64)> {
        let i = locate(&self.grid, t, "eigenfunction radius")?;
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let (s, ds, _) = hermite(t0, t1, self.s[i], self.s[i + 1], self.ds_node(model, i), self.ds_node(model, i + 1), t);
        let (lv, _, _) = hermite(t0, t1, self.log_v[i], self.log_v[i + 1], self.s[i], self.s[i + 1], t);
        Ok((s, ds, lv))
    }

    pub fn value(&self, model: &ModelManifold, t: f64) -> Result<f64> {
        Ok(self.state(model, t)?.2.exp())
    }

    /// Largest `|v'' + (n-1)wv' - v| / v` relative to the size of its terms,
    /// at the quarter points of every interval in `[a, b]`.
    pub fn residual(&self, model: &ModelManifold, a: f64, b: f64) -> Result<f64> {
        let nm1 = self.n as f64 - 1.0;
        let mut worst: f64 = 0.0;
        for k in 0..self.grid.len() - 1 {
            let (t0, t1) = (self.grid[k], self.grid[k + 1]);
            if t0 < a || t1 > b {
                continue;
            }
            for f in [0.25, 0.5, 0.75] {
                let t = t0 + f * (t1 - t0);
                let (s, ds, _) = self.state(model, t)?;
                let w = model.w(t)?;
                let r = (ds + s * s + nm1 * w * s - 1.0).abs();
                let scale = 1.0 + ds.abs() + s * s + (nm1 * w * s).abs();
                worst = worst.max(r / scale);
            }
        }
        Ok(worst)
    }

    pub fn to_radial(&self, model: &ModelManifold) -> RadialFunction {
        let me = self.clone();
        let m = model.clone();
        let nm1 = self.n as f64 - 1.0;
        RadialFunction::new(
            format!("exterior[r0={}]", self.r0),
            (self.r0, *self.grid.last().unwrap()),
            Vec::new(),
            move |t| {
                let (Ok((s, _, lv)), Ok(w)) = (me.state(&m, t), m.w(t)) else {
                    return Jet::ZERO;
                };
                Jet {
                    log_scale: lv,
                    v: 1.0,
                    d1: s,
                    d2: 1.0 - nm1 * w * s,
                }
            },
        )
    }
}

/// `sup_{[R, γR]} |v'|/(λ(R) v)`.
pub fn li_yau_ratio<L>(model: &ModelManifold, v: &ExteriorEigenfunction, lambda: L, r: f64, gamma: f64) -> Result<f64>
where
    L: Fn(f64) -> Result<f64>,
{
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    let hi = gamma * r;
    let end = *v.grid.last().unwrap();
    if r < v.r0 || hi > end * (1.0 + 1e-12) {
        return Err(range_error("Li-Yau annulus", if r < v.r0 { r } else { hi }, v.r0, end));
    }
    let lam = lambda(r)?;
    if !(lam > 0.0) {
        return Err(Error::Domain(format!("lambda(R) must be positive, got {lam}")));
    }
    let mut pts: Vec<f64> = vec![r, hi.min(end)];
    pts.extend(v.grid.iter().copied().filter(|&g| g > r && g < hi));
    pts.extend((1..256).map(|k| r + (hi - r) * k as f64 / 256.0));
    let mut sup: f64 = 0.0;
    for t in pts {
        sup = sup.max(v.state(model, t)?.0.abs());
    }
    Ok(sup / lam)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    Complete,
    Incomplete,
    Inconclusive,
}

/// Outcome of the stochastic-completeness test on `u(t) = ∫_0^t y`, which
/// solves `Δu = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StochasticReport {
    pub verdict: Completeness,
    /// `(T, ∫_T^{2T} y)` for the last three doublings below `t_max`.
    pub increments: Vec<(f64, f64)>,
    /// Ratios of successive increments.
    pub ratios: Vec<f64>,
    pub u_at_tmax: f64,
    /// Largest `|y' + (n-1)wy - 1|` at interval midpoints.
    pub identity_residual: f64,
}

/// Increments ratio below which `u` is declared bounded.
pub const INCOMPLETE_RATIO: f64 = 0.95;
/// Increments ratio from which `u` is declared unbounded.
pub const COMPLETE_RATIO: f64 = 0.97;

/// `∫_a^b y` on the Hermite interpolant (exact for it).
fn integral_y(model: &ModelManifold, a: f64, b: f64) -> Result<f64> {
    let mut pts = vec![a];
    pts.extend_from_slice(model.nodes_between(a, b));
    pts.push(b);
    let mut total = 0.0;
    for s in pts.windows(2) {
        let (x0, x1) = (s[0], s[1]);
        let h = x1 - x0;
        let (s0, s1) = (model.state(x0)?, model.state(x1)?);
        total += 0.5 * h * (s0.y + s1.y) + h * h * (s0.dy - s1.dy) / 12.0;
    }
    Ok(total)
}

pub fn classify_stochastic_completeness(model: &ModelManifold) -> Result<StochasticReport> {
    if model.t_max < 100.0 {
        return Err(Error::Configuration(format!(
            "classification needs t_max >= 100, got {}",
            model.t_max
        )));
    }
    let tm = model.t_max;
    let increments: Vec<(f64, f64)> = [tm / 8.0, tm / 4.0, tm / 2.0]
        .iter()
        .map(|&t| Ok((t, integral_y(model, t, 2.0 * t)?)))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = increments.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let verdict = if ratios.iter().all(|&r| r < INCOMPLETE_RATIO) {
        Completeness::Incomplete
    } else if ratios.iter().all(|&r| r >= COMPLETE_RATIO) {
        Completeness::Complete
    } else {
        Completeness::Inconclusive
    };
    let nm1 = model.n as f64 - 1.0;
    let mut resid: f64 = 0.0;
    for k in 0..model.grid.len() - 1 {
        let t = 0.5 * (model.grid[k] + model.grid[k + 1]);
        let s = model.state(t)?;
        resid = resid.max((s.dy + nm1 * s.w * s.y - 1.0).abs());
    }
    Ok(StochasticReport {
        verdict,
        increments,
        ratios,
        u_at_tmax: integral_y(model, model.grid[0], tm)? + 0.5 * model.grid[0] * model.y[0],
        identity_residual: resid,
    })
}

/// The four pairing terms at one cutoff radius; `total → ∫uψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingRow {
    pub r: f64,
    /// `-∫ u χ Δv`.
    pub laplacian_v: f64,
    /// `-∫ u v Δχ`.
    pub laplacian_chi: f64,
    /// `-2 ∫ u ⟨∇v, ∇χ⟩`.
    pub gradient: f64,
    /// `∫ u χ v`.
    pub mass: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityReport {
    pub exhaustion_radius: f64,
    pub min_u: f64,
    pub sup_u: f64,
    /// `min u ≥ -1e-8 ‖u‖_∞`.
    pub positive: bool,
    /// `∫ u ψ`.
    pub target: f64,
    pub pairing: Vec<PairingRow>,
    /// The `Δχ` and `∇χ` terms decrease and end below `1e-3 |∫uψ|`.
    pub cutoff_terms_decay: bool,
}

/// Solves `(-Δ+1)u = μ` on `B_{2 max R}` and pairs `u` with `χ_R v`, where
/// `(-Δ+1)v = ψ`.
pub fn positivity_probe(
    model: &ModelManifold,
    mu: &RadialFunction,
    psi: &RadialFunction,
    radii: &[f64],
    opts: &ExhaustionOptions,
) -> Result<PositivityReport> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("probe radii must be increasing".into()));
    }
    let big = 2.0 * radii.last().unwrap();
    model.check_range(big)?;
    let mut all = radii.to_vec();
    all.push(big);
    let o = ExhaustionOptions {
        require_compact: false,
        ..*opts
    };
    // both problems on the same mesh
    let mut joint_breaks: Vec<f64> = all.clone();
    for f in [mu, psi] {
        if !f.is_empty() {
            joint_breaks.extend([f.support.0, f.support.1]);
            joint_breaks.extend_from_slice(&f.breaks);
        }
    }
    let u = solve_level(model, mu, &joint_breaks, big, &[], &o)?.0;
    let v = solve_level(model, psi, &joint_breaks, big, &[], &o)?.0;
    let min_u = u.v[..u.v.len() - 1].iter().copied().fold(f64::INFINITY, f64::min).min(u.min_interior);
    let sup_u = u.sup_norm;
    let positive = min_u >= -1e-8 * sup_u;
    let n = model.n as f64;
    let nodes = u.t.len() - 1;
    // volumes overflow where the solutions underflow, so products are formed
    // in log scale
    let prod = |log_vol: f64, factors: &[f64]| -> f64 {
        let mut l = log_vol;
        let mut sign = 1.0;
        for &f in factors {
            if f == 0.0 {
                return 0.0;
            }
            l += f.abs().ln();
            sign *= f.signum();
        }
        sign * l.exp()
    };
    let target: f64 = (0..nodes).map(|i| prod(u.log_vol[i], &[u.v[i], v.psi_mean[i]])).sum();
    let pairing: Vec<PairingRow> = radii
        .par_iter()
        .map(|&r| {
            let chi = make_hessian_cutoff(model, r)?;
            let (mut lap_v, mut lap_chi, mut grad, mut mass) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..nodes {
                let t = u.t[i];
                let lv = u.log_vol[i];
                let c = chi.jet(t);
                mass += prod(lv, &[u.v[i], c.v, v.v[i]]);
                lap_v += prod(lv, &[u.v[i], c.v, v.psi_mean[i] - v.v[i]]);
                if t > 0.0 {
                    let w = model.w(t)?;
                    lap_chi -= prod(lv, &[u.v[i], v.v[i], c.d2 + (n - 1.0) * w * c.d1]);
                }
                // face between i and i+1
                let (t0, t1) = (u.t[i], u.t[i + 1]);
                let h = t1 - t0;
                let m = 0.5 * (t0 + t1);
                let dv = (v.v[i + 1] - v.v[i]) / h;
                let um = 0.5 * (u.v[i] + u.v[i + 1]);
                grad -= 2.0 * prod(u.log_face[i] + 2.0 * h.ln(), &[um, dv, chi.jet(m).d1]);
            }
            Ok(PairingRow {
                r,
                laplacian_v: lap_v,
                laplacian_chi: lap_chi,
                gradient: grad,
                mass,
                total: lap_v + lap_chi + grad + mass,
            })
        })
        .collect::<Result<_>>()?;
    let decay = |col: Vec<f64>| {
        let strict = col.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
        strict && col.last().is_none_or(|&x| x < 1e-3 * target.abs())
    };
    let cutoff_terms_decay = target == 0.0
        || (decay(pairing.iter().map(|p| p.laplacian_chi.abs()).collect())
            && decay(pairing.iter().map(|p| p.gradient.abs()).collect()));
    Ok(PositivityReport {
        exhaustion_radius: big,
        min_u,
        sup_u,
        positive,
        target,
        pairing,
        cutoff_terms_decay,
    })
}

/// Report-only `‖∇v‖_q ≤ C(‖v‖_q + ‖Δv‖_q)` for the solution of
/// `(-Δ+1)v = ψ` on `B_R`, using `Δv = v - ψ`.
pub fn gradient_probe(model: &ModelManifold, psi: &RadialFunction, r: f64, q_list: &[f64], opts: &ExhaustionOptions) -> Result<InequalityReport> {
    if q_list.iter().any(|q| !(*q >= 1.0)) {
        return Err(Error::Domain("exponents must be at least 1".into()));
    }
    model.check_range(r)?;
    let o = ExhaustionOptions {
        require_compact: false,
        ..*opts
    };
    let lvl = solve_level(model, psi, &[r], r, &[], &o)?.0;
    let nodes = lvl.t.len() - 1;
    let records = q_list
        .iter()
        .map(|&q| {
            let mut lg = f64::NEG_INFINITY;
            let mut lv = f64::NEG_INFINITY;
            let mut ll = f64::NEG_INFINITY;
            for i in 0..nodes {
                let h = lvl.t[i + 1] - lvl.t[i];
                let dv = (lvl.v[i + 1] - lvl.v[i]) / h;
                if dv != 0.0 {
                    lg = log_add(lg, lvl.log_face[i] + 2.0 * h.ln() + q * dv.abs().ln());
                }
                if lvl.v[i] != 0.0 {
                    lv = log_add(lv, lvl.log_vol[i] + q * lvl.v[i].abs().ln());
                }
                let lap = lvl.v[i] - lvl.psi_mean[i];
                if lap != 0.0 {
                    ll = log_add(ll, lvl.log_vol[i] + q * lap.abs().ln());
                }
            }
            Record::from_logs(format!("q={q}"), lg / q, log_add(lv / q, ll / q))
        })
        .collect();
    Ok(InequalityReport::new("gradient_lq", records, None, 0.0))
}

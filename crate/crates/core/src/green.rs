//! Radial p-Green functions, tabulated through the Green ratio
//! `z = G/|G'|`, which solves `z' = -1 + q w z` with `q = (n-1)/(p-1)`.
//!
//! The normalization is `G' = -j^{-q}`, so `log G = log z - q log j`.

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureProfile;
use crate::error::{Error, Result};
use crate::geometry::ModelManifold;
use crate::interp::{hermite, locate};
use crate::ode::{integrate, Options, System};
use crate::radial::{p_laplacian_relative, Jet, RadialFunction};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenFunction {
    pub p: f64,
    pub n: usize,
    /// `(n-1)/(p-1)`.
    pub q: f64,
    pub grid: Vec<f64>,
    pub z: Vec<f64>,
    pub log_g: Vec<f64>,
    /// Smallest node with `G ≤ e^{-1}`.
    pub r_k: f64,
    /// Radius at which the backward integration was seeded.
    pub seed_radius: f64,
}

struct GreenRatio<'a> {
    model: &'a ModelManifold,
    q: f64,
}

impl GreenRatio<'_> {
    fn w(&self, t: f64) -> f64 {
        self.model.w(t).unwrap_or(f64::NAN)
    }
}

impl System<1> for GreenRatio<'_> {
    fn rhs(&self, t: f64, x: &[f64; 1]) -> [f64; 1] {
        [-1.0 + self.q * self.w(t) * x[0]]
    }

    fn jacobian(&self, t: f64, _x: &[f64; 1]) -> [[f64; 1]; 1] {
        [[self.q * self.w(t)]]
    }
}

fn is_flat(profile: &CurvatureProfile) -> bool {
    match profile {
        CurvatureProfile::Flat => true,
        CurvatureProfile::PowerLaw { a, .. } => *a == 0.0,
        _ => false,
    }
}

/// Builds `G_p` on `model`, seeding the backward integration at `t_max`.
pub fn build_green(model: &ModelManifold, p: f64) -> Result<GreenFunction> {
    build_green_seeded_at(model, p, model.t_max)
}

/// As [`build_green`], with the seed placed at the model node nearest to
/// `t_seed`.
pub fn build_green_seeded_at(model: &ModelManifold, p: f64, t_seed: f64) -> Result<GreenFunction> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("Green function needs p > 1, got {p}")));
    }
    let n = model.n;
    let q = (n as f64 - 1.0) / (p - 1.0);
    let flat = is_flat(&model.profile);
    if flat && !(n as f64 > p) {
        return Err(Error::Construction(format!(
            "flat space of dimension {n} is not {p}-hyperbolic (needs n > p)"
        )));
    }
    if !flat && !(model.kappa.last().copied().unwrap_or(0.0) > 0.0) {
        return Err(Error::Construction(
            "curvature must be eventually positive for p-hyperbolicity".into(),
        ));
    }
    let k_end = locate(&model.grid, t_seed.min(model.t_max), "Green seed radius")?;
    let k_end = if (model.grid[k_end + 1] - t_seed).abs() < (t_seed - model.grid[k_end]).abs() {
        k_end + 1
    } else {
        k_end
    };
    let t_end = model.grid[k_end];
    let z_seed = if flat {
        t_end * (p - 1.0) / (n as f64 - p)
    } else {
        // slow manifold of z' = -1 + q w z to first order
        let w = model.w[k_end];
        let dw = model.kappa[k_end] - w * w;
        (1.0 - dw / (q * w * w)) / (q * w)
    };
    let stops: Vec<f64> = model.grid[..k_end].iter().rev().copied().collect();
    let sys = GreenRatio { model, q };
    let opts = Options {
        tol: model.tol,
        floors: [1e-300],
        h_init: 0.01 * (t_end - model.grid[k_end.saturating_sub(1)]).max(1e-12),
        max_steps: 4_000_000,
    };
    let traj = integrate(&sys, t_end, [z_seed], &stops, &opts)?;
    let mut grid = Vec::with_capacity(traj.t.len());
    let mut z = Vec::with_capacity(traj.t.len());
    for (&t, x) in traj.t.iter().zip(&traj.x).rev() {
        if !(x[0] > 0.0) || !x[0].is_finite() {
            return Err(Error::Integration {
                t,
                reason: format!("Green ratio z = {} left the positive range", x[0]),
            });
        }
        grid.push(t);
        z.push(x[0]);
    }
    let mut log_g = Vec::with_capacity(grid.len());
    for (&t, &zi) in grid.iter().zip(&z) {
        log_g.push(zi.ln() - q * model.logj(t)?);
    }
    let idx = log_g.partition_point(|&l| l > -1.0);
    if idx >= grid.len() {
        return Err(Error::Construction(format!(
            "G_p stays above 1/e up to t = {t_end}; enlarge t_max"
        )));
    }
    Ok(GreenFunction {
        p,
        n,
        q,
        r_k: grid[idx],
        grid,
        z,
        log_g,
        seed_radius: t_end,
    })
}

/// Fitted and closed-form asymptotic constants of `G'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeFit {
    pub fitted: f64,
    pub predicted: f64,
}

impl DerivativeFit {
    pub fn relative_error(&self) -> f64 {
        (self.fitted - self.predicted).abs() / self.predicted
    }
}

/// `z`, `z'`, `log G` and `(log G)' = -1/z` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenState {
    pub z: f64,
    pub dz: f64,
    pub log_g: f64,
}

impl GreenFunction {
    fn dz_node(&self, model: &ModelManifold, i: usize) -> f64 {
        let w = model.w(self.grid[i]).unwrap_or(f64::NAN);
        -1.0 + self.q * w * self.z[i]
    }

    pub fn state(&self, model: &ModelManifold, t: f64) -> Result<GreenState> {
        let i = locate(&self.grid, t, "Green function radius")?;
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let (z, dz, _) = hermite(t0, t1, self.z[i], self.z[i + 1], self.dz_node(model, i), self.dz_node(model, i + 1), t);
        let (log_g, _, _) = hermite(t0, t1, self.log_g[i], self.log_g[i + 1], -1.0 / self.z[i], -1.0 / self.z[i + 1], t);
        Ok(GreenState { z, dz, log_g })
    }

    pub fn z_at(&self, model: &ModelManifold, t: f64) -> Result<f64> {
        Ok(self.state(model, t)?.z)
    }

    pub fn log_g_at(&self, model: &ModelManifold, t: f64) -> Result<f64> {
        Ok(self.state(model, t)?.log_g)
    }

    /// Jet of `G` itself in log scale.
    pub fn jet(&self, model: &ModelManifold, t: f64) -> Result<Jet> {
        let s = self.state(model, t)?;
        Ok(Jet {
            log_scale: s.log_g,
            v: 1.0,
            d1: -1.0 / s.z,
            d2: (1.0 + s.dz) / (s.z * s.z),
        })
    }

    /// The `p`-th root of the Hardy weight, `(1/z)(-log G)^β`. For `β > 0`
    /// it is only defined from `r_K` on.
    pub fn hardy_weight(&self, model: &ModelManifold, beta: f64, t: f64) -> Result<f64> {
        if beta > 0.0 && t < self.r_k {
            return Err(Error::Domain(format!(
                "Hardy weight undefined at t = {t} below r_K = {}",
                self.r_k
            )));
        }
        let s = self.state(model, t)?;
        Ok((-s.log_g).powf(beta) / s.z)
    }

    /// Largest relative p-Laplacian residual of `G` at the quarter, half and
    /// three-quarter points of every interval beyond the first node.
    pub fn superharmonicity_residual(&self, model: &ModelManifold) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() - 1 {
            let (t0, t1) = (self.grid[i], self.grid[i + 1]);
            for f in [0.25, 0.5, 0.75] {
                let t = t0 + f * (t1 - t0);
                let j = self.jet(model, t)?;
                let w = model.w(t)?;
                if let Some(r) = p_laplacian_relative(&j, w, self.n, self.p) {
                    worst = worst.max(r);
                }
            }
        }
        Ok(worst)
    }

    /// Largest relative change of `z` on `[r_K, t_max/2]` when the seed is
    /// moved to `0.9 t_max`.
    pub fn seed_sensitivity(&self, model: &ModelManifold) -> Result<f64> {
        let other = build_green_seeded_at(model, self.p, 0.9 * model.t_max)?;
        let mut worst: f64 = 0.0;
        for (&t, &z) in self.grid.iter().zip(&self.z) {
            if t < self.r_k || t > 0.5 * model.t_max {
                continue;
            }
            let zo = other.z_at(model, t)?;
            worst = worst.max((zo - z).abs() / z);
        }
        Ok(worst)
    }

    /// Radius where `-log G = s`, by bisection on the interpolant.
    pub fn radius_at(&self, model: &ModelManifold, s: f64) -> Result<f64> {
        let target = -s;
        let idx = self.log_g.partition_point(|&l| l > target);
        if idx == 0 || idx >= self.grid.len() {
            return Err(Error::Range {
                what: "-log G level".into(),
                value: s,
                lo: -self.log_g[0],
                hi: -*self.log_g.last().unwrap(),
            });
        }
        let (mut lo, mut hi) = (self.grid[idx - 1], self.grid[idx]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.log_g_at(model, mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Near-extremal Hardy test function `G^{(p-1)/p} ψ(-log G)` where `ψ` is
    /// a smoothstep plateau over `s ∈ [s0, s0 + len]` with ramps of
    /// `len/4` at each end.
    pub fn near_extremal(&self, model: &ModelManifold, inner_radius: f64, len: f64) -> Result<RadialFunction> {
        let start = inner_radius.max(self.r_k);
        let s0 = -self.log_g_at(model, start)?;
        let s1 = s0 + len;
        let t0 = start;
        let t1 = self.radius_at(model, s1)?;
        let ramp = 0.25 * len;
        let c = (self.p - 1.0) / self.p;
        let breaks = vec![self.radius_at(model, s0 + ramp)?, self.radius_at(model, s1 - ramp)?];
        let g = self.clone();
        let m = model.clone();
        let label = format!("extremal[p={},s0={s0:.6},len={len:.6}]", self.p);
        Ok(RadialFunction::new(label, (t0, t1), breaks, move |t| {
            let Ok(st) = g.state(&m, t) else {
                return Jet::ZERO;
            };
            let s = -st.log_g;
            let psi = Jet::ramp_up(s, s0, ramp).mul(&Jet::ramp_down(s, s1, ramp));
            // f = G^c ψ(s), s' = 1/z; with u = ψ_s - cψ: f' = G^c u/z and
            // f'' = G^c (u_s - c u - u z')/z²
            let u = psi.d1 - c * psi.v;
            let us = psi.d2 - c * psi.d1;
            Jet {
                log_scale: c * st.log_g,
                v: psi.v,
                d1: u / st.z,
                d2: (us - c * u - u * st.dz) / (st.z * st.z),
            }
        }))
    }

    /// Fitted and predicted constant `D₁` in
    /// `|G'| ~ D₁ t^{αq/4} exp(-2Aq t^{1+α/2}/(α+2))` for power-law profiles,
    /// fitted over the last decade against `t^{-1-α/2}`.
    pub fn derivative_fit(&self, model: &ModelManifold) -> Option<DerivativeFit> {
        let CurvatureProfile::PowerLaw { a, alpha } = model.profile else {
            return None;
        };
        if !(a > 0.0) {
            return None;
        }
        let q = self.q;
        let e = 1.0 + 0.5 * alpha;
        let pts: Vec<(f64, f64)> = model
            .grid
            .iter()
            .zip(&model.logj)
            .filter(|(&t, _)| t >= model.t_max / 10.0)
            .map(|(&t, &lj)| {
                let log_dg = -q * lj;
                (t.powf(-e), log_dg + 2.0 * a * q * t.powf(e) / (alpha + 2.0) - 0.25 * alpha * q * t.ln())
            })
            .collect();
        let (intercept, _) = crate::fit::linear_fit(&pts)?;
        // j = C √t I_ν(2Aν t^{1/(2ν)}) with j'(0) = 1
        let nu = 1.0 / (alpha + 2.0);
        let log_c = crate::specfun::ln_gamma(nu + 1.0).ok()? - nu * (a * nu).ln();
        let log_d0 = log_c - 0.5 * (4.0 * std::f64::consts::PI * a * nu).ln();
        Some(DerivativeFit {
            fitted: intercept.exp(),
            predicted: (-q * log_d0).exp(),
        })
    }

    /// The near-extremal family at `s`-window lengths `L/4`, `L/2`, `L`
    /// where `L` is the longest window that fits below `0.9 t_max`, capped
    /// at 64.
    pub fn near_extremal_family(&self, model: &ModelManifold, inner_radius: f64) -> Result<Vec<RadialFunction>> {
        let start = inner_radius.max(self.r_k);
        let s0 = -self.log_g_at(model, start)?;
        let s_hi = -self.log_g_at(model, 0.9 * model.t_max)?;
        let l_max = (s_hi - s0).min(64.0);
        if !(l_max > 0.0) {
            return Err(Error::Configuration(format!(
                "no room for near-extremal members beyond t = {start}"
            )));
        }
        [0.25, 0.5, 1.0]
            .iter()
            .map(|f| self.near_extremal(model, inner_radius, f * l_max))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_model;

    /// `z(t) = ∫_t^∞ exp(-q (log j(s) - log j(t))) ds` by Gauss-Legendre panels.
    fn z_oracle(model: &ModelManifold, q: f64, t: f64) -> f64 {
        let lj = model.logj(t).unwrap();
        let mut total = 0.0;
        let mut a = t;
        while a < model.t_max {
            let b = (a + 0.05).min(model.t_max);
            let xs = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
            let ws = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
            for (x, wt) in xs.iter().zip(ws) {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
                total += 0.5 * (b - a) * wt * (-q * (model.logj(s).unwrap() - lj)).exp();
            }
            a = b;
        }
        total
    }

    #[test]
    fn flat_green() {
        let m = build_model(3, CurvatureProfile::Flat, 50.0, 1e-10).unwrap();
        let g = build_green(&m, 2.0).unwrap();
        assert!((g.log_g_at(&m, 2.0).unwrap().exp() - 0.5).abs() < 1e-9);
        assert!((g.z_at(&m, 2.0).unwrap() - 2.0).abs() < 1e-8);
        assert!((g.r_k - std::f64::consts::E).abs() < 0.05);
        assert!((g.hardy_weight(&m, 0.0, 2.0).unwrap() - 0.5).abs() < 1e-8);
        assert!(g.hardy_weight(&m, 1.0, 2.0).is_err());
        let e2 = std::f64::consts::E.powi(2);
        assert!((g.hardy_weight(&m, 1.0, e2).unwrap() - 2.0 / e2).abs() < 1e-8);
        assert!(g.superharmonicity_residual(&m).unwrap() < 1e-9);
        assert!(build_green(&m, 3.0).is_err());
    }

    #[test]
    fn hyperbolic_plane_green() {
        let m = build_model(2, CurvatureProfile::PowerLaw { a: 1.0, alpha: 0.0 }, 40.0, 1e-10).unwrap();
        let g = build_green(&m, 2.0).unwrap();
        let exact = (1.0 / 0.5f64.tanh()).ln();
        assert!((g.log_g_at(&m, 1.0).unwrap().exp() - exact).abs() < 1e-9);
        assert!((g.z_at(&m, 1.0).unwrap() - 1f64.sinh() * exact).abs() < 1e-8);
        assert!(g.superharmonicity_residual(&m).unwrap() < 1e-8);
        for i in 1..g.log_g.len() {
            assert!(g.log_g[i] < g.log_g[i - 1]);
        }
        assert!(g.seed_sensitivity(&m).unwrap() < 1e-8);
    }

    #[test]
    fn quadrature_oracle_p3() {
        let m = build_model(3, CurvatureProfile::PowerLaw { a: 1.0, alpha: 1.0 }, 20.0, 1e-10).unwrap();
        let g = build_green(&m, 3.0).unwrap();
        for &t in &[0.5, 1.0, 2.5, 6.0] {
            let z = g.z_at(&m, t).unwrap();
            let o = z_oracle(&m, g.q, t);
            assert!((z - o).abs() < 1e-8 * o, "t={t}: {z} vs {o}");
        }
        assert!(g.superharmonicity_residual(&m).unwrap() < 1e-7);
    }

    #[test]
    fn identity_and_weight_growth() {
        let m = build_model(3, CurvatureProfile::PowerLaw { a: 1.0, alpha: 2.0 }, 40.0, 1e-10).unwrap();
        let g = build_green(&m, 2.0).unwrap();
        for (i, &t) in g.grid.iter().enumerate() {
            let lj = m.logj(t).unwrap();
            assert!((g.log_g[i] - (g.z[i].ln() - g.q * lj)).abs() <= 1e-12 * g.log_g[i].abs().max(1.0));
        }
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let t = 10.0 * 3f64.powf(i as f64 / 20.0);
                (t, g.hardy_weight(&m, 0.5, t).unwrap())
            })
            .collect();
        let slope = crate::fit::loglog_slope(&pts).unwrap();
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn non_hyperbolic_rejected() {
        let m = build_model(2, CurvatureProfile::Flat, 10.0, 1e-8).unwrap();
        assert!(matches!(build_green(&m, 2.0), Err(Error::Construction(_))));
        assert!(build_green(&m, 1.0).is_err());
    }
}

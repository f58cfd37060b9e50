//! The model-manifold engine.
//!
//! `build_model` integrates `w' = κ - w²`, `(log j)' = w` and
//! `y' = 1 - (n-1) w y` from a series start near the pole and tabulates the
//! result for cubic Hermite interpolation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureProfile;
use crate::error::{range_error, Error, Result};
use crate::fit::linear_fit;
use crate::interp::{hermite, locate};
use crate::ode::{integrate, Options, System};
use crate::specfun::ln_gamma;

/// Version tag of the serialized model document.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Start of the numerical integration; closer to the pole the two-term
/// series is used.
pub const T_START: f64 = 1e-6;

/// Integer checkpoints are forced up to this radius.
const CHECKPOINT_LIMIT: f64 = 2048.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelManifold {
    pub format_version: u32,
    pub n: usize,
    pub profile: CurvatureProfile,
    pub t_max: f64,
    pub tol: f64,
    pub grid: Vec<f64>,
    pub w: Vec<f64>,
    pub logj: Vec<f64>,
    pub y: Vec<f64>,
    /// `κ` at the nodes; together with the state it gives the node slopes.
    pub kappa: Vec<f64>,
}

/// Interpolated state at one radius, with first derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub w: f64,
    pub dw: f64,
    pub logj: f64,
    pub y: f64,
    pub dy: f64,
}

/// Maximum weak-form residuals of the three defining relations, each relative
/// to the size of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub riccati: f64,
    pub log_warp: f64,
    pub volume: f64,
}

/// Fitted asymptotic constants of a power-law model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFits {
    /// Limit of `w / (A t^{α/2})` over the last decade.
    pub w_ratio_limit: f64,
    /// `y · t^{α/2}` at `t_max`.
    pub y_constant: f64,
    /// Largest relative change of `y · t^{α/2}` across the last two doublings.
    pub y_drift: f64,
}

struct Jacobi<'a> {
    n: f64,
    profile: &'a CurvatureProfile,
}

impl System<3> for Jacobi<'_> {
    fn rhs(&self, t: f64, x: &[f64; 3]) -> [f64; 3] {
        let k = self.profile.kappa(t).unwrap_or(f64::NAN);
        [k - x[0] * x[0], x[0], 1.0 - (self.n - 1.0) * x[0] * x[2]]
    }

    fn jacobian(&self, _t: f64, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let m = self.n - 1.0;
        [
            [-2.0 * x[0], 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [-m * x[2], 0.0, -m * x[0]],
        ]
    }
}

/// `ln` of the area of the unit `(n-1)`-sphere, `2π^{n/2}/Γ(n/2)`.
pub fn log_unit_sphere_area(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    (2.0_f64).ln() + h * PI.ln() - ln_gamma(h).expect("n >= 1")
}

fn series_state(n: usize, kappa0: f64, t: f64) -> State {
    let nf = n as f64;
    let c = kappa0 / 6.0;
    State {
        w: 1.0 / t + kappa0 * t / 3.0,
        dw: -1.0 / (t * t) + kappa0 / 3.0,
        logj: t.ln() + c * t * t,
        y: t / nf - 2.0 * (nf - 1.0) * c * t.powi(3) / (nf * (nf + 2.0)),
        dy: 1.0 / nf - 6.0 * (nf - 1.0) * c * t * t / (nf * (nf + 2.0)),
    }
}

/// Integrates the Jacobi equation for `profile` in dimension `n` up to `t_max`.
pub fn build_model(n: usize, profile: CurvatureProfile, t_max: f64, tol: f64) -> Result<ModelManifold> {
    if n < 2 {
        return Err(Error::Configuration(format!("dimension must be >= 2, got {n}")));
    }
    if !(t_max > 1.0) || !t_max.is_finite() {
        return Err(Error::Configuration(format!("t_max must exceed 1, got {t_max}")));
    }
    if !(tol > 1e-14 && tol < 1e-4) {
        return Err(Error::Configuration(format!("tol must lie in (1e-14, 1e-4), got {tol}")));
    }
    profile.validate()?;
    let mut stops: Vec<f64> = Vec::new();
    let last_int = t_max.min(CHECKPOINT_LIMIT).floor() as usize;
    stops.extend((1..=last_int).map(|i| i as f64));
    match &profile {
        CurvatureProfile::Tabulated { t, .. } => {
            if t[0] > 0.0 || *t.last().unwrap() < t_max {
                return Err(Error::Configuration(format!(
                    "tabulated profile covers [{}, {}] but the model needs [0, {t_max}]",
                    t[0],
                    t.last().unwrap()
                )));
            }
            stops.extend(t.iter().copied());
        }
        CurvatureProfile::IteratedLog { t_onset, .. } => {
            stops.push(0.5 * t_onset);
            stops.push(*t_onset);
        }
        _ => {}
    }
    stops.push(t_max);
    stops.retain(|&s| s > T_START && s <= t_max);
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();

    let kappa0 = profile.kappa(T_START)?;
    let s0 = series_state(n, kappa0, T_START);
    let sys = Jacobi {
        n: n as f64,
        profile: &profile,
    };
    let opts = Options {
        tol,
        floors: [1e-30, 1.0, 1e-30],
        h_init: 0.05 * T_START,
        max_steps: 2_000_000,
    };
    let traj = integrate(&sys, T_START, [s0.w, s0.logj, s0.y], &stops, &opts)?;
    let mut grid = Vec::with_capacity(traj.t.len());
    let mut w = Vec::with_capacity(traj.t.len());
    let mut logj = Vec::with_capacity(traj.t.len());
    let mut y = Vec::with_capacity(traj.t.len());
    let mut kappa = Vec::with_capacity(traj.t.len());
    for (i, (&t, x)) in traj.t.iter().zip(&traj.x).enumerate() {
        if !(x[0] > 0.0) || !x[0].is_finite() {
            return Err(Error::Integration {
                t,
                reason: format!("w = {} is not positive", x[0]),
            });
        }
        if !(x[2] > 0.0) || !x[2].is_finite() {
            return Err(Error::Integration {
                t,
                reason: format!("volume ratio y = {} is not positive", x[2]),
            });
        }
        if i > 0 && !(x[1] > logj[i - 1]) {
            return Err(Error::Integration {
                t,
                reason: "log j failed to increase".into(),
            });
        }
        grid.push(t);
        w.push(x[0]);
        logj.push(x[1]);
        y.push(x[2]);
        kappa.push(profile.kappa(t)?);
    }
    Ok(ModelManifold {
        format_version: MODEL_FORMAT_VERSION,
        n,
        profile,
        t_max,
        tol,
        grid,
        w,
        logj,
        y,
        kappa,
    })
}

impl ModelManifold {
    fn nm1(&self) -> f64 {
        self.n as f64 - 1.0
    }

    fn dw_node(&self, i: usize) -> f64 {
        self.kappa[i] - self.w[i] * self.w[i]
    }

    fn dy_node(&self, i: usize) -> f64 {
        1.0 - self.nm1() * self.w[i] * self.y[i]
    }

    pub fn check_range(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || t > self.t_max * (1.0 + 1e-12) {
            return Err(range_error("model radius", t, 0.0, self.t_max));
        }
        Ok(())
    }

    /// Interpolated state at `t ∈ (0, t_max]`.
    pub fn state(&self, t: f64) -> Result<State> {
        self.check_range(t)?;
        if t < self.grid[0] {
            let k0 = self.kappa[0];
            return Ok(series_state(self.n, k0, t));
        }
        let i = locate(&self.grid, t, "model radius")?;
        Ok(self.state_in(i, t))
    }

    /// Interpolated state on the interval `[grid[i], grid[i+1]]`.
    pub fn state_in(&self, i: usize, t: f64) -> State {
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let (w, dw, _) = hermite(t0, t1, self.w[i], self.w[i + 1], self.dw_node(i), self.dw_node(i + 1), t);
        let (logj, _, _) = hermite(t0, t1, self.logj[i], self.logj[i + 1], self.w[i], self.w[i + 1], t);
        let (y, dy, _) = hermite(t0, t1, self.y[i], self.y[i + 1], self.dy_node(i), self.dy_node(i + 1), t);
        State { w, dw, logj, y, dy }
    }

    pub fn w(&self, t: f64) -> Result<f64> {
        Ok(self.state(t)?.w)
    }

    pub fn logj(&self, t: f64) -> Result<f64> {
        Ok(self.state(t)?.logj)
    }

    pub fn y(&self, t: f64) -> Result<f64> {
        Ok(self.state(t)?.y)
    }

    pub fn kappa_at(&self, t: f64) -> Result<f64> {
        self.profile.kappa(t)
    }

    /// `Δr = (n-1) j'/j`.
    pub fn laplacian_distance(&self, t: f64) -> Result<f64> {
        Ok(self.nm1() * self.w(t)?)
    }

    /// `ln |∂B_t| = (n-1) log j(t) + ln |S^{n-1}|`.
    pub fn log_area(&self, t: f64) -> Result<f64> {
        Ok(self.nm1() * self.logj(t)? + log_unit_sphere_area(self.n))
    }

    /// Nodes strictly inside `(a, b)`.
    pub fn nodes_between(&self, a: f64, b: f64) -> &[f64] {
        let lo = self.grid.partition_point(|&g| g <= a);
        let hi = self.grid.partition_point(|&g| g < b);
        if lo >= hi {
            &[]
        } else {
            &self.grid[lo..hi]
        }
    }

    /// Weak-form residuals of the defining relations over every interval:
    /// `(x_{i+1}-x_i)/h` against the Gauss mean of the right-hand side
    /// evaluated on the interpolants.
    pub fn residuals(&self) -> Result<Residuals> {
        const GX: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        const GW: [f64; 5] = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let mut out = Residuals {
            riccati: 0.0,
            log_warp: 0.0,
            volume: 0.0,
        };
        let m = self.nm1();
        for i in 0..self.grid.len() - 1 {
            let (t0, t1) = (self.grid[i], self.grid[i + 1]);
            let h = t1 - t0;
            let (mut ric, mut ric_scale, mut lw, mut vol, mut vol_scale) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (x, wt) in GX.iter().zip(GW) {
                let t = 0.5 * (t0 + t1) + 0.5 * h * x;
                let s = self.state_in(i, t);
                let k = self.profile.kappa(t)?;
                ric += 0.5 * wt * (k - s.w * s.w);
                ric_scale += 0.5 * wt * (k + s.w * s.w);
                lw += 0.5 * wt * s.w;
                vol += 0.5 * wt * (1.0 - m * s.w * s.y);
                vol_scale += 0.5 * wt * (1.0 + m * s.w * s.y);
            }
            out.riccati = out.riccati.max(((self.w[i + 1] - self.w[i]) / h - ric).abs() / ric_scale);
            out.log_warp = out.log_warp.max(((self.logj[i + 1] - self.logj[i]) / h - lw).abs() / lw);
            out.volume = out.volume.max(((self.y[i + 1] - self.y[i]) / h - vol).abs() / vol_scale);
        }
        Ok(out)
    }

    /// Asymptotic constants for power-law profiles; `None` otherwise.
    pub fn fits(&self) -> Option<ModelFits> {
        let CurvatureProfile::PowerLaw { a, alpha } = self.profile else {
            return None;
        };
        if !(a > 0.0) {
            return None;
        }
        let h = 0.5 * alpha;
        let lo = self.t_max / 10.0;
        let pts: Vec<(f64, f64)> = self
            .grid
            .iter()
            .zip(&self.w)
            .filter(|(&t, _)| t >= lo)
            .map(|(&t, &w)| (t.powf(-1.0 - h), w / (a * t.powf(h))))
            .collect();
        let (limit, _) = linear_fit(&pts)?;
        let c = |t: f64| self.y(t).map(|y| y * t.powf(h)).unwrap_or(f64::NAN);
        let (c1, c2, c3) = (c(self.t_max / 4.0), c(self.t_max / 2.0), c(self.t_max));
        let drift = ((c2 - c1) / c2).abs().max(((c3 - c2) / c3).abs());
        Some(ModelFits {
            w_ratio_limit: limit,
            y_constant: c3,
            y_drift: drift,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Configuration(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: ModelManifold = serde_json::from_str(s).map_err(|e| Error::Configuration(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Configuration(format!(
                "model document version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        let len = m.grid.len();
        if len < 2 || [m.w.len(), m.logj.len(), m.y.len(), m.kappa.len()].iter().any(|&l| l != len) {
            return Err(Error::Configuration("model document arrays are inconsistent".into()));
        }
        Ok(m)
    }
}

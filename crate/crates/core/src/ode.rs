//! Adaptive three-stage Radau IIA integrator (order 5, L-stable) for small
//! stiff systems.
//!
//! Step size is controlled by step doubling, plus a check that the cubic
//! Hermite interpolant through the step endpoints reproduces the half-step
//! value. Both the half-step and the full-step states are kept as nodes, so
//! the returned trajectory can be interpolated to roughly `10·tol`.

use crate::error::{Error, Result};

const SQ6: f64 = 2.449_489_742_783_178;

const C: [f64; 3] = [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0];

const A: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQ6) / 360.0,
        (296.0 - 169.0 * SQ6) / 1800.0,
        (-2.0 + 3.0 * SQ6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQ6) / 1800.0,
        (88.0 + 7.0 * SQ6) / 360.0,
        (-2.0 - 3.0 * SQ6) / 225.0,
    ],
    [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
];

/// Right-hand side `x' = f(t, x)` with its Jacobian `∂f/∂x`.
pub trait System<const D: usize> {
    fn rhs(&self, t: f64, x: &[f64; D]) -> [f64; D];
    fn jacobian(&self, t: f64, x: &[f64; D]) -> [[f64; D]; D];
}

#[derive(Debug, Clone)]
pub struct Options<const D: usize> {
    /// Relative local error target.
    pub tol: f64,
    /// Per-component magnitude below which errors are measured absolutely.
    pub floors: [f64; D],
    /// First trial step (signed by the direction of integration internally).
    pub h_init: f64,
    pub max_steps: usize,
}

/// Nodes, states and right-hand sides along an integration.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<const D: usize> {
    pub t: Vec<f64>,
    pub x: Vec<[f64; D]>,
    pub dx: Vec<[f64; D]>,
}

/// Gaussian elimination with partial pivoting on a row-major `n×n` system.
/// Returns `false` for a numerically singular matrix.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        let pv = a[piv * n + col];
        if pv == 0.0 || !pv.is_finite() {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for r in col + 1..n {
            let m = a[r * n + col] / pv;
            if m != 0.0 {
                for k in col..n {
                    a[r * n + k] -= m * a[col * n + k];
                }
                b[r] -= m * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    b.iter().all(|v| v.is_finite())
}

/// One Radau IIA step by simplified-free (full) Newton iteration on the stage
/// increments. `None` when Newton fails to converge.
pub fn radau_step<const D: usize, S: System<D>>(
    sys: &S,
    t: f64,
    x: &[f64; D],
    h: f64,
    scale: &[f64; D],
    newton_tol: f64,
) -> Option<[f64; D]> {
    let n = 3 * D;
    let mut z = vec![0.0; n];
    let mut mat = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut prev_norm = f64::INFINITY;
    for iter in 0..25 {
        let mut f = [[0.0; D]; 3];
        let mut jac = [[[0.0; D]; D]; 3];
        for i in 0..3 {
            let mut xi = *x;
            for c in 0..D {
                xi[c] += z[i * D + c];
            }
            f[i] = sys.rhs(t + C[i] * h, &xi);
            jac[i] = sys.jacobian(t + C[i] * h, &xi);
        }
        for i in 0..3 {
            for c in 0..D {
                let mut g = z[i * D + c];
                for j in 0..3 {
                    g -= h * A[i][j] * f[j][c];
                }
                rhs[i * D + c] = -g;
            }
        }
        mat.iter_mut().for_each(|m| *m = 0.0);
        for i in 0..3 {
            for j in 0..3 {
                for r in 0..D {
                    for c in 0..D {
                        let mut v = -h * A[i][j] * jac[j][r][c];
                        if i == j && r == c {
                            v += 1.0;
                        }
                        mat[(i * D + r) * n + j * D + c] = v;
                    }
                }
            }
        }
        if !solve_dense(&mut mat, &mut rhs, n) {
            return None;
        }
        let mut norm: f64 = 0.0;
        for i in 0..3 {
            for c in 0..D {
                z[i * D + c] += rhs[i * D + c];
                norm = norm.max(rhs[i * D + c].abs() / scale[c]);
            }
        }
        if !norm.is_finite() {
            return None;
        }
        if norm <= newton_tol {
            let mut out = *x;
            for c in 0..D {
                out[c] += z[2 * D + c];
            }
            return Some(out);
        }
        if iter > 3 && norm > 0.9 * prev_norm {
            return None;
        }
        prev_norm = norm;
    }
    None
}

/// Integrates from `(t0, x0)` through every point of `stops` in order; the
/// last stop is the end point. Steps never straddle a stop. The trajectory
/// starts with the initial state.
pub fn integrate<const D: usize, S: System<D>>(
    sys: &S,
    t0: f64,
    x0: [f64; D],
    stops: &[f64],
    opts: &Options<D>,
) -> Result<Trajectory<D>> {
    let mut traj = Trajectory {
        t: vec![t0],
        x: vec![x0],
        dx: vec![sys.rhs(t0, &x0)],
    };
    let Some(&t_end) = stops.last() else {
        return Ok(traj);
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut x = x0;
    let mut h = dir * opts.h_init.abs();
    let mut prev_err: f64 = 1.0;
    let mut steps = 0usize;
    for &stop in stops {
        if dir * (stop - t) <= 0.0 {
            continue;
        }
        while dir * (stop - t) > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("step budget of {} exhausted", opts.max_steps),
                });
            }
            let remaining = stop - t;
            let mut last = false;
            if dir * (h - remaining) >= 0.0 {
                h = remaining;
                last = true;
            } else if dir * (2.0 * h - remaining) > 0.0 {
                // avoid a sliver before the stop
                h = 0.5 * remaining;
            }
            if h.abs() < 1e-14 * t.abs().max(1e-300) {
                return Err(Error::Integration {
                    t,
                    reason: "step size underflow (stiffness or singular coefficient)".into(),
                });
            }
            let mut scale = [0.0; D];
            for c in 0..D {
                scale[c] = x[c].abs().max(opts.floors[c]);
            }
            let ntol = 1e-3 * opts.tol;
            let outcome = (|| {
                let full = radau_step(sys, t, &x, h, &scale, ntol)?;
                let mid = radau_step(sys, t, &x, 0.5 * h, &scale, ntol)?;
                let end = radau_step(sys, t + 0.5 * h, &mid, 0.5 * h, &scale, ntol)?;
                Some((full, mid, end))
            })();
            let Some((full, mid, end)) = outcome else {
                h *= 0.25;
                continue;
            };
            let t_mid = t + 0.5 * h;
            let t_new = if last { stop } else { t + h };
            let f0 = traj.dx.last().copied().unwrap();
            let f_mid = sys.rhs(t_mid, &mid);
            let f_end = sys.rhs(t_new, &end);
            let mut err: f64 = 0.0;
            for c in 0..D {
                let sc = opts.tol * end[c].abs().max(x[c].abs()).max(opts.floors[c]);
                let e_step = (end[c] - full[c]).abs() / 31.0 / sc;
                let (herm, _, _) = crate::interp::hermite(t, t_new, x[c], end[c], f0[c], f_end[c], t_mid);
                let e_interp = (herm - mid[c]).abs() / 16.0 / (10.0 * sc);
                err = err.max(e_step).max(e_interp);
            }
            if !err.is_finite() {
                h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                traj.t.push(t_mid);
                traj.x.push(mid);
                traj.dx.push(f_mid);
                traj.t.push(t_new);
                traj.x.push(end);
                traj.dx.push(f_end);
                t = t_new;
                x = end;
                let e = err.max(1e-10);
                let fac = 0.9 * e.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0);
                h *= fac.clamp(0.2, 4.0);
                prev_err = e;
            } else {
                h *= (0.9 * err.powf(-1.0 / 5.0)).clamp(0.1, 0.9);
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);
    impl System<1> for Decay {
        fn rhs(&self, _t: f64, x: &[f64; 1]) -> [f64; 1] {
            [-self.0 * x[0]]
        }
        fn jacobian(&self, _t: f64, _x: &[f64; 1]) -> [[f64; 1]; 1] {
            [[-self.0]]
        }
    }

    struct Oscillator;
    impl System<2> for Oscillator {
        fn rhs(&self, _t: f64, x: &[f64; 2]) -> [f64; 2] {
            [x[1], -x[0]]
        }
        fn jacobian(&self, _t: f64, _x: &[f64; 2]) -> [[f64; 2]; 2] {
            [[0.0, 1.0], [-1.0, 0.0]]
        }
    }

    fn opts<const D: usize>(tol: f64) -> Options<D> {
        Options {
            tol,
            floors: [1e-12; D],
            h_init: 1e-3,
            max_steps: 100_000,
        }
    }

    #[test]
    fn exponential_decay() {
        let tr = integrate(&Decay(1.0), 0.0, [1.0], &[1.0, 5.0], &opts(1e-10)).unwrap();
        assert!(tr.t.contains(&1.0));
        for (t, x) in tr.t.iter().zip(&tr.x) {
            assert!((x[0] - (-t).exp()).abs() < 1e-9 * (-t).exp().max(1e-3), "t={t}");
        }
    }

    #[test]
    fn stiff_decay_is_stable() {
        let tr = integrate(&Decay(1e7), 0.0, [1.0], &[10.0], &opts(1e-8)).unwrap();
        assert!(tr.x.last().unwrap()[0].abs() < 1e-10);
        assert!(tr.t.len() < 2000);
    }

    #[test]
    fn backward_and_vector() {
        let tr = integrate(&Oscillator, 3.0, [3f64.sin(), 3f64.cos()], &[0.0], &opts(1e-11)).unwrap();
        let last = tr.x.last().unwrap();
        assert_eq!(*tr.t.last().unwrap(), 0.0);
        assert!(last[0].abs() < 1e-9 && (last[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dense_solver() {
        let mut a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let mut b = vec![5.0, 3.0, 6.0];
        assert!(solve_dense(&mut a, &mut b, 3));
        let x = b;
        assert!((2.0 * x[1] + x[2] - 5.0).abs() < 1e-14);
        assert!((x[0] + x[1] - 3.0).abs() < 1e-14);
        assert!((3.0 * x[0] + x[2] - 6.0).abs() < 1e-14);
        let mut sing = vec![1.0, 2.0, 2.0, 4.0];
        let mut rhs = vec![1.0, 2.0];
        assert!(!solve_dense(&mut sing, &mut rhs, 2));
    }
}

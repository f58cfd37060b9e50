//! Cubic Hermite interpolation on tabulated values with known slopes.

use crate::error::{range_error, Result};

/// Value and first two derivatives of the cubic Hermite interpolant on
/// `[t0, t1]` through `(x0, d0)` and `(x1, d1)`.
#[inline]
pub fn hermite(t0: f64, t1: f64, x0: f64, x1: f64, d0: f64, d1: f64, t: f64) -> (f64, f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let v = h00 * x0 + h10 * h * d0 + h01 * x1 + h11 * h * d1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let dv = dh00 * x0 + dh10 * d0 + dh01 * x1 + dh11 * d1;
    let ddh00 = (12.0 * s - 6.0) / (h * h);
    let ddh10 = (6.0 * s - 4.0) / h;
    let ddh11 = (6.0 * s - 2.0) / h;
    let ddv = ddh00 * (x0 - x1) + ddh10 * d0 + ddh11 * d1;
    (v, dv, ddv)
}

/// Index `i` with `grid[i] <= t <= grid[i+1]`, or a range error.
pub fn locate(grid: &[f64], t: f64, what: &str) -> Result<usize> {
    let lo = grid[0];
    let hi = *grid.last().unwrap();
    // tolerate rounding at the ends of the table
    let slack = 1e-12 * hi.abs().max(1.0);
    if !(t >= lo - slack && t <= hi + slack) {
        return Err(range_error(what, t, lo, hi));
    }
    let i = grid.partition_point(|&g| g <= t);
    Ok(i.saturating_sub(1).min(grid.len() - 2))
}

/// One interpolated quantity: nodes, values and slopes.
#[derive(Debug, Clone, Copy)]
pub struct Table<'a> {
    pub grid: &'a [f64],
    pub values: &'a [f64],
    pub slopes: &'a [f64],
}

impl Table<'_> {
    pub fn eval_at(&self, i: usize, t: f64) -> (f64, f64, f64) {
        hermite(
            self.grid[i],
            self.grid[i + 1],
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            t,
        )
    }
}

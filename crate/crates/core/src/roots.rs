//! Bracketing helpers shared by the solvers.
//!
//! Every search in this crate is over a monotone quantity, so bracketing
//! always succeeds. Iteration stops when the bracket cannot shrink any
//! further in floating point or the relative width drops below `REL_TOL`.

use crate::error::{Result, SolverError};

const MAX_ITER: usize = 400;
const REL_TOL: f64 = 1e-15;

/// Largest upper bound tried by [`expand_upper`].
pub const BRACKET_CAP: f64 = 1e12;

/// Bisection for the boundary of a monotone predicate.
///
/// Requires `pred(lo) == false` and `pred(hi) == true`; returns the final
/// `(lo, hi)` pair, with `pred(hi)` still true.
pub fn bisect_predicate<F>(mut lo: f64, mut hi: f64, abs_tol: f64, mut pred: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= abs_tol.max(REL_TOL * hi.abs()) {
            break;
        }
    }
    (lo, hi)
}

/// Root of a nondecreasing function on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`.
pub fn bisect_increasing<F>(lo: f64, hi: f64, abs_tol: f64, mut g: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = bisect_predicate(lo, hi, abs_tol, |x| g(x) >= 0.0);
    0.5 * (lo + hi)
}

/// Root of an increasing `g` on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`, by
/// regula falsi with the Illinois modification. Stops once `|g| <= g_tol`
/// or the bracket collapses.
pub fn illinois_increasing<F>(mut lo: f64, mut hi: f64, g_tol: f64, mut g: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let (mut g_lo, mut g_hi) = (g(lo), g(hi));
    if g_lo >= 0.0 {
        return lo;
    }
    if g_hi <= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for _ in 0..MAX_ITER {
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
            if !(x > lo && x < hi) {
                break;
            }
        }
        let gx = g(x);
        if gx.abs() <= g_tol {
            return x;
        }
        if gx < 0.0 {
            lo = x;
            g_lo = gx;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = gx;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= REL_TOL * hi.abs().max(lo.abs()) {
            break;
        }
    }
    if -g_lo < g_hi {
        lo
    } else {
        hi
    }
}

/// Doubles an upper bound, starting at `start`, until `pred` holds.
pub fn expand_upper<F>(start: f64, mut pred: F) -> Result<f64>
where
    F: FnMut(f64) -> bool,
{
    let mut hi = start;
    while !pred(hi) {
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(SolverError::ConvergenceError(format!(
                "bracket expansion exceeded {BRACKET_CAP:e}"
            )));
        }
    }
    Ok(hi)
}

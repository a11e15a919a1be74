//! Finite-difference stencils, both for functions that can be evaluated
//! anywhere and for values sampled on a uniform line of grid nodes.

use std::ops::{Add, Mul, Sub};

/// Anything that can be combined linearly by a stencil.
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Linear for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Truncation order of a first-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Second,
    Fourth,
}

/// Central difference of `f` at `x` with step `h`.
pub fn central<T, E, F>(f: F, x: f64, h: f64, order: Order) -> Result<T, E>
where
    T: Linear,
    F: Fn(f64) -> Result<T, E>,
{
    match order {
        Order::Second => Ok((f(x + h)? - f(x - h)?) * (0.5 / h)),
        Order::Fourth => {
            let p1 = f(x + h)?;
            let m1 = f(x - h)?;
            let p2 = f(x + 2.0 * h)?;
            let m2 = f(x - 2.0 * h)?;
            Ok(((p1 - m1) * 8.0 - (p2 - m2)) * (1.0 / (12.0 * h)))
        }
    }
}

/// Second-order central second derivative.
pub fn central_second<T, E, F>(f: F, x: f64, h: f64) -> Result<T, E>
where
    T: Linear,
    F: Fn(f64) -> Result<T, E>,
{
    let c = f(x)?;
    Ok((f(x + h)? - c * 2.0 + f(x - h)?) * (1.0 / (h * h)))
}

/// Minimum number of nodes a line needs for [`line_derivative`].
pub fn min_nodes(order: Order) -> usize {
    match order {
        Order::Second => 3,
        Order::Fourth => 5,
    }
}

/// First derivative at node `i` of values sampled at spacing `h` on `n`
/// nodes. Interior nodes use central stencils, the ends one-sided stencils
/// of the same order.
pub fn line_derivative<T, F>(at: F, n: usize, i: usize, h: f64, order: Order) -> T
where
    T: Linear,
    F: Fn(usize) -> T,
{
    debug_assert!(n >= min_nodes(order) && i < n);
    match order {
        Order::Second => {
            if i == 0 {
                (at(1) * 4.0 - at(0) * 3.0 - at(2)) * (0.5 / h)
            } else if i == n - 1 {
                (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * (0.5 / h)
            } else {
                (at(i + 1) - at(i - 1)) * (0.5 / h)
            }
        }
        Order::Fourth => {
            let s = 1.0 / (12.0 * h);
            if i >= 2 && i + 2 < n {
                ((at(i + 1) - at(i - 1)) * 8.0 - (at(i + 2) - at(i - 2))) * s
            } else if i == 0 {
                (at(1) * 48.0 - at(0) * 25.0 - at(2) * 36.0 + at(3) * 16.0 - at(4) * 3.0) * s
            } else if i == 1 {
                (at(2) * 18.0 - at(0) * 3.0 - at(1) * 10.0 - at(3) * 6.0 + at(4)) * s
            } else if i == n - 1 {
                (at(n - 1) * 25.0 - at(n - 2) * 48.0 + at(n - 3) * 36.0 - at(n - 4) * 16.0
                    + at(n - 5) * 3.0)
                    * s
            } else {
                // i == n - 2
                (at(n - 1) * 3.0 + at(n - 2) * 10.0 - at(n - 3) * 18.0 + at(n - 4) * 6.0
                    - at(n - 5))
                    * s
            }
        }
    }
}

/// Cubic Lagrange interpolation of node values at the fractional position
/// `x` (in units of the spacing, `0 <= x <= n-1`).
pub fn line_interpolate<T, F>(at: F, n: usize, x: f64) -> T
where
    T: Linear,
    F: Fn(usize) -> T,
{
    debug_assert!(n >= 4);
    let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let t = x - base as f64;
    // nodes at 0, 1, 2, 3 relative to base
    let w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let w1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let w2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let w3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    at(base) * w0 + at(base + 1) * w1 + at(base + 2) * w2 + at(base + 3) * w3
}

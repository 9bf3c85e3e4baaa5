//! Shared oracles for the integration tests: implementations that are
//! slower or cruder than the library's, but independent of it, so
//! agreement is evidence rather than tautology.
//!
//! Each integration target compiles this module separately and uses a
//! different subset, hence the allow.
#![allow(dead_code)]

use nalgebra::DMatrix;
use zenocode::{C64, Operator};

/// exp(-i H t) by scaled Taylor series with repeated squaring.  Has nothing
/// in common with the library's eigendecomposition route.
pub fn expm_series(h: &Operator, t: f64) -> DMatrix<C64> {
    let n = h.dim();
    let a = h.matrix() * C64::new(0.0, -t);
    // Scale so the series converges fast, then square back.
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = &a / C64::new(2f64.powi(squarings as i32), 0.0);

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=40 {
        term = (&term * &scaled) / C64::new(k as f64, 0.0);
        result += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Central difference (f(x + h) - f(x - h)) / 2h for matrix-valued f.
pub fn central_difference(f: impl Fn(f64) -> DMatrix<C64>, x: f64, h: f64) -> DMatrix<C64> {
    (f(x + h) - f(x - h)) / C64::new(2.0 * h, 0.0)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

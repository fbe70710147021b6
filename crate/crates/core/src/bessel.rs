//! Bessel functions of the first kind, integer order, real argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order the library evaluates; higher orders are below double precision
/// noise for every argument the solvers produce.
pub const MAX_ORDER: i32 = 200;

/// Below this argument the ascending series is summed directly; above it the
/// series cancels too much and Miller's recurrence takes over.
const SERIES_LIMIT: f64 = 4.0;

/// One evaluated value, kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselEval {
    pub order: i32,
    pub argument: f64,
    pub value: f64,
}

impl BesselEval {
    pub fn new(order: i32, argument: f64) -> Result<Self> {
        Ok(BesselEval { order, argument, value: bessel_j(order, argument)? })
    }
}

/// `J_n(z)`; errors on non-finite `z`.
pub fn bessel_j(n: i32, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFiniteArgument);
    }
    if n.abs() > MAX_ORDER {
        return Err(Error::InvalidInput(format!("Bessel order {n} exceeds {MAX_ORDER}")));
    }
    Ok(jn(n, z))
}

/// `J_n(z)` without argument checks. Returns NaN for non-finite `z`.
pub fn jn(n: i32, z: f64) -> f64 {
    if !z.is_finite() {
        return f64::NAN;
    }
    let m = n.unsigned_abs();
    let mut sign = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    if z < 0.0 && m % 2 == 1 {
        sign = -sign;
    }
    let x = z.abs();
    let v = if x == 0.0 {
        if m == 0 { 1.0 } else { 0.0 }
    } else if x < SERIES_LIMIT {
        series(m, x)
    } else {
        miller(m, x)
    };
    sign * v
}

/// `J₁(z)/z`, finite at the origin where it equals ½.
pub fn j1_over_z(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let q = 0.25 * z * z;
        0.5 * (1.0 - 0.5 * q + q * q / 12.0)
    } else {
        jn(1, z) / z
    }
}

/// `J₁'(z) = J₀(z) − J₁(z)/z`.
pub fn j1_prime(z: f64) -> f64 {
    jn(0, z) - j1_over_z(z)
}

/// `[J_0(z), …, J_nmax(z)]`.
pub fn orders(nmax: usize, z: f64) -> Vec<f64> {
    (0..=nmax as i32).map(|k| jn(k, z)).collect()
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= half / k as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..200u32 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x.ceil());
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as u32;
    start += start % 2;
    let two_over_x = 2.0 / x;
    let (mut bp, mut b) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let bm = k as f64 * two_over_x * b - bp;
        bp = b;
        b = bm;
        // b now holds the unnormalized value at order k − 1
        if k - 1 == n {
            wanted = b;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * b;
        }
        if b.abs() > 1e250 {
            b *= 1e-250;
            bp *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += b;
    wanted / norm
}

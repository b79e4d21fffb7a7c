//! Bessel functions `J_n`, `Y_n` and Hankel functions `H_n = J_n + iY_n` of
//! integer order and real non-negative argument.
//!
//! Below [`ASYMPTOTIC_MIN_X`] all orders of `J` come from Miller's downward
//! recurrence normalized by `J_0 + 2ΣJ_2k = 1`; `Y_0` and `Y_1` follow from
//! Neumann series in those values. Above it, `H_0` and `H_1` come from the
//! Hankel asymptotic expansion truncated at its smallest term, `J_n` recurs
//! upward while `n < x` and downward beyond, and `Y_n` always recurs upward.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use thiserror::Error;

/// Largest supported order.
pub const MAX_ORDER: u32 = 2000;

/// Arguments at or above this use the asymptotic expansion for orders 0, 1.
pub const ASYMPTOTIC_MIN_X: f64 = 25.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_LIMIT: f64 = 1e250;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("argument must be non-negative, got {0}")]
    NegativeArgument(f64),
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("argument is not finite")]
    NonFiniteArgument,
    #[error("order {0} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge(u32),
}

fn check_order(n: u32) -> Result<(), SpecfunError> {
    if n > MAX_ORDER {
        Err(SpecfunError::OrderTooLarge(n))
    } else {
        Ok(())
    }
}

fn check_positive(x: f64) -> Result<(), SpecfunError> {
    if !x.is_finite() {
        Err(SpecfunError::NonFiniteArgument)
    } else if x <= 0.0 {
        Err(SpecfunError::NonPositiveArgument(x))
    } else {
        Ok(())
    }
}

pub fn bessel_j(n: u32, x: f64) -> Result<f64, SpecfunError> {
    Ok(bessel_j_sequence(n, x)?[n as usize])
}

pub fn bessel_y(n: u32, x: f64) -> Result<f64, SpecfunError> {
    Ok(bessel_y_sequence(n, x)?[n as usize])
}

pub fn hankel1(n: u32, x: f64) -> Result<Complex64, SpecfunError> {
    Ok(hankel1_sequence(n, x)?[n as usize])
}

/// `J_0(x), …, J_nmax(x)`. `x = 0` returns the limits `1, 0, 0, …`.
pub fn bessel_j_sequence(nmax: u32, x: f64) -> Result<Vec<f64>, SpecfunError> {
    check_order(nmax)?;
    if !x.is_finite() {
        return Err(SpecfunError::NonFiniteArgument);
    }
    if x < 0.0 {
        return Err(SpecfunError::NegativeArgument(x));
    }
    let nmax = nmax as usize;
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if x < ASYMPTOTIC_MIN_X {
        let mut j = miller(nmax, x);
        j.truncate(nmax + 1);
        Ok(j)
    } else {
        let (h0, h1) = hankel_asymptotic(x);
        Ok(j_large(nmax, x, h0.re, h1.re))
    }
}

/// `Y_0(x), …, Y_nmax(x)` for `x > 0`. Values that overflow are `-inf`.
pub fn bessel_y_sequence(nmax: u32, x: f64) -> Result<Vec<f64>, SpecfunError> {
    check_order(nmax)?;
    check_positive(x)?;
    let (h0, h1) = hankel01_unchecked(x);
    Ok(y_upward(nmax as usize, x, h0.im, h1.im))
}

/// `H_0(x), …, H_nmax(x)` for `x > 0`.
pub fn hankel1_sequence(nmax: u32, x: f64) -> Result<Vec<Complex64>, SpecfunError> {
    check_order(nmax)?;
    check_positive(x)?;
    Ok(hankel_sequence_unchecked(nmax as usize, x))
}

/// `H_0..=H_nmax` without argument checks; `x` must be positive and finite.
pub(crate) fn hankel_sequence_unchecked(nmax: usize, x: f64) -> Vec<Complex64> {
    let (j, y0, y1) = if x < ASYMPTOTIC_MIN_X {
        let j = miller(nmax, x);
        let (y0, y1) = neumann_y01(x, &j);
        (j, y0, y1)
    } else {
        let (h0, h1) = hankel_asymptotic(x);
        (j_large(nmax, x, h0.re, h1.re), h0.im, h1.im)
    };
    let y = y_upward(nmax, x, y0, y1);
    (0..=nmax).map(|k| Complex64::new(j[k], y[k])).collect()
}

/// `(H_0(x), H_1(x))` without argument checks; `x` must be positive and finite.
pub(crate) fn hankel01_unchecked(x: f64) -> (Complex64, Complex64) {
    if x < ASYMPTOTIC_MIN_X {
        let j = miller(1, x);
        let (y0, y1) = neumann_y01(x, &j);
        (Complex64::new(j[0], y0), Complex64::new(j[1], y1))
    } else {
        hankel_asymptotic(x)
    }
}

/// Starting order for the downward recurrence.
fn miller_start(order: usize, x: f64) -> usize {
    let big = (order as f64).max(x);
    let m = (big + 25.0 + (60.0 * big).sqrt()).ceil() as usize;
    m + (m & 1)
}

/// Normalized `J_0..=J_top` by downward recurrence, `top ≥ nmax`; the extra
/// orders feed the Neumann series.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = miller_start(nmax, x);
    let mut f = vec![0.0; top + 2];
    f[top] = 1.0;
    let mut sum = 0.0;
    for k in (1..=top).rev() {
        f[k - 1] = (2.0 * k as f64 / x) * f[k] - f[k + 1];
        if (k - 1) % 2 == 0 && k > 1 {
            sum += 2.0 * f[k - 1];
        }
        if f[k - 1].abs() > RESCALE_LIMIT {
            for v in &mut f[k - 1..] {
                *v /= RESCALE_LIMIT;
            }
            sum /= RESCALE_LIMIT;
        }
    }
    sum += f[0];
    f.truncate(top + 1);
    for v in &mut f {
        *v /= sum;
    }
    f
}

/// `Y_0`, `Y_1` from Neumann series over the normalized Miller values.
fn neumann_y01(x: f64, j: &[f64]) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = (2.0 / PI) * (log_term * j[0] - 2.0 * s0);
    let y1 = (2.0 / PI) * (log_term * j[1] - j[0] / x + s1);
    (y0, y1)
}

/// Hankel asymptotic expansion for `H_0(x)`, `H_1(x)`, summed to the smallest
/// term.
fn hankel_asymptotic(x: f64) -> (Complex64, Complex64) {
    let series = |nu: f64| -> Complex64 {
        let mu = 4.0 * nu * nu;
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = 1.0_f64;
        let mut ik = Complex64::new(1.0, 0.0);
        for k in 1..200 {
            let odd = (2 * k - 1) as f64;
            let next = term * (mu - odd * odd) / (8.0 * k as f64 * x);
            if next.abs() >= term.abs() || next == 0.0 {
                break;
            }
            term = next;
            ik *= Complex64::i();
            sum += ik * term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    };
    let (s, c) = x.sin_cos();
    // e^{i(x − π/4)}
    let phase0 = Complex64::new(c, s) * Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    // e^{i(x − 3π/4)} = −i·e^{i(x − π/4)}
    let phase1 = phase0 * Complex64::new(0.0, -1.0);
    let amp = (2.0 / (PI * x)).sqrt();
    (phase0 * series(0.0) * amp, phase1 * series(1.0) * amp)
}

/// `J_0..=J_nmax` for large `x`: upward recurrence while the order stays
/// below `x`, then a downward sweep matched to the upward values.
fn j_large(nmax: usize, x: f64, j0: f64, j1: f64) -> Vec<f64> {
    let mut j = Vec::with_capacity(nmax + 1);
    j.push(j0);
    if nmax == 0 {
        return j;
    }
    j.push(j1);
    let turn = (x.floor() as usize).max(1);
    let up_to = nmax.min(turn);
    for k in 1..up_to {
        let next = (2.0 * k as f64 / x) * j[k] - j[k - 1];
        j.push(next);
    }
    if nmax <= turn {
        return j;
    }
    // downward from well above nmax to turn - 1
    let top = miller_start(nmax, x);
    let mut f = vec![0.0; top + 2];
    f[top] = 1.0;
    for k in (turn..=top).rev() {
        f[k - 1] = (2.0 * k as f64 / x) * f[k] - f[k + 1];
        if f[k - 1].abs() > RESCALE_LIMIT {
            for v in &mut f[k - 1..] {
                *v /= RESCALE_LIMIT;
            }
        }
    }
    // Match at whichever of the two overlap orders is larger in magnitude.
    let anchor = if j[turn].abs() >= j[turn - 1].abs() {
        turn
    } else {
        turn - 1
    };
    let factor = j[anchor] / f[anchor];
    j.extend(f[turn + 1..=nmax].iter().map(|v| v * factor));
    j
}

fn y_upward(nmax: usize, x: f64, y0: f64, y1: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax == 0 {
        return y;
    }
    y.push(y1);
    for k in 1..nmax {
        let next = (2.0 * k as f64 / x) * y[k] - y[k - 1];
        if next.is_finite() {
            y.push(next);
        } else {
            y.resize(nmax + 1, f64::NEG_INFINITY);
            break;
        }
    }
    y
}

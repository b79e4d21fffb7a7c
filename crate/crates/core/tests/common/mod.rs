//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library under test.
#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Double-double number `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const EULER_GAMMA: Dd = Dd {
        hi: 0.5772156649015329,
        lo: -4.942915152430645e-18,
    };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqr(self) -> Dd {
        self * self
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, o: f64) -> Dd {
        self * Dd::new(o)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, o: f64) -> Dd {
        self / Dd::new(o)
    }
}

/// Terms `(−1)^m (x/2)^{2m+n} / (m!(m+n)!)` of the ascending series for
/// `J_n`, until they stop contributing.
fn j_series_terms(n: u32, x: f64) -> Vec<Dd> {
    let half = Dd::new(x / 2.0);
    let q = half.sqr();
    let mut t = Dd::ONE;
    for k in 1..=n {
        t = t * half / k as f64;
    }
    let mut terms = vec![t];
    let mut m = 0u32;
    loop {
        m += 1;
        t = -(t * q) / (m as f64 * (m + n) as f64);
        terms.push(t);
        if m as f64 > x && t.abs().hi < 1e-40 * terms[0].abs().hi.max(1e-300) {
            break;
        }
    }
    terms
}

fn sum(terms: &[Dd]) -> Dd {
    terms.iter().fold(Dd::ZERO, |a, &b| a + b)
}

/// `J_n(x)` by its ascending series in double-double arithmetic.
pub fn j_series(n: u32, x: f64) -> f64 {
    sum(&j_series_terms(n, x)).to_f64()
}

/// `Y_n(x)` by the ascending series with harmonic numbers,
/// `πY_n = 2J_n ln(x/2) − Σ_{k<n} (n−k−1)!/k! (x/2)^{2k−n}
///        − Σ_k (ψ(k+1) + ψ(n+k+1)) (−1)^k (x/2)^{2k+n}/(k!(n+k)!)`.
pub fn y_series(n: u32, x: f64) -> f64 {
    let half = Dd::new(x / 2.0);
    let terms = j_series_terms(n, x);
    let j = sum(&terms);

    let mut finite = Dd::ZERO;
    if n > 0 {
        let mut t = Dd::ONE;
        for k in 1..n {
            t = t * k as f64;
        }
        for _ in 0..n {
            t = t / half;
        }
        for k in 0..n {
            finite = finite + t;
            if k + 1 < n {
                t = t * half.sqr() / ((k + 1) as f64 * (n - k - 1) as f64);
            }
        }
    }

    // ψ(m + 1) = H_m − γ
    let mut h_k = Dd::ZERO;
    let mut h_nk = Dd::ZERO;
    for m in 1..=n {
        h_nk = h_nk + Dd::ONE / m as f64;
    }
    let mut digamma_sum = Dd::ZERO;
    for (k, &t) in terms.iter().enumerate() {
        if k > 0 {
            h_k = h_k + Dd::ONE / k as f64;
            h_nk = h_nk + Dd::ONE / (n as usize + k) as f64;
        }
        let psi = h_k + h_nk - Dd::EULER_GAMMA * 2.0;
        digamma_sum = digamma_sum + psi * t;
    }

    let log_term = j * (x / 2.0).ln() * 2.0;
    ((log_term - finite - digamma_sum) / Dd::PI).to_f64()
}

/// Nodes and weights of `n`-point Gauss–Legendre quadrature on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 1..=n {
        let mut z = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        rule.push((z, 2.0 / ((1.0 - z * z) * dp * dp)));
    }
    rule
}

/// Composite Gauss–Legendre over `[a, b]` with `panels` equal panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let panel: f64 = rule.iter().map(|&(z, w)| w * f(mid + 0.5 * h * z)).sum();
        total += 0.5 * h * panel;
    }
    total
}

/// `J_n(x) = (1/2π)∫₀^{2π} cos(nτ − x sin τ) dτ` by the trapezoid rule,
/// which converges geometrically for periodic integrands.
pub fn j_integral(n: u32, x: f64) -> f64 {
    let m = 4 * (x as usize + n as usize) + 256;
    let s: f64 = (0..m)
        .map(|i| {
            let tau = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            (n as f64 * tau - x * tau.sin()).cos()
        })
        .sum();
    s / m as f64
}

/// `πY_n(x) = ∫₀^π sin(x sin τ − nτ) dτ − ∫₀^∞ (e^{nt} + (−1)^n e^{−nt}) e^{−x sinh t} dt`.
pub fn y_integral(n: u32, x: f64) -> f64 {
    let rule = gauss_legendre(20);
    let nf = n as f64;
    let osc = integrate(
        |t| (x * t.sin() - nf * t).sin(),
        0.0,
        std::f64::consts::PI,
        8 * (x as usize + n as usize) + 32,
        &rule,
    );
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let tail = integrate(
        |t| ((nf * t - x * t.sinh()).exp()) + sign * (-(nf * t) - x * t.sinh()).exp(),
        0.0,
        6.0,
        600,
        &rule,
    );
    (osc - tail) / std::f64::consts::PI
}

/// Independent `(J_n(x), Y_n(x))`: ascending series below 25, quadrature above.
pub fn bessel_oracle(n: u32, x: f64) -> (f64, f64) {
    if x < 25.0 {
        (j_series(n, x), y_series(n, x))
    } else {
        (j_integral(n, x), y_integral(n, x))
    }
}

/// Error of `got` against `want` relative to the size of the function:
/// its own magnitude below the turning point `x < n`, where neither `J_n`
/// nor `Y_n` has zeros, and the modulus of `H_n` in the oscillatory range.
pub fn bessel_relative_error(got: f64, want: f64, n: u32, x: f64, hankel_modulus: f64) -> f64 {
    let scale = if x < n as f64 { want.abs() } else { hankel_modulus };
    (got - want).abs() / scale
}

/// Solves the normal equations `AᵀA x = Aᵀb` in double-double arithmetic by
/// Gaussian elimination with partial pivoting. `a` is row-major.
pub fn normal_equations_dd(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a[0].len();
    let mut g = vec![vec![Dd::ZERO; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = a.iter().fold(Dd::ZERO, |s, row| s + Dd::new(row[i]) * Dd::new(row[j]));
        }
        g[i][n] = a.iter().zip(b).fold(Dd::ZERO, |s, (row, &bk)| s + Dd::new(row[i]) * Dd::new(bk));
    }
    for c in 0..n {
        let p = (c..n).max_by(|&r, &s| g[r][c].abs().hi.total_cmp(&g[s][c].abs().hi)).unwrap();
        g.swap(c, p);
        for r in c + 1..n {
            let f = g[r][c] / g[c][c];
            for k in c..=n {
                let v = g[c][k];
                g[r][k] = g[r][k] - f * v;
            }
        }
    }
    let mut x = vec![Dd::ZERO; n];
    for c in (0..n).rev() {
        let mut s = g[c][n];
        for k in c + 1..n {
            s = s - g[c][k] * x[k];
        }
        x[c] = s / g[c][c];
    }
    x.into_iter().map(Dd::to_f64).collect()
}

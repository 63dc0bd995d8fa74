//! Test-side oracles. None of these share code with the library: Bessel
//! integrals come from the integral representation, the reflection
//! coefficient from its hyperbolic form, the spatial-frequency integral
//! from adaptive Gauss-Kronrod, and least squares from exact rational arithmetic.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use eddyspec::forward::{CoilGeometry, PlateParams};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

pub const MU0: f64 = 4e-7 * PI;

/// `int_a^b x J1(x) dx` using `J1(x) = (1/2pi) int_0^2pi cos(tau - x sin tau)`
/// and integrating over `x` first in closed form; the remaining periodic
/// integral is done by the trapezoid rule.
pub fn p_oracle(alpha: f64, r1: f64, r2: f64) -> f64 {
    let (a, b) = (alpha * r1, alpha * r2);
    let n = (1.5 * b).ceil() as usize + 64;
    let mut sum = 0.0;
    for k in 0..n {
        let tau = 2.0 * PI * k as f64 / n as f64;
        sum += inner(tau, a, b);
    }
    sum / n as f64
}

/// `int_a^b x cos(tau - s x) dx`, `s = sin tau`.
fn inner(tau: f64, a: f64, b: f64) -> f64 {
    let s = tau.sin();
    if (s * b).abs() < 0.5 {
        // cos(tau - y) = sum_k y^k / k! cos(tau - k pi / 2)
        let mut total = 0.0;
        let mut sk_over_fact = 1.0;
        for k in 0..40 {
            if k > 0 {
                sk_over_fact *= s / k as f64;
            }
            let p = k + 2;
            total += sk_over_fact * (tau - k as f64 * PI / 2.0).cos() * (b.powi(p) - a.powi(p)) / p as f64;
        }
        total
    } else {
        let f = |x: f64| -x * (tau - s * x).sin() / s + (tau - s * x).cos() / (s * s);
        f(b) - f(a)
    }
}

/// Reflection coefficient in hyperbolic form.
pub fn phi_oracle(alpha: f64, freq: f64, plate: &PlateParams) -> Complex64 {
    let w = 2.0 * PI * freq;
    let a1 = Complex64::new(alpha * alpha, w * plate.sigma * plate.mu_r * MU0).sqrt();
    let ma = plate.mu_r * alpha;
    let th = (a1 * plate.t).tanh();
    (ma * ma - a1 * a1) * th / ((a1 * a1 + ma * ma) * th + 2.0 * ma * a1)
}

// Gauss-Kronrod 7/15 on [-1, 1]: Kronrod nodes, Kronrod weights, and the
// Gauss weights of the odd-indexed nodes.
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kron = fc * WK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let pair = f(c - h * XK[i]) + f(c + h * XK[i]);
        kron += pair * WK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

fn refine(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    refine(f, a, m, tol / 2.0, depth - 1) + refine(f, m, b, tol / 2.0, depth - 1)
}

/// Adaptive Gauss-Kronrod on `[a, b]` split into `panels` equal pieces,
/// absolute tolerance `tol`.
pub fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, panels: usize, tol: f64) -> Complex64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| refine(f, a + i as f64 * w, a + (i + 1) as f64 * w, tol / panels as f64, 20))
        .sum()
}

/// Inductance change by adaptive quadrature out to where the coil factor
/// has decayed by `exp(-40)`.
pub fn delta_l_oracle(coil: &CoilGeometry, plate: &PlateParams, freq: f64) -> Complex64 {
    let n = coil.n_turns as f64;
    let k = PI * MU0 * n * n / (coil.h * coil.h * (coil.r2 - coil.r1).powi(2));
    let depth = 2.0 * plate.l + coil.h + coil.g;
    let amax = 40.0 / depth;
    let f = |a: f64| {
        if a == 0.0 {
            return Complex64::zero();
        }
        let p = p_oracle(a, coil.r1, coil.r2);
        let geom = (-a * depth).exp() * ((-2.0 * a * coil.h).exp() + 1.0);
        phi_oracle(a, freq, plate) * (p * p / a.powi(6) * geom)
    };
    // a coarse pass sets the scale of the absolute tolerance
    let scale = adaptive(&f, 0.0, amax, 32, f64::INFINITY).norm();
    k * adaptive(&f, 0.0, amax, 32, scale * 1e-11)
}

fn rational(v: f64) -> BigRational {
    BigRational::from_f64(v).expect("finite")
}

/// Exact least-squares solution of `A x = b` (A given by columns) through
/// the normal equations in rational arithmetic, rounded to f64.
#[allow(clippy::needless_range_loop)] // rows r and c are both borrowed
pub fn exact_normal_solve(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = columns.len();
    let cols: Vec<Vec<BigRational>> = columns.iter().map(|c| c.iter().map(|&v| rational(v)).collect()).collect();
    let rb: Vec<BigRational> = b.iter().map(|&v| rational(v)).collect();
    let dot = |x: &[BigRational], y: &[BigRational]| x.iter().zip(y).fold(BigRational::zero(), |acc, (p, q)| acc + p * q);
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n).map(|j| dot(&cols[i], &cols[j])).collect();
            row.push(dot(&cols[i], &rb));
            row
        })
        .collect();
    for c in 0..n {
        let pivot = (c..n).find(|&r| !m[r][c].is_zero()).expect("nonsingular");
        m.swap(c, pivot);
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let factor = &m[r][c] / &m[c][c];
                for k in c..=n {
                    let delta = &factor * &m[c][k];
                    m[r][k] -= delta;
                }
            }
        }
    }
    (0..n).map(|i| (&m[i][n] / &m[i][i]).to_f64().unwrap()).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn rel_c(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

//! Bessel functions of the first kind, the radial coil integral and the
//! Gauss-Legendre grids used to discretise the spatial-frequency integral.
//!
//! `J0` and `J1` use the alternating power series on `|x| < 8` and the
//! Hankel-type modulus/phase form `sqrt(2/(pi x)) (p cos chi - q sin chi)`
//! beyond, with `p` and `q` given by the rational approximations from
//! FreeBSD msun (`e_j0.c` / `e_j1.c`, segment `x >= 8`).

#![allow(clippy::excessive_precision)] // published coefficient tables, kept verbatim

use crate::error::{Error, Result};
use crate::scalar::Real;

const SERIES_LIMIT: f64 = 8.0;

// msun pzero/qzero, x >= 8
const J0_PR: [f64; 6] = [
    0.0,
    -7.031_249_999_999_003_574_84e-02,
    -8.081_670_412_753_497_956_26e+00,
    -2.570_631_056_797_048_472_62e+02,
    -2.485_216_410_094_288_221_44e+03,
    -5.253_043_804_907_295_452_72e+03,
];
const J0_PS: [f64; 5] = [
    1.165_343_646_196_681_817_17e+02,
    3.833_744_753_641_218_267_15e+03,
    4.059_785_726_484_725_455_52e+04,
    1.167_529_725_643_759_156_81e+05,
    4.762_772_841_467_309_626_75e+04,
];
const J0_QR: [f64; 6] = [
    0.0,
    7.324_218_749_999_350_519_53e-02,
    1.176_820_646_822_526_938_99e+01,
    5.576_733_802_564_018_560_59e+02,
    8.859_197_207_564_686_323_17e+03,
    3.701_462_677_768_878_347_71e+04,
];
const J0_QS: [f64; 6] = [
    1.637_760_268_956_898_244_14e+02,
    8.098_344_946_564_498_059_16e+03,
    1.425_382_914_191_204_763_48e+05,
    8.033_092_571_195_143_973_45e+05,
    8.405_015_798_190_605_128_18e+05,
    -3.438_992_935_378_666_152_25e+05,
];

// msun pone/qone, x >= 8
const J1_PR: [f64; 6] = [
    0.0,
    1.171_874_999_999_886_479_70e-01,
    1.323_948_065_930_735_751_29e+01,
    4.120_518_543_073_785_622_25e+02,
    3.874_745_389_139_605_322_27e+03,
    7.914_479_540_318_917_315_74e+03,
];
const J1_PS: [f64; 5] = [
    1.142_073_703_756_784_084_36e+02,
    3.650_930_834_208_534_633_94e+03,
    3.695_620_602_690_334_635_55e+04,
    9.760_279_359_349_508_013_11e+04,
    3.080_427_206_278_888_115_78e+04,
];
const J1_QR: [f64; 6] = [
    0.0,
    -1.025_390_624_999_927_141_61e-01,
    -1.627_175_345_445_899_878_88e+01,
    -7.596_017_225_139_501_078_96e+02,
    -1.184_980_667_024_295_871_67e+04,
    -4.843_851_242_857_503_530_10e+04,
];
const J1_QS: [f64; 6] = [
    1.613_953_697_007_229_095_56e+02,
    7.825_385_999_233_484_653_81e+03,
    1.338_753_362_872_495_781_63e+05,
    7.196_577_236_832_409_398_63e+05,
    6.666_012_326_177_763_752_64e+05,
    -2.944_902_643_038_346_432_15e+05,
];

fn horner<T: Real>(coeffs: &[f64], z: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * z + T::lit(c))
}

/// `1 + R(z) / (1 + z S(z))` with `z = 1/x^2`.
fn modulus_p<T: Real>(x: T, pr: &[f64], ps: &[f64]) -> T {
    let z = (x * x).recip();
    T::one() + horner(pr, z) / (T::one() + z * horner(ps, z))
}

/// `(c + R(z) / (1 + z S(z))) / x` with `z = 1/x^2`.
fn modulus_q<T: Real>(x: T, lead: f64, qr: &[f64], qs: &[f64]) -> T {
    let z = (x * x).recip();
    (T::lit(lead) + horner(qr, z) / (T::one() + z * horner(qs, z))) / x
}

/// `sum_k (-x^2/4)^k / (k! (k + order)!)`, truncated once terms stop mattering.
fn bessel_series<T: Real>(x: T, order: u32) -> T {
    let q = -(x * x) / T::lit(4.0);
    let mut term = T::one();
    for j in 1..=order {
        term = term / T::lit(j as f64);
    }
    let mut sum = term;
    for k in 1..200u32 {
        term = term * q / (T::lit(k as f64) * T::lit((k + order) as f64));
        sum = sum + term;
        if term.abs() <= T::epsilon() * T::lit(1e-3) * sum.abs().max(T::epsilon()) {
            break;
        }
    }
    sum
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < T::lit(SERIES_LIMIT) {
        return bessel_series(ax, 0);
    }
    // cos(x - pi/4) = (cos x + sin x)/sqrt2, sin(x - pi/4) = (sin x - cos x)/sqrt2
    let (s, c) = ax.sin_cos();
    let p = modulus_p(ax, &J0_PR, &J0_PS);
    let q = modulus_q(ax, -0.125, &J0_QR, &J0_QS);
    let amp = (T::FRAC_2_PI() / ax).sqrt() * T::FRAC_1_SQRT_2();
    amp * (p * (c + s) - q * (s - c))
}

/// Bessel function of the first kind, order one. Odd in `x`.
pub fn bessel_j1<T: Real>(x: T) -> T {
    let ax = x.abs();
    let value = if ax < T::lit(SERIES_LIMIT) {
        ax / T::lit(2.0) * bessel_series(ax, 1)
    } else {
        // cos(x - 3pi/4) = (sin x - cos x)/sqrt2, sin(x - 3pi/4) = -(sin x + cos x)/sqrt2
        let (s, c) = ax.sin_cos();
        let p = modulus_p(ax, &J1_PR, &J1_PS);
        let q = modulus_q(ax, 0.375, &J1_QR, &J1_QS);
        let amp = (T::FRAC_2_PI() / ax).sqrt() * T::FRAC_1_SQRT_2();
        amp * (p * (s - c) + q * (s + c))
    };
    if x < T::zero() {
        -value
    } else {
        value
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending, computed by
/// Newton iteration on `P_n` in double precision.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Discretisation of `(0, alpha_max]` in spatial frequency (1/m).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid<T = f64> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureGrid<T> {
    /// Builds a grid from explicit nodes and weights, checking the ordering
    /// and positivity invariants.
    pub fn new(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Dimension {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        if nodes.is_empty() {
            return Err(Error::arg("nodes", "grid must not be empty"));
        }
        if nodes[0] <= T::zero() || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::arg("nodes", "must be positive and strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::arg("weights", "must be positive"));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn alpha_max(&self) -> T {
        *self.nodes.last().expect("non-empty grid")
    }

    /// Weighted sum of `f` over the nodes.
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&a, &w)| w * f(a))
            .sum()
    }
}

/// Panel order of the composite rule.
pub const PANEL_ORDER: usize = 16;

/// Default node count for the spatial-frequency integral.
pub const DEFAULT_NODES: usize = 2048;

/// Composite Gauss-Legendre grid on `(0, alpha_max]` with exactly `n_nodes`
/// nodes: equal-width panels of [`PANEL_ORDER`] points, plus one shorter-order
/// panel when `n_nodes` is not a multiple of it.
pub fn build_grid<T: Real>(alpha_max: T, n_nodes: usize) -> Result<QuadratureGrid<T>> {
    if !(alpha_max > T::zero()) || !alpha_max.is_finite() {
        return Err(Error::arg("alpha_max", "must be positive and finite"));
    }
    if n_nodes < PANEL_ORDER {
        return Err(Error::arg("n_nodes", format!("need at least {PANEL_ORDER}")));
    }
    let full = n_nodes / PANEL_ORDER;
    let rem = n_nodes % PANEL_ORDER;
    let panels = full + usize::from(rem > 0);
    let width = alpha_max / T::lit(panels as f64);
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let tail = (rem > 0).then(|| gauss_legendre(rem));

    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for panel in 0..panels {
        let (xs, ws) = if panel < full {
            (&gx, &gw)
        } else {
            let (x, w) = tail.as_ref().expect("remainder panel");
            (x, w)
        };
        let lo = width * T::lit(panel as f64);
        let half = width / T::lit(2.0);
        for (&x, &w) in xs.iter().zip(ws) {
            nodes.push(lo + half * (T::one() + T::lit(x)));
            weights.push(half * T::lit(w));
        }
    }
    QuadratureGrid::new(nodes, weights)
}

/// Controls for the adaptive panel quadrature behind [`p_integral_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions<T = f64> {
    pub rel_tol: T,
    pub max_depth: u32,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            max_depth: 30,
        }
    }
}

/// `P(alpha) = int_{alpha r1}^{alpha r2} x J1(x) dx` with default tolerance.
pub fn p_integral<T: Real>(alpha: T, r1: T, r2: T) -> Result<T> {
    p_integral_with(alpha, r1, r2, AdaptiveOptions::default())
}

/// [`p_integral`] with explicit quadrature controls.
pub fn p_integral_with<T: Real>(alpha: T, r1: T, r2: T, opts: AdaptiveOptions<T>) -> Result<T> {
    if !(r1 >= T::zero()) || !(r2 > r1) {
        return Err(Error::InvalidCoil(format!(
            "radii must satisfy 0 <= r1 < r2 (r1 = {r1}, r2 = {r2})"
        )));
    }
    if !(alpha >= T::zero()) {
        return Err(Error::arg("alpha", "must be non-negative"));
    }
    if alpha == T::zero() {
        return Ok(T::zero());
    }
    let integrand = |x: T| x * bessel_j1(x);
    Ok(adaptive_integrate(integrand, alpha * r1, alpha * r2, opts))
}

// 10-point Gauss-Legendre on [-1, 1]
const GL10_X: [f64; 5] = [
    0.148_874_338_981_631_210_9,
    0.433_395_394_129_247_190_8,
    0.679_409_568_299_024_406_2,
    0.865_063_366_688_984_510_7,
    0.973_906_528_517_171_720_1,
];
const GL10_W: [f64; 5] = [
    0.295_524_224_714_752_870_2,
    0.269_266_719_309_996_355_1,
    0.219_086_362_515_982_043_9,
    0.149_451_349_150_580_593_1,
    0.066_671_344_308_688_137_6,
];

fn gl10<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let mid = (a + b) / T::lit(2.0);
    let half = (b - a) / T::lit(2.0);
    let mut sum = T::zero();
    let mut abs = T::zero();
    for (&x, &w) in GL10_X.iter().zip(&GL10_W) {
        let dx = half * T::lit(x);
        let (fl, fr) = (f(mid - dx), f(mid + dx));
        sum = sum + T::lit(w) * (fl + fr);
        abs = abs + T::lit(w) * (fl.abs() + fr.abs());
    }
    (sum * half, abs * half.abs())
}

/// Adaptive bisection on 10-point Gauss panels. The interval is first cut
/// into panels no wider than pi so each holds at most half an oscillation
/// of the Bessel integrand; each panel is then refined until splitting it
/// changes the result by less than its share of
/// `rel_tol * int |f|`.
fn adaptive_integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, opts: AdaptiveOptions<T>) -> T {
    let span = b - a;
    let n0 = (span / T::PI()).ceil().to_usize().unwrap_or(1).max(1);
    let width = span / T::lit(n0 as f64);
    let panels: Vec<(T, T, T, T)> = (0..n0)
        .map(|i| {
            let lo = a + width * T::lit(i as f64);
            let hi = if i + 1 == n0 { b } else { lo + width };
            let (v, abs) = gl10(&f, lo, hi);
            (lo, hi, v, abs)
        })
        .collect();
    let scale: T = panels.iter().map(|p| p.3).sum::<T>().max(T::min_positive_value());
    // never ask for more than the working precision can deliver
    let tol = opts.rel_tol.max(T::epsilon() * T::lit(64.0)) * scale;
    panels
        .into_iter()
        .map(|(lo, hi, v, _)| refine(&f, lo, hi, v, tol * (hi - lo) / span, opts.max_depth))
        .sum()
}

fn refine<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, whole: T, tol: T, depth: u32) -> T {
    let mid = (a + b) / T::lit(2.0);
    let (left, _) = gl10(f, a, mid);
    let (right, _) = gl10(f, mid, b);
    let split = left + right;
    if depth == 0 || (split - whole).abs() <= tol {
        return split;
    }
    let half_tol = tol / T::lit(2.0);
    refine(f, a, mid, left, half_tol, depth - 1) + refine(f, mid, b, right, half_tol, depth - 1)
}

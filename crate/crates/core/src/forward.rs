//! Dodd-Deeds inductance change of the axial gradiometer above a plate.
//!
//! ```text
//! dL(w) = K * int_0^inf P(a)^2 / a^6 * A(a) * phi(a) da
//! ```
//!
//! The integral is truncated at `alpha_max` (see [`alpha_max_for`]) and
//! evaluated on a composite Gauss-Legendre [`QuadratureGrid`]. `P(a)`
//! depends only on the coil radii, so [`ForwardModel`] evaluates it once
//! per grid and reuses it for every plate and frequency.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mu0, Real};
use crate::specfun::{build_grid, p_integral, QuadratureGrid, DEFAULT_NODES};

/// Coil assembly description, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoilGeometry<T = f64> {
    /// Inner radius (m).
    pub r1: T,
    /// Outer radius (m).
    pub r2: T,
    /// Winding height (m).
    pub h: T,
    /// Gap between the exciting and receiving coils (m).
    pub g: T,
    /// Nominal lift-off (m); the plate's own lift-off wins in every model
    /// evaluation.
    pub l0: T,
    pub n_turns: u32,
}

impl<T: Real> Default for CoilGeometry<T> {
    /// The laboratory gradiometer: 150/175 mm diameters, 10 mm windings,
    /// 35 mm gap, 15 turns.
    fn default() -> Self {
        Self {
            r1: T::lit(0.075),
            r2: T::lit(0.0875),
            h: T::lit(0.010),
            g: T::lit(0.035),
            l0: T::lit(0.005),
            n_turns: 15,
        }
    }
}

impl<T: Real> CoilGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidCoil(m));
        if !(self.r1 > T::zero()) {
            return fail(format!("r1 must be positive (got {})", self.r1));
        }
        if !(self.r2 > self.r1) {
            return fail(format!("r2 ({}) must exceed r1 ({})", self.r2, self.r1));
        }
        if !(self.h > T::zero()) {
            return fail(format!("h must be positive (got {})", self.h));
        }
        if !(self.g >= T::zero()) {
            return fail(format!("g must be non-negative (got {})", self.g));
        }
        if !(self.l0 >= T::zero()) {
            return fail(format!("l0 must be non-negative (got {})", self.l0));
        }
        if self.n_turns == 0 {
            return fail("n_turns must be at least 1".into());
        }
        let all = [self.r1, self.r2, self.h, self.g, self.l0];
        if all.iter().any(|v| !v.is_finite()) {
            return fail("non-finite dimension".into());
        }
        Ok(())
    }
}

/// The four unknowns of the inverse problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateParams<T = f64> {
    /// Electrical conductivity (S/m).
    pub sigma: T,
    /// Relative permeability.
    pub mu_r: T,
    /// Plate thickness (m).
    pub t: T,
    /// Lift-off (m).
    pub l: T,
}

impl<T: Real> PlateParams<T> {
    pub fn new(sigma: T, mu_r: T, t: T, l: T) -> Self {
        Self { sigma, mu_r, t, l }
    }

    /// Column order used everywhere: sigma, mu_r, t, l.
    pub fn to_array(self) -> [T; 4] {
        [self.sigma, self.mu_r, self.t, self.l]
    }

    pub fn from_array(v: [T; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// Checks the physical domain the forward model accepts. Zero thickness
    /// and zero conductivity are allowed (they model vacuum).
    pub fn validate_physical(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidPlate(m));
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return fail("non-finite parameter".into());
        }
        if self.sigma < T::zero() {
            return fail(format!("sigma must be non-negative (got {})", self.sigma));
        }
        if self.mu_r < T::one() {
            return fail(format!("mu_r must be at least 1 (got {})", self.mu_r));
        }
        if self.t < T::zero() {
            return fail(format!("t must be non-negative (got {})", self.t));
        }
        if !(self.l > T::zero()) {
            return fail(format!("lift-off must be positive (got {})", self.l));
        }
        Ok(())
    }
}

/// Complex inductance change sampled on a frequency list.
#[derive(Debug, Clone, PartialEq)]
pub struct InductanceSpectrum<T = f64> {
    freqs: Vec<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> InductanceSpectrum<T> {
    pub fn new(freqs: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if freqs.len() != values.len() {
            return Err(Error::LengthMismatch {
                freqs: freqs.len(),
                values: values.len(),
            });
        }
        check_frequencies(&freqs)?;
        Ok(Self { freqs, values })
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Observation vector `[Re(values); Im(values)]`.
    pub fn stacked(&self) -> Vec<T> {
        self.values
            .iter()
            .map(|v| v.re)
            .chain(self.values.iter().map(|v| v.im))
            .collect()
    }

    /// Same frequencies, new values.
    pub fn with_values(&self, values: Vec<Complex<T>>) -> Result<Self> {
        Self::new(self.freqs.clone(), values)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.freqs == other.freqs
    }
}

/// Rejects empty-safe lists that are not strictly increasing and positive.
pub fn check_frequencies<T: Real>(freqs: &[T]) -> Result<()> {
    let mut prev = T::zero();
    for (index, &f) in freqs.iter().enumerate() {
        if !(f > prev) || !f.is_finite() {
            return Err(Error::BadFrequencies {
                index,
                freq: f.to_f64_lossy(),
            });
        }
        prev = f;
    }
    Ok(())
}

/// `m` log-spaced frequencies from `fmin` to `fmax` inclusive.
pub fn log_spaced<T: Real>(fmin: T, fmax: T, m: usize) -> Result<Vec<T>> {
    if !(fmin > T::zero()) || !(fmax > fmin) || !fmax.is_finite() {
        return Err(Error::arg("band", format!("need 0 < fmin < fmax (got {fmin}, {fmax})")));
    }
    match m {
        0 => Ok(Vec::new()),
        1 => Ok(vec![fmin]),
        _ => {
            let (a, b) = (fmin.ln(), fmax.ln());
            let step = (b - a) / T::lit((m - 1) as f64);
            let mut out: Vec<T> = (0..m).map(|i| (a + step * T::lit(i as f64)).exp()).collect();
            out[0] = fmin;
            out[m - 1] = fmax;
            Ok(out)
        }
    }
}

pub const DEFAULT_FMIN_HZ: f64 = 100.0;
pub const DEFAULT_FMAX_HZ: f64 = 100.0e3;
pub const DEFAULT_BAND_POINTS: usize = 10;

/// Ten log-spaced points from 100 Hz to 100 kHz.
pub fn default_band<T: Real>() -> Vec<T> {
    log_spaced(T::lit(DEFAULT_FMIN_HZ), T::lit(DEFAULT_FMAX_HZ), DEFAULT_BAND_POINTS)
        .expect("static band is valid")
}

/// `alpha1 = sqrt(alpha^2 + j omega sigma mu_r mu0)`, principal branch.
pub fn alpha1<T: Real>(alpha: T, omega: T, sigma: T, mu_r: T) -> Complex<T> {
    let loss = omega * sigma * mu_r * mu0::<T>();
    if loss == T::zero() {
        return Complex::new(alpha, T::zero());
    }
    Complex::new(alpha * alpha, loss).sqrt()
}

/// Reflection coefficient by the direct formula
/// `s d (E - 1) / (s^2 E - d^2)` with `s = mu_r a + a1`, `d = mu_r a - a1`
/// and `E = exp(2 a1 t)`. Refuses to evaluate when `E`, or the squared
/// magnitude of the denominator formed by complex division, could overflow.
pub fn phi_direct<T: Real>(alpha: T, omega: T, plate: &PlateParams<T>) -> Result<Complex<T>> {
    let a1 = alpha1(alpha, omega, plate.sigma, plate.mu_r);
    let mu_a = Complex::new(plate.mu_r * alpha, T::zero());
    let (s, d) = (mu_a + a1, mu_a - a1);
    let exponent = T::lit(2.0) * a1.norm() * plate.t;
    let log_denominator = exponent + T::lit(2.0) * s.norm().max(d.norm()).ln().max(T::zero());
    if exponent > T::exp_limit() || T::lit(2.0) * log_denominator > T::exp_limit() {
        return Err(Error::Overflow {
            exponent: exponent.to_f64_lossy(),
        });
    }
    let z = a1 * T::lit(2.0) * plate.t;
    Ok(s * d * exp_m1(z) / (s * s * z.exp() - d * d))
}

/// Reflection coefficient with numerator and denominator divided by
/// `exp(2 a1 t)`: `s d (1 - e) / (s^2 - d^2 e)`, `e = exp(-2 a1 t)`.
/// `|e| <= 1` because `Re(a1) > 0`, so this never overflows.
pub fn phi_scaled<T: Real>(alpha: T, omega: T, plate: &PlateParams<T>) -> Complex<T> {
    let a1 = alpha1(alpha, omega, plate.sigma, plate.mu_r);
    let mu_a = Complex::new(plate.mu_r * alpha, T::zero());
    let (s, d) = (mu_a + a1, mu_a - a1);
    let z = -a1 * T::lit(2.0) * plate.t;
    -s * d * exp_m1(z) / (s * s - d * d * z.exp())
}

/// `exp(z) - 1` without cancellation for small `|z|`.
fn exp_m1<T: Real>(z: Complex<T>) -> Complex<T> {
    let half_sin = (z.im / T::lit(2.0)).sin();
    Complex::new(
        z.re.exp_m1() * z.im.cos() - T::lit(2.0) * half_sin * half_sin,
        z.re.exp() * z.im.sin(),
    )
}

/// Reflection coefficient of a plate of thickness `t`. Uses the direct form
/// while it is safe from overflow and the scaled form beyond.
pub fn phi<T: Real>(alpha: T, omega: T, plate: &PlateParams<T>) -> Complex<T> {
    match phi_direct(alpha, omega, plate) {
        Ok(v) => v,
        Err(_) => phi_scaled(alpha, omega, plate),
    }
}

/// Coil-position factor `exp(-a (2l + h + g)) (exp(-2 a h) + 1)`.
pub fn a_factor<T: Real>(alpha: T, coil: &CoilGeometry<T>, l: T) -> T {
    let two = T::lit(2.0);
    (-alpha * (two * l + coil.h + coil.g)).exp() * ((-two * alpha * coil.h).exp() + T::one())
}

/// `K = pi mu0 N^2 / (h^2 (r2 - r1)^2)`.
pub fn coil_constant<T: Real>(coil: &CoilGeometry<T>) -> T {
    let n = T::lit(coil.n_turns as f64);
    let dr = coil.r2 - coil.r1;
    T::PI() * mu0::<T>() * n * n / (coil.h * coil.h * dr * dr)
}

/// Truncation point of the spatial-frequency integral: the smallest `alpha`
/// with `exp(-alpha (2l + h + g)) <= 1e-10`, but never below `20 / r1`.
pub fn alpha_max_for<T: Real>(coil: &CoilGeometry<T>, l: T) -> T {
    let decay = T::lit(2.0) * l + coil.h + coil.g;
    let by_decay = T::lit(1e10).ln() / decay;
    by_decay.max(T::lit(20.0) / coil.r1)
}

/// `P(alpha)` at every grid node.
pub fn p_cache<T: Real>(coil: &CoilGeometry<T>, grid: &QuadratureGrid<T>) -> Result<Vec<T>> {
    grid.nodes()
        .iter()
        .map(|&a| p_integral(a, coil.r1, coil.r2))
        .collect()
}

/// Inductance change at one frequency on a prepared grid and `P` cache.
pub fn delta_l<T: Real>(
    coil: &CoilGeometry<T>,
    plate: &PlateParams<T>,
    freq: T,
    grid: &QuadratureGrid<T>,
    p_cache: &[T],
) -> Result<Complex<T>> {
    if p_cache.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: p_cache.len(),
        });
    }
    let kernel = static_kernel(coil, plate.l, grid, p_cache);
    delta_l_with_kernel(&kernel, grid, plate, freq)
}

/// `K w_i P_i^2 / a_i^6 A(a_i)`: everything in the integrand except `phi`.
fn static_kernel<T: Real>(
    coil: &CoilGeometry<T>,
    l: T,
    grid: &QuadratureGrid<T>,
    p_cache: &[T],
) -> Vec<T> {
    let k = coil_constant(coil);
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .zip(p_cache)
        .map(|((&a, &w), &p)| {
            let ratio = p / (a * a * a);
            k * w * ratio * ratio * a_factor(a, coil, l)
        })
        .collect()
}

fn delta_l_with_kernel<T: Real>(
    kernel: &[T],
    grid: &QuadratureGrid<T>,
    plate: &PlateParams<T>,
    freq: T,
) -> Result<Complex<T>> {
    if !(freq > T::zero()) {
        return Err(Error::arg("freq", "must be positive"));
    }
    if plate.t == T::zero() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let omega = T::TAU() * freq;
    let mut acc = Complex::new(T::zero(), T::zero());
    for (&a, &k) in grid.nodes().iter().zip(kernel) {
        acc = acc + phi(a, omega, plate) * k;
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::NonFinite {
            freq: freq.to_f64_lossy(),
        });
    }
    Ok(acc)
}

/// A coil together with a quadrature grid and its cached `P(alpha)` values.
/// Building one is the expensive step; evaluating spectra afterwards only
/// costs the reflection coefficient per node and frequency.
#[derive(Debug, Clone)]
pub struct ForwardModel<T = f64> {
    coil: CoilGeometry<T>,
    grid: QuadratureGrid<T>,
    p_cache: Vec<T>,
}

impl<T: Real> ForwardModel<T> {
    pub fn new(coil: CoilGeometry<T>, grid: QuadratureGrid<T>) -> Result<Self> {
        coil.validate()?;
        let p_cache = p_cache(&coil, &grid)?;
        Ok(Self {
            coil,
            grid,
            p_cache,
        })
    }

    /// Grid truncated for lift-off `l` with `n_nodes` nodes.
    pub fn for_liftoff(coil: CoilGeometry<T>, l: T, n_nodes: usize) -> Result<Self> {
        coil.validate()?;
        if !(l > T::zero()) {
            return Err(Error::InvalidPlate(format!("lift-off must be positive (got {l})")));
        }
        let grid = build_grid(alpha_max_for(&coil, l), n_nodes)?;
        Self::new(coil, grid)
    }

    pub fn coil(&self) -> &CoilGeometry<T> {
        &self.coil
    }

    pub fn grid(&self) -> &QuadratureGrid<T> {
        &self.grid
    }

    pub fn p_values(&self) -> &[T] {
        &self.p_cache
    }

    pub fn delta_l(&self, plate: &PlateParams<T>, freq: T) -> Result<Complex<T>> {
        plate.validate_physical()?;
        let kernel = static_kernel(&self.coil, plate.l, &self.grid, &self.p_cache);
        delta_l_with_kernel(&kernel, &self.grid, plate, freq)
    }

    pub fn spectrum(&self, plate: &PlateParams<T>, freqs: &[T]) -> Result<InductanceSpectrum<T>> {
        plate.validate_physical()?;
        check_frequencies(freqs)?;
        let kernel = static_kernel(&self.coil, plate.l, &self.grid, &self.p_cache);
        let values = freqs
            .iter()
            .map(|&f| delta_l_with_kernel(&kernel, &self.grid, plate, f))
            .collect::<Result<Vec<_>>>()?;
        InductanceSpectrum::new(freqs.to_vec(), values)
    }
}

/// Forward spectrum on the default grid for the plate's own lift-off.
pub fn delta_l_spectrum<T: Real>(
    coil: &CoilGeometry<T>,
    plate: &PlateParams<T>,
    freqs: &[T],
) -> Result<InductanceSpectrum<T>> {
    plate.validate_physical()?;
    ForwardModel::for_liftoff(*coil, plate.l, DEFAULT_NODES)?.spectrum(plate, freqs)
}

/// `dL = (Z - Z_air) / (j 2 pi f)`.
pub fn impedance_to_inductance<T: Real>(z: Complex<T>, z_air: Complex<T>, freq: T) -> Result<Complex<T>> {
    if !(freq > T::zero()) {
        return Err(Error::arg("freq", format!("must be positive (got {freq})")));
    }
    let dz = z - z_air;
    let w = T::TAU() * freq;
    // 1/j = -j
    Ok(Complex::new(dz.im / w, -dz.re / w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp600() -> PlateParams {
        PlateParams::new(4.13e6, 222.0, 1.40e-3, 5e-3)
    }

    #[test]
    fn exp_m1_is_accurate() {
        let z = Complex::new(0.3_f64, -1.2);
        assert!((exp_m1(z) - (z.exp() - 1.0)).norm() < 1e-15);
        let tiny = Complex::new(1e-12_f64, 3e-12);
        assert!((exp_m1(tiny) - tiny).norm() < 1e-23);
    }

    #[test]
    fn alpha1_limits() {
        assert_eq!(alpha1(37.0, 1e4, 0.0, 50.0), Complex::new(37.0, 0.0));
        // omega sigma mu_r mu0 = 2
        let sigma = 2.0 / mu0::<f64>();
        let a = alpha1(0.0, 1.0, sigma, 1.0);
        assert!((a - Complex::new(1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn alpha1_matches_polar_sqrt() {
        let (alpha, f, sigma, mu) = (100.0_f64, 1e4, 4.13e6, 222.0);
        let omega = 2.0 * std::f64::consts::PI * f;
        let (re, im) = (alpha * alpha, omega * sigma * mu * 4e-7 * std::f64::consts::PI);
        let r = (re * re + im * im).sqrt().sqrt();
        let th = im.atan2(re) / 2.0;
        let expect = Complex::new(r * th.cos(), r * th.sin());
        let got = alpha1(alpha, omega, sigma, mu);
        assert!((got - expect).norm() < 1e-12 * expect.norm());
        assert!(got.re > 0.0);
    }

    #[test]
    fn phi_limits() {
        let omega = 2.0 * std::f64::consts::PI * 1e3;
        let mut p = dp600();
        p.t = 0.0;
        assert_eq!(phi(30.0, omega, &p), Complex::new(0.0, 0.0));

        let vac = PlateParams::new(0.0, 1.0, 1e-3, 5e-3);
        assert_eq!(phi(30.0, omega, &vac), Complex::new(0.0, 0.0));

        let mut thick = dp600();
        let a1 = alpha1(30.0, omega, thick.sigma, thick.mu_r);
        thick.t = 10.0 / a1.re;
        let got = phi(30.0, omega, &thick);
        let mu_a = Complex::new(thick.mu_r * 30.0, 0.0);
        let half = (mu_a - a1) / (mu_a + a1);
        assert!((got - half).norm() < 1e-8 * half.norm());
    }

    #[test]
    fn phi_switches_to_scaled_form() {
        let mut p = dp600();
        p.t = 0.05;
        let omega = 2.0 * std::f64::consts::PI * 1e6;
        assert!(matches!(phi_direct(10.0, omega, &p), Err(Error::Overflow { .. })));
        let v = phi(10.0, omega, &p);
        assert!(v.re.is_finite() && v.im.is_finite());
        assert!(v.norm() <= 1.0);
    }

    #[test]
    fn a_factor_values() {
        let coil = CoilGeometry::<f64>::default();
        assert!((a_factor(1e-12, &coil, 5e-3) - 2.0).abs() < 1e-10);
        // alpha (2l + h + g) = ln 2 and exp(-2 alpha h) = 1/2
        let alpha = std::f64::consts::LN_2 / (2.0 * coil.h);
        let c = CoilGeometry { g: 0.0, ..coil };
        let v = a_factor(alpha, &c, 0.005);
        assert!((v - 0.75).abs() < 1e-12, "{v}");
        let direct = (-100.0_f64 * 0.055).exp() * ((-2.0_f64).exp() + 1.0);
        assert!((a_factor(100.0, &coil, 5e-3) - direct).abs() < 1e-16);
    }

    #[test]
    fn coil_constant_scaling() {
        let coil = CoilGeometry::<f64>::default();
        let k = coil_constant(&coil);
        let hand = std::f64::consts::PI * 4e-7 * std::f64::consts::PI * 225.0 / (1e-4 * 0.0125_f64.powi(2));
        assert!((k - hand).abs() < 1e-9 * hand);
        assert!((k - 5.6849e4).abs() < 1.0);
        let doubled = CoilGeometry { n_turns: 30, ..coil };
        assert!((coil_constant(&doubled) / k - 4.0).abs() < 1e-12);
        let wide = CoilGeometry {
            r2: coil.r1 + 2.0 * (coil.r2 - coil.r1),
            ..coil
        };
        assert!((k / coil_constant(&wide) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn coil_validation() {
        let good = CoilGeometry::<f64>::default();
        assert!(good.validate().is_ok());
        assert!(CoilGeometry { r2: 0.07, ..good }.validate().is_err());
        assert!(CoilGeometry { h: 0.0, ..good }.validate().is_err());
        assert!(CoilGeometry { n_turns: 0, ..good }.validate().is_err());
        assert!(CoilGeometry { g: -1e-3, ..good }.validate().is_err());
    }

    #[test]
    fn impedance_conversion() {
        let z = Complex::new(3.0, -2.0);
        assert_eq!(impedance_to_inductance(z, z, 50.0).unwrap(), Complex::new(0.0, 0.0));

        let f = 1000.0;
        let dz = Complex::new(0.0, 2.0 * std::f64::consts::PI * f * 5e-6);
        let dl = impedance_to_inductance(dz, Complex::new(0.0, 0.0), f).unwrap();
        assert!((dl - Complex::new(5e-6, 0.0)).norm() < 1e-20);

        let f = 1.0 / (2.0 * std::f64::consts::PI);
        let dl = impedance_to_inductance(Complex::new(1.0, 1.0), Complex::new(0.0, 0.0), f).unwrap();
        assert!((dl - Complex::new(1.0, -1.0)).norm() < 1e-15);

        assert!(impedance_to_inductance(z, z, 0.0).is_err());
        assert!(impedance_to_inductance(z, z, -5.0).is_err());
    }

    #[test]
    fn spectrum_validation() {
        let c = Complex::new(0.0, 0.0);
        assert!(InductanceSpectrum::new(vec![1.0, 2.0], vec![c]).is_err());
        assert!(InductanceSpectrum::new(vec![2.0, 1.0], vec![c, c]).is_err());
        assert!(InductanceSpectrum::new(vec![0.0, 1.0], vec![c, c]).is_err());
        let s = InductanceSpectrum::new(vec![1.0, 2.0], vec![Complex::new(1.0, 2.0), Complex::new(3.0, 4.0)])
            .unwrap();
        assert_eq!(s.stacked(), vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn log_band() {
        let b: Vec<f64> = default_band();
        assert_eq!(b.len(), 10);
        assert_eq!(b[0], 100.0);
        assert_eq!(b[9], 100e3);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(log_spaced(10.0, 1.0, 4).is_err());
        assert!(log_spaced::<f64>(1.0, 10.0, 0).unwrap().is_empty());
    }

    #[test]
    fn alpha_max_rule() {
        let coil = CoilGeometry::<f64>::default();
        let a = alpha_max_for(&coil, 5e-3);
        assert!((-a * (0.01 + coil.h + coil.g)).exp() <= 1e-10 * (1.0 + 1e-12));
        let far = alpha_max_for(&coil, 0.5);
        assert_eq!(far, 20.0 / coil.r1);
    }

    #[test]
    fn zero_thickness_spectrum_vanishes() {
        let coil = CoilGeometry::default();
        let mut p = dp600();
        p.t = 0.0;
        let s = delta_l_spectrum(&coil, &p, &default_band::<f64>()).unwrap();
        assert!(s.values().iter().all(|v| v.re == 0.0 && v.im == 0.0));
    }

    #[test]
    fn sign_regimes() {
        let coil = CoilGeometry::default();
        let band: Vec<f64> = default_band();
        let s = delta_l_spectrum(&coil, &dp600(), &band).unwrap();
        assert!(s.values()[0].re > 0.0);
        let copper_like = PlateParams::new(4e6, 1.0, 1.4e-3, 5e-3);
        let s = delta_l_spectrum(&coil, &copper_like, &band).unwrap();
        assert!(s.values()[9].re < 0.0);
    }

    #[test]
    fn delta_l_agrees_with_model() {
        let coil = CoilGeometry::default();
        let model = ForwardModel::for_liftoff(coil, 5e-3, 512).unwrap();
        let a = model.delta_l(&dp600(), 1e3).unwrap();
        let b = delta_l(&coil, &dp600(), 1e3, model.grid(), model.p_values()).unwrap();
        assert_eq!(a, b);
        assert!(delta_l(&coil, &dp600(), 1e3, model.grid(), &model.p_values()[1..]).is_err());
    }
}

//! File formats and synthetic observations.
//!
//! * Spectrum CSV: `freq_hz,re_dl_h,im_dl_h`
//! * Impedance CSV: `freq_hz,re_z_ohm,im_z_ohm,re_zair_ohm,im_zair_ohm`
//! * Sensitivity CSV: `freq_hz,param,fraction,re_sens,im_sens`
//! * `key = value` text for coil, plate and inversion configs, in
//!   millimetres and MS/m. `#` starts a comment.
//!
//! Numbers are written with 17 significant digits so that save/load round
//! trips are exact, and parsed with Rust's locale-independent float parser.
//! Line numbers in errors are 1-based and count the header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{impedance_to_inductance, CoilGeometry, InductanceSpectrum, PlateParams};
use crate::inversion::InversionConfig;
use crate::scalar::Real;
use crate::sensitivity::SensitivityRow;

pub const SPECTRUM_HEADER: &str = "freq_hz,re_dl_h,im_dl_h";
pub const IMPEDANCE_HEADER: &str = "freq_hz,re_z_ohm,im_z_ohm,re_zair_ohm,im_zair_ohm";
pub const SENSITIVITY_HEADER: &str = "freq_hz,param,fraction,re_sens,im_sens";

const MM: f64 = 1e-3;
const MSM: f64 = 1e6;

/// Relative multiplicative noise `value * (1 + p u)`, `u ~ U[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub amplitude: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(amplitude: f64, seed: u64) -> Result<Self> {
        let m = Self { amplitude, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..1.0).contains(&self.amplitude) {
            Ok(())
        } else {
            Err(Error::arg(
                "amplitude",
                format!("must lie in [0, 1) (got {})", self.amplitude),
            ))
        }
    }
}

/// Perturbs Re and Im of every value with independent draws from a ChaCha8
/// stream seeded by `model.seed`: Re then Im, frequency by frequency.
pub fn add_noise<T: Real>(clean: &InductanceSpectrum<T>, model: &NoiseModel) -> Result<InductanceSpectrum<T>> {
    model.validate()?;
    if model.amplitude == 0.0 {
        return Ok(clean.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let p = T::lit(model.amplitude);
    let mut factor = || T::one() + p * T::lit(rng.gen_range(-1.0..=1.0));
    let values = clean
        .values()
        .iter()
        .map(|v| {
            let re = v.re * factor();
            let im = v.im * factor();
            Complex::new(re, im)
        })
        .collect();
    clean.with_values(values)
}

fn fmt_num<T: Real>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Data rows of a CSV document after checking the header: `(line, fields)`.
/// Blank lines are skipped.
fn csv_rows<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let found = lines.by_ref().find(|(_, l)| !l.is_empty());
    match found {
        Some((_, h)) if h.trim_start_matches('\u{feff}') == header => {}
        Some((line, h)) => {
            return Err(Error::MalformedHeader {
                line,
                expected: header.to_string(),
                found: h.to_string(),
            })
        }
        None => {
            return Err(Error::MalformedHeader {
                line: 1,
                expected: header.to_string(),
                found: String::new(),
            })
        }
    }
    let width = header.split(',').count();
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() != width {
                return Err(Error::FieldCount {
                    line,
                    expected: width,
                    found: fields.len(),
                });
            }
            Ok((line, fields))
        })
        .collect()
}

fn parse_field(line: usize, column: &str, value: &str) -> Result<f64> {
    let parsed: f64 = value.parse().map_err(|_| Error::ParseNumber {
        line,
        column: column.to_string(),
        value: value.to_string(),
    })?;
    if parsed.is_finite() {
        Ok(parsed)
    } else {
        Err(Error::NotFinite {
            line,
            column: column.to_string(),
        })
    }
}

/// Parses numeric rows and enforces positive, strictly increasing
/// frequencies in the first column.
fn numeric_rows(text: &str, header: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let names: Vec<&str> = header.split(',').collect();
    let mut out: Vec<(usize, Vec<f64>)> = Vec::new();
    for (line, fields) in csv_rows(text, header)? {
        let values = fields
            .iter()
            .zip(&names)
            .map(|(v, name)| parse_field(line, name, v))
            .collect::<Result<Vec<f64>>>()?;
        let freq = values[0];
        if freq <= 0.0 {
            return Err(Error::NonPositiveFrequency { line, freq });
        }
        if let Some((_, prev)) = out.last() {
            if freq <= prev[0] {
                return Err(Error::NonMonotone { line, freq });
            }
        }
        out.push((line, values));
    }
    Ok(out)
}

pub fn parse_spectrum<T: Real>(text: &str) -> Result<InductanceSpectrum<T>> {
    let rows = numeric_rows(text, SPECTRUM_HEADER)?;
    let freqs = rows.iter().map(|(_, r)| T::lit(r[0])).collect();
    let values = rows
        .iter()
        .map(|(_, r)| Complex::new(T::lit(r[1]), T::lit(r[2])))
        .collect();
    InductanceSpectrum::new(freqs, values)
}

pub fn format_spectrum<T: Real>(spectrum: &InductanceSpectrum<T>) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for (f, v) in spectrum.freqs().iter().zip(spectrum.values()) {
        let _ = writeln!(out, "{},{},{}", fmt_num(*f), fmt_num(v.re), fmt_num(v.im));
    }
    out
}

pub fn load_spectrum<T: Real>(path: &Path) -> Result<InductanceSpectrum<T>> {
    parse_spectrum(&read_file(path)?)
}

pub fn save_spectrum<T: Real>(spectrum: &InductanceSpectrum<T>, path: &Path) -> Result<()> {
    write_file(path, &format_spectrum(spectrum))
}

/// Converts an impedance table (sample and air readings) into a spectrum.
pub fn convert_impedance<T: Real>(text: &str) -> Result<InductanceSpectrum<T>> {
    let rows = numeric_rows(text, IMPEDANCE_HEADER)?;
    let mut freqs = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (_, r) in rows {
        let f = T::lit(r[0]);
        let z = Complex::new(T::lit(r[1]), T::lit(r[2]));
        let z_air = Complex::new(T::lit(r[3]), T::lit(r[4]));
        freqs.push(f);
        values.push(impedance_to_inductance(z, z_air, f)?);
    }
    InductanceSpectrum::new(freqs, values)
}

pub fn convert_impedance_file(path_in: &Path, path_out: &Path) -> Result<()> {
    let spectrum: InductanceSpectrum<f64> = convert_impedance(&read_file(path_in)?)?;
    save_spectrum(&spectrum, path_out)
}

pub fn format_sensitivity<T: Real>(rows: &[SensitivityRow<T>]) -> String {
    let mut out = String::from(SENSITIVITY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(r.freq),
            r.param.name(),
            fmt_num(r.fraction),
            fmt_num(r.re),
            fmt_num(r.im)
        );
    }
    out
}

/// `key = value` pairs with their line numbers. Duplicate keys and lines
/// without `=` are errors.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                reason: format!("expected `key = value`, found `{content}`"),
            });
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config {
                line,
                reason: "empty key".into(),
            });
        }
        if out.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(Error::Config {
                line,
                reason: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(out)
}

/// Typed access to a parsed key/value document that tracks which keys were
/// consumed so leftovers can be reported as unknown.
struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    fn parse(text: &str) -> Result<Self> {
        Ok(Self {
            entries: parse_key_values(text)?,
        })
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        let Some((line, value)) = self.entries.remove(key) else {
            return Ok(None);
        };
        parse_field(line, key, &value).map(Some).map_err(|e| match e {
            Error::ParseNumber { .. } | Error::NotFinite { .. } => Error::Config {
                line,
                reason: format!("`{key}` is not a finite number: `{value}`"),
            },
            other => other,
        })
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| Error::ConfigField {
            field: key.to_string(),
            reason: "missing".into(),
        })
    }

    fn integer(&mut self, key: &str) -> Result<Option<u64>> {
        let Some((line, value)) = self.entries.remove(key) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|_| Error::Config {
            line,
            reason: format!("`{key}` must be a non-negative integer: `{value}`"),
        })
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Config {
                line,
                reason: format!("unknown key `{key}`"),
            }),
        }
    }
}

/// Coil from `r1_mm, r2_mm, h_mm, g_mm, l0_mm, n_turns` (all required).
pub fn parse_coil<T: Real>(text: &str) -> Result<CoilGeometry<T>> {
    let mut kv = KeyValues::parse(text)?;
    let mut mm = |key: &str| kv.required(key).map(|v| T::lit(v * MM));
    let (r1, r2, h, g, l0) = (mm("r1_mm")?, mm("r2_mm")?, mm("h_mm")?, mm("g_mm")?, mm("l0_mm")?);
    let n_turns = kv.integer("n_turns")?.ok_or_else(|| Error::ConfigField {
        field: "n_turns".into(),
        reason: "missing".into(),
    })?;
    kv.finish()?;
    let coil = CoilGeometry {
        r1,
        r2,
        h,
        g,
        l0,
        n_turns: u32::try_from(n_turns).map_err(|_| Error::ConfigField {
            field: "n_turns".into(),
            reason: "too large".into(),
        })?,
    };
    coil.validate()?;
    Ok(coil)
}

pub fn format_coil<T: Real>(coil: &CoilGeometry<T>) -> String {
    let mm = |v: T| v.to_f64_lossy() / MM;
    format!(
        "r1_mm = {}\nr2_mm = {}\nh_mm = {}\ng_mm = {}\nl0_mm = {}\nn_turns = {}\n",
        mm(coil.r1),
        mm(coil.r2),
        mm(coil.h),
        mm(coil.g),
        mm(coil.l0),
        coil.n_turns
    )
}

/// Plate (or truth sidecar) from `sigma_msm, mu_r, t_mm, liftoff_mm`.
pub fn parse_plate<T: Real>(text: &str) -> Result<PlateParams<T>> {
    let mut kv = KeyValues::parse(text)?;
    let plate = PlateParams::new(
        T::lit(kv.required("sigma_msm")? * MSM),
        T::lit(kv.required("mu_r")?),
        T::lit(kv.required("t_mm")? * MM),
        T::lit(kv.required("liftoff_mm")? * MM),
    );
    kv.finish()?;
    plate.validate_physical()?;
    Ok(plate)
}

pub fn format_plate<T: Real>(plate: &PlateParams<T>) -> String {
    let v = |x: T| x.to_f64_lossy();
    format!(
        "sigma_msm = {:.17e}\nmu_r = {:.17e}\nt_mm = {:.17e}\nliftoff_mm = {:.17e}\n",
        v(plate.sigma) / MSM,
        v(plate.mu_r),
        v(plate.t) / MM,
        v(plate.l) / MM
    )
}

pub fn load_coil<T: Real>(path: &Path) -> Result<CoilGeometry<T>> {
    parse_coil(&read_file(path)?)
}

pub fn load_plate<T: Real>(path: &Path) -> Result<PlateParams<T>> {
    parse_plate(&read_file(path)?)
}

pub fn save_plate<T: Real>(plate: &PlateParams<T>, path: &Path) -> Result<()> {
    write_file(path, &format_plate(plate))
}

/// Keys of the inversion config file and the field each one sets, in user
/// units. Every key is optional; absent keys keep the default.
pub const INVERSION_KEYS: [&str; 21] = [
    "init_sigma_msm",
    "init_mu_r",
    "init_t_mm",
    "init_liftoff_mm",
    "max_iter",
    "step_tol",
    "residual_tol",
    "rank_tau",
    "fd_fraction",
    "damping",
    "max_log_step",
    "grad_tol",
    "n_nodes",
    "sigma_min_msm",
    "sigma_max_msm",
    "mu_r_min",
    "mu_r_max",
    "t_min_mm",
    "t_max_mm",
    "liftoff_min_mm",
    "liftoff_max_mm",
];

/// Applies an inversion config document on top of `base`.
pub fn parse_inversion_config<T: Real>(text: &str, base: &InversionConfig<T>) -> Result<InversionConfig<T>> {
    let mut kv = KeyValues::parse(text)?;
    let mut cfg = base.clone();
    let set = |kv: &mut KeyValues, key: &str, scale: f64, slot: &mut T| -> Result<()> {
        if let Some(v) = kv.number(key)? {
            *slot = T::lit(v * scale);
        }
        Ok(())
    };
    set(&mut kv, "init_sigma_msm", MSM, &mut cfg.init.sigma)?;
    set(&mut kv, "init_mu_r", 1.0, &mut cfg.init.mu_r)?;
    set(&mut kv, "init_t_mm", MM, &mut cfg.init.t)?;
    set(&mut kv, "init_liftoff_mm", MM, &mut cfg.init.l)?;
    set(&mut kv, "step_tol", 1.0, &mut cfg.step_tol)?;
    set(&mut kv, "residual_tol", 1.0, &mut cfg.residual_tol)?;
    set(&mut kv, "rank_tau", 1.0, &mut cfg.rank_threshold)?;
    set(&mut kv, "fd_fraction", 1.0, &mut cfg.jacobian_fraction)?;
    set(&mut kv, "max_log_step", 1.0, &mut cfg.max_log_step)?;
    set(&mut kv, "grad_tol", 1.0, &mut cfg.grad_tol)?;
    set(&mut kv, "sigma_min_msm", MSM, &mut cfg.bounds.lower.sigma)?;
    set(&mut kv, "sigma_max_msm", MSM, &mut cfg.bounds.upper.sigma)?;
    set(&mut kv, "mu_r_min", 1.0, &mut cfg.bounds.lower.mu_r)?;
    set(&mut kv, "mu_r_max", 1.0, &mut cfg.bounds.upper.mu_r)?;
    set(&mut kv, "t_min_mm", MM, &mut cfg.bounds.lower.t)?;
    set(&mut kv, "t_max_mm", MM, &mut cfg.bounds.upper.t)?;
    set(&mut kv, "liftoff_min_mm", MM, &mut cfg.bounds.lower.l)?;
    set(&mut kv, "liftoff_max_mm", MM, &mut cfg.bounds.upper.l)?;
    if let Some(v) = kv.integer("max_iter")? {
        cfg.max_iter = v as usize;
    }
    if let Some(v) = kv.integer("damping")? {
        cfg.damping = u32::try_from(v).map_err(|_| Error::ConfigField {
            field: "damping".into(),
            reason: "too large".into(),
        })?;
    }
    if let Some(v) = kv.integer("n_nodes")? {
        cfg.n_nodes = v as usize;
    }
    kv.finish()?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_inversion_config<T: Real>(path: &Path, base: &InversionConfig<T>) -> Result<InversionConfig<T>> {
    parse_inversion_config(&read_file(path)?, base)
}

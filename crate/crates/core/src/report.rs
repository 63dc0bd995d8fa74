//! Inversion reports in user units and the desk-scale reproduction suite:
//! five noiseless round trips over the three steel grades and lift-offs,
//! plus a noise sweep on the DP600 sample.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::dataio::{add_noise, NoiseModel};
use crate::error::Result;
use crate::forward::{default_band, CoilGeometry, ForwardModel, PlateParams};
use crate::inversion::{invert, InversionConfig, InversionResult, StopReason};
use crate::scalar::Real;
use crate::specfun::DEFAULT_NODES;

/// Relative errors in percent, `100 |estimate - truth| / truth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamErrors {
    pub sigma_pct: f64,
    pub mu_r_pct: f64,
    pub t_pct: f64,
    pub liftoff_pct: f64,
}

impl ParamErrors {
    pub fn between<T: Real>(estimate: &PlateParams<T>, truth: &PlateParams<T>) -> Self {
        let e = |a: T, b: T| 100.0 * ((a - b) / b).abs().to_f64_lossy();
        Self {
            sigma_pct: e(estimate.sigma, truth.sigma),
            mu_r_pct: e(estimate.mu_r, truth.mu_r),
            t_pct: e(estimate.t, truth.t),
            liftoff_pct: e(estimate.l, truth.l),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.sigma_pct, self.mu_r_pct, self.t_pct, self.liftoff_pct]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

/// Machine-readable summary of one inversion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionReport {
    pub sigma_msm: f64,
    pub mu_r: f64,
    pub t_mm: f64,
    pub liftoff_mm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub wall_time_ms: f64,
    pub residual: Vec<f64>,
    pub mask: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors: Option<ParamErrors>,
}

impl InversionReport {
    pub fn new<T: Real>(result: &InversionResult<T>, truth: Option<&PlateParams<T>>, wall_time_ms: f64) -> Self {
        let p = &result.params;
        Self {
            sigma_msm: p.sigma.to_f64_lossy() / 1e6,
            mu_r: p.mu_r.to_f64_lossy(),
            t_mm: p.t.to_f64_lossy() * 1e3,
            liftoff_mm: p.l.to_f64_lossy() * 1e3,
            iterations: result.iterations,
            converged: result.converged,
            stop: result.stop,
            wall_time_ms,
            residual: result.residual_history.iter().map(|v| v.to_f64_lossy()).collect(),
            mask: result.rank_masks.iter().map(ToString::to_string).collect(),
            errors: truth.map(|t| ParamErrors::between(p, t)),
        }
    }
}

/// One synthetic experiment: a truth, optional noise, and a label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReproCase {
    pub label: &'static str,
    pub truth: PlateParams<f64>,
    pub noise: f64,
}

pub const DP600: PlateParams<f64> = PlateParams {
    sigma: 4.13e6,
    mu_r: 222.0,
    t: 1.40e-3,
    l: 5e-3,
};
pub const DP800: PlateParams<f64> = PlateParams {
    sigma: 3.81e6,
    mu_r: 144.0,
    t: 1.70e-3,
    l: 5e-3,
};
pub const DP1000: PlateParams<f64> = PlateParams {
    sigma: 3.80e6,
    mu_r: 122.0,
    t: 1.23e-3,
    l: 5e-3,
};

/// The five noiseless round trips.
pub fn reconstruction_cases() -> Vec<ReproCase> {
    let at = |p: PlateParams<f64>, l: f64| PlateParams { l, ..p };
    vec![
        ReproCase { label: "DP600 @ 5 mm", truth: DP600, noise: 0.0 },
        ReproCase { label: "DP800 @ 5 mm", truth: DP800, noise: 0.0 },
        ReproCase { label: "DP1000 @ 5 mm", truth: DP1000, noise: 0.0 },
        ReproCase { label: "DP1000 @ 30 mm", truth: at(DP1000, 30e-3), noise: 0.0 },
        ReproCase { label: "DP1000 @ 50 mm", truth: at(DP1000, 50e-3), noise: 0.0 },
    ]
}

/// DP600 at 0, 1, 5 and 10 % noise.
pub fn noise_cases() -> Vec<ReproCase> {
    [("DP600 0 %", 0.0), ("DP600 1 %", 0.01), ("DP600 5 %", 0.05), ("DP600 10 %", 0.10)]
        .into_iter()
        .map(|(label, noise)| ReproCase { label, truth: DP600, noise })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub case: ReproCase,
    pub seed: u64,
    pub report: InversionReport,
    #[serde(skip)]
    pub result: InversionResult<f64>,
}

/// Simulates `case` on the default band, adds seeded noise and inverts.
pub fn run_case(coil: &CoilGeometry<f64>, case: &ReproCase, seed: u64, cfg: &InversionConfig<f64>) -> Result<CaseOutcome> {
    let model = ForwardModel::for_liftoff(*coil, case.truth.l, DEFAULT_NODES)?;
    let clean = model.spectrum(&case.truth, &default_band())?;
    let observed = add_noise(&clean, &NoiseModel::new(case.noise, seed)?)?;
    let start = Instant::now();
    let result = invert(coil, &observed, cfg)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(CaseOutcome {
        case: *case,
        seed,
        report: InversionReport::new(&result, Some(&case.truth), ms),
        result,
    })
}

/// Runs the reconstruction and noise cases; `seed` drives every noise draw.
pub fn run_reproduction(coil: &CoilGeometry<f64>, cfg: &InversionConfig<f64>, seed: u64) -> Result<Vec<CaseOutcome>> {
    reconstruction_cases()
        .iter()
        .chain(&noise_cases())
        .map(|c| run_case(coil, c, seed, cfg))
        .collect()
}

pub const REPRO_CSV_HEADER: &str = "case,noise,seed,sigma_msm,mu_r,t_mm,liftoff_mm,\
sigma_err_pct,mu_r_err_pct,t_err_pct,liftoff_err_pct,iterations,converged,time_ms";

pub fn format_reproduction_csv(outcomes: &[CaseOutcome]) -> String {
    let mut out = String::from(REPRO_CSV_HEADER);
    out.push('\n');
    for o in outcomes {
        let r = &o.report;
        let e = r.errors.map(|e| e.as_array()).unwrap_or([f64::NAN; 4]);
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.4},{:.6},{:.6},{:.4e},{:.4e},{:.4e},{:.4e},{},{},{:.1}",
            o.case.label,
            o.case.noise,
            o.seed,
            r.sigma_msm,
            r.mu_r,
            r.t_mm,
            r.liftoff_mm,
            e[0],
            e[1],
            e[2],
            e[3],
            r.iterations,
            r.converged,
            r.wall_time_ms
        );
    }
    out
}

/// Two aligned text tables: reconstruction and noise effect.
pub fn format_reproduction_table(outcomes: &[CaseOutcome]) -> String {
    let mut out = String::new();
    let (noiseless, noisy): (Vec<_>, Vec<_>) = outcomes
        .iter()
        .partition(|o| o.case.label.contains('@'));
    for (title, rows) in [("Reconstruction (noiseless)", noiseless), ("Noise effect (DP600)", noisy)] {
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>8} {:>7} {:>8} | {:>9} {:>9} {:>9} {:>9} | {:>4} {:>5} {:>8}",
            "case", "σ MS/m", "μ_r", "t mm", "l mm", "σ err%", "μ err%", "t err%", "l err%", "it", "conv", "time ms"
        );
        for o in rows {
            let r = &o.report;
            let e = r.errors.map(|e| e.as_array()).unwrap_or([f64::NAN; 4]);
            let _ = writeln!(
                out,
                "{:<16} {:>9.4} {:>8.2} {:>7.4} {:>8.4} | {:>9.3e} {:>9.3e} {:>9.3e} {:>9.3e} | {:>4} {:>5} {:>8.1}",
                o.case.label,
                r.sigma_msm,
                r.mu_r,
                r.t_mm,
                r.liftoff_mm,
                e[0],
                e[1],
                e[2],
                e[3],
                r.iterations,
                if r.converged { "yes" } else { "no" },
                r.wall_time_ms
            );
        }
        out.push('\n');
    }
    out
}

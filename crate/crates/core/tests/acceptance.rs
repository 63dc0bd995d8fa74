//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every inversion made along the way is also checked for
//! a strictly decreasing objective and in-bounds iterates (criterion 8).

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{exact_normal_solve, rel_c, MU0};
use eddyspec::forward::{default_band, log_spaced, phi, CoilGeometry, ForwardModel, PlateParams};
use eddyspec::inversion::{dynamic_rank_mask, gauss_newton_step, invert, InversionConfig, InversionResult, RankMask};
use eddyspec::report::{reconstruction_cases, run_case, ReproCase, DP1000, DP600, DP800};
use eddyspec::sensitivity::{jacobian, JacobianMatrix, Param};
use eddyspec::specfun::DEFAULT_NODES;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Inversion traces collected for the monotonicity check.
#[derive(Default)]
struct Runs(Vec<(String, InversionResult)>);

impl Runs {
    fn push(&mut self, label: impl Into<String>, r: &InversionResult) {
        self.0.push((label.into(), r.clone()));
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn round_trips(runs: &mut Runs) -> Outcome {
    let coil = CoilGeometry::default();
    let cfg = InversionConfig::default();
    let mut worst = (0.0f64, 0usize, 0.0f64);
    let mut failures = Vec::new();
    for case in reconstruction_cases() {
        let o = run_case(&coil, &case, 0, &cfg).map_err(|e| format!("{}: {e}", case.label))?;
        runs.push(case.label, &o.result);
        let err = o.report.errors.expect("truth known").max();
        let (iters, ms) = (o.report.iterations, o.report.wall_time_ms);
        worst = (worst.0.max(err), worst.1.max(iters), worst.2.max(ms));
        if err > 0.5 || iters > 50 || ms >= 5000.0 || !o.report.converged {
            failures.push(format!("{}: err {err:.3e} %, {iters} it, {ms:.0} ms, {:?}", case.label, o.report.stop));
        }
    }
    let summary = format!("max err {:.2e} %, max {} it, max {:.0} ms", worst.0, worst.1, worst.2);
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn noise_robustness(runs: &mut Runs) -> Outcome {
    let coil = CoilGeometry::default();
    let cfg = InversionConfig::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (noise, limit) in [(0.01, 2.0), (0.05, 6.0), (0.10, 12.0)] {
        let case = ReproCase { label: "DP600", truth: DP600, noise };
        let mut errs: [Vec<f64>; 4] = Default::default();
        for seed in 0..20u64 {
            let o = run_case(&coil, &case, seed, &cfg).map_err(|e| format!("{noise} seed {seed}: {e}"))?;
            runs.push(format!("DP600 {noise} seed {seed}"), &o.result);
            for (k, e) in o.report.errors.expect("truth known").as_array().into_iter().enumerate() {
                errs[k].push(e);
            }
        }
        let med = errs.map(median);
        let ok = med.iter().all(|m| *m <= limit);
        pass &= ok;
        lines.push(format!(
            "{:.0} %: median sigma {:.3} mu_r {:.3} t {:.3} l {:.3} (limit {limit})",
            noise * 100.0,
            med[0],
            med[1],
            med[2],
            med[3]
        ));
    }
    let text = lines.join("; ");
    if pass {
        Ok(text)
    } else {
        Err(text)
    }
}

fn saturation() -> Outcome {
    let coil = CoilGeometry::default();
    let band = default_band();
    let jac = |f: f64| jacobian(&coil, &DP600, &band, [f; 4]).map_err(|e| e.to_string());
    let (j1, jh, j50) = (jac(0.01)?, jac(0.005)?, jac(0.5)?);
    let small = Param::ALL.map(|p| rel_diff(j1.column(p), jh.column(p)));
    let large = Param::ALL.map(|p| rel_diff(j50.column(p), j1.column(p)));
    let s_max = small.iter().cloned().fold(0.0, f64::max);
    let l_max = large.iter().cloned().fold(0.0, f64::max);
    let text = format!("1 % vs 0.5 %: max {s_max:.3e}; 50 % vs 1 %: max {l_max:.3e}");
    if s_max < 0.02 && l_max > 0.05 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn limiting_cases() -> Outcome {
    let band = default_band::<f64>();
    let model = |l: f64| ForwardModel::for_liftoff(CoilGeometry::default(), l, DEFAULT_NODES).map_err(|e| e.to_string());
    let m5 = model(5e-3)?;
    let mut fails = Vec::new();

    let mut bare_max = 0.0f64;
    for plate in [PlateParams { t: 0.0, ..DP600 }, PlateParams { sigma: 0.0, mu_r: 1.0, ..DP600 }] {
        for v in m5.spectrum(&plate, &band).map_err(|e| e.to_string())?.values() {
            bare_max = bare_max.max(v.norm());
        }
    }
    if bare_max >= 1e-18 {
        fails.push(format!("vacuum |dL| {bare_max:e}"));
    }

    let thick = PlateParams { t: 0.05, ..DP600 };
    let mut half_max = 0.0f64;
    for f in &band {
        let w = 2.0 * std::f64::consts::PI * f;
        for alpha in [0.5, 5.0, 50.0, 500.0] {
            let a1 = Complex64::new(alpha * alpha, w * thick.sigma * thick.mu_r * MU0).sqrt();
            let ma = thick.mu_r * alpha;
            half_max = half_max.max(rel_c(phi(alpha, w, &thick), (ma - a1) / (ma + a1)));
        }
    }
    if half_max >= 1e-8 {
        fails.push(format!("half-space {half_max:e}"));
    }

    for base in [DP600, DP800, DP1000] {
        let mut prev: Option<Vec<f64>> = None;
        for l in [5e-3, 30e-3, 50e-3, 100e-3] {
            let plate = PlateParams { l, ..base };
            let mags: Vec<f64> = model(l)?
                .spectrum(&plate, &band)
                .map_err(|e| e.to_string())?
                .values()
                .iter()
                .map(|v| v.norm())
                .collect();
            if let Some(p) = &prev {
                if !mags.iter().zip(p).all(|(now, before)| now < before) {
                    fails.push(format!("lift-off not monotone at {} mm", l * 1e3));
                }
            }
            prev = Some(mags);
        }
    }
    let text = format!("vacuum max |dL| {bare_max:e} H, half-space rel {half_max:.2e}, lift-off monotone");
    if fails.is_empty() {
        Ok(text)
    } else {
        Err(fails.join("; "))
    }
}

fn grid_doubling() -> Outcome {
    let coil = CoilGeometry::default();
    let band = default_band::<f64>();
    let mut worst = 0.0f64;
    for plate in [DP600, DP800, DP1000] {
        let run = |n| {
            ForwardModel::for_liftoff(coil, plate.l, n)
                .and_then(|m| m.spectrum(&plate, &band))
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run(DEFAULT_NODES)?, run(2 * DEFAULT_NODES)?);
        for (x, y) in a.values().iter().zip(b.values()) {
            worst = worst.max(rel_c(*x, *y));
        }
    }
    let text = format!("{} -> {} nodes: max rel change {worst:.2e}", DEFAULT_NODES, 2 * DEFAULT_NODES);
    if worst < 1e-4 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn skin_effect_degeneracy(runs: &mut Runs) -> Outcome {
    let coil = CoilGeometry::default();
    let cfg = InversionConfig::default();
    let freqs = log_spaced(1e6, 1e7, 10).map_err(|e| e.to_string())?;
    let j = jacobian(&coil, &DP600, &freqs, [cfg.jacobian_fraction; 4]).map_err(|e| e.to_string())?;
    let norms = Param::ALL.map(|p| norm(&j.scaled_column(p)));
    let ratio = norms[Param::Thickness.index()] / norms.iter().cloned().fold(0.0, f64::max);
    let mask = dynamic_rank_mask(&j, 1e-6).map_err(|e| e.to_string())?;
    let expected = RankMask::from_retained([true, true, false, true]);

    let obs = ForwardModel::for_liftoff(coil, DP600.l, DEFAULT_NODES)
        .and_then(|m| m.spectrum(&DP600, &freqs))
        .map_err(|e| e.to_string())?;
    let r = invert(&coil, &obs, &InversionConfig { max_iter: 10, ..cfg.clone() }).map_err(|e| e.to_string())?;
    runs.push("DP600 >= 1 MHz", &r);
    let frozen = r.iterates.iter().all(|p| p.t == cfg.init.t);
    let all_masked = !r.rank_masks.is_empty() && r.rank_masks.iter().all(|m| *m == expected);

    let text = format!(
        "t/max scaled column {ratio:.2e}, mask {mask}, {} inverter masks all {expected}: {all_masked}, t frozen: {frozen}",
        r.rank_masks.len()
    );
    if ratio < 1e-6 && mask == expected && all_masked && frozen {
        Ok(text)
    } else {
        Err(text)
    }
}

fn linear_algebra_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0007);
    let reference = PlateParams::new(1.0, 1.0, 1.0, 1.0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        // columns of very different magnitude, as in a physical Jacobian
        let columns: [Vec<f64>; 4] = std::array::from_fn(|_| {
            let scale = 10f64.powf(rng.gen_range(-8.0..0.0));
            (0..20).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
        });
        let residual: Vec<f64> = (0..20).map(|_| rng.gen_range(-1e-6..1e-6)).collect();
        let j = JacobianMatrix::from_columns(columns.clone(), reference, [1e-4; 4]).map_err(|e| e.to_string())?;
        let step = gauss_newton_step(&j, &residual, RankMask::FULL).map_err(|e| e.to_string())?;
        let exact = exact_normal_solve(&columns, &residual);
        let num: f64 = step.iter().zip(&exact).map(|(s, x)| (s + x).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(num / norm(&exact));
    }
    let text = format!("50 systems 20x4: max rel deviation {worst:.2e}");
    if worst < 1e-10 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn monotone_residuals(runs: &Runs) -> Outcome {
    let bounds = InversionConfig::<f64>::default().bounds;
    let mut fails = Vec::new();
    let mut steps = 0;
    for (label, r) in &runs.0 {
        steps += r.residual_history.len().saturating_sub(1);
        if r.residual_history.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less)) {
            fails.push(format!("{label}: objective did not decrease"));
        }
        if r.iterates.iter().any(|p| !bounds.contains(p)) {
            fails.push(format!("{label}: iterate left the bounds"));
        }
    }
    if runs.0.is_empty() {
        return Err("no inversion runs recorded".into());
    }
    let text = format!("{} runs, {steps} accepted steps", runs.0.len());
    if fails.is_empty() {
        Ok(text)
    } else {
        Err(format!("{text}; {}", fails.join("; ")))
    }
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {n}. {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n}. {name} ({secs:.1} s): {detail}");
            }
        }
    };
    report(1, "noiseless round trips", &mut || round_trips(&mut runs));
    report(2, "noise robustness", &mut || noise_robustness(&mut runs));
    report(3, "sensitivity saturation", &mut saturation);
    report(4, "forward limiting cases", &mut limiting_cases);
    report(5, "quadrature convergence", &mut grid_doubling);
    report(6, "skin-effect rank degeneracy", &mut || skin_effect_degeneracy(&mut runs));
    report(7, "linear-algebra oracle", &mut linear_algebra_oracle);
    report(8, "monotone residuals and bounds", &mut || monotone_residuals(&runs));
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

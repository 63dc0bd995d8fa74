mod manifest;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use eddyspec::dataio::{
    add_noise, convert_impedance_file, format_sensitivity, load_coil, load_inversion_config, load_plate,
    load_spectrum, save_plate, save_spectrum, NoiseModel,
};
use eddyspec::forward::{
    log_spaced, CoilGeometry, ForwardModel, InductanceSpectrum, PlateParams, DEFAULT_BAND_POINTS, DEFAULT_FMAX_HZ,
    DEFAULT_FMIN_HZ,
};
use eddyspec::inversion::{invert, InversionConfig};
use eddyspec::report::{format_reproduction_csv, format_reproduction_table, run_reproduction, InversionReport};
use eddyspec::sensitivity::{sensitivity_with_model, Param, DEFAULT_SENSITIVITY_FRACTIONS};
use eddyspec::specfun::DEFAULT_NODES;
use serde::Serialize;

use manifest::{truth_sidecar, RunManifest};

/// Eddy-current inductance spectroscopy: forward model, sensitivities,
/// synthetic observations and Gauss-Newton inversion for steel plates.
#[derive(Debug, Parser)]
#[command(name = "eddyspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the inductance change of a plate over a band.
    Forward {
        #[command(flatten)]
        coil: CoilArg,
        /// Plate config (sigma_msm, mu_r, t_mm, liftoff_mm).
        #[arg(long)]
        plate: PathBuf,
        #[command(flatten)]
        band: BandArgs,
        /// Spectrum CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference sensitivities of the four parameters.
    Sensitivity {
        #[command(flatten)]
        coil: CoilArg,
        /// Reference plate config.
        #[arg(long)]
        plate: PathBuf,
        #[command(flatten)]
        band: BandArgs,
        /// Relative perturbations, each in (0, 0.5].
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SENSITIVITY_FRACTIONS)]
        fractions: Vec<f64>,
        /// Sensitivity CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// Also draw the table as an SVG line plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Simulate a truth plate and add seeded relative noise.
    Synth {
        #[command(flatten)]
        coil: CoilArg,
        /// Truth plate config; copied next to the output as `<out>.truth.cfg`.
        #[arg(long)]
        truth: PathBuf,
        #[command(flatten)]
        band: BandArgs,
        /// Noise amplitude p in [0, 1): each component is scaled by 1 + p u, u ~ U[-1, 1].
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Spectrum CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit sigma, mu_r, t and lift-off to a measured spectrum.
    Invert {
        #[command(flatten)]
        coil: CoilArg,
        /// Spectrum CSV (freq_hz,re_dl_h,im_dl_h).
        #[arg(long)]
        spectrum: PathBuf,
        /// Optional truth plate config; adds relative errors to the report.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// JSON report to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the reconstruction and noise cases and print the tables.
    Report {
        #[command(flatten)]
        coil: CoilArg,
        /// Seed for every noise draw.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also write the rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert an impedance CSV (with air reference) to an inductance spectrum.
    Convert {
        /// Impedance CSV (freq_hz,re_z_ohm,im_z_ohm,re_zair_ohm,im_zair_ohm).
        #[arg(long)]
        impedance: PathBuf,
        /// Spectrum CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct CoilArg {
    /// Coil config (r1_mm, r2_mm, h_mm, g_mm, l0_mm, n_turns); defaults to the reference gradiometer.
    #[arg(long)]
    coil: Option<PathBuf>,
}

impl CoilArg {
    fn load(&self) -> Result<CoilGeometry> {
        match &self.coil {
            Some(p) => load_coil(p).with_context(|| format!("coil config {}", p.display())),
            None => Ok(CoilGeometry::default()),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct BandArgs {
    #[arg(long, default_value_t = DEFAULT_FMIN_HZ)]
    fmin_hz: f64,
    #[arg(long, default_value_t = DEFAULT_FMAX_HZ)]
    fmax_hz: f64,
    /// Number of log-spaced frequencies.
    #[arg(long, default_value_t = DEFAULT_BAND_POINTS)]
    m: usize,
    /// Explicit comma-separated frequency list in Hz; overrides the log range.
    #[arg(long, value_delimiter = ',')]
    freqs: Option<Vec<f64>>,
}

impl BandArgs {
    fn frequencies(&self) -> Result<Vec<f64>> {
        match &self.freqs {
            Some(list) => {
                eddyspec::forward::check_frequencies(list)?;
                Ok(list.clone())
            }
            None => Ok(log_spaced(self.fmin_hz, self.fmax_hz, self.m)?),
        }
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Inversion config file (key = value); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    init_sigma_msm: Option<f64>,
    #[arg(long)]
    init_mu_r: Option<f64>,
    #[arg(long)]
    init_t_mm: Option<f64>,
    #[arg(long)]
    init_liftoff_mm: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative column-norm threshold below which a parameter is frozen.
    #[arg(long)]
    rank_tau: Option<f64>,
    /// Relative finite-difference step for the Jacobian.
    #[arg(long)]
    fd_fraction: Option<f64>,
}

impl SolverArgs {
    fn resolve(&self) -> Result<InversionConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_inversion_config(p, &InversionConfig::default())
                .with_context(|| format!("inversion config {}", p.display()))?,
            None => InversionConfig::default(),
        };
        let set = |slot: &mut f64, v: Option<f64>, unit: f64| {
            if let Some(v) = v {
                *slot = v * unit;
            }
        };
        set(&mut cfg.init.sigma, self.init_sigma_msm, 1e6);
        set(&mut cfg.init.mu_r, self.init_mu_r, 1.0);
        set(&mut cfg.init.t, self.init_t_mm, 1e-3);
        set(&mut cfg.init.l, self.init_liftoff_mm, 1e-3);
        set(&mut cfg.rank_threshold, self.rank_tau, 1.0);
        set(&mut cfg.jacobian_fraction, self.fd_fraction, 1.0);
        if let Some(n) = self.max_iter {
            cfg.max_iter = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    let start = Instant::now();
    let (mut manifest, code) = match command {
        Command::Forward { coil, plate, band, out } => {
            let c = coil.load()?;
            let p = load_plate(&plate).with_context(|| format!("plate config {}", plate.display()))?;
            let freqs = band.frequencies()?;
            let s = simulate(&c, &p, &freqs)?;
            save_spectrum(&s, &out)?;
            let mut m = RunManifest::new("forward", Resolved { coil: c, plate: Some(p), freqs: Some(freqs), ..Default::default() })?
                .input("coil", coil.coil.as_deref())
                .input("plate", Some(&plate));
            m.outputs.push(out);
            (m, ExitCode::SUCCESS)
        }
        Command::Sensitivity { coil, plate, band, fractions, out, svg } => {
            let c = coil.load()?;
            let p = load_plate(&plate).with_context(|| format!("plate config {}", plate.display()))?;
            let freqs = band.frequencies()?;
            let model = ForwardModel::for_liftoff(c, p.l, DEFAULT_NODES)?;
            let rows = sensitivity_with_model(&model, &p, &Param::ALL, &fractions, &freqs)?;
            write(&out, &format_sensitivity(&rows))?;
            let mut m = RunManifest::new(
                "sensitivity",
                Resolved { coil: c, plate: Some(p), freqs: Some(freqs), fractions: Some(fractions), ..Default::default() },
            )?
            .input("coil", coil.coil.as_deref())
            .input("plate", Some(&plate));
            m.outputs.push(out);
            if let Some(svg_path) = svg {
                write(&svg_path, &svg::sensitivity_svg(&rows))?;
                m.outputs.push(svg_path);
            }
            (m, ExitCode::SUCCESS)
        }
        Command::Synth { coil, truth, band, noise, seed, out } => {
            let c = coil.load()?;
            let p = load_plate(&truth).with_context(|| format!("truth config {}", truth.display()))?;
            let freqs = band.frequencies()?;
            let noise_model = NoiseModel::new(noise, seed)?;
            let s = add_noise(&simulate(&c, &p, &freqs)?, &noise_model)?;
            save_spectrum(&s, &out)?;
            let sidecar = truth_sidecar(&out);
            save_plate(&p, &sidecar)?;
            let mut m = RunManifest::new(
                "synth",
                Resolved { coil: c, plate: Some(p), freqs: Some(freqs), noise: Some(noise), ..Default::default() },
            )?
            .input("coil", coil.coil.as_deref())
            .input("truth", Some(&truth));
            m.seed = Some(seed);
            m.outputs.extend([out, sidecar]);
            (m, ExitCode::SUCCESS)
        }
        Command::Invert { coil, spectrum, truth, solver, out } => {
            let c = coil.load()?;
            let cfg = solver.resolve()?;
            let observed: InductanceSpectrum =
                load_spectrum(&spectrum).with_context(|| format!("spectrum {}", spectrum.display()))?;
            let truth_plate = truth
                .as_deref()
                .map(|t| load_plate(t).with_context(|| format!("truth config {}", t.display())))
                .transpose()?;
            let t0 = Instant::now();
            let result = invert(&c, &observed, &cfg)?;
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            let report = InversionReport::new(&result, truth_plate.as_ref(), ms);
            write(&out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            eprintln!(
                "{}: sigma {:.4} MS/m, mu_r {:.2}, t {:.4} mm, lift-off {:.4} mm after {} iterations ({:?})",
                if report.converged { "converged" } else { "not converged" },
                report.sigma_msm,
                report.mu_r,
                report.t_mm,
                report.liftoff_mm,
                report.iterations,
                report.stop
            );
            let mut m = RunManifest::new("invert", Resolved { coil: c, inversion: Some(cfg), ..Default::default() })?
                .input("coil", coil.coil.as_deref())
                .input("spectrum", Some(&spectrum))
                .input("truth", truth.as_deref())
                .input("config", solver.config.as_deref());
            m.outputs.push(out);
            let code = if result.converged { ExitCode::SUCCESS } else { ExitCode::from(2) };
            (m, code)
        }
        Command::Report { coil, seed, solver, out } => {
            let c = coil.load()?;
            let cfg = solver.resolve()?;
            let outcomes = run_reproduction(&c, &cfg, seed)?;
            print!("{}", format_reproduction_table(&outcomes));
            let Some(out) = out else {
                return Ok(ExitCode::SUCCESS);
            };
            write(&out, &format_reproduction_csv(&outcomes))?;
            let mut m = RunManifest::new("report", Resolved { coil: c, inversion: Some(cfg), ..Default::default() })?
                .input("coil", coil.coil.as_deref())
                .input("config", solver.config.as_deref());
            m.seed = Some(seed);
            m.outputs.push(out);
            (m, ExitCode::SUCCESS)
        }
        Command::Convert { impedance, out } => {
            convert_impedance_file(&impedance, &out)?;
            let mut m = RunManifest::new("convert", serde_json::Value::Null)?.input("impedance", Some(&impedance));
            m.outputs.push(out);
            (m, ExitCode::SUCCESS)
        }
    };
    manifest.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    manifest.write()?;
    Ok(code)
}

/// Configuration after defaults, as recorded in the manifest.
#[derive(Debug, Default, Serialize)]
struct Resolved {
    coil: CoilGeometry,
    #[serde(skip_serializing_if = "Option::is_none")]
    plate: Option<PlateParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    freqs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fractions: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inversion: Option<InversionConfig>,
}

fn simulate(coil: &CoilGeometry, plate: &PlateParams, freqs: &[f64]) -> Result<InductanceSpectrum> {
    plate.validate_physical()?;
    let model = ForwardModel::for_liftoff(*coil, plate.l, DEFAULT_NODES)?;
    Ok(model.spectrum(plate, freqs)?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

//! Damped Gauss-Newton recovery of (sigma, mu_r, t, l) from an observed
//! inductance spectrum.
//!
//! Each iteration rebuilds the perturbation Jacobian at the current
//! iterate, drops columns whose log-parameter sensitivity is negligible
//! (the dynamic rank mask), solves the reduced normal equations on the
//! nondimensional system and backtracks along the step until the squared
//! error decreases. Dropped parameters keep their value for that step.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{CoilGeometry, ForwardModel, InductanceSpectrum, PlateParams};
use crate::linalg::normal_equations_solve;
use crate::scalar::Real;
use crate::sensitivity::{jacobian_with_model, JacobianMatrix, Param};
use crate::specfun::DEFAULT_NODES;

/// Condition estimate of the equilibrated reduced normal matrix above which
/// a step is refused.
pub const MAX_NORMAL_CONDITION: f64 = 1e14;

/// Box constraints on the four parameters, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds<T = f64> {
    pub lower: PlateParams<T>,
    pub upper: PlateParams<T>,
}

impl<T: Real> Default for ParamBounds<T> {
    /// sigma 0.01..100 MS/m, mu_r 1..1e4, t 0.01..50 mm, l 0.1..500 mm.
    fn default() -> Self {
        Self {
            lower: PlateParams::new(T::lit(1e4), T::one(), T::lit(1e-5), T::lit(1e-4)),
            upper: PlateParams::new(T::lit(1e8), T::lit(1e4), T::lit(0.05), T::lit(0.5)),
        }
    }
}

impl<T: Real> ParamBounds<T> {
    pub fn clamp(&self, p: &PlateParams<T>) -> PlateParams<T> {
        let (lo, hi, v) = (self.lower.to_array(), self.upper.to_array(), p.to_array());
        PlateParams::from_array(std::array::from_fn(|k| v[k].max(lo[k]).min(hi[k])))
    }

    pub fn contains(&self, p: &PlateParams<T>) -> bool {
        let (lo, hi, v) = (self.lower.to_array(), self.upper.to_array(), p.to_array());
        (0..4).all(|k| v[k] >= lo[k] && v[k] <= hi[k])
    }

    pub fn validate(&self) -> Result<()> {
        self.lower.validate_physical()?;
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        for p in Param::ALL {
            let k = p.index();
            if !(lo[k] > T::zero()) || !(hi[k] > lo[k]) || !hi[k].is_finite() {
                return Err(Error::ConfigField {
                    field: format!("bounds.{}", p.name()),
                    reason: format!("need 0 < lower < upper (got {} .. {})", lo[k], hi[k]),
                });
            }
        }
        Ok(())
    }
}

/// Which Jacobian columns took part in a step. Bit `k` (in [`Param::ALL`]
/// order) is set when the column was retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankMask(u8);

impl RankMask {
    pub const FULL: RankMask = RankMask(0b1111);

    pub fn from_retained(retained: [bool; 4]) -> Self {
        RankMask(
            retained
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &r)| acc | (u8::from(r) << k)),
        )
    }

    pub fn retains(self, p: Param) -> bool {
        self.0 & (1 << p.index()) != 0
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

impl fmt::Display for RankMask {
    /// Four characters in column order, `1` = retained (e.g. `1101`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in Param::ALL {
            f.write_str(if self.retains(p) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig<T = f64> {
    pub init: PlateParams<T>,
    pub max_iter: usize,
    /// Converged when the relative parameter change of an accepted step
    /// drops below this.
    pub step_tol: T,
    /// Converged when the relative decrease of the objective drops below this.
    pub residual_tol: T,
    /// Relative column-magnitude cutoff for the dynamic rank mask.
    pub rank_threshold: T,
    /// Relative forward-difference step for the Jacobian.
    pub jacobian_fraction: T,
    /// Maximum number of step halvings per iteration.
    pub damping: u32,
    pub bounds: ParamBounds<T>,
    /// Largest log-parameter change allowed in one step.
    pub max_log_step: T,
    /// A failed line search counts as convergence when the residual makes
    /// at most this cosine with every retained scaled column.
    pub grad_tol: T,
    /// Node count of the spatial-frequency grid.
    pub n_nodes: usize,
    /// Fixed nondimensionalisation for the normal equations; `None` scales
    /// by the current iterate.
    pub scale_reference: Option<PlateParams<T>>,
}

impl<T: Real> Default for InversionConfig<T> {
    fn default() -> Self {
        Self {
            init: PlateParams::new(T::lit(5e6), T::lit(100.0), T::lit(2e-3), T::lit(4e-3)),
            max_iter: 100,
            step_tol: T::lit(1e-6),
            residual_tol: T::lit(1e-9),
            rank_threshold: T::lit(1e-6),
            jacobian_fraction: T::lit(1e-4),
            damping: 20,
            bounds: ParamBounds::default(),
            max_log_step: T::lit(2.0),
            grad_tol: T::lit(1e-6),
            n_nodes: DEFAULT_NODES,
            scale_reference: None,
        }
    }
}

impl<T: Real> InversionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::ConfigField {
                    field: name.to_string(),
                    reason: format!("must be positive (got {v})"),
                })
            }
        };
        positive("step_tol", self.step_tol)?;
        positive("residual_tol", self.residual_tol)?;
        positive("rank_threshold", self.rank_threshold)?;
        positive("max_log_step", self.max_log_step)?;
        positive("grad_tol", self.grad_tol)?;
        if !(self.jacobian_fraction > T::zero() && self.jacobian_fraction <= T::lit(0.5)) {
            return Err(Error::ConfigField {
                field: "jacobian_fraction".into(),
                reason: format!("must lie in (0, 0.5] (got {})", self.jacobian_fraction),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::ConfigField {
                field: "max_iter".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.n_nodes < crate::specfun::PANEL_ORDER {
            return Err(Error::ConfigField {
                field: "n_nodes".into(),
                reason: format!("must be at least {}", crate::specfun::PANEL_ORDER),
            });
        }
        self.bounds.validate()?;
        if !self.bounds.contains(&self.init) {
            return Err(Error::ConfigField {
                field: "init".into(),
                reason: "initial guess lies outside the bounds".into(),
            });
        }
        if let Some(s) = &self.scale_reference {
            for p in Param::ALL {
                positive("scale_reference", p.get(s))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Objective reached exactly zero.
    ExactFit,
    StepTolerance,
    ResidualTolerance,
    /// No damped step decreased the objective, but the residual is
    /// orthogonal to the retained columns.
    Stationary,
    LineSearchFailed,
    MaxIterations,
    RankDegenerate,
    SingularSystem,
    ForwardFailure,
}

impl StopReason {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            StopReason::ExactFit | StopReason::StepTolerance | StopReason::ResidualTolerance | StopReason::Stationary
        )
    }
}

/// Outcome of [`invert`] with the full iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionResult<T = f64> {
    pub params: PlateParams<T>,
    pub converged: bool,
    pub stop: StopReason,
    /// Accepted iterations.
    pub iterations: usize,
    /// Objective at the initial guess and after every accepted step.
    pub residual_history: Vec<T>,
    /// Mask used by every attempted step, including a final rejected one.
    pub rank_masks: Vec<RankMask>,
    /// Relative parameter change `||(p_new - p) / p||` of each accepted step.
    pub step_history: Vec<T>,
    /// Initial guess followed by every accepted iterate.
    pub iterates: Vec<PlateParams<T>>,
}

/// `1/2 ||model - observed||^2` over the stacked real/imaginary vector.
pub fn objective<T: Real>(observed: &InductanceSpectrum<T>, model: &InductanceSpectrum<T>) -> Result<T> {
    if !observed.same_grid(model) {
        return Err(Error::GridMismatch);
    }
    Ok(half_squared_norm(&residual_vector(observed, model)))
}

fn residual_vector<T: Real>(observed: &InductanceSpectrum<T>, model: &InductanceSpectrum<T>) -> Vec<T> {
    model
        .stacked()
        .iter()
        .zip(observed.stacked())
        .map(|(&m, o)| m - o)
        .collect()
}

fn half_squared_norm<T: Real>(r: &[T]) -> T {
    r.iter().map(|&v| v * v).sum::<T>() / T::lit(2.0)
}

/// Retains column `k` when the largest magnitude of its log-parameter
/// column (column times the parameter's reference value) reaches
/// `threshold` times the largest such magnitude over all columns.
pub fn dynamic_rank_mask<T: Real>(j: &JacobianMatrix<T>, threshold: T) -> Result<RankMask> {
    if !(threshold > T::zero()) {
        return Err(Error::arg("threshold", "must be positive"));
    }
    let peaks: Vec<T> = Param::ALL
        .iter()
        .map(|&p| {
            j.scaled_column(p)
                .iter()
                .fold(T::zero(), |m, v| m.max(v.abs()))
        })
        .collect();
    let top = peaks.iter().fold(T::zero(), |m, &v| m.max(v));
    if !(top > T::zero()) {
        return Err(Error::TotalDegeneracy);
    }
    let retained = std::array::from_fn(|k| peaks[k] > T::zero() && peaks[k] >= threshold * top);
    let mask = RankMask::from_retained(retained);
    if mask.count() == 0 {
        return Err(Error::TotalDegeneracy);
    }
    Ok(mask)
}

/// Gauss-Newton update `-(J^T J)^-1 J^T r` restricted to the retained
/// columns, nondimensionalised by the Jacobian's reference parameters.
/// Returns physical parameter changes; dropped parameters get exactly zero.
pub fn gauss_newton_step<T: Real>(j: &JacobianMatrix<T>, residual: &[T], mask: RankMask) -> Result<[T; 4]> {
    gauss_newton_step_scaled(j, residual, mask, j.reference().to_array())
}

/// [`gauss_newton_step`] with an explicit positive scale per parameter.
/// Scales are rounded to the nearest power of two, so scaling introduces no
/// rounding error and any two references give bit-identical steps.
pub fn gauss_newton_step_scaled<T: Real>(
    j: &JacobianMatrix<T>,
    residual: &[T],
    mask: RankMask,
    scale: [T; 4],
) -> Result<[T; 4]> {
    if residual.len() != j.nrows() {
        return Err(Error::Dimension {
            expected: j.nrows(),
            got: residual.len(),
        });
    }
    if mask.count() == 0 {
        return Err(Error::TotalDegeneracy);
    }
    if scale.iter().any(|s| !(*s > T::zero()) || !s.is_finite()) {
        return Err(Error::arg("scale", "every scale must be positive and finite"));
    }
    let scale = scale.map(power_of_two);
    let kept: Vec<Param> = Param::ALL.into_iter().filter(|&p| mask.retains(p)).collect();
    let columns: Vec<Vec<T>> = kept
        .iter()
        .map(|&p| {
            let s = scale[p.index()];
            j.column(p).iter().map(|&v| v * s).collect()
        })
        .collect();
    let rhs: Vec<T> = residual.iter().map(|&v| -v).collect();
    let y = normal_equations_solve(&columns, &rhs, T::lit(MAX_NORMAL_CONDITION))?;
    let mut delta = [T::zero(); 4];
    for (&p, &v) in kept.iter().zip(&y) {
        delta[p.index()] = v * scale[p.index()];
    }
    Ok(delta)
}

fn power_of_two<T: Real>(v: T) -> T {
    let e = v.log2().round().to_i32().unwrap_or(0);
    T::lit(2.0).powi(e)
}

/// Largest cosine between the residual and any retained log-parameter column.
fn gradient_cosine<T: Real>(j: &JacobianMatrix<T>, residual: &[T], mask: RankMask) -> T {
    let rn = residual.iter().map(|&v| v * v).sum::<T>().sqrt();
    if rn == T::zero() {
        return T::zero();
    }
    Param::ALL
        .into_iter()
        .filter(|&p| mask.retains(p))
        .map(|p| {
            let c = j.column(p);
            let cn = c.iter().map(|&v| v * v).sum::<T>().sqrt();
            if cn == T::zero() {
                return T::zero();
            }
            let dot: T = c.iter().zip(residual).map(|(&a, &b)| a * b).sum();
            (dot / (cn * rn)).abs()
        })
        .fold(T::zero(), |m, v| m.max(v))
}

/// Recovers plate parameters from `observed`. Errors only on invalid
/// configuration or inputs; poor data ends with `converged = false`.
pub fn invert<T: Real>(
    coil: &CoilGeometry<T>,
    observed: &InductanceSpectrum<T>,
    cfg: &InversionConfig<T>,
) -> Result<InversionResult<T>> {
    cfg.validate()?;
    coil.validate()?;
    if observed.is_empty() {
        return Err(Error::arg("observed", "spectrum is empty"));
    }
    if observed.stacked().iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("observed", "spectrum contains non-finite values"));
    }
    let model = ForwardModel::for_liftoff(*coil, cfg.bounds.lower.l, cfg.n_nodes)?;
    Ok(Solver {
        model: &model,
        observed,
        cfg,
    }
    .run())
}

struct Solver<'a, T: Real> {
    model: &'a ForwardModel<T>,
    observed: &'a InductanceSpectrum<T>,
    cfg: &'a InversionConfig<T>,
}

struct Trial<T> {
    params: PlateParams<T>,
    spectrum: InductanceSpectrum<T>,
    residual: Vec<T>,
    phi: T,
}

impl<T: Real> Solver<'_, T> {
    fn evaluate(&self, params: PlateParams<T>) -> Option<Trial<T>> {
        let spectrum = self.model.spectrum(&params, self.observed.freqs()).ok()?;
        let residual = residual_vector(self.observed, &spectrum);
        let phi = half_squared_norm(&residual);
        phi.is_finite().then_some(Trial {
            params,
            spectrum,
            residual,
            phi,
        })
    }

    fn run(&self) -> InversionResult<T> {
        let cfg = self.cfg;
        let start = cfg.bounds.clamp(&cfg.init);
        let mut out = InversionResult {
            params: start,
            converged: false,
            stop: StopReason::ForwardFailure,
            iterations: 0,
            residual_history: Vec::new(),
            rank_masks: Vec::new(),
            step_history: Vec::new(),
            iterates: vec![start],
        };
        let Some(mut current) = self.evaluate(start) else {
            return out;
        };
        out.residual_history.push(current.phi);
        if current.phi == T::zero() {
            return finish(out, StopReason::ExactFit);
        }

        let freqs = self.observed.freqs();
        for _ in 0..cfg.max_iter {
            let p = current.params;
            let jac = jacobian_with_model(self.model, &p, freqs, [cfg.jacobian_fraction; 4], Some(&current.spectrum));
            let Ok((jac, _)) = jac else {
                return finish(out, StopReason::ForwardFailure);
            };
            let mask = match dynamic_rank_mask(&jac, cfg.rank_threshold) {
                Ok(m) => m,
                Err(_) => return finish(out, StopReason::RankDegenerate),
            };
            out.rank_masks.push(mask);
            let scale = cfg.scale_reference.map_or(p.to_array(), |s| s.to_array());
            let delta = match gauss_newton_step_scaled(&jac, &current.residual, mask, scale) {
                Ok(d) => d,
                Err(_) => return finish(out, StopReason::SingularSystem),
            };

            let values = p.to_array();
            let mut log_step: [T; 4] = std::array::from_fn(|k| delta[k] / values[k]);
            let largest = log_step.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if largest > cfg.max_log_step {
                let shrink = cfg.max_log_step / largest;
                log_step.iter_mut().for_each(|v| *v = *v * shrink);
            }

            let Some(next) = self.line_search(&values, &log_step, current.phi) else {
                let stop = if gradient_cosine(&jac, &current.residual, mask) <= cfg.grad_tol {
                    StopReason::Stationary
                } else {
                    StopReason::LineSearchFailed
                };
                return finish(out, stop);
            };

            let step_norm = relative_change(&values, &next.params.to_array());
            let decrease = (current.phi - next.phi) / current.phi;
            current = next;
            out.iterations += 1;
            out.params = current.params;
            out.iterates.push(current.params);
            out.residual_history.push(current.phi);
            out.step_history.push(step_norm);

            if current.phi == T::zero() {
                return finish(out, StopReason::ExactFit);
            }
            if step_norm < cfg.step_tol {
                return finish(out, StopReason::StepTolerance);
            }
            if decrease < cfg.residual_tol {
                return finish(out, StopReason::ResidualTolerance);
            }
        }
        finish(out, StopReason::MaxIterations)
    }

    /// Tries `p * exp(lambda * step)` for lambda = 1, 1/2, ... and returns the
    /// first clamped trial that lowers the objective.
    fn line_search(&self, values: &[T; 4], log_step: &[T; 4], phi: T) -> Option<Trial<T>> {
        let mut lambda = T::one();
        for _ in 0..=self.cfg.damping {
            let moved = std::array::from_fn(|k| values[k] * (lambda * log_step[k]).exp());
            let params = self.cfg.bounds.clamp(&PlateParams::from_array(moved));
            if let Some(trial) = self.evaluate(params) {
                if trial.phi < phi {
                    return Some(trial);
                }
            }
            lambda = lambda / T::lit(2.0);
        }
        None
    }
}

fn relative_change<T: Real>(old: &[T; 4], new: &[T; 4]) -> T {
    old.iter()
        .zip(new)
        .map(|(&a, &b)| {
            let r = (b - a) / a;
            r * r
        })
        .sum::<T>()
        .sqrt()
}

fn finish<T: Real>(mut out: InversionResult<T>, stop: StopReason) -> InversionResult<T> {
    out.stop = stop;
    out.converged = stop.is_converged();
    out
}

//! Perturbation Jacobian of the stacked spectrum with respect to
//! (sigma, mu_r, t, l), and per-fraction sensitivity curves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{check_frequencies, CoilGeometry, ForwardModel, InductanceSpectrum, PlateParams};
use crate::scalar::Real;
use crate::specfun::DEFAULT_NODES;

/// One of the four unknowns, in Jacobian column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Param {
    Sigma,
    MuR,
    Thickness,
    LiftOff,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::Sigma, Param::MuR, Param::Thickness, Param::LiftOff];

    pub fn index(self) -> usize {
        match self {
            Param::Sigma => 0,
            Param::MuR => 1,
            Param::Thickness => 2,
            Param::LiftOff => 3,
        }
    }

    /// Name used in CSV exports.
    pub fn name(self) -> &'static str {
        match self {
            Param::Sigma => "sigma",
            Param::MuR => "mu_r",
            Param::Thickness => "t",
            Param::LiftOff => "liftoff",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn get<T: Real>(self, p: &PlateParams<T>) -> T {
        p.to_array()[self.index()]
    }

    pub fn with<T: Real>(self, p: &PlateParams<T>, value: T) -> PlateParams<T> {
        let mut a = p.to_array();
        a[self.index()] = value;
        PlateParams::from_array(a)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `2m x 4` finite-difference sensitivity matrix: rows are the real parts
/// for every frequency followed by the imaginary parts, columns follow
/// [`Param::ALL`]. Entries are in physical units (H per S/m, H per unit
/// mu_r, H/m, H/m).
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix<T = f64> {
    columns: [Vec<T>; 4],
    fractions: [T; 4],
    reference: PlateParams<T>,
}

impl<T: Real> JacobianMatrix<T> {
    /// Assembles a Jacobian from explicit columns, e.g. for testing the
    /// linear algebra in isolation.
    pub fn from_columns(columns: [Vec<T>; 4], reference: PlateParams<T>, fractions: [T; 4]) -> Result<Self> {
        let rows = columns[0].len();
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::Dimension {
                expected: rows,
                got: c.len(),
            });
        }
        if !rows.is_multiple_of(2) {
            return Err(Error::arg("columns", "row count must be even (Re rows then Im rows)"));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::arg("columns", "entries must be finite"));
        }
        Ok(Self {
            columns,
            fractions,
            reference,
        })
    }

    pub fn nrows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_freqs(&self) -> usize {
        self.nrows() / 2
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.columns[col][row]
    }

    pub fn column(&self, param: Param) -> &[T] {
        &self.columns[param.index()]
    }

    pub fn columns(&self) -> &[Vec<T>; 4] {
        &self.columns
    }

    /// Column multiplied by its parameter's reference value, i.e. the
    /// derivative with respect to the log of the parameter.
    pub fn scaled_column(&self, param: Param) -> Vec<T> {
        let s = param.get(&self.reference);
        self.column(param).iter().map(|&v| v * s).collect()
    }

    pub fn fractions(&self) -> [T; 4] {
        self.fractions
    }

    pub fn reference(&self) -> &PlateParams<T> {
        &self.reference
    }
}

fn check_fraction<T: Real>(f: T) -> Result<()> {
    if f > T::zero() && f <= T::lit(0.5) {
        Ok(())
    } else {
        Err(Error::arg("fraction", format!("perturbation fraction must lie in (0, 0.5], got {f}")))
    }
}

fn check_reference<T: Real>(reference: &PlateParams<T>) -> Result<()> {
    reference.validate_physical()?;
    for p in Param::ALL {
        if !(p.get(reference) > T::zero()) {
            return Err(Error::InvalidPlate(format!(
                "reference {} must be positive to define a relative step",
                p.name()
            )));
        }
    }
    Ok(())
}

/// Parameter set with `param` increased by `fraction` of its value, and
/// the step actually taken (difference of the representable values).
fn perturbed<T: Real>(reference: &PlateParams<T>, param: Param, fraction: T) -> (PlateParams<T>, T) {
    let base = param.get(reference);
    let bumped = base * (T::one() + fraction);
    (param.with(reference, bumped), bumped - base)
}

fn difference_column<T: Real>(base: &[T], bumped: &[T], step: T) -> Vec<T> {
    base.iter().zip(bumped).map(|(&a, &b)| (b - a) / step).collect()
}

/// One-sided perturbation Jacobian at `reference`: the reference spectrum
/// plus four upward-perturbed spectra, all on the same grid.
pub fn jacobian<T: Real>(
    coil: &CoilGeometry<T>,
    reference: &PlateParams<T>,
    freqs: &[T],
    fractions: [T; 4],
) -> Result<JacobianMatrix<T>> {
    check_reference(reference)?;
    let model = ForwardModel::for_liftoff(*coil, reference.l, DEFAULT_NODES)?;
    let (j, _) = jacobian_with_model(&model, reference, freqs, fractions, None)?;
    Ok(j)
}

/// [`jacobian`] on a prepared model. When `base` is given it must be the
/// model's spectrum at `reference` and is reused instead of recomputed.
/// Returns the Jacobian together with the reference spectrum.
pub fn jacobian_with_model<T: Real>(
    model: &ForwardModel<T>,
    reference: &PlateParams<T>,
    freqs: &[T],
    fractions: [T; 4],
    base: Option<&InductanceSpectrum<T>>,
) -> Result<(JacobianMatrix<T>, InductanceSpectrum<T>)> {
    for &f in &fractions {
        check_fraction(f)?;
    }
    check_reference(reference)?;
    check_frequencies(freqs)?;
    let base = match base {
        Some(b) if b.freqs() == freqs => b.clone(),
        Some(_) => return Err(Error::GridMismatch),
        None => model.spectrum(reference, freqs)?,
    };
    let base_stacked = base.stacked();
    let mut columns: [Vec<T>; 4] = Default::default();
    for p in Param::ALL {
        let (plate, step) = perturbed(reference, p, fractions[p.index()]);
        let bumped = model.spectrum(&plate, freqs)?.stacked();
        columns[p.index()] = difference_column(&base_stacked, &bumped, step);
    }
    let j = JacobianMatrix::from_columns(columns, *reference, fractions)?;
    Ok((j, base))
}

/// One row of a sensitivity export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityRow<T = f64> {
    pub freq: T,
    pub param: Param,
    pub fraction: T,
    pub re: T,
    pub im: T,
}

/// Default perturbation fractions for sensitivity curves.
pub const DEFAULT_SENSITIVITY_FRACTIONS: [f64; 4] = [0.01, 0.05, 0.10, 0.50];

/// Finite-difference sensitivity `dL / dp` of one parameter at each of
/// `fractions`, over `freqs`. Rows are grouped by fraction, then frequency.
pub fn sensitivity_spectrum<T: Real>(
    coil: &CoilGeometry<T>,
    reference: &PlateParams<T>,
    param: Param,
    fractions: &[T],
    freqs: &[T],
) -> Result<Vec<SensitivityRow<T>>> {
    check_reference(reference)?;
    let model = ForwardModel::for_liftoff(*coil, reference.l, DEFAULT_NODES)?;
    sensitivity_with_model(&model, reference, &[param], fractions, freqs)
}

/// Sensitivity rows for several parameters on a prepared model, grouped by
/// parameter, then fraction, then frequency.
pub fn sensitivity_with_model<T: Real>(
    model: &ForwardModel<T>,
    reference: &PlateParams<T>,
    params: &[Param],
    fractions: &[T],
    freqs: &[T],
) -> Result<Vec<SensitivityRow<T>>> {
    if fractions.is_empty() {
        return Err(Error::arg("fractions", "at least one fraction is required"));
    }
    for &f in fractions {
        check_fraction(f)?;
    }
    check_reference(reference)?;
    check_frequencies(freqs)?;
    if freqs.is_empty() {
        return Ok(Vec::new());
    }
    let base = model.spectrum(reference, freqs)?;
    let mut rows = Vec::with_capacity(params.len() * fractions.len() * freqs.len());
    for &param in params {
        for &fraction in fractions {
            let (plate, step) = perturbed(reference, param, fraction);
            let bumped = model.spectrum(&plate, freqs)?;
            for ((&freq, b), v) in freqs.iter().zip(base.values()).zip(bumped.values()) {
                rows.push(SensitivityRow {
                    freq,
                    param,
                    fraction,
                    re: (v.re - b.re) / step,
                    im: (v.im - b.im) / step,
                });
            }
        }
    }
    Ok(rows)
}

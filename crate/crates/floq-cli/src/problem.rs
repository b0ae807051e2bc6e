//! Problem-file schema and loading.
//!
//! Problem files are TOML with a `[system]` section (coefficient
//! expressions plus either the structure constants or all four entries) and
//! optional `[floquet]`, `[solve]` and `[tolerances]` sections. Expressions
//! are quoted strings over the variable `t` in the grammar published by the
//! library.

use std::path::Path;

use serde::Deserialize;

use floq::expr;
use floq::sysmodel::{CoefficientFunction, GeneralSystem, StructuredSystem, SystemError};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub system: SystemSection,
    pub floquet: Option<FloquetSection>,
    pub solve: Option<SolveSection>,
    pub tolerances: Option<TolerancesSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub a11: String,
    pub a12: String,
    pub a21: Option<String>,
    pub a22: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub t0: f64,
    /// Analysis window `[lo, hi]`; defaults to `[t0, t0 + 10]`.
    pub window: Option<[f64; 2]>,
    /// Declared common period of the coefficient entries.
    pub period: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetSection {
    pub period: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub x0: [f64; 2],
    pub t_end: f64,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSection {
    pub rel: Option<f64>,
    pub abs: Option<f64>,
    pub fit: Option<f64>,
}

/// Effective tolerances after defaults and the `--tol` override.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub fit: f64,
}

impl Tolerances {
    fn resolve(section: Option<TolerancesSection>, tol_flag: Option<f64>) -> Result<Self, CliError> {
        let section = section.unwrap_or_default();
        let rel = tol_flag.or(section.rel).unwrap_or(1e-10);
        let abs = section.abs.unwrap_or(rel * 1e-2);
        let fit = section.fit.unwrap_or(1e-8);
        for (name, v) in [("rel", rel), ("abs", abs), ("fit", fit)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!(
                    "tolerances.{name} must be a positive number, got {v}"
                )));
            }
        }
        Ok(Self { rel, abs, fit })
    }
}

/// The system as described by the file: either with given structure
/// constants or as four free entries to be fitted.
pub enum LoadedSystem {
    Structured(StructuredSystem),
    General(GeneralSystem),
}

pub struct Problem {
    pub system: LoadedSystem,
    pub floquet: Option<FloquetSection>,
    pub solve: Option<SolveSection>,
    pub tolerances: Tolerances,
    pub t0: f64,
}

fn coefficient(
    name: &str,
    source: &str,
    window: (f64, f64),
    period: Option<f64>,
) -> Result<CoefficientFunction, CliError> {
    let expression = expr::parse(source)
        .map_err(|e| CliError::Usage(format!("system.{name} = {source:?}: {e}")))?;
    let cf = CoefficientFunction::from_expr(&expression).with_probe_window(window.0, window.1);
    match period {
        Some(p) => cf.with_period(p).map_err(|e| match e {
            SystemError::PeriodViolated { .. } => {
                CliError::Usage(format!("system.{name}: {e}"))
            }
            other => CliError::from(other),
        }),
        None => Ok(cf),
    }
}

impl Problem {
    pub fn load(path: &Path, tol_flag: Option<f64>) -> Result<Problem, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read {}: {e}", path.display()))
        })?;
        let file: ProblemFile = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_file(file, tol_flag)
    }

    pub fn from_file(file: ProblemFile, tol_flag: Option<f64>) -> Result<Problem, CliError> {
        let s = &file.system;
        let t0 = s.t0;
        let window = match s.window {
            Some([lo, hi]) if hi > lo => (lo, hi),
            Some([lo, hi]) => {
                return Err(CliError::Usage(format!(
                    "system.window must be increasing, got [{lo}, {hi}]"
                )))
            }
            None => (t0, t0 + 10.0),
        };
        if let Some(p) = s.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(CliError::Usage(format!(
                    "system.period must be positive, got {p}"
                )));
            }
        }

        let structured_form = s.alpha.is_some() || s.beta.is_some();
        let general_form = s.a21.is_some() || s.a22.is_some();
        let system = match (structured_form, general_form) {
            (true, true) => {
                return Err(CliError::Usage(
                    "give either alpha/beta or a21/a22, not both".to_string(),
                ))
            }
            (false, false) => {
                return Err(CliError::Usage(
                    "the system needs either alpha and beta or all four entries a11..a22"
                        .to_string(),
                ))
            }
            (true, false) => {
                let (alpha, beta) = match (s.alpha, s.beta) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(CliError::Usage(
                            "alpha and beta must be given together".to_string(),
                        ))
                    }
                };
                let a11 = coefficient("a11", &s.a11, window, s.period)?;
                let a12 = coefficient("a12", &s.a12, window, s.period)?;
                LoadedSystem::Structured(
                    StructuredSystem::new(a11, a12, alpha, beta)
                        .with_t0(t0)
                        .with_window(window.0, window.1),
                )
            }
            (false, true) => {
                let (a21_src, a22_src) = match (&s.a21, &s.a22) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(CliError::Usage(
                            "a21 and a22 must be given together".to_string(),
                        ))
                    }
                };
                let a11 = coefficient("a11", &s.a11, window, s.period)?;
                let a12 = coefficient("a12", &s.a12, window, s.period)?;
                let a21 = coefficient("a21", a21_src, window, s.period)?;
                let a22 = coefficient("a22", a22_src, window, s.period)?;
                LoadedSystem::General(
                    GeneralSystem::new(a11, a12, a21, a22)
                        .with_t0(t0)
                        .with_window(window.0, window.1),
                )
            }
        };

        if let Some(f) = &file.floquet {
            if !(f.period.is_finite() && f.period > 0.0) {
                return Err(CliError::Usage(format!(
                    "floquet.period must be positive, got {}",
                    f.period
                )));
            }
        }
        if let Some(sv) = &file.solve {
            if sv.samples.is_some_and(|n| n < 2) {
                return Err(CliError::Usage(
                    "solve.samples must be at least 2".to_string(),
                ));
            }
            if !sv.t_end.is_finite() || sv.t_end == t0 {
                return Err(CliError::Usage(format!(
                    "solve.t_end must differ from t0 = {t0}"
                )));
            }
        }

        Ok(Problem {
            system,
            floquet: file.floquet,
            solve: file.solve,
            tolerances: Tolerances::resolve(file.tolerances, tol_flag)?,
            t0,
        })
    }

    /// The structured system, fitting the constants first when the file
    /// gave four free entries. Returns the fit residual in that case.
    pub fn structured(&self) -> Result<(StructuredSystem, Option<FitSummary>), CliError> {
        match &self.system {
            LoadedSystem::Structured(s) => Ok((s.clone(), None)),
            LoadedSystem::General(g) => {
                let grid = g.default_grid();
                let fitted = g.fit_structure(&grid, self.tolerances.fit)?;
                let residual = fit_residual(g, fitted.alpha(), fitted.beta(), &grid);
                Ok((
                    fitted,
                    Some(FitSummary {
                        residual,
                        tolerance: self.tolerances.fit,
                    }),
                ))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitSummary {
    pub residual: f64,
    pub tolerance: f64,
}

fn fit_residual(g: &GeneralSystem, alpha: f64, beta: f64, grid: &[f64]) -> f64 {
    grid.iter().fold(0.0f64, |worst, &t| {
        let a11 = g.a11.value_at(t);
        let a12 = g.a12.value_at(t);
        let a21 = g.a21.value_at(t);
        let a22 = g.a22.value_at(t);
        let r1 = (a21 - alpha * a12).abs();
        let r2 = (a22 - a11 - beta * a12).abs();
        worst.max(r1).max(r2)
    })
}

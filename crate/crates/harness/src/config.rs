//! Experiment configuration and its TOML form.
//!
//! A config file holds optional top-level `out_dir` and `seed` keys and one
//! table per experiment section:
//!
//! ```toml
//! seed = 7
//!
//! [table3]
//! problem = "P2"
//! element = "Q1"
//! h = [0.03125, 0.015625]
//! kappa = [5.0]
//! preconditioner = ["fmm", "ic"]
//! ```
//!
//! Command line flags take precedence over the file's top-level keys.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use hfp_core::discretize::{ElementType, ProblemId, ProblemSpec};
use hfp_core::fmm::{Backend, DEFAULT_ORDER, DEFAULT_THETA};
use serde::Deserialize;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAXIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreconditionerId {
    Fmm,
    Gmg,
    Ic,
    None,
}

impl PreconditionerId {
    pub fn name(self) -> &'static str {
        match self {
            PreconditionerId::Fmm => "fmm",
            PreconditionerId::Gmg => "gmg",
            PreconditionerId::Ic => "ic",
            PreconditionerId::None => "none",
        }
    }
}

impl FromStr for PreconditionerId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fmm" => Ok(Self::Fmm),
            "gmg" => Ok(Self::Gmg),
            "ic" => Ok(Self::Ic),
            "none" | "identity" => Ok(Self::None),
            other => bail!("unknown preconditioner {other:?} (expected fmm, gmg, ic or none)"),
        }
    }
}

impl fmt::Display for PreconditionerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverId {
    Gmres,
    Bicgstab,
}

impl SolverId {
    pub fn name(self) -> &'static str {
        match self {
            SolverId::Gmres => "gmres",
            SolverId::Bicgstab => "bicgstab",
        }
    }
}

impl FromStr for SolverId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmres" => Ok(Self::Gmres),
            "bicgstab" => Ok(Self::Bicgstab),
            other => bail!("unknown solver {other:?} (expected gmres or bicgstab)"),
        }
    }
}

pub fn parse_problem(s: &str) -> Result<ProblemId> {
    s.parse::<ProblemId>().map_err(|e| anyhow!("{e}"))
}

pub fn parse_element(s: &str) -> Result<ElementType> {
    match s.to_ascii_uppercase().as_str() {
        "Q1" => Ok(ElementType::Q1),
        "Q2" => Ok(ElementType::Q2),
        other => bail!("unknown element {other:?} (expected Q1 or Q2)"),
    }
}

pub fn parse_backend(s: &str) -> Result<Backend> {
    match s.to_ascii_lowercase().as_str() {
        "fmm" => Ok(Backend::Fmm),
        "direct" => Ok(Backend::Direct),
        other => bail!("unknown backend {other:?} (expected fmm or direct)"),
    }
}

pub fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Fmm => "fmm",
        Backend::Direct => "direct",
    }
}

/// One sweep: the product (or zip, when `paired`) of mesh sizes and
/// wavenumbers, times preconditioners, solvers and FMM precisions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub problem: ProblemId,
    pub element: ElementType,
    pub h: Vec<f64>,
    /// Wavenumbers, or `mu` values for P4.
    pub parameters: Vec<f64>,
    /// Zip `h` with `parameters` instead of taking the product.
    pub paired: bool,
    pub preconditioners: Vec<PreconditionerId>,
    pub solvers: Vec<SolverId>,
    /// FMM precisions; `None` uses the expansion order `p`.
    pub epsilons: Vec<Option<f64>>,
    pub p: usize,
    pub theta: f64,
    pub backend: Backend,
    pub tol: f64,
    pub maxit: usize,
    /// GMRES restart length; defaults to `maxit`.
    pub restart: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults for everything except the sweep axes.
    pub fn new(experiment: &str, problem: ProblemId, h: Vec<f64>, parameters: Vec<f64>) -> Self {
        Self {
            experiment: experiment.to_string(),
            problem,
            element: ElementType::Q1,
            h,
            parameters,
            paired: false,
            preconditioners: vec![PreconditionerId::Fmm],
            solvers: vec![SolverId::Gmres],
            epsilons: vec![None],
            p: DEFAULT_ORDER,
            theta: DEFAULT_THETA,
            backend: Backend::Fmm,
            tol: DEFAULT_TOL,
            maxit: DEFAULT_MAXIT,
            restart: DEFAULT_MAXIT,
            seed: 0,
        }
    }

    pub fn with_preconditioners(mut self, p: &[PreconditionerId]) -> Self {
        self.preconditioners = p.to_vec();
        self
    }

    pub fn problem_spec(&self, parameter: f64) -> Result<ProblemSpec> {
        let spec = match self.problem {
            ProblemId::P4 => ProblemSpec::p4(parameter),
            id => ProblemSpec::new(id, parameter),
        };
        spec.map_err(|e| anyhow!("{e}"))
    }

    /// Expanded cells in sweep order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let points: Vec<(f64, f64)> = if self.paired {
            if self.h.len() != self.parameters.len() {
                bail!("paired sweep needs equally many h and wavenumber values");
            }
            self.h.iter().copied().zip(self.parameters.iter().copied()).collect()
        } else {
            self.h.iter().flat_map(|&h| self.parameters.iter().map(move |&k| (h, k))).collect()
        };
        let mut cells = Vec::new();
        for (h, parameter) in points {
            let problem = self.problem_spec(parameter)?;
            for &preconditioner in &self.preconditioners {
                let epsilons: &[Option<f64>] = if preconditioner == PreconditionerId::Fmm { &self.epsilons } else { &[None] };
                for &epsilon in epsilons {
                    for &solver in &self.solvers {
                        cells.push(Cell {
                            experiment: self.experiment.clone(),
                            problem,
                            element: self.element,
                            h,
                            preconditioner,
                            solver,
                            epsilon,
                            p: self.p,
                            theta: self.theta,
                            backend: self.backend,
                            tol: self.tol,
                            maxit: self.maxit,
                            restart: self.restart,
                        });
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// A single solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub experiment: String,
    pub problem: ProblemSpec,
    pub element: ElementType,
    pub h: f64,
    pub preconditioner: PreconditionerId,
    pub solver: SolverId,
    pub epsilon: Option<f64>,
    pub p: usize,
    pub theta: f64,
    pub backend: Backend,
    pub tol: f64,
    pub maxit: usize,
    pub restart: usize,
}

/// Accepts a scalar or a list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    experiment: Option<String>,
    problem: String,
    element: Option<String>,
    h: OneOrMany<f64>,
    kappa: Option<OneOrMany<f64>>,
    mu: Option<OneOrMany<f64>>,
    paired: Option<bool>,
    preconditioner: Option<OneOrMany<String>>,
    solver: Option<OneOrMany<String>>,
    epsilon: Option<OneOrMany<f64>>,
    p: Option<usize>,
    theta: Option<f64>,
    backend: Option<String>,
    tol: Option<f64>,
    maxit: Option<usize>,
    restart: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawFile {
    out_dir: Option<String>,
    seed: Option<u64>,
    #[serde(flatten)]
    sections: BTreeMap<String, RawSection>,
}

/// Parsed config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub out_dir: Option<String>,
    pub seed: Option<u64>,
    /// Sections in name order.
    pub sections: Vec<ExperimentConfig>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).context("invalid config file")?;
        let seed = raw.seed.unwrap_or(0);
        let sections = raw
            .sections
            .into_iter()
            .map(|(name, s)| section(&name, s, seed).with_context(|| format!("in section [{name}]")))
            .collect::<Result<Vec<_>>>()?;
        if sections.is_empty() {
            bail!("config file defines no sections");
        }
        Ok(Self { out_dir: raw.out_dir, seed: raw.seed, sections })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }
}

fn section(name: &str, s: RawSection, seed: u64) -> Result<ExperimentConfig> {
    let problem = parse_problem(&s.problem)?;
    let parameters = match (s.kappa, s.mu, problem) {
        (Some(_), _, ProblemId::P4) => bail!("P4 is parameterized by mu, not kappa"),
        (None, Some(mu), ProblemId::P4) => mu.into_vec(),
        (None, None, ProblemId::P4) => bail!("P4 needs mu"),
        (_, Some(_), _) => bail!("mu applies to P4 only"),
        (Some(k), None, _) => k.into_vec(),
        (None, None, _) => bail!("missing kappa"),
    };
    let h = s.h.into_vec();
    if h.is_empty() || parameters.is_empty() {
        bail!("h and the wavenumber list must be non-empty");
    }
    let maxit = s.maxit.unwrap_or(DEFAULT_MAXIT);
    let mut c = ExperimentConfig::new(s.experiment.as_deref().unwrap_or(name), problem, h, parameters);
    c.element = s.element.as_deref().map(parse_element).transpose()?.unwrap_or(ElementType::Q1);
    c.paired = s.paired.unwrap_or(false);
    if let Some(p) = s.preconditioner {
        c.preconditioners = p.into_vec().iter().map(|v| v.parse()).collect::<Result<_>>()?;
    }
    if let Some(v) = s.solver {
        c.solvers = v.into_vec().iter().map(|v| v.parse()).collect::<Result<_>>()?;
    }
    if let Some(e) = s.epsilon {
        c.epsilons = e.into_vec().into_iter().map(Some).collect();
    }
    c.p = s.p.unwrap_or(DEFAULT_ORDER);
    c.theta = s.theta.unwrap_or(DEFAULT_THETA);
    c.backend = s.backend.as_deref().map(parse_backend).transpose()?.unwrap_or(Backend::Fmm);
    c.tol = s.tol.unwrap_or(DEFAULT_TOL);
    c.maxit = maxit;
    c.restart = s.restart.unwrap_or(maxit);
    c.seed = seed;
    if !(c.tol > 0.0) || c.maxit == 0 || c.restart == 0 {
        bail!("tol, maxit and restart must be positive");
    }
    c.cells()?;
    Ok(c)
}

//! JSON configuration files of the `evolve`, `stability` and `scan` subcommands.

use std::path::PathBuf;

use graphnls::dynamics::EvolutionConfig;
use graphnls::{GridSpec, StarGraphParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Cap on the number of values one range may expand to.
pub const MAX_RANGE_LEN: usize = 10_000;
/// Cap on the number of points of one scan.
pub const MAX_SCAN_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Initial {
    Stationary {
        #[serde(default)]
        j: usize,
        omega: f64,
    },
    Csv {
        path: PathBuf,
    },
    /// `scale·Ψ_{ω,j}` plus seeded smooth noise of size `noise`.
    Perturbed {
        #[serde(default)]
        j: usize,
        omega: f64,
        #[serde(default = "unit")]
        scale: f64,
        #[serde(default)]
        noise: f64,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub params: StarGraphParams,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub cfg: EvolutionConfig,
    pub initial: Initial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub params: StarGraphParams,
    pub omega: f64,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_d_omega")]
    pub d_omega: f64,
}

fn default_k() -> usize {
    graphnls::stability::DEFAULT_EIGENPAIRS
}

fn default_d_omega() -> f64 {
    1e-4
}

/// A parameter axis: one value, an explicit list, or `{"linspace": [a, b, n]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    Value(f64),
    List(Vec<f64>),
    Linspace { linspace: (f64, f64, usize) },
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Range::Value(x) => vec![*x],
            Range::List(v) => v.clone(),
            Range::Linspace { linspace: (a, b, n) } => {
                if *n == 0 || *n > MAX_RANGE_LEN {
                    return Err(CliError::Config(format!("linspace count must lie in 1..={MAX_RANGE_LEN}, got {n}")));
                }
                if *n == 1 {
                    vec![*a]
                } else {
                    let step = (b - a) / (*n - 1) as f64;
                    (0..*n).map(|i| if i + 1 == *n { *b } else { a + step * i as f64 }).collect()
                }
            }
        };
        if v.is_empty() || v.len() > MAX_RANGE_LEN {
            return Err(CliError::Config(format!("a range must hold 1..={MAX_RANGE_LEN} values")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("range values must be finite".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Functionals,
    Stationary,
    Vk,
    Stability,
}

fn default_tasks() -> Vec<Task> {
    vec![Task::Functionals, Task::Stationary, Task::Vk]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub omega: Range,
    pub alpha: Range,
    pub mu: Range,
    #[serde(rename = "N")]
    pub edges: Vec<usize>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// One scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub edges: usize,
    pub alpha: f64,
    pub mu: f64,
    pub omega: f64,
}

impl ScanConfig {
    /// All points, sorted by `(N, μ, α, ω)`.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let (om, al, mu) = (self.omega.values()?, self.alpha.values()?, self.mu.values()?);
        if self.edges.is_empty() || self.edges.len() > MAX_RANGE_LEN {
            return Err(CliError::Config(format!("N must list 1..={MAX_RANGE_LEN} edge counts")));
        }
        let total = [om.len(), al.len(), mu.len(), self.edges.len()]
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&t| t <= MAX_SCAN_POINTS)
            .ok_or_else(|| CliError::Config(format!("scan exceeds {MAX_SCAN_POINTS} points")))?;
        let mut pts = Vec::with_capacity(total);
        for &edges in &self.edges {
            for &m in &mu {
                for &a in &al {
                    for &w in &om {
                        pts.push(Point { edges, alpha: a, mu: m, omega: w });
                    }
                }
            }
        }
        pts.sort_by(|p, q| {
            p.edges
                .cmp(&q.edges)
                .then(p.mu.total_cmp(&q.mu))
                .then(p.alpha.total_cmp(&q.alpha))
                .then(p.omega.total_cmp(&q.omega))
        });
        Ok(pts)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(CliError::Json)
}

fn check_grid(grid: &Option<GridSpec>) -> Result<(), CliError> {
    if let Some(g) = grid {
        g.validate()?;
    }
    Ok(())
}

pub fn parse_evolve(text: &str) -> Result<EvolveConfig, CliError> {
    let c: EvolveConfig = parse(text)?;
    c.params.validate()?;
    check_grid(&c.grid)?;
    c.cfg.validate()?;
    match &c.initial {
        Initial::Stationary { omega, .. } | Initial::Perturbed { omega, .. } if !(*omega > 0.0) => {
            return Err(CliError::Config(format!("omega must be positive, got {omega}")));
        }
        Initial::Perturbed { scale, noise, .. } if !(scale.is_finite() && noise.is_finite()) => {
            return Err(CliError::Config("scale and noise must be finite".into()));
        }
        _ => {}
    }
    Ok(c)
}

pub fn parse_stability(text: &str) -> Result<StabilityConfig, CliError> {
    let c: StabilityConfig = parse(text)?;
    c.params.validate()?;
    check_grid(&c.grid)?;
    if c.k == 0 || c.k > 64 {
        return Err(CliError::Config(format!("k must lie in 1..=64, got {}", c.k)));
    }
    if !(c.d_omega > 0.0) {
        return Err(CliError::Config(format!("d_omega must be positive, got {}", c.d_omega)));
    }
    Ok(c)
}

pub fn parse_scan(text: &str) -> Result<ScanConfig, CliError> {
    let c: ScanConfig = parse(text)?;
    check_grid(&c.grid)?;
    if c.tasks.is_empty() {
        return Err(CliError::Config("at least one task is required".into()));
    }
    c.points()?;
    Ok(c)
}

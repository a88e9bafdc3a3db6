use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bounds::{ChainParams, Prepared};
use crate::error::{Error, Result};
use crate::fock::TruncatedBasis;

/// Floor on the denominator of relative differences, so that quantities
/// that vanish identically (e.g. at `J = 0`) count as converged.
pub const RELATIVE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Evaluate the whole range.
    Exhaust,
    /// Stop at the first truncation whose difference falls below tolerance.
    FirstConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Converged,
    NotConverged,
    /// The next truncation would exceed the dimension guard.
    GuardReached,
    /// The next truncation was projected to overrun the time budget.
    BudgetExhausted,
}

impl ScanStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanStatus::Converged => "converged",
            ScanStatus::NotConverged => "not converged",
            ScanStatus::GuardReached => "not converged (dimension guard)",
            ScanStatus::BudgetExhausted => "not converged (time budget)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub side: usize,
    pub n_max: usize,
    pub beta: f64,
    pub exact_mi: f64,
    pub mean_particles: f64,
    pub rel_diff_mi: Option<f64>,
    pub rel_diff_particles: Option<f64>,
    pub max_sector_dim: usize,
}

/// A scan of one side length over increasing `n_max`.
pub struct ConvergenceScan {
    pub rows: Vec<ConvergenceRow>,
    pub status: ScanStatus,
    /// Largest relative difference of `I(A:B)` at the last completed step.
    pub last_difference: Option<f64>,
    /// The last truncation that was diagonalized, ready for chain evaluation.
    pub last: Option<Prepared>,
}

impl ConvergenceScan {
    pub fn converged(&self) -> bool {
        self.status == ScanStatus::Converged
    }

    pub fn final_n_max(&self) -> Option<usize> {
        self.last.as_ref().map(|p| p.params().n_max)
    }
}

pub fn relative_difference(new: f64, old: f64) -> f64 {
    (new - old).abs() / new.abs().max(RELATIVE_FLOOR)
}

/// Cost proxy for diagonalizing every sector, `Σ dim³`.
fn cubic_cost(p: &ChainParams) -> Option<f64> {
    let sites = p.side.checked_pow(p.dim as u32)?;
    let basis = TruncatedBasis::new(sites, p.n_max, p.n_cap, usize::MAX).ok()?;
    Some(
        basis
            .sector_dims()
            .iter()
            .map(|&d| (d as f64).powi(3))
            .sum(),
    )
}

/// Runs the truncation protocol: diagonalize at each `n_max` in `range`,
/// track `I(A:B)` and `<N>` at every `β`, and compare successive values.
/// The verdict uses the `I(A:B)` differences; those of `<N>` are reported.
pub fn converge(
    base: &ChainParams,
    betas: &[f64],
    range: [usize; 2],
    tol: f64,
    mode: ScanMode,
    budget: Option<Duration>,
) -> Result<ConvergenceScan> {
    let [lo, hi] = range;
    if lo == 0 || lo >= hi {
        return Err(Error::Config("n_max range needs 1 <= low < high".into()));
    }
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut previous: Option<Vec<(f64, f64)>> = None;
    let mut last_difference = None;
    let mut last: Option<Prepared> = None;
    let mut last_cost: Option<(f64, Duration)> = None;
    let mut status = ScanStatus::NotConverged;
    for n_max in lo..=hi {
        let mut params = base.clone();
        params.n_max = n_max;
        if let (Some(limit), Some((cost, took)), Some(next)) =
            (budget, last_cost, cubic_cost(&params))
        {
            let projected = took.mul_f64(next / cost.max(1.0));
            if start.elapsed() + projected > limit {
                status = ScanStatus::BudgetExhausted;
                break;
            }
        }
        let step = Instant::now();
        let prepared = match Prepared::new(&params, betas) {
            Ok(p) => p,
            Err(Error::DimensionGuard { .. }) => {
                status = ScanStatus::GuardReached;
                break;
            }
            Err(e) => return Err(e),
        };
        let values = betas
            .iter()
            .map(|&b| prepared.observables(b))
            .collect::<Result<Vec<_>>>()?;
        last_cost = cubic_cost(&params).map(|c| (c, step.elapsed()));
        let mut worst: Option<f64> = None;
        for (k, (&beta, &(mi, n))) in betas.iter().zip(&values).enumerate() {
            let diffs = previous.as_ref().map(|p| {
                (
                    relative_difference(mi, p[k].0),
                    relative_difference(n, p[k].1),
                )
            });
            if let Some((a, _)) = diffs {
                worst = Some(worst.unwrap_or(0.0).max(a));
            }
            rows.push(ConvergenceRow {
                side: params.side,
                n_max,
                beta,
                exact_mi: mi,
                mean_particles: n,
                rel_diff_mi: diffs.map(|d| d.0),
                rel_diff_particles: diffs.map(|d| d.1),
                max_sector_dim: prepared.basis().max_sector_dim(),
            });
        }
        previous = Some(values);
        last = Some(prepared);
        if worst.is_some() {
            last_difference = worst;
        }
        let done = worst.is_some_and(|w| w < tol);
        status = if done {
            ScanStatus::Converged
        } else {
            ScanStatus::NotConverged
        };
        if done && mode == ScanMode::FirstConverged {
            break;
        }
    }
    // a stop before the first comparison leaves nothing to judge
    if status == ScanStatus::Converged && last_difference.is_none() {
        status = ScanStatus::NotConverged;
    }
    Ok(ConvergenceScan {
        rows,
        status,
        last_difference,
        last,
    })
}

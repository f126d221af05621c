//! Efficiency index and incremental cost-effectiveness ranking with
//! strong-dominance elimination.

use serde::{Deserialize, Serialize};

use crate::error::{ArboError, Result};
use crate::model::{IH, N_STATE};
use crate::ode::{trapezoid, Trajectory};

/// Time integral of infectious humans (person·days).
pub fn cumulated_infectious(traj: &Trajectory<N_STATE>) -> Result<f64> {
    trapezoid(&traj.grid, &traj.component(IH))
}

/// Percent reduction of the cumulated infectious count against a baseline.
pub fn efficiency_index(controlled: f64, baseline: f64) -> Result<f64> {
    if baseline == 0.0 {
        return Err(ArboError::DivisionByZero("baseline cumulated infectious count is zero".into()));
    }
    Ok((1.0 - controlled / baseline) * 100.0)
}

/// Outcome summary for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    /// Strategy name.
    pub strategy: String,
    /// Cumulated infectious humans (person·days).
    pub cumulated_ih: f64,
    /// Efficiency index in percent.
    pub efficiency_percent: f64,
    /// Total cost.
    pub total_cost: f64,
    /// Infections averted.
    pub infections_averted: f64,
}

impl StrategyReport {
    /// Report with averted infections taken as the baseline difference.
    pub fn from_run(strategy: &str, cumulated_ih: f64, baseline_ih: f64, total_cost: f64) -> Result<Self> {
        Ok(Self {
            strategy: strategy.to_string(),
            cumulated_ih,
            efficiency_percent: efficiency_index(cumulated_ih, baseline_ih)?,
            total_cost,
            infections_averted: baseline_ih - cumulated_ih,
        })
    }
}

/// Final status of a strategy in the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcerStatus {
    /// Survives every elimination round.
    Kept,
    /// Removed as strongly dominated.
    Dominated,
    /// Identical in cost and effect to a kept strategy.
    Equivalent,
}

/// Ranked row of the ICER table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcerRow {
    /// Strategy name.
    pub strategy: String,
    /// Infections averted.
    pub averted: f64,
    /// Total cost.
    pub cost: f64,
    /// Last ICER computed for this strategy; absent when undefined.
    pub icer: Option<f64>,
    /// Final status.
    pub status: IcerStatus,
    /// Strategy it is equivalent to, when equivalent.
    pub equivalent_to: Option<String>,
}

/// One ICER evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcerComparison {
    /// Elimination round starting at 1.
    pub round: usize,
    /// Strategy the increment is measured against; absent for the first.
    pub against: Option<String>,
    /// Strategy evaluated.
    pub strategy: String,
    /// ICER value; absent when the effect difference is zero.
    pub icer: Option<f64>,
}

/// One strong-dominance elimination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Elimination {
    /// Round in which the elimination happened.
    pub round: usize,
    /// Strategy removed.
    pub eliminated: String,
    /// Strategy that dominates it.
    pub dominated_by: String,
}

/// Result of the ICER procedure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcerTable {
    /// Rows in ascending order of infections averted.
    pub rows: Vec<IcerRow>,
    /// Every ICER evaluated, round by round.
    pub comparisons: Vec<IcerComparison>,
    /// Eliminations in order.
    pub eliminations: Vec<Elimination>,
}

impl IcerTable {
    /// Names of eliminated strategies in elimination order.
    pub fn elimination_order(&self) -> Vec<&str> {
        self.eliminations.iter().map(|e| e.eliminated.as_str()).collect()
    }

    /// ICER of `strategy` against `against` in the first round that computed it.
    pub fn icer(&self, strategy: &str, against: Option<&str>) -> Option<f64> {
        self.comparisons.iter().find(|c| c.strategy == strategy && c.against.as_deref() == against).and_then(|c| c.icer)
    }

    /// Row for one strategy.
    pub fn row(&self, strategy: &str) -> Option<&IcerRow> {
        self.rows.iter().find(|r| r.strategy == strategy)
    }
}

/// Ranks strategies by averted infections and removes strongly dominated
/// strategies until none remain.
pub fn icer_analysis(reports: &[StrategyReport]) -> Result<IcerTable> {
    let positive = reports.iter().filter(|r| r.infections_averted > 0.0).count();
    if positive < 2 {
        return Err(ArboError::Precondition("ICER needs at least two strategies with averted > 0".into()));
    }
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&i, &j| reports[i].infections_averted.total_cmp(&reports[j].infections_averted));
    let mut rows: Vec<IcerRow> = order
        .iter()
        .map(|&i| IcerRow {
            strategy: reports[i].strategy.clone(),
            averted: reports[i].infections_averted,
            cost: reports[i].total_cost,
            icer: None,
            status: IcerStatus::Kept,
            equivalent_to: None,
        })
        .collect();

    for j in 1..rows.len() {
        if let Some(twin) = (0..j).find(|&i| {
            rows[i].status == IcerStatus::Kept && rows[i].averted == rows[j].averted && rows[i].cost == rows[j].cost
        }) {
            rows[j].status = IcerStatus::Equivalent;
            rows[j].equivalent_to = Some(rows[twin].strategy.clone());
        }
    }

    let mut comparisons = Vec::new();
    let mut eliminations = Vec::new();
    for round in 1..=rows.len() {
        let active: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].status == IcerStatus::Kept).collect();
        let first = active[0];
        let icer0 = (rows[first].averted != 0.0).then(|| rows[first].cost / rows[first].averted);
        rows[first].icer = icer0;
        comparisons.push(IcerComparison { round, against: None, strategy: rows[first].strategy.clone(), icer: icer0 });
        let mut removed = None;
        for w in active.windows(2) {
            let (i, j) = (w[0], w[1]);
            let d_effect = rows[j].averted - rows[i].averted;
            let d_cost = rows[j].cost - rows[i].cost;
            let icer = (d_effect != 0.0).then(|| d_cost / d_effect);
            rows[j].icer = icer;
            comparisons.push(IcerComparison {
                round,
                against: Some(rows[i].strategy.clone()),
                strategy: rows[j].strategy.clone(),
                icer,
            });
            let loser = match icer {
                Some(v) if v < 0.0 => Some((i, j)),
                None if d_cost > 0.0 => Some((j, i)),
                None if d_cost < 0.0 => Some((i, j)),
                _ => None,
            };
            if loser.is_some() {
                removed = loser;
                break;
            }
        }
        let Some((loser, winner)) = removed else {
            break;
        };
        rows[loser].status = IcerStatus::Dominated;
        eliminations.push(Elimination {
            round,
            eliminated: rows[loser].strategy.clone(),
            dominated_by: rows[winner].strategy.clone(),
        });
    }
    Ok(IcerTable { rows, comparisons, eliminations })
}

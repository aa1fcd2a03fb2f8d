//! The budget annotator: oracle-query accounting and confidence-thresholded
//! pseudo-labeling.
//!
//! Oracle queries cost one unit each against the budget `m`. Pseudo-labels
//! cost nothing and are bounded only by the per-round cap.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::classifier::ProbVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetLedger {
    pub oracle_budget: u64,
    pub oracle_spent: u64,
    pub per_round_query_cap: u64,
    pub pseudo_cap_per_round: usize,
    pub confidence_threshold: f64,
    pub pseudo_assigned_total: u64,
}

impl BudgetLedger {
    pub fn new(oracle_budget: u64, per_round_query_cap: u64, pseudo_cap_per_round: usize, confidence_threshold: f64) -> Result<Self> {
        if per_round_query_cap < 1 {
            return Err(Error::InvalidConfig("per-round query cap must be >= 1".into()));
        }
        if !(confidence_threshold > 0.0 && confidence_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence threshold {confidence_threshold} must lie in (0, 1]"
            )));
        }
        Ok(BudgetLedger {
            oracle_budget,
            oracle_spent: 0,
            per_round_query_cap,
            pseudo_cap_per_round,
            confidence_threshold,
            pseudo_assigned_total: 0,
        })
    }

    /// Charges `n` oracle queries, or nothing at all if that would exceed the budget.
    pub fn charge_queries(&mut self, n: u64) -> Result<()> {
        let remaining = self.oracle_budget - self.oracle_spent;
        if n > remaining {
            return Err(Error::BudgetExhausted {
                requested: n,
                remaining,
            });
        }
        self.oracle_spent += n;
        Ok(())
    }

    pub fn remaining_budget(&self) -> u64 {
        self.oracle_budget - self.oracle_spent
    }

    /// Queries allowed this round: `min(m - spent, per-round cap)`.
    pub fn remaining_allowance(&self) -> u64 {
        self.remaining_budget().min(self.per_round_query_cap)
    }

    pub fn record_pseudo(&mut self, n: usize) {
        self.pseudo_assigned_total += n as u64;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoAssignment {
    pub instance_id: usize,
    pub label: usize,
    pub confidence: f64,
}

/// Every instance whose max probability is at least `threshold`, most
/// confident first (ties by id), truncated to `cap`.
pub fn assign_pseudo_labels<'a, I>(probs: I, threshold: f64, cap: usize) -> Vec<PseudoAssignment>
where
    I: IntoIterator<Item = (usize, &'a ProbVector)>,
{
    if cap == 0 {
        return Vec::new();
    }
    let mut out: Vec<PseudoAssignment> = probs
        .into_iter()
        .filter_map(|(id, p)| {
            let label = p.argmax();
            let confidence = p.as_slice()[label];
            (confidence >= threshold).then_some(PseudoAssignment {
                instance_id: id,
                label,
                confidence,
            })
        })
        .collect();
    out.sort_unstable_by(|a, b| match b.confidence.total_cmp(&a.confidence) {
        Ordering::Equal => a.instance_id.cmp(&b.instance_id),
        o => o,
    });
    out.truncate(cap);
    out
}

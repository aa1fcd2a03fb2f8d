//! Simulated annotator backed by the hidden ground truth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::budget::BudgetLedger;
use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Probability of answering with a uniformly chosen wrong class.
    pub noise_rate: f64,
    pub rng_seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            noise_rate: 0.0,
            rng_seed: 0,
        }
    }
}

pub struct Oracle<'a> {
    dataset: &'a Dataset,
    config: OracleConfig,
}

impl<'a> Oracle<'a> {
    pub fn new(dataset: &'a Dataset, config: OracleConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&config.noise_rate) {
            return Err(Error::InvalidConfig(format!(
                "noise rate {} must lie in [0, 1]",
                config.noise_rate
            )));
        }
        Ok(Oracle { dataset, config })
    }

    /// Answers one query and charges it to `ledger`.
    ///
    /// The noise draw is keyed by the seed, the number of queries already
    /// spent and the id, so a given query sequence always gets the same answers.
    pub fn query(&self, instance_id: usize, ledger: &mut BudgetLedger) -> Result<usize> {
        if ledger.remaining_budget() < 1 {
            return Err(Error::BudgetExhausted {
                requested: 1,
                remaining: 0,
            });
        }
        let truth = self
            .dataset
            .instance(instance_id)
            .ok_or(Error::NotFound(instance_id))?
            .true_label;
        let k = self.dataset.classes();
        let mut label = truth;
        if k > 1 && self.config.noise_rate > 0.0 {
            let mut r = rng::rng_from(rng::derive(&[
                self.config.rng_seed,
                rng::stream::ORACLE,
                ledger.oracle_spent,
                instance_id as u64,
            ]));
            if r.random::<f64>() < self.config.noise_rate {
                let other = r.random_range(0..k - 1);
                label = if other >= truth { other + 1 } else { other };
            }
        }
        ledger.charge_queries(1)?;
        Ok(label)
    }
}

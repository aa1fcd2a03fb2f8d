//! The dataset partition: oracle/seed-labeled `D^L`, unlabeled `D^U` and the
//! pseudo-labeled `D^H`.
//!
//! `D^H` is a subset of `D^U`: pseudo-labeled instances stay eligible for
//! oracle queries. `D^L` and `D^U` are disjoint and together cover the
//! training split. An id never leaves `D^L`.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Seed,
    Oracle,
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub instance_id: usize,
    pub label: usize,
    pub source: LabelSource,
    pub round: usize,
    pub confidence: f64,
}

impl LabelRecord {
    pub fn pseudo(instance_id: usize, label: usize, confidence: f64, round: usize) -> Self {
        LabelRecord {
            instance_id,
            label,
            source: LabelSource::Pseudo,
            round,
            confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolState {
    classes: usize,
    labeled: BTreeMap<usize, LabelRecord>,
    pseudo: BTreeMap<usize, LabelRecord>,
    unlabeled: BTreeSet<usize>,
    round: usize,
}

/// Draws the seed set and builds the initial partition.
///
/// One instance per class is drawn first, then the remaining
/// `seed_count - K` uniformly from what is left of the training split.
pub fn init_pools(dataset: &Dataset, seed_count: usize, rng_seed: u64) -> Result<PoolState> {
    let train = dataset.train_ids();
    let k = dataset.classes();
    if seed_count == 0 || seed_count > train.len() {
        return Err(Error::InvalidConfig(format!(
            "seed_count must lie in 1..={}, got {seed_count}",
            train.len()
        )));
    }
    if seed_count < k {
        return Err(Error::StratificationInfeasible {
            seed_count,
            classes: k,
        });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &id in train {
        by_class[dataset.true_label(id)].push(id);
    }
    if let Some(missing) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::InvalidConfig(format!(
            "class {missing} has no training instances"
        )));
    }

    let mut rng = rng::rng_from(rng_seed);
    let mut chosen = BTreeSet::new();
    for members in &by_class {
        chosen.insert(*members.choose(&mut rng).expect("non-empty class"));
    }
    let mut rest: Vec<usize> = train.iter().copied().filter(|id| !chosen.contains(id)).collect();
    let (extra, _) = rest.partial_shuffle(&mut rng, seed_count - k);
    chosen.extend(extra.iter().copied());

    let labeled = chosen
        .iter()
        .map(|&id| {
            (
                id,
                LabelRecord {
                    instance_id: id,
                    label: dataset.true_label(id),
                    source: LabelSource::Seed,
                    round: 0,
                    confidence: 1.0,
                },
            )
        })
        .collect();
    let unlabeled = train.iter().copied().filter(|id| !chosen.contains(id)).collect();
    Ok(PoolState {
        classes: k,
        labeled,
        pseudo: BTreeMap::new(),
        unlabeled,
        round: 0,
    })
}

impl PoolState {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn set_round(&mut self, round: usize) {
        self.round = round;
    }

    /// `D^L` in id order.
    pub fn labeled(&self) -> impl Iterator<Item = &LabelRecord> {
        self.labeled.values()
    }

    /// `D^H` in id order.
    pub fn pseudo(&self) -> impl Iterator<Item = &LabelRecord> {
        self.pseudo.values()
    }

    pub fn unlabeled(&self) -> &BTreeSet<usize> {
        &self.unlabeled
    }

    pub fn unlabeled_ids(&self) -> Vec<usize> {
        self.unlabeled.iter().copied().collect()
    }

    pub fn labeled_len(&self) -> usize {
        self.labeled.len()
    }

    pub fn pseudo_len(&self) -> usize {
        self.pseudo.len()
    }

    pub fn unlabeled_len(&self) -> usize {
        self.unlabeled.len()
    }

    pub fn is_labeled(&self, id: usize) -> bool {
        self.labeled.contains_key(&id)
    }

    pub fn pseudo_record(&self, id: usize) -> Option<&LabelRecord> {
        self.pseudo.get(&id)
    }

    /// Moves queried ids into `D^L` with source `oracle`. All-or-nothing.
    pub fn commit_oracle_labels(&mut self, assignments: &[(usize, usize)], round: usize) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &(id, label) in assignments {
            if self.labeled.contains_key(&id) || !seen.insert(id) {
                return Err(Error::DoubleLabel(id));
            }
            if !self.unlabeled.contains(&id) && !self.pseudo.contains_key(&id) {
                return Err(Error::NotFound(id));
            }
            if label >= self.classes {
                return Err(Error::LabelOutOfRange {
                    label,
                    classes: self.classes,
                });
            }
        }
        for &(id, label) in assignments {
            self.unlabeled.remove(&id);
            self.pseudo.remove(&id);
            self.labeled.insert(
                id,
                LabelRecord {
                    instance_id: id,
                    label,
                    source: LabelSource::Oracle,
                    round,
                    confidence: 1.0,
                },
            );
        }
        Ok(())
    }

    /// Replaces `D^H` wholesale. `D^U` is left unchanged.
    pub fn rebuild_pseudo_set(&mut self, assignments: &[LabelRecord]) -> Result<()> {
        let mut next = BTreeMap::new();
        for rec in assignments {
            let id = rec.instance_id;
            if self.labeled.contains_key(&id) {
                return Err(Error::Conflict(id));
            }
            if !self.unlabeled.contains(&id) {
                return Err(Error::NotFound(id));
            }
            if rec.source != LabelSource::Pseudo {
                return Err(Error::InvalidConfig(format!(
                    "record for {id} must have source pseudo"
                )));
            }
            if rec.label >= self.classes {
                return Err(Error::LabelOutOfRange {
                    label: rec.label,
                    classes: self.classes,
                });
            }
            next.insert(id, *rec);
        }
        self.pseudo = next;
        Ok(())
    }

    /// Checks the partition against the training split of `dataset`.
    pub fn check_invariants(&self, dataset: &Dataset) -> Result<()> {
        let bad = |msg: String| Err(Error::Integrity(msg));
        for id in self.labeled.keys() {
            if self.unlabeled.contains(id) {
                return bad(format!("{id} is both labeled and unlabeled"));
            }
            if self.pseudo.contains_key(id) {
                return bad(format!("{id} is both labeled and pseudo-labeled"));
            }
        }
        for (id, rec) in &self.pseudo {
            if !self.unlabeled.contains(id) {
                return bad(format!("pseudo-labeled {id} is not in the unlabeled pool"));
            }
            if rec.source != LabelSource::Pseudo {
                return bad(format!("pseudo record {id} has source {:?}", rec.source));
            }
        }
        for (id, rec) in &self.labeled {
            if rec.source == LabelSource::Pseudo || rec.confidence != 1.0 {
                return bad(format!("labeled record {id} is not a seed/oracle record"));
            }
        }
        let covered: BTreeSet<usize> = self.labeled.keys().chain(&self.unlabeled).copied().collect();
        let train: BTreeSet<usize> = dataset.train_ids().iter().copied().collect();
        if covered != train || covered.len() != self.labeled.len() + self.unlabeled.len() {
            return bad("labeled ∪ unlabeled does not partition the training split".into());
        }
        Ok(())
    }

    pub fn to_snapshot(&self) -> PoolSnapshot {
        PoolSnapshot {
            classes: self.classes,
            round: self.round,
            labeled: self.labeled.values().copied().collect(),
            pseudo: self.pseudo.values().copied().collect(),
            unlabeled: self.unlabeled_ids(),
        }
    }
}

/// Serializable form of a [`PoolState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSnapshot {
    pub classes: usize,
    pub round: usize,
    pub labeled: Vec<LabelRecord>,
    pub pseudo: Vec<LabelRecord>,
    pub unlabeled: Vec<usize>,
}

impl PoolSnapshot {
    pub fn restore(&self, dataset: &Dataset) -> Result<PoolState> {
        let state = PoolState {
            classes: self.classes,
            labeled: self.labeled.iter().map(|r| (r.instance_id, *r)).collect(),
            pseudo: self.pseudo.iter().map(|r| (r.instance_id, *r)).collect(),
            unlabeled: self.unlabeled.iter().copied().collect(),
            round: self.round,
        };
        if state.labeled.len() != self.labeled.len() || state.pseudo.len() != self.pseudo.len() {
            return Err(Error::Integrity("duplicate ids in pool snapshot".into()));
        }
        if self.classes != dataset.classes() {
            return Err(Error::Integrity("pool snapshot class count differs from dataset".into()));
        }
        state.check_invariants(dataset)?;
        Ok(state)
    }
}

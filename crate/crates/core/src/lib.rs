//! Pool-based active learning over frozen feature embeddings.
//!
//! A softmax head is trained on the labeled pool, unlabeled instances are
//! ranked by uncertainty × information density, the top batch is sent to a
//! budgeted oracle, and confident predictions are added as pseudo-labels
//! at zero query cost. Every round is evaluated on a held-out split.
//!
//! With the default `parallel` feature, per-instance scoring and evaluation
//! run on rayon; results are identical to the sequential path.

pub mod al_loop;
pub mod budget;
pub mod classifier;
pub mod data_io;
pub mod error;
pub mod exec;
pub mod oracle;
pub mod pools;
pub mod rng;
pub mod strategies;

pub use al_loop::{
    compare_strategies, random_baseline_strategy, run_experiment, ComparisonReport, Experiment, QueryStrategy,
    RoundRecord, RunConfig, RunReport, RunState, Termination, Variant,
};
pub use budget::{assign_pseudo_labels, BudgetLedger, PseudoAssignment};
pub use classifier::{Example, Metrics, ProbVector, SoftmaxHead, TrainConfig};
pub use data_io::{generate_synthetic, load_embedding_csv, Dataset, SyntheticSpec};
pub use error::{Error, Result};
pub use oracle::{Oracle, OracleConfig};
pub use pools::{init_pools, LabelRecord, LabelSource, PoolState};
pub use strategies::{ScoredInstance, StrategyConfig, UncertaintyKind};

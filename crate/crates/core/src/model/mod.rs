//! The fact-only and paired-text classifiers, their losses and training.

mod data;
mod layers;
mod net;
mod optim;
mod params;
mod train;

pub use data::{build_examples, EncodedText, Example, SecondTexts, TextEncoder};
pub use layers::{attention_pool, bigru_encode, interaction, linear, merge_quadruple, zero_state, AttentionVars, GruVars};
pub use net::{aux_relevance_loss, bce_loss, fact_only_forward, paired_forward, Forward, Model};
pub use optim::Adam;
pub use params::{Arch, Bound, HeadKind, ModelSpec};
pub use train::{
    case_rows, evaluate, predict_all, sample_negatives, train, train_step, CaseRows, EpochLog, EvalSummary,
    TrainConfig, TrainOutcome,
};

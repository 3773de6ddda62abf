//! Agreement and classification scores.

mod f1;
mod kappa;
mod table;

pub use f1::{binary_f1, f1_10plus1, hard_macro_f1};
pub use kappa::{
    alignment_report, cohens_kappa, AlignmentReport, KappaSummary, PairKappa, SkippedPair,
    DEFAULT_ANNOTATOR,
};
pub(crate) use table::render_grid;
pub use table::{render_model_table, ModelRow};

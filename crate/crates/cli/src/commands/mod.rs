pub(crate) mod corpus;
pub(crate) mod markup;
pub(crate) mod model;
pub(crate) mod stats;

use std::path::PathBuf;

use clap::{Args, Subcommand};

use crate::artifact::Part;
use crate::config::Rule;
use crate::Ctx;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract facts paragraphs from raw judgments into corpus.jsonl.
    ParseJudgment(ParseJudgmentArgs),
    /// Parse raw summaries into summary.jsonl.
    ParseSummary(ParseSummaryArgs),
    /// Curate allegation sets from judgments and metadata into allegations.csv.
    CurateAllegations(CurateArgs),
    /// Chronological train/validation/test split.
    Split(SplitArgs),
    /// Pack case facts into fixed-size token packets.
    Pack(PackArgs),
    /// Markups from stemmed overlap between facts and summaries.
    HardDerive(HardDeriveArgs),
    /// Seeded toy corpus with planted trigger words.
    GenSynthetic(GenSyntheticArgs),
    /// Train a classifier; keeps the best validation epoch.
    Train(TrainArgs),
    /// Integrated-gradients attributions for every alleged article.
    Attribute(AttributeArgs),
    /// Turn attributions (or random scores) into binary markups.
    Binarize(BinarizeArgs),
    /// Kappa between model markups and expert markups.
    Align(AlignArgs),
    /// Classification scores of a trained model.
    Eval(EvalArgs),
    /// Pairwise agreement between two annotators' markups.
    Iaa(IaaArgs),
    /// Association between agreement and proxy variables.
    ProxyStats(ProxyStatsArgs),
    /// Markdown report from eval, align, iaa and proxy-stats outputs.
    Report(ReportArgs),
}

/// Restricts a command to one part of a split.
#[derive(Debug, Clone, Args)]
pub struct PartArgs {
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub part: Part,
}

/// Second-text inputs of paired models.
#[derive(Debug, Clone, Args)]
pub struct SecondArgs {
    /// summary.jsonl, for summary-conditioned models.
    #[arg(long)]
    pub summaries: Option<PathBuf>,
    /// articles.json, for article-conditioned models.
    #[arg(long)]
    pub articles: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseJudgmentArgs {
    /// JSON lines of {case_id, judgment_date?, text, alleged?, violated?, metadata_articles?, proxies?}.
    #[arg(long)]
    pub input: PathBuf,
    /// Curated allegations to use as the alleged sets.
    #[arg(long)]
    pub allegations: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParseSummaryArgs {
    /// JSON lines of {case_id, text}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurateArgs {
    /// Raw judgments, as for parse-judgment.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Last date of the training part.
    #[arg(long)]
    pub cut1: Option<chrono::NaiveDate>,
    /// Last date of the validation part.
    #[arg(long)]
    pub cut2: Option<chrono::NaiveDate>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PackArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Tokens per packet.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HardDeriveArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub summaries: PathBuf,
    #[command(flatten)]
    pub part: PartArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenSyntheticArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    /// Article label list, one per line; the configured or bundled list otherwise.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub second: SecondArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Training log, JSON lines.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttributeArgs {
    /// Checkpoint written by train.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub part: PartArgs,
    #[command(flatten)]
    pub second: SecondArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub rule: Option<Rule>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    /// Attribution file; not needed with --random.
    #[arg(long)]
    pub attrs: Option<PathBuf>,
    /// Expert markups whose per-annotator densities are matched.
    #[arg(long)]
    pub like: Option<PathBuf>,
    /// Fixed density instead of matching experts.
    #[arg(long)]
    pub density: Option<f64>,
    /// Random scores instead of attributions (baseline).
    #[arg(long)]
    pub random: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub part: PartArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Model markups.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub expert: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub part: PartArgs,
    /// Row label in reports; the model markups' source otherwise.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub part: PartArgs,
    #[command(flatten)]
    pub second: SecondArgs,
    #[arg(long, default_value = "model")]
    pub name: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IaaArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Corpus whose stop words are left out of the comparison.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProxyStatsArgs {
    /// proxies.csv with one row per annotated pair.
    #[arg(long, conflicts_with = "kappas")]
    pub proxies: Option<PathBuf>,
    /// Per-pair kappas from align or iaa, joined with the corpus proxies.
    #[arg(long, requires = "corpus")]
    pub kappas: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Welch's unequal-variance t-test.
    #[arg(long)]
    pub welch: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Outputs of eval, align, iaa and proxy-stats, in row order.
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn dispatch(command: Command, ctx: &mut Ctx) -> anyhow::Result<()> {
    match command {
        Command::ParseJudgment(a) => corpus::parse_judgment(a, ctx),
        Command::ParseSummary(a) => corpus::parse_summary(a, ctx),
        Command::CurateAllegations(a) => corpus::curate(a, ctx),
        Command::Split(a) => corpus::split(a, ctx),
        Command::Pack(a) => corpus::pack(a, ctx),
        Command::HardDerive(a) => corpus::hard_derive(a, ctx),
        Command::GenSynthetic(a) => corpus::gen_synthetic(a, ctx),
        Command::Train(a) => model::train(a, ctx),
        Command::Attribute(a) => model::attribute(a, ctx),
        Command::Eval(a) => model::eval(a, ctx),
        Command::Binarize(a) => markup::binarize(a, ctx),
        Command::Align(a) => markup::align(a, ctx),
        Command::Iaa(a) => markup::iaa(a, ctx),
        Command::ProxyStats(a) => stats::proxy_stats(a, ctx),
        Command::Report(a) => crate::report::report(a, ctx),
    }
}

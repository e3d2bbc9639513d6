use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyseq::nets::{LayerKind, MaskMode};
use polyseq::polymer::Strategy;
use polyseq::rsit::{Loss, Metric};

#[derive(Debug, Parser)]
#[command(
    name = "polyseq",
    version,
    about = "Polymer sequence graphs, invariance oracles and robustness tests"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random draw (weights, augmentations, oracles).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub d_thres: u64,
    #[arg(long, global = true, default_value_t = 3)]
    pub layers: usize,
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: u64,
    #[arg(long, global = true, default_value = "link", value_parser = parse_strategy)]
    pub strategy: Strategy,
    /// gin or attention.
    #[arg(long, global = true, default_value = "attention", value_parser = parse_layer)]
    pub layer_kind: LayerKind,
    /// Where the attention mask is applied: pre or post softmax.
    #[arg(long, global = true, default_value = "pre", value_parser = parse_mask)]
    pub mask_mode: MaskMode,
    /// Disable the backbone embedding.
    #[arg(long, global = true)]
    pub no_backbone: bool,
    /// Override the command's numerical tolerance.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Weight file (JSON); generated from --seed when absent.
    #[arg(long, global = true)]
    pub weights: Option<PathBuf>,
    /// Descriptor CSV: `psmiles,<col...>`.
    #[arg(long, global = true, requires = "groups")]
    pub descriptors: Option<PathBuf>,
    /// Group config JSON: `{group: [column, ...]}`.
    #[arg(long, global = true, requires = "descriptors")]
    pub groups: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn parse_layer(s: &str) -> Result<LayerKind, String> {
    s.parse()
}

fn parse_mask(s: &str) -> Result<MaskMode, String> {
    s.parse()
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossArg {
    Squared,
    Absolute,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Loss {
        match l {
            LossArg::Squared => Loss::Squared,
            LossArg::Absolute => Loss::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Theorem1,
    Theorem2,
    Lemma1,
    Theorem3,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeyKind {
    /// Invariant to repeats, translations and reversal.
    Polymer,
    /// Canonical star-linking graph.
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Monomer,
    Link,
    /// The graph the configured model sees.
    Model,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One JSON graph dump per corpus line.
    Parse { input: PathBuf },
    /// One canonical key (hex) per corpus line.
    Canon {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "polymer")]
        key: KeyKind,
    },
    /// Seeded repeat/translate variants of every corpus line.
    Augment {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        variants: usize,
    },
    /// Star-linking graph dump per corpus line.
    Link { input: PathBuf },
    /// Backbone atoms per corpus line.
    Backbone { input: PathBuf },
    /// Ring statistics per corpus file.
    Stats {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Distance matrix, attention mask and path bonds of one polymer.
    Distances {
        psmiles: String,
        #[arg(long, value_enum, default_value = "link")]
        graph: GraphKind,
    },
    /// Run the invariance oracle suites.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        monomers: usize,
        /// Twin pairs kept per seed graph.
        #[arg(long, default_value_t = 4)]
        pairs_per_seed: usize,
        #[arg(long)]
        json: bool,
    },
    /// Repeat and shift invariance test over a `psmiles,value` CSV.
    Rsit {
        dataset: PathBuf,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value = "r2", value_parser = parse_metric)]
        metric: Metric,
        #[arg(long, value_enum, default_value = "squared")]
        loss: LossArg,
        /// Run all four strategies and print the comparison table.
        #[arg(long)]
        compare: bool,
        /// Exit 3 unless every prediction shift stays within tolerance.
        #[arg(long)]
        require_invariant: bool,
        /// JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fragment importance over a fragmentation JSON.
    Fragcam {
        fragments: PathBuf,
        /// Resolve shared atoms to the lower-indexed fragment.
        #[arg(long)]
        resolve_overlaps: bool,
        #[arg(long, default_value_t = 3)]
        top: usize,
        #[arg(long)]
        json: bool,
    },
    /// Model prediction per corpus line.
    Forward {
        input: PathBuf,
        /// Also write the model weights here.
        #[arg(long)]
        save_weights: Option<PathBuf>,
    },
}

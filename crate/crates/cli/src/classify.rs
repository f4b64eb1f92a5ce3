use std::fs;
use std::path::PathBuf;

use antsyn::classify::{make_controls, run_table_cell, CellParams, ClassifierKind};
use antsyn::pairdata::lexical_split;
use antsyn::tsv::write_atomic;
use antsyn::{Error, SplitMode, SplitSpec};
use clap::Args;
use serde_json::json;

use crate::exit::CliResult;
use crate::manifest::RunManifest;
use crate::rundir::RunDir;

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// An `embed` output directory.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// stuttgart (the dataset's own split) or lexical (disjoint vocabularies).
    #[arg(long, default_value = "stuttgart")]
    pub split: SplitMode,
    /// Target share of words on the test side of a lexical split.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Leave validation pairs out instead of training on them.
    #[arg(long)]
    pub exclude_val: bool,
    /// lr, nn, kmeans or spectral.
    #[arg(long)]
    pub classifier: ClassifierKind,
    /// Classify in the joint UMAP projection of pairs and controls.
    #[arg(long)]
    pub use_umap: bool,
    /// Clusters for the transductive classifiers.
    #[arg(long, default_value_t = antsyn::classify::transduce::DEFAULT_K)]
    pub k: usize,
    /// Seeds the controls, the projection and the classifier.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub n_neighbors: usize,
    #[arg(long, default_value_t = 0.1)]
    pub min_dist: f64,
    #[arg(long)]
    pub n_epochs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn split_for(run: &RunDir, mode: SplitMode, test_fraction: f64, seed: u64, merge_val: bool) -> CliResult<SplitSpec> {
    Ok(match mode {
        SplitMode::Stuttgart => SplitSpec::stuttgart(&run.pairs, merge_val)?,
        SplitMode::Lexical => lexical_split(&run.pairs, test_fraction, seed)?,
    })
}

pub fn run(args: &ClassifyArgs, command: Vec<String>) -> CliResult<()> {
    let run = RunDir::open(&args.input)?;
    let split = split_for(&run, args.split, args.test_fraction, args.split_seed, !args.exclude_val)?;
    let mut params = CellParams::default().with_seed(args.seed);
    params.k = args.k;
    params.umap.n_neighbors = args.n_neighbors;
    params.umap.min_dist = args.min_dist;
    params.umap.n_epochs = args.n_epochs;
    // Controls depend on the seed only, so a cell matches the same seed's
    // cell in an ablation table.
    let controls = make_controls(&run.pairs, args.seed)?;
    let report = run_table_cell(&run.store, &run.pairs, &controls, &split, args.use_umap, args.classifier, &params)?;

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut json_text = serde_json::to_string_pretty(&report).expect("report serialises");
    json_text.push('\n');
    write_atomic(&args.out.join("report.json"), json_text.as_bytes())?;

    let mut m = RunManifest::new(
        command,
        vec![args.seed],
        Some(run.source),
        json!({
            "split": args.split,
            "test_fraction": args.test_fraction,
            "split_seed": args.split_seed,
            "merge_val": !args.exclude_val,
            "train_pairs": split.train.len(),
            "test_pairs": split.test.len(),
            "classifier": args.classifier,
            "use_umap": args.use_umap,
            "cell": params,
        }),
    );
    for f in run.data_files() {
        m.add_input(&f)?;
    }
    m.add_output(&args.out, "report.json")?;
    m.write(&args.out.join("manifest-classify.json"))?;
    println!(
        "{} {}{} on {} test pairs: accuracy {:.4}, macro F1 {:.4}",
        run.source,
        if args.use_umap { "UMAP " } else { "" },
        args.classifier.table_name(),
        report.n_test,
        report.accuracy,
        report.macro_f1
    );
    Ok(())
}

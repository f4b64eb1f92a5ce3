use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use antsyn::api_embed::{credentials_from_env, embed_words, model_source, EmbedCache, EmbedRequest, RetryPolicy};
use antsyn::classify::make_controls;
use antsyn::embedstore::{coverage, filter_pairs, load_vectors, CoverageReport};
use antsyn::eval::{cosine_histogram, DEFAULT_BINS};
use antsyn::pairdata::{load_stuttgart_all, Relation};
use antsyn::plot::{histogram_svg, PlotStyle};
use antsyn::tsv::{write_atomic, write_pairs};
use antsyn::vectorize::pair_cosines;
use antsyn::{EmbeddingSource, EmbeddingStore, Error, Label, PairDataset};
use clap::Args;
use serde_json::json;

use crate::exit::{CliResult, Failure};
use crate::manifest::RunManifest;
use crate::rundir::{COVERAGE, EMBED_MANIFEST, PAIRS, VECTORS};

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// word2vec, glove, bert-table, text-embedding-3-small or text-embedding-3-large.
    #[arg(long)]
    pub model: EmbeddingSource,
    /// Vector file for the local models (`.bin` is read as word2vec binary).
    #[arg(long)]
    pub vectors_path: Option<PathBuf>,
    /// Cache directory for the API models.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Directory holding the `<pos>-pairs.<split>` files.
    #[arg(long)]
    pub pairs_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the shuffled controls.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub batch_size: usize,
    #[arg(long, default_value = antsyn::api_embed::DEFAULT_ENDPOINT)]
    pub endpoint: String,
}

fn is_api(model: EmbeddingSource) -> bool {
    matches!(model, EmbeddingSource::ApiSmall | EmbeddingSource::ApiLarge)
}

fn coverage_tsv(r: &CoverageReport) -> String {
    let mut out = String::from("key\tvalue\n");
    let _ = writeln!(out, "model\t{}\ndim\t{}", r.source, r.dim);
    let _ = writeln!(out, "words_total\t{}\nwords_covered\t{}", r.total_words, r.covered_words);
    for (label, total) in &r.total_pairs_per_label {
        let covered = r.covered_pairs_per_label.get(label).copied().unwrap_or(0);
        let _ = writeln!(out, "{label}_pairs\t{total}\n{label}_covered\t{covered}");
    }
    out
}

fn load_store(args: &EmbedArgs, vocab: &[String]) -> CliResult<EmbeddingStore> {
    if is_api(args.model) {
        let Some(dir) = &args.cache_dir else {
            return Err(Failure::usage(format!("--model {} needs --cache-dir", args.model)));
        };
        let req = EmbedRequest::new(vocab.to_vec(), args.model.as_str(), args.batch_size)?;
        debug_assert_eq!(model_source(&req.model_name), Some(args.model));
        let cache = EmbedCache::new(dir);
        let key = credentials_from_env();
        let mut transport = antsyn::api_embed::HttpTransport::new(&args.endpoint);
        Ok(embed_words(&req, &cache, key.as_deref(), &mut transport, &RetryPolicy::default())?)
    } else {
        let Some(path) = &args.vectors_path else {
            return Err(Failure::usage(format!("--model {} needs --vectors-path", args.model)));
        };
        let keep: HashSet<String> = vocab.iter().cloned().collect();
        Ok(load_vectors(path, args.model, Some(&keep))?)
    }
}

pub fn run(args: &EmbedArgs, command: Vec<String>) -> CliResult<()> {
    let ant = load_stuttgart_all(&args.pairs_dir, Relation::Antonym)?;
    let syn = load_stuttgart_all(&args.pairs_dir, Relation::Synonym)?;
    let all = PairDataset::concat("pairs", [&ant, &syn]);
    let vocab: Vec<String> = all.vocabulary().into_iter().map(str::to_owned).collect();

    let store = load_store(args, &vocab)?;
    let report = coverage(&store, &[&all]);
    let covered = filter_pairs(&all, &store);
    if covered.is_empty() {
        return Err(Failure::data(format!("no pair is covered by {}", args.model)));
    }
    let controls = make_controls(&covered, args.seed)?;

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let out = &args.out;
    write_atomic(&out.join(COVERAGE), coverage_tsv(&report).as_bytes())?;
    write_pairs(&out.join(PAIRS), &PairDataset::concat("pairs", [&covered, &controls]))?;
    store.subset(covered.vocabulary()).write_text(&out.join(VECTORS))?;
    let outputs = [COVERAGE, PAIRS, VECTORS, "cosines.tsv", "cosines.svg"];
    write_cosines(out, &store, &covered, &controls)?;

    let mut m = RunManifest::new(
        command,
        vec![args.seed],
        Some(args.model),
        json!({ "batch_size": args.batch_size, "histogram_bins": DEFAULT_BINS }),
    );
    for path in args.vectors_path.iter() {
        m.add_input(path)?;
    }
    let mut pair_files: Vec<PathBuf> = fs::read_dir(&args.pairs_dir)
        .map_err(|e| Error::io(&args.pairs_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.contains("-pairs.") || n.contains("-antonym.") || n.contains("-synonym.")))
        .collect();
    pair_files.sort();
    for p in &pair_files {
        m.add_input(p)?;
    }
    for name in outputs {
        m.add_output(out, name)?;
    }
    m.write(&out.join(EMBED_MANIFEST))?;

    let covered_n = report.covered_pairs_per_label.values().sum::<usize>();
    let total_n = report.total_pairs_per_label.values().sum::<usize>();
    println!(
        "{}: {} of {} words, {covered_n} of {total_n} pairs covered; wrote {}",
        args.model,
        report.covered_words,
        report.total_words,
        out.display()
    );
    Ok(())
}

fn write_cosines(out: &Path, store: &EmbeddingStore, pairs: &PairDataset, controls: &PairDataset) -> CliResult<()> {
    let mut values: BTreeMap<Label, Vec<f64>> = BTreeMap::new();
    for ds in [pairs, controls] {
        for label in Label::ALL {
            let part = ds.filter(label.as_str(), |p| p.label == label);
            if !part.is_empty() {
                values.entry(label).or_default().extend(pair_cosines(&part, store)?);
            }
        }
    }
    let spec = cosine_histogram(&values, DEFAULT_BINS)?;
    write_atomic(&out.join("cosines.tsv"), spec.to_tsv().as_bytes())?;
    histogram_svg(&spec, &PlotStyle::default(), &out.join("cosines.svg"))?;
    Ok(())
}

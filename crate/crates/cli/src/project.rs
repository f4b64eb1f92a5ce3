use std::fs;
use std::path::PathBuf;

use antsyn::pairdata::{PairDataset, Pos};
use antsyn::plot::{scatter_svg, PlotStyle};
use antsyn::reduce::tsne::tsne;
use antsyn::reduce::{pca, umap};
use antsyn::tsv::{read_cloud, write_cloud, write_projection};
use antsyn::vectorize::cloud;
use antsyn::{Construction, Error, LabeledCloud, Metric, ProjectionMethod, UmapParams};
use antsyn::reduce::TsneParams;
use clap::{ArgAction, Args};
use serde_json::json;

use crate::exit::{CliResult, Failure};
use crate::manifest::RunManifest;
use crate::rundir::RunDir;

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// An `embed` output directory, or a cloud TSV saved with --save-cloud.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "umap")]
    pub method: ProjectionMethod,
    /// UMAP neighbourhood metric.
    #[arg(long, default_value = "euclidean")]
    pub metric: Metric,
    #[arg(long, default_value_t = 30)]
    pub n_neighbors: usize,
    #[arg(long, default_value_t = 0.1)]
    pub min_dist: f64,
    /// UMAP epochs; by default 500 below 10,000 points, 200 above.
    #[arg(long)]
    pub n_epochs: Option<usize>,
    #[arg(long, default_value_t = 30.0)]
    pub perplexity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// diff (E2 - E1) or concat (E1 then E2).
    #[arg(long, default_value = "diff")]
    pub construction: Construction,
    /// Include the shuffled controls (`--include-shuffled=false` drops them).
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub include_shuffled: bool,
    /// Restrict to one part of speech instead of pooling all three.
    #[arg(long)]
    pub pos: Option<Pos>,
    /// Also write the vector cloud as cloud.tsv.
    #[arg(long)]
    pub save_cloud: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn keep(ds: &PairDataset, pos: Option<Pos>) -> PairDataset {
    ds.filter(ds.name.clone(), |p| pos.is_none_or(|q| p.pos == q))
}

fn build_cloud(args: &ProjectArgs, m: &mut RunManifest) -> CliResult<LabeledCloud> {
    if args.input.is_file() {
        if args.pos.is_some() {
            return Err(Failure::usage("--pos needs an embed directory; cloud files carry no part of speech"));
        }
        m.add_input(&args.input)?;
        let c = read_cloud(&args.input)?;
        return Ok(if args.include_shuffled { c } else { c.without_shuffled() });
    }
    let run = RunDir::open(&args.input)?;
    for f in run.data_files() {
        m.add_input(&f)?;
    }
    m.model_source = Some(run.source);
    let pairs = keep(&run.pairs, args.pos);
    let controls = keep(&run.controls, args.pos);
    let mut parts = vec![&pairs];
    if args.include_shuffled {
        parts.push(&controls);
    }
    Ok(cloud(&parts, &run.store, args.construction)?)
}

pub fn run(args: &ProjectArgs, command: Vec<String>) -> CliResult<()> {
    let params = json!({
        "method": args.method,
        "metric": args.metric,
        "n_neighbors": args.n_neighbors,
        "min_dist": args.min_dist,
        "n_epochs": args.n_epochs,
        "perplexity": args.perplexity,
        "construction": args.construction,
        "include_shuffled": args.include_shuffled,
        "pos": args.pos,
    });
    let mut m = RunManifest::new(command, vec![args.seed], None, params);
    let c = build_cloud(args, &mut m)?;
    if c.is_empty() {
        return Err(Failure::data("no pairs left to project"));
    }
    let proj = match args.method {
        ProjectionMethod::Umap => {
            let p = UmapParams {
                n_neighbors: args.n_neighbors,
                min_dist: args.min_dist,
                metric: args.metric,
                n_epochs: args.n_epochs,
                seed: args.seed,
                ..UmapParams::default()
            };
            umap(&c, &p)?
        }
        ProjectionMethod::Tsne => tsne(
            &c,
            &TsneParams { perplexity: args.perplexity, seed: args.seed, ..TsneParams::default() },
        )?,
        ProjectionMethod::Pca => pca(&c, 2)?,
    };

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut outputs = vec!["projection.tsv", "scatter.svg"];
    write_projection(&args.out.join("projection.tsv"), &proj)?;
    scatter_svg(&proj, &PlotStyle::default(), &args.out.join("scatter.svg"))?;
    if args.save_cloud {
        write_cloud(&args.out.join("cloud.tsv"), &c)?;
        outputs.push("cloud.tsv");
    }
    for name in outputs {
        m.add_output(&args.out, name)?;
    }
    m.write(&args.out.join("manifest-project.json"))?;
    println!("projected {} pairs with {}; wrote {}", proj.len(), args.method, args.out.display());
    Ok(())
}

//! Hyperparameter grid figures and full accuracy tables from a TOML config.
//!
//! ```toml
//! seeds = [0, 1, 2]
//!
//! [[models]]
//! run = "runs/word2vec"        # an `embed` output directory
//!
//! [projection]                 # omit to skip the grid figures
//! n_neighbors = [15, 30, 50, 100]
//! min_dist = [0.01, 0.1, 0.25]
//!
//! [table]                      # omit to skip the tables
//! layout = "table3"            # table3: lexical split, table4: dataset split
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use antsyn::classify::{run_table_row, CellParams};
use antsyn::eval::{aggregate, emit_tables, TableGrid, TableLayout};
use antsyn::plot::{grid_svg, PlotStyle};
use antsyn::reduce::umap;
use antsyn::tsv::write_atomic;
use antsyn::vectorize::difference_cloud;
use antsyn::{Error, Metric, SplitMode, UmapParams};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::classify::split_for;
use crate::exit::{CliResult, Failure};
use crate::manifest::RunManifest;
use crate::rundir::RunDir;

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub grid_config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub models: Vec<ModelEntry>,
    pub projection: Option<ProjectionGrid>,
    pub table: Option<TableConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub run: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionGrid {
    pub n_neighbors: Vec<usize>,
    pub min_dist: Vec<f64>,
    pub metric: Metric,
    pub include_shuffled: bool,
    pub n_epochs: Option<usize>,
    pub seed: u64,
}

impl Default for ProjectionGrid {
    fn default() -> Self {
        ProjectionGrid {
            n_neighbors: vec![15, 30, 50, 100],
            min_dist: vec![0.01, 0.1, 0.25],
            metric: Metric::Euclidean,
            include_shuffled: true,
            n_epochs: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableConfig {
    pub layout: TableLayout,
    pub test_fraction: f64,
    pub split_seed: u64,
    pub merge_val: bool,
    pub cell: CellParams,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            layout: TableLayout::Table3,
            test_fraction: 0.2,
            split_seed: 0,
            merge_val: true,
            cell: CellParams::default(),
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

fn load_config(path: &Path) -> CliResult<GridConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: GridConfig =
        toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {}", path.display(), e.message())))?;
    if cfg.models.is_empty() || cfg.seeds.is_empty() {
        return Err(Failure::usage(format!("{}: needs at least one model and one seed", path.display())));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    for m in &mut cfg.models {
        if m.run.is_relative() {
            m.run = base.join(&m.run);
        }
    }
    Ok(cfg)
}

fn grid_figure(run: &RunDir, grid: &ProjectionGrid, out: &Path) -> CliResult<()> {
    let mut parts = vec![&run.pairs];
    if grid.include_shuffled {
        parts.push(&run.controls);
    }
    let c = difference_cloud(&parts, &run.store)?;
    let mut panels = Vec::new();
    for &n_neighbors in &grid.n_neighbors {
        for &min_dist in &grid.min_dist {
            let p = UmapParams {
                n_neighbors,
                min_dist,
                metric: grid.metric,
                n_epochs: grid.n_epochs,
                seed: grid.seed,
                ..UmapParams::default()
            };
            panels.push((umap(&c, &p)?, format!("n_neighbors={n_neighbors}, min_dist={min_dist}")));
        }
    }
    let style = PlotStyle { width: 360, height: 320, ..PlotStyle::default() };
    grid_svg(&panels, grid.n_neighbors.len(), grid.min_dist.len(), &style, out)?;
    Ok(())
}

pub fn run(args: &AblateArgs, command: Vec<String>) -> CliResult<()> {
    let cfg = load_config(&args.grid_config)?;
    let runs = cfg.models.iter().map(|m| RunDir::open(&m.run)).collect::<CliResult<Vec<_>>>()?;
    let mut sources: Vec<_> = runs.iter().map(|r| r.source).collect();
    sources.sort();
    if sources.windows(2).any(|w| w[0] == w[1]) {
        return Err(Failure::usage("each model may appear only once in a grid config"));
    }
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut outputs: Vec<String> = Vec::new();

    if let Some(grid) = &cfg.projection {
        for run in &runs {
            let name = format!("grid-{}.svg", run.source);
            grid_figure(run, grid, &args.out.join(&name))?;
            println!("wrote {name}");
            outputs.push(name);
        }
    }

    if let Some(t) = &cfg.table {
        let mode = match t.layout {
            TableLayout::Table3 => SplitMode::Lexical,
            TableLayout::Table4 => SplitMode::Stuttgart,
        };
        let mut grid = TableGrid::new();
        let mut cells = String::from("model\tcolumn\tseed\taccuracy\tmacro_f1\tconfig_digest\n");
        let mut summary = String::from("model\tcolumn\tmean\tstd\truns\n");
        for run in &runs {
            let split = split_for(run, mode, t.test_fraction, t.split_seed, t.merge_val)?;
            let row = run_table_row(&run.store, &run.pairs, &split, &t.cell, &cfg.seeds)?;
            for (col, reports) in &row {
                for (seed, r) in cfg.seeds.iter().zip(reports) {
                    let _ = writeln!(
                        cells,
                        "{}\t{}\t{seed}\t{:.6}\t{:.6}\t{}",
                        run.source,
                        col.header(),
                        r.accuracy,
                        r.macro_f1,
                        r.config_digest
                    );
                }
                let acc: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
                let a = aggregate(&acc).expect("at least one seed");
                let _ = writeln!(summary, "{}\t{}\t{:.6}\t{:.6}\t{}", run.source, col.header(), a.mean, a.std, a.runs);
                grid.insert((run.source, *col), a.mean);
            }
            println!("{}: {} cells x {} seeds", run.source, row.len(), cfg.seeds.len());
        }
        let stem = match t.layout {
            TableLayout::Table3 => "table3",
            TableLayout::Table4 => "table4",
        };
        let (csv, text) = emit_tables(&grid, t.layout);
        let files: BTreeMap<String, String> = [
            (format!("{stem}.csv"), csv),
            (format!("{stem}.txt"), text),
            (format!("{stem}-cells.tsv"), cells),
            (format!("{stem}-summary.tsv"), summary),
        ]
        .into();
        for (name, body) in files {
            write_atomic(&args.out.join(&name), body.as_bytes())?;
            outputs.push(name);
        }
        print!("{}", fs::read_to_string(args.out.join(format!("{stem}.txt"))).map_err(|e| Error::io(&args.out, e))?);
    }

    let params = serde_json::to_value(&cfg).expect("config serialises");
    let mut m = RunManifest::new(command, cfg.seeds.clone(), None, params);
    m.add_input(&args.grid_config)?;
    for run in &runs {
        for f in run.data_files() {
            m.add_input(&f)?;
        }
    }
    for name in &outputs {
        m.add_output(&args.out, name)?;
    }
    m.write(&args.out.join("manifest-ablate.json"))?;
    Ok(())
}

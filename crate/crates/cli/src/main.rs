//! `antsyn`: the pair-geometry pipeline as file-based stages.
//!
//! ```text
//! antsyn embed    --model glove --vectors-path glove.txt --pairs-dir data/ --out run/glove
//! antsyn project  --in run/glove --method umap --metric euclidean --out fig/glove
//! antsyn classify --in run/glove --split lexical --classifier kmeans --use-umap --out cls/
//! antsyn ablate   --grid-config grid.toml --out ablation/
//! antsyn rerun    --manifest fig/glove/manifest-project.json
//! ```
//!
//! Exit status: 0 success, 1 usage or configuration of the command line,
//! 2 I/O failure, 3 bad or insufficient data (including a missing API key
//! with uncached words, and a `rerun` whose outputs differ).

mod ablate;
mod classify;
mod embed;
mod exit;
mod manifest;
mod project;
mod rundir;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::exit::{CliResult, Failure};
use crate::manifest::{file_digest, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "antsyn", version, about = "Antonym/synonym difference-vector projections and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load pairs and vectors, report coverage, write a run directory.
    Embed(embed::EmbedArgs),
    /// Project a run's pair vectors to the plane and plot them.
    Project(project::ProjectArgs),
    /// Score one classifier cell of the accuracy tables.
    Classify(classify::ClassifyArgs),
    /// Sweep UMAP settings and build the full accuracy tables.
    Ablate(ablate::AblateArgs),
    /// Re-run the command recorded in a manifest and compare output digests.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
struct RerunArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn dispatch(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    match cli.command {
        Command::Embed(a) => embed::run(&a, argv),
        Command::Project(a) => project::run(&a, argv),
        Command::Classify(a) => classify::run(&a, argv),
        Command::Ablate(a) => ablate::run(&a, argv),
        Command::Rerun(a) => rerun(&a.manifest),
    }
}

fn rerun(path: &Path) -> CliResult<()> {
    let before = RunManifest::read(path)?;
    if before.command.first().is_some_and(|c| c == "rerun") {
        return Err(Failure::usage("a manifest cannot record a rerun"));
    }
    let argv: Vec<String> = std::iter::once("antsyn".to_owned()).chain(before.command.iter().cloned()).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| Failure::usage(format!("recorded command no longer parses: {e}")))?;
    dispatch(cli, before.command.clone())?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut changed = Vec::new();
    for (name, digest) in &before.outputs {
        if &file_digest(&dir.join(name))? != digest {
            changed.push(name.as_str());
        }
    }
    if changed.is_empty() {
        println!("all {} outputs reproduced byte for byte", before.outputs.len());
        Ok(())
    } else {
        Err(Failure::data(format!("outputs differ from the manifest: {}", changed.join(", "))))
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli, argv[1..].to_vec()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

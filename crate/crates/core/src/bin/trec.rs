//! Command-line driver: data generation, single EC / TrEC runs, the Monte
//! Carlo comparison and SVG figures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use trec::dataset::Dataset;
use trec::ensemble::build_ensemble;
use trec::eval::ari;
use trec::experiment::{montecarlo, write_outputs, ExperimentConfig, RunSeeds};
use trec::plot;
use trec::seed;
use trec::svm;
use trec::synth;
use trec::transfer::{run_trec, source_training_set, MetaFeatures};

#[derive(Parser, Debug)]
#[command(name = "trec", version, about = "Transfer ensemble clustering")]
struct Cli {
    /// JSON experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo runs.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Meta-features fed to the pair classifier: both, coassoc_only, silhouette_only.
    #[arg(long, global = true)]
    ablation: Option<MetaFeatures>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the synthetic target and source datasets.
    Gen {
        /// Shuffle rows instead of writing them class by class.
        #[arg(long)]
        shuffle: bool,
    },
    /// Ensemble consensus clustering of one dataset.
    RunEc {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        csv: CsvFlags,
    },
    /// Transfer clustering of a target dataset using a labeled source.
    RunTrec {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        csv: CsvFlags,
    },
    /// Repeated EC vs. TrEC comparison on synthetic data.
    Montecarlo,
    /// SVG figures.
    Plot {
        #[command(subcommand)]
        kind: PlotKind,
    },
}

#[derive(Args, Debug)]
struct CsvFlags {
    /// The (target) file's last column holds 1-based class labels; used only for scoring.
    #[arg(long)]
    labels: bool,
    /// Input files start with a header row.
    #[arg(long)]
    header: bool,
}

#[derive(Subcommand, Debug)]
enum PlotKind {
    /// Two-feature projection colored by label.
    Scatter {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        labels: bool,
        #[arg(long)]
        header: bool,
        /// Zero-based feature indices, e.g. 0,1.
        #[arg(long, default_value = "0,1")]
        dims: String,
    },
    /// Decision regions of the pair classifier trained on a labeled source.
    Boundary {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        header: bool,
    },
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = cli.runs {
        cfg.n_runs = n;
    }
    if let Some(a) = cli.ablation {
        cfg.ablation = a;
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn with_pool<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    match cfg.workers {
        Some(w) => Ok(rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build()?.install(f)),
        None => Ok(f()),
    }
}

fn load(path: &Path, labels: bool, header: bool) -> Result<Dataset> {
    Ok(Dataset::load_csv(path, labels, header)?)
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("--dims expects two comma-separated indices, got {s:?}");
    }
    Ok((parts[0].trim().parse()?, parts[1].trim().parse()?))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = config(&cli)?;
    let seeds = RunSeeds::derive(cfg.master_seed, 0);
    match &cli.command {
        Command::Gen { shuffle } => {
            let dir = out_dir(&cfg)?;
            let mut target = synth::sample(&synth::target_model(), seeds.target_data)?;
            let source = synth::sample(&synth::source_model(), seeds.source_data)?;
            if *shuffle || cfg.shuffle {
                let mut rng = seed::rng(seeds.shuffle);
                let order = rand::seq::index::sample(&mut rng, target.n(), target.n()).into_vec();
                target = target.permuted(&order);
            }
            target.save_csv(dir.join("target.csv"))?;
            source.save_csv(dir.join("source.csv"))?;
            println!("wrote {} and {}", dir.join("target.csv").display(), dir.join("source.csv").display());
        }
        Command::RunEc { data, csv } => {
            let dir = out_dir(&cfg)?;
            let ds = load(data, csv.labels, csv.header)?;
            let tc = cfg.trec_config(&seeds);
            let part = with_pool(&cfg, || -> trec::Result<_> {
                let ens = build_ensemble(&ds.unlabeled(), &tc.ensemble_target)?;
                trec::spectral::spectral_consensus(&ens.factor, &tc.spectral)
            })??;
            part.save_csv(dir.join("partition_ec.csv"))?;
            if let Some(truth) = ds.labels() {
                println!("ARI(EC) = {:.4}", ari(truth, part.assign())?.0);
            }
            println!("wrote {}", dir.join("partition_ec.csv").display());
        }
        Command::RunTrec { source, target, csv } => {
            let dir = out_dir(&cfg)?;
            let src = load(source, true, csv.header)?;
            let tgt = load(target, csv.labels, csv.header)?;
            let out = with_pool(&cfg, || run_trec(&src, &tgt.unlabeled(), &cfg.trec_config(&seeds)))??;
            out.partition.save_csv(dir.join("partition_trec.csv"))?;
            out.ec_partition.save_csv(dir.join("partition_ec.csv"))?;
            let report = dir.join("report.json");
            std::fs::write(&report, serde_json::to_string_pretty(&out.report)? + "\n")
                .with_context(|| format!("writing {}", report.display()))?;
            if let Some(truth) = tgt.labels() {
                println!("ARI(EC) = {:.4}", ari(truth, out.ec_partition.assign())?.0);
                println!("ARI(TrEC) = {:.4}", ari(truth, out.partition.assign())?.0);
            }
            println!("wrote {}", dir.join("partition_trec.csv").display());
        }
        Command::Montecarlo => {
            let dir = out_dir(&cfg)?;
            let mc = montecarlo(&cfg)?;
            write_outputs(&mc, &dir)?;
            let s = &mc.summary;
            println!("runs: {} ok, {} failed (ablation: {:?})", s.n_ok, s.n_failed, s.ablation);
            println!("mean ARI  EC   = {:.4} (sd {:.4})", s.mean_ari_ec, s.sd_ari_ec);
            println!("mean ARI  TrEC = {:.4} (sd {:.4})", s.mean_ari_trec, s.sd_ari_trec);
            if let Some(t) = &s.t_test {
                println!("paired t = {:.4}, dof = {}, p = {:.3e}", t.t_stat, t.dof, t.p_value);
            }
            println!("wrote {}", dir.display());
        }
        Command::Plot { kind } => {
            let dir = out_dir(&cfg)?;
            match kind {
                PlotKind::Scatter { data, labels, header, dims } => {
                    let ds = load(data, *labels, *header)?;
                    let path = dir.join("scatter.svg");
                    plot::plot_scatter(&ds, parse_dims(dims)?, &path)?;
                    println!("wrote {}", path.display());
                }
                PlotKind::Boundary { source, header } => {
                    let src = load(source, true, *header)?;
                    let tc = cfg.trec_config(&seeds);
                    let (feats, targets, model) = with_pool(&cfg, || -> trec::Result<_> {
                        let ens = build_ensemble(&src, &tc.ensemble_source)?;
                        let (feats, targets) = source_training_set(&ens, src.labels().unwrap(), tc.meta_features);
                        let model = match svm::train(&feats, &targets, &tc.svm) {
                            Err(trec::Error::DegenerateTraining(c)) => svm::PairClassifier::constant(c),
                            other => other?,
                        };
                        Ok((feats, targets, model))
                    })??;
                    let path = dir.join("boundary.svg");
                    plot::plot_boundary(&model, &feats, &targets, &path)?;
                    let dump = dir.join("model.txt");
                    std::fs::write(&dump, model.to_text()).with_context(|| format!("writing {}", dump.display()))?;
                    println!("wrote {} and {}", path.display(), dump.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

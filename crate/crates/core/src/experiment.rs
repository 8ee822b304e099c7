//! Monte Carlo comparison of plain ensemble consensus against the transfer
//! pipeline on freshly sampled synthetic source/target pairs.
//!
//! Within a run both methods see the same target sample and the same target
//! ensemble (the consensus is the starting point of the projection), so the
//! per-run ARI pairs are suitable for a paired test.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleConfig;
use crate::error::{Error, Result};
use crate::eval::{ari, paired_t_test, PairedTestResult};
use crate::seed::{self, derive_seed};
use crate::spectral::SpectralConfig;
use crate::svm::{KernelConvention, SvmConfig};
use crate::synth;
use crate::transfer::{run_trec, MetaFeatures, ObjectiveScale, StageTimings, TrecConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleParams {
    #[serde(rename = "L")]
    pub l: usize,
    pub subspace_size: usize,
    pub k: usize,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self { l: 10, subspace_size: 3, k: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub sigma: f64,
    pub kernel: KernelConvention,
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 10.0, sigma: 4.0, kernel: KernelConvention::Width, tol: 1e-3 }
    }
}

/// Experiment settings. Every field has a default; the defaults are the
/// reference experiment (40 runs, L = 10, 3-feature subspaces, K = 4,
/// C = 10, σ = 4, Q_min = 5, It_max = 40).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub n_runs: usize,
    pub ensemble: EnsembleParams,
    pub svm: SvmParams,
    pub q_min: f64,
    pub it_max: usize,
    pub q_min_scale: ObjectiveScale,
    pub ablation: MetaFeatures,
    /// Shuffle target rows before clustering.
    pub shuffle: bool,
    /// Fill the `ms_total` CSV column with wall-clock times. Off by default
    /// so that CSV output is reproducible byte for byte.
    pub record_timings: bool,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 2019,
            n_runs: 40,
            ensemble: EnsembleParams::default(),
            svm: SvmParams::default(),
            q_min: 5.0,
            it_max: 40,
            q_min_scale: ObjectiveScale::Norm,
            ablation: MetaFeatures::Both,
            shuffle: false,
            record_timings: false,
            workers: None,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::InvalidArgument("n_runs must be >= 1".into()));
        }
        if self.q_min < 0.0 {
            return Err(Error::InvalidArgument("q_min must be >= 0".into()));
        }
        if self.ensemble.k < 2 {
            return Err(Error::InvalidArgument("k must be >= 2".into()));
        }
        Ok(())
    }

    /// Pipeline configuration for one run.
    pub fn trec_config(&self, seeds: &RunSeeds) -> TrecConfig {
        let ensemble = |seed| EnsembleConfig {
            runs: self.ensemble.l,
            k_per_run: self.ensemble.k,
            subspace_size: self.ensemble.subspace_size,
            seed,
            ..EnsembleConfig::default()
        };
        TrecConfig {
            ensemble_source: ensemble(seeds.ensemble_source),
            ensemble_target: ensemble(seeds.ensemble_target),
            svm: SvmConfig {
                c: self.svm.c,
                sigma: self.svm.sigma,
                kernel: self.svm.kernel,
                tol: self.svm.tol,
                seed: seeds.svm,
                ..SvmConfig::default()
            },
            spectral: SpectralConfig { k_final: self.ensemble.k, seed: seeds.consensus, ..SpectralConfig::default() },
            k_target: self.ensemble.k,
            q_min: self.q_min,
            it_max: self.it_max,
            q_min_scale: self.q_min_scale,
            meta_features: self.ablation,
        }
    }
}

/// Seeds of one run, each `derive_seed(master_seed, run_id, role)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub target_data: u64,
    pub source_data: u64,
    pub ensemble_target: u64,
    pub ensemble_source: u64,
    pub svm: u64,
    pub consensus: u64,
    pub shuffle: u64,
}

impl RunSeeds {
    pub fn derive(master: u64, run_id: usize) -> Self {
        let s = |role| derive_seed(master, run_id as u64, role);
        Self {
            target_data: s("target-data"),
            source_data: s("source-data"),
            ensemble_target: s("ensemble-T"),
            ensemble_source: s("ensemble-S"),
            svm: s("svm"),
            consensus: s("consensus"),
            shuffle: s("shuffle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: usize,
    pub seeds: RunSeeds,
    pub prng: String,
    pub ari_ec: Option<f64>,
    pub ari_trec: Option<f64>,
    pub moves_applied: usize,
    pub stop_reason: Option<String>,
    pub degenerate_training: Option<u8>,
    pub predicted_positive_rate: Option<f64>,
    pub svm_iterations: Option<usize>,
    pub stages: StageTimings,
    pub ms_total: f64,
    pub error: Option<String>,
}

impl RunReport {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_runs: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub ablation: MetaFeatures,
    pub mean_ari_ec: f64,
    pub sd_ari_ec: f64,
    pub mean_ari_trec: f64,
    pub sd_ari_trec: f64,
    /// `paired_t_test(ari_trec, ari_ec)`; absent when fewer than two runs
    /// succeeded or the differences are degenerate.
    pub t_test: Option<PairedTestResult>,
    pub prng: String,
    pub seed_derivation: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct MonteCarlo {
    pub runs: Vec<RunReport>,
    pub summary: Summary,
}

/// Executes one run of the experiment.
pub fn run_once(cfg: &ExperimentConfig, run_id: usize) -> RunReport {
    let seeds = RunSeeds::derive(cfg.master_seed, run_id);
    let clock = Instant::now();
    let mut report = RunReport {
        run_id,
        seeds: seeds.clone(),
        prng: seed::PRNG_ID.to_string(),
        ari_ec: None,
        ari_trec: None,
        moves_applied: 0,
        stop_reason: None,
        degenerate_training: None,
        predicted_positive_rate: None,
        svm_iterations: None,
        stages: StageTimings::default(),
        ms_total: 0.0,
        error: None,
    };
    let result = (|| -> Result<()> {
        let mut target = synth::sample(&synth::target_model(), seeds.target_data)?;
        let source = synth::sample(&synth::source_model(), seeds.source_data)?;
        if cfg.shuffle {
            let mut rng = seed::rng(seeds.shuffle);
            let order = rand::seq::index::sample(&mut rng, target.n(), target.n()).into_vec();
            target = target.permuted(&order);
        }
        let truth = target.labels().expect("synthetic data is labeled").to_vec();
        let out = run_trec(&source, &target.unlabeled(), &cfg.trec_config(&seeds))?;
        report.ari_ec = Some(ari(&truth, out.ec_partition.assign())?.0);
        report.ari_trec = Some(ari(&truth, out.partition.assign())?.0);
        report.degenerate_training = out.report.degenerate_training;
        report.predicted_positive_rate = out.report.predicted_positive_rate;
        report.svm_iterations = out.report.svm.as_ref().map(|s| s.iterations);
        report.stages = out.report.timings;
        if let Some(trace) = &out.report.trace {
            report.moves_applied = trace.moves.len();
            report.stop_reason = Some(trace.stop_reason.as_str().to_string());
        } else {
            report.stop_reason = Some("degenerate_training".to_string());
        }
        Ok(())
    })();
    if let Err(e) = result {
        report.error = Some(e.to_string());
    }
    report.ms_total = clock.elapsed().as_secs_f64() * 1e3;
    report
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, sd)
}

pub fn summarize(cfg: &ExperimentConfig, runs: &[RunReport]) -> Summary {
    let ok: Vec<&RunReport> = runs.iter().filter(|r| r.is_ok()).collect();
    let ec: Vec<f64> = ok.iter().map(|r| r.ari_ec.unwrap()).collect();
    let tr: Vec<f64> = ok.iter().map(|r| r.ari_trec.unwrap()).collect();
    let (mean_ari_ec, sd_ari_ec) = mean_sd(&ec);
    let (mean_ari_trec, sd_ari_trec) = mean_sd(&tr);
    Summary {
        n_runs: runs.len(),
        n_ok: ok.len(),
        n_failed: runs.len() - ok.len(),
        ablation: cfg.ablation,
        mean_ari_ec,
        sd_ari_ec,
        mean_ari_trec,
        sd_ari_trec,
        t_test: paired_t_test(&tr, &ec).ok(),
        prng: seed::PRNG_ID.to_string(),
        seed_derivation: seed::SEED_DERIVATION.to_string(),
        config: cfg.clone(),
    }
}

/// Runs all `cfg.n_runs` runs, concurrently on `cfg.workers` threads, and
/// gathers reports in run order.
pub fn montecarlo(cfg: &ExperimentConfig) -> Result<MonteCarlo> {
    cfg.validate()?;
    let work = || (0..cfg.n_runs).into_par_iter().map(|id| run_once(cfg, id)).collect::<Vec<_>>();
    let runs = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let summary = summarize(cfg, &runs);
    Ok(MonteCarlo { runs, summary })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// Per-run table with columns
/// `run_id,ari_ec,ari_trec,moves_applied,stop_reason,ms_total`.
pub fn runs_csv(runs: &[RunReport], record_timings: bool) -> String {
    let mut out = String::from("run_id,ari_ec,ari_trec,moves_applied,stop_reason,ms_total\n");
    for r in runs {
        let stop = match &r.error {
            Some(e) => format!("error: {}", e.replace([',', '\n'], ";")),
            None => r.stop_reason.clone().unwrap_or_default(),
        };
        let ms = if record_timings { format!("{:.3}", r.ms_total) } else { String::new() };
        writeln!(out, "{},{},{},{},{},{}", r.run_id, fmt_opt(r.ari_ec), fmt_opt(r.ari_trec), r.moves_applied, stop, ms)
            .unwrap();
    }
    out
}

/// Writes `runs.csv`, `summary.json` and `runs.json` (full reports,
/// including wall-clock timings) into `dir`.
pub fn write_outputs(mc: &MonteCarlo, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))
    };
    write("runs.csv", runs_csv(&mc.runs, mc.summary.config.record_timings))?;
    write("summary.json", serde_json::to_string_pretty(&mc.summary).expect("summary serializes") + "\n")?;
    write("runs.json", serde_json::to_string_pretty(&mc.runs).expect("reports serialize") + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_field_names() {
        let cfg: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!((cfg.n_runs, cfg.ensemble.l, cfg.ensemble.subspace_size, cfg.ensemble.k), (40, 10, 3, 4));
        assert_eq!((cfg.svm.c, cfg.svm.sigma, cfg.q_min, cfg.it_max), (10.0, 4.0, 5.0, 40));
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"n_runs": 3, "ensemble": {"L": 5}, "svm": {"C": 2.5}, "ablation": "coassoc_only"}"#,
        )
        .unwrap();
        assert_eq!((cfg.n_runs, cfg.ensemble.l, cfg.ensemble.k, cfg.svm.c), (3, 5, 4, 2.5));
        assert_eq!(cfg.ablation, MetaFeatures::CoassocOnly);
    }

    #[test]
    fn seeds_are_role_specific() {
        let s = RunSeeds::derive(1, 0);
        let all = [s.target_data, s.source_data, s.ensemble_target, s.ensemble_source, s.svm, s.consensus, s.shuffle];
        let unique: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), all.len());
        assert_ne!(RunSeeds::derive(1, 1), s);
    }

    #[test]
    fn csv_marks_failed_runs() {
        let mut r = run_once(&ExperimentConfig { n_runs: 1, ..Default::default() }, 0);
        assert!(r.is_ok());
        r.error = Some("boom, bad".into());
        let csv = runs_csv(&[r], false);
        assert!(csv.lines().nth(1).unwrap().contains("error: boom; bad"));
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = run_once(&ExperimentConfig::default(), 3);
        let back: RunReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}

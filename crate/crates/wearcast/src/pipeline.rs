//! Training and evaluation runs with their on-disk artefacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use wearcast_core::metrics::{evaluate, format_table, MetricReport, Persistence};
use wearcast_core::train::{
    make_samples, make_test_samples, split_dataset, train_from, EpochStats, ExperimentConfig, ImpressionRecord,
    TrainingSample,
};
use wearcast_core::{ModelParams, Variant};

use crate::checkpoint::{save_checkpoint, Checkpoint};
use crate::dataset::fit_records;
use crate::error::{Error, Result};

pub const CHECKPOINT: &str = "checkpoint.wck";
pub const LOSS_CSV: &str = "loss.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TABLE: &str = "report.txt";

/// Minimum displacement, in weeks, of the long-range summary line.
pub const LONG_RANGE_WEEKS: u32 = 10;

pub struct Samples {
    pub train: Vec<TrainingSample>,
    pub test: Vec<TrainingSample>,
}

/// Fits images to the network input, splits by week and pairs them.
pub fn prepare_samples(records: Vec<ImpressionRecord>, config: &ExperimentConfig) -> Result<Samples> {
    if records.is_empty() {
        return Err(wearcast_core::Error::Dataset("the manifest lists no usable impressions".into()).into());
    }
    let n = &config.network;
    let records = fit_records(records, n.input_width, n.input_height)?;
    let variant = config.variant();
    let (train, test) = split_dataset(&records, variant, config.train_fraction)?;
    Ok(Samples {
        train: make_samples(&train, variant)?,
        test: make_test_samples(&train, &test, variant)?,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Trains from scratch, or from `resume`, writing `checkpoint.wck` every
/// `checkpoint_every` epochs and at the end, and `loss.csv` (`epoch,
/// mean_loss`). `on_epoch` sees every epoch.
pub fn run_training(
    config: &ExperimentConfig,
    samples: &[TrainingSample],
    out: &Path,
    resume: Option<Checkpoint>,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<Checkpoint> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let ck_path = out.join(CHECKPOINT);
    let loss_path = out.join(LOSS_CSV);
    let (params, done) = match resume {
        Some(ck) => (ck.params, ck.epochs_completed),
        None => (ModelParams::build(config.network, config.seed)?, 0),
    };
    if done >= config.epochs {
        return Err(Error::Usage(format!(
            "checkpoint has already completed {done} of {} epochs",
            config.epochs
        )));
    }

    let mut csv = if done == 0 {
        String::from("epoch,mean_loss\n")
    } else {
        // Keep the rows of the epochs the checkpoint already covers.
        let old = fs::read_to_string(&loss_path).unwrap_or_else(|_| String::from("epoch,mean_loss\n"));
        old.lines()
            .filter(|l| l.split(',').next().and_then(|e| e.parse::<usize>().ok()).is_none_or(|e| e <= done))
            .map(|l| format!("{l}\n"))
            .collect()
    };
    let outcome = train_from::<Error>(params, done, config, samples, |stats, params| {
        csv.push_str(&format!("{},{}\n", stats.epoch, stats.mean_loss));
        on_epoch(stats);
        if stats.checkpoint_due && stats.epoch < config.epochs {
            let ck = Checkpoint {
                params: params.clone(),
                config: *config,
                epochs_completed: stats.epoch,
            };
            save_checkpoint(&ck_path, &ck)?;
            write_file(&loss_path, csv.as_bytes())?;
        }
        Ok(())
    })?;
    let ck = Checkpoint {
        params: outcome.params,
        config: *config,
        epochs_completed: config.epochs,
    };
    save_checkpoint(&ck_path, &ck)?;
    write_file(&loss_path, csv.as_bytes())?;
    Ok(ck)
}

pub struct Evaluation {
    pub model: MetricReport,
    pub persistence: MetricReport,
}

impl Evaluation {
    pub fn table(&self) -> String {
        let mut out = format_table(&[self.model.clone(), self.persistence.clone()]);
        let (m, p) = (
            self.model.ssim_for_gap(LONG_RANGE_WEEKS),
            self.persistence.ssim_for_gap(LONG_RANGE_WEEKS),
        );
        if let (Some(m), Some(p)) = (m, p) {
            out.push_str(&format!(
                "\nSSIM, pairs at least {LONG_RANGE_WEEKS} weeks apart ({}): {} {:.4}, {} {:.4}\n",
                m.count, self.model.label, m.mean, self.persistence.label, p.mean
            ));
        }
        out
    }

    pub fn csv(&self) -> String {
        let model = self.model.to_csv();
        let persistence = self.persistence.to_csv();
        let rows = persistence.split_once('\n').map_or("", |(_, rows)| rows);
        model + rows
    }
}

pub fn run_evaluation(params: &ModelParams<f32>, test: &[TrainingSample]) -> Result<Evaluation> {
    let variant: Variant = params.config().variant;
    Ok(Evaluation {
        model: evaluate(params, test, variant.as_str())?,
        persistence: evaluate(&Persistence(variant), test, "persistence")?,
    })
}

/// Writes `report.csv` and `report.txt` into `out`.
pub fn write_reports(eval: &Evaluation, out: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let (csv, txt) = (out.join(REPORT_CSV), out.join(REPORT_TABLE));
    write_file(&csv, eval.csv().as_bytes())?;
    let mut f = fs::File::create(&txt).map_err(|e| Error::io(&txt, e))?;
    f.write_all(eval.table().as_bytes()).map_err(|e| Error::io(&txt, e))?;
    Ok((csv, txt))
}

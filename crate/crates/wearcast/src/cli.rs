//! The `sole` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use wearcast_core::gradcheck::{layer_suite, network_check, tiny_config};
use wearcast_core::synth::LAST_WEEK;
use wearcast_core::{DeltaEncoding, Variant};

use crate::checkpoint::{load_checkpoint, load_for};
use crate::config::RunConfig;
use crate::dataset::{self, denoise_dataset, emit_dataset, enlarge, fit_image};
use crate::error::{exit, Error, Result};
use crate::manifest::load_records;
use crate::pgm::{read_pgm, write_pgm};
use crate::pipeline::{prepare_samples, run_evaluation, run_training, write_reports};

/// Temporal outsole-wear modelling: synthetic data, denoising, training,
/// prediction and evaluation.
#[derive(Debug, Parser)]
#[command(name = "sole", version)]
pub struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for generation, initialization and shuffling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic series: clean and noisy PGMs plus manifest.jsonl.
    Generate(GenerateArgs),
    /// Denoise the noisy entries of a manifest.
    Denoise(DenoiseArgs),
    /// Train the forward or backward model.
    Train(TrainArgs),
    /// Predict the impression `--delta` weeks later.
    Predict(PredictArgs),
    /// Reconstruct the impression at `--week`.
    Reconstruct(ReconstructArgs),
    /// Score a checkpoint on the held-out weeks of a manifest.
    Evaluate(EvaluateArgs),
    /// Finite-difference check of every backward pass.
    Gradcheck,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Integer reduction of the 640×256 render.
    #[arg(long)]
    pub downsample: Option<usize>,
    /// Scale of the artefact counts (0 for noise-free copies).
    #[arg(long)]
    pub noise_intensity: Option<f64>,
    /// Number of tread blocks.
    #[arg(long)]
    pub block_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Input manifest (or the directory holding manifest.jsonl).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for denoised/ and the new manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Integer reduction applied after denoising.
    #[arg(long, default_value_t = 1)]
    pub downsample: usize,
    /// Align each impression to the first week of its side.
    #[arg(long)]
    pub register: bool,
    /// Largest registration shift in pixels.
    #[arg(long)]
    pub max_shift: Option<usize>,
    /// Side of the local-mean window (odd).
    #[arg(long)]
    pub window: Option<usize>,
    /// Margin below the background level that marks noise.
    #[arg(long)]
    pub offset: Option<f64>,
    /// Smallest noise component kept.
    #[arg(long)]
    pub min_area: Option<usize>,
    /// Dilation radius of the noise map.
    #[arg(long)]
    pub dilation: Option<usize>,
    /// Side of the averaging kernel (odd).
    #[arg(long)]
    pub kernel: Option<usize>,
    /// `dark` or `bright` debris.
    #[arg(long)]
    pub polarity: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Manifest (or directory); entries with denoised: true are used.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for checkpoint.wck and loss.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// `forward` or `backward`.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Samples per step; 0 for full batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Share of weeks used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Checkpoint cadence in epochs (0: only at the end).
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    #[arg(long)]
    pub input_height: Option<usize>,
    #[arg(long)]
    pub input_width: Option<usize>,
    /// Channels of the first encoder layer; later layers double.
    #[arg(long)]
    pub base_channels: Option<usize>,
    /// Continue from this checkpoint up to --epochs.
    #[arg(long, value_name = "CHECKPOINT")]
    pub resume: Option<PathBuf>,
    /// Print every n-th epoch.
    #[arg(long, default_value_t = 10)]
    pub log_every: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Input PGM.
    #[arg(long)]
    pub image: PathBuf,
    /// Displacement in weeks (even).
    #[arg(long)]
    pub delta: u32,
    /// Week of the input, to flag targets past the last recorded week.
    #[arg(long)]
    pub input_week: Option<u32>,
    /// Output PGM.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Input PGM.
    #[arg(long)]
    pub image: PathBuf,
    /// Target week (even, 0–52).
    #[arg(long)]
    pub week: u32,
    /// Output PGM.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Manifest (or directory); entries with denoised: true are used.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for report.csv and report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    match &cli.command {
        Command::Generate(a) => {
            set(&mut c.generate.downsample, a.downsample);
            set(&mut c.generate.noise_intensity, a.noise_intensity);
            set(&mut c.generate.block_count, a.block_count);
        }
        Command::Denoise(a) => {
            let d = &mut c.denoise;
            d.register |= a.register;
            set(&mut d.max_shift, a.max_shift);
            set(&mut d.window, a.window);
            set(&mut d.offset, a.offset);
            set(&mut d.min_area, a.min_area);
            set(&mut d.dilation_radius, a.dilation);
            set(&mut d.kernel, a.kernel);
            set(&mut d.polarity, a.polarity.clone());
        }
        Command::Train(a) => {
            let t = &mut c.train;
            set(&mut t.variant, a.variant.clone());
            set(&mut t.epochs, a.epochs);
            set(&mut t.learning_rate, a.lr);
            set(&mut t.batch_size, a.batch_size);
            set(&mut t.train_fraction, a.train_fraction);
            set(&mut t.checkpoint_every, a.checkpoint_every);
            set(&mut t.input_height, a.input_height);
            set(&mut t.input_width, a.input_width);
            set(&mut t.base_channels, a.base_channels);
        }
        _ => {}
    }
    Ok(c)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = resolve_config(cli)?;
    let _ = writeln!(err, "# resolved configuration\n{}", config.to_toml());
    match &cli.command {
        Command::Generate(a) => {
            if config.generate.downsample == 0 {
                return Err(Error::Usage("--downsample must be positive".into()));
            }
            let entries = emit_dataset(
                &config.outsole_spec(),
                &config.noise_spec(),
                config.generate.downsample,
                &a.out,
            )?;
            let _ = writeln!(out, "wrote {} images and {}", entries.len(), a.out.join(dataset::MANIFEST).display());
        }
        Command::Denoise(a) => {
            let params = config.denoise_params()?;
            let register = config.denoise.register.then_some(config.denoise.max_shift);
            let (entries, s) = denoise_dataset(&dataset::manifest_path(&a.manifest), &a.out, &params, register, a.downsample)?;
            let _ = writeln!(
                out,
                "denoised {} images: mean noise coverage {:.4}, {} pixels repaired, {} left unrepaired",
                entries.len(),
                s.mean_coverage,
                s.repaired,
                s.unrepaired
            );
            for (file, dx, dy) in s.shifts.iter().filter(|s| (s.1, s.2) != (0, 0)) {
                let _ = writeln!(out, "registered {file} by ({dx}, {dy})");
            }
        }
        Command::Train(a) => {
            let mut experiment = config.experiment()?;
            let resume = match &a.resume {
                Some(path) => {
                    let ck = load_checkpoint(path)?;
                    // Architecture and seed come from the checkpoint.
                    experiment.network = ck.config.network;
                    experiment.seed = ck.config.seed;
                    Some(ck)
                }
                None => None,
            };
            let records = load_records(dataset::manifest_path(&a.manifest), |e| e.denoised)?;
            let samples = prepare_samples(records, &experiment)?;
            let _ = writeln!(
                out,
                "{} model: {} training pairs, {} held-out pairs, {} parameters",
                experiment.variant(),
                samples.train.len(),
                samples.test.len(),
                wearcast_core::ModelParams::<f32>::shapes(&experiment.network)?
                    .iter()
                    .map(|s| s.iter().product::<usize>())
                    .sum::<usize>()
            );
            let every = a.log_every.max(1);
            let ck = run_training(&experiment, &samples.train, &a.out, resume, |s| {
                if s.epoch % every == 0 || s.epoch == experiment.epochs {
                    let _ = writeln!(out, "epoch {:>6}  loss {:.6}  pixel mse {:.6}", s.epoch, s.mean_loss, s.mean_pixel_mse);
                }
            })?;
            let _ = writeln!(out, "checkpoint after {} epochs in {}", ck.epochs_completed, a.out.display());
        }
        Command::Predict(a) => {
            let delta = DeltaEncoding::scalar(a.delta)?;
            let ck = load_for(&a.checkpoint, Variant::Forward)?;
            if let Some(week) = a.input_week {
                if week + a.delta > LAST_WEEK {
                    let _ = writeln!(
                        err,
                        "warning: target week {} lies beyond week {LAST_WEEK}; the prediction cannot be checked against data",
                        week + a.delta
                    );
                }
            }
            infer(&ck.params, &a.image, &delta, &a.out)?;
            let _ = writeln!(out, "wrote {}", a.out.display());
        }
        Command::Reconstruct(a) => {
            let delta = DeltaEncoding::one_hot_week(a.week)?;
            let ck = load_for(&a.checkpoint, Variant::Backward)?;
            infer(&ck.params, &a.image, &delta, &a.out)?;
            let _ = writeln!(out, "wrote {}", a.out.display());
        }
        Command::Evaluate(a) => {
            let ck = load_checkpoint(&a.checkpoint)?;
            let records = load_records(dataset::manifest_path(&a.manifest), |e| e.denoised)?;
            let samples = prepare_samples(records, &ck.config)?;
            let eval = run_evaluation(&ck.params, &samples.test)?;
            let _ = write!(out, "{}", eval.table());
            if let Some(dir) = &a.out {
                let (csv, txt) = write_reports(&eval, dir)?;
                let _ = writeln!(out, "wrote {} and {}", csv.display(), txt.display());
            }
        }
        Command::Gradcheck => return gradcheck(config.seed, out),
    }
    Ok(exit::OK)
}

fn infer(params: &wearcast_core::ModelParams<f32>, input: &Path, delta: &DeltaEncoding, output: &Path) -> Result<()> {
    let img = read_pgm(input)?;
    let n = params.config();
    let x = fit_image(&img, n.input_width, n.input_height)?;
    let y = params.forward(&x, delta)?.quantized();
    write_pgm(output, &enlarge(&y, img.width(), img.height()))
}

fn gradcheck(seed: u64, out: &mut dyn Write) -> Result<i32> {
    let mut checks = layer_suite(seed)?;
    for variant in [Variant::Forward, Variant::Backward] {
        checks.push(network_check(tiny_config(variant), seed)?);
    }
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for c in &checks {
        let verdict = if c.passed() { "pass" } else { "FAIL" };
        failed += usize::from(!c.passed());
        let _ = writeln!(
            out,
            "{:<width$}  max rel err {:.3e}  tol {:.0e}  checked {:>5}  skipped {:>3}  {verdict}",
            c.name, c.max_relative_error, c.tolerance, c.checked, c.skipped
        );
    }
    Ok(if failed == 0 { exit::OK } else { exit::OTHER })
}

//! `lanepost` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lanepost::pipeline::{self, Mode, PipelineConfig, RunOptions};
use lanepost::synth::{render_scenario, write_dataset, RenderedClip, ScenarioSpec};
use lanepost::Error;

#[derive(Parser)]
#[command(
    name = "lanepost",
    version,
    about = "Active-lane post-processing for lane-detection probability maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over a manifest and write per-frame lane files.
    Run(RunArgs),
    /// Run the row-maximum cubic-spline decoder over a manifest.
    Baseline(RunArgs),
    /// Score a directory of lane files against the manifest's ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic probability-map dataset with ground truth.
    Synth(SynthArgs),
    /// Time per-frame processing on preloaded frames.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set tracker.max_miss=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Disable preceding-frame tracking.
    #[arg(long)]
    no_pft: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Roneld,
    Baseline,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Also write PNG overlays of the detected lanes.
    #[arg(long)]
    overlay: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory of lane files written by `run`.
    #[arg(long)]
    pred: PathBuf,
    /// Directory for eval.json and eval.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Clean,
    Degraded,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "clean")]
    scenario: Scenario,
    /// TOML scenario description; replaces `--scenario`.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of clips; clip `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    clips: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Frames to time; without it, a degraded synthetic clip is generated.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

impl ConfigArgs {
    fn load(&self, forced_mode: Option<Mode>) -> Result<PipelineConfig, Error> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut cfg = PipelineConfig::from_toml_with_overrides(&text, &self.overrides)?;
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Roneld => Mode::Roneld,
                ModeArg::Baseline => Mode::Baseline,
            };
        }
        if let Some(m) = forced_mode {
            cfg.mode = m;
        }
        if self.no_pft {
            cfg.tracker.pft_enabled = false;
        }
        Ok(cfg)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(args: &RunArgs, forced_mode: Option<Mode>) -> Result<(), Error> {
    let cfg = args.config.load(forced_mode)?;
    let summary = pipeline::run_dataset::<f64>(
        &args.manifest,
        &cfg,
        &args.out,
        &RunOptions {
            overlay: args.overlay,
        },
    )?;
    println!(
        "{} frames in {} clips, mean {:.3} ms/frame (p50 {:.3}, p99 {:.3})",
        summary.frames,
        summary.clips,
        summary.timing.mean_ms,
        summary.timing.p50_ms,
        summary.timing.p99_ms
    );
    if let Some(report) = &summary.eval {
        print!("{}", report.to_text());
    }
    println!("lane files in {}", args.out.join("lanes").display());
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<(), Error> {
    let cfg = args.config.load(None)?;
    let report = pipeline::evaluate_dir(&args.manifest, &args.pred, &cfg.eval)?;
    print!("{}", report.to_text());
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).map_err(|e| Error::Io {
            path: out.clone(),
            source: e,
        })?;
        pipeline::write_report(&report, out)?;
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), Error> {
    let (spec, name) = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            let spec: ScenarioSpec =
                toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            (spec, "custom")
        }
        None => match args.scenario {
            Scenario::Clean => (ScenarioSpec::clean(), "clean"),
            Scenario::Degraded => (ScenarioSpec::degraded(), "degraded"),
        },
    };
    let mut clips = Vec::with_capacity(args.clips);
    for i in 0..args.clips.max(1) {
        let mut spec = spec.clone();
        spec.first_frame_id += (i * spec.frames) as u64;
        let (frames, ground_truth) = render_scenario(&spec, args.seed + i as u64)?;
        clips.push(RenderedClip {
            name: format!("{name}-{i:02}"),
            frames,
            ground_truth,
        });
    }
    let manifest = write_dataset(&clips, &args.out)?;
    write_file(
        &args.out.join("scenario.toml"),
        &toml::to_string(&spec).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    println!("{}", manifest.display());
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<(), Error> {
    let cfg = args.config.load(None)?;
    let report = match &args.manifest {
        Some(m) => pipeline::bench::<f64>(m, &cfg, args.repeats)?,
        None => {
            let (frames, _) = render_scenario(&ScenarioSpec::degraded(), args.seed)?;
            pipeline::bench_frames::<f64>(&[frames], &cfg, args.repeats)?
        }
    };
    let t = &report.timing;
    println!(
        "{} frames x {} repeats: mean {:.3} ms, variance {:.6} ms^2, p50 {:.3} ms, p99 {:.3} ms",
        t.frames / report.repeats,
        report.repeats,
        t.mean_ms,
        t.variance_ms2,
        t.p50_ms,
        t.p99_ms
    );
    if let Some(out) = &args.out {
        write_file(
            out,
            &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"),
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a, None),
        Command::Baseline(a) => run(a, Some(Mode::Baseline)),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

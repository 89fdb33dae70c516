//! `kinsync` command-line interface.
//!
//! Every command writes only to paths given explicitly with `--out`, refuses
//! to overwrite an input, and removes whatever it already wrote if a later
//! step fails.

use std::collections::{HashMap, HashSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analyze::{emit_fit_report, fit_points, polyfit3, score_pairs, PairOptions};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::kinio::{load_kinematics, load_meta, ChannelSelection, MetaFields};
use crate::series::TrialRecord;
use crate::sync::{multi_schedules, pairwise_schedules_with, read_schedule, render, write_schedule, Encoder, FrameSchedule};

#[derive(Debug, Parser)]
#[command(name = "kinsync", version, about = "Synchronize surgical task videos by aligning their kinematics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align two trials with DTW and write one schedule per trial.
    AlignPair(AlignArgs),
    /// Align two or more trials to their DBA average and write one schedule per trial.
    AlignMulti(AlignArgs),
    /// Apply a schedule file to a video.
    Render(RenderArgs),
    /// Relate DTW cost to score differences and fit a cubic trend.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Key-value run configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated 0-based kinematic columns.
    #[arg(long)]
    pub channels: Option<String>,
    /// Sampling rate of the kinematics (and fps of the schedules).
    #[arg(long)]
    pub fps: Option<f64>,
    /// Maximum DBA iterations.
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Stop DBA when the relative cost decrease falls below this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Z-normalize every channel before aligning.
    #[arg(long)]
    pub normalize: bool,
    /// Path of the ffmpeg-compatible encoder.
    #[arg(long)]
    pub encoder: Option<PathBuf>,
    /// Sakoe-Chiba band half-width.
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Kinematic files, one per trial. The file stem is the trial id.
    #[arg(long, required = true)]
    pub kin: Vec<PathBuf>,
    /// Videos, one per --kin, in the same order. Required with --render.
    #[arg(long)]
    pub video: Vec<PathBuf>,
    /// Output directory for `<id>.schedule` (and `<id>.synced.mp4`).
    #[arg(long)]
    pub out: PathBuf,
    /// Render synchronized videos after writing the schedules.
    #[arg(long)]
    pub render: bool,
    /// Show duplicated (held) frames in grayscale.
    #[arg(long = "grayscale-held")]
    pub grayscale_held: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Schedule file written by align-pair or align-multi.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Source video of the scheduled trial.
    #[arg(long)]
    pub video: PathBuf,
    /// Output video file.
    #[arg(long)]
    pub out: PathBuf,
    /// Show duplicated (held) frames in grayscale.
    #[arg(long = "grayscale-held")]
    pub grayscale_held: bool,
    /// Path of the ffmpeg-compatible encoder.
    #[arg(long)]
    pub encoder: Option<PathBuf>,
    /// Key-value run configuration file (only `encoder` is used).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Kinematic files, or directories whose `*.txt` files are all loaded.
    #[arg(long, required = true)]
    pub kin: Vec<PathBuf>,
    /// Meta file with trial id, skill letter and score per line.
    #[arg(long)]
    pub meta: PathBuf,
    /// Meta field positions as `id,skill,score` (0-based).
    #[arg(long = "meta-fields")]
    pub meta_fields: Option<String>,
    /// Report file.
    #[arg(long)]
    pub out: PathBuf,
    /// Pair trials across tasks too.
    #[arg(long = "cross-task")]
    pub cross_task: bool,
    /// Divide DTW costs by the summed series lengths.
    #[arg(long = "length-normalize")]
    pub length_normalize: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &self.channels {
            cfg.channels = ChannelSelection::parse(c)?;
        }
        if let Some(v) = self.fps {
            cfg.sample_rate_hz = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.tol {
            cfg.rel_tolerance = v;
        }
        if self.normalize {
            cfg.normalize = true;
        }
        if let Some(e) = &self.encoder {
            cfg.encoder = e.clone();
        }
        if self.window.is_some() {
            cfg.window = self.window;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Files written so far; deleted on drop unless committed.
struct Outputs {
    written: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn new() -> Self {
        Self {
            written: Vec::new(),
            committed: false,
        }
    }

    fn track(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn guard_output(out: &Path, inputs: &[&Path]) -> Result<()> {
    if let Some(input) = inputs.iter().find(|i| same_file(out, i)) {
        return Err(Error::Usage(format!(
            "output {} would overwrite input {}",
            out.display(),
            input.display()
        )));
    }
    Ok(())
}

fn trial_id(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .ok_or_else(|| Error::Usage(format!("cannot derive a trial id from {}", path.display())))
}

fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "txt"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn load_trials(paths: &[PathBuf], cfg: &RunConfig) -> Result<Vec<TrialRecord>> {
    let mut seen = HashSet::new();
    let mut trials = Vec::with_capacity(paths.len());
    for p in paths {
        let id = trial_id(p)?;
        if !seen.insert(id.clone()) {
            return Err(Error::Usage(format!("trial id `{id}` appears more than once")));
        }
        let mut series = load_kinematics(p, &cfg.channels, cfg.sample_rate_hz)?;
        if cfg.normalize {
            series = series.z_normalized();
        }
        trials.push(TrialRecord::new(id, series)?);
    }
    Ok(trials)
}

fn align(args: &AlignArgs, multi: bool) -> Result<()> {
    let cfg = args.common.resolve()?;
    let n = args.kin.len();
    if !multi && n != 2 {
        return Err(Error::Usage(format!("align-pair needs exactly 2 --kin files, got {n}")));
    }
    if multi && n < 2 {
        return Err(Error::Usage(format!("align-multi needs at least 2 --kin files, got {n}")));
    }
    if args.render && args.video.len() != n {
        return Err(Error::Usage(format!(
            "--render needs one --video per --kin ({} videos for {n} trials)",
            args.video.len()
        )));
    }

    let mut trials = load_trials(&args.kin, &cfg)?;
    for (t, v) in trials.iter_mut().zip(&args.video) {
        t.video_path = Some(v.clone());
    }

    let schedules: Vec<FrameSchedule> = if multi {
        let (s, result) = multi_schedules(&trials, &cfg.dba_params())?;
        log::info!(
            "average length {}, total cost {}, {} iterations",
            result.average.series.len(),
            result.average.total_cost,
            result.average.iterations_run
        );
        s
    } else {
        let (a, b) = pairwise_schedules_with(&trials[0], &trials[1], &cfg.dtw_options())?;
        vec![a, b]
    };

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let inputs: Vec<&Path> = args.kin.iter().chain(&args.video).map(PathBuf::as_path).collect();
    let mut outputs = Outputs::new();
    for s in &schedules {
        let path = args.out.join(format!("{}.schedule", s.trial_id()));
        guard_output(&path, &inputs)?;
        outputs.track(path.clone());
        write_schedule(s, &path)?;
    }
    if args.render {
        let encoder = Encoder::new(&cfg.encoder);
        for (s, t) in schedules.iter().zip(&trials) {
            let video = t.video_path.as_ref().expect("checked above");
            let path = args.out.join(format!("{}.synced.mp4", s.trial_id()));
            guard_output(&path, &inputs)?;
            outputs.track(path.clone());
            render(s, video, &path, args.grayscale_held, &encoder)?;
        }
    }
    outputs.commit();
    Ok(())
}

fn render_cmd(args: &RenderArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(e) = &args.encoder {
        cfg.encoder = e.clone();
    }
    guard_output(&args.out, &[&args.schedule, &args.video])?;
    let schedule = read_schedule(&args.schedule)?;
    let mut outputs = Outputs::new();
    outputs.track(args.out.clone());
    render(&schedule, &args.video, &args.out, args.grayscale_held, &Encoder::new(&cfg.encoder))?;
    outputs.commit();
    Ok(())
}

fn parse_meta_fields(text: &str) -> Result<MetaFields> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Usage(format!("bad --meta-fields `{text}`"))))
        .collect::<Result<_>>()?;
    match parts[..] {
        [id, skill, score] => Ok(MetaFields { id, skill, score }),
        _ => Err(Error::Usage(format!("--meta-fields needs id,skill,score, got `{text}`"))),
    }
}

fn analyze_cmd(args: &AnalyzeArgs) -> Result<()> {
    let mut cfg = args.common.resolve()?;
    if let Some(f) = &args.meta_fields {
        cfg.meta_fields = parse_meta_fields(f)?;
    }
    cfg.cross_task |= args.cross_task;
    cfg.length_normalize |= args.length_normalize;

    let files: Vec<PathBuf> = expand_inputs(&args.kin)?
        .into_iter()
        .filter(|f| !same_file(f, &args.meta))
        .collect();
    let mut inputs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    inputs.push(&args.meta);
    guard_output(&args.out, &inputs)?;

    let meta: HashMap<String, _> = load_meta(&args.meta, cfg.meta_fields)?
        .into_iter()
        .map(|r| (r.id.clone(), r))
        .collect();
    let trials: Vec<TrialRecord> = load_trials(&files, &cfg)?
        .into_iter()
        .map(|t| match meta.get(&t.id) {
            Some(r) => t.with_score(r.skill, Some(r.osats_score)),
            None => t,
        })
        .collect();

    let opts = PairOptions {
        cross_task: cfg.cross_task,
        length_normalize: cfg.length_normalize,
        dtw: cfg.dtw_options(),
    };
    let pairs = score_pairs(&trials, &opts)?;
    let fit = polyfit3(&fit_points(&pairs))?;
    let mut outputs = Outputs::new();
    outputs.track(args.out.clone());
    emit_fit_report(&pairs, &fit, &args.out)?;
    outputs.commit();
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::AlignPair(a) => align(a, false),
        Command::AlignMulti(a) => align(a, true),
        Command::Render(r) => render_cmd(r),
        Command::Analyze(a) => analyze_cmd(a),
    }
}

/// Parse `args` (including the program name) and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("kinsync: error: {e}");
            match e {
                Error::Usage(_) => 2,
                _ => 1,
            }
        }
    }
}

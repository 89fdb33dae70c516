//! Frame schedules: which source video frame to show at every output frame.
//!
//! Schedule files are line-oriented text:
//!
//! ```text
//! trial_id=Suturing_B001
//! fps=30
//! 0,0,0
//! 1,1,0
//! 2,1,1
//! ```
//!
//! Two header lines are followed by one `output,source,dup` triple per output
//! frame, with `dup` written as `0` or `1`. Every line ends with `\n`. The
//! fps value is written in Rust's shortest round-trip float notation, so
//! reading and re-writing a schedule reproduces the file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::dba::DbaParams;
use crate::dtw::{dtw_with, DtwOptions, WarpingPath};
use crate::error::{Error, Result};
use crate::nlts::{nlts, DilationMap, NltsResult};
use crate::series::TrialRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub output_frame: usize,
    pub source_frame: usize,
    pub duplicated: bool,
}

/// Per-output-frame source indices for one trial's video.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSchedule {
    trial_id: String,
    fps: f64,
    entries: Vec<ScheduleEntry>,
}

impl FrameSchedule {
    /// Build a schedule from the source frame shown at each output frame.
    pub fn from_sources(trial_id: impl Into<String>, fps: f64, sources: &[usize]) -> Result<Self> {
        let entries = sources
            .iter()
            .enumerate()
            .map(|(k, &s)| ScheduleEntry {
                output_frame: k,
                source_frame: s,
                duplicated: k > 0 && sources[k - 1] == s,
            })
            .collect();
        Self::new(trial_id, fps, entries)
    }

    /// Build a schedule from explicit entries, checking every invariant.
    pub fn new(trial_id: impl Into<String>, fps: f64, entries: Vec<ScheduleEntry>) -> Result<Self> {
        let trial_id = trial_id.into();
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        if trial_id.is_empty() || trial_id.contains(['\n', '\r']) {
            return bad(format!("trial id {trial_id:?} must be non-empty and on one line"));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return bad(format!("fps must be positive, got {fps}"));
        }
        if entries.is_empty() {
            return bad("schedule has no entries".into());
        }
        if entries[0].source_frame != 0 {
            return bad(format!("first source frame is {}, expected 0", entries[0].source_frame));
        }
        for (k, e) in entries.iter().enumerate() {
            if e.output_frame != k {
                return bad(format!("entry {k} has output frame {}", e.output_frame));
            }
            let repeat = k > 0 && entries[k - 1].source_frame == e.source_frame;
            if k > 0 && e.source_frame < entries[k - 1].source_frame {
                return bad(format!("source frame decreases at output frame {k}"));
            }
            if e.duplicated != repeat {
                return bad(format!("duplicate flag at output frame {k} is {}, expected {repeat}", e.duplicated));
            }
        }
        Ok(Self {
            trial_id,
            fps,
            entries,
        })
    }

    pub fn trial_id(&self) -> &str {
        &self.trial_id
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.source_frame)
    }

    /// Highest source frame referenced; the video needs at least this many plus one frames.
    pub fn max_source(&self) -> usize {
        self.entries.last().map(|e| e.source_frame).unwrap_or(0)
    }

    pub fn duplicated_count(&self) -> usize {
        self.entries.iter().filter(|e| e.duplicated).count()
    }

    pub fn from_dilation(trial_id: impl Into<String>, fps: f64, map: &DilationMap) -> Result<Self> {
        Self::from_sources(trial_id, fps, map.source_index())
    }

    /// Serialize to the schedule text format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 + self.entries.len() * 12);
        let _ = writeln!(out, "trial_id={}", self.trial_id);
        let _ = writeln!(out, "fps={}", self.fps);
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{}", e.output_frame, e.source_frame, u8::from(e.duplicated));
        }
        out
    }

    /// Parse the schedule text format. `origin` only appears in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |key: &str| -> Result<String> {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| Error::parse(origin, 0, format!("missing `{key}=` header")))?;
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| Error::parse(origin, lineno, format!("expected `{key}=<value>`")))
        };
        let trial_id = header("trial_id")?;
        let fps_text = header("fps")?;
        let fps: f64 = fps_text
            .parse()
            .map_err(|_| Error::parse(origin, 2, format!("fps `{fps_text}` is not a number")))?;

        let mut entries = Vec::new();
        for (lineno, line) in lines {
            if line.is_empty() {
                return Err(Error::parse(origin, lineno, "empty line"));
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::parse(origin, lineno, format!("expected 3 fields, found {}", fields.len())));
            }
            let int = |s: &str, name: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(origin, lineno, format!("{name} `{s}` is not a non-negative integer")))
            };
            let output_frame = int(fields[0], "output frame")?;
            let source_frame = int(fields[1], "source frame")?;
            let duplicated = match fields[2] {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(origin, lineno, format!("dup flag `{other}` must be 0 or 1"))),
            };
            if output_frame != entries.len() {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("output frame {output_frame}, expected {}", entries.len()),
                ));
            }
            entries.push(ScheduleEntry {
                output_frame,
                source_frame,
                duplicated,
            });
        }
        Self::new(trial_id, fps, entries).map_err(|e| Error::parse(origin, 0, e.to_string()))
    }
}

pub fn write_schedule(schedule: &FrameSchedule, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, schedule.to_text()).map_err(|e| Error::io(path, e))
}

pub fn read_schedule(path: impl AsRef<Path>) -> Result<FrameSchedule> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FrameSchedule::parse(&text, path)
}

fn schedules_from_path(a: &TrialRecord, b: &TrialRecord, path: &WarpingPath) -> Result<(FrameSchedule, FrameSchedule)> {
    let (sa, sb): (Vec<usize>, Vec<usize>) = path.steps().iter().copied().unzip();
    Ok((
        FrameSchedule::from_sources(a.id.clone(), a.series.sample_rate_hz(), &sa)?,
        FrameSchedule::from_sources(b.id.clone(), b.series.sample_rate_hz(), &sb)?,
    ))
}

/// Synchronize two trials along their optimal warping path. Both schedules
/// have the path's length; every frame of both videos appears at least once.
pub fn pairwise_schedules(a: &TrialRecord, b: &TrialRecord) -> Result<(FrameSchedule, FrameSchedule)> {
    pairwise_schedules_with(a, b, &DtwOptions::default())
}

pub fn pairwise_schedules_with(
    a: &TrialRecord,
    b: &TrialRecord,
    opts: &DtwOptions,
) -> Result<(FrameSchedule, FrameSchedule)> {
    let path = dtw_with(&a.series, &b.series, opts)?;
    schedules_from_path(a, b, &path)
}

/// Synchronize several trials by dilating each to the length of their DBA
/// average. Also returns the underlying averaging result.
pub fn multi_schedules(trials: &[TrialRecord], params: &DbaParams) -> Result<(Vec<FrameSchedule>, NltsResult)> {
    if trials.len() < 2 {
        return Err(Error::Usage(format!(
            "multiple alignment needs at least 2 trials, got {}",
            trials.len()
        )));
    }
    let set: Vec<_> = trials.iter().map(|t| t.series.clone()).collect();
    let result = nlts(&set, params)?;
    let schedules = trials
        .iter()
        .zip(&result.maps)
        .map(|(t, map)| FrameSchedule::from_dilation(t.id.clone(), t.series.sample_rate_hz(), map))
        .collect::<Result<Vec<_>>>()?;
    Ok((schedules, result))
}

/// External encoder used by [`render`].
///
/// The encoder must accept ffmpeg's command-line syntax. Rendering runs:
///
/// ```text
/// <program> -nostdin -v error -y -i <video> -vsync 0 -start_number 0 <tmp>/src/%08d.png
/// <program> -nostdin -v error -y -i <video> -vsync 0 -start_number 0 -vf hue=s=0 <tmp>/gray/%08d.png   (grayscale only)
/// <program> -nostdin -v error -y -framerate <fps> -start_number 0 -i <tmp>/out/%08d.png -frames:v <L> <codec args...> <out>
/// ```
///
/// Between the extraction and assembly steps the scheduled frames are linked
/// (or copied) into `<tmp>/out` in output order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoder {
    pub program: PathBuf,
    pub codec_args: Vec<String>,
}

impl Default for Encoder {
    fn default() -> Self {
        Self {
            program: PathBuf::from("ffmpeg"),
            codec_args: ["-c:v", "libx264", "-pix_fmt", "yuv420p"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Encoder {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self {
            program: program.into(),
            ..Default::default()
        }
    }

    fn run(&self, args: &[&std::ffi::OsStr]) -> Result<()> {
        let program = self.program.display().to_string();
        log::debug!("running {program} {args:?}");
        let output = Command::new(&self.program)
            .args(args)
            .output()
            .map_err(|source| Error::EncoderMissing {
                program: program.clone(),
                source,
            })?;
        if !output.status.success() {
            return Err(Error::EncoderFailed {
                program,
                status: output.status.to_string(),
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
            });
        }
        Ok(())
    }

    fn extract(&self, video: &Path, dir: &Path, grayscale: bool) -> Result<usize> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let pattern = dir.join("%08d.png");
        let mut args: Vec<&std::ffi::OsStr> = ["-nostdin", "-v", "error", "-y", "-i"].iter().map(|s| s.as_ref()).collect();
        args.push(video.as_os_str());
        args.extend(["-vsync", "0", "-start_number", "0"].iter().map(std::ffi::OsStr::new));
        if grayscale {
            args.extend(["-vf", "hue=s=0"].iter().map(std::ffi::OsStr::new));
        }
        args.push(pattern.as_os_str());
        self.run(&args)?;
        count_frames(dir)
    }
}

fn frame_name(k: usize) -> String {
    format!("{k:08}.png")
}

// Frames are numbered contiguously from 0; stop at the first gap.
fn count_frames(dir: &Path) -> Result<usize> {
    let mut k = 0;
    while dir.join(frame_name(k)).is_file() {
        k += 1;
    }
    Ok(k)
}

fn link_or_copy(from: &Path, to: &Path) -> Result<()> {
    if fs::hard_link(from, to).is_err() {
        fs::copy(from, to).map_err(|e| Error::io(to, e))?;
    }
    Ok(())
}

/// Render `video` through `schedule` into `out_path` with exactly
/// `schedule.len()` frames at `schedule.fps()`. With `grayscale_held`,
/// duplicated frames are desaturated.
pub fn render(
    schedule: &FrameSchedule,
    video_path: impl AsRef<Path>,
    out_path: impl AsRef<Path>,
    grayscale_held: bool,
    encoder: &Encoder,
) -> Result<()> {
    let video = video_path.as_ref();
    let out = out_path.as_ref();
    if !video.is_file() {
        return Err(Error::io(
            video,
            std::io::Error::new(std::io::ErrorKind::NotFound, "video file not found"),
        ));
    }
    let work = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let src_dir = work.path().join("src");
    let gray_dir = work.path().join("gray");
    let out_dir = work.path().join("out");

    let required = schedule.max_source() + 1;
    let video_frames = encoder.extract(video, &src_dir, false)?;
    if video_frames < required {
        return Err(Error::FrameCountMismatch { video_frames, required });
    }
    if grayscale_held && schedule.duplicated_count() > 0 {
        let gray_frames = encoder.extract(video, &gray_dir, true)?;
        if gray_frames != video_frames {
            return Err(Error::FrameCountMismatch {
                video_frames: gray_frames,
                required: video_frames,
            });
        }
    }

    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    for e in schedule.entries() {
        let dir = if grayscale_held && e.duplicated { &gray_dir } else { &src_dir };
        link_or_copy(&dir.join(frame_name(e.source_frame)), &out_dir.join(frame_name(e.output_frame)))?;
    }

    let fps = schedule.fps().to_string();
    let frames = schedule.len().to_string();
    let pattern = out_dir.join("%08d.png");
    let mut args: Vec<&std::ffi::OsStr> = ["-nostdin", "-v", "error", "-y", "-framerate"]
        .iter()
        .map(|s| s.as_ref())
        .collect();
    args.push(fps.as_ref());
    args.extend(["-start_number", "0", "-i"].iter().map(std::ffi::OsStr::new));
    args.push(pattern.as_os_str());
    args.push("-frames:v".as_ref());
    args.push(frames.as_ref());
    args.extend(encoder.codec_args.iter().map(|s| std::ffi::OsStr::new(s.as_str())));
    args.push(out.as_os_str());
    encoder.run(&args)
}

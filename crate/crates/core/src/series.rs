//! In-memory representation of multivariate kinematic recordings.

use std::path::PathBuf;

use crate::error::{Error, Result};

/// Default sampling rate of the kinematic recordings, in frames per second.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 30.0;

/// An ordered sequence of `len` samples, each with `dim` real components,
/// recorded at a fixed rate.
///
/// Samples are stored row-major in one contiguous buffer. Construction checks
/// that the buffer is rectangular, non-empty and finite, so every value of this
/// type can be fed to the alignment routines without further validation.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateTimeSeries {
    data: Vec<f64>,
    dim: usize,
    sample_rate_hz: f64,
}

impl MultivariateTimeSeries {
    /// Build a series from a row-major buffer of `data.len() / dim` samples.
    pub fn from_flat(data: Vec<f64>, dim: usize, sample_rate_hz: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSeries("dimension must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(Error::InvalidSeries("series must contain at least one sample".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidSeries(format!(
                "buffer of {} values is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at sample {}, channel {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self {
            data,
            dim,
            sample_rate_hz,
        })
    }

    /// Build a series from a list of equally sized samples.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], sample_rate_hz: f64) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidSeries(format!(
                    "sample {i} has {} components, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim, sample_rate_hz)
    }

    /// Univariate convenience constructor at the default rate.
    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1, DEFAULT_SAMPLE_RATE_HZ)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Sample `i` (0-based) as a slice of `dim` components.
    #[inline]
    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    /// Values of one channel across time.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.samples().map(|s| s[c]).collect()
    }

    pub fn with_sample_rate(mut self, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        self.sample_rate_hz = sample_rate_hz;
        Ok(self)
    }

    /// Per-channel z-normalization. Constant channels are only centred.
    pub fn z_normalized(&self) -> Self {
        let n = self.len() as f64;
        let mut data = self.data.clone();
        for c in 0..self.dim {
            let mean = self.samples().map(|s| s[c]).sum::<f64>() / n;
            let var = self.samples().map(|s| (s[c] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            for v in data.iter_mut().skip(c).step_by(self.dim) {
                *v -= mean;
                if sd > 0.0 {
                    *v /= sd;
                }
            }
        }
        Self {
            data,
            dim: self.dim,
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Operator skill level attached to a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkillClass {
    Novice,
    Intermediate,
    Expert,
    Unknown,
}

impl SkillClass {
    /// Map a skill letter (`N`, `I`, `E`) to a class. Anything else is `Unknown`.
    pub fn from_letter(token: &str) -> Self {
        match token {
            "N" | "n" => SkillClass::Novice,
            "I" | "i" => SkillClass::Intermediate,
            "E" | "e" => SkillClass::Expert,
            _ => SkillClass::Unknown,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            SkillClass::Novice => "N",
            SkillClass::Intermediate => "I",
            SkillClass::Expert => "E",
            SkillClass::Unknown => "?",
        }
    }
}

/// One recorded trial with its kinematics and optional assessment metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub id: String,
    pub series: MultivariateTimeSeries,
    /// Kinematic frame `i` is assumed to correspond to video frame `i`.
    pub video_path: Option<PathBuf>,
    pub subject: String,
    pub skill_class: SkillClass,
    pub osats_score: Option<u32>,
}

impl TrialRecord {
    pub fn new(id: impl Into<String>, series: MultivariateTimeSeries) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidParameter("trial id must not be empty".into()));
        }
        if id.contains(['\n', '\r']) {
            return Err(Error::InvalidParameter(format!("trial id {id:?} contains a line break")));
        }
        Ok(Self {
            subject: subject_of(&id),
            id,
            series,
            video_path: None,
            skill_class: SkillClass::Unknown,
            osats_score: None,
        })
    }

    pub fn with_video(mut self, path: impl Into<PathBuf>) -> Self {
        self.video_path = Some(path.into());
        self
    }

    pub fn with_score(mut self, skill: SkillClass, osats_score: Option<u32>) -> Self {
        self.skill_class = skill;
        self.osats_score = osats_score;
        self
    }

    /// Task name, taken as everything before the last `_` of the id
    /// (`Suturing_B001` → `Suturing`).
    pub fn task(&self) -> &str {
        task_of(&self.id)
    }
}

pub(crate) fn task_of(id: &str) -> &str {
    id.rsplit_once('_').map(|(task, _)| task).unwrap_or(id)
}

// `Suturing_B001` → `B`: the subject letter precedes the three-digit trial number.
fn subject_of(id: &str) -> String {
    let tail = id.rsplit_once('_').map(|(_, t)| t).unwrap_or(id);
    let letters: String = tail.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    if letters.is_empty() {
        tail.to_string()
    } else {
        letters
    }
}

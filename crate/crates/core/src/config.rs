//! Run configuration: built-in defaults, overridden by a key-value file,
//! overridden by command-line flags.
//!
//! Config files hold one `key = value` per line; `#` starts a comment.
//! Recognized keys:
//!
//! | key                | example              |
//! |--------------------|----------------------|
//! | `channels`         | `38,39,40,57,58,59`  |
//! | `fps`              | `30`                 |
//! | `max_iters`        | `10`                 |
//! | `tol`              | `1e-6`               |
//! | `normalize`        | `false`              |
//! | `encoder`          | `/usr/bin/ffmpeg`    |
//! | `window`           | `50` or `none`       |
//! | `meta_id_field`    | `0`                  |
//! | `meta_skill_field` | `1`                  |
//! | `meta_score_field` | `2`                  |
//! | `cross_task`       | `false`              |
//! | `length_normalize` | `false`              |

use std::fs;
use std::path::{Path, PathBuf};

use crate::dba::DbaParams;
use crate::dtw::DtwOptions;
use crate::error::{Error, Result};
use crate::kinio::{ChannelSelection, MetaFields};
use crate::series::DEFAULT_SAMPLE_RATE_HZ;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub channels: ChannelSelection,
    pub sample_rate_hz: f64,
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub normalize: bool,
    pub encoder: PathBuf,
    pub window: Option<usize>,
    pub meta_fields: MetaFields,
    pub cross_task: bool,
    pub length_normalize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let dba = DbaParams::default();
        Self {
            channels: ChannelSelection::default(),
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            max_iterations: dba.max_iterations,
            rel_tolerance: dba.rel_tolerance,
            normalize: false,
            encoder: PathBuf::from("ffmpeg"),
            window: None,
            meta_fields: MetaFields::default(),
            cross_task: false,
            length_normalize: false,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    /// Apply `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, lineno, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let err = |what: &str| Error::parse(origin, lineno, format!("`{key}`: {what}, got `{value}`"));
            let uint = || value.parse::<usize>().map_err(|_| err("expected a non-negative integer"));
            let boolean = || parse_bool(value).ok_or_else(|| err("expected true or false"));
            match key {
                "channels" => {
                    self.channels = ChannelSelection::parse(value).map_err(|e| Error::parse(origin, lineno, e.to_string()))?
                }
                "fps" => self.sample_rate_hz = value.parse().map_err(|_| err("expected a number"))?,
                "max_iters" => self.max_iterations = uint()?,
                "tol" => self.rel_tolerance = value.parse().map_err(|_| err("expected a number"))?,
                "normalize" => self.normalize = boolean()?,
                "encoder" => self.encoder = PathBuf::from(value),
                "window" => {
                    self.window = if value.eq_ignore_ascii_case("none") { None } else { Some(uint()?) }
                }
                "meta_id_field" => self.meta_fields.id = uint()?,
                "meta_skill_field" => self.meta_fields.skill = uint()?,
                "meta_score_field" => self.meta_fields.score = uint()?,
                "cross_task" => self.cross_task = boolean()?,
                "length_normalize" => self.length_normalize = boolean()?,
                _ => return Err(Error::parse(origin, lineno, format!("unknown key `{key}`"))),
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidParameter(format!("fps must be positive, got {}", self.sample_rate_hz)));
        }
        self.dba_params().validate()
    }

    pub fn dtw_options(&self) -> DtwOptions {
        DtwOptions { window: self.window }
    }

    pub fn dba_params(&self) -> DbaParams {
        DbaParams {
            max_iterations: self.max_iterations,
            rel_tolerance: self.rel_tolerance,
            dtw: self.dtw_options(),
        }
    }
}

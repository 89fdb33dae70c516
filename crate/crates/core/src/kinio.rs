//! Reading kinematic recordings and trial metadata from plain-text files.
//!
//! Kinematic files hold one frame per line as whitespace-separated reals.
//! The default channel selection picks the Cartesian positions of the two
//! slave manipulators from the 76-column JIGSAWS layout (19 variables per
//! manipulator, slave-left starting at column 38 and slave-right at 57).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{MultivariateTimeSeries, SkillClass};

/// 0-based columns of left-slave x,y,z and right-slave x,y,z.
pub const JIGSAWS_SLAVE_CARTESIAN: [usize; 6] = [38, 39, 40, 57, 58, 59];

/// Ordered, distinct column indices to extract from a kinematic file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSelection(Vec<usize>);

impl ChannelSelection {
    pub fn new(columns: Vec<usize>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidSelection("at least one column is required".into()));
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(Error::InvalidSelection(format!("column {c} selected twice")));
            }
        }
        Ok(Self(columns))
    }

    /// Parse a comma-separated list such as `38,39,40,57,58,59`.
    pub fn parse(text: &str) -> Result<Self> {
        let columns = text
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSelection(format!("`{}` is not a column index", tok.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(columns)
    }

    pub fn columns(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn max_column(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl Default for ChannelSelection {
    fn default() -> Self {
        Self(JIGSAWS_SLAVE_CARTESIAN.to_vec())
    }
}

impl std::fmt::Display for ChannelSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Load a kinematic file, keeping the selected columns in selection order.
pub fn load_kinematics(
    path: impl AsRef<Path>,
    selection: &ChannelSelection,
    sample_rate_hz: f64,
) -> Result<MultivariateTimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kinematics(&text, path, selection, sample_rate_hz)
}

/// Parse kinematic text already in memory. `origin` is only used in error messages.
pub fn parse_kinematics(
    text: &str,
    origin: &Path,
    selection: &ChannelSelection,
    sample_rate_hz: f64,
) -> Result<MultivariateTimeSeries> {
    let needed = selection.max_column() + 1;
    let mut data = Vec::new();
    let mut width: Option<usize> = None;
    let mut blank_at: Option<usize> = None;
    let mut row = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            blank_at.get_or_insert(lineno);
            continue;
        }
        if let Some(b) = blank_at {
            return Err(Error::parse(origin, b, "blank line inside data"));
        }

        row.clear();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("`{tok}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(origin, lineno, format!("non-finite value `{tok}`")));
            }
            row.push(v);
        }

        match width {
            None => {
                if row.len() < needed {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("{} columns, selection needs at least {needed}", row.len()),
                    ));
                }
                width = Some(row.len());
            }
            Some(w) if w != row.len() => {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("{} columns, previous rows have {w}", row.len()),
                ));
            }
            Some(_) => {}
        }
        data.extend(selection.columns().iter().map(|&c| row[c]));
    }

    if width.is_none() {
        return Err(Error::EmptyFile {
            path: origin.to_path_buf(),
        });
    }
    MultivariateTimeSeries::from_flat(data, selection.len(), sample_rate_hz)
}

/// 0-based field positions of the id, skill letter and score in a meta file line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaFields {
    pub id: usize,
    pub skill: usize,
    pub score: usize,
}

impl Default for MetaFields {
    fn default() -> Self {
        Self {
            id: 0,
            skill: 1,
            score: 2,
        }
    }
}

/// One line of a meta file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaRecord {
    pub id: String,
    pub skill: SkillClass,
    pub osats_score: u32,
}

pub fn load_meta(path: impl AsRef<Path>, fields: MetaFields) -> Result<Vec<MetaRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_meta(&text, path, fields)
}

pub fn parse_meta(text: &str, origin: &Path, fields: MetaFields) -> Result<Vec<MetaRecord>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let field = |pos: usize, name: &str| {
            toks.get(pos)
                .copied()
                .ok_or_else(|| Error::parse(origin, lineno, format!("missing {name} field (position {pos})")))
        };
        let id = field(fields.id, "id")?;
        let letter = field(fields.skill, "skill")?;
        let score_tok = field(fields.score, "score")?;
        let osats_score = score_tok
            .parse::<u32>()
            .map_err(|_| Error::parse(origin, lineno, format!("score `{score_tok}` is not a non-negative integer")))?;
        let skill = SkillClass::from_letter(letter);
        if skill == SkillClass::Unknown {
            log::warn!("{}:{lineno}: unknown skill letter `{letter}`", origin.display());
        }
        out.push(MetaRecord {
            id: id.to_string(),
            skill,
            osats_score,
        });
    }
    Ok(out)
}

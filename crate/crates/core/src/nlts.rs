//! Non-linear temporal scaling: dilate every member of a set to the length
//! of its DBA average.
//!
//! After averaging, the compact alignment is recomputed once against the
//! final average. For each member and each average index `t`, the aligned
//! range of member indices is reduced to one representative sample:
//!
//! * a single index is used as is; repeating it across consecutive `t`
//!   duplicates that frame;
//! * a range of several indices (local compression) is represented by its
//!   first index, except at the final position, which always shows the last
//!   member sample so the dilated series ends where the original does.

use rayon::prelude::*;

use crate::dba::{compact_alignment_with, dba, AverageSeries, CompactAlignment, DbaParams};
use crate::error::{Error, Result};
use crate::series::MultivariateTimeSeries;

/// Which source sample is shown at every aligned position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilationMap {
    /// 0-based source index per aligned position.
    source_index: Vec<usize>,
    is_duplicate: Vec<bool>,
}

impl DilationMap {
    /// Build a map from source indices, deriving the duplicate markers.
    /// Indices must start at 0 and never decrease.
    pub fn new(source_index: Vec<usize>) -> Result<Self> {
        let first = source_index.first().copied();
        if first != Some(0) {
            return Err(Error::InvalidDilation("map must be non-empty and start at source index 0".into()));
        }
        if let Some(t) = source_index.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidDilation(format!(
                "source index decreases at position {}",
                t + 1
            )));
        }
        let is_duplicate = std::iter::once(false)
            .chain(source_index.windows(2).map(|w| w[0] == w[1]))
            .collect();
        Ok(Self {
            source_index,
            is_duplicate,
        })
    }

    pub fn identity(len: usize) -> Self {
        Self {
            source_index: (0..len).collect(),
            is_duplicate: vec![false; len],
        }
    }

    pub fn source_index(&self) -> &[usize] {
        &self.source_index
    }

    pub fn is_duplicate(&self) -> &[bool] {
        &self.is_duplicate
    }

    pub fn len(&self) -> usize {
        self.source_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_index.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.source_index.iter().enumerate().all(|(t, &s)| t == s)
    }

    /// Number of aligned positions that repeat the previous frame.
    pub fn duplicates(&self) -> usize {
        self.is_duplicate.iter().filter(|&&d| d).count()
    }

    fn from_ranges(ranges: &[std::ops::Range<usize>]) -> Self {
        let last = ranges.len() - 1;
        let source_index = ranges
            .iter()
            .enumerate()
            .map(|(t, r)| if t == last { r.end - 1 } else { r.start })
            .collect();
        // Ranges come from a valid warping path: start at 0 and are monotone.
        Self::new(source_index).expect("alignment ranges form a monotone map")
    }
}

/// Result of [`nlts`]: the average and one dilation map per input member.
#[derive(Debug, Clone, PartialEq)]
pub struct NltsResult {
    pub average: AverageSeries,
    pub maps: Vec<DilationMap>,
}

/// Dilation maps of every member, derived from a compact alignment.
pub fn dilation_maps(alignment: &CompactAlignment) -> Vec<DilationMap> {
    (0..alignment.members())
        .into_par_iter()
        .map(|k| DilationMap::from_ranges(alignment.member(k)))
        .collect()
}

/// Average `set` with DBA and dilate every member to the average's length.
pub fn nlts(set: &[MultivariateTimeSeries], params: &DbaParams) -> Result<NltsResult> {
    let average = dba(set, params)?;
    let maps = if set.len() == 1 {
        vec![DilationMap::identity(set[0].len())]
    } else {
        let alignment = compact_alignment_with(&average.series, set, &params.dtw)?;
        dilation_maps(&alignment)
    };
    Ok(NltsResult { average, maps })
}

/// Resample `series` through `map`: output position `t` is `series[source_index[t]]`.
pub fn apply_dilation(series: &MultivariateTimeSeries, map: &DilationMap) -> Result<MultivariateTimeSeries> {
    let m = series.len();
    let last = *map.source_index.last().expect("maps are non-empty");
    if last >= m {
        return Err(Error::InvalidDilation(format!(
            "source index {last} out of range for a series of length {m}"
        )));
    }
    if last + 1 != m {
        return Err(Error::InvalidDilation(format!(
            "map ends at source index {last} but the series ends at {}",
            m - 1
        )));
    }
    let mut data = Vec::with_capacity(map.len() * series.dim());
    for &s in &map.source_index {
        data.extend_from_slice(series.sample(s));
    }
    MultivariateTimeSeries::from_flat(data, series.dim(), series.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dba::compact_alignment;

    fn uni(v: &[f64]) -> MultivariateTimeSeries {
        MultivariateTimeSeries::univariate(v).unwrap()
    }

    #[test]
    fn map_from_worked_alignment() {
        let cma = compact_alignment(&uni(&[0.0, 1.0, 2.0]), &[uni(&[0.0, 2.0])]).unwrap();
        let maps = dilation_maps(&cma);
        assert_eq!(maps[0].source_index(), &[0, 1, 1]);
        assert_eq!(maps[0].is_duplicate(), &[false, false, true]);
        assert_eq!(apply_dilation(&uni(&[0.0, 2.0]), &maps[0]).unwrap(), uni(&[0.0, 2.0, 2.0]));
    }

    #[test]
    fn compression_uses_first_index_except_at_the_end() {
        let map = DilationMap::from_ranges(&[0..2, 2..3, 3..6]);
        assert_eq!(map.source_index(), &[0, 2, 5]);
        assert_eq!(map.duplicates(), 0);
        let map = DilationMap::from_ranges(&[0..1, 0..1, 0..3]);
        assert_eq!(map.source_index(), &[0, 0, 2]);
        assert_eq!(map.is_duplicate(), &[false, true, false]);
    }

    #[test]
    fn identical_members_give_identity_maps() {
        let a = uni(&[0.0, 3.0, 1.0, 2.0]);
        let out = nlts(&[a.clone(), a.clone(), a.clone()], &DbaParams::default()).unwrap();
        assert_eq!(out.maps.len(), 3);
        assert!(out.maps.iter().all(DilationMap::is_identity));
        assert_eq!(out.average.series, a);
    }

    #[test]
    fn single_member_is_identity() {
        let a = uni(&[0.0, 3.0, 1.0]);
        let out = nlts(std::slice::from_ref(&a), &DbaParams::default()).unwrap();
        assert_eq!(out.maps, vec![DilationMap::identity(3)]);
    }

    #[test]
    fn dilated_lengths_match_longest() {
        let set = vec![uni(&[0.0, 1.0, 2.0, 1.0]), uni(&[0.0, 2.0, 1.0]), uni(&[0.0, 0.0, 1.0, 2.0, 2.0, 1.0])];
        let out = nlts(&set, &DbaParams::default()).unwrap();
        for (s, map) in set.iter().zip(&out.maps) {
            assert_eq!(map.len(), 6);
            assert_eq!(*map.source_index().last().unwrap(), s.len() - 1);
            assert_eq!(apply_dilation(s, map).unwrap().len(), 6);
        }
    }

    #[test]
    fn apply_examples() {
        let s = uni(&[0.0, 2.0]);
        let map = DilationMap::new(vec![0, 0, 0, 1]).unwrap();
        assert_eq!(apply_dilation(&s, &map).unwrap(), uni(&[0.0, 0.0, 0.0, 2.0]));
        assert_eq!(apply_dilation(&s, &DilationMap::identity(2)).unwrap(), s);
    }

    #[test]
    fn apply_rejects_inconsistent_maps() {
        let s = uni(&[0.0, 2.0]);
        assert!(apply_dilation(&s, &DilationMap::new(vec![0, 1, 2]).unwrap()).is_err());
        assert!(apply_dilation(&s, &DilationMap::new(vec![0, 0]).unwrap()).is_err());
    }

    #[test]
    fn map_validation() {
        assert!(DilationMap::new(vec![]).is_err());
        assert!(DilationMap::new(vec![1, 2]).is_err());
        assert!(DilationMap::new(vec![0, 2, 1]).is_err());
    }
}

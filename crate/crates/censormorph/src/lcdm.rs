//! Data model and ingestion for labeled cortical distance map (LCDM) samples.
//!
//! A study is described by a manifest (CSV) that points at one distance file
//! per subject and hemisphere. Distances are signed millimeters, positive in
//! gray matter and negative in white matter. Distances are sorted once at
//! ingest; everything downstream (censoring, ranking) relies on sortedness.

use crate::error::{Error, Result};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemisphere {
    Left,
    Right,
}

impl Hemisphere {
    pub fn as_str(&self) -> &'static str {
        match self {
            Hemisphere::Left => "left",
            Hemisphere::Right => "right",
        }
    }
}

impl fmt::Display for Hemisphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hemisphere {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Hemisphere::Left),
            "right" => Ok(Hemisphere::Right),
            other => Err(format!("unknown hemisphere token '{other}'")),
        }
    }
}

/// One manifest row: where to find one subject-hemisphere distance file.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub group: String,
    pub hemisphere: Hemisphere,
    pub path: PathBuf,
}

/// Parsed study manifest. Clipping bounds default to [-0.5, 5.5] mm.
#[derive(Debug, Clone)]
pub struct StudyManifest {
    pub entries: Vec<ManifestEntry>,
    pub voxel_size_mm: Option<f64>,
    pub clip_lo_mm: f64,
    pub clip_hi_mm: f64,
}

pub const DEFAULT_CLIP_LO_MM: f64 = -0.5;
pub const DEFAULT_CLIP_HI_MM: f64 = 5.5;

impl StudyManifest {
    /// Group labels in first-appearance order.
    pub fn group_labels(&self) -> Vec<&str> {
        let mut labels: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !labels.contains(&e.group.as_str()) {
                labels.push(&e.group);
            }
        }
        labels
    }

    /// Hemispheres present, left before right.
    pub fn hemispheres(&self) -> Vec<Hemisphere> {
        let mut out = Vec::new();
        for h in [Hemisphere::Left, Hemisphere::Right] {
            if self.entries.iter().any(|e| e.hemisphere == h) {
                out.push(h);
            }
        }
        out
    }
}

/// One subject-hemisphere's distances, sorted non-decreasing.
#[derive(Debug, Clone)]
pub struct DistanceSet {
    pub subject_id: String,
    pub hemisphere: Hemisphere,
    distances: Vec<f64>,
    pub clipped_count: usize,
    pub raw_count: usize,
}

impl DistanceSet {
    /// Builds a set from unsorted values; sorts them, keeps everything.
    pub fn new(subject_id: impl Into<String>, hemisphere: Hemisphere, mut values: Vec<f64>) -> Self {
        values.sort_unstable_by(f64::total_cmp);
        let raw_count = values.len();
        DistanceSet {
            subject_id: subject_id.into(),
            hemisphere,
            distances: values,
            clipped_count: 0,
            raw_count,
        }
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// Keeps distances in [lo, hi] (inclusive on both ends) and counts removals.
    pub fn clip(&self, lo: f64, hi: f64) -> Result<DistanceSet> {
        if !(lo < hi) {
            return Err(Error::InvalidRange { lo, hi });
        }
        let start = self.distances.partition_point(|&d| d < lo);
        let end = self.distances.partition_point(|&d| d <= hi);
        let kept: Vec<f64> = self.distances[start..end].to_vec();
        let removed = self.distances.len() - kept.len();
        Ok(DistanceSet {
            subject_id: self.subject_id.clone(),
            hemisphere: self.hemisphere,
            distances: kept,
            clipped_count: self.clipped_count + removed,
            raw_count: self.raw_count,
        })
    }
}

/// All distances of one group (one hemisphere), merged and sorted.
#[derive(Debug, Clone)]
pub struct PooledSample {
    pub group: String,
    pub hemisphere: Hemisphere,
    distances: Vec<f64>,
    pub subject_count: usize,
}

impl PooledSample {
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// Merges the distances of several subjects into one pooled sample.
/// Duplicate values are kept (multiset semantics).
pub fn pool(sets: &[DistanceSet], group: impl Into<String>, hemisphere: Hemisphere) -> Result<PooledSample> {
    if sets.is_empty() {
        return Err(Error::EmptyCollection("no distance sets to pool".into()));
    }
    for s in sets {
        if s.hemisphere != hemisphere {
            return Err(Error::HemisphereMismatch {
                expected: hemisphere,
                found: s.hemisphere,
            });
        }
    }
    let total: usize = sets.iter().map(|s| s.len()).sum();
    let mut merged = Vec::with_capacity(total);
    for s in sets {
        merged.extend_from_slice(s.distances());
    }
    merged.sort_unstable_by(f64::total_cmp);
    Ok(PooledSample {
        group: group.into(),
        hemisphere,
        distances: merged,
        subject_count: sets.len(),
    })
}

/// Reads a distance file: one decimal real per line, blank lines forbidden.
pub fn load_distances(path: &Path, subject_id: &str, hemisphere: Hemisphere) -> Result<DistanceSet> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let token = line.trim();
        if token.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "blank line in distance file".into(),
            });
        }
        let value: f64 = token.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("expected a decimal real, found '{token}'"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("non-finite value '{token}'"),
            });
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::EmptyFile(path.display().to_string()));
    }
    Ok(DistanceSet::new(subject_id, hemisphere, values))
}

/// Writes distances in the standard file format (6 significant digits).
pub fn write_distances(path: &Path, distances: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(distances.len() * 10);
    for &d in distances {
        out.push_str(&crate::cli::csv::fmt_sig(d));
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

/// Parses the manifest CSV. `# key=value` comment lines may set
/// `clip_lo`, `clip_hi` and `voxel_size`; other comments are ignored.
pub fn load_manifest(path: &Path) -> Result<StudyManifest> {
    let text = fs::read_to_string(path)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut entries: Vec<ManifestEntry> = Vec::new();
    let mut clip_lo = None;
    let mut clip_hi = None;
    let mut voxel_size = None;
    let mut header_seen = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let key = key.trim();
                if matches!(key, "clip_lo" | "clip_hi" | "voxel_size") {
                    let parsed: f64 = value.trim().parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("bad numeric value for '{key}'"),
                    })?;
                    match key {
                        "clip_lo" => clip_lo = Some(parsed),
                        "clip_hi" => clip_hi = Some(parsed),
                        _ => voxel_size = Some(parsed),
                    }
                }
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["subject_id", "group", "hemisphere", "path"] {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected header 'subject_id,group,hemisphere,path'".into(),
                });
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 4 columns, found {}", cols.len()),
            });
        }
        let hemisphere: Hemisphere = cols[2].parse().map_err(|e: String| Error::Parse {
            line: lineno,
            message: e,
        })?;
        if cols[0].is_empty() || cols[1].is_empty() || cols[3].is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty field".into(),
            });
        }
        let entry_path = Path::new(cols[3]);
        let path = if entry_path.is_absolute() {
            entry_path.to_path_buf()
        } else {
            base_dir.join(entry_path)
        };
        entries.push(ManifestEntry {
            subject_id: cols[0].to_string(),
            group: cols[1].to_string(),
            hemisphere,
            path,
        });
    }

    if entries.is_empty() {
        return Err(Error::EmptyManifest);
    }
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            if a.subject_id == b.subject_id && a.hemisphere == b.hemisphere {
                return Err(Error::DuplicateEntry {
                    subject_id: a.subject_id.clone(),
                    hemisphere: a.hemisphere,
                });
            }
        }
    }
    let clip_lo = clip_lo.unwrap_or(DEFAULT_CLIP_LO_MM);
    let clip_hi = clip_hi.unwrap_or(DEFAULT_CLIP_HI_MM);
    if !(clip_lo < clip_hi) {
        return Err(Error::InvalidRange {
            lo: clip_lo,
            hi: clip_hi,
        });
    }
    Ok(StudyManifest {
        entries,
        voxel_size_mm: voxel_size,
        clip_lo_mm: clip_lo,
        clip_hi_mm: clip_hi,
    })
}

//! Raw recording ingestion, trial splitting and channel segmentation.
//!
//! A recording file holds one subject performing one action: one row per
//! time sample, one whitespace-separated column per electrode. Each file is
//! cut into `R` equal-length trials, and every trial channel can be further
//! cut into non-overlapping analysis windows.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::kv::{self, KvError};

/// Number of electrodes in the physical action recordings.
pub const UCI_CHANNELS: usize = 8;
/// Repetitions of each action per subject.
pub const UCI_TRIALS: usize = 15;
/// Subjects in the physical action dataset.
pub const UCI_SUBJECTS: usize = 4;

/// Action names indexed by `label - 1`. Labels 1..=10 are normal actions,
/// 11..=20 aggressive ones.
pub const ACTION_NAMES: [&str; 20] = [
    "Bowing",
    "Clapping",
    "Handshaking",
    "Hugging",
    "Jumping",
    "Running",
    "Seating",
    "Standing",
    "Walking",
    "Waving",
    "Elbowing",
    "Frontkicking",
    "Hammering",
    "Headering",
    "Kneeing",
    "Pulling",
    "Punching",
    "Pushing",
    "Sidekicking",
    "Slapping",
];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {0}: malformed sample row")]
    MalformedLine(usize),
    #[error("recording has no data lines")]
    EmptyRecording,
    #[error("recording of {total} samples cannot be split into {trials} trials")]
    TooShort { total: usize, trials: usize },
    #[error("window length {window} invalid for a signal of {len} samples")]
    InvalidWindow { window: usize, len: usize },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<DatasetError>,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raw samples of one subject/action file, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelRecording {
    channels: Vec<Vec<f64>>,
    pub subject_id: u32,
    pub action_label: usize,
}

impl MultiChannelRecording {
    /// Builds a recording from per-channel sample vectors.
    ///
    /// All channels must share one nonzero length and contain only finite
    /// values.
    pub fn from_channels(
        channels: Vec<Vec<f64>>,
        subject_id: u32,
        action_label: usize,
    ) -> Result<Self, DatasetError> {
        let len = channels.first().map_or(0, Vec::len);
        if len == 0 {
            return Err(DatasetError::EmptyRecording);
        }
        for ch in &channels {
            if ch.len() != len {
                return Err(DatasetError::Manifest(
                    "channels of unequal length".to_string(),
                ));
            }
            if let Some(row) = ch.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::MalformedLine(row + 1));
            }
        }
        Ok(Self {
            channels,
            subject_id,
            action_label,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_samples(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channel(&self, m: usize) -> &[f64] {
        &self.channels[m]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    /// One time sample across all channels.
    pub fn row(&self, n: usize) -> Vec<f64> {
        self.channels.iter().map(|ch| ch[n]).collect()
    }
}

/// One trial: `M` equal-length channels plus its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub channels: Vec<Vec<f64>>,
    pub label: usize,
    pub subject_id: u32,
    /// 1-based position of the trial within its recording.
    pub trial_index: usize,
}

impl Pattern {
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A length-`L` window of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub values: Vec<f64>,
    /// 0-based channel index.
    pub channel: usize,
    /// 1-based window position.
    pub window_index: usize,
    pub pattern_index: usize,
}

/// Parses whitespace/tab separated sample rows.
///
/// Blank lines are skipped; line numbers in errors count every physical
/// line, starting at 1.
pub fn parse_recording(
    text: &str,
    expected_channels: usize,
) -> Result<MultiChannelRecording, DatasetError> {
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); expected_channels];
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0;
        for field in line.split_whitespace() {
            if count == expected_channels {
                return Err(DatasetError::MalformedLine(line_no));
            }
            let value: f64 = field
                .parse()
                .map_err(|_| DatasetError::MalformedLine(line_no))?;
            if !value.is_finite() {
                return Err(DatasetError::MalformedLine(line_no));
            }
            channels[count].push(value);
            count += 1;
        }
        if count != expected_channels {
            return Err(DatasetError::MalformedLine(line_no));
        }
    }
    if expected_channels == 0 || channels[0].is_empty() {
        return Err(DatasetError::EmptyRecording);
    }
    Ok(MultiChannelRecording {
        channels,
        subject_id: 0,
        action_label: 0,
    })
}

/// Cuts a recording into `trials` consecutive patterns of
/// `floor(N_total / trials)` samples; the remainder at the end is dropped.
pub fn split_trials(
    rec: &MultiChannelRecording,
    trials: usize,
) -> Result<Vec<Pattern>, DatasetError> {
    let total = rec.num_samples();
    if trials == 0 || total / trials == 0 {
        return Err(DatasetError::TooShort { total, trials });
    }
    let n = total / trials;
    Ok((0..trials)
        .map(|r| Pattern {
            channels: rec
                .channels
                .iter()
                .map(|ch| ch[r * n..(r + 1) * n].to_vec())
                .collect(),
            label: rec.action_label,
            subject_id: rec.subject_id,
            trial_index: r + 1,
        })
        .collect())
}

/// Splits one channel into `floor(N / window)` non-overlapping windows.
pub fn segment_channel(x: &[f64], window: usize) -> Result<Vec<Segment>, DatasetError> {
    if window == 0 || window > x.len() {
        return Err(DatasetError::InvalidWindow {
            window,
            len: x.len(),
        });
    }
    Ok(x.chunks_exact(window)
        .enumerate()
        .map(|(w, chunk)| Segment {
            values: chunk.to_vec(),
            channel: 0,
            window_index: w + 1,
            pattern_index: 0,
        })
        .collect())
}

/// Window length in samples for a window duration at a sampling rate,
/// e.g. the conventional 200 ms EMG analysis window.
pub fn window_samples(sample_rate_hz: f64, window_ms: f64) -> usize {
    ((sample_rate_hz * window_ms / 1000.0).round() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub subject_id: u32,
    pub action_label: usize,
}

/// Lists the recording files of a dataset.
///
/// On disk it is a flat `key = value` file:
///
/// ```text
/// root = /data/physical-action
/// trials = 15
/// channels = 8
/// entry = sub1/Normal/txt/Bowing.txt, 1, 1
/// ```
///
/// `entry` repeats; its value is `relative path, subject id, action label`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
    pub trials_per_file: usize,
    pub channels: usize,
}

impl DatasetManifest {
    pub fn new(
        root: impl Into<PathBuf>,
        entries: Vec<ManifestEntry>,
        trials_per_file: usize,
        channels: usize,
    ) -> Result<Self, DatasetError> {
        let m = Self {
            root: root.into(),
            entries,
            trials_per_file,
            channels,
        };
        m.validate()?;
        Ok(m)
    }

    /// The directory layout of the UCI distribution:
    /// `sub{s}/{Normal,Aggressive}/txt/{Action}.txt`.
    pub fn uci_layout(root: impl Into<PathBuf>) -> Self {
        let mut entries = Vec::with_capacity(UCI_SUBJECTS * ACTION_NAMES.len());
        for s in 1..=UCI_SUBJECTS as u32 {
            for (i, name) in ACTION_NAMES.iter().enumerate() {
                let group = if i < 10 { "Normal" } else { "Aggressive" };
                entries.push(ManifestEntry {
                    path: PathBuf::from(format!("sub{s}/{group}/txt/{name}.txt")),
                    subject_id: s,
                    action_label: i + 1,
                });
            }
        }
        Self {
            root: root.into(),
            entries,
            trials_per_file: UCI_TRIALS,
            channels: UCI_CHANNELS,
        }
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, DatasetError> {
        let pairs = kv::parse(text)?;
        let mut root = None;
        let mut trials = UCI_TRIALS;
        let mut channels = UCI_CHANNELS;
        let mut entries = Vec::new();
        for (line, key, value) in pairs {
            let bad = |what: &str| DatasetError::Manifest(format!("line {line}: {what}"));
            match key.as_str() {
                "root" => root = Some(PathBuf::from(value)),
                "trials" => trials = value.parse().map_err(|_| bad("bad trials"))?,
                "channels" => channels = value.parse().map_err(|_| bad("bad channels"))?,
                "entry" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(bad("entry needs path, subject, label"));
                    }
                    entries.push(ManifestEntry {
                        path: PathBuf::from(parts[0]),
                        subject_id: parts[1].parse().map_err(|_| bad("bad subject id"))?,
                        action_label: parts[2].parse().map_err(|_| bad("bad label"))?,
                    });
                }
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let root = match root {
            Some(r) if r.is_absolute() => r,
            Some(r) => base_dir.join(r),
            None => base_dir.to_path_buf(),
        };
        Self::new(root, entries, trials, channels)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path).map_err(|e| DatasetError::InFile {
            path: path.to_path_buf(),
            source: Box::new(e.into()),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "root = {}\ntrials = {}\nchannels = {}\n",
            self.root.display(),
            self.trials_per_file,
            self.channels
        );
        for e in &self.entries {
            out.push_str(&format!(
                "entry = {}, {}, {}\n",
                e.path.display(),
                e.subject_id,
                e.action_label
            ));
        }
        out
    }

    fn validate(&self) -> Result<(), DatasetError> {
        if self.trials_per_file == 0 || self.channels == 0 {
            return Err(DatasetError::Manifest(
                "trials and channels must be at least 1".to_string(),
            ));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.action_label == 0 {
                return Err(DatasetError::Manifest(format!(
                    "{}: labels start at 1",
                    e.path.display()
                )));
            }
            if !seen.insert((e.subject_id, e.action_label)) {
                return Err(DatasetError::Manifest(format!(
                    "duplicate entry for subject {} action {}",
                    e.subject_id, e.action_label
                )));
            }
        }
        Ok(())
    }
}

/// Reads, parses and splits every manifest file. Files are processed in
/// parallel; the output keeps manifest order, trials in time order.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Vec<Pattern>, DatasetError> {
    let per_file: Vec<Vec<Pattern>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let path = manifest.root.join(&entry.path);
            if !path.is_file() {
                return Err(DatasetError::MissingFile(path));
            }
            let in_file = |e: DatasetError| DatasetError::InFile {
                path: path.clone(),
                source: Box::new(e),
            };
            let text = fs::read_to_string(&path).map_err(|e| in_file(e.into()))?;
            let mut rec = parse_recording(&text, manifest.channels).map_err(in_file)?;
            rec.subject_id = entry.subject_id;
            rec.action_label = entry.action_label;
            split_trials(&rec, manifest.trials_per_file).map_err(in_file)
        })
        .collect::<Result<_, _>>()?;
    Ok(per_file.into_iter().flatten().collect())
}

//! Global feature index map.
//!
//! Layout is modality-major: all TDS features, then ICS, LMF, SBP, LBP.
//! Within the per-channel modalities the index is channel-major, so e.g.
//! TDS index `4(m-1) + s` is statistic `s` (mean, variance, skewness,
//! kurtosis) of channel `m`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::ics::DEFAULT_ICS_PAIRS;
use super::spectrum::LMF_PER_CHANNEL;

pub const TDS_PER_CHANNEL: usize = 4;
pub const LBP_PER_CHANNEL: usize = 2;
const TDS_NAMES: [&str; 4] = ["mean", "variance", "skewness", "kurtosis"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    Tds,
    Ics,
    Lmf,
    Sbp,
    Lbp,
}

impl Modality {
    pub const ALL: [Modality; 5] = [
        Modality::Tds,
        Modality::Ics,
        Modality::Lmf,
        Modality::Sbp,
        Modality::Lbp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Tds => "TDS",
            Modality::Ics => "ICS",
            Modality::Lmf => "LMF",
            Modality::Sbp => "SBP",
            Modality::Lbp => "LBP",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Channel(s) a feature is computed from, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelRef {
    Single(usize),
    Pair(usize, usize),
}

impl ChannelRef {
    pub fn involves(self, channel: usize) -> bool {
        match self {
            ChannelRef::Single(m) => m == channel,
            ChannelRef::Pair(i, j) => i == channel || j == channel,
        }
    }
}

impl fmt::Display for ChannelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelRef::Single(m) => write!(f, "{m}"),
            ChannelRef::Pair(i, j) => write!(f, "{i}-{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    /// 1-based global index.
    pub index: usize,
    pub modality: Modality,
    pub channel: ChannelRef,
    /// 1-based index within the modality block.
    pub within: usize,
    /// 1-based feature number within one channel of the modality
    /// (statistic, LMF f(n), band, LBP count; pair number for ICS).
    pub local: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRegistry {
    descriptors: Vec<FeatureDescriptor>,
    channels: usize,
    pairs: Vec<(usize, usize)>,
    bands: usize,
}

impl Default for FeatureRegistry {
    fn default() -> Self {
        Self::new(8, &DEFAULT_ICS_PAIRS, 10)
    }
}

impl FeatureRegistry {
    pub fn new(channels: usize, pairs: &[(usize, usize)], bands: usize) -> Self {
        let mut descriptors = Vec::new();
        let mut push = |modality: Modality, channel: ChannelRef, within: usize, local: usize, name: String| {
            descriptors.push(FeatureDescriptor {
                index: descriptors.len() + 1,
                modality,
                channel,
                within,
                local,
                name,
            });
        };
        for m in 1..=channels {
            for (s, stat) in TDS_NAMES.iter().enumerate() {
                let within = (m - 1) * TDS_PER_CHANNEL + s + 1;
                push(Modality::Tds, ChannelRef::Single(m), within, s + 1, format!("tds_ch{m}_{stat}"));
            }
        }
        for (p, &(i, j)) in pairs.iter().enumerate() {
            push(Modality::Ics, ChannelRef::Pair(i, j), p + 1, p + 1, format!("ics_ch{i}_ch{j}_maxcorr"));
        }
        for m in 1..=channels {
            for n in 1..=LMF_PER_CHANNEL {
                let within = (m - 1) * LMF_PER_CHANNEL + n;
                push(Modality::Lmf, ChannelRef::Single(m), within, n, format!("lmf_ch{m}_f{n}"));
            }
        }
        for m in 1..=channels {
            for b in 1..=bands {
                let within = (m - 1) * bands + b;
                push(Modality::Sbp, ChannelRef::Single(m), within, b, format!("sbp_ch{m}_band{b}"));
            }
        }
        for m in 1..=channels {
            for (c, which) in ["low", "high"].iter().enumerate() {
                let within = (m - 1) * LBP_PER_CHANNEL + c + 1;
                push(Modality::Lbp, ChannelRef::Single(m), within, c + 1, format!("lbp_ch{m}_{which}"));
            }
        }
        Self {
            descriptors,
            channels,
            pairs: pairs.to_vec(),
            bands,
        }
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    /// Descriptor at a 0-based position.
    pub fn get(&self, pos: usize) -> Option<&FeatureDescriptor> {
        self.descriptors.get(pos)
    }

    pub fn names(&self) -> Vec<String> {
        self.descriptors.iter().map(|d| d.name.clone()).collect()
    }

    /// 0-based positions covered by a modality.
    pub fn modality_range(&self, modality: Modality) -> Range<usize> {
        let start = self
            .descriptors
            .iter()
            .position(|d| d.modality == modality)
            .unwrap_or(self.len());
        let count = self
            .descriptors
            .iter()
            .filter(|d| d.modality == modality)
            .count();
        start..start + count
    }

    /// 0-based position of a modality-local 1-based index.
    pub fn position_of(&self, modality: Modality, within: usize) -> Option<usize> {
        let r = self.modality_range(modality);
        (within >= 1 && within <= r.len()).then(|| r.start + within - 1)
    }

    pub fn position_by_name(&self, name: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.name == name)
    }

    /// Whether the feature at `pos` (0-based) is computed from `channel`.
    pub fn involves_channel(&self, pos: usize, channel: usize) -> bool {
        self.descriptors[pos].channel.involves(channel)
    }

    /// Spectral-moment features introduced alongside the classical ones:
    /// LMF `f(6)..=f(17)`.
    pub fn is_novel_lmf(&self, pos: usize) -> bool {
        let d = &self.descriptors[pos];
        d.modality == Modality::Lmf && d.local >= 6
    }

    /// Registry as CSV: `index,modality,channel,name`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,modality,channel,name\n");
        for d in &self.descriptors {
            out.push_str(&format!("{},{},{},{}\n", d.index, d.modality, d.channel, d.name));
        }
        out
    }
}

/// Modality-local indices of the published forward-selection result for
/// the physical action data, grouped as `(modality, within-modality index)`.
/// Repeated ICS entries in the source table are listed once.
pub const PUBLISHED_SELECTION: [(Modality, usize); 36] = [
    (Modality::Tds, 1),
    (Modality::Tds, 7),
    (Modality::Tds, 9),
    (Modality::Tds, 10),
    (Modality::Tds, 11),
    (Modality::Tds, 17),
    (Modality::Tds, 23),
    (Modality::Tds, 25),
    (Modality::Tds, 29),
    (Modality::Ics, 3),
    (Modality::Ics, 6),
    (Modality::Ics, 12),
    (Modality::Lmf, 4),
    (Modality::Lmf, 10),
    (Modality::Lmf, 11),
    (Modality::Lmf, 14),
    (Modality::Lmf, 16),
    (Modality::Lmf, 24),
    (Modality::Lmf, 29),
    (Modality::Lmf, 30),
    (Modality::Lmf, 34),
    (Modality::Lmf, 41),
    (Modality::Lmf, 42),
    (Modality::Lmf, 48),
    (Modality::Lmf, 78),
    (Modality::Lmf, 107),
    (Modality::Lmf, 126),
    (Modality::Sbp, 11),
    (Modality::Sbp, 13),
    (Modality::Sbp, 23),
    (Modality::Sbp, 26),
    (Modality::Sbp, 30),
    (Modality::Sbp, 31),
    (Modality::Sbp, 66),
    (Modality::Lbp, 5),
    (Modality::Lbp, 9),
];

/// [`PUBLISHED_SELECTION`] as 0-based positions in `registry`.
pub fn published_selection(registry: &FeatureRegistry) -> Vec<usize> {
    PUBLISHED_SELECTION
        .iter()
        .filter_map(|&(m, w)| registry.position_of(m, w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cardinalities() {
        let r = FeatureRegistry::default();
        assert_eq!(r.len(), 276);
        let sizes: Vec<usize> = Modality::ALL.iter().map(|&m| r.modality_range(m).len()).collect();
        assert_eq!(sizes, [32, 12, 136, 80, 16]);
        for (i, d) in r.descriptors().iter().enumerate() {
            assert_eq!(d.index, i + 1);
        }
        let mut names = r.names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 276);
    }

    #[test]
    fn tds_index_scheme() {
        let r = FeatureRegistry::default();
        let name = |w| r.get(r.position_of(Modality::Tds, w).unwrap()).unwrap().name.clone();
        assert_eq!(name(1), "tds_ch1_mean");
        assert_eq!(name(7), "tds_ch2_skewness");
        assert_eq!(name(17), "tds_ch5_mean");
        assert_eq!(name(23), "tds_ch6_skewness");
        assert_eq!(name(25), "tds_ch7_mean");
        assert_eq!(name(29), "tds_ch8_mean");
    }

    #[test]
    fn published_selection_resolves() {
        let r = FeatureRegistry::default();
        let sel = published_selection(&r);
        assert_eq!(sel.len(), 36);
        // LMF 126 is channel 8, f(7)
        let d = r.get(r.position_of(Modality::Lmf, 126).unwrap()).unwrap();
        assert_eq!(d.name, "lmf_ch8_f7");
        // ICS 12 is the (5,6) pair
        assert_eq!(r.get(sel[11]).unwrap().channel, ChannelRef::Pair(5, 6));
        let novel = sel.iter().filter(|&&p| r.is_novel_lmf(p)).count();
        assert_eq!(novel, 13);
    }

    #[test]
    fn channel_involvement() {
        let r = FeatureRegistry::default();
        let ics_12 = r.position_of(Modality::Ics, 6).unwrap();
        assert!(r.involves_channel(ics_12, 1) && r.involves_channel(ics_12, 2));
        assert!(!r.involves_channel(ics_12, 3));
        assert!(r.to_csv().lines().nth(1).unwrap().starts_with("1,TDS,1,tds_ch1_mean"));
    }
}

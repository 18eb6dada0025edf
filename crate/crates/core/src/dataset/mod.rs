//! Dataset manifests: ingest, emit and synthesize skeleton recordings.

mod csv_io;
mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{HarError, Result};
use crate::skeleton::{ActivitySequence, JointId};

pub use csv_io::{format_coordinate, header, read_dataset, write_dataset, write_dataset_to};
pub use synth::{generate_synthetic, SpeedRange, SynthLayout, SynthSpec};

/// Where a manifest came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSource {
    FileIngest,
    Synthetic { seed: u64, rng: String },
}

/// A collection of sequences with unique (participant, activity) keys.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    sequences: Vec<ActivitySequence>,
    pub source: DatasetSource,
}

impl DatasetManifest {
    pub fn new(sequences: Vec<ActivitySequence>, source: DatasetSource) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &sequences {
            if !seen.insert((s.participant_id, s.activity)) {
                return Err(HarError::Config(format!(
                    "duplicate sequence for participant {} activity {}",
                    s.participant_id,
                    s.activity.label()
                )));
            }
        }
        Ok(DatasetManifest { sequences, source })
    }

    pub fn empty() -> Self {
        DatasetManifest {
            sequences: Vec::new(),
            source: DatasetSource::FileIngest,
        }
    }

    pub fn sequences(&self) -> &[ActivitySequence] {
        &self.sequences
    }

    pub fn into_sequences(self) -> Vec<ActivitySequence> {
        self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Content hash over keys, frame indices and coordinate bits (FNV-1a, hex).
    pub fn fingerprint(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(PRIME);
            }
        };
        for s in &self.sequences {
            feed(&s.participant_id.to_le_bytes());
            feed(&[s.activity.label()]);
            for f in &s.frames {
                feed(&f.frame_index.to_le_bytes());
                for j in JointId::ALL {
                    for v in f.joint(j) {
                        feed(&v.to_bits().to_le_bytes());
                    }
                }
            }
        }
        format!("{h:016x}")
    }
}

//! Joint taxonomy, frames, activity classes and sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::HarError;

/// Number of tracked joints per frame.
pub const JOINT_COUNT: usize = 28;

/// Frames a sequence must hold before any modality can be extracted.
pub const MIN_SEQUENCE_FRAMES: usize = 51;

/// A point in the sensor's cartesian frame, meters.
pub type Point3 = [f64; 3];

/// The 28 tracked joints, in canonical index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum JointId {
    Head = 0,
    Neck,
    Chest,
    MiddleSpine,
    LowerSpine,
    Hip,
    CenterOfMass,
    CenterOfMassGroundProjection,
    REye,
    EffectorHead,
    RClavicle,
    RShoulder,
    RForearm,
    RHand,
    LClavicle,
    LShoulder,
    LForearm,
    LHand,
    RThigh,
    RShin,
    RFoot,
    RToe,
    EffectorRToe,
    LThigh,
    LShin,
    LFoot,
    LToe,
    EffectorLToe,
}

impl JointId {
    pub const ALL: [JointId; JOINT_COUNT] = [
        JointId::Head,
        JointId::Neck,
        JointId::Chest,
        JointId::MiddleSpine,
        JointId::LowerSpine,
        JointId::Hip,
        JointId::CenterOfMass,
        JointId::CenterOfMassGroundProjection,
        JointId::REye,
        JointId::EffectorHead,
        JointId::RClavicle,
        JointId::RShoulder,
        JointId::RForearm,
        JointId::RHand,
        JointId::LClavicle,
        JointId::LShoulder,
        JointId::LForearm,
        JointId::LHand,
        JointId::RThigh,
        JointId::RShin,
        JointId::RFoot,
        JointId::RToe,
        JointId::EffectorRToe,
        JointId::LThigh,
        JointId::LShin,
        JointId::LFoot,
        JointId::LToe,
        JointId::EffectorLToe,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<JointId> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            JointId::Head => "Head",
            JointId::Neck => "Neck",
            JointId::Chest => "Chest",
            JointId::MiddleSpine => "MiddleSpine",
            JointId::LowerSpine => "LowerSpine",
            JointId::Hip => "Hip",
            JointId::CenterOfMass => "CenterOfMass",
            JointId::CenterOfMassGroundProjection => "CenterOfMassGroundProjection",
            JointId::REye => "REye",
            JointId::EffectorHead => "EffectorHead",
            JointId::RClavicle => "RClavicle",
            JointId::RShoulder => "RShoulder",
            JointId::RForearm => "RForearm",
            JointId::RHand => "RHand",
            JointId::LClavicle => "LClavicle",
            JointId::LShoulder => "LShoulder",
            JointId::LForearm => "LForearm",
            JointId::LHand => "LHand",
            JointId::RThigh => "RThigh",
            JointId::RShin => "RShin",
            JointId::RFoot => "RFoot",
            JointId::RToe => "RToe",
            JointId::EffectorRToe => "EffectorRToe",
            JointId::LThigh => "LThigh",
            JointId::LShin => "LShin",
            JointId::LFoot => "LFoot",
            JointId::LToe => "LToe",
            JointId::EffectorLToe => "EffectorLToe",
        }
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointId {
    type Err = HarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JointId::ALL
            .iter()
            .copied()
            .find(|j| j.name() == s)
            .ok_or_else(|| HarError::Config(format!("unknown joint name {s:?}")))
    }
}

/// One captured posture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFrame {
    pub frame_index: u64,
    pub positions: [Point3; JOINT_COUNT],
}

impl SkeletonFrame {
    pub fn new(frame_index: u64, positions: [Point3; JOINT_COUNT]) -> Self {
        SkeletonFrame {
            frame_index,
            positions,
        }
    }

    pub fn joint(&self, joint: JointId) -> Point3 {
        self.positions[joint.index()]
    }

    /// Euclidean distance between the Head and Neck joints.
    pub fn head_neck_distance(&self) -> f64 {
        distance(self.joint(JointId::Head), self.joint(JointId::Neck))
    }
}

pub(crate) fn distance(a: Point3, b: Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivityKind {
    Stationary,
    Dynamic,
}

/// The nine recorded activities. Labels 1-4 are stationary, 5-9 dynamic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ActivityClass {
    SittingOfficeChair = 1,
    StandingTexting = 2,
    SittingStool = 3,
    LyingCouch = 4,
    Walking = 5,
    WalkingTexting = 6,
    CarryingObjects = 7,
    PullingObject = 8,
    Running = 9,
}

impl ActivityClass {
    pub const ALL: [ActivityClass; 9] = [
        ActivityClass::SittingOfficeChair,
        ActivityClass::StandingTexting,
        ActivityClass::SittingStool,
        ActivityClass::LyingCouch,
        ActivityClass::Walking,
        ActivityClass::WalkingTexting,
        ActivityClass::CarryingObjects,
        ActivityClass::PullingObject,
        ActivityClass::Running,
    ];

    pub fn label(self) -> u8 {
        self as u8
    }

    pub fn from_label(label: u8) -> Option<ActivityClass> {
        match label {
            1..=9 => Some(Self::ALL[usize::from(label) - 1]),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivityClass::SittingOfficeChair => "sitting on office chair",
            ActivityClass::StandingTexting => "standing and texting",
            ActivityClass::SittingStool => "sitting on stool",
            ActivityClass::LyingCouch => "lying on couch",
            ActivityClass::Walking => "walking",
            ActivityClass::WalkingTexting => "walking and texting",
            ActivityClass::CarryingObjects => "carrying objects",
            ActivityClass::PullingObject => "pulling object",
            ActivityClass::Running => "running",
        }
    }

    pub fn kind(self) -> ActivityKind {
        if self.label() <= 4 {
            ActivityKind::Stationary
        } else {
            ActivityKind::Dynamic
        }
    }
}

impl TryFrom<u8> for ActivityClass {
    type Error = HarError;

    fn try_from(label: u8) -> Result<Self, Self::Error> {
        ActivityClass::from_label(label).ok_or(HarError::InvalidLabel(i64::from(label)))
    }
}

impl From<ActivityClass> for u8 {
    fn from(c: ActivityClass) -> u8 {
        c.label()
    }
}

/// All frames recorded for one (participant, activity) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySequence {
    pub participant_id: u32,
    pub activity: ActivityClass,
    pub frames: Vec<SkeletonFrame>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    InvalidParticipant,
    TooFewFrames { found: usize, required: usize },
    NonFinite { joint: JointId },
    NonMonotoneIndex { previous: u64 },
    HeadNeckCoincide,
}

/// A broken invariant. `frame` is the offending frame index, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub frame: Option<u64>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(frame) = self.frame {
            write!(f, "frame {frame}: ")?;
        }
        match &self.kind {
            ViolationKind::InvalidParticipant => write!(f, "participant id must be >= 1"),
            ViolationKind::TooFewFrames { found, required } => {
                write!(f, "too few frames ({found} < {required})")
            }
            ViolationKind::NonFinite { joint } => write!(f, "non-finite coordinate in {joint}"),
            ViolationKind::NonMonotoneIndex { previous } => {
                write!(f, "frame index not increasing (previous {previous})")
            }
            ViolationKind::HeadNeckCoincide => write!(f, "Head and Neck coincide"),
        }
    }
}

/// Checks every sequence invariant and returns all violations; empty means valid.
pub fn validate_sequence(seq: &ActivitySequence) -> Vec<Violation> {
    let mut out = Vec::new();
    if seq.participant_id == 0 {
        out.push(Violation {
            frame: None,
            kind: ViolationKind::InvalidParticipant,
        });
    }
    if seq.frames.len() < MIN_SEQUENCE_FRAMES {
        out.push(Violation {
            frame: None,
            kind: ViolationKind::TooFewFrames {
                found: seq.frames.len(),
                required: MIN_SEQUENCE_FRAMES,
            },
        });
    }
    let mut previous: Option<u64> = None;
    for frame in &seq.frames {
        let at = Some(frame.frame_index);
        if let Some(prev) = previous {
            if frame.frame_index <= prev {
                out.push(Violation {
                    frame: at,
                    kind: ViolationKind::NonMonotoneIndex { previous: prev },
                });
            }
        }
        previous = Some(frame.frame_index);

        let mut finite = true;
        for joint in JointId::ALL {
            if frame.joint(joint).iter().any(|v| !v.is_finite()) {
                finite = false;
                out.push(Violation {
                    frame: at,
                    kind: ViolationKind::NonFinite { joint },
                });
            }
        }
        if finite && frame.head_neck_distance() <= 0.0 {
            out.push(Violation {
                frame: at,
                kind: ViolationKind::HeadNeckCoincide,
            });
        }
    }
    out
}

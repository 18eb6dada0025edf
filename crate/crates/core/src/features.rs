//! Posture feature extraction.
//!
//! A sequence is reduced to a fixed 51-frame window, optionally differenced
//! into per-frame velocities (50) or accelerations (49), and every remaining
//! frame becomes one feature row. Coordinate rows are head-relative offsets
//! divided by the head-neck distance, so they do not depend on where the
//! subject stands or how tall they are. Velocity and acceleration rows are
//! raw world-frame differences (dt = 1 frame).

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetManifest;
use crate::error::{HarError, Result};
use crate::skeleton::{ActivitySequence, JointId, Point3, SkeletonFrame, JOINT_COUNT};

/// Source window length for every modality.
pub const WINDOW_FRAMES: usize = 51;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Coordinates,
    Velocity,
    Acceleration,
}

impl Modality {
    pub const ALL: [Modality; 3] = [
        Modality::Coordinates,
        Modality::Velocity,
        Modality::Acceleration,
    ];

    /// Feature rows produced per sequence.
    pub fn frame_budget(self) -> usize {
        match self {
            Modality::Coordinates => 51,
            Modality::Velocity => 50,
            Modality::Acceleration => 49,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modality::Coordinates => "coordinates",
            Modality::Velocity => "velocity",
            Modality::Acceleration => "acceleration",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = HarError;

    fn from_str(s: &str) -> Result<Self> {
        Modality::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                HarError::Config(format!(
                    "unknown modality {s:?}; expected one of coordinates, velocity, acceleration"
                ))
            })
    }
}

/// Spatial dimensionality of each joint feature. `Two` drops depth (z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dims {
    Two,
    Three,
}

impl Dims {
    pub fn count(self) -> usize {
        match self {
            Dims::Two => 2,
            Dims::Three => 3,
        }
    }
}

impl TryFrom<u8> for Dims {
    type Error = HarError;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            2 => Ok(Dims::Two),
            3 => Ok(Dims::Three),
            _ => Err(HarError::Config(format!("dims must be 2 or 3, got {v}"))),
        }
    }
}

impl From<Dims> for u8 {
    fn from(d: Dims) -> u8 {
        d.count() as u8
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

impl FromStr for Dims {
    type Err = HarError;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<u8>()
            .map_err(|_| HarError::Config(format!("dims must be 2 or 3, got {s:?}")))
            .and_then(Dims::try_from)
    }
}

const C9: [JointId; 9] = [
    JointId::Head,
    JointId::Neck,
    JointId::Chest,
    JointId::Hip,
    JointId::CenterOfMass,
    JointId::RHand,
    JointId::LHand,
    JointId::RFoot,
    JointId::LFoot,
];

const C18_EXTRA: [JointId; 9] = [
    JointId::MiddleSpine,
    JointId::RShoulder,
    JointId::RForearm,
    JointId::LShoulder,
    JointId::LForearm,
    JointId::RThigh,
    JointId::RShin,
    JointId::LThigh,
    JointId::LShin,
];

/// Which joints enter the posture vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointSubset {
    C9,
    C18,
    C28,
    Custom(Vec<JointId>),
}

impl JointSubset {
    /// A custom subset: nonempty, duplicate-free and without Head. Stored in
    /// canonical order.
    pub fn custom(joints: Vec<JointId>) -> Result<Self> {
        if joints.is_empty() {
            return Err(HarError::Config("custom joint list is empty".into()));
        }
        if joints.contains(&JointId::Head) {
            return Err(HarError::Config(
                "custom joint list must not contain the Head reference joint".into(),
            ));
        }
        let mut sorted = joints;
        sorted.sort();
        let before = sorted.len();
        sorted.dedup();
        if sorted.len() != before {
            return Err(HarError::Config("custom joint list has duplicates".into()));
        }
        Ok(JointSubset::Custom(sorted))
    }

    /// Members in canonical order (Head included where it belongs).
    pub fn members(&self) -> Vec<JointId> {
        let mut v: Vec<JointId> = match self {
            JointSubset::C9 => C9.to_vec(),
            JointSubset::C18 => C9.iter().chain(C18_EXTRA.iter()).copied().collect(),
            JointSubset::C28 => JointId::ALL.to_vec(),
            JointSubset::Custom(list) => list.clone(),
        };
        v.sort();
        v
    }

    /// Members that produce a feature: the Head reference is dropped.
    pub fn feature_joints(&self) -> Vec<JointId> {
        self.members()
            .into_iter()
            .filter(|j| *j != JointId::Head)
            .collect()
    }

    pub fn feature_dim(&self, dims: Dims) -> usize {
        self.feature_joints().len() * dims.count()
    }
}

impl fmt::Display for JointSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointSubset::C9 => f.write_str("c9"),
            JointSubset::C18 => f.write_str("c18"),
            JointSubset::C28 => f.write_str("c28"),
            JointSubset::Custom(list) => {
                let names: Vec<&str> = list.iter().map(|j| j.name()).collect();
                write!(f, "list:{}", names.join(","))
            }
        }
    }
}

impl FromStr for JointSubset {
    type Err = HarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c9" => Ok(JointSubset::C9),
            "c18" => Ok(JointSubset::C18),
            "c28" => Ok(JointSubset::C28),
            _ => match s.strip_prefix("list:") {
                Some(rest) => JointSubset::custom(
                    rest.split(',')
                        .filter(|n| !n.is_empty())
                        .map(|n| n.trim().parse())
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => Err(HarError::Config(format!(
                    "unknown joint subset {s:?}; expected one of {{c9, c18, c28}} or list:<names>"
                ))),
            },
        }
    }
}

/// How the 51 source frames are picked from a longer sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameWindow {
    /// The centered contiguous window.
    #[default]
    Centered,
    /// Explicit positions (0-based, into the frame list), applied to every sequence.
    Explicit(Vec<usize>),
}

/// One feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct PostureFeature(pub Vec<f64>);

impl PostureFeature {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Picks the 51-frame source window.
pub fn select_frames(seq: &ActivitySequence, window: &FrameWindow) -> Result<Vec<SkeletonFrame>> {
    let n = seq.frames.len();
    if n < WINDOW_FRAMES {
        return Err(HarError::SequenceTooShort {
            frames: n,
            required: WINDOW_FRAMES,
        });
    }
    match window {
        FrameWindow::Centered => {
            let start = (n - WINDOW_FRAMES) / 2;
            Ok(seq.frames[start..start + WINDOW_FRAMES].to_vec())
        }
        FrameWindow::Explicit(positions) => {
            if positions.len() != WINDOW_FRAMES {
                return Err(HarError::Config(format!(
                    "explicit frame list must hold {WINDOW_FRAMES} positions, got {}",
                    positions.len()
                )));
            }
            if positions.windows(2).any(|w| w[0] >= w[1]) {
                return Err(HarError::Config(
                    "explicit frame positions must be strictly increasing".into(),
                ));
            }
            positions
                .iter()
                .map(|&i| {
                    seq.frames.get(i).cloned().ok_or_else(|| {
                        HarError::Config(format!("frame position {i} out of range (0..{n})"))
                    })
                })
                .collect()
        }
    }
}

pub type JointVectors = [Point3; JOINT_COUNT];

fn difference(series: &[JointVectors]) -> Vec<JointVectors> {
    series
        .windows(2)
        .map(|w| {
            let mut d = [[0.0; 3]; JOINT_COUNT];
            for (j, out) in d.iter_mut().enumerate() {
                for k in 0..3 {
                    out[k] = w[1][j][k] - w[0][j][k];
                }
            }
            d
        })
        .collect()
}

/// Positions, first differences or second differences of the window.
pub fn derive_modality(frames: &[SkeletonFrame], modality: Modality) -> Vec<JointVectors> {
    let positions: Vec<JointVectors> = frames.iter().map(|f| f.positions).collect();
    match modality {
        Modality::Coordinates => positions,
        Modality::Velocity => difference(&positions),
        Modality::Acceleration => difference(&difference(&positions)),
    }
}

/// Head-relative joint offsets scaled by the head-neck distance.
pub fn normalize_posture(
    joints: &JointVectors,
    subset: &JointSubset,
    dims: Dims,
) -> Result<PostureFeature> {
    let head = joints[JointId::Head.index()];
    let neck = joints[JointId::Neck.index()];
    let scale = crate::skeleton::distance(head, neck);
    if scale.is_nan() || scale <= 0.0 {
        return Err(HarError::DegenerateReference { frame: 0 });
    }
    let d = dims.count();
    let mut out = Vec::with_capacity(subset.feature_dim(dims));
    for j in subset.feature_joints() {
        let p = joints[j.index()];
        for k in 0..d {
            out.push((p[k] - head[k]) / scale);
        }
    }
    Ok(PostureFeature(out))
}

/// Raw differenced vectors of the subset joints, same layout as
/// [`normalize_posture`].
pub fn motion_feature(vectors: &JointVectors, subset: &JointSubset, dims: Dims) -> PostureFeature {
    let d = dims.count();
    PostureFeature(
        subset
            .feature_joints()
            .into_iter()
            .flat_map(|j| vectors[j.index()][..d].to_vec())
            .collect(),
    )
}

/// Everything that determines the feature layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub modality: Modality,
    pub subset: JointSubset,
    pub dims: Dims,
    #[serde(default)]
    pub window: FrameWindow,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            modality: Modality::Coordinates,
            subset: JointSubset::C28,
            dims: Dims::Three,
            window: FrameWindow::Centered,
        }
    }
}

/// Feature rows for one sequence.
pub fn sequence_features(
    seq: &ActivitySequence,
    cfg: &ExtractionConfig,
) -> Result<Vec<PostureFeature>> {
    let frames = select_frames(seq, &cfg.window)?;
    let vectors = derive_modality(&frames, cfg.modality);
    match cfg.modality {
        Modality::Coordinates => vectors
            .iter()
            .zip(frames.iter())
            .map(|(v, f)| {
                normalize_posture(v, &cfg.subset, cfg.dims).map_err(|_| {
                    HarError::DegenerateReference {
                        frame: f.frame_index,
                    }
                })
            })
            .collect(),
        Modality::Velocity | Modality::Acceleration => Ok(vectors
            .iter()
            .map(|v| motion_feature(v, &cfg.subset, cfg.dims))
            .collect()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub extraction: ExtractionConfig,
    pub manifest_id: String,
}

/// Stacked feature rows with optional labels. `groups` carries the
/// participant of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Array2<f64>,
    pub labels: Option<Vec<u8>>,
    pub groups: Vec<u32>,
    pub provenance: Provenance,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    pub fn require_labels(&self) -> Result<&[u8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| HarError::Config("feature matrix is unlabeled".into()))
    }
}

/// Rows ordered by (participant, activity, frame).
pub fn build_feature_matrix(
    manifest: &DatasetManifest,
    cfg: &ExtractionConfig,
    labeled: bool,
) -> Result<FeatureMatrix> {
    let mut order: Vec<&ActivitySequence> = manifest.sequences().iter().collect();
    order.sort_by_key(|s| (s.participant_id, s.activity));

    let dim = cfg.subset.feature_dim(cfg.dims);
    let budget = cfg.modality.frame_budget();
    let mut data = Vec::with_capacity(order.len() * budget * dim);
    let mut labels = Vec::with_capacity(order.len() * budget);
    let mut groups = Vec::with_capacity(order.len() * budget);
    for seq in order {
        let rows = sequence_features(seq, cfg)?;
        debug_assert_eq!(rows.len(), budget);
        for r in rows {
            data.extend_from_slice(r.as_slice());
            labels.push(seq.activity.label());
            groups.push(seq.participant_id);
        }
    }
    let n = groups.len();
    let rows = Array2::from_shape_vec((n, dim), data).expect("row layout is consistent");
    Ok(FeatureMatrix {
        rows,
        labels: labeled.then_some(labels),
        groups,
        provenance: Provenance {
            extraction: cfg.clone(),
            manifest_id: manifest.fingerprint(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::ActivityClass;

    fn frame_with(f: impl Fn(usize, usize) -> f64, index: u64) -> SkeletonFrame {
        let mut positions = [[0.0; 3]; JOINT_COUNT];
        for (j, p) in positions.iter_mut().enumerate() {
            for (k, v) in p.iter_mut().enumerate() {
                *v = f(j, k);
            }
        }
        SkeletonFrame::new(index, positions)
    }

    fn base(j: usize, k: usize) -> f64 {
        [
            0.1 * j as f64,
            1.7 - 0.05 * j as f64,
            3.0 + 0.01 * (j % 5) as f64,
        ][k]
    }

    fn seq_of(n: usize) -> ActivitySequence {
        ActivitySequence {
            participant_id: 1,
            activity: ActivityClass::Walking,
            frames: (0..n as u64).map(|i| frame_with(base, i)).collect(),
        }
    }

    #[test]
    fn budgets_and_dimensions() {
        assert_eq!(Modality::Coordinates.frame_budget(), 51);
        assert_eq!(Modality::Velocity.frame_budget(), 50);
        assert_eq!(Modality::Acceleration.frame_budget(), 49);
        let cases = [
            (JointSubset::C9, 24, 16),
            (JointSubset::C18, 51, 34),
            (JointSubset::C28, 81, 54),
        ];
        for (s, d3, d2) in cases {
            assert_eq!(s.feature_dim(Dims::Three), d3);
            assert_eq!(s.feature_dim(Dims::Two), d2);
        }
        assert_eq!(JointSubset::C9.members().len(), 9);
        assert_eq!(JointSubset::C18.members().len(), 18);
        assert_eq!(JointSubset::C28.members().len(), 28);
    }

    #[test]
    fn custom_subset_rules() {
        assert!(JointSubset::custom(vec![]).is_err());
        assert!(JointSubset::custom(vec![JointId::Head, JointId::Neck]).is_err());
        assert!(JointSubset::custom(vec![JointId::Neck, JointId::Neck]).is_err());
        let s: JointSubset = "list:RHand,Neck".parse().unwrap();
        assert_eq!(s.members(), vec![JointId::Neck, JointId::RHand]);
        assert_eq!(s.feature_dim(Dims::Three), 6);
        assert_eq!(s.to_string(), "list:Neck,RHand");
        let err = "c12".parse::<JointSubset>().unwrap_err().to_string();
        assert!(err.contains("{c9, c18, c28}"));
    }

    #[test]
    fn window_selection() {
        let s = seq_of(51);
        let w = select_frames(&s, &FrameWindow::Centered).unwrap();
        assert_eq!(w, s.frames);

        let s = seq_of(101);
        let w = select_frames(&s, &FrameWindow::Centered).unwrap();
        assert_eq!(w.first().unwrap().frame_index, 25);
        assert_eq!(w.last().unwrap().frame_index, 75);

        assert!(matches!(
            select_frames(&seq_of(50), &FrameWindow::Centered),
            Err(HarError::SequenceTooShort { frames: 50, .. })
        ));

        let explicit: Vec<usize> = (0..51).map(|i| 2 * i).collect();
        let w = select_frames(&s, &FrameWindow::Explicit(explicit)).unwrap();
        assert_eq!(w[50].frame_index, 100);
        assert!(select_frames(&s, &FrameWindow::Explicit(vec![0, 1])).is_err());
    }

    #[test]
    fn differences_of_simple_motions() {
        let frames: Vec<SkeletonFrame> = (0..51u64).map(|i| frame_with(base, i)).collect();
        let v = derive_modality(&frames, Modality::Velocity);
        assert_eq!(v.len(), 50);
        assert!(v.iter().flatten().flatten().all(|x| *x == 0.0));

        let hip = JointId::Hip.index();
        let linear: Vec<SkeletonFrame> = (0..51u64)
            .map(|i| {
                let mut f = frame_with(base, i);
                f.positions[hip][0] = 0.1 * i as f64;
                f
            })
            .collect();
        let v = derive_modality(&linear, Modality::Velocity);
        assert!(v.iter().all(|x| (x[hip][0] - 0.1).abs() < 1e-12));
        let a = derive_modality(&linear, Modality::Acceleration);
        assert_eq!(a.len(), 49);
        assert!(a.iter().all(|x| x[hip][0].abs() < 1e-12));

        // quadratic: x = 0.01 t^2, second difference 0.02
        let quad: Vec<SkeletonFrame> = (0..51u64)
            .map(|i| {
                let mut f = frame_with(base, i);
                f.positions[hip][0] = 0.01 * (i * i) as f64;
                f
            })
            .collect();
        let a = derive_modality(&quad, Modality::Acceleration);
        assert!(a.iter().all(|x| (x[hip][0] - 0.02).abs() < 1e-9));

        // acceleration is exactly the difference of velocity
        let v = derive_modality(&quad, Modality::Velocity);
        assert_eq!(difference(&v), a);
    }

    #[test]
    fn normalization_examples() {
        let f = frame_with(base, 0);
        let mut same = f.positions;
        let head = same[0];
        for p in same.iter_mut().skip(2) {
            *p = head;
        }
        same[1] = [head[0], head[1] - 0.2, head[2]];
        let feat = normalize_posture(
            &same,
            &JointSubset::custom(vec![JointId::Chest]).unwrap(),
            Dims::Three,
        )
        .unwrap();
        assert_eq!(feat.0, vec![0.0, 0.0, 0.0]);

        // neck feature is the unit head->neck direction
        let n = normalize_posture(&f.positions, &JointSubset::C28, Dims::Three).unwrap();
        let norm = (n.0[0] * n.0[0] + n.0[1] * n.0[1] + n.0[2] * n.0[2]).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);

        let moved = f.positions.map(|p| [p[0] + 1.0, p[1] + 2.0, p[2] + 3.0]);
        let scaled = f.positions.map(|p| [2.0 * p[0], 2.0 * p[1], 2.0 * p[2]]);
        for other in [moved, scaled] {
            let m = normalize_posture(&other, &JointSubset::C28, Dims::Three).unwrap();
            for (a, b) in n.0.iter().zip(m.0.iter()) {
                assert!((a - b).abs() <= 1e-9);
            }
        }

        let two = normalize_posture(&f.positions, &JointSubset::C9, Dims::Two).unwrap();
        assert_eq!(two.len(), 16);

        let mut degenerate = f.positions;
        degenerate[1] = degenerate[0];
        assert!(normalize_posture(&degenerate, &JointSubset::C9, Dims::Three).is_err());
    }

    #[test]
    fn rotation_changes_features() {
        let f = frame_with(base, 0);
        let rotated = f.positions.map(|p| [-p[1], p[0], p[2]]);
        let a = normalize_posture(&f.positions, &JointSubset::C28, Dims::Three).unwrap();
        let b = normalize_posture(&rotated, &JointSubset::C28, Dims::Three).unwrap();
        let max =
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
        assert!(max > 1e-3);
    }
}

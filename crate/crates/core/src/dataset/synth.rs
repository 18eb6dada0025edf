//! Deterministic synthetic recordings of the nine activities.
//!
//! Each class has a keyframe posture built by planar forward kinematics
//! (torso pitch, shoulder/elbow and hip/knee flexion). Dynamic classes add a
//! sinusoidal gait phase to the limbs and a constant translation of the whole
//! body along the heading. Participants differ in body scale, start position,
//! gait phase, gait speed and a few degrees of postural style. Isotropic
//! Gaussian noise is added per joint and frame.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarError, Result};
use crate::rng::{rng_from, RNG_ALGORITHM};
use crate::skeleton::{
    ActivityClass, ActivityKind, ActivitySequence, JointId, Point3, SkeletonFrame, JOINT_COUNT,
};

use super::{DatasetManifest, DatasetSource};

/// Uniform range of hip speed, meters per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedRange {
    pub min: f64,
    pub max: f64,
}

impl SpeedRange {
    pub const fn new(min: f64, max: f64) -> Self {
        SpeedRange { min, max }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// How class templates differ from each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthLayout {
    /// Articulated postures per activity.
    Standard,
    /// All classes share the same x/y silhouette; they differ only in how far
    /// the arms reach along the depth axis.
    DepthSeparated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_participants: u32,
    pub frames_per_sequence: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Hip speed per dynamic class, indexed by label 5..=9.
    pub gait_speed: [SpeedRange; 5],
    pub layout: SynthLayout,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_participants: 16,
            frames_per_sequence: 60,
            noise_sigma: 0.01,
            seed: 42,
            gait_speed: [
                SpeedRange::new(0.016, 0.020),
                SpeedRange::new(0.021, 0.025),
                SpeedRange::new(0.021, 0.025),
                SpeedRange::new(0.010, 0.014),
                SpeedRange::new(0.045, 0.060),
            ],
            layout: SynthLayout::Standard,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_participants == 0 {
            return Err(HarError::Config("n_participants must be positive".into()));
        }
        if self.frames_per_sequence < crate::skeleton::MIN_SEQUENCE_FRAMES {
            return Err(HarError::Config(format!(
                "frames_per_sequence must be at least {}",
                crate::skeleton::MIN_SEQUENCE_FRAMES
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(HarError::Config(
                "noise_sigma must be finite and >= 0".into(),
            ));
        }
        for r in &self.gait_speed {
            if !(r.min > 0.0 && r.min <= r.max && r.max.is_finite()) {
                return Err(HarError::Config(format!(
                    "invalid gait speed range [{}, {}]",
                    r.min, r.max
                )));
            }
        }
        Ok(())
    }

    pub fn speed_range(&self, class: ActivityClass) -> Option<SpeedRange> {
        match class.kind() {
            ActivityKind::Stationary => None,
            ActivityKind::Dynamic => Some(self.gait_speed[usize::from(class.label()) - 5]),
        }
    }
}

/// Joint angles in degrees, measured from the downward vertical, positive
/// toward the facing direction.
#[derive(Debug, Clone, Copy)]
struct Posture {
    pelvis_height: f64,
    torso_pitch: f64,
    head_pitch: f64,
    r_shoulder: f64,
    r_elbow: f64,
    l_shoulder: f64,
    l_elbow: f64,
    r_hip: f64,
    r_knee: f64,
    l_hip: f64,
    l_knee: f64,
    lying: bool,
}

#[derive(Debug, Clone, Copy)]
struct Gait {
    period: f64,
    leg_swing: f64,
    knee_lift: f64,
    arm_swing: f64,
    bob: f64,
}

const STANDING: Posture = Posture {
    pelvis_height: 0.95,
    torso_pitch: 0.0,
    head_pitch: 0.0,
    r_shoulder: 0.0,
    r_elbow: 10.0,
    l_shoulder: 0.0,
    l_elbow: 10.0,
    r_hip: 0.0,
    r_knee: 0.0,
    l_hip: 0.0,
    l_knee: 0.0,
    lying: false,
};

fn template(class: ActivityClass) -> (Posture, Option<Gait>) {
    let arms = |s: f64, e: f64, p: Posture| Posture {
        r_shoulder: s,
        r_elbow: e,
        l_shoulder: s,
        l_elbow: e,
        ..p
    };
    let legs = |h: f64, k: f64, p: Posture| Posture {
        r_hip: h,
        r_knee: k,
        l_hip: h,
        l_knee: k,
        ..p
    };
    match class {
        ActivityClass::SittingOfficeChair => (
            legs(
                90.0,
                90.0,
                arms(
                    25.0,
                    65.0,
                    Posture {
                        pelvis_height: 0.48,
                        torso_pitch: -12.0,
                        ..STANDING
                    },
                ),
            ),
            None,
        ),
        ActivityClass::StandingTexting => (
            arms(
                25.0,
                100.0,
                Posture {
                    torso_pitch: 5.0,
                    head_pitch: 35.0,
                    ..STANDING
                },
            ),
            None,
        ),
        ActivityClass::SittingStool => (
            legs(
                70.0,
                115.0,
                arms(
                    10.0,
                    45.0,
                    Posture {
                        pelvis_height: 0.70,
                        torso_pitch: 12.0,
                        ..STANDING
                    },
                ),
            ),
            None,
        ),
        ActivityClass::LyingCouch => (
            legs(
                15.0,
                25.0,
                arms(
                    15.0,
                    30.0,
                    Posture {
                        lying: true,
                        ..STANDING
                    },
                ),
            ),
            None,
        ),
        ActivityClass::Walking => (
            arms(
                0.0,
                15.0,
                Posture {
                    torso_pitch: 4.0,
                    ..STANDING
                },
            ),
            Some(Gait {
                period: 30.0,
                leg_swing: 25.0,
                knee_lift: 30.0,
                arm_swing: 20.0,
                bob: 0.02,
            }),
        ),
        ActivityClass::WalkingTexting => (
            arms(
                25.0,
                100.0,
                Posture {
                    torso_pitch: 6.0,
                    head_pitch: 35.0,
                    ..STANDING
                },
            ),
            Some(Gait {
                period: 32.0,
                leg_swing: 20.0,
                knee_lift: 25.0,
                arm_swing: 0.0,
                bob: 0.015,
            }),
        ),
        ActivityClass::CarryingObjects => (
            arms(
                45.0,
                55.0,
                Posture {
                    torso_pitch: -6.0,
                    ..STANDING
                },
            ),
            Some(Gait {
                period: 32.0,
                leg_swing: 20.0,
                knee_lift: 25.0,
                arm_swing: 0.0,
                bob: 0.015,
            }),
        ),
        ActivityClass::PullingObject => (
            arms(
                -35.0,
                10.0,
                Posture {
                    torso_pitch: 25.0,
                    ..STANDING
                },
            ),
            Some(Gait {
                period: 36.0,
                leg_swing: 18.0,
                knee_lift: 25.0,
                arm_swing: 0.0,
                bob: 0.01,
            }),
        ),
        ActivityClass::Running => (
            arms(
                -25.0,
                90.0,
                Posture {
                    torso_pitch: 18.0,
                    pelvis_height: 0.92,
                    ..STANDING
                },
            ),
            Some(Gait {
                period: 16.0,
                leg_swing: 40.0,
                knee_lift: 70.0,
                arm_swing: 35.0,
                bob: 0.04,
            }),
        ),
    }
}

fn rad(deg: f64) -> f64 {
    deg * PI / 180.0
}

/// Unit vector at `deg` from straight down, tilted toward the facing
/// direction (-z in the body frame). Returned as (dy, dz).
fn limb_dir(deg: f64) -> (f64, f64) {
    let t = rad(deg);
    (-t.cos(), -t.sin())
}

fn offset(p: Point3, len: f64, (dy, dz): (f64, f64)) -> Point3 {
    [p[0], p[1] + len * dy, p[2] + len * dz]
}

/// Body-frame joint positions: pelvis above the origin, facing -z, +x right.
fn body_joints(p: &Posture) -> [Point3; JOINT_COUNT] {
    let mut j = [[0.0; 3]; JOINT_COUNT];
    let set = |j: &mut [Point3; JOINT_COUNT], id: JointId, v: Point3| j[id.index()] = v;

    let hip = [0.0, p.pelvis_height, 0.0];
    let tp = rad(p.torso_pitch);
    let up = (tp.cos(), -tp.sin());
    let along = |d: f64, dx: f64| [hip[0] + dx, hip[1] + d * up.0, hip[2] + d * up.1];

    set(&mut j, JointId::Hip, hip);
    set(&mut j, JointId::LowerSpine, along(0.10, 0.0));
    set(&mut j, JointId::MiddleSpine, along(0.25, 0.0));
    set(&mut j, JointId::Chest, along(0.40, 0.0));
    let neck = along(0.55, 0.0);
    set(&mut j, JointId::Neck, neck);
    set(&mut j, JointId::CenterOfMass, along(0.08, 0.0));

    let hp = rad(p.torso_pitch + p.head_pitch);
    let head_up = (hp.cos(), -hp.sin());
    let head_fwd = (-hp.sin(), -hp.cos());
    let head = [
        neck[0],
        neck[1] + 0.15 * head_up.0,
        neck[2] + 0.15 * head_up.1,
    ];
    set(&mut j, JointId::Head, head);
    set(
        &mut j,
        JointId::EffectorHead,
        [
            neck[0],
            neck[1] + 0.27 * head_up.0,
            neck[2] + 0.27 * head_up.1,
        ],
    );
    set(
        &mut j,
        JointId::REye,
        [
            head[0] + 0.03,
            head[1] + 0.03 * head_up.0 + 0.08 * head_fwd.0,
            head[2] + 0.03 * head_up.1 + 0.08 * head_fwd.1,
        ],
    );

    for (side, clav, shoulder, forearm, hand, s_deg, e_deg) in [
        (
            1.0,
            JointId::RClavicle,
            JointId::RShoulder,
            JointId::RForearm,
            JointId::RHand,
            p.r_shoulder,
            p.r_elbow,
        ),
        (
            -1.0,
            JointId::LClavicle,
            JointId::LShoulder,
            JointId::LForearm,
            JointId::LHand,
            p.l_shoulder,
            p.l_elbow,
        ),
    ] {
        set(&mut j, clav, along(0.50, 0.08 * side));
        let sh = along(0.47, 0.18 * side);
        set(&mut j, shoulder, sh);
        let a = p.torso_pitch + s_deg;
        let elbow = offset(sh, 0.28, limb_dir(a));
        set(&mut j, forearm, elbow);
        set(&mut j, hand, offset(elbow, 0.26, limb_dir(a + e_deg)));
    }

    for (side, thigh, shin, foot, toe, eff, h_deg, k_deg) in [
        (
            1.0,
            JointId::RThigh,
            JointId::RShin,
            JointId::RFoot,
            JointId::RToe,
            JointId::EffectorRToe,
            p.r_hip,
            p.r_knee,
        ),
        (
            -1.0,
            JointId::LThigh,
            JointId::LShin,
            JointId::LFoot,
            JointId::LToe,
            JointId::EffectorLToe,
            p.l_hip,
            p.l_knee,
        ),
    ] {
        let t = [0.10 * side, hip[1] - 0.03, 0.0];
        set(&mut j, thigh, t);
        let knee = offset(t, 0.42, limb_dir(h_deg));
        set(&mut j, shin, knee);
        let ankle = offset(knee, 0.42, limb_dir(h_deg - k_deg));
        set(&mut j, foot, ankle);
        set(&mut j, toe, [ankle[0], ankle[1] - 0.05, ankle[2] - 0.14]);
        set(&mut j, eff, [ankle[0], ankle[1] - 0.07, ankle[2] - 0.19]);
    }

    if p.lying {
        // lay the body along +x on a couch 0.45 m high
        for q in j.iter_mut() {
            let (x, y) = (q[0], q[1]);
            *q = [y - p.pelvis_height, 0.45 - x, q[2]];
        }
    }
    j
}

/// Per-(participant, activity) draw that stays fixed across frames.
#[derive(Debug, Clone, Copy)]
struct Individual {
    scale: f64,
    origin: (f64, f64),
    yaw_deg: f64,
    phase: f64,
    speed: f64,
    style: [f64; 9],
    height_jitter: f64,
}

fn draw_individual<R: Rng>(rng: &mut R, spec: &SynthSpec, class: ActivityClass) -> Individual {
    let style_dist = Normal::new(0.0, 3.0).expect("valid normal");
    let mut style = [0.0; 9];
    for s in style.iter_mut() {
        *s = style_dist.sample(rng);
    }
    let speed = spec
        .speed_range(class)
        .map(|r| rng.random_range(r.min..=r.max))
        .unwrap_or(0.0);
    Individual {
        scale: rng.random_range(0.92..=1.08),
        origin: (rng.random_range(-1.0..=1.0), rng.random_range(2.5..=4.0)),
        yaw_deg: rng.random_range(-5.0..=5.0),
        phase: rng.random_range(0.0..2.0 * PI),
        speed,
        style,
        height_jitter: rng.random_range(-0.02..=0.02),
    }
}

fn rotate_yaw(p: Point3, yaw_deg: f64) -> Point3 {
    let (s, c) = rad(yaw_deg).sin_cos();
    [p[0] * c + p[2] * s, p[1], -p[0] * s + p[2] * c]
}

/// Noise-free joint positions of frame `t` in the sensor frame.
fn clean_frame(
    class: ActivityClass,
    layout: SynthLayout,
    ind: &Individual,
    t: usize,
) -> [Point3; JOINT_COUNT] {
    let tf = t as f64;
    let (mut posture, gait, heading) = match layout {
        SynthLayout::Standard => {
            let (mut p, gait) = template(class);
            p.torso_pitch += ind.style[0];
            p.r_shoulder += ind.style[1];
            p.l_shoulder += ind.style[2];
            p.r_elbow += ind.style[3];
            p.l_elbow += ind.style[4];
            p.r_hip += ind.style[5];
            p.l_hip += ind.style[6];
            p.r_knee += ind.style[7].abs();
            p.l_knee += ind.style[8].abs();
            p.pelvis_height += ind.height_jitter;
            // walkers cross the field of view along +x; everyone else faces the sensor
            let heading = if gait.is_some() { -90.0 } else { 0.0 };
            (p, gait, heading + ind.yaw_deg)
        }
        SynthLayout::DepthSeparated => (STANDING, None, 0.0),
    };

    if let Some(g) = gait {
        let phi = 2.0 * PI * tf / g.period + ind.phase;
        let s = phi.sin();
        posture.r_hip += g.leg_swing * s;
        posture.l_hip -= g.leg_swing * s;
        posture.r_knee += g.knee_lift * (-s).max(0.0);
        posture.l_knee += g.knee_lift * s.max(0.0);
        posture.r_shoulder -= g.arm_swing * s;
        posture.l_shoulder += g.arm_swing * s;
        posture.pelvis_height += g.bob * (2.0 * phi).cos();
    }

    let mut joints = body_joints(&posture);

    if layout == SynthLayout::DepthSeparated {
        let reach = 0.06 * f64::from(class.label() - 1);
        for (id, k) in [
            (JointId::RHand, 1.0),
            (JointId::LHand, 1.0),
            (JointId::RForearm, 0.5),
            (JointId::LForearm, 0.5),
        ] {
            joints[id.index()][2] -= reach * k;
        }
    }

    let progress = ind.speed * tf;
    let forward = rotate_yaw([0.0, 0.0, -1.0], heading);
    for q in joints.iter_mut() {
        let scaled = [q[0] * ind.scale, q[1] * ind.scale, q[2] * ind.scale];
        let r = rotate_yaw(scaled, heading);
        *q = [
            r[0] + ind.origin.0 + progress * forward[0],
            r[1],
            r[2] + ind.origin.1 + progress * forward[2],
        ];
    }
    let com = joints[JointId::CenterOfMass.index()];
    joints[JointId::CenterOfMassGroundProjection.index()] = [com[0], 0.0, com[2]];
    joints
}

fn quantize(v: f64) -> f64 {
    super::format_coordinate(v)
        .parse()
        .expect("formatted coordinate parses")
}

fn generate_sequence(spec: &SynthSpec, participant: u32, class: ActivityClass) -> ActivitySequence {
    let key = [u64::from(participant), u64::from(class.label())];
    let mut rng = rng_from(spec.seed, &key);
    let ind = draw_individual(&mut rng, spec, class);
    let noise =
        (spec.noise_sigma > 0.0).then(|| Normal::new(0.0, spec.noise_sigma).expect("valid sigma"));

    let frames = (0..spec.frames_per_sequence)
        .map(|t| {
            let mut joints = clean_frame(class, spec.layout, &ind, t);
            for q in joints.iter_mut() {
                for v in q.iter_mut() {
                    if let Some(n) = &noise {
                        *v += n.sample(&mut rng);
                    }
                    *v = quantize(*v);
                }
            }
            SkeletonFrame::new(t as u64, joints)
        })
        .collect();

    ActivitySequence {
        participant_id: participant,
        activity: class,
        frames,
    }
}

/// Generates `n_participants × 9` sequences ordered by (participant, activity).
pub fn generate_synthetic(spec: &SynthSpec) -> Result<DatasetManifest> {
    spec.validate()?;
    let keys: Vec<(u32, ActivityClass)> = (1..=spec.n_participants)
        .flat_map(|p| ActivityClass::ALL.into_iter().map(move |c| (p, c)))
        .collect();
    let sequences = keys
        .par_iter()
        .map(|&(p, c)| generate_sequence(spec, p, c))
        .collect();
    DatasetManifest::new(
        sequences,
        DatasetSource::Synthetic {
            seed: spec.seed,
            rng: RNG_ALGORITHM.to_string(),
        },
    )
}

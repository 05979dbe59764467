//! Serial chains described with modified Denavit-Hartenberg parameters
//! (Khalil-Dombre ordering) and their direct kinematics.
//!
//! Every joint is revolute. The transform from frame `i-1` to frame `i` is
//!
//! ```text
//! Rot_x(alpha_prev) * Trans_x(a_prev) * Rot_z(theta + theta_offset) * Trans_z(d)
//! ```
//!
//! Link `i` is drawn from the origin of frame `i` to the origin of frame
//! `i+1`. The last link ends at a fixed [`Tip`] frame carried by the last
//! joint, so an `n`-joint chain always has `n` link segments.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    #[serde(default)]
    pub alpha_prev: f64,
    pub a_prev: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
    pub limit_lo: f64,
    pub limit_hi: f64,
    #[serde(default)]
    pub link_radius: f64,
}

impl JointSpec {
    /// A joint rotating about the same axis as its predecessor, offset by
    /// `a_prev` along the previous link.
    pub fn planar(a_prev: f64, limits: (f64, f64), link_radius: f64) -> Self {
        JointSpec {
            alpha_prev: 0.0,
            a_prev,
            d: 0.0,
            theta_offset: 0.0,
            limit_lo: limits.0,
            limit_hi: limits.1,
            link_radius,
        }
    }

    pub fn neutral(&self) -> f64 {
        0.5 * (self.limit_lo + self.limit_hi)
    }

    pub fn within_limits(&self, angle: f64) -> bool {
        angle >= self.limit_lo && angle <= self.limit_hi
    }

    fn validate(&self, index: usize) -> Result<()> {
        let finite = [
            self.alpha_prev,
            self.a_prev,
            self.d,
            self.theta_offset,
            self.limit_lo,
            self.limit_hi,
            self.link_radius,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid(format!("joint {index}: non-finite parameter")));
        }
        if self.limit_lo >= self.limit_hi {
            return Err(Error::invalid(format!(
                "joint {index}: limit_lo {} must be below limit_hi {}",
                self.limit_lo, self.limit_hi
            )));
        }
        if self.link_radius < 0.0 {
            return Err(Error::invalid(format!("joint {index}: negative link radius")));
        }
        Ok(())
    }
}

/// Fixed frame at the distal end of the last link.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tip {
    pub alpha: f64,
    pub a: f64,
    pub d: f64,
}

/// Placement of the chain base in the world: translation followed by
/// roll/pitch/yaw (radians, extrinsic x-y-z).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasePose {
    pub position: [f64; 3],
    pub rpy: [f64; 3],
}

impl BasePose {
    pub fn isometry(&self) -> Isometry3<f64> {
        let [x, y, z] = self.position;
        let [r, p, yaw] = self.rpy;
        Isometry3::from_parts(Translation3::new(x, y, z), UnitQuaternion::from_euler_angles(r, p, yaw))
    }

    /// True when the base only rotates about world z.
    pub fn is_planar(&self) -> bool {
        self.position[2] == 0.0 && self.rpy[0] == 0.0 && self.rpy[1] == 0.0
    }
}

/// Head frame used for visibility: it sits at the distal end of link `joint`
/// and looks along `axis`, expressed in that joint's frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaze {
    pub joint: usize,
    #[serde(default = "Gaze::default_axis")]
    pub axis: [f64; 3],
    #[serde(default = "Gaze::default_half_angle")]
    pub half_angle: f64,
}

impl Gaze {
    pub const DEFAULT_HALF_ANGLE: f64 = std::f64::consts::FRAC_PI_3;

    fn default_axis() -> [f64; 3] {
        [1.0, 0.0, 0.0]
    }

    fn default_half_angle() -> f64 {
        Self::DEFAULT_HALF_ANGLE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    joints: Vec<JointSpec>,
    tip: Tip,
    base: BasePose,
    base_iso: Isometry3<f64>,
    end_effector: usize,
    gaze: Option<Gaze>,
}

impl ChainModel {
    pub fn new(
        joints: Vec<JointSpec>,
        tip: Tip,
        base: BasePose,
        end_effector: usize,
        gaze: Option<Gaze>,
    ) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::invalid("chain needs at least one joint"));
        }
        for (i, j) in joints.iter().enumerate() {
            j.validate(i)?;
        }
        if ![tip.alpha, tip.a, tip.d].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("non-finite tip parameter"));
        }
        if !base.position.iter().chain(base.rpy.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("non-finite base pose"));
        }
        if end_effector >= joints.len() {
            return Err(Error::invalid(format!(
                "end effector joint {end_effector} out of range for {} joints",
                joints.len()
            )));
        }
        if let Some(g) = &gaze {
            if g.joint >= joints.len() {
                return Err(Error::invalid(format!("gaze joint {} out of range", g.joint)));
            }
            if Vector3::from(g.axis).norm() == 0.0 || !g.axis.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid("gaze axis must be a non-zero vector"));
            }
            if !(g.half_angle > 0.0 && g.half_angle <= std::f64::consts::PI) {
                return Err(Error::invalid("gaze half angle must lie in (0, pi]"));
            }
        }
        Ok(ChainModel {
            base_iso: base.isometry(),
            joints,
            tip,
            base,
            end_effector,
            gaze,
        })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn tip(&self) -> Tip {
        self.tip
    }

    pub fn base(&self) -> BasePose {
        self.base
    }

    pub fn base_isometry(&self) -> &Isometry3<f64> {
        &self.base_iso
    }

    pub fn end_effector_joint(&self) -> usize {
        self.end_effector
    }

    pub fn gaze(&self) -> Option<&Gaze> {
        self.gaze.as_ref()
    }

    pub fn with_base(&self, base: BasePose) -> Self {
        ChainModel {
            base,
            base_iso: base.isometry(),
            ..self.clone()
        }
    }

    /// Copy of the chain with every length parameter multiplied by `factor`.
    /// Angles, limits and link radii are unchanged.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("scale factor must be positive, got {factor}")));
        }
        let joints = self
            .joints
            .iter()
            .map(|j| JointSpec {
                a_prev: j.a_prev * factor,
                d: j.d * factor,
                ..*j
            })
            .collect();
        let tip = Tip {
            a: self.tip.a * factor,
            d: self.tip.d * factor,
            ..self.tip
        };
        ChainModel::new(joints, tip, self.base, self.end_effector, self.gaze)
    }

    /// All joints rotate about parallel z axes and the base keeps them
    /// parallel to world z, so the whole chain stays in the z = 0 plane.
    pub fn is_planar(&self) -> bool {
        self.base.is_planar()
            && self.tip.alpha == 0.0
            && self.tip.d == 0.0
            && self.joints.iter().all(|j| j.alpha_prev == 0.0 && j.d == 0.0)
    }

    /// Sum of the link offsets, an upper bound on the distance between the
    /// base and any point of the chain.
    pub fn reach(&self) -> f64 {
        let joints: f64 = self.joints.iter().map(|j| j.a_prev.abs() + j.d.abs()).sum();
        joints + self.tip.a.abs() + self.tip.d.abs()
    }

    pub fn check_dimension(&self, q: &JointConfig) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::invalid(format!(
                "configuration has {} angles, chain has {} joints",
                q.len(),
                self.dof()
            )));
        }
        Ok(())
    }

    /// Dimension, finiteness and joint-limit check.
    pub fn validate_config(&self, q: &JointConfig) -> Result<()> {
        self.check_dimension(q)?;
        for (i, (a, j)) in q.angles().iter().zip(&self.joints).enumerate() {
            if !a.is_finite() || !j.within_limits(*a) {
                return Err(Error::invalid(format!(
                    "joint {i} angle {a} outside [{}, {}]",
                    j.limit_lo, j.limit_hi
                )));
            }
        }
        Ok(())
    }

    pub fn within_limits(&self, angles: &[f64]) -> bool {
        angles.len() == self.dof() && angles.iter().zip(&self.joints).all(|(a, j)| j.within_limits(*a))
    }

    /// World pose of every joint frame, in order. `angles` must have one
    /// entry per joint.
    pub fn joint_frames(&self, angles: &[f64]) -> Vec<Isometry3<f64>> {
        debug_assert_eq!(angles.len(), self.dof());
        let mut frame = self.base_iso;
        self.joints
            .iter()
            .zip(angles)
            .map(|(j, &theta)| {
                frame *= dh_transform(j.alpha_prev, j.a_prev, theta + j.theta_offset, j.d);
                frame
            })
            .collect()
    }

    /// Fills `out` with the link segments for `angles` without validating.
    pub fn link_segments_into(&self, angles: &[f64], out: &mut Vec<LinkSegment>) {
        debug_assert_eq!(angles.len(), self.dof());
        out.clear();
        let mut frame = self.base_iso;
        let mut start: Option<Point3<f64>> = None;
        let mut radius = 0.0;
        for (j, &theta) in self.joints.iter().zip(angles) {
            // The fixed part of this joint's transform locates its origin,
            // which is where the previous link ends.
            let origin = frame * dh_transform(j.alpha_prev, j.a_prev, 0.0, j.d);
            let p = Point3::from(origin.translation.vector);
            if let Some(p0) = start {
                out.push(LinkSegment { p0, p1: p, radius });
            }
            frame *= dh_transform(j.alpha_prev, j.a_prev, theta + j.theta_offset, j.d);
            start = Some(p);
            radius = j.link_radius;
        }
        let end = frame * dh_transform(self.tip.alpha, self.tip.a, 0.0, self.tip.d);
        out.push(LinkSegment {
            p0: start.expect("chain has at least one joint"),
            p1: Point3::from(end.translation.vector),
            radius,
        });
    }

    pub fn link_segments(&self, angles: &[f64]) -> Vec<LinkSegment> {
        let mut out = Vec::with_capacity(self.dof());
        self.link_segments_into(angles, &mut out);
        out
    }

    /// End point of the end-effector link, without validation.
    pub fn end_effector_at(&self, angles: &[f64]) -> Point3<f64> {
        let mut frame = self.base_iso;
        for (j, &theta) in self.joints.iter().zip(angles).take(self.end_effector + 1) {
            frame *= dh_transform(j.alpha_prev, j.a_prev, theta + j.theta_offset, j.d);
        }
        let next = match self.joints.get(self.end_effector + 1) {
            Some(j) => dh_transform(j.alpha_prev, j.a_prev, 0.0, j.d),
            None => dh_transform(self.tip.alpha, self.tip.a, 0.0, self.tip.d),
        };
        Point3::from((frame * next).translation.vector)
    }
}

fn dh_transform(alpha_prev: f64, a_prev: f64, theta: f64, d: f64) -> Isometry3<f64> {
    let mut t = Isometry3::translation(a_prev, 0.0, 0.0);
    if alpha_prev != 0.0 {
        t = Isometry3::rotation(Vector3::x() * alpha_prev) * t;
    }
    t * Isometry3::rotation(Vector3::z() * theta) * Isometry3::translation(0.0, 0.0, d)
}

/// One angle per joint, radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointConfig(Vec<f64>);

impl JointConfig {
    pub fn new(angles: Vec<f64>) -> Self {
        JointConfig(angles)
    }

    pub fn zeros(n: usize) -> Self {
        JointConfig(vec![0.0; n])
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for JointConfig {
    fn from(v: Vec<f64>) -> Self {
        JointConfig(v)
    }
}

impl<const N: usize> From<[f64; N]> for JointConfig {
    fn from(v: [f64; N]) -> Self {
        JointConfig(v.to_vec())
    }
}

/// Capsule image of one link: the centerline from `p0` to `p1` swept by `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSegment {
    pub p0: Point3<f64>,
    pub p1: Point3<f64>,
    pub radius: f64,
}

impl LinkSegment {
    pub fn length(&self) -> f64 {
        (self.p1 - self.p0).norm()
    }
}

/// Planar revolute chain lying along the base x axis at the zero configuration.
pub fn planar_chain(link_lengths: &[f64], link_radius: f64, limits: &[(f64, f64)]) -> Result<ChainModel> {
    if link_lengths.is_empty() {
        return Err(Error::invalid("at least one link length is required"));
    }
    if let Some(bad) = link_lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::invalid(format!("link length must be positive, got {bad}")));
    }
    if limits.len() != link_lengths.len() {
        return Err(Error::invalid(format!(
            "{} joint limits given for {} links",
            limits.len(),
            link_lengths.len()
        )));
    }
    let n = link_lengths.len();
    let joints = (0..n)
        .map(|i| {
            let a_prev = if i == 0 { 0.0 } else { link_lengths[i - 1] };
            JointSpec::planar(a_prev, limits[i], link_radius)
        })
        .collect();
    let tip = Tip {
        a: link_lengths[n - 1],
        ..Tip::default()
    };
    ChainModel::new(joints, tip, BasePose::default(), n - 1, None)
}

pub fn forward_kinematics(chain: &ChainModel, q: &JointConfig) -> Result<Vec<LinkSegment>> {
    chain.check_dimension(q)?;
    Ok(chain.link_segments(q.angles()))
}

pub fn end_effector_position(chain: &ChainModel, q: &JointConfig) -> Result<Point3<f64>> {
    chain.check_dimension(q)?;
    Ok(chain.end_effector_at(q.angles()))
}

//! Distances between link capsules and obstacles.
//!
//! Planar obstacles only look at the x and y coordinates of a segment; the
//! spatial ones use all three.

use nalgebra::{Point2, Point3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{ChainModel, JointConfig, LinkSegment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    Circle { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Sphere { center: [f64; 3], radius: f64 },
    Aabb { min: [f64; 3], max: [f64; 3] },
}

impl Obstacle {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Obstacle::Circle { center, radius } => {
                if !finite(center) || !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::invalid("circle needs a finite center and positive radius"));
                }
            }
            Obstacle::Sphere { center, radius } => {
                if !finite(center) || !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::invalid("sphere needs a finite center and positive radius"));
                }
            }
            Obstacle::Aabb { min, max } => {
                if !finite(min) || !finite(max) || min.iter().zip(max).any(|(a, b)| a >= b) {
                    return Err(Error::invalid("box min corner must be below max componentwise"));
                }
            }
            Obstacle::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::invalid("polygon needs at least 3 vertices"));
                }
                if !vertices.iter().all(|v| finite(v)) {
                    return Err(Error::invalid("polygon vertex not finite"));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = p2(vertices[i]);
                    let b = p2(vertices[(i + 1) % n]);
                    let c = p2(vertices[(i + 2) % n]);
                    if cross(b - a, c - b) <= 0.0 {
                        return Err(Error::invalid(
                            "polygon must be strictly convex with counter-clockwise vertices",
                        ));
                    }
                }
                // Strict left turns everywhere can still wind twice.
                let turn: f64 = (0..n)
                    .map(|i| {
                        let a = p2(vertices[i]);
                        let b = p2(vertices[(i + 1) % n]);
                        let c = p2(vertices[(i + 2) % n]);
                        let (u, v) = (b - a, c - b);
                        cross(u, v).atan2(u.dot(&v))
                    })
                    .sum();
                if turn > 2.0 * std::f64::consts::PI + 1e-9 {
                    return Err(Error::invalid("polygon winds more than once"));
                }
            }
        }
        Ok(())
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, Obstacle::Circle { .. } | Obstacle::Polygon { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Environment {
    pub obstacles: Vec<Obstacle>,
}

impl Environment {
    pub fn new(obstacles: Vec<Obstacle>) -> Result<Self> {
        for (i, o) in obstacles.iter().enumerate() {
            o.validate().map_err(|e| Error::invalid(format!("obstacle {i}: {e}")))?;
        }
        Ok(Environment { obstacles })
    }

    pub fn empty() -> Self {
        Environment::default()
    }

    pub fn is_planar(&self) -> bool {
        self.obstacles.iter().all(Obstacle::is_planar)
    }

    pub fn segment_collides(&self, seg: &LinkSegment) -> bool {
        self.obstacles.iter().any(|o| segment_collides(seg, o))
    }
}

/// Minimum distance between the segment centerline and the closed obstacle
/// region; zero when they intersect.
pub fn segment_obstacle_distance(seg: &LinkSegment, obs: &Obstacle) -> f64 {
    match obs {
        Obstacle::Circle { center, radius } => {
            let d = point_segment_distance_2d(p2(*center), xy(&seg.p0), xy(&seg.p1));
            (d - radius).max(0.0)
        }
        Obstacle::Sphere { center, radius } => {
            let d = point_segment_distance(&Point3::from(*center), &seg.p0, &seg.p1);
            (d - radius).max(0.0)
        }
        Obstacle::Polygon { vertices } => segment_polygon_distance(xy(&seg.p0), xy(&seg.p1), vertices),
        Obstacle::Aabb { min, max } => segment_box_distance(&seg.p0, &seg.p1, &Point3::from(*min), &Point3::from(*max)),
    }
}

/// Strict: a capsule exactly touching an obstacle does not collide. A
/// zero-radius segment collides when its centerline meets the obstacle.
pub fn segment_collides(seg: &LinkSegment, obs: &Obstacle) -> bool {
    let d = segment_obstacle_distance(seg, obs);
    if seg.radius == 0.0 {
        d == 0.0
    } else {
        d < seg.radius
    }
}

/// Any link of the chain at `q` collides with any obstacle. `q` must have
/// one angle per joint.
pub fn posture_collides(chain: &ChainModel, q: &JointConfig, env: &Environment) -> bool {
    debug_assert_eq!(q.len(), chain.dof());
    angles_collide(chain, q.angles(), env, &mut Vec::new())
}

pub(crate) fn angles_collide(
    chain: &ChainModel,
    angles: &[f64],
    env: &Environment,
    scratch: &mut Vec<LinkSegment>,
) -> bool {
    if env.obstacles.is_empty() {
        return false;
    }
    chain.link_segments_into(angles, scratch);
    scratch.iter().any(|s| env.segment_collides(s))
}

pub fn distance(p: &Point3<f64>, q: &Point3<f64>) -> f64 {
    (p - q).norm()
}

fn p2(v: [f64; 2]) -> Point2<f64> {
    Point2::new(v[0], v[1])
}

fn xy(p: &Point3<f64>) -> Point2<f64> {
    Point2::new(p.x, p.y)
}

fn cross(u: Vector2<f64>, v: Vector2<f64>) -> f64 {
    u.x * v.y - u.y * v.x
}

pub(crate) fn point_segment_distance_2d(p: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

pub(crate) fn point_segment_distance(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

fn orient(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Point2<f64>, b: Point2<f64>, p: Point2<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching included.
fn segments_intersect_2d(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>, d: Point2<f64>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

fn point_in_convex_polygon(p: Point2<f64>, vertices: &[[f64; 2]]) -> bool {
    let n = vertices.len();
    (0..n).all(|i| orient(p2(vertices[i]), p2(vertices[(i + 1) % n]), p) >= 0.0)
}

fn segment_polygon_distance(a: Point2<f64>, b: Point2<f64>, vertices: &[[f64; 2]]) -> f64 {
    if point_in_convex_polygon(a, vertices) || point_in_convex_polygon(b, vertices) {
        return 0.0;
    }
    let n = vertices.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let c = p2(vertices[i]);
        let d = p2(vertices[(i + 1) % n]);
        if segments_intersect_2d(a, b, c, d) {
            return 0.0;
        }
        // Disjoint segments: the closest pair involves an endpoint.
        best = best
            .min(point_segment_distance_2d(a, c, d))
            .min(point_segment_distance_2d(b, c, d))
            .min(point_segment_distance_2d(c, a, b));
    }
    best
}

/// Closest distance between two 3D segments.
pub(crate) fn segment_segment_distance(p1: &Point3<f64>, q1: &Point3<f64>, p2: &Point3<f64>, q2: &Point3<f64>) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm()
}

fn point_box_distance(p: &Point3<f64>, min: &Point3<f64>, max: &Point3<f64>) -> f64 {
    let clamped = Vector3::new(
        p.x.clamp(min.x, max.x),
        p.y.clamp(min.y, max.y),
        p.z.clamp(min.z, max.z),
    );
    (p.coords - clamped).norm()
}

/// Slab clipping of the closed segment against the closed box.
fn segment_hits_box(a: &Point3<f64>, b: &Point3<f64>, min: &Point3<f64>, max: &Point3<f64>) -> bool {
    let dir = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..3 {
        if dir[k] == 0.0 {
            if a[k] < min[k] || a[k] > max[k] {
                return false;
            }
        } else {
            let inv = 1.0 / dir[k];
            let (mut lo, mut hi) = ((min[k] - a[k]) * inv, (max[k] - a[k]) * inv);
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

fn segment_box_distance(a: &Point3<f64>, b: &Point3<f64>, min: &Point3<f64>, max: &Point3<f64>) -> f64 {
    if segment_hits_box(a, b, min, max) {
        return 0.0;
    }
    // Outside the box, distance along the segment is piecewise with breaks
    // only where the nearest feature changes, so the minimum is attained at
    // an endpoint or against one of the twelve edges.
    let mut best = point_box_distance(a, min, max).min(point_box_distance(b, min, max));
    let corner = |i: usize| {
        Point3::new(
            if i & 1 == 0 { min.x } else { max.x },
            if i & 2 == 0 { min.y } else { max.y },
            if i & 4 == 0 { min.z } else { max.z },
        )
    };
    for i in 0..8usize {
        for bit in [1usize, 2, 4] {
            if i & bit == 0 {
                let d = segment_segment_distance(a, b, &corner(i), &corner(i | bit));
                best = best.min(d);
            }
        }
    }
    best
}

//! Reference computations that do not go through the library's own code.
#![allow(dead_code)]

use chainplan_core::geometry::Obstacle;
use chainplan_core::kinematics::{planar_chain, ChainModel, JointConfig, LinkSegment};
use chainplan_core::{Environment, Scenario};
use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Joint positions of a planar chain from summed angles: base, then the far
/// end of each link.
pub fn planar_points(lengths: &[f64], q: &[f64]) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0, 0.0]];
    let (mut x, mut y, mut theta) = (0.0, 0.0, 0.0);
    for (l, a) in lengths.iter().zip(q) {
        theta += a;
        x += l * theta.cos();
        y += l * theta.sin();
        out.push([x, y]);
    }
    out
}

fn point_segment_2d(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

/// Distance from a point to the closed obstacle region (0 inside).
pub fn point_obstacle_distance(p: Point3<f64>, obs: &Obstacle) -> f64 {
    match obs {
        Obstacle::Circle { center, radius } => {
            (((p.x - center[0]).powi(2) + (p.y - center[1]).powi(2)).sqrt() - radius).max(0.0)
        }
        Obstacle::Sphere { center, radius } => {
            (((p.x - center[0]).powi(2) + (p.y - center[1]).powi(2) + (p.z - center[2]).powi(2)).sqrt() - radius)
                .max(0.0)
        }
        Obstacle::Polygon { vertices } => {
            let n = vertices.len();
            let q = [p.x, p.y];
            let inside = (0..n).all(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) >= 0.0
            });
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| point_segment_2d(q, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
        Obstacle::Aabb { min, max } => {
            let c = [p.x, p.y, p.z];
            (0..3)
                .map(|i| (min[i] - c[i]).max(0.0).max(c[i] - max[i]))
                .map(|d| d * d)
                .sum::<f64>()
                .sqrt()
        }
    }
}

/// Samples `n` points along the segment and reports the smallest distance
/// to the obstacle.
pub fn sampled_distance(p0: Point3<f64>, p1: Point3<f64>, obs: &Obstacle, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            point_obstacle_distance(p0 + (p1 - p0) * t, obs)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Dense-sampling collision verdict for a capsule.
pub fn oracle_collides(p0: Point3<f64>, p1: Point3<f64>, radius: f64, obs: &Obstacle) -> bool {
    let d = sampled_distance(p0, p1, obs, 2000);
    if radius == 0.0 {
        d == 0.0
    } else {
        d < radius
    }
}

/// Residual capacity by RK4 integration of dC/dt = -k C load/mvc.
pub fn fatigue_rk4(loads: &[f64], k: f64, mvc: f64, step: f64, substeps: usize) -> f64 {
    let mut c = 1.0f64;
    for &load in loads {
        let h = step / substeps as f64;
        let f = |c: f64| -k * c * load / mvc;
        for _ in 0..substeps {
            let k1 = f(c);
            let k2 = f(c + h * k1 / 2.0);
            let k3 = f(c + h * k2 / 2.0);
            let k4 = f(c + h * k3);
            c += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
    }
    c
}

pub fn random_polygon(rng: &mut ChaCha8Rng, cx: f64, cy: f64, size: f64) -> Obstacle {
    loop {
        let k = rng.random_range(3..=6);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let r: f64 = rng.random_range(0.3..1.0) * size;
        let vertices = angles.iter().map(|a| [cx + r * a.cos(), cy + r * a.sin()]).collect();
        let o = Obstacle::Polygon { vertices };
        if o.validate().is_ok() {
            return o;
        }
    }
}

/// A random planar scenario with a 2- or 3-link arm and up to three obstacles,
/// retried until the start posture is free.
pub fn random_planar_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(2..=3);
        let lengths: Vec<f64> = (0..n).map(|_| rng.random_range(5.0..20.0)).collect();
        let reach: f64 = lengths.iter().sum();
        let chain = planar_chain(&lengths, rng.random_range(0.0..0.8), &vec![(-2.5, 2.5); n]).unwrap();
        let start = JointConfig::new((0..n).map(|_| rng.random_range(-1.5..1.5)).collect());
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let r = rng.random_range(0.2..0.9) * reach;
        let destination = Point3::new(r * a.cos(), r * a.sin(), 0.0);
        let obstacles = (0..rng.random_range(0..=3))
            .map(|_| {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                let r = rng.random_range(0.3..1.1) * reach;
                if rng.random_bool(0.5) {
                    Obstacle::Circle {
                        center: [r * a.cos(), r * a.sin()],
                        radius: rng.random_range(0.5..4.0),
                    }
                } else {
                    random_polygon(&mut rng, r * a.cos(), r * a.sin(), 4.0)
                }
            })
            .collect();
        let env = Environment::new(obstacles).unwrap();
        let dq = rng.random_range(0.03..0.15);
        let s = Scenario::new(format!("random-{seed}"), chain, env, start, destination, 0.5, dq);
        if s.validate().is_ok() {
            return s;
        }
    }
}

/// A random scenario paired with the same scenario plus one extra obstacle.
pub fn obstacle_pair(seed: u64) -> (Scenario, Scenario) {
    let s = random_planar_scenario(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let reach = s.chain.reach();
    loop {
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let r = rng.random_range(0.3..1.0) * reach;
        let extra = Obstacle::Circle {
            center: [r * a.cos(), r * a.sin()],
            radius: rng.random_range(0.5..3.0),
        };
        let mut obstacles = s.env.obstacles.clone();
        obstacles.push(extra);
        let t = Scenario {
            env: Environment::new(obstacles).unwrap(),
            ..s.clone()
        };
        if t.validate().is_ok() {
            return (s, t);
        }
    }
}

pub fn chain_lengths(chain: &ChainModel) -> Vec<f64> {
    let mut v: Vec<f64> = chain.joints().iter().skip(1).map(|j| j.a_prev).collect();
    v.push(chain.tip().a);
    v
}

/// A random capsule near a random obstacle, planar or spatial. Segments are
/// at most 2 long so 2000 samples sit within 1e-3 of each other.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (LinkSegment, Obstacle) {
    let spatial = rng.random_bool(0.4);
    let z = |rng: &mut ChaCha8Rng| if spatial { rng.random_range(-3.0..3.0) } else { 0.0 };
    let obs = match (spatial, rng.random_range(0..2)) {
        (false, 0) => Obstacle::Circle {
            center: [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            radius: rng.random_range(0.2..2.0),
        },
        (false, _) => {
            let (cx, cy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            random_polygon(rng, cx, cy, 2.5)
        }
        (true, 0) => Obstacle::Sphere {
            center: [
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ],
            radius: rng.random_range(0.2..2.0),
        },
        (true, _) => {
            let min: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..1.0));
            let max: [f64; 3] = std::array::from_fn(|i| min[i] + rng.random_range(0.2..2.5));
            Obstacle::Aabb { min, max }
        }
    };
    let p0 = Point3::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), z(rng));
    let dir = loop {
        let v = nalgebra::Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), z(rng) / 3.0);
        if v.norm() > 1e-3 {
            break v.normalize();
        }
    };
    let p1 = p0 + dir * rng.random_range(0.0..2.0);
    let radius = if rng.random_bool(0.1) {
        0.0
    } else {
        rng.random_range(0.0..1.5)
    };
    (LinkSegment { p0, p1, radius }, obs)
}

/// Counts oracle disagreements outside the 1e-3 band over `n` random pairs.
pub fn oracle_disagreements(seed: u64, n: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut bad, mut banded) = (0, 0);
    for _ in 0..n {
        let (seg, obs) = random_pair(&mut rng);
        let d = chainplan_core::segment_obstacle_distance(&seg, &obs);
        if (d - seg.radius).abs() < 1e-3 {
            banded += 1;
            continue;
        }
        if chainplan_core::segment_collides(&seg, &obs) != oracle_collides(seg.p0, seg.p1, seg.radius, &obs) {
            bad += 1;
        }
    }
    (bad, banded)
}

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_abs_diff_eq;
use chainplan_core::kinematics::{BasePose, JointSpec, Tip};
use chainplan_core::{end_effector_position, forward_kinematics, planar_chain, ChainModel, JointConfig};
use nalgebra::Point3;
use proptest::prelude::*;

const LIMITS: (f64, f64) = (-PI, PI);

fn rrr(lengths: &[f64]) -> ChainModel {
    planar_chain(lengths, 0.5, &vec![LIMITS; lengths.len()]).unwrap()
}

fn endpoints(chain: &ChainModel, q: &[f64]) -> Vec<[f64; 2]> {
    forward_kinematics(chain, &JointConfig::new(q.to_vec()))
        .unwrap()
        .iter()
        .map(|s| [s.p1.x, s.p1.y])
        .collect()
}

#[test]
fn axis_aligned_endpoints() {
    let c = rrr(&[20.0, 10.0, 20.0]);
    let cases: [([f64; 3], [[f64; 2]; 3]); 3] = [
        ([0.0, 0.0, 0.0], [[20.0, 0.0], [30.0, 0.0], [50.0, 0.0]]),
        ([FRAC_PI_2, 0.0, 0.0], [[0.0, 20.0], [0.0, 30.0], [0.0, 50.0]]),
        ([FRAC_PI_2, -FRAC_PI_2, 0.0], [[0.0, 20.0], [10.0, 20.0], [30.0, 20.0]]),
    ];
    for (q, expected) in cases {
        let got = endpoints(&c, &q);
        for (g, e) in got.iter().zip(expected) {
            assert_abs_diff_eq!(g[0], e[0], epsilon = 1e-9);
            assert_abs_diff_eq!(g[1], e[1], epsilon = 1e-9);
        }
    }
}

#[test]
fn end_effector_examples() {
    let p = end_effector_position(&rrr(&[20.0, 20.0, 25.0]), &JointConfig::zeros(3)).unwrap();
    assert_abs_diff_eq!(p.x, 65.0, epsilon = 1e-12);
    let p = end_effector_position(
        &rrr(&[20.0, 10.0, 20.0]),
        &JointConfig::new(vec![FRAC_PI_2, -FRAC_PI_2, 0.0]),
    )
    .unwrap();
    assert_abs_diff_eq!(p.x, 30.0, epsilon = 1e-9);
    assert_abs_diff_eq!(p.y, 20.0, epsilon = 1e-9);
}

#[test]
fn reach_of_planar_chains() {
    assert_eq!(rrr(&[20.0, 10.0, 20.0]).reach(), 50.0);
    assert_eq!(rrr(&[1.0]).reach(), 1.0);
    assert_eq!(rrr(&[20.0, 20.0, 40.0]).reach(), 80.0);
    assert!(planar_chain(&[1.0, 0.0], 0.0, &[LIMITS; 2]).is_err());
    assert!(planar_chain(&[1.0, -2.0], 0.0, &[LIMITS; 2]).is_err());
}

#[test]
fn dimension_mismatch_is_rejected() {
    let c = rrr(&[1.0, 1.0]);
    assert!(forward_kinematics(&c, &JointConfig::zeros(3)).is_err());
    assert!(end_effector_position(&c, &JointConfig::zeros(1)).is_err());
}

/// Two joints with a twist between them: a shoulder yawing about z and a
/// pitch joint whose axis is the rotated y axis.
#[test]
fn twisted_chain_matches_hand_computation() {
    let joints = vec![
        JointSpec {
            alpha_prev: 0.0,
            a_prev: 0.0,
            d: 0.0,
            theta_offset: 0.0,
            limit_lo: -PI,
            limit_hi: PI,
            link_radius: 0.0,
        },
        JointSpec {
            alpha_prev: -FRAC_PI_2,
            a_prev: 0.0,
            d: 0.0,
            theta_offset: 0.0,
            limit_lo: -PI,
            limit_hi: PI,
            link_radius: 0.0,
        },
    ];
    let tip = Tip {
        alpha: 0.0,
        a: 2.0,
        d: 0.0,
    };
    let c = ChainModel::new(joints, tip, BasePose::default(), 1, None).unwrap();
    // Yaw 90 degrees, then pitch the link up by 30 degrees (negative about the
    // rotated axis with this twist).
    let (yaw, pitch) = (FRAC_PI_2, -PI / 6.0);
    let p = c.end_effector_at(&[yaw, pitch]);
    let horizontal = 2.0 * (PI / 6.0).cos();
    assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(p.y, horizontal, epsilon = 1e-12);
    assert_abs_diff_eq!(p.z, 2.0 * (PI / 6.0).sin(), epsilon = 1e-12);
}

fn lengths_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..30.0, 1..=6)
}

fn chain_and_q() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    lengths_strategy().prop_flat_map(|l| {
        let n = l.len();
        (Just(l), prop::collection::vec(-PI..PI, n))
    })
}

proptest! {
    #[test]
    fn matches_summed_angle_oracle((lengths, q) in chain_and_q()) {
        let chain = rrr(&lengths);
        let oracle = common::planar_points(&lengths, &q);
        let segs = chain.link_segments(&q);
        for (i, s) in segs.iter().enumerate() {
            prop_assert!((s.p0.x - oracle[i][0]).abs() < 1e-9 && (s.p0.y - oracle[i][1]).abs() < 1e-9);
            prop_assert!((s.p1.x - oracle[i + 1][0]).abs() < 1e-9 && (s.p1.y - oracle[i + 1][1]).abs() < 1e-9);
            prop_assert_eq!(s.p1.z, 0.0);
        }
    }

    #[test]
    fn segments_chain_and_are_rigid((lengths, q) in chain_and_q()) {
        let segs = rrr(&lengths).link_segments(&q);
        prop_assert_eq!(segs.len(), lengths.len());
        for i in 1..segs.len() {
            prop_assert!((segs[i].p0 - segs[i - 1].p1).norm() <= 1e-9 * i as f64);
        }
        for (s, l) in segs.iter().zip(&lengths) {
            prop_assert!((s.length() - l).abs() < 1e-9);
            prop_assert_eq!(s.radius, 0.5);
        }
    }

    #[test]
    fn base_rotation_rotates_every_point((lengths, q) in chain_and_q(), phi in -PI..PI, x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let chain = rrr(&lengths).with_base(BasePose { position: [x, y, 0.0], rpy: [0.0, 0.0, 0.0] });
        let rotated = chain.with_base(BasePose { position: [x, y, 0.0], rpy: [0.0, 0.0, phi] });
        let (c, s) = (phi.cos(), phi.sin());
        for (a, b) in chain.link_segments(&q).iter().zip(rotated.link_segments(&q)) {
            for (p, r) in [(a.p0, b.p0), (a.p1, b.p1)] {
                let (dx, dy) = (p.x - x, p.y - y);
                prop_assert!((x + c * dx - s * dy - r.x).abs() < 1e-9);
                prop_assert!((y + s * dx + c * dy - r.y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn end_effector_within_reach((lengths, q) in chain_and_q()) {
        let chain = rrr(&lengths);
        let p = chain.end_effector_at(&q);
        prop_assert!((p - Point3::origin()).norm() <= chain.reach() + 1e-9);
        prop_assert_eq!(p, chain.link_segments(&q).last().unwrap().p1);
    }

    #[test]
    fn scaling_scales_positions((lengths, q) in chain_and_q(), k in 0.2f64..3.0) {
        let chain = rrr(&lengths);
        let scaled = chain.scaled(k).unwrap();
        let (p, ps) = (chain.end_effector_at(&q), scaled.end_effector_at(&q));
        prop_assert!((p.coords * k - ps.coords).norm() < 1e-9 * (1.0 + p.coords.norm()));
        prop_assert_eq!(common::chain_lengths(&scaled).len(), lengths.len());
    }
}

use nalgebra::Point3;

use super::lattice::LatticeConfig;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{angles_collide, Environment};
use crate::kinematics::ChainModel;
use crate::scenario::NeighborhoodMode;

/// Offset moves of the neighbourhood, in lexicographic order.
pub fn neighborhood_deltas(dof: usize, mode: NeighborhoodMode) -> Result<Vec<Vec<i8>>> {
    match mode {
        NeighborhoodMode::AxisOnly => {
            let mut out: Vec<Vec<i8>> = (0..dof)
                .flat_map(|j| {
                    [-1i8, 1].into_iter().map(move |s| {
                        let mut d = vec![0i8; dof];
                        d[j] = s;
                        d
                    })
                })
                .collect();
            out.sort();
            Ok(out)
        }
        NeighborhoodMode::Combinatorial => {
            if dof > NeighborhoodMode::MAX_COMBINATORIAL_DOF {
                return Err(Error::Unsupported(format!(
                    "combinatorial neighbourhood limited to {} joints, chain has {dof}",
                    NeighborhoodMode::MAX_COMBINATORIAL_DOF
                )));
            }
            let total = 3usize.pow(dof as u32);
            // Base-3 counting with the most significant digit first walks the
            // moves in lexicographic order.
            Ok((0..total)
                .map(|mut k| {
                    let mut d = vec![0i8; dof];
                    for slot in d.iter_mut().rev() {
                        *slot = (k % 3) as i8 - 1;
                        k /= 3;
                    }
                    d
                })
                .filter(|d| d.iter().any(|x| *x != 0))
                .collect())
        }
    }
}

/// Neighbouring lattice postures that respect the joint limits, in
/// lexicographic order of their offset change.
pub fn neighbors(current: &LatticeConfig, chain: &ChainModel, mode: NeighborhoodMode) -> Result<Vec<LatticeConfig>> {
    if current.offsets().len() != chain.dof() {
        return Err(Error::invalid("lattice config dimension differs from chain"));
    }
    let mut angles = Vec::with_capacity(chain.dof());
    Ok(neighborhood_deltas(chain.dof(), mode)?
        .iter()
        .map(|d| current.shifted(d))
        .filter(|c| {
            c.angles_into(&mut angles);
            chain.within_limits(&angles)
        })
        .collect())
}

/// Collision-free candidate whose end effector is nearest `dest`. Equal
/// distances go to the lexicographically smallest offsets.
pub fn select_best(
    candidates: &[LatticeConfig],
    chain: &ChainModel,
    env: &Environment,
    dest: &Point3<f64>,
) -> Option<LatticeConfig> {
    let mut scratch = Vec::new();
    let mut angles = Vec::new();
    let mut best: Option<(f64, &LatticeConfig)> = None;
    for c in candidates {
        c.angles_into(&mut angles);
        if angles_collide(chain, &angles, env, &mut scratch) {
            continue;
        }
        let d = (chain.end_effector_at(&angles) - dest).norm();
        let better = match best {
            None => true,
            Some((bd, bc)) => d < bd || (d == bd && c.offsets() < bc.offsets()),
        };
        if better {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| c.clone())
}

/// True when `candidate` repeats a posture of the trajectory's current epoch.
pub fn detect_local_minimum(traj: &Trajectory, candidate: &LatticeConfig) -> Result<bool> {
    traj.contains_in_current_epoch(candidate)
}

use std::sync::Arc;

use crate::kinematics::JointConfig;

/// A posture written as integer multiples of `dq` away from `base`.
///
/// Two lattice configs on the same lattice are equal exactly when their
/// offset vectors are equal, which keeps revisit detection free of
/// floating-point comparisons.
#[derive(Debug, Clone)]
pub struct LatticeConfig {
    base: Arc<JointConfig>,
    dq: f64,
    offsets: Vec<i64>,
}

impl LatticeConfig {
    pub fn origin(base: Arc<JointConfig>, dq: f64) -> Self {
        let n = base.len();
        LatticeConfig {
            base,
            dq,
            offsets: vec![0; n],
        }
    }

    pub fn new(base: Arc<JointConfig>, dq: f64, offsets: Vec<i64>) -> Self {
        assert_eq!(base.len(), offsets.len(), "offset vector must match base dimension");
        LatticeConfig { base, dq, offsets }
    }

    pub fn base(&self) -> &Arc<JointConfig> {
        &self.base
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    /// Same base posture and step.
    pub fn same_lattice(&self, other: &LatticeConfig) -> bool {
        self.dq.to_bits() == other.dq.to_bits() && (Arc::ptr_eq(&self.base, &other.base) || self.base == other.base)
    }

    pub fn angle(&self, joint: usize) -> f64 {
        realize(self.base.angles()[joint], self.offsets[joint], self.dq)
    }

    pub fn angles(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.offsets.len());
        self.angles_into(&mut out);
        out
    }

    pub fn angles_into(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.base
                .angles()
                .iter()
                .zip(&self.offsets)
                .map(|(b, o)| realize(*b, *o, self.dq)),
        );
    }

    pub fn config(&self) -> JointConfig {
        JointConfig::new(self.angles())
    }

    pub fn shifted(&self, delta: &[i8]) -> LatticeConfig {
        debug_assert_eq!(delta.len(), self.offsets.len());
        LatticeConfig {
            base: Arc::clone(&self.base),
            dq: self.dq,
            offsets: self.offsets.iter().zip(delta).map(|(o, d)| o + i64::from(*d)).collect(),
        }
    }

    /// Offset difference `self - from`, when both share a lattice.
    pub fn delta_from(&self, from: &LatticeConfig) -> Option<Vec<i64>> {
        self.same_lattice(from)
            .then(|| self.offsets.iter().zip(&from.offsets).map(|(a, b)| a - b).collect())
    }
}

impl PartialEq for LatticeConfig {
    fn eq(&self, other: &Self) -> bool {
        self.same_lattice(other) && self.offsets == other.offsets
    }
}

#[inline]
pub(crate) fn realize(base: f64, offset: i64, dq: f64) -> f64 {
    base + offset as f64 * dq
}

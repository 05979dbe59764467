//! Greedy trajectory planning for serial chains among obstacles, with
//! intervention-assisted escape from local minima and ergonomic evaluation
//! of the resulting postures.
//!
//! ```
//! use chainplan_core::{planar_chain, plan_soo, Environment, JointConfig, Outcome, Scenario};
//! use nalgebra::Point3;
//!
//! let chain = planar_chain(&[20.0, 10.0, 20.0], 0.5, &[(-3.0, 3.0); 3]).unwrap();
//! let scenario = Scenario::new(
//!     "open",
//!     chain,
//!     Environment::empty(),
//!     JointConfig::zeros(3),
//!     Point3::new(20.0, 25.0, 0.0),
//!     0.5,
//!     0.1,
//! );
//! let (traj, _events) = plan_soo(&scenario).unwrap();
//! assert_eq!(traj.outcome(), Some(Outcome::Success));
//! ```

pub mod error;
pub mod evaluation;
pub mod exec;
pub mod gallery;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod planner;
pub mod render;
pub mod scenario;

pub use error::{Error, Result};
pub use evaluation::{
    accessibility, evaluate, fatigue_residual, population_sweep, posture_score, visibility, EvaluationReport,
    Mannequin, SweepOutcome, SweepRow,
};
pub use exec::Execution;
pub use geometry::{posture_collides, segment_collides, segment_obstacle_distance, Environment, Obstacle};
pub use io::ParseError;
pub use kinematics::{
    end_effector_position, forward_kinematics, planar_chain, ChainModel, JointConfig, JointSpec, LinkSegment,
};
pub use planner::{
    plan_interactive, plan_moo, plan_soo, Intervention, InterventionSource, LocalMinimum, Outcome, PlannerEvent,
    ScriptedSource, Trajectory, Weights,
};
pub use render::render_svg;
pub use scenario::{NeighborhoodMode, Scenario};

//! Engine for a two-sector demand-hierarchy growth model.
//!
//! Households with education-dependent Stone–Geary preferences split spending
//! between a low-tier good `L` and a high-tier good `H`. Learning-by-doing
//! ties sectoral productivity growth to the high-tier excess-quantity share,
//! which closes into a one-dimensional law of motion for the relative price.
//! The crate finds and classifies the steady states of that law, tracks how
//! they appear and vanish as education rises, simulates time paths, and
//! evaluates the social planner's first-order condition for education.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod demand;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod planner;

pub use bifurcation::{
    channel_condition, refine_saddle_node, sweep, BifurcationDiagram, ChannelCondition, SaddleNode,
    SweepConfig, Transition,
};
pub use demand::{
    dshare_h_de, income_elasticities, solve_demand, DemandSolution, HouseholdBudget,
    IncomeElasticities, PreferenceSchedule, ShareSensitivity,
};
pub use dynamics::{
    excess_share, growth_factors, h_ratio, price_map, simulate_path, HRatio, LearningSpec, Series,
    TechnologyState, TimePath,
};
pub use equilibrium::{classify_stability, find_fixed_points, FixedPoint, SolverConfig, Stability};
pub use error::{ModelError, Result};
pub use planner::{
    education_wedge_sign, evaluate_foc, FocReport, FocRow, PlannerConfig, PlannerPath,
};

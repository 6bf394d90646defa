//! Laminate constructions: the two-state lemma pattern, the relaxation step
//! and the recursive solvers.

pub mod lemma;
pub mod multi;
pub mod problem;
pub mod relax;
pub mod roots;
pub mod solver;

pub use lemma::{lemma1_construct, lemma1_pattern, solve_cn, LemmaPattern};
pub use multi::{solve_multi_level, MultiLevelOptions, MultiLevelSolution, StageRecord};
pub use problem::{InclusionProblem, LaminateStep, LevelSet, Target, DEFAULT_TOL_ZERO};
pub use relax::{relaxation_step, Relaxer};
pub use roots::find_roots_along_cone;
pub use solver::{refine_levels, relaxation_sequence, solve_one_level, Refiner, Schedule, Solution, SolveReport, StopReason};

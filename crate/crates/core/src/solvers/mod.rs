//! The four learners: LS and diagonal LS (LASSO by coordinate descent), OASIS
//! and diagonal OASIS (passive-aggressive ranking updates).

mod config;
pub(crate) mod lasso;
mod oasis;
mod triplets;

pub use config::{default_lambda_grid, SolverConfig};
pub use lasso::{fit_ls, kkt_violation, lasso_objective, solve_lasso, solve_lasso_from, LassoOptions, KKT_TOLERANCE, LassoProblem, LassoSolution};
pub use oasis::{fit_oasis, fit_oasis_observed, OasisTrainer, StepOutcome};
pub use triplets::{generate_triplets, Triplet, TripletSampler};

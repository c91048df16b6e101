//! Finite feasibility questions for ontological models.
//!
//! Given preparations `psi_i`, effects `phi_j` and a finite ontic space of `K`
//! points, look for weights `rho` and responses `P` with `P rho = T`, where
//! `T` holds the Born probabilities. With one block frozen the system is a
//! linear program; the joint problem is bilinear and is searched by
//! alternation. Also holds the exhaustive search for noncontextual 0/1
//! assignments on finite ray sets.

mod alternate;
mod ks;
mod lp;
mod problem;

pub use alternate::{alternate_search, alternate_search_with, AlternationOptions, AlternationReport};
pub use ks::{
    cabello18, ks_assignment_count, validate_ray_set, KsCount, RaySet, RaySetReport, RayViolation,
    KS_ASSIGNMENT_LIMIT, RAY_TOL,
};
pub use lp::{
    certificate_gap, simplex_solve, verify_certificate, LinearProgram, LpOutcome, LpStatus, CERT_TOL, FEAS_TOL,
    PIVOT_TOL,
};
pub use problem::{
    responses_from_solution, responses_program, rho_program, single_point_program, solve_responses, solve_rho,
    target_matrix, FeasibilityProblem,
};

//! Dirichlet eigenvalues, relative Faber-Krahn profiles and their gluing.

mod eigen;
mod enumerate;
mod fk;
mod glued;

pub use eigen::{lambda1, lambda1_dense, lambda_nz, lambda_nz_dense, Eigen, LocalOperator, LAMBDA1_TOL};
pub use enumerate::{connected_subsets, LocalGraph, DEFAULT_SUBSET_CAP};
pub use fk::{
    alpha_grid, enumerate_witnesses, fit_at_alpha, fit_ball, fit_harnack_fk, fit_harnack_fk_balls, fk_profile, lambda1_small, FitBall,
    FkProfile, FkSample, HarnackFkFit, Witness, DENSE_LIMIT,
};
pub use glued::{
    big_f, calibrate, closed_form_fk, glued_fk, v_min, validate_fk, BallScan, FkCheck, GluedFkConstants, SkippedPage,
    VminValue,
};

//! Numerical toolkit for weighted spaces of holomorphic functions and their
//! zero subsequences: disk averages, weight lifts, discrete Riesz measures,
//! and the calculus of ρ-trigonometrically convex functions.

pub mod averaging;
pub mod cli;
pub mod fields;
pub mod lifting;
pub mod trigconvex;
pub mod verify;
pub mod zeros;

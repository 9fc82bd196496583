//! Stochastic approximation laboratory.
//!
//! Simulates Dvoretzky-form processes `X_{n+1} = T_n(X_1, …, X_n) + W_n`,
//! certifies the hypotheses of Dvoretzky's convergence theorem at declared
//! horizons and tolerances, and checks conditional-expectation identities
//! exactly on finite probability spaces.

// `!(x <= y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod cli_harness;
pub mod dvoretzky_checker;
pub mod finprob;
pub mod process_engine;
pub mod series_lab;

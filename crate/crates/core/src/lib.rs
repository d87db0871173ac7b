#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod benchmarks;
pub mod canonical;
pub mod cli;
pub mod dual_solver;
pub mod oracle;
pub mod par;
pub mod polynomial;
pub mod smallmat;

// NaN must fail every positivity check, so `!(x > 0.0)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frame;
pub mod kernels;
pub mod numerics;
pub mod patterns;
pub mod operators;
pub mod eval;
pub mod cli;

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod cli;
pub mod gallery;
pub mod grid;
pub mod sums;
pub mod verify;

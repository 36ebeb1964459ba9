#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod circumcenter;
pub mod conjugacy;
pub mod error;
pub mod experiment;
pub mod hyperbolic;
pub mod manifold;

// `!(x > 0.0)` is used on purpose throughout so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptation;
pub mod baseline;
pub mod cli;
pub mod config;
pub mod contour;
pub mod energy;
pub mod image;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod phantom;
pub mod tracker;
mod spline;

//! Piecewise-smooth based loops, retrace reduction, and holonomy of matrix
//! Lie group connections.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gauge;
pub mod loopcore;
pub(crate) mod numeric;
pub mod transport;
pub mod words;

pub use error::{Error, Result};
pub mod equiv;
pub mod fanout;
pub mod cli;

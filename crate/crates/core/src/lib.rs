//! Classical and quantum ε-machines for the nearest-neighbour Ising chain.
//!
//! The crate covers the whole simulation loop: transition probabilities from
//! the transfer matrix, causal states and their complexities, the noisy
//! controlled-unitary circuit, tomographic reconstruction of its conditional
//! channels, fixed-point causal states of the imperfect device, and the
//! temperature sweeps that compare classical and quantum memory costs.

// Index loops mirror matrix notation; `!(x > y)` guards also reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod cli;
pub mod error;
pub mod fixedpoint;
pub mod ising;
pub mod machine;
pub mod optim;
pub mod par;
pub mod pipeline;
pub mod qmath;
pub mod tomography;

pub use error::{Error, Result};

//! Alternating conditional-gradient / proximal-gradient methods for
//! two-block composite problems
//!
//! ```text
//! min  g(X + Y) + R_X(X) + R_Y(Y)
//! ```
//!
//! specialised to robust PCA with `g(Z) = ½‖Z − M‖²_F`. The crate is
//! `no_std` (it needs `alloc`); file formats, the command line and wall-clock
//! timing live in the `rmrk` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod datagen;
pub mod error;
pub mod matrix;
pub mod oracles;
pub mod problem;
pub mod rng;
pub mod schedules;
pub mod solvers;
pub mod svd;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use svd::SvdTriple;

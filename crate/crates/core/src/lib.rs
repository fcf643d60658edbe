//! Exact number-field arithmetic, Gowers uniformity norms, Fejér-type kernels,
//! nilsequence diagnostics, symmetric-form calculus and partition-regularity
//! parametrizations.

pub mod error;
pub mod exact;
pub mod forms;
pub mod fp;
pub mod grid;
pub mod ideals;
pub mod io;
pub mod katai;
pub mod kernels;
pub mod lattice;
pub mod multfn;
pub mod nilseq;
pub mod numfield;
pub mod partreg;
pub mod units;

pub use error::{Error, ErrorClass, Result};

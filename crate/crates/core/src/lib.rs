#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cbc;
pub mod cli;
pub mod config;
pub mod cubature;
pub mod deformation;
pub mod error;
pub mod fem;
pub mod heat;
pub mod lattice;
pub mod regularity;
pub mod verify;

pub use error::{Error, Result};

#![no_std]
#![allow(clippy::needless_range_loop)]
extern crate alloc;

pub mod catalog;
pub mod dynamics;
pub mod emfield;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod report;
pub mod solver;

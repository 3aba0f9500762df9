//! Describing-function analysis, phase shaping and hybrid simulation of
//! reset control elements.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod designkit;
pub mod lincore;
pub mod plot;
pub mod resetfreq;
pub mod shaping;
pub mod timesim;

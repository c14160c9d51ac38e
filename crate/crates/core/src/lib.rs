// SPDX-License-Identifier: Apache-2.0

//! Multi-phase clock assignment for SFQ netlists.
//!
//! The flow parses an ISCAS `.bench` netlist ([`bench`]), builds its
//! optimization graph ([`dag`]), formulates the phase-depth integer program
//! ([`formulation`]), solves its relaxation or the full program
//! ([`solver`]), inserts path-balancing DFFs ([`assignment`]) and checks the
//! result cycle by cycle against the original circuit ([`simulator`]).
//! [`pipeline`] and [`report`] chain these steps.

pub mod assignment;
pub mod bench;
pub mod cli;
pub mod dag;
pub mod formulation;
pub mod generate;
pub mod pipeline;
pub mod report;
pub mod simulator;
pub mod solver;

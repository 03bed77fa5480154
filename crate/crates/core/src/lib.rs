//! Thinging Machine modeling toolkit.
//!
//! A static model ([`model::StaticModel`]) is a tree of thimacs carrying the
//! five generic actions plus flow and trigger edges. Events select regions of
//! it, a chronology orders the events, and the simulator fires them.

pub mod cli;
pub mod dsl;
pub mod eventing;
pub mod expr;
pub mod model;
pub mod render;
pub mod report;
pub mod sim;
pub mod uml;

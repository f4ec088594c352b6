pub mod bench;
pub mod cli;
pub mod config;
pub mod features;
pub mod genex;
pub mod model;
pub mod pddl;
pub mod planner;
pub mod policy;
pub mod termination;
pub mod wrapper;

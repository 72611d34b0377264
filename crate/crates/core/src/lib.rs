pub mod cli;
pub mod control;
pub mod engine;
pub mod front;
pub mod harness;
pub mod osc;
pub mod recurrence;
pub mod shape;

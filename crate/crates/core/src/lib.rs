//! 2-Planar transition-based dependency parsing with an exact dynamic oracle.

pub mod conll;
pub mod eval;
pub mod graph;
pub mod system;
pub mod hybrid;
pub mod oracle;
pub mod parser;
pub mod planarity;
pub mod random;
pub mod synthetic;
pub mod verify;

//! Model expansion for first-order logic with nested least/greatest fixpoint
//! definitions: parsing, direct evaluation, grounding, reduction to SAT
//! modulo difference logic, and a bridge from inductive definitions.

pub mod bench;
pub mod defnf;
pub mod dlreduce;
pub mod eval;
pub mod foid;
pub mod ground;
pub mod logic;
pub mod parser;
pub mod smt;

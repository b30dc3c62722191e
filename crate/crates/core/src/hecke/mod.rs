//! Modular-form side: cyclotomic numbers, Dirichlet characters, q-expansions and twists.

pub mod characters;
pub mod cyclotomic;
pub mod qexp;
pub mod twist;

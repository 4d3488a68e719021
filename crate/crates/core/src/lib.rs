//! Discrete-spacetime lattice QED as a quantum cellular automaton.

pub mod evolution;
pub mod fock;
pub mod gates;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod stateprep;
pub mod verify;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/step.md")]
    mod step {}
    #[doc = include_str!("../../../book/src/prep.md")]
    mod prep {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/verify.md")]
    mod verify {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

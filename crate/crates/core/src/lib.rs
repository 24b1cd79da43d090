pub mod error;
pub mod fock;
pub mod hilbert;
pub mod operators;
pub mod partitions;
pub mod rational;
pub mod ring;
pub mod smeared;
pub mod verify;
pub mod walgebra;

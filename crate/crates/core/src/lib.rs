//! Symplectic path and loop indices, first Chern numbers from clutching
//! data, Hamiltonian periodic orbits and GF(2) Morse / cascade complexes.
//!
//! Coordinates on R^{2n} are `(x_1..x_n, y_1..y_n)` and
//! `J0 = [[0, -I], [I, 0]]` throughout.

pub mod batch;
pub mod chain;
pub mod chern;
pub mod error;
pub mod hamdyn;
pub mod index;
pub mod io;
pub mod linalg;
pub mod path;
pub mod splin;
pub mod suite;

pub use error::{Result, SymError};
pub use linalg::Mat;
pub use path::SymplecticPath;

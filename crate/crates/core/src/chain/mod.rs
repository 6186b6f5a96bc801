//! GF(2) chain complexes: Morse homology and cohomology, chain maps and
//! homotopies, and cascade complexes of Morse-Bott data with doubled
//! gradings.

mod cascade;
mod chainmap;
mod complex;
pub mod gf2;

pub use cascade::{
    action_spectrum, cascade_complex, doubled_grading, rfh_unit_sphere, unit_sphere_data,
    unit_sphere_rs_trans_doubled, CascadeComplex, MorseBottComponent, MorseBottData, MorsePoint,
    RfhReport, SpectrumValue, GREAT_CIRCLE,
};
pub use chainmap::{check_chain_homotopy, verify_continuation, ChainMap, ContinuationReport, HomotopyReport};
pub use complex::{degree_label, Betti, BettiEntry, BoundaryEntry, ChainComplex, Generator};

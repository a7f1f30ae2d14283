pub mod claims;
pub mod energies;
pub mod error;
pub mod field;
pub mod fplab;
pub mod incidence;
pub mod interval;
mod lanes;
pub mod rational;
mod report;
pub mod sets;

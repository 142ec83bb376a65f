//! Pretty-good-transmission scaling analysis for spin chains.
//!
//! The pipeline: build a one-excitation Hamiltonian for a chain family
//! ([`chain`]), diagonalize it in arbitrary precision and reduce the
//! end-to-end transmission amplitude to a trigonometric form ([`spectral`]),
//! classify the frequencies into rationals and rationally independent
//! irrationals ([`numtheory`]), generate arrival-time data by simultaneous
//! Diophantine approximation ([`diophantine`]), and fit the power law
//! t_eps ~ eps^(-K_I/2) ([`scaling`]).

pub mod chain;
pub mod diophantine;
pub mod numtheory;
pub mod scaling;
pub mod spectral;
pub mod value;

pub use chain::{build_one_excitation, brute_force_block, ChainSpec, Family, OneExcHamiltonian};
pub use diophantine::{
    alignment_search, certified_grid_bound, convergents, simultaneous_approx, ApproxOutcome,
    ApproxRecord, ConvergentList, GridStep, Parity, ScalingDataset, ScalingPoint, SearchBudget,
};
pub use numtheory::{classify_frequencies, rational_check, FrequencyAnalysis};
pub use scaling::{
    fit_power_law, pgt_verdict, FitOptions, FitResult, PgtVerdict, VerdictReport,
    VerdictThresholds,
};
pub use spectral::{decompose, evaluate_probability, transfer_form, SpectralData, TransferForm};
pub use value::{parse_coupling, ExactValue};

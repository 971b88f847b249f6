//! Verification suites and measured constants on the dyadic model.

pub mod algebra;
pub mod constants;
pub mod extremal;
pub mod generate;
pub mod linear;
pub mod machinery;
pub mod mainskip;
pub mod one_param;
pub mod report;
pub mod signature;
pub mod smallness;

pub use constants::TrialConfig;
pub use generate::{CoefficientLaw, SymbolGenerator, SymbolKind};
pub use report::{CheckOutcome, ConstantReport, TrialRow};

//! Exact arithmetic for `F_q`-linear special functions over the Laurent
//! series field `F_q((x))` and its tamely/wildly ramified extensions.
//!
//! The crate is layered bottom-up:
//!
//! - [`ff`]: the coefficient tower `F_p ⊂ F_q ⊂ F_{q²}` with Zech-log tables.
//! - [`series`]: truncated generalized Laurent series with rational exponents
//!   and absolute precision caps.
//! - [`carlitz`]: brackets `[n]`, Carlitz factorials `D_n`, the operators
//!   `τ`, `Δ`, `d`, and `F_q`-linear series `Σ c_k t^{q^k}`.
//! - [`special`]: the Carlitz and Dwork–Carlitz exponentials, polylogarithms,
//!   Pochhammer symbols, the `T₁` shift and hypergeometric series.
//! - [`analysis`]: valuation profiles, Newton-slope radius estimates and the
//!   checkers that produce [`analysis::CheckReport`]s.
//! - [`report`]: run configuration, report assembly and rendering for the CLI.

pub mod analysis;
pub mod carlitz;
pub mod ff;
pub mod report;
pub mod series;
pub mod special;

pub use carlitz::{BracketCache, QLinearSeries};
pub use ff::{Field, FieldConfig, FieldElement};
pub use series::{Exponent, GenSeries};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field configuration: {0}")]
    InvalidConfig(String),
    #[error("element index {index} out of range for a field of size {size}")]
    InvalidElement { index: u32, size: u32 },
    #[error("operands belong to different fields")]
    ConfigMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("series is zero to precision {0}; its valuation is unknown")]
    ZeroToPrecision(Exponent),
    #[error("exponent {0} is not representable: its denominator must divide (q-1)*q^s")]
    InvalidExponent(Exponent),
    #[error("exponent overflow: {0}")]
    ExponentOverflow(String),
    #[error("term valuations do not increase over the last {window} indices")]
    DivergenceSuspected { window: usize },
    #[error("inadmissible hypergeometric parameter: {0}")]
    InadmissibleParameter(String),
    #[error("profile has {available} entries past index {tail_start}; need at least {needed}")]
    InsufficientTail {
        tail_start: usize,
        available: usize,
        needed: usize,
    },
    #[error("malformed serialized series: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Valuation profiles, Newton-slope radius estimates and the checkers.
//!
//! # Radius convention
//!
//! `Σ c_k t^{q^k}` converges at `t0` iff `v(c_k) + q^k v(t0) → ∞`. With
//! slopes `s_k = v(c_k)/q^k`, the radius exponent is `r = liminf s_k` and the
//! series converges for `v(t0) > −r`, i.e. `|t0| < q^r`. A finite profile
//! only sees a prefix, so [`RadiusEstimate`] keeps the tail minimum, the last
//! slope and the direction of the tail; a monotone tail is the only case
//! where the finite estimate says anything certain.

mod checks;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::carlitz::QLinearSeries;
use crate::ff::FieldConfig;
use crate::series::Exponent;
use crate::{Error, Result};

pub use checks::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileEntry {
    pub k: usize,
    pub valuation: Exponent,
    /// `v(c_k)/q^k`.
    pub slope: Exponent,
}

/// Exact valuations of the coefficients of a [`QLinearSeries`].
///
/// Coefficients that vanish to their precision have no valuation; they are
/// listed in `lower_bounds` with their cap in place of the valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationProfile {
    pub q: u32,
    pub entries: Vec<ProfileEntry>,
    pub lower_bounds: Vec<ProfileEntry>,
}

fn q_power_i64(q: u32, k: usize) -> Result<i64> {
    u32::try_from(k)
        .ok()
        .and_then(|k| (q as i64).checked_pow(k))
        .ok_or_else(|| Error::ExponentOverflow(format!("{q}^{k}")))
}

pub fn valuation_profile(u: &QLinearSeries) -> Result<ValuationProfile> {
    let q = u.field().q();
    let mut entries = Vec::new();
    let mut lower_bounds = Vec::new();
    for (k, c) in u.coeffs().iter().enumerate() {
        let v = c.valuation_bound();
        let entry = ProfileEntry {
            k,
            valuation: v,
            slope: v / q_power_i64(q, k)?,
        };
        if c.is_zero() {
            lower_bounds.push(entry);
        } else {
            entries.push(entry);
        }
    }
    Ok(ValuationProfile {
        q,
        entries,
        lower_bounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeTrend {
    Constant,
    NonDecreasing,
    NonIncreasing,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusEstimate {
    pub tail_start: usize,
    /// Minimum slope over the computed tail: the finite stand-in for the
    /// liminf, and the reported radius exponent.
    pub tail_min: Exponent,
    pub last_slope: Exponent,
    pub trend: SlopeTrend,
    /// Slopes are monotone over the tail; with a non-decreasing tail the
    /// estimate is a lower bound for the true radius exponent.
    pub monotone_tail: bool,
}

impl RadiusEstimate {
    pub fn radius_exponent(&self) -> Exponent {
        self.tail_min
    }

    pub fn non_decreasing(&self) -> bool {
        matches!(self.trend, SlopeTrend::Constant | SlopeTrend::NonDecreasing)
    }

    pub fn non_increasing(&self) -> bool {
        matches!(self.trend, SlopeTrend::Constant | SlopeTrend::NonIncreasing)
    }
}

/// Radius estimate from the profile entries with `k ≥ tail_start`.
pub fn radius_estimate(profile: &ValuationProfile, tail_start: usize) -> Result<RadiusEstimate> {
    let tail: Vec<Exponent> = profile
        .entries
        .iter()
        .filter(|e| e.k >= tail_start)
        .map(|e| e.slope)
        .collect();
    let (Some(&tail_min), Some(&last_slope)) = (tail.iter().min(), tail.last()) else {
        return Err(Error::InsufficientTail {
            tail_start,
            available: 0,
            needed: 1,
        });
    };
    let up = tail.windows(2).all(|w| w[0] <= w[1]);
    let down = tail.windows(2).all(|w| w[0] >= w[1]);
    let trend = match (up, down) {
        (true, true) => SlopeTrend::Constant,
        (true, false) => SlopeTrend::NonDecreasing,
        (false, true) => SlopeTrend::NonIncreasing,
        (false, false) => SlopeTrend::Mixed,
    };
    Ok(RadiusEstimate {
        tail_start,
        tail_min,
        last_slope,
        trend,
        monotone_tail: up || down,
    })
}

/// `l_1..l_N` by the recurrence `l_n = q l_{n−1} + 1, l_1 = q` and by the
/// closed form `(q^n − 1)/(q − 1) + (q − 1) q^{n−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LSequence {
    pub q: u32,
    pub recurrence: Vec<i128>,
    pub closed_form: Vec<i128>,
}

impl LSequence {
    pub fn agrees(&self) -> bool {
        self.recurrence == self.closed_form
    }

    /// `l_n`, 1-based.
    pub fn get(&self, n: usize) -> Option<i128> {
        n.checked_sub(1)
            .and_then(|i| self.recurrence.get(i))
            .copied()
    }
}

pub fn l_closed_form(q: u32, n: u32) -> Option<i128> {
    let q = q as i128;
    let qn = q.checked_pow(n)?;
    Some((qn - 1) / (q - 1) + (q - 1) * qn / q)
}

pub fn l_sequence(q: u32, n_max: usize) -> Result<LSequence> {
    let overflow = || Error::ExponentOverflow(format!("l_n for q = {q}, n ≤ {n_max}"));
    let mut recurrence = Vec::with_capacity(n_max);
    let mut closed_form = Vec::with_capacity(n_max);
    let mut l = q as i128;
    for n in 1..=n_max {
        if n > 1 {
            l = l
                .checked_mul(q as i128)
                .and_then(|v| v.checked_add(1))
                .ok_or_else(overflow)?;
        }
        recurrence.push(l);
        let n = u32::try_from(n).map_err(|_| overflow())?;
        closed_form.push(l_closed_form(q, n).ok_or_else(overflow)?);
    }
    let seq = LSequence {
        q,
        recurrence,
        closed_form,
    };
    debug_assert!(seq.agrees());
    Ok(seq)
}

/// One checked case. `measured` and `bound` are exact rationals; for
/// identities `measured` is the valuation of the difference of the two sides
/// (the common cap when it vanishes) and `bound` the target precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub inputs: BTreeMap<String, String>,
    pub measured: String,
    pub bound: String,
    /// The bound exactly as printed, where it differs from the one asserted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_bound: Option<String>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

impl CaseRecord {
    pub fn new(
        inputs: &[(&str, String)],
        measured: impl fmt::Display,
        bound: impl fmt::Display,
        pass: bool,
    ) -> Self {
        Self {
            inputs: inputs
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            measured: measured.to_string(),
            bound: bound.to_string(),
            printed_bound: None,
            pass,
            notes: BTreeMap::new(),
        }
    }

    pub fn printed_bound(mut self, b: impl fmt::Display) -> Self {
        self.printed_bound = Some(b.to_string());
        self
    }

    pub fn note(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.notes.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&self, key: &str) -> Option<&str> {
        self.inputs.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// Field the check ran over; serialized once at the top of a report.
    #[serde(skip)]
    pub config: Option<FieldConfig>,
    pub params: BTreeMap<String, String>,
    pub cases: Vec<CaseRecord>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(name: &str, config: FieldConfig) -> Self {
        Self {
            name: name.to_string(),
            config: Some(config),
            params: BTreeMap::new(),
            cases: Vec::new(),
            pass: true,
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, case: CaseRecord) {
        self.pass &= case.pass;
        self.cases.push(case);
    }

    /// Cases whose inputs include every given `(key, value)` pair.
    pub fn cases_where<'a>(
        &'a self,
        filter: &'a [(&str, &str)],
    ) -> impl Iterator<Item = &'a CaseRecord> + 'a {
        self.cases
            .iter()
            .filter(move |c| filter.iter().all(|(k, v)| c.input(k) == Some(*v)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord> {
        self.cases.iter().filter(|c| !c.pass)
    }
}

//! Carlitz-module primitives.
//!
//! Brackets `[n] = x^{q^n} − x`, Carlitz factorials `D_n = [n] D_{n−1}^q`,
//! and the operators `τ`, `Δ` and `d = q-th root ∘ Δ` acting coefficientwise
//! on truncated `F_q`-linear series `Σ_{k ≤ N} c_k t^{q^k}`.

use std::sync::Arc;

use crate::ff::{Field, FieldElement};
use crate::series::{Exponent, GenSeries};
use crate::{Error, Result};

/// Exact exponents must stay well inside `i64` once scaled onto the lattice.
const MAX_EXACT_DEGREE: i64 = 1 << 40;

type Poly = Vec<(i64, FieldElement)>;

/// Exact `[n]` and `D_n` for `n ≤ n_max`, as integer-exponent polynomials.
///
/// Built once; hands out truncations at any requested cap.
#[derive(Debug, Clone)]
pub struct BracketCache {
    field: Arc<Field>,
    brackets: Vec<Poly>,
    factorials: Vec<Poly>,
}

impl BracketCache {
    pub fn new(field: &Arc<Field>, n_max: usize) -> Result<Self> {
        let q = field.q() as i64;
        let minus_one = field.from_int(-1);
        let mut brackets = vec![Poly::new()];
        let mut factorials = vec![vec![(0, field.one())]];
        for n in 1..=n_max {
            let qn = u32::try_from(n)
                .ok()
                .and_then(|k| q.checked_pow(k))
                .filter(|qn| {
                    qn.checked_mul(n as i64)
                        .is_some_and(|d| d <= MAX_EXACT_DEGREE)
                })
                .ok_or_else(|| {
                    Error::ExponentOverflow(format!("D_{n} has degree beyond {MAX_EXACT_DEGREE}"))
                })?;
            let bracket = if qn == 1 {
                Poly::new()
            } else {
                let mut b = vec![(1, minus_one), (qn, field.one())];
                b.retain(|t| !t.1.is_zero());
                b
            };
            // Degree of D_n is n q^n; a cap just above it keeps the product exact.
            let cap = n as i64 * qn + 1;
            let prev = GenSeries::from_poly(field, &factorials[n - 1], cap)?.q_power();
            let br = GenSeries::from_poly(field, &bracket, cap)?;
            let d = (&br * &prev).truncate(cap)?;
            factorials.push(d.terms().map(|(r, c)| (r.to_integer(), c)).collect());
            brackets.push(bracket);
        }
        Ok(Self {
            field: field.clone(),
            brackets,
            factorials,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn n_max(&self) -> usize {
        self.factorials.len() - 1
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::ExponentOverflow(format!(
                "index {n} exceeds the bracket cache (built to {})",
                self.n_max()
            )));
        }
        Ok(())
    }

    /// `[n] mod x^prec`; `[0] = 0`.
    pub fn bracket(&self, n: usize, prec: impl Into<Exponent>) -> Result<GenSeries> {
        self.check(n)?;
        GenSeries::from_poly(&self.field, &self.brackets[n], prec)
    }

    /// `D_n mod x^prec`.
    pub fn factorial(&self, n: usize, prec: impl Into<Exponent>) -> Result<GenSeries> {
        self.check(n)?;
        GenSeries::from_poly(&self.field, &self.factorials[n], prec)
    }

    /// Exact terms of `D_n` (integer exponents, increasing).
    pub fn factorial_terms(&self, n: usize) -> Result<&[(i64, FieldElement)]> {
        self.check(n)?;
        Ok(&self.factorials[n])
    }

    /// `D_n` with a cap one past its degree, i.e. exactly.
    pub fn factorial_exact(&self, n: usize) -> Result<GenSeries> {
        let deg = self.factorial_terms(n)?.last().map_or(0, |t| t.0);
        self.factorial(n, deg + 1)
    }

    /// `1 / D_n` known to absolute precision `prec`.
    ///
    /// Uses `1/D_k = −x^{−1} (1/D_{k−1})^q / (1 − x^{q^k − 1})`: a Frobenius,
    /// a shift and a strided prefix sum per step, linear in the output size.
    /// Relative precision divides by `q` at each step down.
    pub fn factorial_inverse(&self, n: usize, prec: impl Into<Exponent>) -> Result<GenSeries> {
        self.check(n)?;
        let prec = prec.into();
        let v = factorial_valuation(self.field.q(), n);
        if prec + v <= Exponent::from(0) {
            return GenSeries::zero(&self.field, prec);
        }
        let q = self.field.q() as i64;
        let mut caps = vec![prec.ceil().to_integer(); n + 1];
        for k in (1..=n).rev() {
            caps[k - 1] = num_integer::Integer::div_ceil(&(caps[k] + 1), &q);
        }
        let minus_one = self.field.from_int(-1);
        let mut acc = GenSeries::one(&self.field, caps[0])?;
        for k in 1..=n {
            let lifted = acc.q_power();
            let shift = GenSeries::monomial(
                &self.field,
                minus_one,
                -1,
                lifted.prec() - lifted.valuation_bound(),
            )?;
            acc = lifted
                .try_mul(&shift)?
                .div_one_minus_x_pow(q.pow(k as u32) - 1)?;
        }
        acc.truncate(prec)
    }
}

/// `v(D_n) = (q^n − 1)/(q − 1)`.
pub fn factorial_valuation(q: u32, n: usize) -> Exponent {
    let q = q as i64;
    Exponent::from((0..n as u32).map(|k| q.pow(k)).sum::<i64>())
}

/// `[n] mod x^prec`, computed directly.
pub fn bracket(field: &Arc<Field>, n: u32, prec: impl Into<Exponent>) -> Result<GenSeries> {
    if n == 0 {
        return GenSeries::zero(field, prec);
    }
    let qn = (field.q() as i64)
        .checked_pow(n)
        .ok_or_else(|| Error::ExponentOverflow(format!("q^{n}")))?;
    GenSeries::from_poly(field, &[(1, field.from_int(-1)), (qn, field.one())], prec)
}

/// `D_n mod x^prec` via `D_n = [n] · D_{n−1}^q`.
pub fn carlitz_factorial(
    field: &Arc<Field>,
    n: usize,
    prec: impl Into<Exponent>,
) -> Result<GenSeries> {
    BracketCache::new(field, n)?.factorial(n, prec)
}

/// Cap for an exact factor of valuation `v_factor` so that multiplying it
/// into `c` loses nothing: the product then has cap `prec_c + v_factor`.
fn lossless_cap(c: &GenSeries, v_factor: Exponent) -> Exponent {
    c.prec() - c.valuation_bound() + v_factor
}

/// `c · [k]` without precision loss from the bracket.
fn times_bracket(c: &GenSeries, k: usize) -> Result<GenSeries> {
    let br = bracket(c.field(), k as u32, lossless_cap(c, Exponent::from(1)))?;
    c.try_mul(&br)
}

/// A truncated `F_q`-linear series `Σ_{k=0}^{N} c_k t^{q^k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QLinearSeries {
    field: Arc<Field>,
    coeffs: Vec<GenSeries>,
}

impl QLinearSeries {
    pub fn new(field: &Arc<Field>, coeffs: Vec<GenSeries>) -> Result<Self> {
        if coeffs.iter().any(|c| **c.field() != **field) {
            return Err(Error::ConfigMismatch);
        }
        Ok(Self {
            field: field.clone(),
            coeffs,
        })
    }

    /// The identity function `t`.
    pub fn identity(field: &Arc<Field>, order: usize, prec: impl Into<Exponent>) -> Result<Self> {
        let prec = prec.into();
        let mut coeffs = vec![GenSeries::one(field, prec)?];
        for _ in 0..order {
            coeffs.push(GenSeries::zero(field, prec)?);
        }
        Self::new(field, coeffs)
    }

    pub fn zero(field: &Arc<Field>, order: usize, prec: impl Into<Exponent>) -> Result<Self> {
        let prec = prec.into();
        let coeffs = (0..=order)
            .map(|_| GenSeries::zero(field, prec))
            .collect::<Result<_>>()?;
        Self::new(field, coeffs)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn coeffs(&self) -> &[GenSeries] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&GenSeries> {
        self.coeffs.get(k)
    }

    /// Number of known coefficients (`N + 1`).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest known index `N`, if any coefficient is known.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(&GenSeries, &GenSeries) -> Result<GenSeries>,
    ) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| op(a, b))
            .collect::<Result<_>>()?;
        Self::new(&self.field, coeffs)
    }

    /// Coefficientwise sum over the common index range.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, GenSeries::try_add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, GenSeries::try_sub)
    }

    pub fn neg(&self) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(GenSeries::neg).collect(),
        }
    }

    /// Multiplies every coefficient by the constant `s` (as a function,
    /// `t ↦ s · u(t)`).
    pub fn mul_constant(&self, s: &GenSeries) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.try_mul(s))
            .collect::<Result<_>>()?;
        Self::new(&self.field, coeffs)
    }

    /// Per-index agreement precision over the common index range; `None`
    /// where the coefficients differ below their common cap.
    pub fn agreement(&self, other: &Self) -> Vec<Option<Exponent>> {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.agreement(b))
            .collect()
    }

    /// `Δu(t) = u(xt) − x u(t)`: coefficient `k` becomes `c_k [k]`.
    pub fn delta(&self) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| times_bracket(c, k))
            .collect::<Result<_>>()?;
        Self::new(&self.field, coeffs)
    }

    /// `τu = u^q`: `(τu)_{k+1} = c_k^q`, `(τu)_0 = 0`.
    pub fn tau(&self) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        let shifted: Vec<GenSeries> = self.coeffs.iter().map(GenSeries::q_power).collect();
        let zero_cap = shifted.first().map_or(Exponent::from(0), GenSeries::prec);
        coeffs.push(GenSeries::zero(&self.field, zero_cap)?);
        coeffs.extend(shifted);
        Self::new(&self.field, coeffs)
    }

    /// Carlitz derivative `d = q-th root ∘ Δ`: `(du)_k = (c_{k+1} [k+1])^{1/q}`.
    ///
    /// `(Δu)_0 = 0` always, and dividing the `t`-exponents by `q` shifts the
    /// index down by one, so the order drops by one.
    pub fn carlitz_d(&self) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| Ok(times_bracket(c, k)?.q_root()))
            .collect::<Result<_>>()?;
        Self::new(&self.field, coeffs)
    }

    /// `u(a t + b t^q)`: `result_n = c_n a^{q^n} + c_{n−1} b^{q^{n−1}}`.
    pub fn compose_linear(&self, a: &GenSeries, b: &GenSeries) -> Result<Self> {
        let mut a_pow = a.clone();
        let mut b_pow = b.clone();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (n, c) in self.coeffs.iter().enumerate() {
            let mut term = c.try_mul(&a_pow)?;
            if n > 0 {
                term = term.try_add(&self.coeffs[n - 1].try_mul(&b_pow)?)?;
                b_pow = b_pow.q_power();
            }
            coeffs.push(term);
            a_pow = a_pow.q_power();
        }
        Self::new(&self.field, coeffs)
    }

    /// `u(λ t)`: `result_n = c_n λ^{q^n}`.
    pub fn scale_argument(&self, lambda: &GenSeries) -> Result<Self> {
        let mut l_pow = lambda.clone();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c.try_mul(&l_pow)?);
            l_pow = l_pow.q_power();
        }
        Self::new(&self.field, coeffs)
    }

    /// Terms `c_k t0^{q^k}` of the series at `t0`.
    pub fn terms_at(&self, t0: &GenSeries) -> Result<Vec<GenSeries>> {
        let mut t_pow = t0.clone();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.try_mul(&t_pow)?);
            t_pow = t_pow.q_power();
        }
        Ok(out)
    }

    /// Partial sum `Σ_{k ≤ N} c_k t0^{q^k}`.
    ///
    /// Refuses (with [`Error::DivergenceSuspected`]) unless the term
    /// valuations strictly increase over the last `tail_window` steps. The
    /// cap of the result is the smallest cap among the summands; it does not
    /// account for the omitted tail.
    pub fn evaluate(&self, t0: &GenSeries, tail_window: usize) -> Result<GenSeries> {
        let terms = self.terms_at(t0)?;
        let vals: Vec<Exponent> = terms.iter().map(GenSeries::valuation_bound).collect();
        let start = vals.len().saturating_sub(tail_window + 1);
        if vals[start..].windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DivergenceSuspected {
                window: tail_window,
            });
        }
        let mut acc = GenSeries::zero(&self.field, t0.prec().max(Exponent::from(0)) + 1)?;
        let mut first = true;
        for t in terms {
            if first {
                acc = t;
                first = false;
            } else {
                acc = acc.try_add(&t)?;
            }
        }
        Ok(acc)
    }
}

/// `e_C(t) = Σ t^{q^n} / D_n` to order `n`, each coefficient known to `prec`.
pub fn carlitz_exp(
    cache: &BracketCache,
    n: usize,
    prec: impl Into<Exponent>,
) -> Result<QLinearSeries> {
    let prec = prec.into();
    carlitz_exp_graded(cache, &vec![prec; n + 1])
}

/// As [`carlitz_exp`] with an individual cap per coefficient.
pub fn carlitz_exp_graded(cache: &BracketCache, precs: &[Exponent]) -> Result<QLinearSeries> {
    let coeffs = precs
        .iter()
        .enumerate()
        .map(|(k, &p)| cache.factorial_inverse(k, p))
        .collect::<Result<_>>()?;
    QLinearSeries::new(cache.field(), coeffs)
}

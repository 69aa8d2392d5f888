//! Special functions as coefficient generators: the Dwork–Carlitz
//! exponential `E(t) = e_C(σ(t − t^q))` and its value at `1`,
//! polylogarithms `l_n` and their overconvergent differences `L_n`,
//! Pochhammer symbols, the `T₁` shift, and hypergeometric series.
//!
//! # Precision budgets
//!
//! Every function takes the absolute precision wanted for the coefficients it
//! returns and sizes its internal inversions accordingly. Operations whose
//! cap cannot be recovered locally (`q`-th roots of parameters, products with
//! `1/D_n`) need more precision in their *inputs*; the `*_budget` helpers
//! compute how much.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::carlitz::{
    bracket, carlitz_exp_graded, factorial_valuation, BracketCache, QLinearSeries,
};
use crate::ff::{Field, FieldElement};
use crate::series::{Exponent, GenSeries};
use crate::{Error, Result};

fn qi(q: u32) -> i64 {
    q as i64
}

/// `v(σ) = 1/(q−1)`.
pub fn sigma_valuation(q: u32) -> Exponent {
    Exponent::new(1, qi(q) - 1)
}

/// Lower bound for `v(c_n(E))`:
/// `1/(q−1)` at `n = 0`, `1/(q−1) + (q−1)` at `n = 1`, and
/// `(q^{n−2}(q−1)² + 1)/(q−1)` for `n ≥ 2`.
pub fn dwork_coefficient_bound(q: u32, n: usize) -> Exponent {
    let q = qi(q);
    match n {
        0 => Exponent::new(1, q - 1),
        1 => Exponent::new(1, q - 1) + (q - 1),
        _ => Exponent::new(q.pow(n as u32 - 2) * (q - 1) * (q - 1) + 1, q - 1),
    }
}

/// `min_{n > big_n}` of [`dwork_coefficient_bound`]; the bounds increase from
/// `n = 2` on, so this is the minimum of the next one or two.
pub fn dwork_tail_bound(q: u32, big_n: usize) -> Exponent {
    let next = dwork_coefficient_bound(q, big_n + 1);
    let after = dwork_coefficient_bound(q, big_n + 2);
    next.min(after)
}

/// Base precision for the `S_N` trace at step `N`: twice the tail bound past
/// `v(σ)`, so that `v(S_N − σ)` and `v(S_N^{q−1} + x)` are resolved exactly.
pub fn special_value_precision(q: u32, big_n: usize) -> Exponent {
    sigma_valuation(q) + dwork_tail_bound(q, big_n) * 2 + 2
}

/// `σ` with a cap generous enough that `σ^{q^k}` never limits a product with
/// `1/D_k` for `k ≤ n_max` at target `prec`.
fn sigma_for(field: &Arc<Field>, n_max: usize, prec: Exponent) -> Result<GenSeries> {
    let cap = prec.max(Exponent::from(0)) + factorial_valuation(field.q(), n_max) + 1;
    GenSeries::sigma(field, cap.ceil())
}

/// Dwork–Carlitz exponential to order `n`, every coefficient to `prec`.
pub fn dwork_carlitz(
    cache: &BracketCache,
    n: usize,
    prec: impl Into<Exponent>,
) -> Result<QLinearSeries> {
    let prec = prec.into();
    dwork_carlitz_graded(cache, &vec![prec; n + 1])
}

/// `E(t) = e_C(σ t − σ t^q)`, computed by substituting into `e_C`;
/// coefficient `n` is known to `precs[n]`.
pub fn dwork_carlitz_graded(cache: &BracketCache, precs: &[Exponent]) -> Result<QLinearSeries> {
    let field = cache.field();
    let q = field.q();
    let n_max = precs.len().saturating_sub(1);
    // e_C coefficient k feeds result k (times σ^{q^k}) and result k+1
    // (times −σ^{q^k}); both shift valuations by q^k/(q−1).
    let ec_precs: Vec<Exponent> = (0..precs.len())
        .map(|k| {
            let need = precs.get(k + 1).map_or(precs[k], |&p| p.max(precs[k]));
            need - sigma_valuation(q) * qi(q).pow(k as u32)
        })
        .collect();
    let ec = carlitz_exp_graded(cache, &ec_precs)?;
    let top = precs.iter().copied().max().unwrap_or(Exponent::from(0));
    let sigma = sigma_for(field, n_max, top)?;
    let composed = ec.compose_linear(&sigma, &sigma.neg())?;
    let coeffs = composed
        .coeffs()
        .iter()
        .zip(precs)
        .map(|(c, &p)| c.truncate(p))
        .collect::<Result<_>>()?;
    QLinearSeries::new(field, coeffs)
}

/// `σ^{q^n}/D_n − σ^{q^{n−1}}/D_{n−1}` (or `σ` for `n = 0`) by direct
/// powering, independent of the substitution route.
pub fn dwork_coefficient_explicit(
    cache: &BracketCache,
    n: usize,
    prec: impl Into<Exponent>,
) -> Result<GenSeries> {
    let prec = prec.into();
    let field = cache.field();
    let q = field.q();
    let sigma = sigma_for(field, n, prec)?;
    if n == 0 {
        return sigma.truncate(prec);
    }
    let part = |k: usize| -> Result<GenSeries> {
        let e = qi(q).pow(k as u32);
        let inv = cache.factorial_inverse(k, prec - sigma_valuation(q) * e)?;
        sigma.pow(e)?.try_mul(&inv)
    };
    part(n)?.try_sub(&part(n - 1)?)?.truncate(prec)
}

/// One partial sum `S_N` of `E(1)` with its diagnostics.
#[derive(Debug, Clone)]
pub struct SpecialValueStep {
    pub n: usize,
    /// Absolute precision the step was computed at.
    pub prec: Exponent,
    /// `S_N = σ^{q^N}/D_N` (telescoped form).
    pub partial_sum: GenSeries,
    /// Precision to which the direct sum `σ + Σ_{n ≤ N} c_n(E)` matches the
    /// telescoped form, or `None` if they differ.
    pub telescoping_agreement: Option<Exponent>,
    pub valuation: Exponent,
    /// `v(S_N − σ)`, or the precision if the difference vanished there.
    pub distance_to_sigma: Exponent,
    pub distance_exact: bool,
    /// `v(S_N^{q−1} + x)`, or the precision if it vanished there.
    pub residual: Exponent,
    pub residual_exact: bool,
}

/// Partial sums of `E(1)`; each `S_N` should be a unit multiple of `σ`.
#[derive(Debug, Clone)]
pub struct SpecialValueTrace {
    pub steps: Vec<SpecialValueStep>,
}

pub fn dwork_special_value(cache: &BracketCache, n_max: usize) -> Result<SpecialValueTrace> {
    let field = cache.field();
    let q = field.q();
    let mut steps = Vec::with_capacity(n_max);
    for big_n in 1..=n_max {
        let prec = special_value_precision(q, big_n);
        let sigma = sigma_for(field, big_n, prec)?;
        let qn = qi(q).pow(big_n as u32);
        let inv = cache.factorial_inverse(big_n, prec - sigma_valuation(q) * qn)?;
        let telescoped = sigma
            .q_power_n(big_n as u32)
            .try_mul(&inv)?
            .truncate(prec)?;

        let dwork = dwork_carlitz(cache, big_n, prec)?;
        let direct = dwork
            .coeffs()
            .iter()
            .try_fold(GenSeries::zero(field, prec)?, |acc, c| acc.try_add(c))?;
        let telescoping_agreement = direct.agreement(&telescoped);

        let diff = telescoped.try_sub(&sigma)?;
        let minus_x = GenSeries::monomial(field, field.from_int(-1), 1, prec + 1)?;
        let residual = telescoped.pow(qi(q) - 1)?.try_sub(&minus_x)?;
        steps.push(SpecialValueStep {
            n: big_n,
            prec,
            valuation: telescoped.valuation()?,
            distance_to_sigma: diff.valuation_bound(),
            distance_exact: !diff.is_zero(),
            residual: residual.valuation_bound(),
            residual_exact: !residual.is_zero(),
            telescoping_agreement,
            partial_sum: telescoped,
        });
    }
    Ok(SpecialValueTrace { steps })
}

/// `1/[j]^n` to absolute precision `prec`.
fn inverse_bracket_power(
    field: &Arc<Field>,
    j: usize,
    n: u32,
    prec: Exponent,
) -> Result<GenSeries> {
    let cap = prec + n as i64 + 1;
    bracket(field, j as u32, cap)?.pow(n as i64)?.inv()
}

/// `l_n(t) = Σ_{j ≥ 1} t^{q^j}/[j]^n` to order `order`.
pub fn polylog(
    field: &Arc<Field>,
    n: u32,
    order: usize,
    prec: impl Into<Exponent>,
) -> Result<QLinearSeries> {
    let prec = prec.into();
    if n == 0 {
        return Err(Error::InadmissibleParameter(
            "polylogarithm index must be at least 1".into(),
        ));
    }
    let mut coeffs = vec![GenSeries::zero(field, prec)?];
    for j in 1..=order {
        coeffs.push(inverse_bracket_power(field, j, n, prec)?);
    }
    QLinearSeries::new(field, coeffs)
}

/// `L_n(t) = l_n(t) − l_n(t^q)` from its closed coefficients
/// `1/[1]^n` and `1/[j]^n − 1/[j−1]^n`.
pub fn overconvergent_polylog(
    field: &Arc<Field>,
    n: u32,
    order: usize,
    prec: impl Into<Exponent>,
) -> Result<QLinearSeries> {
    let prec = prec.into();
    overconvergent_polylog_graded(field, n, &vec![prec; order + 1])
}

/// [`overconvergent_polylog`] with coefficient `j` known to `precs[j]`.
pub fn overconvergent_polylog_graded(
    field: &Arc<Field>,
    n: u32,
    precs: &[Exponent],
) -> Result<QLinearSeries> {
    if n == 0 {
        return Err(Error::InadmissibleParameter(
            "polylogarithm index must be at least 1".into(),
        ));
    }
    let Some(&p0) = precs.first() else {
        return QLinearSeries::new(field, Vec::new());
    };
    let mut coeffs = vec![GenSeries::zero(field, p0)?];
    for (j, &prec) in precs.iter().enumerate().skip(1) {
        let cur = inverse_bracket_power(field, j, n, prec)?;
        coeffs.push(if j == 1 {
            cur
        } else {
            cur.try_sub(&inverse_bracket_power(field, j - 1, n, prec)?)?
        });
    }
    QLinearSeries::new(field, coeffs)
}

/// `l_n(t) − l_n(t^q)` by substituting `t ↦ t^q` into `l_n`.
pub fn overconvergent_polylog_by_substitution(
    field: &Arc<Field>,
    n: u32,
    order: usize,
    prec: impl Into<Exponent>,
) -> Result<QLinearSeries> {
    let prec = prec.into();
    let l = polylog(field, n, order, prec)?;
    let cap = prec + n as i64;
    let shifted = l.compose_linear(&GenSeries::zero(field, cap)?, &GenSeries::one(field, cap)?)?;
    l.sub(&shifted)
}

/// `⟨a⟩_n = ([0]−a)^{q^n} ([1]−a)^{q^{n−1}} ⋯ ([n−1]−a)^q`, `⟨a⟩_0 = 1`.
pub fn pochhammer(a: &GenSeries, n: usize) -> Result<GenSeries> {
    pochhammer_inner(a, n, None)
}

/// [`pochhammer`] with every factor truncated to `cap` first; the result is
/// known to at least `cap` when `a` is integral.
pub fn pochhammer_capped(a: &GenSeries, n: usize, cap: impl Into<Exponent>) -> Result<GenSeries> {
    pochhammer_inner(a, n, Some(cap.into()))
}

fn pochhammer_inner(a: &GenSeries, n: usize, cap: Option<Exponent>) -> Result<GenSeries> {
    let field = a.field();
    let limit = |s: GenSeries| match cap {
        Some(c) => s.truncate(c),
        None => Ok(s),
    };
    let mut acc = limit(GenSeries::one(field, a.prec().max(Exponent::from(1)))?)?;
    for k in 0..n {
        let factor = bracket(field, k as u32, a.prec())?.try_sub(a)?;
        acc = limit(acc.try_mul(&limit(factor.q_power_n((n - k) as u32))?)?)?;
    }
    Ok(acc)
}

/// `T₁(a) = (a − [1])^{1/q}`.
pub fn t1_shift(a: &GenSeries) -> Result<GenSeries> {
    let b1 = bracket(a.field(), 1, a.prec())?;
    Ok(a.try_sub(&b1)?.q_root())
}

/// Parameters `(a, b; c)` of a hypergeometric series, validated for a given
/// order: `c` avoids `[0], …, [order]` and `[∞] = −x` to precision.
#[derive(Debug, Clone)]
pub struct HypergeomParams {
    pub a: GenSeries,
    pub b: GenSeries,
    pub c: GenSeries,
    admissible_to: usize,
}

impl HypergeomParams {
    pub fn new(a: GenSeries, b: GenSeries, c: GenSeries, order: usize) -> Result<Self> {
        let field = c.field().clone();
        for k in 0..=order {
            if c.try_sub(&bracket(&field, k as u32, c.prec())?)?.is_zero() {
                return Err(Error::InadmissibleParameter(format!(
                    "c = [{k}] to precision {}",
                    c.prec()
                )));
            }
        }
        let x = GenSeries::from_x_power(&field, 1, c.prec())?;
        if c.try_add(&x)?.is_zero() {
            return Err(Error::InadmissibleParameter("c = -x to precision".into()));
        }
        Ok(Self {
            a,
            b,
            c,
            admissible_to: order,
        })
    }

    /// Highest order for which `c` was checked.
    pub fn admissible_to(&self) -> usize {
        self.admissible_to
    }

    /// `(T₁a, T₁b; T₁c)`, checked to `order`.
    pub fn shifted(&self, order: usize) -> Result<Self> {
        Self::new(
            t1_shift(&self.a)?,
            t1_shift(&self.b)?,
            t1_shift(&self.c)?,
            order,
        )
    }

    /// `ab/c`.
    pub fn ratio(&self) -> Result<GenSeries> {
        self.a.try_mul(&self.b)?.try_mul(&self.c.inv()?)
    }
}

/// `F(a, b; c; t) = Σ ⟨a⟩_n ⟨b⟩_n / (⟨c⟩_n D_n) t^{q^n}` to order `order`.
///
/// Each coefficient is computed to `prec` when the parameters carry enough
/// precision (see [`hypergeom_parameter_budget`]); otherwise the cap tracked
/// through the products is lower.
pub fn hypergeom(
    cache: &BracketCache,
    params: &HypergeomParams,
    order: usize,
    prec: impl Into<Exponent>,
) -> Result<QLinearSeries> {
    let prec = prec.into();
    hypergeom_graded(cache, params, &vec![prec; order + 1])
}

/// [`hypergeom`] with coefficient `n` wanted to `precs[n]`. The parameters
/// must be known to `precs[n] + v(D_n)` for that to be reached.
pub fn hypergeom_graded(
    cache: &BracketCache,
    params: &HypergeomParams,
    precs: &[Exponent],
) -> Result<QLinearSeries> {
    let order = precs.len().saturating_sub(1);
    if order > params.admissible_to {
        return Err(Error::InadmissibleParameter(format!(
            "parameters checked to order {}, requested {order}",
            params.admissible_to
        )));
    }
    let field = cache.field();
    let mut coeffs = Vec::with_capacity(precs.len());
    for (n, &prec) in precs.iter().enumerate() {
        if n == 0 {
            coeffs.push(GenSeries::one(field, prec)?);
            continue;
        }
        let cap = prec + factorial_valuation(field.q(), n);
        let pc = pochhammer_capped(&params.c, n, cap)?;
        if pc.is_zero() {
            return Err(Error::InadmissibleParameter(format!(
                "<c>_{n} vanishes to precision {}",
                pc.prec()
            )));
        }
        let num = pochhammer_capped(&params.a, n, cap)?
            .try_mul(&pochhammer_capped(&params.b, n, cap)?)?;
        let coeff = num
            .try_mul(&pc.inv()?)?
            .try_mul(&cache.factorial_inverse(n, prec)?)?
            .truncate(prec)?;
        coeffs.push(coeff);
    }
    QLinearSeries::new(field, coeffs)
}

/// Input precision for unit parameters `a, b, c` so that both sides of the
/// `T₁`-shift identity for `F` are known to `target` at orders `≤ n_max`.
pub fn hypergeom_parameter_budget(q: u32, n_max: usize, target: Exponent) -> Exponent {
    target + factorial_valuation(q, n_max)
}

/// Deterministic generator for parameter sampling.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn subfield_element<R: Rng>(field: &Field, rng: &mut R, nonzero: bool) -> FieldElement {
    let q = field.q() as i64;
    let k = if nonzero {
        rng.gen_range(1..q)
    } else {
        rng.gen_range(0..q)
    };
    if k == 0 {
        FieldElement::ZERO
    } else {
        field.generator_pow((k - 1) * (q + 1))
    }
}

/// A random unit `ζ_0 + ζ_1 x + ⋯ + ζ_{P−1} x^{P−1} mod x^P` with
/// `ζ_i ∈ F_q` and `ζ_0 ≠ 0`.
pub fn random_unit<R: Rng>(field: &Arc<Field>, rng: &mut R, prec: i64) -> Result<GenSeries> {
    let terms: Vec<(i64, FieldElement)> = (0..prec.max(1))
        .map(|i| (i, subfield_element(field, rng, i == 0)))
        .collect();
    GenSeries::from_poly(field, &terms, prec.max(1))
}

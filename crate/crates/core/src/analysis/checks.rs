//! One checker per identity or estimate. Every identity is checked by
//! computing both sides along separate code paths and comparing them
//! coefficientwise to a target precision.

use std::sync::Arc;

use super::{
    l_closed_form, l_sequence, radius_estimate, valuation_profile, CaseRecord, CheckReport,
};
use crate::carlitz::{bracket, carlitz_exp, factorial_valuation, BracketCache, QLinearSeries};
use crate::ff::Field;
use crate::series::{Exponent, GenSeries};
use crate::special::{
    dwork_carlitz_graded, dwork_coefficient_bound, dwork_coefficient_explicit, dwork_special_value,
    dwork_tail_bound, hypergeom, hypergeom_parameter_budget, overconvergent_polylog,
    overconvergent_polylog_by_substitution, overconvergent_polylog_graded, pochhammer, polylog,
    random_unit, seeded_rng, sigma_valuation, t1_shift, HypergeomParams,
};
use crate::{Error, Result};

fn ex(n: i64) -> Exponent {
    Exponent::from(n)
}

fn qpow(q: u32, k: usize) -> Result<i64> {
    super::q_power_i64(q, k)
}

/// `(v(a − b), a ≡ b)` where the valuation is the common cap if they agree.
fn difference(a: &GenSeries, b: &GenSeries) -> Result<(Exponent, bool)> {
    let d = a.try_sub(b)?;
    Ok((d.valuation_bound(), d.is_zero()))
}

fn identity_case(
    inputs: &[(&str, String)],
    a: &GenSeries,
    b: &GenSeries,
    target: Exponent,
) -> Result<CaseRecord> {
    let (v, equal) = difference(a, b)?;
    Ok(CaseRecord::new(inputs, v, target, equal && v >= target))
}

fn identity_cases(
    report: &mut CheckReport,
    label: &[(&str, String)],
    lhs: &QLinearSeries,
    rhs: &QLinearSeries,
    target: Exponent,
) -> Result<()> {
    for (k, (a, b)) in lhs.coeffs().iter().zip(rhs.coeffs()).enumerate() {
        let mut inputs = label.to_vec();
        inputs.push(("index", k.to_string()));
        report.push(identity_case(&inputs, a, b, target)?);
    }
    Ok(())
}

/// Valuation case: `pass` iff the valuation is known and satisfies `ok`.
fn valuation_case(
    inputs: &[(&str, String)],
    c: &GenSeries,
    bound: Exponent,
    ok: impl Fn(Exponent, Exponent) -> bool,
) -> CaseRecord {
    let v = c.valuation_bound();
    let exact = !c.is_zero();
    let case = CaseRecord::new(inputs, v, bound, ok(v, bound) && (exact || v >= bound));
    if exact {
        case
    } else {
        case.note("exact", false)
    }
}

/// `x` with a cap large enough not to limit products at target `cap`.
fn x_series(field: &Arc<Field>, cap: Exponent) -> Result<GenSeries> {
    GenSeries::from_x_power(field, 1, cap.ceil() + 2)
}

/// `v(D_n − (−1)^n x^{(q^n−1)/(q−1)}) ≥ l_n`, plus the arithmetic of `l_n`.
pub fn check_prop1(field: &Arc<Field>, n_max: usize) -> Result<CheckReport> {
    let q = field.q();
    let mut report = CheckReport::new("prop1", field.config()).param("n_max", n_max);
    let cache = BracketCache::new(field, n_max)?;
    let ls = l_sequence(q, n_max.max(1) + 1)?;
    for n in 1..=n_max {
        let d = cache.factorial_exact(n)?;
        let v = factorial_valuation(q, n);
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let lead = GenSeries::monomial(field, field.from_int(sign), v, d.prec())?;
        let diff = d.try_sub(&lead)?;
        let l_n = ls.get(n).expect("computed above");
        let bound = Exponent::from(
            i64::try_from(l_n).map_err(|_| Error::ExponentOverflow(format!("l_{n}")))?,
        );
        let case = valuation_case(
            &[("case", "factorial".into()), ("n", n.to_string())],
            &diff,
            bound,
            |m, b| m >= b,
        );
        let equal = case.measured == case.bound;
        report.push(case.note("equality", equal));
    }
    for n in 1..=n_max {
        let rec = ls.recurrence[n - 1];
        let closed = ls.closed_form[n - 1];
        report.push(CaseRecord::new(
            &[("case", "l_sequence".into()), ("n", n.to_string())],
            rec,
            closed,
            rec == closed,
        ));
        // (q^{n+2} − q)/(q − 1) − l_{n+1} = q^n − 1
        let qq = q as i128;
        let lhs = (qq.pow(n as u32 + 2) - qq) / (qq - 1) - ls.recurrence[n];
        let rhs = qq.pow(n as u32) - 1;
        report.push(CaseRecord::new(
            &[("case", "gap".into()), ("n", n.to_string())],
            lhs,
            rhs,
            lhs == rhs && lhs > 0 && l_closed_form(q, n as u32 + 1) == Some(ls.recurrence[n]),
        ));
    }
    Ok(report)
}

/// Coefficient bounds for `E`, the radius of its tail, and the partial sums
/// `S_N → σ`.
pub fn check_prop2(field: &Arc<Field>, n_max: usize) -> Result<CheckReport> {
    let q = field.q();
    let mut report = CheckReport::new("prop2", field.config()).param("n_max", n_max);
    let cache = BracketCache::new(field, n_max)?;

    let precs: Vec<Exponent> = (0..=n_max)
        .map(|n| dwork_coefficient_bound(q, n) * 2 + 2)
        .collect();
    let e = dwork_carlitz_graded(&cache, &precs)?;
    for (n, &prec) in precs.iter().enumerate().skip(1) {
        let c = e.coeff(n).expect("order n_max");
        let bound = dwork_coefficient_bound(q, n);
        let inputs = [("case", "coefficient".to_string()), ("n", n.to_string())];
        let case = valuation_case(&inputs, c, bound, |m, b| m >= b);
        let equal = case.measured == case.bound;
        report.push(case.note("equality", equal));
        let explicit = dwork_coefficient_explicit(&cache, n, prec)?;
        report.push(identity_case(
            &[
                ("case", "coefficient_dual_path".into()),
                ("n", n.to_string()),
            ],
            c,
            &explicit,
            prec,
        )?);
    }
    if n_max >= 2 {
        let est = radius_estimate(&valuation_profile(&e)?, 2)?;
        let bound = Exponent::new(q as i64 - 1, (q as i64) * (q as i64));
        report.push(
            CaseRecord::new(
                &[("case", "radius".into())],
                est.tail_min,
                bound,
                est.tail_min >= bound,
            )
            .note("last_slope", est.last_slope)
            .note("monotone_tail", est.monotone_tail),
        );
    }

    let trace = dwork_special_value(&cache, n_max)?;
    let mut prev_residual: Option<Exponent> = None;
    for step in &trace.steps {
        let n = step.n.to_string();
        let agreement = step.telescoping_agreement;
        report.push(CaseRecord::new(
            &[("case", "telescoping".into()), ("N", n.clone())],
            agreement.map_or_else(|| "mismatch".to_string(), |a| a.to_string()),
            step.prec,
            agreement.is_some_and(|a| a >= step.prec),
        ));
        let sv = sigma_valuation(q);
        report.push(CaseRecord::new(
            &[("case", "partial_sum_valuation".into()), ("N", n.clone())],
            step.valuation,
            sv,
            step.valuation == sv,
        ));
        let tail = dwork_tail_bound(q, step.n);
        report.push(
            CaseRecord::new(
                &[("case", "distance_to_sigma".into()), ("N", n.clone())],
                step.distance_to_sigma,
                tail,
                step.distance_to_sigma >= tail,
            )
            .note("exact", step.distance_exact),
        );
        let floor = prev_residual.unwrap_or(ex(1));
        report.push(
            CaseRecord::new(
                &[("case", "residual".into()), ("N", n)],
                step.residual,
                floor,
                step.residual_exact && step.residual > floor,
            )
            .note("strict", true),
        );
        prev_residual = Some(step.residual);
    }
    Ok(report)
}

/// `p^e`, the largest power of `p` dividing `n`.
pub fn p_part(p: u32, mut n: u32) -> u32 {
    let mut pe = 1;
    while n > 0 && n.is_multiple_of(p) {
        n /= p;
        pe *= p;
    }
    pe
}

/// Bounds on the coefficients of `L_n`, the bracket differences behind them,
/// and the radius of `L_n`.
///
/// With `n = p^e n'`, `v(c_j(L_n)) = p^e (q^{j−1} + n' − 1) − 2n`, so the
/// slopes tend to `p^e/q`. The radius case asserts slopes at least
/// `1/q − (n+1)/q^N`, the exact value when `p ∤ n`; this certifies
/// convergence on `|t| < q^{1/q}` for every `n`.
pub fn check_prop3(field: &Arc<Field>, n_max: u32, order: usize) -> Result<CheckReport> {
    let q = field.q();
    let qi = q as i64;
    let mut report = CheckReport::new("prop3", field.config())
        .param("n_max", n_max)
        .param("order", order);
    for j in 2..=order {
        let qj1 = qpow(q, j - 1)?;
        let cap = qpow(q, j)? + 2;
        let d = bracket(field, j as u32 - 1, cap)?.try_sub(&bracket(field, j as u32, cap)?)?;
        report.push(valuation_case(
            &[("case", "bracket_difference".into()), ("j", j.to_string())],
            &d,
            ex(qj1),
            |m, b| m == b,
        ));
    }
    for n in 1..=n_max {
        let ni = n as i64;
        let precs: Vec<Exponent> = (0..=order)
            .map(|j| Ok(ex(ni * qpow(q, j.saturating_sub(1))? + ni + 2)))
            .collect::<Result<_>>()?;
        let l = overconvergent_polylog_graded(field, n, &precs)?;
        for j in 2..=order {
            let qj1 = qpow(q, j - 1)?;
            let bound = ex(qj1 - ni - 1);
            let printed = ex(qj1 - ni + 1);
            let c = l.coeff(j).expect("order");
            let case = valuation_case(
                &[
                    ("case", "coefficient".into()),
                    ("n", n.to_string()),
                    ("j", j.to_string()),
                ],
                c,
                bound,
                |m, b| m >= b,
            );
            let meets_printed = c.valuation_bound() >= printed;
            report.push(
                case.printed_bound(printed)
                    .note("meets_printed", meets_printed),
            );
        }
        if order >= 2 {
            let est = radius_estimate(&valuation_profile(&l)?, 2)?;
            let pe = p_part(field.p(), n) as i64;
            let qn = qpow(q, order)?;
            let floor = Exponent::new(1, qi) - Exponent::new(ni + 1, qn);
            let limit = Exponent::new(pe, qi);
            report.push(
                CaseRecord::new(
                    &[("case", "radius".into()), ("n", n.to_string())],
                    est.last_slope,
                    floor,
                    est.non_decreasing() && est.last_slope >= floor,
                )
                .note("limit", limit)
                .note("limit_is_one_over_q", limit == Exponent::new(1, qi))
                .note("tail_min", est.tail_min),
            );
        }
    }
    Ok(report)
}

/// `τ e_C + x e_C = e_C(x t)` and `d e_C = e_C`, with the radius of `e_C`
/// and of `e_C(x t)`.
pub fn check_identity_18(field: &Arc<Field>, order: usize, prec: Exponent) -> Result<CheckReport> {
    let q = field.q();
    let qi = q as i64;
    let mut report = CheckReport::new("exp-ode", field.config())
        .param("order", order)
        .param("precision", prec);
    let cache = BracketCache::new(field, order)?;
    let e = carlitz_exp(&cache, order, prec * qi)?;
    let x = x_series(field, prec * qi + factorial_valuation(q, order))?;

    let tau = e.tau()?;
    let lhs =
        QLinearSeries::new(field, tau.coeffs()[..=order].to_vec())?.add(&e.mul_constant(&x)?)?;
    let rhs = e.scale_argument(&x)?;
    identity_cases(
        &mut report,
        &[("case", "frobenius".into())],
        &lhs,
        &rhs,
        prec,
    )?;
    let de = e.carlitz_d()?;
    identity_cases(&mut report, &[("case", "derivative".into())], &de, &e, prec)?;

    if order >= 1 {
        let qn = qpow(q, order)?;
        let est = radius_estimate(&valuation_profile(&e)?, 1)?;
        let expected = Exponent::new(-(qn - 1), (qi - 1) * qn);
        report.push(
            CaseRecord::new(
                &[("case", "radius".into()), ("series", "ec".into())],
                est.last_slope,
                expected,
                est.non_increasing() && est.last_slope == expected,
            )
            .note("limit", Exponent::new(-1, qi - 1)),
        );
        let est = radius_estimate(&valuation_profile(&rhs)?, 1)?;
        let expected = ex(1) - Exponent::new(qn - 1, (qi - 1) * qn);
        report.push(
            CaseRecord::new(
                &[("case", "radius".into()), ("series", "ec_scaled".into())],
                est.last_slope,
                expected,
                est.non_increasing() && est.last_slope == expected,
            )
            .note("limit", ex(1) - Exponent::new(1, qi - 1)),
        );
    }
    Ok(report)
}

/// `(1 − τ) d l_1 = t`, `Δ l_n = l_{n−1}`, and the two constructions of `L_n`.
pub fn check_polylog_odes(
    field: &Arc<Field>,
    n_max: u32,
    order: usize,
    prec: Exponent,
) -> Result<CheckReport> {
    let q = field.q() as i64;
    let mut report = CheckReport::new("polylog-ode", field.config())
        .param("n_max", n_max)
        .param("order", order)
        .param("precision", prec);
    if order >= 1 {
        let l1 = polylog(field, 1, order, prec * q + 2)?;
        let u = l1.carlitz_d()?;
        let lhs = u.sub(&u.tau()?)?;
        let t = QLinearSeries::identity(field, order - 1, prec)?;
        identity_cases(
            &mut report,
            &[("case", "first_order".into())],
            &lhs,
            &t,
            prec,
        )?;
    }
    let mut prev = polylog(field, 1, order, prec)?;
    for n in 2..=n_max {
        let cur = polylog(field, n, order, prec)?;
        identity_cases(
            &mut report,
            &[("case", "difference".into()), ("n", n.to_string())],
            &cur.delta()?,
            &prev,
            prec,
        )?;
        prev = cur;
    }
    for n in 1..=n_max {
        let direct = overconvergent_polylog(field, n, order, prec)?;
        let subst = overconvergent_polylog_by_substitution(field, n, order, prec)?;
        identity_cases(
            &mut report,
            &[("case", "overconvergent".into()), ("n", n.to_string())],
            &direct,
            &subst,
            prec,
        )?;
    }
    Ok(report)
}

fn sample_label(i: usize) -> String {
    format!("unit{i}")
}

/// `⟨a⟩_n = −a^{q^n} ⟨T₁a⟩_{n−1}^q` for `a ∈ {0, [1], [2]}` and seeded units.
pub fn check_identity_23(
    field: &Arc<Field>,
    n_max: usize,
    samples: usize,
    seed: u64,
    prec: Exponent,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("pochhammer", field.config())
        .param("n_max", n_max)
        .param("samples", samples)
        .param("seed", seed)
        .param("precision", prec);
    let mut params = vec![
        ("0".to_string(), GenSeries::zero(field, prec)?),
        ("[1]".to_string(), bracket(field, 1, prec)?),
        ("[2]".to_string(), bracket(field, 2, prec)?),
    ];
    let mut rng = seeded_rng(seed);
    for i in 0..samples {
        params.push((
            sample_label(i),
            random_unit(field, &mut rng, prec.ceil().to_integer())?,
        ));
    }
    for (label, a) in &params {
        let shifted = t1_shift(a)?;
        for n in 1..=n_max {
            let lhs = pochhammer(a, n)?;
            let rhs = a
                .q_power_n(n as u32)
                .try_mul(&pochhammer(&shifted, n - 1)?.q_power())?
                .neg();
            report.push(identity_case(
                &[("a", label.clone()), ("n", n.to_string())],
                &lhs,
                &rhs,
                prec,
            )?);
        }
    }
    Ok(report)
}

/// The `T₁`-shift identity for `F(a, b; c; t)` over seeded unit triples,
/// the valuations of its coefficients, and the radius of `F(a, b; c; x t)`.
pub fn check_identity_24(
    field: &Arc<Field>,
    n_max: usize,
    samples: usize,
    seed: u64,
    prec: Exponent,
) -> Result<CheckReport> {
    let q = field.q();
    let qi = q as i64;
    let mut report = CheckReport::new("prop4", field.config())
        .param("n_max", n_max)
        .param("samples", samples)
        .param("seed", seed)
        .param("precision", prec);
    let cache = BracketCache::new(field, n_max)?;
    let budget = hypergeom_parameter_budget(q, n_max, prec);
    let x = x_series(field, budget)?;
    let mut rng = seeded_rng(seed);
    for i in 0..samples {
        let label = sample_label(i);
        let cap = budget.ceil().to_integer();
        let a = random_unit(field, &mut rng, cap)?;
        let b = random_unit(field, &mut rng, cap)?;
        let c = random_unit(field, &mut rng, cap)?;
        let params = HypergeomParams::new(a, b, c, n_max)?;
        let f = hypergeom(&cache, &params, n_max, prec)?;
        let rhs = f.scale_argument(&x)?.neg();
        let lhs = if n_max == 0 {
            f.mul_constant(&x)?.neg()
        } else {
            let shifted = params.shifted(n_max - 1)?;
            let f1 = hypergeom(&cache, &shifted, n_max - 1, prec / qi)?;
            f1.scale_argument(&params.ratio()?)?
                .tau()?
                .sub(&f.mul_constant(&x)?)?
        };
        identity_cases(
            &mut report,
            &[("case", "shift".into()), ("triple", label.clone())],
            &lhs,
            &rhs,
            prec,
        )?;

        for n in 1..=n_max {
            let expected = -factorial_valuation(q, n);
            report.push(valuation_case(
                &[
                    ("case", "valuation".into()),
                    ("triple", label.clone()),
                    ("n", n.to_string()),
                ],
                f.coeff(n).expect("order"),
                expected,
                |m, b| m == b,
            ));
        }
        if n_max >= 1 {
            let qn = qpow(q, n_max)?;
            let est = radius_estimate(&valuation_profile(&rhs)?, 1)?;
            let expected = ex(1) - Exponent::new(qn - 1, (qi - 1) * qn);
            report.push(
                CaseRecord::new(
                    &[("case", "radius".into()), ("triple", label)],
                    est.last_slope,
                    expected,
                    est.non_increasing() && est.last_slope == expected,
                )
                .note("limit", ex(1) - Exponent::new(1, qi - 1)),
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldConfig;

    fn field(p: u32, m: u32) -> Arc<Field> {
        Arc::new(Field::new(FieldConfig::new(p, m).unwrap()))
    }

    fn failures(r: &CheckReport) -> Vec<&CaseRecord> {
        r.failures().collect()
    }

    #[test]
    fn prop1_q3() {
        let r = check_prop1(&field(3, 1), 4).unwrap();
        assert!(r.pass, "{:?}", failures(&r));
        let n1: Vec<_> = r
            .cases_where(&[("case", "factorial"), ("n", "1")])
            .collect();
        assert_eq!((n1[0].measured.as_str(), n1[0].bound.as_str()), ("3", "3"));
        let n2: Vec<_> = r
            .cases_where(&[("case", "factorial"), ("n", "2")])
            .collect();
        assert_eq!(n2[0].measured, "10");
    }

    #[test]
    fn prop2_q3() {
        let r = check_prop2(&field(3, 1), 4).unwrap();
        assert!(r.pass, "{:?}", failures(&r));
        let c: Vec<_> = r
            .cases_where(&[("case", "coefficient")])
            .map(|c| c.measured.as_str())
            .collect();
        assert_eq!(&c[..2], ["5/2", "5/2"]);
    }

    #[test]
    fn prop3_small() {
        let r = check_prop3(&field(3, 1), 3, 5).unwrap();
        assert!(r.pass, "{:?}", failures(&r));
        let c: Vec<_> = r
            .cases_where(&[("case", "coefficient"), ("n", "1"), ("j", "2")])
            .collect();
        assert_eq!(c[0].measured, "1");
        assert_eq!(c[0].printed_bound.as_deref(), Some("3"));
        let rad: Vec<_> = r.cases_where(&[("case", "radius"), ("n", "3")]).collect();
        assert_eq!(rad[0].notes["limit"], "1");
    }

    #[test]
    fn identity_18_q2() {
        let r = check_identity_18(&field(2, 1), 6, ex(20)).unwrap();
        assert!(r.pass, "{:?}", failures(&r));
    }

    #[test]
    fn polylog_q3() {
        let r = check_polylog_odes(&field(3, 1), 3, 4, ex(20)).unwrap();
        assert!(r.pass, "{:?}", failures(&r));
    }

    #[test]
    fn identity_23_q2() {
        let r = check_identity_23(&field(2, 1), 4, 3, 7, ex(16)).unwrap();
        assert!(r.pass, "{:?}", failures(&r));
    }

    #[test]
    fn identity_24_q3() {
        let r = check_identity_24(&field(3, 1), 3, 2, 1, ex(20)).unwrap();
        assert!(r.pass, "{:?}", failures(&r));
    }

    #[test]
    fn p_parts() {
        assert_eq!(p_part(2, 12), 4);
        assert_eq!(p_part(3, 4), 1);
        assert_eq!(p_part(5, 25), 25);
    }
}

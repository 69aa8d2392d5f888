//! Randomized kernel properties, shared by the property tests and the
//! acceptance run. Each suite runs `cases` deterministic proptest cases.

use std::sync::{Arc, OnceLock};

use overconv::series::SeriesRecord;
use overconv::{Exponent, Field, FieldConfig, FieldElement, GenSeries};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 10_000;

fn fields() -> &'static [Arc<Field>] {
    static FIELDS: OnceLock<Vec<Arc<Field>>> = OnceLock::new();
    FIELDS.get_or_init(|| {
        [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2), (2, 3)]
            .into_iter()
            .map(|(p, m)| Arc::new(Field::new(FieldConfig::new(p, m).unwrap())))
            .collect()
    })
}

fn field_index() -> impl Strategy<Value = usize> {
    0..fields().len()
}

fn elem(f: &Field, raw: u32) -> FieldElement {
    f.from_index(raw % f.size()).unwrap()
}

/// Raw material for a series: ram, terms as (lattice numerator, element)
/// and the cap numerator.
type RawSeries = (u32, Vec<(i64, u32)>, i64);

fn raw_series() -> impl Strategy<Value = RawSeries> {
    (
        0u32..=1,
        prop::collection::vec((-10i64..60, any::<u32>()), 0..8),
        0i64..70,
    )
}

fn junk() -> impl Strategy<Value = Vec<(i64, u32)>> {
    prop::collection::vec((0i64..40, any::<u32>()), 0..4)
}

fn build(f: &Arc<Field>, (ram, terms, prec): &RawSeries) -> GenSeries {
    let den = (f.q() as i64 - 1) * (f.q() as i64).pow(*ram);
    let terms = terms
        .iter()
        .map(|&(e, c)| (Exponent::new(e, den), elem(f, c)));
    GenSeries::from_terms(f, terms, Exponent::new(*prec, den)).unwrap()
}

/// `s` with extra terms at and above its cap and a larger cap.
fn perturb(s: &GenSeries, junk: &[(i64, u32)]) -> GenSeries {
    let f = s.field();
    let den = (f.q() as i64 - 1) * (f.q() as i64).pow(s.ram());
    let extra = junk
        .iter()
        .map(|&(e, c)| (s.prec() + Exponent::new(e, den), elem(f, c)));
    GenSeries::from_terms(f, s.terms().chain(extra), s.prec() + 10).unwrap()
}

/// `b` agrees with `a` to `a`'s full cap.
fn extends(b: &GenSeries, a: &GenSeries) -> bool {
    b.prec() >= a.prec() && b.agreement(a) == Some(a.prec())
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn field_axioms(cases: u32) -> Result<(), String> {
    let s = (field_index(), any::<u32>(), any::<u32>(), any::<u32>());
    run(cases, s, |(fi, a, b, c)| {
        let f = &fields()[fi];
        let (a, b, c) = (elem(f, a), elem(f, b), elem(f, c));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.zero()), a);
        prop_assert_eq!(f.mul(a, f.one()), a);
        prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
        prop_assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
        if a.is_zero() {
            prop_assert!(f.inv(a).is_err());
        } else {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            prop_assert_eq!(f.pow(a, f.size() as i64 - 1).unwrap(), f.one());
        }
        Ok(())
    })
}

pub fn ultrametric(cases: u32) -> Result<(), String> {
    run(
        cases,
        (field_index(), raw_series(), raw_series()),
        |(fi, ra, rb)| {
            let f = &fields()[fi];
            let (a, b) = (build(f, &ra), build(f, &rb));
            let s = a.try_add(&b).unwrap();
            let (va, vb) = (a.valuation_bound(), b.valuation_bound());
            prop_assert!(s.valuation_bound() >= va.min(vb));
            if !a.is_zero() && !b.is_zero() && va != vb && va.min(vb) < s.prec() {
                prop_assert_eq!(s.valuation().unwrap(), va.min(vb));
            }
            Ok(())
        },
    )
}

pub fn frobenius(cases: u32) -> Result<(), String> {
    let s = (
        field_index(),
        raw_series(),
        raw_series(),
        any::<u32>(),
        any::<u32>(),
    );
    run(cases, s, |(fi, ra, rb, x, y)| {
        let f = &fields()[fi];
        let (x, y) = (elem(f, x), elem(f, y));
        prop_assert_eq!(f.q_power(f.add(x, y)), f.add(f.q_power(x), f.q_power(y)));
        prop_assert_eq!(f.q_power(f.mul(x, y)), f.mul(f.q_power(x), f.q_power(y)));
        let (a, b) = (build(f, &ra), build(f, &rb));
        prop_assert_eq!(
            a.try_add(&b).unwrap().q_power(),
            a.q_power().try_add(&b.q_power()).unwrap()
        );
        prop_assert_eq!(
            a.try_mul(&b).unwrap().q_power(),
            a.q_power().try_mul(&b.q_power()).unwrap()
        );
        Ok(())
    })
}

pub fn root_inverts_power(cases: u32) -> Result<(), String> {
    run(
        cases,
        (field_index(), raw_series(), any::<u32>()),
        |(fi, ra, x)| {
            let f = &fields()[fi];
            let x = elem(f, x);
            prop_assert_eq!(f.q_root(f.q_power(x)), x);
            let a = build(f, &ra);
            prop_assert_eq!(&a.q_power().q_root(), &a);
            prop_assert_eq!(&a.q_root().q_power(), &a);
            Ok(())
        },
    )
}

pub fn inverse_round_trip(cases: u32) -> Result<(), String> {
    run(cases, (field_index(), raw_series()), |(fi, ra)| {
        let f = &fields()[fi];
        let a = build(f, &ra);
        if a.is_zero() {
            prop_assert!(a.inv().is_err());
            return Ok(());
        }
        let inv = a.inv().unwrap();
        let v = a.valuation().unwrap();
        prop_assert_eq!(inv.valuation().unwrap(), -v);
        prop_assert_eq!(inv.prec(), a.prec() - v * 2);
        let one = a.try_mul(&inv).unwrap();
        prop_assert_eq!(one.prec(), a.prec() - v);
        prop_assert!(one.equal_to_precision(&GenSeries::one(f, one.prec()).unwrap()));
        prop_assert!(inv.inv().unwrap().equal_to_precision(&a));
        Ok(())
    })
}

pub fn precision_contract(cases: u32) -> Result<(), String> {
    let s = (field_index(), raw_series(), raw_series(), junk(), junk());
    run(cases, s, |(fi, ra, rb, ja, jb)| {
        let f = &fields()[fi];
        let (a, b) = (build(f, &ra), build(f, &rb));
        let (a2, b2) = (perturb(&a, &ja), perturb(&b, &jb));
        prop_assert!(extends(&a2.try_add(&b2).unwrap(), &a.try_add(&b).unwrap()));
        prop_assert!(extends(&a2.try_mul(&b2).unwrap(), &a.try_mul(&b).unwrap()));
        prop_assert!(extends(&a2.q_power(), &a.q_power()));
        prop_assert!(extends(&a2.q_root(), &a.q_root()));
        if !a.is_zero() {
            prop_assert!(extends(&a2.inv().unwrap(), &a.inv().unwrap()));
        }
        Ok(())
    })
}

pub fn record_round_trip(cases: u32) -> Result<(), String> {
    run(cases, (field_index(), raw_series()), |(fi, ra)| {
        let f = &fields()[fi];
        let a = build(f, &ra);
        let json = serde_json::to_string(&a.to_record()).unwrap();
        let back: SeriesRecord = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&GenSeries::from_record(f, &back).unwrap(), &a);
        let other = &fields()[(fi + 1) % fields().len()];
        prop_assert!(GenSeries::from_record(other, &back).is_err());
        Ok(())
    })
}

#[allow(dead_code)]
pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

#[allow(dead_code)]
pub const SUITES: [Suite; 7] = [
    ("field axioms", field_axioms),
    ("ultrametric inequality", ultrametric),
    ("Frobenius homomorphism", frobenius),
    ("q-th root inverts q-th power", root_inverts_power),
    ("inverse round trip", inverse_round_trip),
    ("precision contract under perturbation", precision_contract),
    ("series record round trip", record_round_trip),
];

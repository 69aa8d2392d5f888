mod kernel;

use kernel::CASES;

fn check(result: Result<(), String>) {
    if let Err(e) = result {
        panic!("{e}");
    }
}

#[test]
fn field_axioms() {
    check(kernel::field_axioms(CASES));
}

#[test]
fn ultrametric() {
    check(kernel::ultrametric(CASES));
}

#[test]
fn frobenius() {
    check(kernel::frobenius(CASES));
}

#[test]
fn root_inverts_power() {
    check(kernel::root_inverts_power(CASES));
}

#[test]
fn inverse_round_trip() {
    check(kernel::inverse_round_trip(CASES));
}

#[test]
fn precision_contract() {
    check(kernel::precision_contract(CASES));
}

#[test]
fn record_round_trip() {
    check(kernel::record_round_trip(CASES));
}

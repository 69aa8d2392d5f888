//! Exact arithmetic in the tower `F_p ⊂ F_q ⊂ F_{q²}`, `q = p^m`.
//!
//! Elements of `F_{q²}` are stored by discrete logarithm with respect to a
//! canonical primitive element `g`; addition goes through a Zech logarithm
//! table. Both the defining modulus and `g` are chosen by a fixed rule, so
//! every run builds bit-identical tables:
//!
//! * the modulus is the smallest monic irreducible polynomial of degree `2m`
//!   over `F_p`, ordering candidates by the integer `c_0 + c_1 p + … +
//!   c_{2m-1} p^{2m-1}` of their non-leading coefficients;
//! * `g` is the primitive element with the smallest *index*, where the index
//!   of `a_0 + a_1 y + … ∈ F_p[y]/(f)` is `a_0 + a_1 p + …`.
//!
//! The index is also the canonical external form of an element (see
//! [`Field::index`]); the subfield `F_p` maps onto indices `0..p`.

use std::fmt;

use crate::{Error, Result};

/// Largest supported `q²`; tables are dense arrays of this length.
pub const MAX_TABLE_SIZE: u32 = 1 << 16;

/// The parameters `(p, m)` of the coefficient tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldConfig {
    p: u32,
    m: u32,
}

impl FieldConfig {
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidConfig(format!("p = {p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        let size = (p as u64)
            .checked_pow(2 * m)
            .filter(|&s| s <= MAX_TABLE_SIZE as u64);
        if size.is_none() {
            return Err(Error::InvalidConfig(format!(
                "q² = {p}^{} exceeds the table limit {MAX_TABLE_SIZE}",
                2 * m
            )));
        }
        Ok(Self { p, m })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.p.pow(self.m)
    }
}

impl fmt::Display for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (q = {})", self.p, self.m, self.q())
    }
}

/// An element of `F_{q²}`, valid relative to the [`Field`] that produced it.
///
/// `0` encodes zero and `k + 1` encodes `g^k`, so equality of elements is
/// equality of representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    fn from_log(k: u32) -> Self {
        FieldElement(k + 1)
    }

    fn log(self) -> Option<u32> {
        self.0.checked_sub(1)
    }
}

const NO_LOG: u32 = u32::MAX;

/// `F_{q²}` with precomputed logarithm tables.
#[derive(Debug)]
pub struct Field {
    config: FieldConfig,
    q: u32,
    /// `q² − 1`, the order of the multiplicative group.
    order: u32,
    modulus: Vec<u32>,
    generator_index: u32,
    /// `exp[k]` is the index of `g^k`.
    exp: Vec<u32>,
    /// `log[i]` is the discrete log of the element with index `i` (unused at 0).
    log: Vec<u32>,
    /// `zech[k] = log(1 + g^k)`, or `NO_LOG` when `g^k = −1`.
    zech: Vec<u32>,
    neg_one_log: u32,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(config: FieldConfig) -> Self {
        let p = config.p;
        let degree = (2 * config.m) as usize;
        let q = config.q();
        let size = q * q;
        let order = size - 1;

        let modulus = smallest_irreducible(p, degree);
        let ring = QuotientRing {
            p,
            modulus: &modulus,
        };

        let order_primes = prime_factors(order);
        let generator_index = (1..size)
            .find(|&idx| {
                let a = index_to_vec(idx, p, degree);
                order_primes
                    .iter()
                    .all(|&r| !ring.is_one(&ring.pow(&a, (order / r) as u64)))
            })
            .expect("multiplicative group of a finite field is cyclic");

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![NO_LOG; size as usize];
        let g = index_to_vec(generator_index, p, degree);
        let mut cur = index_to_vec(1, p, degree);
        for k in 0..order {
            let idx = vec_to_index(&cur, p);
            exp.push(idx);
            log[idx as usize] = k;
            cur = ring.mul(&cur, &g);
        }
        debug_assert!(ring.is_one(&cur));

        let zech = exp
            .iter()
            .map(|&idx| {
                let s = index_add(1, idx, p);
                if s == 0 {
                    NO_LOG
                } else {
                    log[s as usize]
                }
            })
            .collect();

        let neg_one_log = if p == 2 { 0 } else { order / 2 };

        Self {
            config,
            q,
            order,
            modulus,
            generator_index,
            exp,
            log,
            zech,
            neg_one_log,
        }
    }

    pub fn config(&self) -> FieldConfig {
        self.config
    }

    pub fn p(&self) -> u32 {
        self.config.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of elements of `F_{q²}`.
    pub fn size(&self) -> u32 {
        self.order + 1
    }

    /// Coefficients `c_0, …, c_{2m}` of the defining modulus (monic).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    pub fn generator(&self) -> FieldElement {
        self.element_at(self.generator_index)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> FieldElement {
        let r = n.rem_euclid(self.p() as i64) as u32;
        self.element_at(r)
    }

    /// Element with the given canonical index (coefficient vector over `F_p`
    /// read as base-`p` digits).
    pub fn from_index(&self, index: u32) -> Result<FieldElement> {
        if index >= self.size() {
            return Err(Error::InvalidElement {
                index,
                size: self.size(),
            });
        }
        Ok(self.element_at(index))
    }

    fn element_at(&self, index: u32) -> FieldElement {
        if index == 0 {
            FieldElement::ZERO
        } else {
            FieldElement::from_log(self.log[index as usize])
        }
    }

    /// Canonical index of `a`.
    pub fn index(&self, a: FieldElement) -> u32 {
        match a.log() {
            None => 0,
            Some(k) => self.exp[k as usize],
        }
    }

    /// Coefficient vector of `a` over `F_p` (length `2m`, constant term first).
    pub fn coefficients(&self, a: FieldElement) -> Vec<u32> {
        index_to_vec(self.index(a), self.p(), 2 * self.config.m as usize)
    }

    /// `g^k` for any integer `k`.
    pub fn generator_pow(&self, k: i64) -> FieldElement {
        FieldElement::from_log(k.rem_euclid(self.order as i64) as u32)
    }

    /// Discrete log of `a` to base `g`; `None` for zero.
    pub fn discrete_log(&self, a: FieldElement) -> Option<u32> {
        a.log()
    }

    pub fn check(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 > self.order {
            return Err(Error::InvalidElement {
                index: a.0,
                size: self.size(),
            });
        }
        Ok(a)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (Some(i), Some(j)) = (a.log(), b.log()) else {
            return if a.is_zero() { b } else { a };
        };
        let k = if j >= i { j - i } else { j + self.order - i };
        match self.zech[k as usize] {
            NO_LOG => FieldElement::ZERO,
            z => FieldElement::from_log(self.add_logs(i, z)),
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        match a.log() {
            None => a,
            Some(i) => FieldElement::from_log(self.add_logs(i, self.neg_one_log)),
        }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match (a.log(), b.log()) {
            (Some(i), Some(j)) => FieldElement::from_log(self.add_logs(i, j)),
            _ => FieldElement::ZERO,
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        match a.log() {
            None => Err(Error::DivisionByZero),
            Some(0) => Ok(a),
            Some(i) => Ok(FieldElement::from_log(self.order - i)),
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`; negative exponents go through [`Field::inv`]. `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, e: i64) -> Result<FieldElement> {
        match a.log() {
            None if e == 0 => Ok(FieldElement::ONE),
            None if e < 0 => Err(Error::DivisionByZero),
            None => Ok(FieldElement::ZERO),
            Some(i) => {
                let k = (i as i128 * e as i128).rem_euclid(self.order as i128);
                Ok(FieldElement::from_log(k as u32))
            }
        }
    }

    /// The Frobenius `a ↦ a^q`, the generator of `Gal(F_{q²}/F_q)`.
    pub fn q_power(&self, a: FieldElement) -> FieldElement {
        match a.log() {
            None => a,
            Some(i) => {
                let k = (i as u64 * self.q as u64) % self.order as u64;
                FieldElement::from_log(k as u32)
            }
        }
    }

    /// The unique `b` with `b^q = a`. The `q`-power map has order two on
    /// `F_{q²}`, so this coincides with [`Field::q_power`].
    pub fn q_root(&self, a: FieldElement) -> FieldElement {
        self.q_power(a)
    }

    pub fn is_in_subfield(&self, a: FieldElement) -> bool {
        self.q_power(a) == a
    }

    /// `g^{(q+1)k}` for `k = 0..q−1`: the nonzero elements of `F_q`.
    pub fn subfield_units(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let step = self.q + 1;
        (0..self.q - 1).map(move |k| FieldElement::from_log(k * step))
    }

    /// A constant `c` with `c^{q−1} = −1`: `1` in characteristic two,
    /// otherwise `g^{(q+1)/2}`.
    pub fn sigma_unit(&self) -> FieldElement {
        if self.p() == 2 {
            FieldElement::ONE
        } else {
            FieldElement::from_log(self.q.div_ceil(2))
        }
    }

    fn add_logs(&self, i: u32, j: u32) -> u32 {
        let s = i as u64 + j as u64;
        (s % self.order as u64) as u32
    }
}

// Polynomials over F_p, little-endian coefficient vectors.

fn index_to_vec(mut idx: u32, p: u32, len: usize) -> Vec<u32> {
    let mut v = vec![0; len];
    for c in v.iter_mut() {
        *c = idx % p;
        idx /= p;
    }
    v
}

fn vec_to_index(v: &[u32], p: u32) -> u32 {
    v.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn index_add(mut a: u32, mut b: u32, p: u32) -> u32 {
    let (mut out, mut scale) = (0, 1);
    while a > 0 || b > 0 {
        out += ((a % p + b % p) % p) * scale;
        a /= p;
        b /= p;
        scale *= p;
    }
    out
}

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is tiny; Fermat.
    let mut r = 1u64;
    let (mut b, mut e, m) = (a as u64 % p as u64, p as u64 - 2, p as u64);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u32
}

/// Remainder of `a` modulo a monic-or-not nonzero `f`.
fn poly_rem(mut a: Vec<u32>, f: &[u32], p: u32) -> Vec<u32> {
    trim(&mut a);
    let df = f.len() - 1;
    let lead_inv = inv_mod_p(f[df], p);
    while a.len() > df {
        let shift = a.len() - 1 - df;
        let c = (*a.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &fc) in f.iter().enumerate() {
            let t = (c as u64 * fc as u64 % p as u64) as u32;
            a[shift + i] = (a[shift + i] + p - t) % p;
        }
        trim(&mut a);
    }
    a
}

fn poly_gcd(mut a: Vec<u32>, mut b: Vec<u32>, p: u32) -> Vec<u32> {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

struct QuotientRing<'a> {
    p: u32,
    modulus: &'a [u32],
}

impl QuotientRing<'_> {
    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut prod = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let prod = prod.into_iter().map(|c| c as u32).collect();
        let mut r = poly_rem(prod, self.modulus, self.p);
        r.resize(self.degree(), 0);
        r
    }

    fn pow(&self, a: &[u32], mut e: u64) -> Vec<u32> {
        let mut result = index_to_vec(1, self.p, self.degree());
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    fn is_one(&self, a: &[u32]) -> bool {
        a.first() == Some(&1) && a[1..].iter().all(|&c| c == 0)
    }
}

/// Rabin's test: `f` of degree `d` is irreducible iff `y^{p^d} ≡ y` and
/// `gcd(y^{p^{d/r}} − y, f) = 1` for every prime `r | d`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let d = f.len() - 1;
    if d == 1 {
        return true;
    }
    let ring = QuotientRing { p, modulus: f };
    let y = index_to_vec(p, p, d);
    let frob_iter = |k: usize| {
        let mut cur = y.clone();
        for _ in 0..k {
            cur = ring.pow(&cur, p as u64);
        }
        cur
    };
    if frob_iter(d) != y {
        return false;
    }
    prime_factors(d as u32).into_iter().all(|r| {
        let mut h = frob_iter(d / r as usize);
        h[1] = (h[1] + p - 1) % p;
        let g = poly_gcd(f.to_vec(), h, p);
        g.len() == 1
    })
}

fn smallest_irreducible(p: u32, degree: usize) -> Vec<u32> {
    let count = p.pow(degree as u32);
    (0..count)
        .map(|idx| {
            let mut f = index_to_vec(idx, p, degree);
            f.push(1);
            f
        })
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

fn is_prime(n: u32) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u32, m: u32) -> Field {
        Field::new(FieldConfig::new(p, m).unwrap())
    }

    #[test]
    fn config_validation() {
        assert!(FieldConfig::new(4, 1).is_err());
        assert!(FieldConfig::new(7, 0).is_err());
        assert!(FieldConfig::new(2, 9).is_err());
        assert_eq!(FieldConfig::new(2, 8).unwrap().q(), 256);
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = field(3, 1);
        let two = f.from_int(2);
        assert_eq!(f.add(two, two), f.from_int(1));
        assert_eq!(f.inv(two).unwrap(), two);
        assert_eq!(f.add(two, f.zero()), two);
        assert_eq!(f.index(f.from_int(-1)), 2);
    }

    #[test]
    fn f4_multiplication_table() {
        // q = 2: the tower is F_2 ⊂ F_2 ⊂ F_4.
        let f = field(2, 1);
        assert_eq!(f.modulus(), &[1, 1, 1]);
        let w = f.generator();
        let w2 = f.mul(w, w);
        assert_eq!(f.add(w, w), f.zero());
        assert_eq!(f.mul(w, w2), f.one());
        // Brute-force table over F_2[y]/(y² + y + 1) by index.
        let by_index = |i: u32, j: u32| -> u32 {
            let (a0, a1, b0, b1) = (i & 1, i >> 1, j & 1, j >> 1);
            let c0 = (a0 * b0 + a1 * b1) % 2;
            let c1 = (a0 * b1 + a1 * b0 + a1 * b1) % 2;
            c0 | (c1 << 1)
        };
        for i in 0..4 {
            for j in 0..4 {
                let a = f.from_index(i).unwrap();
                let b = f.from_index(j).unwrap();
                assert_eq!(f.index(f.mul(a, b)), by_index(i, j));
                assert_eq!(f.index(f.add(a, b)), i ^ j);
            }
        }
    }

    #[test]
    fn f9_generator_and_frobenius() {
        let f = field(3, 1);
        let g = f.generator();
        assert_eq!(f.pow(g, 8).unwrap(), f.one());
        assert_ne!(f.pow(g, 4).unwrap(), f.one());
        let g3 = f.pow(g, 3).unwrap();
        assert_eq!(f.q_power(g), g3);
        assert_eq!(f.q_root(g3), g);
        assert_eq!(f.q_power(f.zero()), f.zero());
        for z in f.subfield_units() {
            assert_eq!(f.q_power(z), z);
        }
    }

    #[test]
    fn sigma_unit_root_of_minus_one() {
        assert_eq!(field(2, 1).sigma_unit(), FieldElement::ONE);
        let f = field(3, 1);
        let c = f.sigma_unit();
        assert_eq!(c, f.pow(f.generator(), 2).unwrap());
        assert_eq!(f.pow(c, 2).unwrap(), f.from_int(-1));
        for (p, m) in [
            (2, 1),
            (2, 2),
            (3, 1),
            (5, 1),
            (7, 1),
            (3, 2),
            (2, 3),
            (13, 1),
        ] {
            let f = field(p, m);
            let q = f.q() as i64;
            assert_eq!(
                f.pow(f.sigma_unit(), q - 1).unwrap(),
                f.from_int(-1),
                "p={p} m={m}"
            );
        }
    }

    #[test]
    fn subfield_is_fixed_field() {
        for (p, m) in [(2, 2), (3, 1), (5, 1)] {
            let f = field(p, m);
            let fixed = (0..f.size())
                .filter(|&i| {
                    let a = f.from_index(i).unwrap();
                    f.is_in_subfield(a)
                })
                .count();
            assert_eq!(fixed as u32, f.q());
            assert_eq!(f.subfield_units().count() as u32, f.q() - 1);
        }
    }

    #[test]
    fn division_by_zero() {
        let f = field(5, 1);
        assert!(matches!(f.inv(f.zero()), Err(Error::DivisionByZero)));
        assert!(f.pow(f.zero(), -1).is_err());
        assert_eq!(f.pow(f.zero(), 0).unwrap(), f.one());
        assert!(f.from_index(25).is_err());
    }

    #[test]
    fn moduli_are_deterministic() {
        // x^4 + x + 1 is the first irreducible quartic over F_2.
        assert_eq!(field(2, 2).modulus(), &[1, 1, 0, 0, 1]);
        // x^2 + 1 is irreducible over F_3 and comes first in index order.
        assert_eq!(field(3, 1).modulus(), &[1, 0, 1]);
        assert_eq!(field(5, 1).modulus(), &[2, 0, 1]);
    }
}

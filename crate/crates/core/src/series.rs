//! Truncated generalized Laurent series over `F_{q²}`.
//!
//! A [`GenSeries`] is a finite set of terms `ζ x^r` with rational exponents,
//! known modulo `x^prec`. Exponents live on the lattice `Z / ((q−1) q^ram)`;
//! they are stored as integer numerators over that common denominator, and
//! `ram` is always the smallest value that represents every exponent and the
//! precision cap. With `ram` kept minimal, two series are equal iff their
//! representations are equal.
//!
//! Precision is absolute. Each operation states how the cap propagates; a
//! series without terms is *zero to precision* and its valuation is treated
//! as `≥ prec`, never as `+∞`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::ff::{Field, FieldElement};
use crate::{Error, Result};

/// Exact rational exponent (or valuation, or precision cap).
pub type Exponent = Ratio<i64>;

/// Largest dense scratch buffer used by inversion, in lattice positions.
const MAX_DENSE_SPAN: i64 = 1 << 28;
/// Highest ramification level probed when placing an exponent on the lattice.
const MAX_RAM: u32 = 40;

#[derive(Clone)]
pub struct GenSeries {
    field: Arc<Field>,
    ram: u32,
    /// Cap in lattice units: terms with exponent `>= prec` are unknown.
    prec: i64,
    /// Sorted, distinct exponents in lattice units with nonzero coefficients.
    terms: Vec<(i64, FieldElement)>,
}

fn q_pow(field: &Field, k: u32) -> Option<i64> {
    (field.q() as i64).checked_pow(k)
}

fn denominator(field: &Field, ram: u32) -> i64 {
    q_pow(field, ram)
        .and_then(|p| p.checked_mul(field.q() as i64 - 1))
        .expect("ramification level overflows the exponent lattice")
}

/// Smallest `s` with `r ∈ Z / ((q−1) q^s)`, and the numerator there.
fn place(field: &Field, r: Exponent) -> Result<(u32, i64)> {
    let q = field.q() as i64;
    let d = *r.denom();
    let tame = d.gcd(&(q - 1));
    let wild = d / tame;
    let mut s = 0;
    let mut qs: i64 = 1;
    while qs % wild != 0 {
        s += 1;
        qs = match qs.checked_mul(q) {
            Some(v) if s <= MAX_RAM => v,
            _ => return Err(Error::InvalidExponent(r)),
        };
    }
    let num = r
        .numer()
        .checked_mul(denominator(field, s) / d)
        .ok_or_else(|| Error::ExponentOverflow(format!("exponent {r}")))?;
    Ok((s, num))
}

fn rescale(field: &Field, value: i64, from: u32, to: u32) -> i64 {
    debug_assert!(to >= from);
    let factor = q_pow(field, to - from).expect("lattice rescale overflow");
    value
        .checked_mul(factor)
        .expect("exponent overflow while aligning lattices")
}

impl GenSeries {
    fn from_raw(
        field: Arc<Field>,
        ram: u32,
        prec: i64,
        mut terms: Vec<(i64, FieldElement)>,
    ) -> Self {
        terms.retain(|&(e, c)| e < prec && !c.is_zero());
        let mut s = Self {
            field,
            ram,
            prec,
            terms,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let q = self.field.q() as i64;
        while self.ram > 0 && self.prec % q == 0 && self.terms.iter().all(|&(e, _)| e % q == 0) {
            self.prec /= q;
            for t in &mut self.terms {
                t.0 /= q;
            }
            self.ram -= 1;
        }
    }

    /// `0 mod x^prec`.
    pub fn zero(field: &Arc<Field>, prec: impl Into<Exponent>) -> Result<Self> {
        Self::from_terms(field, std::iter::empty(), prec)
    }

    /// `1 mod x^prec`.
    pub fn one(field: &Arc<Field>, prec: impl Into<Exponent>) -> Result<Self> {
        Self::monomial(field, field.one(), 0, prec)
    }

    /// `x^r mod x^prec`.
    pub fn from_x_power(
        field: &Arc<Field>,
        r: impl Into<Exponent>,
        prec: impl Into<Exponent>,
    ) -> Result<Self> {
        Self::monomial(field, field.one(), r, prec)
    }

    /// `c · x^r mod x^prec`.
    pub fn monomial(
        field: &Arc<Field>,
        c: FieldElement,
        r: impl Into<Exponent>,
        prec: impl Into<Exponent>,
    ) -> Result<Self> {
        Self::from_terms(field, std::iter::once((r.into(), c)), prec)
    }

    /// Builds a series from arbitrary terms; duplicate exponents are summed
    /// and terms at or above `prec` are dropped.
    pub fn from_terms(
        field: &Arc<Field>,
        terms: impl IntoIterator<Item = (Exponent, FieldElement)>,
        prec: impl Into<Exponent>,
    ) -> Result<Self> {
        let prec = prec.into();
        let terms: Vec<_> = terms.into_iter().collect();
        let mut ram = place(field, prec)?.0;
        for (r, c) in &terms {
            field.check(*c)?;
            ram = ram.max(place(field, *r)?.0);
        }
        let den = denominator(field, ram);
        let to_lattice = |r: Exponent| -> Result<i64> {
            r.numer()
                .checked_mul(den / r.denom())
                .ok_or_else(|| Error::ExponentOverflow(format!("exponent {r}")))
        };
        let mut acc: Vec<(i64, FieldElement)> = Vec::with_capacity(terms.len());
        for (r, c) in terms {
            acc.push((to_lattice(r)?, c));
        }
        acc.sort_by_key(|t| t.0);
        let merged = merge_sorted(field, acc);
        Ok(Self::from_raw(
            field.clone(),
            ram,
            to_lattice(prec)?,
            merged,
        ))
    }

    /// A polynomial with integer exponents, truncated at `prec`.
    pub fn from_poly(
        field: &Arc<Field>,
        poly: &[(i64, FieldElement)],
        prec: impl Into<Exponent>,
    ) -> Result<Self> {
        Self::from_terms(
            field,
            poly.iter().map(|&(e, c)| (Exponent::from(e), c)),
            prec,
        )
    }

    /// `σ = c · x^{1/(q−1)}` with `c^{q−1} = −1`, so that `σ^{q−1} = −x`.
    pub fn sigma(field: &Arc<Field>, prec: impl Into<Exponent>) -> Result<Self> {
        let q = field.q() as i64;
        Self::monomial(field, field.sigma_unit(), Exponent::new(1, q - 1), prec)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// Ramification level `s`: exponents lie in `Z / ((q−1) q^s)`.
    pub fn ram(&self) -> u32 {
        self.ram
    }

    fn den(&self) -> i64 {
        denominator(&self.field, self.ram)
    }

    fn exponent(&self, e: i64) -> Exponent {
        Exponent::new(e, self.den())
    }

    pub fn prec(&self) -> Exponent {
        self.exponent(self.prec)
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, FieldElement)> + '_ {
        self.terms.iter().map(|&(e, c)| (self.exponent(e), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True when no term is known below the precision cap.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, r: Exponent) -> FieldElement {
        let den = self.den();
        if (r * den).is_integer() {
            let e = (r * den).to_integer();
            if let Ok(i) = self.terms.binary_search_by_key(&e, |t| t.0) {
                return self.terms[i].1;
            }
        }
        FieldElement::ZERO
    }

    pub fn leading_coefficient(&self) -> Option<FieldElement> {
        self.terms.first().map(|t| t.1)
    }

    /// Least stored exponent.
    pub fn valuation(&self) -> Result<Exponent> {
        match self.terms.first() {
            Some(&(e, _)) => Ok(self.exponent(e)),
            None => Err(Error::ZeroToPrecision(self.prec())),
        }
    }

    /// The valuation, or the precision cap for a series that is zero to
    /// precision (a valid lower bound either way).
    pub fn valuation_bound(&self) -> Exponent {
        self.exponent(self.valuation_lattice())
    }

    fn valuation_lattice(&self) -> i64 {
        self.terms.first().map_or(self.prec, |t| t.0)
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field {
            Ok(())
        } else {
            Err(Error::ConfigMismatch)
        }
    }

    /// Terms and cap of `self` re-expressed at ramification level `ram`.
    fn lifted(&self, ram: u32) -> (i64, Vec<(i64, FieldElement)>) {
        if ram == self.ram {
            return (self.prec, self.terms.clone());
        }
        let f = &self.field;
        let terms = self
            .terms
            .iter()
            .map(|&(e, c)| (rescale(f, e, self.ram, ram), c))
            .collect();
        (rescale(f, self.prec, self.ram, ram), terms)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let ram = self.ram.max(other.ram);
        let (pa, ta) = self.lifted(ram);
        let (pb, tb) = other.lifted(ram);
        let prec = pa.min(pb);
        let f = &self.field;
        let mut out = Vec::with_capacity(ta.len() + tb.len());
        let (mut i, mut j) = (0, 0);
        while i < ta.len() || j < tb.len() {
            let next = match (ta.get(i), tb.get(j)) {
                (Some(&(ea, ca)), Some(&(eb, cb))) if ea == eb => {
                    i += 1;
                    j += 1;
                    (ea, f.add(ca, cb))
                }
                (Some(&(ea, ca)), Some(&(eb, _))) if ea < eb => {
                    i += 1;
                    (ea, ca)
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (_, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            if next.0 >= prec {
                break;
            }
            out.push(next);
        }
        Ok(Self::from_raw(self.field.clone(), ram, prec, out))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(self.field.from_int(-1))
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: FieldElement) -> Self {
        let f = &self.field;
        let terms = self.terms.iter().map(|&(e, a)| (e, f.mul(a, c))).collect();
        Self::from_raw(self.field.clone(), self.ram, self.prec, terms)
    }

    /// Product with cap `min(v(a) + prec_b, v(b) + prec_a)`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let ram = self.ram.max(other.ram);
        let (pa, ta) = self.lifted(ram);
        let (pb, tb) = other.lifted(ram);
        let va = ta.first().map_or(pa, |t| t.0);
        let vb = tb.first().map_or(pb, |t| t.0);
        let prec = va
            .checked_add(pb)
            .zip(vb.checked_add(pa))
            .map(|(x, y)| x.min(y))
            .ok_or_else(|| Error::ExponentOverflow("product precision".into()))?;
        let terms = convolve(&self.field, &ta, &tb, prec);
        Ok(Self::from_raw(self.field.clone(), ram, prec, terms))
    }

    /// Multiplicative inverse with cap `prec − 2 v`.
    ///
    /// The leading term is peeled off and the remaining unit `1 + w` is
    /// inverted by forward substitution, which touches each nonzero output
    /// coefficient once per term of `w`.
    pub fn inv(&self) -> Result<Self> {
        let &(v, lead) = self
            .terms
            .first()
            .ok_or(Error::ZeroToPrecision(self.prec()))?;
        let f = &self.field;
        let lead_inv = f.inv(lead)?;
        let relprec = self.prec - v;
        let offsets: Vec<(i64, FieldElement)> = self.terms[1..]
            .iter()
            .map(|&(e, c)| (e - v, f.mul(c, lead_inv)))
            .collect();
        let step = offsets.iter().fold(0i64, |g, &(o, _)| g.gcd(&o));
        let step = if step == 0 { relprec } else { step };
        let len = (relprec + step - 1) / step;
        if len > MAX_DENSE_SPAN {
            return Err(Error::ExponentOverflow(format!(
                "inversion needs {len} lattice positions"
            )));
        }
        let len = len as usize;
        let offsets: Vec<(usize, FieldElement)> = offsets
            .into_iter()
            .map(|(o, c)| ((o / step) as usize, f.neg(c)))
            .collect();
        let mut w = vec![FieldElement::ZERO; len];
        w[0] = FieldElement::ONE;
        for i in 0..len {
            let wi = w[i];
            if wi.is_zero() {
                continue;
            }
            for &(o, c) in &offsets {
                let pos = i + o;
                if pos >= len {
                    break;
                }
                w[pos] = f.add(w[pos], f.mul(c, wi));
            }
        }
        let terms = w
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as i64 * step - v, f.mul(c, lead_inv)))
            .collect();
        Ok(Self::from_raw(
            f.clone(),
            self.ram,
            self.prec - 2 * v,
            terms,
        ))
    }

    /// `self / (1 − x^s)` for `s > 0`. The divisor is a unit known exactly,
    /// so the cap is unchanged; the quotient is a strided prefix sum.
    pub fn div_one_minus_x_pow(&self, s: impl Into<Exponent>) -> Result<Self> {
        let s = s.into();
        if s <= Exponent::from(0) {
            return Err(Error::InvalidExponent(s));
        }
        let f = &self.field;
        let (r, _) = place(f, s)?;
        let ram = self.ram.max(r);
        let (prec, terms) = self.lifted(ram);
        let Some(&(v, _)) = terms.first() else {
            return Ok(self.clone());
        };
        let stride = place(f, s)?.1 * (denominator(f, ram) / denominator(f, r));
        let step = terms.iter().fold(stride, |g, t| g.gcd(&(t.0 - v)));
        let len = (prec - v + step - 1) / step;
        if len > MAX_DENSE_SPAN {
            return Err(Error::ExponentOverflow(format!(
                "division needs {len} lattice positions"
            )));
        }
        let mut w = vec![FieldElement::ZERO; len as usize];
        for &(e, c) in &terms {
            w[((e - v) / step) as usize] = c;
        }
        let k = (stride / step) as usize;
        for i in k..w.len() {
            w[i] = f.add(w[i], w[i - k]);
        }
        let terms = w
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (v + i as i64 * step, c))
            .collect();
        Ok(Self::from_raw(f.clone(), ram, prec, terms))
    }

    /// `self^e`; negative `e` inverts first. `self^0` is `1` known to the
    /// relative precision of `self`.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        if e == 0 {
            let rel = self.prec() - self.valuation_bound();
            return Self::one(&self.field, rel);
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.try_mul(&base)?,
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc.expect("e > 0"))
    }

    /// Frobenius `a ↦ a^q`: exponents and cap times `q`, coefficients mapped
    /// by the field Frobenius. Exact.
    pub fn q_power(&self) -> Self {
        let f = &self.field;
        let q = f.q() as i64;
        let (ram, scale) = if self.ram > 0 {
            (self.ram - 1, 1)
        } else {
            (0, q)
        };
        let terms = self
            .terms
            .iter()
            .map(|&(e, c)| {
                (
                    e.checked_mul(scale).expect("exponent overflow in q_power"),
                    f.q_power(c),
                )
            })
            .collect();
        let prec = self
            .prec
            .checked_mul(scale)
            .expect("precision overflow in q_power");
        Self::from_raw(f.clone(), ram, prec, terms)
    }

    /// `k`-fold [`GenSeries::q_power`].
    pub fn q_power_n(&self, k: u32) -> Self {
        (0..k).fold(self.clone(), |acc, _| acc.q_power())
    }

    /// Unique `q`-th root: exponents and cap divided by `q`, coefficients
    /// mapped by the field `q`-th root. Raises `ram` by at most one.
    pub fn q_root(&self) -> Self {
        let f = &self.field;
        let terms = self.terms.iter().map(|&(e, c)| (e, f.q_root(c))).collect();
        Self::from_raw(f.clone(), self.ram + 1, self.prec, terms)
    }

    /// Lowers the cap to `min(prec, new_prec)`.
    pub fn truncate(&self, new_prec: impl Into<Exponent>) -> Result<Self> {
        let new_prec = new_prec.into();
        if new_prec >= self.prec() {
            return Ok(self.clone());
        }
        let (r, num) = place(&self.field, new_prec)?;
        let ram = self.ram.max(r);
        let (_, terms) = self.lifted(ram);
        let cap = rescale(&self.field, num, r, ram);
        Ok(Self::from_raw(self.field.clone(), ram, cap, terms))
    }

    /// Whether the series agree on every exponent below the smaller cap.
    pub fn equal_to_precision(&self, other: &Self) -> bool {
        self.agreement(other).is_some()
    }

    /// The smaller cap, if the series agree below it.
    pub fn agreement(&self, other: &Self) -> Option<Exponent> {
        if self.same_field(other).is_err() {
            return None;
        }
        let ram = self.ram.max(other.ram);
        let (pa, ta) = self.lifted(ram);
        let (pb, tb) = other.lifted(ram);
        let cap = pa.min(pb);
        let below = |t: &[(i64, FieldElement)]| -> usize { t.partition_point(|x| x.0 < cap) };
        let (na, nb) = (below(&ta), below(&tb));
        (ta[..na] == tb[..nb]).then(|| Exponent::new(cap, denominator(&self.field, ram)))
    }

    pub fn to_record(&self) -> SeriesRecord {
        let cfg = self.field.config();
        SeriesRecord {
            p: cfg.p(),
            m: cfg.m(),
            ram: self.ram,
            prec: self.prec().to_string(),
            terms: self
                .terms()
                .map(|(r, c)| (r.to_string(), self.field.index(c)))
                .collect(),
        }
    }

    pub fn from_record(field: &Arc<Field>, rec: &SeriesRecord) -> Result<Self> {
        let cfg = field.config();
        if (rec.p, rec.m) != (cfg.p(), cfg.m()) {
            return Err(Error::ConfigMismatch);
        }
        let parse = |s: &str| -> Result<Exponent> {
            s.parse::<Exponent>()
                .map_err(|e| Error::Malformed(format!("{s:?}: {e}")))
        };
        let mut terms = Vec::with_capacity(rec.terms.len());
        for (r, idx) in &rec.terms {
            let c = field.from_index(*idx)?;
            if c.is_zero() {
                return Err(Error::Malformed(format!(
                    "zero coefficient at exponent {r}"
                )));
            }
            terms.push((parse(r)?, c));
        }
        let prec = parse(&rec.prec)?;
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) || terms.last().is_some_and(|t| t.0 >= prec) {
            return Err(Error::Malformed(
                "exponents must be increasing and below prec".into(),
            ));
        }
        let s = Self::from_terms(field, terms, prec)?;
        if s.ram > rec.ram {
            return Err(Error::Malformed(format!(
                "ram {} is too small for the stored exponents (need {})",
                rec.ram, s.ram
            )));
        }
        Ok(s)
    }
}

/// Sums adjacent equal exponents of a sorted term list and drops zeros.
fn merge_sorted(field: &Field, sorted: Vec<(i64, FieldElement)>) -> Vec<(i64, FieldElement)> {
    let mut out: Vec<(i64, FieldElement)> = Vec::with_capacity(sorted.len());
    for (e, c) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == e => last.1 = field.add(last.1, c),
            _ => out.push((e, c)),
        }
    }
    out.retain(|t| !t.1.is_zero());
    out
}

/// Truncated product of two sorted term lists.
fn convolve(
    field: &Field,
    a: &[(i64, FieldElement)],
    b: &[(i64, FieldElement)],
    cutoff: i64,
) -> Vec<(i64, FieldElement)> {
    let (Some(a0), Some(b0)) = (a.first(), b.first()) else {
        return Vec::new();
    };
    let lo = a0.0 + b0.0;
    if lo >= cutoff {
        return Vec::new();
    }
    let hi = cutoff.min(a.last().unwrap().0 + b.last().unwrap().0 + 1);
    // A monomial factor only shifts and scales the other one.
    let (mono, other) = match (a, b) {
        ([m], o) | (o, [m]) => (Some(*m), o),
        _ => (None, a),
    };
    if let Some((em, cm)) = mono {
        return other
            .iter()
            .map(|&(e, c)| (e + em, field.mul(c, cm)))
            .take_while(|t| t.0 < hi)
            .collect();
    }
    let span = hi - lo;
    let pairs = (a.len() as i64).saturating_mul(b.len() as i64);
    if span <= pairs.saturating_mul(4).max(4096) && span <= MAX_DENSE_SPAN {
        let mut acc = vec![FieldElement::ZERO; span as usize];
        for &(ea, ca) in a {
            if ea + b0.0 >= hi {
                break;
            }
            for &(eb, cb) in b {
                let e = ea + eb;
                if e >= hi {
                    break;
                }
                let slot = &mut acc[(e - lo) as usize];
                *slot = field.add(*slot, field.mul(ca, cb));
            }
        }
        acc.into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (lo + i as i64, c))
            .collect()
    } else {
        let mut acc: HashMap<i64, FieldElement> = HashMap::new();
        for &(ea, ca) in a {
            if ea + b0.0 >= hi {
                break;
            }
            for &(eb, cb) in b {
                let e = ea + eb;
                if e >= hi {
                    break;
                }
                let slot = acc.entry(e).or_insert(FieldElement::ZERO);
                *slot = field.add(*slot, field.mul(ca, cb));
            }
        }
        let mut out: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        out.sort_unstable_by_key(|t| t.0);
        out
    }
}

/// Serialized form: exponents and cap as `"num/den"` (or integer) strings,
/// coefficients by canonical field index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub p: u32,
    pub m: u32,
    pub ram: u32,
    pub prec: String,
    pub terms: Vec<(String, u32)>,
}

impl PartialEq for GenSeries {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field
            && self.ram == other.ram
            && self.prec == other.prec
            && self.terms == other.terms
    }
}

impl Eq for GenSeries {}

impl fmt::Debug for GenSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenSeries({self})")
    }
}

impl fmt::Display for GenSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.field.p();
        for (i, (r, c)) in self.terms().enumerate() {
            let idx = self.field.index(c);
            let (sign, mag) = if idx < p && p > 2 && idx > p / 2 {
                ("-", p - idx)
            } else {
                ("+", idx)
            };
            if i == 0 {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match (mag, r == Exponent::from(0)) {
                (1, true) => f.write_str("1")?,
                (1, false) => write!(f, "x^{r}")?,
                (_, true) if mag < p => write!(f, "{mag}")?,
                (_, false) if mag < p => write!(f, "{mag}*x^{r}")?,
                (_, true) => write!(f, "{{{idx}}}")?,
                (_, false) => write!(f, "{{{idx}}}*x^{r}")?,
            }
        }
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        write!(f, " + O(x^{})", self.prec())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $via:ident) => {
        impl $tr<&GenSeries> for &GenSeries {
            type Output = GenSeries;
            fn $method(self, rhs: &GenSeries) -> GenSeries {
                self.$via(rhs).expect("series from different fields")
            }
        }
        impl $tr<GenSeries> for GenSeries {
            type Output = GenSeries;
            fn $method(self, rhs: GenSeries) -> GenSeries {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &GenSeries {
    type Output = GenSeries;
    fn neg(self) -> GenSeries {
        GenSeries::neg(self)
    }
}

impl Neg for GenSeries {
    type Output = GenSeries;
    fn neg(self) -> GenSeries {
        GenSeries::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldConfig;

    fn field(p: u32, m: u32) -> Arc<Field> {
        Arc::new(Field::new(FieldConfig::new(p, m).unwrap()))
    }

    fn r(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    #[test]
    fn geometric_division() {
        let f = field(3, 1);
        let u =
            GenSeries::from_terms(&f, [(r(-1, 2), f.one()), (r(3, 1), f.from_int(2))], 40).unwrap();
        for s in [r(1, 1), r(4, 1), r(1, 2), r(2, 3)] {
            let qt = u.div_one_minus_x_pow(s).unwrap();
            assert_eq!(qt.prec(), u.prec());
            let one_minus =
                GenSeries::from_terms(&f, [(r(0, 1), f.one()), (s, f.from_int(-1))], 100).unwrap();
            assert_eq!(qt.try_mul(&one_minus).unwrap(), u, "s = {s}");
        }
        assert!(u.div_one_minus_x_pow(0).is_err());
        let z = GenSeries::zero(&f, 5).unwrap();
        assert_eq!(z.div_one_minus_x_pow(1).unwrap(), z);
    }

    fn poly(f: &Arc<Field>, terms: &[(i64, i64)], prec: i64) -> GenSeries {
        let t: Vec<_> = terms.iter().map(|&(e, c)| (e, f.from_int(c))).collect();
        GenSeries::from_poly(f, &t, prec).unwrap()
    }

    #[test]
    fn identities() {
        let f = field(3, 1);
        let x = GenSeries::from_x_power(&f, 1, 50).unwrap();
        assert_eq!(x.valuation().unwrap(), r(1, 1));
        let z = GenSeries::zero(&f, 50).unwrap();
        assert!(z.is_zero());
        assert!(matches!(z.valuation(), Err(Error::ZeroToPrecision(_))));
        let one = GenSeries::one(&f, 50).unwrap();
        assert_eq!(one.valuation().unwrap(), r(0, 1));
        assert_eq!(&x * &one, x);
        assert!((&x + &(-&x)).is_zero());
    }

    #[test]
    fn d1_plus_x() {
        let f = field(3, 1);
        let d1 = poly(&f, &[(3, 1), (1, -1)], 100);
        let x = poly(&f, &[(1, 1)], 100);
        let s = &d1 + &x;
        assert_eq!(s, poly(&f, &[(3, 1)], 100));
        assert_eq!(s.valuation().unwrap(), r(3, 1));
        let capped = poly(&f, &[(1, 1)], 7);
        assert_eq!((&d1 + &capped).prec(), r(7, 1));
    }

    #[test]
    fn bracket_product_q3() {
        let f = field(3, 1);
        let b2 = poly(&f, &[(9, 1), (1, -1)], 1000);
        let b1_cubed = poly(&f, &[(9, 1), (3, -1)], 1000);
        let prod = &b2 * &b1_cubed;
        assert_eq!(
            prod,
            poly(&f, &[(18, 1), (12, -1), (10, -1), (4, 1)], 1000 + 1)
        );
    }

    #[test]
    fn inverse_precision_and_valuation() {
        let f = field(3, 1);
        let x = GenSeries::from_x_power(&f, 1, 20).unwrap();
        let xi = x.inv().unwrap();
        assert_eq!(xi.valuation().unwrap(), r(-1, 1));
        assert_eq!(xi.prec(), r(18, 1));
        let d2 = poly(&f, &[(18, 1), (12, -1), (10, -1), (4, 1)], 200);
        let inv = d2.inv().unwrap();
        assert_eq!(inv.valuation().unwrap(), r(-4, 1));
        assert_eq!(inv.prec(), r(192, 1));
        let back = &d2 * &inv;
        let one = GenSeries::one(&f, 1000).unwrap();
        assert!(back.equal_to_precision(&one));
        assert_eq!(back.prec(), r(196, 1));
        let z = GenSeries::zero(&f, 10).unwrap();
        assert!(matches!(z.inv(), Err(Error::ZeroToPrecision(_))));
    }

    #[test]
    fn frobenius_and_root() {
        let f = field(3, 1);
        let a = poly(&f, &[(3, 1), (1, -1)], 30);
        let a3 = a.q_power();
        assert_eq!(a3, poly(&f, &[(9, 1), (3, -1)], 90));
        assert!(a3.equal_to_precision(&a.pow(3).unwrap()));
        assert_eq!(a3.q_root(), a);
        let b = poly(&f, &[(1, 1), (9, -1)], 30);
        let root = b.q_root();
        assert_eq!(root.ram(), 1);
        assert_eq!(
            root.terms().map(|t| t.0).collect::<Vec<_>>(),
            vec![r(1, 3), r(3, 1)]
        );
        assert_eq!(root.prec(), r(10, 1));
        assert_eq!(root.q_power(), b);
        let x3 = GenSeries::from_x_power(&f, 3, 30).unwrap();
        assert_eq!(x3.q_root(), GenSeries::from_x_power(&f, 1, 10).unwrap());
        assert!(GenSeries::zero(&f, 5).unwrap().q_power().is_zero());
    }

    #[test]
    fn sigma_solves_defining_equation() {
        for (p, m) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let f = field(p, m);
            let q = f.q() as i64;
            let s = GenSeries::sigma(&f, 100).unwrap();
            assert_eq!(s.valuation().unwrap(), r(1, q - 1));
            let minus_x = GenSeries::monomial(&f, f.from_int(-1), 1, 1000).unwrap();
            assert!(s.pow(q - 1).unwrap().equal_to_precision(&minus_x));
        }
        let f = field(2, 1);
        assert_eq!(
            GenSeries::sigma(&f, 10).unwrap(),
            GenSeries::from_x_power(&f, 1, 10).unwrap()
        );
    }

    #[test]
    fn valuation_of_brackets() {
        let f = field(3, 1);
        for n in 1..=8u32 {
            let b = poly(&f, &[(3i64.pow(n), 1), (1, -1)], 10);
            assert_eq!(b.valuation().unwrap(), r(1, 1));
        }
        let a = poly(&f, &[(3, 1), (1, -1)], 10);
        assert!(a.equal_to_precision(&a.truncate(2).unwrap()));
    }

    #[test]
    fn record_round_trip() {
        let f = field(3, 1);
        let a = GenSeries::from_terms(
            &f,
            vec![
                (r(1, 2), f.generator()),
                (r(7, 3), f.from_int(2)),
                (r(-4, 1), f.one()),
            ],
            r(31, 6),
        )
        .unwrap();
        let rec = a.to_record();
        assert_eq!(rec.terms[0], ("-4".to_string(), 1));
        assert_eq!(rec.prec, "31/6");
        let json = serde_json::to_string(&rec).unwrap();
        let back: SeriesRecord = serde_json::from_str(&json).unwrap();
        let b = GenSeries::from_record(&f, &back).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&b.to_record()).unwrap(), json);
        let other = field(5, 1);
        assert!(GenSeries::from_record(&other, &rec).is_err());
    }

    #[test]
    fn unrepresentable_exponent() {
        let f = field(3, 1);
        // 5 divides neither q - 1 = 2 nor any power of 3.
        assert!(matches!(
            GenSeries::from_x_power(&f, r(1, 5), 10),
            Err(Error::InvalidExponent(_))
        ));
    }

    #[test]
    fn mismatched_fields() {
        let a = GenSeries::one(&field(3, 1), 5).unwrap();
        let b = GenSeries::one(&field(5, 1), 5).unwrap();
        assert!(matches!(a.try_add(&b), Err(Error::ConfigMismatch)));
        assert!(matches!(a.try_mul(&b), Err(Error::ConfigMismatch)));
    }
}

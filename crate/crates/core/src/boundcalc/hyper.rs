//! Exact integers far beyond memory: hereditary signed sums of scaled
//! powers of two.
//!
//! A large value is `Σ ±m_i · 2^{e_i}` with odd mantissas `m_i` and
//! exponents that are themselves [`HNum`]s. After normalization the bit
//! ranges `[e_i, e_i + bits(m_i))` are pairwise disjoint, so the sign of the
//! sum is the sign of its leading term.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Values below `2^SMALL_BITS` in magnitude are stored directly.
const SMALL_BITS: u64 = 1 << 21;

#[derive(Clone, Debug)]
pub enum HNum {
    Small(BigInt),
    Sum(Vec<Term>),
}

#[derive(Clone, Debug)]
pub struct Term {
    neg: bool,
    mant: BigUint,
    exp: HNum,
}

impl Term {
    fn from_int(v: &BigInt) -> Option<Term> {
        if v.is_zero() {
            return None;
        }
        let tz = v.trailing_zeros().unwrap_or(0);
        Some(Term { neg: v.sign() == Sign::Minus, mant: v.magnitude() >> tz, exp: HNum::from_u64(tz) })
    }

    fn signed_mant(&self) -> BigInt {
        let m = BigInt::from(self.mant.clone());
        if self.neg {
            -m
        } else {
            m
        }
    }
}

impl HNum {
    pub fn zero() -> Self {
        HNum::Small(BigInt::zero())
    }

    pub fn one() -> Self {
        HNum::Small(BigInt::one())
    }

    pub fn from_u64(v: u64) -> Self {
        HNum::Small(BigInt::from(v))
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        Self::from_int(BigInt::from(v.clone()))
    }

    pub fn from_int(v: BigInt) -> Self {
        if v.bits() <= SMALL_BITS {
            HNum::Small(v)
        } else {
            Self::normalize(Term::from_int(&v).into_iter().collect())
        }
    }

    pub fn as_small(&self) -> Option<&BigInt> {
        match self {
            HNum::Small(v) => Some(v),
            HNum::Sum(_) => None,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        self.as_small().and_then(|v| v.to_u64())
    }

    /// Exact value as a non-negative big integer, when stored directly.
    pub fn to_biguint(&self) -> Option<BigUint> {
        self.as_small().and_then(|v| v.to_biguint())
    }

    fn terms(&self) -> Vec<Term> {
        match self {
            HNum::Small(v) => Term::from_int(v).into_iter().collect(),
            HNum::Sum(ts) => ts.clone(),
        }
    }

    fn normalize(terms: Vec<Term>) -> HNum {
        let mut low = BigInt::zero();
        let mut high: Vec<Term> = Vec::new();
        let mut pending = terms;
        loop {
            for mut t in pending.drain(..) {
                if t.mant.is_zero() {
                    continue;
                }
                let tz = t.mant.trailing_zeros().unwrap_or(0);
                if tz > 0 {
                    t.mant >>= tz;
                    t.exp = t.exp.add(&HNum::from_u64(tz));
                }
                match t.exp.as_u64() {
                    Some(e) if e + t.mant.bits() <= 2 * SMALL_BITS => {
                        low += t.signed_mant() << e;
                    }
                    _ => high.push(t),
                }
            }
            high.sort_by(|a, b| b.exp.cmp(&a.exp));
            let mut merged = false;
            let mut i = 0;
            while i + 1 < high.len() {
                let gap = high[i].exp.sub(&high[i + 1].exp);
                let overlap = match gap.as_u64() {
                    Some(g) => g < high[i + 1].mant.bits(),
                    None => false,
                };
                if overlap {
                    let g = gap.as_u64().expect("checked");
                    let hi = high.remove(i);
                    let lo = high.remove(i);
                    let m = lo.signed_mant() + (hi.signed_mant() << g);
                    pending.push(Term { neg: m.is_negative(), mant: m.magnitude().clone(), exp: lo.exp });
                    merged = true;
                    break;
                }
                i += 1;
            }
            if !merged {
                if let Some(t) = high.pop_if(|t| t.exp.as_u64().is_some_and(|e| e < low.bits())) {
                    low += t.signed_mant() << t.exp.as_u64().expect("checked");
                    merged = true;
                }
            }
            if !merged && pending.is_empty() {
                break;
            }
        }
        if high.is_empty() {
            if low.bits() <= SMALL_BITS {
                return HNum::Small(low);
            }
            return HNum::Sum(Term::from_int(&low).into_iter().collect());
        }
        high.extend(Term::from_int(&low));
        HNum::Sum(high)
    }

    pub fn neg(&self) -> HNum {
        match self {
            HNum::Small(v) => HNum::Small(-v),
            HNum::Sum(ts) => HNum::Sum(ts.iter().map(|t| Term { neg: !t.neg, ..t.clone() }).collect()),
        }
    }

    pub fn add(&self, other: &HNum) -> HNum {
        if let (HNum::Small(a), HNum::Small(b)) = (self, other) {
            return HNum::from_int(a + b);
        }
        let mut ts = self.terms();
        ts.extend(other.terms());
        HNum::normalize(ts)
    }

    pub fn sub(&self, other: &HNum) -> HNum {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &HNum) -> HNum {
        if let (HNum::Small(a), HNum::Small(b)) = (self, other) {
            return HNum::from_int(a * b);
        }
        let mut ts = Vec::new();
        for a in self.terms() {
            for b in other.terms() {
                ts.push(Term { neg: a.neg != b.neg, mant: &a.mant * &b.mant, exp: a.exp.add(&b.exp) });
            }
        }
        HNum::normalize(ts)
    }

    pub fn signum(&self) -> Ordering {
        match self {
            HNum::Small(v) => v.sign().cmp(&Sign::NoSign),
            HNum::Sum(ts) => match ts.first() {
                Some(t) if t.neg => Ordering::Less,
                Some(_) => Ordering::Greater,
                None => Ordering::Equal,
            },
        }
    }

    pub fn max(self, other: HNum) -> HNum {
        if self.cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// `2^self`, for `self ≥ 0`.
    pub fn pow2(&self) -> HNum {
        debug_assert!(self.signum() != Ordering::Less);
        match self.as_u64() {
            Some(e) if e < SMALL_BITS => HNum::Small(BigInt::one() << e),
            _ => HNum::Sum(vec![Term { neg: false, mant: BigUint::one(), exp: self.clone() }]),
        }
    }

    /// `⌊self / 2⌋`.
    pub fn halve(&self) -> HNum {
        match self {
            HNum::Small(v) => HNum::Small(v.div_floor(&BigInt::from(2))),
            HNum::Sum(ts) => {
                let one = HNum::one();
                let out = ts
                    .iter()
                    .map(|t| {
                        if t.exp.signum() == Ordering::Equal {
                            let m = t.signed_mant().div_floor(&BigInt::from(2));
                            Term { neg: m.is_negative(), mant: m.magnitude().clone(), exp: HNum::zero() }
                        } else {
                            Term { exp: t.exp.sub(&one), ..t.clone() }
                        }
                    })
                    .collect();
                HNum::normalize(out)
            }
        }
    }

    /// Bit length of a positive value as an exact `HNum`, when it can be
    /// read off; for sums this is `e_0 + bits(m_0)` adjusted for a negative
    /// remainder.
    pub fn bit_length(&self) -> HNum {
        match self {
            HNum::Small(v) => HNum::from_u64(v.bits()),
            HNum::Sum(ts) => {
                let t = &ts[0];
                let top = t.exp.add(&HNum::from_u64(t.mant.bits()));
                let rest_negative = ts.get(1).map(|r| r.neg).unwrap_or(false);
                if rest_negative && t.mant.is_one() {
                    top.sub(&HNum::one())
                } else {
                    top
                }
            }
        }
    }

    /// Canonical text: decimal for stored integers, otherwise a sum of
    /// `m*2^(e)` terms.
    pub fn to_text(&self) -> String {
        match self {
            HNum::Small(v) => v.to_string(),
            HNum::Sum(ts) => {
                let mut s = String::new();
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 || t.neg {
                        s.push_str(if t.neg { " - " } else { " + " });
                    }
                    if !t.mant.is_one() {
                        s.push_str(&t.mant.to_string());
                        s.push('*');
                    }
                    s.push_str(&format!("2^({})", t.exp.to_text()));
                }
                s.trim_start_matches(" + ").to_string()
            }
        }
    }
}

impl PartialEq for HNum {
    fn eq(&self, other: &Self) -> bool {
        HNum::cmp(self, other) == Ordering::Equal
    }
}

impl Eq for HNum {}

impl PartialOrd for HNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(Ord::cmp(self, other))
    }
}

impl Ord for HNum {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (HNum::Small(a), HNum::Small(b)) = (self, other) {
            return a.cmp(b);
        }
        self.sub(other).signum()
    }
}

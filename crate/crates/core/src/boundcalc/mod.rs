//! Exact evaluation of the degree and component-count bounds:
//! `bit(d)`, `c(n, d, s)`, `b(n, d, s)`, `w`, `r` and the cardinality bound.
//!
//! Values that fit in [`EXACT_BITS`] bits are plain integers. Larger ones
//! are kept as power towers or symbolic expressions and compared exactly
//! through [`hyper::HNum`].

pub mod hyper;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use hyper::HNum;

/// Largest bit length stored as [`BoundValue::Exact`].
pub const EXACT_BITS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("c(n, d, s) needs d ≥ 1 and n + s ≥ 1")]
    Degenerate,
    #[error("degree {0} is below 2")]
    DegreeTooSmall(u64),
}

/// `1` for `d = 0`, else the `k` with `2^(k-1) ≤ d < 2^k`.
pub fn bit(d: u64) -> u64 {
    if d == 0 {
        1
    } else {
        64 - d.leading_zeros() as u64
    }
}

fn bit_big(d: &BigUint) -> BigUint {
    if d.is_zero() {
        BigUint::one()
    } else {
        BigUint::from(d.bits())
    }
}

/// `c(n, d, s) = d (2d − 1)^(n + s − 1)`.
pub fn c(n: u64, d: u64, s: u64) -> Result<BigUint, BoundError> {
    if d == 0 || n + s == 0 {
        return Err(BoundError::Degenerate);
    }
    let base = BigUint::from(2 * d - 1);
    let e = u32::try_from(n + s - 1).map_err(|_| BoundError::Degenerate)?;
    Ok(BigUint::from(d) * num_traits::pow(base, e as usize))
}

/// Tagged bound value.
#[derive(Debug, Clone)]
pub enum BoundValue {
    Exact(BigUint),
    /// `Tower(1, E) = 2^E`, `Tower(2, E) = 2^(2^E)`.
    Tower {
        height: u8,
        top: BigUint,
    },
    Expr(Box<BoundExpr>),
}

#[derive(Debug, Clone)]
pub enum BoundExpr {
    Max(Vec<BoundValue>),
    Add(BoundValue, BoundValue),
    Mul(BoundValue, BoundValue),
    /// `⌊a / 2⌋`.
    Halve(BoundValue),
    Pow2(BoundValue),
    Pow(BoundValue, BoundValue),
    /// `b(n, d, s)` with a degree that is not an exact integer.
    B {
        n: u64,
        d: BoundValue,
        s: u64,
    },
}

/// Interval `[lo, hi]` containing a value; `hi = None` means unbounded.
#[derive(Debug, Clone)]
pub struct Bracket {
    pub lo: HNum,
    pub hi: Option<HNum>,
}

impl Bracket {
    fn point(v: HNum) -> Self {
        Bracket { lo: v.clone(), hi: Some(v) }
    }

    pub fn is_point(&self) -> bool {
        matches!(&self.hi, Some(h) if *h == self.lo)
    }

    fn map(&self, f: impl Fn(&HNum) -> HNum) -> Self {
        Bracket { lo: f(&self.lo), hi: self.hi.as_ref().map(f) }
    }

    fn zip(&self, o: &Bracket, f: impl Fn(&HNum, &HNum) -> HNum) -> Self {
        Bracket {
            lo: f(&self.lo, &o.lo),
            hi: match (&self.hi, &o.hi) {
                (Some(a), Some(b)) => Some(f(a, b)),
                _ => None,
            },
        }
    }
}

fn fits(v: &BigUint) -> bool {
    v.bits() <= EXACT_BITS
}

impl BoundValue {
    pub fn exact(v: impl Into<BigUint>) -> Self {
        BoundValue::Exact(v.into())
    }

    /// Normalizing tower constructor.
    pub fn tower(height: u8, top: BigUint) -> Self {
        match height {
            0 => BoundValue::Exact(top),
            1 => match top.to_u64() {
                Some(e) if e < EXACT_BITS => BoundValue::Exact(BigUint::one() << e),
                _ => BoundValue::Tower { height: 1, top },
            },
            _ => match top.to_u64() {
                // 2^(2^E) has 2^E + 1 bits
                Some(e) if e < 63 && (1u64 << e) < EXACT_BITS => BoundValue::Exact(BigUint::one() << (1u64 << e)),
                _ => BoundValue::Tower { height: 2, top },
            },
        }
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, BoundValue::Exact(_))
    }

    fn expr(e: BoundExpr) -> Self {
        BoundValue::Expr(Box::new(e))
    }

    pub fn add(&self, other: &BoundValue) -> BoundValue {
        if let (Some(a), Some(b)) = (self.as_exact(), other.as_exact()) {
            let s = a + b;
            if fits(&s) {
                return BoundValue::Exact(s);
            }
        }
        if other.as_exact().is_some_and(|v| v.is_zero()) {
            return self.clone();
        }
        if self.as_exact().is_some_and(|v| v.is_zero()) {
            return other.clone();
        }
        BoundValue::expr(BoundExpr::Add(self.clone(), other.clone()))
    }

    pub fn mul(&self, other: &BoundValue) -> BoundValue {
        if let (Some(a), Some(b)) = (self.as_exact(), other.as_exact()) {
            if a.bits() + b.bits() <= EXACT_BITS + 1 {
                let p = a * b;
                if fits(&p) {
                    return BoundValue::Exact(p);
                }
            }
        }
        for (x, y) in [(self, other), (other, self)] {
            if let Some(v) = x.as_exact() {
                if v.is_zero() {
                    return BoundValue::Exact(BigUint::zero());
                }
                if v.is_one() {
                    return y.clone();
                }
            }
        }
        BoundValue::expr(BoundExpr::Mul(self.clone(), other.clone()))
    }

    pub fn halve(&self) -> BoundValue {
        match self {
            BoundValue::Exact(v) => BoundValue::Exact(v >> 1u32),
            BoundValue::Tower { height: 1, top } if !top.is_zero() => BoundValue::tower(1, top - BigUint::one()),
            _ => BoundValue::expr(BoundExpr::Halve(self.clone())),
        }
    }

    pub fn pow2(&self) -> BoundValue {
        match self {
            BoundValue::Exact(e) => BoundValue::tower(1, e.clone()),
            BoundValue::Tower { height: 1, top } => BoundValue::tower(2, top.clone()),
            _ => BoundValue::expr(BoundExpr::Pow2(self.clone())),
        }
    }

    pub fn pow(&self, exp: &BoundValue) -> BoundValue {
        if let (Some(b), Some(e)) = (self.as_exact(), exp.as_exact()) {
            if b.is_zero() {
                return BoundValue::exact(if e.is_zero() { 1u32 } else { 0u32 });
            }
            if b.is_one() || e.is_zero() {
                return BoundValue::exact(1u32);
            }
            if b.count_ones() == 1 {
                let k = b.bits() - 1;
                return BoundValue::exact(k).mul(exp).pow2();
            }
            if let Some(eu) = e.to_u64() {
                if (b.bits() - 1).saturating_mul(eu) < EXACT_BITS {
                    let v = num_traits::pow(b.clone(), eu as usize);
                    if fits(&v) {
                        return BoundValue::Exact(v);
                    }
                }
            }
        }
        BoundValue::expr(BoundExpr::Pow(self.clone(), exp.clone()))
    }

    pub fn bound_max(&self, other: &BoundValue) -> BoundValue {
        let (a, b) = (self.bracket(), other.bracket());
        let dominates = |x: &Bracket, y: &Bracket| match &y.hi {
            Some(h) => x.lo >= *h,
            None => false,
        };
        if dominates(&a, &b) {
            self.clone()
        } else if dominates(&b, &a) {
            other.clone()
        } else {
            BoundValue::expr(BoundExpr::Max(vec![self.clone(), other.clone()]))
        }
    }

    /// An interval of exact integers containing the value.
    pub fn bracket(&self) -> Bracket {
        match self {
            BoundValue::Exact(v) => Bracket::point(HNum::from_biguint(v)),
            BoundValue::Tower { height, top } => {
                let mut h = HNum::from_biguint(top);
                for _ in 0..*height {
                    h = h.pow2();
                }
                Bracket::point(h)
            }
            BoundValue::Expr(e) => e.bracket(),
        }
    }

    fn key_text(&self) -> String {
        self.to_string()
    }
}

impl BoundExpr {
    fn bracket(&self) -> Bracket {
        match self {
            BoundExpr::Max(vs) => {
                let bs: Vec<Bracket> = vs.iter().map(BoundValue::bracket).collect();
                let lo = bs.iter().map(|b| b.lo.clone()).max().unwrap_or_else(HNum::zero);
                let hi = bs.iter().map(|b| b.hi.clone()).try_fold(HNum::zero(), |m, h| h.map(|h| m.max(h)));
                Bracket { lo, hi }
            }
            BoundExpr::Add(a, b) => a.bracket().zip(&b.bracket(), HNum::add),
            BoundExpr::Mul(a, b) => a.bracket().zip(&b.bracket(), HNum::mul),
            BoundExpr::Halve(a) => a.bracket().map(HNum::halve),
            BoundExpr::Pow2(a) => a.bracket().map(HNum::pow2),
            BoundExpr::Pow(a, b) => pow_bracket(&a.bracket(), &b.bracket()),
            BoundExpr::B { n, d, s } => {
                // b ≥ 2^(2^(2^D)) with D = max(2, d), since D^(4^n) ≥ D
                let _ = (n, s);
                let dlo = d.bracket().lo.max(HNum::from_u64(2));
                Bracket { lo: dlo.pow2().pow2().pow2(), hi: None }
            }
        }
    }
}

fn pow_bracket(base: &Bracket, exp: &Bracket) -> Bracket {
    let lo = pow_lower(&base.lo, &exp.lo);
    let hi = match (&base.hi, &exp.hi) {
        (Some(b), Some(e)) => pow_upper(b, e),
        _ => None,
    };
    Bracket { lo, hi }
}

fn small_base(b: &HNum) -> Option<BigUint> {
    b.to_biguint()
}

fn pow_lower(b: &HNum, e: &HNum) -> HNum {
    if e.signum() == Ordering::Equal {
        return HNum::one();
    }
    match small_base(b) {
        Some(bv) if bv.is_zero() => HNum::zero(),
        Some(bv) if bv.is_one() => HNum::one(),
        Some(bv) => {
            let k = bv.bits() - 1;
            if bv.count_ones() == 1 {
                return HNum::from_u64(k).mul(e).pow2();
            }
            if let Some(eu) = e.as_u64() {
                if bv.bits().saturating_mul(eu) <= 2 * EXACT_BITS {
                    return HNum::from_biguint(&num_traits::pow(bv, eu as usize));
                }
            }
            HNum::from_u64(k).mul(e).pow2()
        }
        // b ≥ 2^(bits(b) − 1) ≥ b's leading power; b^e ≥ b for e ≥ 1
        None => b.clone(),
    }
}

fn pow_upper(b: &HNum, e: &HNum) -> Option<HNum> {
    if e.signum() == Ordering::Equal {
        return Some(HNum::one());
    }
    let bv = small_base(b)?;
    if bv.is_zero() || bv.is_one() {
        return Some(HNum::from_biguint(&bv));
    }
    if bv.count_ones() == 1 {
        return Some(HNum::from_u64(bv.bits() - 1).mul(e).pow2());
    }
    if let Some(eu) = e.as_u64() {
        if bv.bits().saturating_mul(eu) <= 2 * EXACT_BITS {
            return Some(HNum::from_biguint(&num_traits::pow(bv, eu as usize)));
        }
    }
    Some(HNum::from_u64(bv.bits()).mul(e).pow2())
}

impl PartialEq for BoundValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BoundValue {}

impl PartialOrd for BoundValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order: numeric whenever both values are pinned exactly; otherwise
/// lexicographic on (lower bound, upper bound, canonical text).
impl Ord for BoundValue {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Some(a), Some(b)) = (self.as_exact(), other.as_exact()) {
            return a.cmp(b);
        }
        let (a, b) = (self.bracket(), other.bracket());
        a.lo.cmp(&b.lo)
            .then_with(|| match (&a.hi, &b.hi) {
                (Some(x), Some(y)) => x.cmp(y),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| {
                if a.is_point() && b.is_point() {
                    Ordering::Equal
                } else {
                    self.key_text().cmp(&other.key_text())
                }
            })
    }
}

/// Decimal digits of `v`, or its bit length when `v` exceeds the cap.
fn big_text(v: &BigUint) -> String {
    if fits(v) {
        v.to_string()
    } else {
        format!("[{}-bit integer]", v.bits())
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Exact(v) => write!(f, "{v}"),
            BoundValue::Tower { height: 1, top } => write!(f, "2^{}", big_text(top)),
            BoundValue::Tower { top, .. } => write!(f, "2^2^{}", big_text(top)),
            BoundValue::Expr(e) => write!(f, "{e}"),
        }
    }
}

fn paren(v: &BoundValue) -> String {
    match v {
        BoundValue::Exact(_) => v.to_string(),
        _ => format!("({v})"),
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundExpr::Max(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "max{{{}}}", parts.join(", "))
            }
            BoundExpr::Add(a, b) => write!(f, "{a} + {b}"),
            BoundExpr::Mul(a, b) => write!(f, "{}*{}", paren(a), paren(b)),
            BoundExpr::Halve(a) => write!(f, "{}/2", paren(a)),
            BoundExpr::Pow2(a) => write!(f, "2^{}", paren(a)),
            BoundExpr::Pow(a, b) => write!(f, "{}^{}", paren(a), paren(b)),
            BoundExpr::B { n, d, s } => write!(f, "b({n}, {d}, {s})"),
        }
    }
}

/// `b(n, d, s) = 2^(2^E)` with
/// `E = 2^(D^(4^n)) + s^(2^n) · D^(16^n · bit(d))` and `D = max{2, d}`.
pub fn b(n: u64, d: u64, s: u64) -> BoundValue {
    b_general(n, &BoundValue::exact(d), s)
}

/// [`b`] for a degree that may itself be a bound value.
pub fn b_general(n: u64, d: &BoundValue, s: u64) -> BoundValue {
    let Some(dv) = d.as_exact() else {
        return BoundValue::expr(BoundExpr::B { n, d: d.clone(), s });
    };
    let big_d = BoundValue::Exact(dv.clone().max(BigUint::from(2u32)));
    let four_n = BoundValue::exact(2 * n).pow2();
    let two_n = BoundValue::exact(n).pow2();
    let sixteen_n_bit = BoundValue::exact(4 * n).pow2().mul(&BoundValue::Exact(bit_big(dv)));
    let first = big_d.pow(&four_n).pow2();
    let second = BoundValue::exact(s).pow(&two_n).mul(&big_d.pow(&sixteen_n_bit));
    first.add(&second).pow2().pow2()
}

/// The inner exponent `E` of `b(n, d, s)` when it is an exact integer.
pub fn b_exponent(n: u64, d: u64, s: u64) -> Option<BigUint> {
    match b(n, d, s) {
        BoundValue::Tower { height: 2, top } => Some(top),
        BoundValue::Exact(v) if v.count_ones() == 1 => {
            let e = v.bits() - 1;
            (e.count_ones() == 1).then(|| BigUint::from(e.trailing_zeros()))
        }
        _ => None,
    }
}

/// `w = max{d (c(n+l, d, n+l) − 1), b(n+l, d, l+n+1)/2 + d}`.
pub fn w_bound(n: u64, d: u64, l: u64) -> Result<BoundValue, BoundError> {
    let (c_branch, b_branch) = w_branches(n, d, l)?;
    Ok(c_branch.bound_max(&b_branch))
}

/// The two branches of [`w_bound`].
pub fn w_branches(n: u64, d: u64, l: u64) -> Result<(BoundValue, BoundValue), BoundError> {
    if d < 2 {
        return Err(BoundError::DegreeTooSmall(d));
    }
    let cc = c(n + l, d, n + l)?;
    let c_branch = BoundValue::Exact(BigUint::from(d) * (cc - BigUint::one()));
    let b_branch = b(n + l, d, l + n + 1).halve().add(&BoundValue::exact(d));
    Ok((c_branch, b_branch))
}

/// `r = b(t+l, 2w, l+t+1)/2 + d`.
pub fn r_bound(t: u64, d: u64, l: u64, w: &BoundValue) -> BoundValue {
    let two_w = BoundValue::exact(2u32).mul(w);
    b_general(t + l, &two_w, l + t + 1).halve().add(&BoundValue::exact(d))
}

/// `c(n+l, d+1, n+l)`.
pub fn cardinality_bound(n: u64, d: u64, l: u64) -> Result<BigUint, BoundError> {
    if d < 2 {
        return Err(BoundError::DegreeTooSmall(d));
    }
    c(n + l, d + 1, n + l)
}

/// All bound quantities for `(n, d, l)`, as printed by the CLI.
#[derive(Debug, Clone)]
pub struct BoundTable {
    pub n: u64,
    pub d: u64,
    pub l: u64,
    pub bit_d: u64,
    pub c: BigUint,
    pub cardinality: BigUint,
    pub b: BoundValue,
    pub w_c_branch: BoundValue,
    pub w_b_branch: BoundValue,
    pub w: BoundValue,
    pub r: BoundValue,
}

/// `r` is computed with `t = n`.
pub fn bound_table(n: u64, d: u64, l: u64) -> Result<BoundTable, BoundError> {
    let (w_c_branch, w_b_branch) = w_branches(n, d, l)?;
    let w = w_c_branch.bound_max(&w_b_branch);
    Ok(BoundTable {
        n,
        d,
        l,
        bit_d: bit(d),
        c: c(n + l, d, n + l)?,
        cardinality: cardinality_bound(n, d, l)?,
        b: b(n + l, d, l + n + 1),
        r: r_bound(n, d, l, &w),
        w_c_branch,
        w_b_branch,
        w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn bit_table() {
        assert_eq!(bit(0), 1);
        assert_eq!(bit(1), 1);
        assert_eq!(bit(5), 3);
        assert_eq!(bit(1024), 11);
        for k in 1..=60u64 {
            assert_eq!(bit(1 << k), k + 1);
            assert_eq!(bit((1 << k) - 1), k);
        }
    }

    #[test]
    fn c_values() {
        assert_eq!(c(2, 2, 2).unwrap(), big(54));
        assert_eq!(c(1, 2, 1).unwrap(), big(6));
        for n in 0..5 {
            for s in 0..5 {
                if n + s > 0 {
                    assert_eq!(c(n, 1, s).unwrap(), big(1));
                }
            }
        }
        assert_eq!(c(0, 2, 0), Err(BoundError::Degenerate));
    }

    #[test]
    fn b_values() {
        // 4^1 = 4, 2^4 = 16, 2^16 + 1·2^(16·2) = 4295032832
        assert_eq!(b_exponent(1, 2, 1), Some(big(4_295_032_832)));
        match b(1, 2, 1) {
            BoundValue::Tower { height: 2, top } => assert_eq!(top, big(4_295_032_832)),
            other => panic!("{other:?}"),
        }
        assert_eq!(b(0, 2, 0), BoundValue::exact(65536u32));
        assert!(b(0, 2, 0).is_exact());
        match b(2, 2, 1) {
            BoundValue::Tower { height: 2, top } => {
                let expected = (BigUint::one() << 65536u32) + (BigUint::one() << 512u32);
                assert_eq!(top, expected);
                assert_eq!(top.to_string().len(), 19729);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn b_beyond_exact_range_is_symbolic() {
        let v = b(3, 2, 1);
        assert!(matches!(v, BoundValue::Expr(_)));
        assert!(v > b(2, 2, 1));
        let v3 = b(2, 3, 1);
        assert!(matches!(v3, BoundValue::Expr(_)));
        assert!(v3 > b(2, 2, 1));
    }

    #[test]
    fn w_values() {
        let (cb, bb) = w_branches(1, 2, 1).unwrap();
        assert_eq!(cb, BoundValue::exact(106u32));
        assert!(bb > cb);
        let w = w_bound(1, 2, 1).unwrap();
        assert_eq!(w.cmp(&bb), Ordering::Equal);
        assert_eq!(BoundValue::exact(5u32).bound_max(&BoundValue::exact(7u32)), BoundValue::exact(7u32));
        assert_eq!(w_bound(1, 1, 1).unwrap_err(), BoundError::DegreeTooSmall(1));
    }

    #[test]
    fn r_values() {
        let w = BoundValue::exact(1u32);
        let r = r_bound(1, 3, 1, &w);
        let expected = b(2, 2, 3).halve().add(&BoundValue::exact(3u32));
        assert_eq!(r.to_string(), expected.to_string());
        let tw = BoundValue::tower(2, big(100));
        let r = r_bound(1, 2, 1, &tw);
        assert!(matches!(r, BoundValue::Expr(_)));
        assert!(r > tw);
        assert!(matches!(tw.halve(), BoundValue::Expr(_)));
    }

    #[test]
    fn cardinality_values() {
        assert_eq!(cardinality_bound(2, 2, 1).unwrap(), big(9375));
        assert_eq!(cardinality_bound(1, 2, 1).unwrap(), big(375));
        assert_eq!(cardinality_bound(2, 3, 0).unwrap(), c(2, 4, 2).unwrap());
    }

    #[test]
    fn tower_normalization() {
        let t = BoundValue::tower(2, big(4));
        assert_eq!(t.as_exact(), Some(&big(65536)));
        let t = BoundValue::tower(2, big(19));
        assert!(t.is_exact());
        let t = BoundValue::tower(2, big(20));
        assert!(!t.is_exact());
        assert_eq!(t, BoundValue::tower(1, big(1 << 20)));
        assert_eq!(BoundValue::tower(1, big(10)), BoundValue::exact(1024u32));
    }

    #[test]
    fn display() {
        assert_eq!(BoundValue::exact(54u32).to_string(), "54");
        assert_eq!(b(1, 2, 1).to_string(), "2^2^4295032832");
        let (_, bb) = w_branches(1, 2, 1).unwrap();
        assert!(bb.to_string().ends_with("/2 + 2"));
    }
}

//! The scalar ring Q[ρ][[h]] truncated at a fixed h-order.
//!
//! `Rational` and `RhoPoly` are exact; `HSeries` keeps the coefficients of
//! h^0..h^N and never consults anything above. Binary operations demand
//! equal truncation orders: callers that need headroom for h-divisions
//! construct their inputs at a higher order and step down with
//! [`HSeries::divide_by_h`] or [`HSeries::retrunc`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational, always reduced, denominator > 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, o: &Rational) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rational {
    fn cmp(&self, o: &Rational) -> std::cmp::Ordering {
        (&self.num * &o.den).cmp(&(&o.num * &self.den))
    }
}

impl Rational {
    pub fn new(mut num: BigInt, mut den: BigInt) -> Self {
        assert!(!den.is_zero(), "Rational: zero denominator");
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if !g.is_one() {
            num /= &g;
            den /= &g;
        }
        Rational { num, den }
    }

    pub fn from_int(k: i64) -> Self {
        Rational { num: BigInt::from(k), den: BigInt::one() }
    }

    pub fn from_pair(p: i64, q: i64) -> Self {
        Rational::new(BigInt::from(p), BigInt::from(q))
    }

    pub fn zero() -> Self {
        Rational::from_int(0)
    }

    pub fn one() -> Self {
        Rational::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn add_ref(&self, o: &Rational) -> Rational {
        Rational::new(&self.num * &o.den + &o.num * &self.den, &self.den * &o.den)
    }

    pub fn sub_ref(&self, o: &Rational) -> Rational {
        Rational::new(&self.num * &o.den - &o.num * &self.den, &self.den * &o.den)
    }

    pub fn mul_ref(&self, o: &Rational) -> Rational {
        Rational::new(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div_ref(&self, o: &Rational) -> Rational {
        assert!(!o.is_zero(), "Rational: division by zero");
        Rational::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn neg_ref(&self) -> Rational {
        Rational { num: -self.num.clone(), den: self.den.clone() }
    }

    pub fn recip(&self) -> Rational {
        assert!(!self.is_zero(), "Rational: reciprocal of zero");
        Rational::new(self.den.clone(), self.num.clone())
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i32) -> Rational {
        if e < 0 {
            return self.recip().pow(-e);
        }
        Rational::new(self.num.pow(e as u32), self.den.pow(e as u32))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p, q),
            None => (s, "1"),
        };
        let num = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let den = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rational::new(num, den))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rational::from_str(&s).map_err(D::Error::custom)
    }
}

macro_rules! rational_ops {
    ($t:ty) => {
        impl std::ops::Add for $t {
            type Output = Rational;
            fn add(self, o: $t) -> Rational {
                self.add_ref(&o)
            }
        }
        impl std::ops::Sub for $t {
            type Output = Rational;
            fn sub(self, o: $t) -> Rational {
                self.sub_ref(&o)
            }
        }
        impl std::ops::Mul for $t {
            type Output = Rational;
            fn mul(self, o: $t) -> Rational {
                self.mul_ref(&o)
            }
        }
    };
}
rational_ops!(Rational);
rational_ops!(&Rational);

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

/// n! as a BigInt.
pub fn factorial(n: usize) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= BigInt::from(i);
    }
    f
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut b = BigInt::one();
    for i in 0..k.min(n - k) {
        b = b * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    b
}

/// Exact polynomial in ρ; sparse, no stored zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RhoPoly {
    terms: BTreeMap<u32, Rational>,
}

impl RhoPoly {
    pub fn zero() -> Self {
        RhoPoly::default()
    }

    pub fn one() -> Self {
        RhoPoly::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        RhoPoly::monomial(0, r)
    }

    pub fn rho() -> Self {
        RhoPoly::monomial(1, Rational::one())
    }

    pub fn monomial(exp: u32, r: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(exp, r);
        }
        RhoPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|r| r.is_one())
    }

    /// Highest ρ-exponent, or None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn coeff(&self, exp: u32) -> Rational {
        self.terms.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_part(&self) -> Rational {
        self.coeff(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().map_or(true, |d| d == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.terms.iter().map(|(e, r)| (*e, r))
    }

    fn accumulate(&mut self, exp: u32, r: Rational) {
        if r.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(cur) => {
                let s = cur.add_ref(&r);
                if s.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *cur = s;
                }
            }
            None => {
                self.terms.insert(exp, r);
            }
        }
    }

    pub fn add_ref(&self, o: &RhoPoly) -> RhoPoly {
        let mut out = self.clone();
        for (e, r) in o.iter() {
            out.accumulate(e, r.clone());
        }
        out
    }

    pub fn sub_ref(&self, o: &RhoPoly) -> RhoPoly {
        let mut out = self.clone();
        for (e, r) in o.iter() {
            out.accumulate(e, r.neg_ref());
        }
        out
    }

    pub fn neg_ref(&self) -> RhoPoly {
        RhoPoly { terms: self.terms.iter().map(|(e, r)| (*e, r.neg_ref())).collect() }
    }

    pub fn mul_ref(&self, o: &RhoPoly) -> RhoPoly {
        let mut out = RhoPoly::zero();
        for (e1, r1) in self.iter() {
            for (e2, r2) in o.iter() {
                out.accumulate(e1 + e2, r1.mul_ref(r2));
            }
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> RhoPoly {
        if r.is_zero() {
            return RhoPoly::zero();
        }
        RhoPoly { terms: self.terms.iter().map(|(e, c)| (*e, c.mul_ref(r))).collect() }
    }

    pub fn pow(&self, e: u32) -> RhoPoly {
        let mut out = RhoPoly::one();
        for _ in 0..e {
            out = out.mul_ref(self);
        }
        out
    }
}

impl fmt::Display for RhoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, r) in self.iter() {
            let (sign, mag) = if r.is_negative() { ("-", r.neg_ref()) } else { ("+", r.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            match e {
                0 => write!(f, "{}", mag)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{}*", mag)?;
                    }
                    if e == 1 {
                        write!(f, "rho")?;
                    } else {
                        write!(f, "rho^{}", e)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RhoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Truncated power series in h with `RhoPoly` coefficients.
///
/// `c` always has length `trunc + 1`; index = h-exponent.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HSeries {
    trunc: usize,
    c: Vec<RhoPoly>,
}

impl HSeries {
    pub fn zero(trunc: usize) -> Self {
        HSeries { trunc, c: vec![RhoPoly::zero(); trunc + 1] }
    }

    pub fn one(trunc: usize) -> Self {
        HSeries::from_poly(RhoPoly::one(), trunc)
    }

    pub fn constant(r: Rational, trunc: usize) -> Self {
        HSeries::from_poly(RhoPoly::constant(r), trunc)
    }

    pub fn from_poly(p: RhoPoly, trunc: usize) -> Self {
        let mut s = HSeries::zero(trunc);
        s.c[0] = p;
        s
    }

    /// h^k as a series (zero when k > trunc).
    pub fn h_pow(k: usize, trunc: usize) -> Self {
        let mut s = HSeries::zero(trunc);
        if k <= trunc {
            s.c[k] = RhoPoly::one();
        }
        s
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn coeff(&self, j: usize) -> &RhoPoly {
        assert!(j <= self.trunc, "HSeries: coefficient index {} beyond truncation {}", j, self.trunc);
        &self.c[j]
    }

    pub fn set_coeff(&mut self, j: usize, p: RhoPoly) {
        assert!(j <= self.trunc, "HSeries: coefficient index {} beyond truncation {}", j, self.trunc);
        self.c[j] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|p| p.is_zero())
    }

    /// Lowest h-exponent with a nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.c.iter().position(|p| !p.is_zero())
    }

    fn check_trunc(&self, o: &HSeries) {
        assert_eq!(
            self.trunc, o.trunc,
            "HSeries: truncation orders differ ({} vs {})",
            self.trunc, o.trunc
        );
    }

    pub fn add_ref(&self, o: &HSeries) -> HSeries {
        self.check_trunc(o);
        HSeries {
            trunc: self.trunc,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }

    pub fn sub_ref(&self, o: &HSeries) -> HSeries {
        self.check_trunc(o);
        HSeries {
            trunc: self.trunc,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }

    pub fn neg_ref(&self) -> HSeries {
        HSeries { trunc: self.trunc, c: self.c.iter().map(|p| p.neg_ref()).collect() }
    }

    pub fn mul_ref(&self, o: &HSeries) -> HSeries {
        self.check_trunc(o);
        let mut out = HSeries::zero(self.trunc);
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if i + j > self.trunc {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                out.c[i + j] = out.c[i + j].add_ref(&a.mul_ref(b));
            }
        }
        out
    }

    pub fn scale_rat(&self, r: &Rational) -> HSeries {
        HSeries { trunc: self.trunc, c: self.c.iter().map(|p| p.scale(r)).collect() }
    }

    pub fn scale_poly(&self, q: &RhoPoly) -> HSeries {
        HSeries { trunc: self.trunc, c: self.c.iter().map(|p| p.mul_ref(q)).collect() }
    }

    /// Multiply by h^k at the same truncation; the top k coefficients fall off.
    pub fn shift_h(&self, k: usize) -> HSeries {
        let mut out = HSeries::zero(self.trunc);
        for j in 0..=self.trunc.saturating_sub(k) {
            out.c[j + k] = self.c[j].clone();
        }
        out
    }

    /// Drop down to a smaller truncation order.
    pub fn retrunc(&self, n: usize) -> HSeries {
        assert!(n <= self.trunc, "HSeries: retrunc {} above current truncation {}", n, self.trunc);
        HSeries { trunc: n, c: self.c[..=n].to_vec() }
    }

    /// Exact division by h^k. The result is valid to order trunc − k;
    /// callers must have computed `self` with that much headroom.
    pub fn divide_by_h(&self, k: usize) -> Result<HSeries, CoeffError> {
        assert!(k >= 1 && k <= self.trunc, "HSeries: divide_by_h needs 1 <= k <= trunc");
        for j in 0..k {
            if !self.c[j].is_zero() {
                return Err(CoeffError::NotDivisible { k, j });
            }
        }
        Ok(HSeries { trunc: self.trunc - k, c: self.c[k..].to_vec() })
    }

    /// Multiplicative inverse; requires an invertible (nonzero rational)
    /// constant term.
    pub fn invert(&self) -> Result<HSeries, CoeffError> {
        if !self.c[0].is_constant() || self.c[0].is_zero() {
            return Err(CoeffError::NotInvertible);
        }
        let r0 = self.c[0].constant_part().recip();
        let mut b = HSeries::zero(self.trunc);
        b.c[0] = RhoPoly::constant(r0.clone());
        for n in 1..=self.trunc {
            let mut acc = RhoPoly::zero();
            for j in 1..=n {
                acc = acc.add_ref(&self.c[j].mul_ref(&b.c[n - j]));
            }
            b.c[n] = acc.scale(&r0.neg_ref());
        }
        Ok(b)
    }

    /// exp(kρh) = Σ_{j≤N} (kρ)^j h^j / j!.
    pub fn exp_rho_h(k: i64, trunc: usize) -> HSeries {
        let mut s = HSeries::zero(trunc);
        for j in 0..=trunc {
            let r = Rational::new(BigInt::from(k).pow(j as u32), factorial(j));
            s.c[j] = RhoPoly::monomial(j as u32, r);
        }
        s
    }

    /// The trivial-knot value 2·sinh(ρh)/h = Σ_{2j≤N} 2ρ^{2j+1} h^{2j}/(2j+1)!.
    pub fn delta(trunc: usize) -> HSeries {
        let mut s = HSeries::zero(trunc);
        let mut j = 0;
        while 2 * j <= trunc {
            let r = Rational::new(BigInt::from(2), factorial(2 * j + 1));
            s.c[2 * j] = RhoPoly::monomial((2 * j + 1) as u32, r);
            j += 1;
        }
        s
    }

    /// ((h/2)/arcsinh(h/2))², the even series 1 + h²/12 − h⁴/240 + ….
    pub fn prefactor(trunc: usize) -> HSeries {
        // arcsinh(h/2)/(h/2) = Σ_m (−1)^m C(2m,m)/(16^m (2m+1)) h^{2m}
        let mut s = HSeries::zero(trunc);
        let mut m = 0;
        while 2 * m <= trunc {
            let mut r = Rational::new(binomial(2 * m, m), BigInt::from(16).pow(m as u32) * BigInt::from(2 * m + 1));
            if m % 2 == 1 {
                r = -r;
            }
            s.c[2 * m] = RhoPoly::constant(r);
            m += 1;
        }
        let inv = s.invert().expect("arcsinh series has constant term 1");
        inv.mul_ref(&inv)
    }

    /// Nested exponent → rational-string maps: {h-exp: {ρ-exp: "p/q"}}.
    pub fn to_json(&self) -> serde_json::Value {
        let mut h_map = serde_json::Map::new();
        for (j, p) in self.c.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let mut rho_map = serde_json::Map::new();
            for (e, r) in p.iter() {
                rho_map.insert(e.to_string(), serde_json::Value::String(r.to_string()));
            }
            h_map.insert(j.to_string(), serde_json::Value::Object(rho_map));
        }
        serde_json::Value::Object(h_map)
    }

    pub fn from_json(v: &serde_json::Value, trunc: usize) -> Result<HSeries, String> {
        let obj = v.as_object().ok_or("series JSON must be an object")?;
        let mut s = HSeries::zero(trunc);
        for (jk, pv) in obj {
            let j: usize = jk.parse().map_err(|e| format!("bad h-exponent {jk:?}: {e}"))?;
            if j > trunc {
                continue;
            }
            let pobj = pv.as_object().ok_or("coefficient must be an object")?;
            let mut p = RhoPoly::zero();
            for (ek, rv) in pobj {
                let e: u32 = ek.parse().map_err(|err| format!("bad rho-exponent {ek:?}: {err}"))?;
                let rs = rv.as_str().ok_or("rational must be a string")?;
                p.accumulate(e, Rational::from_str(rs)?);
            }
            s.c[j] = p;
        }
        Ok(s)
    }
}

impl fmt::Display for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (j, p) in self.c.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            wrote = true;
            let needs_parens = p.terms.len() > 1;
            match (j, needs_parens) {
                (0, _) => write!(f, "{}", p)?,
                (_, true) => {
                    write!(f, "({})*", p)?;
                    write_h_pow(f, j)?;
                }
                (_, false) => {
                    if p.is_one() {
                        write_h_pow(f, j)?;
                    } else {
                        write!(f, "{}*", p)?;
                        write_h_pow(f, j)?;
                    }
                }
            }
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn write_h_pow(f: &mut fmt::Formatter<'_>, j: usize) -> fmt::Result {
    if j == 1 {
        write!(f, "h")
    } else {
        write!(f, "h^{}", j)
    }
}

impl fmt::Debug for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

macro_rules! hseries_ops {
    ($t:ty) => {
        impl std::ops::Add for $t {
            type Output = HSeries;
            fn add(self, o: $t) -> HSeries {
                self.add_ref(&o)
            }
        }
        impl std::ops::Sub for $t {
            type Output = HSeries;
            fn sub(self, o: $t) -> HSeries {
                self.sub_ref(&o)
            }
        }
        impl std::ops::Mul for $t {
            type Output = HSeries;
            fn mul(self, o: $t) -> HSeries {
                self.mul_ref(&o)
            }
        }
    };
}
hseries_ops!(HSeries);
hseries_ops!(&HSeries);

impl std::ops::Neg for HSeries {
    type Output = HSeries;
    fn neg(self) -> HSeries {
        self.neg_ref()
    }
}

/// Coefficient u_n of ½(log X)² = Σ_{n≥2} u_n (X−1)ⁿ.
pub fn u_coeff(n: usize) -> Rational {
    assert!(n >= 2, "u_coeff: domain error: need n >= 2, got {}", n);
    // square of log(1+a) = Σ (−1)^{m−1} a^m/m: the a^n coefficient of the
    // square is (−1)^n Σ_{a+b=n} 1/(ab), halved.
    let mut sum = Rational::zero();
    for a in 1..n {
        sum = sum.add_ref(&Rational::new(BigInt::one(), BigInt::from(a) * BigInt::from(n - a)));
    }
    let half = Rational::from_pair(1, 2);
    let s = sum.mul_ref(&half);
    if n % 2 == 0 {
        s
    } else {
        -s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoeffError {
    #[error("not divisible by h^{k}: the h^{j} coefficient is nonzero")]
    NotDivisible { k: usize, j: usize },
    #[error("series inverse needs an invertible constant term")]
    NotInvertible,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_pair(p, d)
    }

    #[test]
    fn rational_normalization() {
        assert_eq!(q(2, 4), q(1, 2));
        assert_eq!(q(1, -2), q(-1, 2));
        assert_eq!(q(0, -7), Rational::zero());
        assert_eq!(q(3, 1).to_string(), "3");
        assert_eq!(q(-3, 6).to_string(), "-1/2");
        assert_eq!(Rational::from_str("-7/21").unwrap(), q(-1, 3));
        assert!(Rational::from_str("1/0").is_err());
    }

    #[test]
    fn rational_arithmetic() {
        assert_eq!(q(1, 2) + q(1, 3), q(5, 6));
        assert_eq!(q(1, 2) - q(1, 3), q(1, 6));
        assert_eq!(q(2, 3) * q(3, 4), q(1, 2));
        assert_eq!(q(2, 3).div_ref(&q(4, 3)), q(1, 2));
        assert_eq!(q(-2, 3).pow(-2), q(9, 4));
    }

    #[test]
    fn rho_poly_arithmetic() {
        let p = RhoPoly::rho().add_ref(&RhoPoly::one()); // 1 + rho
        let sq = p.mul_ref(&p);
        assert_eq!(sq.coeff(0), q(1, 1));
        assert_eq!(sq.coeff(1), q(2, 1));
        assert_eq!(sq.coeff(2), q(1, 1));
        assert_eq!(p.sub_ref(&p), RhoPoly::zero());
        assert_eq!(sq.to_string(), "1 + 2*rho + rho^2");
    }

    #[test]
    fn ring_ops_truncate() {
        // (1 + h)(1 − h) at N=1 is 1: the h² term falls off.
        let n = 1;
        let one = HSeries::one(n);
        let h = HSeries::h_pow(1, n);
        let prod = (&one + &h) * (&one - &h);
        assert_eq!(prod, HSeries::one(n));

        // (ρh)² at N=4 is ρ²h².
        let rho_h = HSeries::from_poly(RhoPoly::rho(), 4).shift_h(1);
        let sq = &rho_h * &rho_h;
        let mut expect = HSeries::zero(4);
        expect.set_coeff(2, RhoPoly::monomial(2, Rational::one()));
        assert_eq!(sq, expect);
    }

    #[test]
    fn exp_rho_h_frozen_values() {
        let e = HSeries::exp_rho_h(1, 2);
        assert_eq!(e.coeff(0), &RhoPoly::one());
        assert_eq!(e.coeff(1), &RhoPoly::rho());
        assert_eq!(e.coeff(2), &RhoPoly::monomial(2, q(1, 2)));

        let e = HSeries::exp_rho_h(-1, 2);
        assert_eq!(e.coeff(1), &RhoPoly::monomial(1, q(-1, 1)));
        assert_eq!(e.coeff(2), &RhoPoly::monomial(2, q(1, 2)));

        assert_eq!(HSeries::exp_rho_h(0, 5), HSeries::one(5));

        // exp(aρh)·exp(bρh) = exp((a+b)ρh)
        let lhs = HSeries::exp_rho_h(2, 6) * HSeries::exp_rho_h(3, 6);
        assert_eq!(lhs, HSeries::exp_rho_h(5, 6));
    }

    #[test]
    fn delta_frozen_values() {
        assert_eq!(HSeries::delta(0).coeff(0), &RhoPoly::monomial(1, q(2, 1)));
        let d = HSeries::delta(4);
        assert_eq!(d.coeff(0), &RhoPoly::monomial(1, q(2, 1)));
        assert_eq!(d.coeff(1), &RhoPoly::zero());
        assert_eq!(d.coeff(2), &RhoPoly::monomial(3, q(1, 3)));
        assert_eq!(d.coeff(4), &RhoPoly::monomial(5, q(1, 60)));
    }

    #[test]
    fn delta_is_unknot_value() {
        // δ·h = exp(ρh) − exp(−ρh) at every truncation.
        for n in 1..=9 {
            let lhs = HSeries::delta(n).shift_h(1);
            let rhs = HSeries::exp_rho_h(1, n) - HSeries::exp_rho_h(-1, n);
            assert_eq!(lhs, rhs, "unknot identity failed at N={}", n);
        }
    }

    #[test]
    fn u_coeff_frozen_values() {
        assert_eq!(u_coeff(2), q(1, 2));
        assert_eq!(u_coeff(3), q(-1, 2));
        assert_eq!(u_coeff(4), q(11, 24));
        assert_eq!(u_coeff(5), q(-5, 12));
    }

    #[test]
    #[should_panic(expected = "domain error")]
    fn u_coeff_domain() {
        u_coeff(1);
    }

    #[test]
    fn u_coeff_reconstructs_half_log_squared() {
        // With X = exp(ρh): ½(log X)² = ½ρ²h². The u-expansion must
        // reproduce that through the truncation order.
        let n = 7;
        let x_minus_1 = HSeries::exp_rho_h(1, n) - HSeries::one(n);
        let mut acc = HSeries::zero(n);
        let mut pow = x_minus_1.clone();
        pow = pow.mul_ref(&x_minus_1); // (X−1)²
        for k in 2..=n {
            acc = acc + pow.scale_rat(&u_coeff(k));
            pow = pow.mul_ref(&x_minus_1);
        }
        let mut expect = HSeries::zero(n);
        expect.set_coeff(2, RhoPoly::monomial(2, q(1, 2)));
        assert_eq!(acc, expect);
    }

    #[test]
    fn prefactor_frozen_values() {
        assert_eq!(HSeries::prefactor(0), HSeries::one(0));
        let p = HSeries::prefactor(4);
        assert_eq!(p.coeff(0), &RhoPoly::one());
        assert_eq!(p.coeff(2), &RhoPoly::constant(q(1, 12)));
        assert_eq!(p.coeff(4), &RhoPoly::constant(q(-1, 240)));
        // even in h
        let p = HSeries::prefactor(9);
        for j in (1..=9).step_by(2) {
            assert!(p.coeff(j).is_zero(), "odd coefficient h^{} nonzero", j);
        }
    }

    #[test]
    fn divide_by_h_contract() {
        let a = HSeries::h_pow(2, 5) + HSeries::h_pow(3, 5);
        let d = a.divide_by_h(2).unwrap();
        assert_eq!(d, HSeries::one(3) + HSeries::h_pow(1, 3));

        let bad = HSeries::one(3) + HSeries::h_pow(1, 3);
        assert_eq!(bad.divide_by_h(1), Err(CoeffError::NotDivisible { k: 1, j: 0 }));

        // divide_by_h(a·h, 1) = a at one order less
        let a = HSeries::exp_rho_h(1, 6);
        let back = a.shift_h(1).divide_by_h(1).unwrap();
        assert_eq!(back, a.retrunc(5));
    }

    #[test]
    fn invert_contract() {
        let n = 6;
        let s = HSeries::one(n) + HSeries::h_pow(1, n).scale_poly(&RhoPoly::rho());
        let inv = s.invert().unwrap();
        assert_eq!(s * inv, HSeries::one(n));
        assert!(HSeries::zero(3).invert().is_err());
        assert!(HSeries::from_poly(RhoPoly::rho(), 3).invert().is_err());
    }

    #[test]
    fn display_and_json_roundtrip() {
        let mut s = HSeries::delta(4);
        s.set_coeff(1, RhoPoly::constant(q(-1, 2)));
        assert_eq!(s.to_string(), "2*rho + -1/2*h + 1/3*rho^3*h^2 + 1/60*rho^5*h^4");
        let v = s.to_json();
        let back = HSeries::from_json(&v, 4).unwrap();
        assert_eq!(back, s);
    }
}

//! Exact arithmetic in the ring Z[v, v^-1] and the quantum scalars built on
//! top of it: quantum integers [m], factorials [m]!, binomials, and the
//! even-indexed factorials [m]!_c used for the type-C parabolic factors.
//!
//! Coefficients are arbitrary-precision integers; structure constants grow
//! quickly with the rank and fixed-width overflow would be silent corruption.
//! Division is exact and fails loudly on a nonzero remainder.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// A sparse Laurent polynomial over Z, keyed by exponent of `v`.
///
/// Invariant: no stored coefficient is zero, so equality of values is
/// equality of the term maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Laurent {
    terms: BTreeMap<i64, BigInt>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn one() -> Self {
        Laurent::monomial(1, 0)
    }

    /// The constant polynomial `c`.
    pub fn int<T: Into<BigInt>>(c: T) -> Self {
        Laurent::monomial(c, 0)
    }

    /// `c * v^k`.
    pub fn monomial<T: Into<BigInt>>(c: T, k: i64) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        Laurent { terms }
    }

    /// `v^k`.
    pub fn v_pow(k: i64) -> Self {
        Laurent::monomial(1, k)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0).is_one()
    }

    pub fn coeff(&self, k: i64) -> BigInt {
        self.terms.get(&k).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Iterate over (exponent, coefficient) pairs in ascending exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (&i64, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest exponent with nonzero coefficient.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Smallest exponent with nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    fn insert_term(&mut self, k: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Multiply by `v^k`.
    pub fn shift(&self, k: i64) -> Self {
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Multiply by an integer scalar.
    pub fn scale<T: Into<BigInt>>(&self, c: T) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Laurent::zero();
        }
        Laurent {
            terms: self.terms.iter().map(|(e, k)| (*e, k * &c)).collect(),
        }
    }

    /// The bar involution v -> v^-1.
    pub fn bar(&self) -> Self {
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Laurent::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at v = 1 (the classical limit).
    pub fn eval_at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Exact division; `Err(InexactDivision)` on a nonzero remainder.
    pub fn exact_div(&self, den: &Laurent) -> Result<Laurent, Error> {
        if den.is_zero() {
            return Err(Error::InexactDivision("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(Laurent::zero());
        }
        let (dd, dv) = (den.degree().unwrap(), den.valuation().unwrap());
        let min_q = self.valuation().unwrap() - dv;
        let den_lead = den.coeff(dd);
        let mut rem = self.clone();
        let mut quot = Laurent::zero();
        while !rem.is_zero() {
            let rd = rem.degree().unwrap();
            let q_exp = rd - dd;
            if q_exp < min_q {
                return Err(Error::InexactDivision(format!("{} / {}", self, den)));
            }
            let (q_coeff, r) = num_integer_div_rem(&rem.coeff(rd), &den_lead);
            if !r.is_zero() {
                return Err(Error::InexactDivision(format!("{} / {}", self, den)));
            }
            let t = Laurent::monomial(q_coeff, q_exp);
            rem -= &(&t * den);
            quot += &t;
        }
        Ok(quot)
    }

    /// If `self = v^k * other` for some integer k, return k.
    pub fn monomial_ratio(&self, other: &Laurent) -> Option<i64> {
        if self.is_zero() || other.is_zero() {
            return if self.is_zero() && other.is_zero() { Some(0) } else { None };
        }
        let k = self.degree()? - other.degree()?;
        if *self == other.shift(k) {
            Some(k)
        } else {
            None
        }
    }

    /// Quantum integer [m] = (v^2m - 1)/(v^2 - 1), extended to negative m by
    /// the same formal fraction: [-m] = -v^{-2m} [m].
    pub fn q_int(m: i64) -> Self {
        match m.cmp(&0) {
            Ordering::Equal => Laurent::zero(),
            Ordering::Greater => {
                let mut t = BTreeMap::new();
                for k in 0..m {
                    t.insert(2 * k, BigInt::one());
                }
                Laurent { terms: t }
            }
            Ordering::Less => Laurent::q_int(-m).shift(2 * m).scale(-1),
        }
    }

    /// Quantum factorial [m]! = [m][m-1]...[1].
    pub fn q_fact(m: i64) -> Self {
        assert!(m >= 0, "q_fact needs a nonnegative argument");
        let mut acc = Laurent::one();
        for i in 1..=m {
            acc = &acc * &Laurent::q_int(i);
        }
        acc
    }

    /// Quantum binomial [m choose k] = [m][m-1]...[m-k+1] / [k]! for any
    /// integer m and k >= 0; exact division by construction.
    pub fn q_binom(m: i64, k: i64) -> Self {
        assert!(k >= 0, "q_binom needs k >= 0");
        let mut num = Laurent::one();
        for i in 1..=k {
            num = &num * &Laurent::q_int(m - k + i);
        }
        num.exact_div(&Laurent::q_fact(k))
            .expect("quantum binomial division is always exact")
    }

    /// Type-C quantum factorial [m]!_c = [2][4]...[2m].
    pub fn q_fact_c(m: i64) -> Self {
        assert!(m >= 0, "q_fact_c needs a nonnegative argument");
        let mut acc = Laurent::one();
        for k in 1..=m {
            acc = &acc * &Laurent::q_int(2 * k);
        }
        acc
    }
}

fn num_integer_div_rem(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    let q = a / b;
    let r = a - &q * b;
    (q, r)
}

impl AddAssign<&Laurent> for Laurent {
    fn add_assign(&mut self, rhs: &Laurent) {
        for (k, c) in &rhs.terms {
            self.insert_term(*k, c.clone());
        }
    }
}

impl SubAssign<&Laurent> for Laurent {
    fn sub_assign(&mut self, rhs: &Laurent) {
        for (k, c) in &rhs.terms {
            self.insert_term(*k, -c.clone());
        }
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        self.scale(-1)
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.insert_term(ka + kb, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            let coeff_is_one = mag.is_one();
            match (*k, coeff_is_one) {
                (0, _) => write!(f, "{}", mag)?,
                (1, true) => write!(f, "v")?,
                (1, false) => write!(f, "{}*v", mag)?,
                (_, true) => write!(f, "v^{}", k)?,
                (_, false) => write!(f, "{}*v^{}", mag, k)?,
            }
        }
        Ok(())
    }
}

/// JSON form: an object mapping exponent to string-encoded big integer.
impl serde::Serialize for Laurent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.terms.len()))?;
        for (k, c) in &self.terms {
            m.serialize_entry(&k.to_string(), &c.to_string())?;
        }
        m.end()
    }
}

impl<'de> serde::Deserialize<'de> for Laurent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw: BTreeMap<String, String> = BTreeMap::deserialize(d)?;
        let mut out = Laurent::zero();
        for (k, c) in raw {
            let k: i64 = k.parse().map_err(D::Error::custom)?;
            let c: BigInt = c.parse().map_err(D::Error::custom)?;
            out.insert_term(k, c);
        }
        Ok(out)
    }
}

//! Exact square tests and square classes in `Q^×/(Q^×)²`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Pollard–Brent iterations allowed per composite cofactor.
pub const DEFAULT_FACTOR_BUDGET: u64 = 2_000_000;

const TRIAL_LIMIT: u64 = 10_000;

/// Miller–Rabin with these bases is exact below this bound.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const MR_EXACT_BELOW: &str = "3317044064679887385961981";

/// A rational modulo nonzero squares: zero, or a signed squarefree integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SquareClass {
    Zero,
    Class(BigInt),
}

impl SquareClass {
    pub fn is_square(&self) -> bool {
        matches!(self, SquareClass::Class(r) if r.is_one())
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SquareClass::Zero => write!(f, "0"),
            SquareClass::Class(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for SquareClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Nonnegative integer square root, if `n` is a perfect square.
pub fn integer_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Nonnegative rational square root, if `q` is a square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    Some(BigRational::new(
        integer_sqrt(q.numer())?,
        integer_sqrt(q.denom())?,
    ))
}

/// `q` is the square of a nonzero rational.
pub fn is_nonzero_square(q: &BigRational) -> bool {
    !q.is_zero() && rational_sqrt(q).is_some()
}

/// Square class of `q`.
pub fn squarefree_part(q: &BigRational) -> Result<SquareClass> {
    squarefree_part_with_budget(q, DEFAULT_FACTOR_BUDGET)
}

pub fn squarefree_part_with_budget(q: &BigRational, budget: u64) -> Result<SquareClass> {
    if q.is_zero() {
        return Ok(SquareClass::Zero);
    }
    // num/den ~ num·den modulo squares
    let n = (q.numer() * q.denom()).abs();
    let mut rep = if q.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    for (p, e) in factor(&n, budget)? {
        if e % 2 == 1 {
            rep *= p;
        }
    }
    Ok(SquareClass::Class(rep))
}

/// Prime factorization of `n ≥ 1`, ascending.
pub fn factor(n: &BigInt, budget: u64) -> Result<Vec<(BigInt, u32)>> {
    let mut n = n.abs();
    let mut found: Vec<BigInt> = Vec::new();
    let mut p = 2u64;
    while p < TRIAL_LIMIT && n > BigInt::one() {
        let pb = BigInt::from(p);
        while (&n % &pb).is_zero() {
            n /= &pb;
            found.push(pb.clone());
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if m < BigInt::from(TRIAL_LIMIT * TRIAL_LIMIT) || is_prime(&m)? {
            found.push(m);
            continue;
        }
        if let Some(r) = integer_sqrt(&m) {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let d = pollard_brent(&m, budget).ok_or_else(|| Error::FactorBudget(m.to_string()))?;
        stack.push(&m / &d);
        stack.push(d);
    }
    found.sort();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for p in found {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

/// Primality, exact below `3.3·10²⁴`. Above that a Miller–Rabin witness
/// still proves compositeness, but a probable prime is refused.
fn is_prime(n: &BigInt) -> Result<bool> {
    let one = BigInt::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'bases: for &a in &MR_BASES {
        let a = BigInt::from(a);
        if (&a % n).is_zero() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == nm1 {
                continue 'bases;
            }
        }
        return Ok(false);
    }
    let bound: BigInt = MR_EXACT_BELOW.parse().expect("constant parses");
    if n >= &bound {
        return Err(Error::FactorBudget(format!(
            "{n} is beyond the exact primality bound"
        )));
    }
    Ok(true)
}

/// A nontrivial factor of an odd composite `n`, within `budget` steps.
fn pollard_brent(n: &BigInt, budget: u64) -> Option<BigInt> {
    let one = BigInt::one();
    let mut steps = 0u64;
    for c in 1u64.. {
        let c = BigInt::from(c);
        let f = |x: &BigInt| (x * x + &c) % n;
        let (mut y, mut r, mut q) = (BigInt::from(2), 1u64, BigInt::one());
        let mut g = one.clone();
        let (mut x, mut ys) = (y.clone(), y.clone());
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..(r - k).min(128) {
                    y = f(&y);
                    q = q * (&x - &y).abs() % n;
                }
                g = q.gcd(n);
                k += 128;
                steps += 128;
                if steps > budget {
                    return None;
                }
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    None
}

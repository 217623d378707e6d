//! The family `E : y² = x³ + ax² + bx` with `b = ck² − ac − c²`, which puts
//! `α = (c, ck)` on `E` next to the 2-torsion point `T = (0, 0)`.

mod curve;
pub mod field;
mod order;
mod scan;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub use curve::{ReducedCurve, ReducedPoint};
pub use order::{
    bsgs, factor_small, group_order, hasse_interval, odd_order_check, order_from_multiple,
    OddOrderCheck, EXHAUSTIVE_BELOW, EXHAUSTIVE_FALLBACK_BELOW,
};
pub use scan::{
    empirical_density, primes_up_to, scan, segment_primes, ScanOptions, ScanReport, SEGMENT,
};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "[i64; 3]", try_from = "[i64; 3]")]
pub struct CurveParams {
    pub a: i64,
    pub c: i64,
    pub k: i64,
    b: BigInt,
    delta: BigInt,
}

/// Validates `(a, c, k)`: `c ≠ 0` and `Δ = 16b²(a² − 4b) ≠ 0`.
pub fn curve_from_params(a: i64, c: i64, k: i64) -> Result<CurveParams> {
    let (ab, cb, kb) = (BigInt::from(a), BigInt::from(c), BigInt::from(k));
    if c == 0 {
        return Err(Error::BadCurve("c = 0 puts α on the 2-torsion".into()));
    }
    let b = &cb * &kb * &kb - &ab * &cb - &cb * &cb;
    let delta = BigInt::from(16) * &b * &b * (&ab * &ab - BigInt::from(4) * &b);
    if delta.is_zero() {
        return Err(Error::BadCurve(format!("[{a},{c},{k}] has Δ = 0")));
    }
    Ok(CurveParams { a, c, k, b, delta })
}

impl CurveParams {
    pub fn new(a: i64, c: i64, k: i64) -> Result<CurveParams> {
        curve_from_params(a, c, k)
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn delta(&self) -> &BigInt {
        &self.delta
    }

    /// `a² − 4b`, the discriminant of `x² + ax + b`.
    pub fn disc(&self) -> BigInt {
        BigInt::from(self.a) * self.a - BigInt::from(4) * &self.b
    }

    /// `α = (c, ck)`.
    pub fn alpha(&self) -> (BigInt, BigInt) {
        (BigInt::from(self.c), BigInt::from(self.c) * self.k)
    }

    /// `x(α + T) = k² − a − c`.
    pub fn x_alpha_plus_t(&self) -> BigInt {
        BigInt::from(self.k) * self.k - self.a - self.c
    }

    /// Whether `(x, y)` satisfies the Weierstrass equation over `Q`.
    pub fn on_curve(&self, x: &BigInt, y: &BigInt) -> bool {
        y * y == x * x * x + BigInt::from(self.a) * x * x + &self.b * x
    }

    fn residues(&self, p: u64) -> (u64, u64, u64) {
        let (a, c, k) = (
            field::from_signed(self.a, p),
            field::from_signed(self.c, p),
            field::from_signed(self.k, p),
        );
        // b = ck² − ac − c²
        let b = field::sub(
            field::sub(
                field::mul(c, field::mul(k, k, p), p),
                field::mul(a, c, p),
                p,
            ),
            field::mul(c, c, p),
            p,
        );
        (a, b, c)
    }

    /// Odd `p` not dividing `Δ`.
    pub fn is_good_prime(&self, p: u64) -> bool {
        if p < 3 || p % 2 == 0 {
            return false;
        }
        if p >= field::MAX_P {
            return !(&self.delta % BigInt::from(p)).is_zero();
        }
        let (a, b, _) = self.residues(p);
        b != 0 && field::sub(field::mul(a, a, p), field::mul(4, b, p), p) != 0
    }

    /// `E mod p`; errors at bad primes.
    pub fn reduce(&self, p: u64) -> Result<ReducedCurve> {
        if !self.is_good_prime(p) {
            return Err(Error::BadPrime(p));
        }
        let (a, b, _) = self.residues(p);
        ReducedCurve::new(a, b, p)
    }

    /// `ᾱ ∈ E(F_p)`.
    pub fn alpha_mod(&self, p: u64) -> Result<ReducedPoint> {
        let e = self.reduce(p)?;
        let (_, _, c) = self.residues(p);
        let y = field::mul(c, field::from_signed(self.k, p), p);
        Ok(e.point(c, y).expect("α lies on E"))
    }

    /// `#E(F_p)`.
    pub fn group_order(&self, p: u64) -> Result<u64> {
        group_order(&self.reduce(p)?)
    }

    /// Whether `ᾱ` has odd order in `E(F_p)`.
    pub fn has_odd_order(&self, p: u64) -> Result<bool> {
        Ok(self.odd_order_check(p)?.odd)
    }

    pub fn odd_order_check(&self, p: u64) -> Result<OddOrderCheck> {
        let e = self.reduce(p)?;
        odd_order_check(&e, self.alpha_mod(p)?)
    }

    /// `true` if `a² − 4b` is a nonzero rational square, so `E` has full
    /// rational 2-torsion.
    pub fn has_full_two_torsion(&self) -> bool {
        let d = self.disc();
        !d.is_negative() && d.sqrt().pow(2) == d
    }
}

impl From<CurveParams> for [i64; 3] {
    fn from(c: CurveParams) -> [i64; 3] {
        [c.a, c.c, c.k]
    }
}

impl TryFrom<[i64; 3]> for CurveParams {
    type Error = Error;
    fn try_from(v: [i64; 3]) -> Result<CurveParams> {
        curve_from_params(v[0], v[1], v[2])
    }
}

impl std::fmt::Display for CurveParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.c, self.k)
    }
}

//! `#E(F_p)` by baby-step giant-step on random points of `E` and its
//! quadratic twist, and the odd-order test built on it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::curve::{ReducedCurve, ReducedPoint};
use super::field as f;
use crate::{Error, Result};

/// At or below this, points are counted directly.
pub const EXHAUSTIVE_BELOW: u64 = 230;
/// Ambiguity fallback to a direct count is allowed under this bound.
pub const EXHAUSTIVE_FALLBACK_BELOW: u64 = 10_000;
const MAX_POINTS: usize = 40;

/// `[p + 1 − 2√p, p + 1 + 2√p]`, rounded outward.
pub fn hasse_interval(p: u64) -> (u64, u64) {
    let w = (4 * p).isqrt();
    (p + 1 - w, p + 1 + w)
}

/// Some `n ∈ [lo, hi]` with `n·P = O`, if there is one.
pub fn bsgs(e: &ReducedCurve, pt: ReducedPoint, lo: u64, hi: u64) -> Option<u64> {
    let m = (hi - lo + 1).isqrt() + 1;
    let mut baby: Vec<(u64, u64, u64)> = Vec::with_capacity(m as usize);
    let mut q = ReducedPoint::Infinity;
    for j in 0..m {
        if let ReducedPoint::Affine { x, y } = q {
            baby.push((x, y, j));
        }
        q = e.add(q, pt);
    }
    baby.sort_unstable();
    let step = e.scalar_mul(m, pt);
    let mut g = e.scalar_mul(lo, pt);
    let mut base = lo;
    while base <= hi {
        match g {
            ReducedPoint::Infinity => return Some(base),
            ReducedPoint::Affine { x, y } => {
                let want = (x, f::neg(y, e.p()));
                let i = baby.partition_point(|&(bx, by, _)| (bx, by) < want);
                if let Some(&(bx, by, j)) = baby.get(i) {
                    if (bx, by) == want && base + j <= hi {
                        return Some(base + j);
                    }
                }
            }
        }
        g = e.add(g, step);
        base += m;
    }
    None
}

/// Exact order of `P` given a multiple `n` of it.
pub fn order_from_multiple(e: &ReducedCurve, pt: ReducedPoint, mut n: u64) -> u64 {
    for (q, _) in factor_small(n) {
        while n % q == 0 && e.scalar_mul(n / q, pt).is_infinity() {
            n /= q;
        }
    }
    n
}

/// Prime factorization by trial division.
pub fn factor_small(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            let mut e = 0;
            while n % q == 0 {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn lcm(x: u64, y: u64) -> u64 {
    x / num_integer::gcd(x, y) * y
}

/// Values `N ∈ [lo, hi]` with `le | N` and `lt | 2p + 2 − N`, stopping at two.
fn candidates(p: u64, lo: u64, hi: u64, le: u64, lt: u64) -> Vec<u64> {
    let total = 2 * p + 2;
    let mut out = Vec::new();
    if le >= lt {
        let mut n = lo.div_ceil(le) * le;
        while n <= hi && out.len() < 2 {
            if (total - n) % lt == 0 {
                out.push(n);
            }
            n += le;
        }
    } else {
        let (tlo, thi) = (total - hi, total - lo);
        let mut n = tlo.div_ceil(lt) * lt;
        while n <= thi && out.len() < 2 {
            if (total - n) % le == 0 {
                out.push(total - n);
            }
            n += lt;
        }
    }
    out
}

/// `#E(F_p)`.
///
/// Random points of `E` and of its twist `E^g` (with `#E + #E^g = 2p + 2`)
/// narrow the Hasse interval to a single value; both curves contain `(0, 0)`,
/// so both orders start out known to be even. The points are drawn from a
/// generator seeded by `p`.
pub fn group_order(e: &ReducedCurve) -> Result<u64> {
    let p = e.p();
    if p <= EXHAUSTIVE_BELOW {
        return Ok(e.count_points_exhaustive());
    }
    let (lo, hi) = hasse_interval(p);
    let g = (2..p)
        .find(|&g| f::legendre(g, p) == -1)
        .expect("p is an odd prime");
    let tw = e.twist(g);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let (mut le, mut lt) = (2u64, 2u64);
    for attempt in 0..MAX_POINTS {
        let (curve, range) = if attempt % 2 == 0 {
            (e, (lo, hi))
        } else {
            (&tw, (2 * p + 2 - hi, 2 * p + 2 - lo))
        };
        let pt = curve.random_point(&mut rng);
        let n = bsgs(curve, pt, range.0, range.1).ok_or(Error::OrderAmbiguous { p })?;
        let ord = order_from_multiple(curve, pt, n);
        if attempt % 2 == 0 {
            le = lcm(le, ord);
        } else {
            lt = lcm(lt, ord);
        }
        match candidates(p, lo, hi, le, lt).as_slice() {
            [n] => return Ok(*n),
            [] => return Err(Error::OrderAmbiguous { p }),
            _ => {}
        }
    }
    if p < EXHAUSTIVE_FALLBACK_BELOW {
        return Ok(e.count_points_exhaustive());
    }
    Err(Error::OrderAmbiguous { p })
}

/// `N = 2^s · m` together with the verdict on a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OddOrderCheck {
    pub p: u64,
    pub n: u64,
    pub s: u32,
    pub m: u64,
    pub odd: bool,
}

/// Whether `pt` has odd order: with `N = 2^s·m`, that is `m·pt = O`.
pub fn odd_order_check(e: &ReducedCurve, pt: ReducedPoint) -> Result<OddOrderCheck> {
    let n = group_order(e)?;
    let s = n.trailing_zeros();
    let m = n >> s;
    Ok(OddOrderCheck {
        p: e.p(),
        n,
        s,
        m,
        odd: e.scalar_mul(m, pt).is_infinity(),
    })
}

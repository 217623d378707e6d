//! Segmented prime sieve and the empirical odd-order ratio `π_S(x)/π(x)`.

use std::io::Write;

use num_rational::BigRational;
use rayon::prelude::*;

use super::order::OddOrderCheck;
use super::CurveParams;
use crate::density::DensityValue;
use crate::{Error, Result};

/// Sieve segment length; fixed so that work splits identically on every run.
pub const SEGMENT: u64 = 1 << 16;

/// Primes `≤ n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n as usize + 1];
    let mut out = Vec::new();
    for i in 2..=n as usize {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n as usize {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `[lo, hi)` given every prime up to `√hi`.
pub fn segment_primes(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let lo = lo.max(2);
    if hi <= lo {
        return Vec::new();
    }
    let mut composite = vec![false; (hi - lo) as usize];
    for &q in base {
        if q * q >= hi {
            break;
        }
        let mut j = (lo.div_ceil(q) * q).max(q * q);
        while j < hi {
            composite[(j - lo) as usize] = true;
            j += q;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| lo + i as u64)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanReport {
    pub x_max: u64,
    /// `π(x)`, including 2 and the primes dividing `Δ`.
    pub primes_total: u64,
    /// Odd primes of good reduction.
    pub primes_good: u64,
    /// Good primes at which `ᾱ` has odd order.
    pub odd_count: u64,
    /// `odd_count / primes_total`.
    pub ratio: DensityValue,
    pub per_prime: Option<Vec<OddOrderCheck>>,
}

impl ScanReport {
    /// `odd_count / primes_good`, the ratio with bad primes left out of the
    /// denominator as well.
    pub fn good_ratio(&self) -> DensityValue {
        DensityValue::from_ratio(BigRational::new(
            self.odd_count.into(),
            self.primes_good.max(1).into(),
        ))
    }

    /// `p,N,s,m,odd` lines, with a header.
    pub fn write_audit_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let rows = self
            .per_prime
            .as_ref()
            .ok_or_else(|| Error::Contract("scan was run without the per-prime audit".into()))?;
        writeln!(w, "p,N,s,m,odd")?;
        for r in rows {
            writeln!(w, "{},{},{},{},{}", r.p, r.n, r.s, r.m, u8::from(r.odd))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScanOptions {
    /// Keep one [`OddOrderCheck`] per good prime.
    pub audit: bool,
}

#[derive(Default)]
struct Partial {
    total: u64,
    good: u64,
    odd: u64,
    audit: Vec<OddOrderCheck>,
}

/// `π_S(x)/π(x)` for `ᾱ` on `E`, without the per-prime audit.
pub fn empirical_density(curve: &CurveParams, x_max: u64) -> Result<ScanReport> {
    scan(curve, x_max, ScanOptions::default())
}

/// Scans every prime `p ≤ x_max`, one sieve segment per task.
pub fn scan(curve: &CurveParams, x_max: u64, opts: ScanOptions) -> Result<ScanReport> {
    if x_max < 1000 {
        return Err(Error::Contract(format!(
            "x_max must be at least 1000, got {x_max}"
        )));
    }
    let base = primes_up_to((x_max + 1).isqrt() + 1);
    let starts: Vec<u64> = (0..=x_max / SEGMENT).map(|i| i * SEGMENT).collect();
    let parts: Vec<Partial> = starts
        .par_iter()
        .map(|&lo| {
            let hi = (lo + SEGMENT).min(x_max + 1);
            let mut part = Partial::default();
            for p in segment_primes(lo, hi, &base) {
                part.total += 1;
                if !curve.is_good_prime(p) {
                    continue;
                }
                part.good += 1;
                let check = curve.odd_order_check(p)?;
                part.odd += u64::from(check.odd);
                if opts.audit {
                    part.audit.push(check);
                }
            }
            Ok(part)
        })
        .collect::<Result<_>>()?;
    let mut total = Partial::default();
    for p in parts {
        total.total += p.total;
        total.good += p.good;
        total.odd += p.odd;
        total.audit.extend(p.audit);
    }
    Ok(ScanReport {
        x_max,
        primes_total: total.total,
        primes_good: total.good,
        odd_count: total.odd,
        ratio: DensityValue::from_ratio(BigRational::new(total.odd.into(), total.total.into())),
        per_prime: opts.audit.then_some(total.audit),
    })
}

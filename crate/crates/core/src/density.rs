//! Exact odd-order densities `𝓕(G)` of subgroups `G ⊆ AGL₂(Z/ℓ^r)`.
//!
//! `𝓕(G)` is the sum over `(v, M) ∈ G` of `μ_r(v, M)`, the share of the
//! limiting fixed-point density carried by all lifts of `(v, M)`. The value
//! of `μ_r` is found by a five-way dispatch:
//!
//! 1. `(v, M) = (0, I)`: closed form.
//! 2. `v ∉ Row(M − I)`: zero, since no lift has a fixed point either.
//! 3. `v ≡ 0`, `M ≡ I (mod ℓ)`: divide through by `ℓ` and recurse at `r − 1`
//!    (scaling by `ℓ^{-6}`).
//! 4. `det(M − I) ≢ 0 (mod ℓ^r)`: every lift has a fixed point.
//! 5. otherwise: geometric series over the lifts that stay degenerate.
//!
//! The recursion in (3) is scale-free: the final value only depends on which
//! terminal case is reached and on the starting level, which lets
//! [`density_exact`] count elements per case instead of summing rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::groupengine::Subgroup;
use crate::modmatrix::{agl2_order, det_mod, solve_row, Mat2, Modulus, RowVec};
use crate::{Error, Result};

/// An exact density in `[0, 1]`, kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DensityValue(BigRational);

impl DensityValue {
    pub fn new(num: i64, den: i64) -> Self {
        DensityValue(BigRational::new(num.into(), den.into()))
    }

    pub fn zero() -> Self {
        DensityValue(BigRational::zero())
    }

    pub fn from_ratio(r: BigRational) -> Self {
        DensityValue(r)
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering, display only.
    pub fn decimal(&self, places: usize) -> String {
        format!("{:.*}", places, self.to_f64())
    }
}

impl fmt::Display for DensityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl std::ops::Add for DensityValue {
    type Output = DensityValue;
    fn add(self, rhs: DensityValue) -> DensityValue {
        DensityValue(self.0 + rhs.0)
    }
}

/// `{"num": .., "den": ..}` as it appears in catalog files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRecord {
    pub num: i64,
    pub den: i64,
}

impl From<&DensityValue> for RationalRecord {
    fn from(d: &DensityValue) -> Self {
        RationalRecord {
            num: d.numer().to_i64().expect("catalog densities fit in i64"),
            den: d.denom().to_i64().expect("catalog densities fit in i64"),
        }
    }
}

impl From<&RationalRecord> for DensityValue {
    fn from(r: &RationalRecord) -> Self {
        DensityValue::new(r.num, r.den)
    }
}

/// Arguments of `μ_r`: a pair `(v, M)` with `M` any 2×2 matrix mod `ℓ^r`,
/// plus the index `m` of the group in `AGL₂(Z/ℓ^r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MuInput {
    pub v: RowVec,
    pub m: Mat2,
    pub modulus: Modulus,
    pub index: u128,
}

impl MuInput {
    pub fn new(v: RowVec, m: Mat2, modulus: Modulus, index: u128) -> Result<Self> {
        if modulus.level() == 0 {
            return Err(Error::Contract("μ_r needs r ≥ 1".into()));
        }
        let order = agl2_order(modulus.ell(), modulus.level());
        if index == 0 || order % index != 0 {
            return Err(Error::Contract(format!(
                "index {index} does not divide |AGL₂| = {order}"
            )));
        }
        let v = [modulus.reduce(v[0]), modulus.reduce(v[1])];
        Ok(MuInput {
            v,
            m: m.reduced(&modulus),
            modulus,
            index,
        })
    }
}

/// Terminal case reached by the `μ` dispatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MuCase {
    /// `v ∉ Row(M − I)`.
    NoFixedPoint,
    /// Reached `(0, I)`.
    Identity,
    /// `det(M − I)` nonzero at the terminal level.
    Regular,
    /// `det(M − I) ≡ 0` but `M ≢ I (mod ℓ)` at the terminal level.
    Degenerate,
}

/// Runs the dispatch (including the divide-by-ℓ recursion) on `(v, M)`.
pub fn mu_case(v: &RowVec, m: &Mat2, modulus: &Modulus) -> Result<MuCase> {
    if modulus.level() == 0 {
        return Err(Error::Contract("μ_r needs r ≥ 1".into()));
    }
    let ell = modulus.ell();
    let mut md = *modulus;
    let mut v = [md.reduce(v[0]), md.reduce(v[1])];
    let mut m = m.reduced(&md);
    loop {
        if v == [0, 0] && m.is_identity() {
            return Ok(MuCase::Identity);
        }
        let a = m.minus_identity(&md);
        if solve_row(&v, &a, &md).is_none() {
            return Ok(MuCase::NoFixedPoint);
        }
        if v.iter().all(|x| x % ell == 0) && a.is_zero_mod_ell(&md) {
            // Never reached at r = 1: there this is exactly (0, I).
            let next = Modulus::new(ell, md.level() - 1)?;
            v = [v[0] / ell, v[1] / ell];
            let a = Mat2::new(a.a / ell, a.b / ell, a.c / ell, a.d / ell);
            m = Mat2::new((a.a + 1) % next.n(), a.b, a.c, (a.d + 1) % next.n());
            md = next;
            continue;
        }
        return Ok(if det_mod(&a, &md) != 0 {
            MuCase::Regular
        } else {
            MuCase::Degenerate
        });
    }
}

/// Value of `μ_r` for a terminal case, with `m` the group index.
pub fn case_value(case: MuCase, ell: u64, level: u32, index: u128) -> BigRational {
    let ell_b = BigInt::from(ell);
    let m = BigInt::from(index);
    let pow = |e: u32| num_traits::pow(ell_b.clone(), e as usize);
    match case {
        MuCase::NoFixedPoint => BigRational::zero(),
        MuCase::Regular => BigRational::new(m, BigInt::from(agl2_order(ell, level))),
        MuCase::Degenerate => {
            let l1 = BigInt::from(ell - 1);
            let l2 = BigInt::from(ell + 1);
            BigRational::new(m, pow(6 * level - 4) * &l1 * &l1 * &l2 * &l2)
        }
        MuCase::Identity => {
            let num = BigInt::from((ell - 1) * ell + 1) * m;
            let den = BigInt::from(ell - 1) * pow(6 * level - 5) * (pow(6) - BigInt::one());
            BigRational::new(num, den)
        }
    }
}

/// `μ_r(v, M)`.
pub fn mu(input: &MuInput) -> Result<DensityValue> {
    let case = mu_case(&input.v, &input.m, &input.modulus)?;
    Ok(DensityValue(case_value(
        case,
        input.modulus.ell(),
        input.modulus.level(),
        input.index,
    )))
}

/// Per-case element counts; the density is a linear combination of them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CaseCounts {
    pub no_fixed_point: u64,
    pub identity: u64,
    pub regular: u64,
    pub degenerate: u64,
}

impl CaseCounts {
    fn add(&mut self, case: MuCase) {
        match case {
            MuCase::NoFixedPoint => self.no_fixed_point += 1,
            MuCase::Identity => self.identity += 1,
            MuCase::Regular => self.regular += 1,
            MuCase::Degenerate => self.degenerate += 1,
        }
    }

    fn merge(mut self, o: CaseCounts) -> CaseCounts {
        self.no_fixed_point += o.no_fixed_point;
        self.identity += o.identity;
        self.regular += o.regular;
        self.degenerate += o.degenerate;
        self
    }

    pub fn total(&self) -> u64 {
        self.no_fixed_point + self.identity + self.regular + self.degenerate
    }

    pub fn density(&self, ell: u64, level: u32, index: u128) -> DensityValue {
        let mut sum = BigRational::zero();
        for (case, n) in [
            (MuCase::Identity, self.identity),
            (MuCase::Regular, self.regular),
            (MuCase::Degenerate, self.degenerate),
        ] {
            if n > 0 {
                sum += case_value(case, ell, level, index) * BigRational::from_integer(n.into());
            }
        }
        DensityValue(sum)
    }
}

/// `𝓕` of an explicit element list, given the group's index in `AGL₂`.
pub fn density_of_elements<I>(elements: I, modulus: &Modulus, index: u128) -> Result<DensityValue>
where
    I: IntoIterator<Item = (RowVec, Mat2)>,
{
    let mut counts = CaseCounts::default();
    for (v, m) in elements {
        counts.add(mu_case(&v, &m, modulus)?);
    }
    Ok(counts.density(modulus.ell(), modulus.level(), index))
}

/// Case counts over all elements of `h`.
pub fn case_counts(h: &Subgroup) -> CaseCounts {
    use rayon::prelude::*;
    let modulus = h.modulus();
    let elements = h.element_vec();
    elements
        .par_chunks(1 << 14)
        .map(|chunk| {
            let mut c = CaseCounts::default();
            for p in chunk {
                let (v, m) = p.parts();
                c.add(mu_case(&v, &m, &modulus).expect("level ≥ 1"));
            }
            c
        })
        .reduce(CaseCounts::default, CaseCounts::merge)
}

/// `𝓕(H) = Σ_{g ∈ H} μ_r(g)` for a subgroup stored at level `r` (ℓ = 2).
pub fn density_exact(h: &Subgroup) -> DensityValue {
    case_counts(h).density(2, h.level(), h.index_in_agl())
}

/// How [`density_finite_level`] walks the lifts.
#[derive(Clone, Copy, Debug)]
pub enum LiftMode {
    /// Enumerate every lift; refuses more than [`MAX_EXHAUSTIVE_LIFT`] levels.
    Exhaustive,
    /// Draw `samples` (element, lift) pairs uniformly with a seeded RNG.
    Sampled { samples: u64, seed: u64 },
}

pub const MAX_EXHAUSTIVE_LIFT: u32 = 2;

/// Fraction of lifts to level `k` of elements of `h` that have a fixed point:
/// the finite-level version of the limit defining `𝓕(H)`.
pub fn density_finite_level(h: &Subgroup, k: u32, mode: LiftMode) -> Result<DensityValue> {
    let r = h.level();
    if k < r {
        return Err(Error::Contract(format!(
            "cannot lift level {r} group to level {k}"
        )));
    }
    let target = Modulus::new(2, k)?;
    let step = 1u64 << r;
    let span = 1u64 << (k - r);
    let lifts_per_entry = |x: u64, t: u64| x + step * t;
    let elements = h.element_vec();
    match mode {
        LiftMode::Exhaustive => {
            if k - r > MAX_EXHAUSTIVE_LIFT {
                return Err(Error::LiftBudget {
                    needed: k - r,
                    limit: MAX_EXHAUSTIVE_LIFT,
                });
            }
            let lift_count = span.pow(6);
            let mut hits: u64 = 0;
            for p in &elements {
                let (v, m) = p.parts();
                for code in 0..lift_count {
                    let t = |i: u32| (code / span.pow(i)) % span;
                    let lv = [lifts_per_entry(v[0], t(0)), lifts_per_entry(v[1], t(1))];
                    let lm = Mat2::new(
                        lifts_per_entry(m.a, t(2)),
                        lifts_per_entry(m.b, t(3)),
                        lifts_per_entry(m.c, t(4)),
                        lifts_per_entry(m.d, t(5)),
                    );
                    if solve_row(&lv, &lm.minus_identity(&target), &target).is_some() {
                        hits += 1;
                    }
                }
            }
            let total = elements.len() as u64 * lift_count;
            Ok(DensityValue(BigRational::new(hits.into(), total.into())))
        }
        LiftMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits: u64 = 0;
            for _ in 0..samples {
                let (v, m) = elements[rng.gen_range(0..elements.len())].parts();
                let mut t = || rng.gen_range(0..span);
                let lv = [lifts_per_entry(v[0], t()), lifts_per_entry(v[1], t())];
                let lm = Mat2::new(
                    lifts_per_entry(m.a, t()),
                    lifts_per_entry(m.b, t()),
                    lifts_per_entry(m.c, t()),
                    lifts_per_entry(m.d, t()),
                );
                if solve_row(&lv, &lm.minus_identity(&target), &target).is_some() {
                    hits += 1;
                }
            }
            Ok(DensityValue(BigRational::new(
                hits.into(),
                samples.max(1).into(),
            )))
        }
    }
}

/// Result of comparing `μ_r` with the sum of `μ_{r+1}` over its `ℓ⁶` lifts.
#[derive(Clone, Debug)]
pub struct UnfoldCheck {
    pub holds: bool,
    pub direct: DensityValue,
    pub unfolded: DensityValue,
}

/// Self-consistency of the dispatch: `μ_r(v, M) = Σ_lifts μ_{r+1}(ṽ, M̃)`.
pub fn mu_unfold_check(input: &MuInput) -> Result<UnfoldCheck> {
    let md = input.modulus;
    let ell = md.ell();
    let up = Modulus::new(ell, md.level() + 1)?;
    let index = input.index;
    if agl2_order(ell, up.level()) % index != 0 {
        return Err(Error::Contract(
            "index must divide |AGL₂| at both levels".into(),
        ));
    }
    let direct = mu(input)?;
    let step = md.n();
    let mut counts = CaseCounts::default();
    for code in 0..ell.pow(6) {
        let t = |i: u32| (code / ell.pow(i)) % ell;
        let v = [input.v[0] + step * t(0), input.v[1] + step * t(1)];
        let m = Mat2::new(
            input.m.a + step * t(2),
            input.m.b + step * t(3),
            input.m.c + step * t(4),
            input.m.d + step * t(5),
        );
        counts.add(mu_case(&v, &m, &up)?);
    }
    let unfolded = counts.density(ell, up.level(), index);
    Ok(UnfoldCheck {
        holds: direct == unfolded,
        direct,
        unfolded,
    })
}

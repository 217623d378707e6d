//! Conjugacy in `AGL₂(Z/2^k)`: invariant prefilters and conjugator search.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::packed::Packed;
use super::quotient::CharacterSpace;
use super::subgroup::{Ambient, AmbientKind, Subgroup};
use crate::Result;

/// Quantities preserved by conjugation in the full affine group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Invariants {
    pub order: u64,
    pub gl2_image_order: u64,
    /// `(element order, count)`, ascending.
    pub order_histogram: Vec<(u64, u64)>,
    /// Elements `(v, M)` with `v ∈ Row(M − I)`.
    pub fixed_point_count: u64,
    /// Rank of the abelianization mod 2, i.e. of the Frattini quotient.
    pub frattini_rank: usize,
}

impl Invariants {
    pub fn of(h: &Subgroup) -> Result<Invariants> {
        let ar = h.arith();
        let mut hist = BTreeMap::new();
        let mut fixed = 0;
        for x in h.elements() {
            *hist.entry(ar.element_order(x)).or_insert(0u64) += 1;
            if ar.has_fixed_point(x) {
                fixed += 1;
            }
        }
        Ok(Invariants {
            order: h.order(),
            gl2_image_order: h.gl2_image_order(),
            order_histogram: hist.into_iter().collect(),
            fixed_point_count: fixed,
            frattini_rank: CharacterSpace::new(h)?.rank(),
        })
    }

    /// SHA-256 of the canonical JSON encoding, as hex.
    pub fn canonical_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("invariants serialize");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Finds `g ∈ AGL₂(Z/2^k)` with `g H₁ g⁻¹ = H₂`.
///
/// Conjugators inside `Γ₀^☺(2)` are tried first, then the rest of the group.
pub fn conjugator(h1: &Subgroup, h2: &Subgroup) -> Option<Packed> {
    if h1.level() != h2.level() || h1.order() != h2.order() {
        return None;
    }
    let level = h1.level();
    let ar = *h1.arith();
    let gens = h1.generators();
    let test = |g: Packed| {
        let gi = ar.inv(g);
        gens.iter().all(|&x| h2.contains(ar.conj(g, gi, x)))
    };
    if test(Packed::IDENTITY) {
        return Some(Packed::IDENTITY);
    }
    let gamma0 = Ambient::new(AmbientKind::Gamma0, level).expect("level checked by subgroup");
    if let Some(g) = gamma0.elements().find(|&g| test(g)) {
        return Some(g);
    }
    let full = Ambient::new(AmbientKind::Full, level).expect("level checked by subgroup");
    let found = full
        .elements()
        .filter(|g| !g.in_gamma0())
        .find(|&g| test(g));
    found
}

/// Exact conjugacy decision with an invariant prefilter.
pub fn are_conjugate(h1: &Subgroup, h2: &Subgroup) -> Result<Option<Packed>> {
    if h1.level() != h2.level()
        || h1.order() != h2.order()
        || h1.gl2_image_order() != h2.gl2_image_order()
    {
        return Ok(None);
    }
    if Invariants::of(h1)? != Invariants::of(h2)? {
        return Ok(None);
    }
    Ok(conjugator(h1, h2))
}

/// `g H g⁻¹`.
pub fn conjugate(h: &Subgroup, g: Packed) -> Subgroup {
    let ar = h.arith();
    let gi = ar.inv(g);
    let ambient = if g.in_gamma0() {
        h.ambient()
    } else {
        Ambient::new(AmbientKind::Full, h.level()).expect("level")
    };
    let gens: Vec<Packed> = h.generators().iter().map(|&x| ar.conj(g, gi, x)).collect();
    if gens.iter().all(|x| h.ambient().contains(*x)) {
        return Subgroup::generated(h.ambient(), &gens);
    }
    Subgroup::generated(ambient, &gens)
}

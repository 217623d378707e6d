//! Subgroups stored as bit-sets over a perfect-hash index of an ambient group.

use std::fmt;

use fixedbitset::FixedBitSet;

use super::packed::{mask, Arith, Packed};
use crate::modmatrix::{agl2_order, AffineElement, Modulus};
use crate::{Error, Result};

/// Which group the element index enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AmbientKind {
    /// `Γ₀^☺(2)`: matrices with even lower-left entry, any translation.
    Gamma0,
    /// All of `AGL₂(Z/2^k)`.
    Full,
}

/// Index layout.
///
/// `Gamma0` uses `6k − 3` bits: `a>>1 | b<<(k−1) | (c>>1)<<(2k−1) | (d>>1)<<(3k−2)
/// | e<<(4k−3) | f<<(5k−3)`, dropping the low bits of `a, d` (always 1) and of
/// `c` (always 0). `Full` uses the raw `6k` bits `a | b<<k | … | f<<5k`;
/// indices of singular matrices are never set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ambient {
    kind: AmbientKind,
    arith: Arith,
}

impl Ambient {
    pub fn new(kind: AmbientKind, level: u32) -> Result<Self> {
        Ok(Ambient {
            kind,
            arith: Arith::new(level)?,
        })
    }

    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.arith.level()
    }

    pub fn arith(&self) -> &Arith {
        &self.arith
    }

    pub fn order(&self) -> u128 {
        match self.kind {
            AmbientKind::Gamma0 => 1 << (6 * self.level() - 3),
            AmbientKind::Full => agl2_order(2, self.level()),
        }
    }

    /// Number of index slots.
    pub fn slots(&self) -> usize {
        match self.kind {
            AmbientKind::Gamma0 => 1 << (6 * self.level() - 3),
            AmbientKind::Full => 1 << (6 * self.level()),
        }
    }

    pub fn contains(&self, x: Packed) -> bool {
        let k = self.level();
        let in_range = x.entries().iter().all(|&e| e <= mask(k));
        let invertible = x.det(k) & 1 == 1;
        in_range
            && invertible
            && match self.kind {
                AmbientKind::Gamma0 => x.in_gamma0(),
                AmbientKind::Full => true,
            }
    }

    #[inline]
    pub fn index(&self, x: Packed) -> usize {
        let k = self.level();
        let [a, b, c, d, e, f] = x.entries();
        let i = match self.kind {
            AmbientKind::Gamma0 => {
                a >> 1
                    | b << (k - 1)
                    | (c >> 1) << (2 * k - 1)
                    | (d >> 1) << (3 * k - 2)
                    | e << (4 * k - 3)
                    | f << (5 * k - 3)
            }
            AmbientKind::Full => {
                a | b << k | c << (2 * k) | d << (3 * k) | e << (4 * k) | f << (5 * k)
            }
        };
        i as usize
    }

    #[inline]
    pub fn element(&self, i: usize) -> Packed {
        let k = self.level();
        let m = mask(k);
        let i = i as u32;
        match self.kind {
            AmbientKind::Gamma0 => {
                let h = mask(k - 1);
                Packed::from_entries([
                    (i & h) << 1 | 1,
                    i >> (k - 1) & m,
                    (i >> (2 * k - 1) & h) << 1,
                    (i >> (3 * k - 2) & h) << 1 | 1,
                    i >> (4 * k - 3) & m,
                    i >> (5 * k - 3) & m,
                ])
            }
            AmbientKind::Full => {
                Packed::from_entries(std::array::from_fn(|j| i >> (k * j as u32) & m))
            }
        }
    }

    /// Every element of the ambient group, in index order.
    pub fn elements(&self) -> impl Iterator<Item = Packed> + '_ {
        (0..self.slots())
            .map(|i| self.element(i))
            .filter(|x| self.contains(*x))
    }

    /// Standard generators: all elementary translations and matrices.
    pub fn standard_generators(&self) -> Vec<Packed> {
        let mut gens = vec![
            Packed::from_entries([1, 0, 0, 1, 1, 0]),
            Packed::from_entries([1, 0, 0, 1, 0, 1]),
            Packed::from_entries([1, 1, 0, 1, 0, 0]),
            Packed::from_entries([1, 0, 2 & mask(self.level()), 1, 0, 0]),
            Packed::from_entries([mask(self.level()), 0, 0, 1, 0, 0]),
            Packed::from_entries([1, 0, 0, mask(self.level()), 0, 0]),
            Packed::from_entries([3 & mask(self.level()), 0, 0, 1, 0, 0]),
        ];
        if self.kind == AmbientKind::Full {
            gens.push(Packed::from_entries([0, 1, 1, 0, 0, 0]));
        }
        gens.retain(|g| !g.is_identity());
        gens.dedup();
        gens
    }
}

/// A subgroup of an ambient group, with its full element set.
#[derive(Clone)]
pub struct Subgroup {
    ambient: Ambient,
    generators: Vec<Packed>,
    elements: FixedBitSet,
    order: u64,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subgroup")
            .field("level", &self.level())
            .field("ambient", &self.ambient.kind)
            .field("order", &self.order)
            .field("generators", &self.generators)
            .finish()
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.elements == other.elements
    }
}

impl Eq for Subgroup {}

impl Subgroup {
    /// Closure of generators given as affine elements, inside `Γ₀^☺(2)`.
    pub fn closure(gens: &[AffineElement], level: u32) -> Result<Subgroup> {
        let ambient = Ambient::new(AmbientKind::Gamma0, level)?;
        let mut packed = Vec::with_capacity(gens.len());
        for g in gens {
            if g.level() != level {
                return Err(Error::Contract(format!(
                    "generator {g:?} is not at level {level}"
                )));
            }
            let p = Packed::from_affine(g)?;
            if !ambient.contains(p) {
                return Err(Error::OutsideAmbient(format!(
                    "{g:?} (lower-left entry is odd)"
                )));
            }
            packed.push(p);
        }
        Ok(Subgroup::generated(ambient, &packed))
    }

    /// Closure of packed generators; they must lie in the ambient group.
    pub fn generated(ambient: Ambient, gens: &[Packed]) -> Subgroup {
        let mut b = ClosureBuilder::new(ambient);
        for &g in gens {
            b.add_generator(g);
        }
        b.finish()
    }

    pub fn try_generated(ambient: Ambient, gens: &[Packed]) -> Result<Subgroup> {
        if let Some(g) = gens.iter().find(|g| !ambient.contains(**g)) {
            return Err(Error::OutsideAmbient(format!("{:?}", g.to_3x3())));
        }
        Ok(Subgroup::generated(ambient, gens))
    }

    /// The whole ambient group.
    pub fn ambient_group(ambient: Ambient) -> Subgroup {
        Subgroup::generated(ambient, &ambient.standard_generators())
    }

    /// `Γ₀^☺(2)` at level `k`.
    pub fn gamma0(level: u32) -> Result<Subgroup> {
        Ok(Subgroup::ambient_group(Ambient::new(
            AmbientKind::Gamma0,
            level,
        )?))
    }

    /// The translation subgroup `{(v, I)}`.
    pub fn translations(level: u32) -> Result<Subgroup> {
        let ambient = Ambient::new(AmbientKind::Gamma0, level)?;
        let gens = [
            Packed::from_entries([1, 0, 0, 1, 1, 0]),
            Packed::from_entries([1, 0, 0, 1, 0, 1]),
        ];
        Ok(Subgroup::generated(ambient, &gens))
    }

    /// Builds a subgroup from an element set known to be closed, choosing a
    /// small generating set greedily.
    pub fn from_closed_set(ambient: Ambient, elements: FixedBitSet) -> Subgroup {
        Subgroup::from_closed_set_with_hints(ambient, elements, &[])
    }

    /// As [`Subgroup::from_closed_set`], trying `hints` first as generators.
    pub fn from_closed_set_with_hints(
        ambient: Ambient,
        elements: FixedBitSet,
        hints: &[Packed],
    ) -> Subgroup {
        let s = greedy_generators(ambient, &elements, hints);
        debug_assert!(s.elements == elements, "element set was not closed");
        s
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn arith(&self) -> &Arith {
        self.ambient.arith()
    }

    pub fn level(&self) -> u32 {
        self.ambient.level()
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(2, self.level()).expect("level ≤ 4")
    }

    pub fn generators(&self) -> &[Packed] {
        &self.generators
    }

    pub fn affine_generators(&self) -> Vec<AffineElement> {
        self.generators
            .iter()
            .map(|g| g.to_affine(self.level()))
            .collect()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.elements
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn index_in_ambient(&self) -> u128 {
        self.ambient.order() / self.order as u128
    }

    /// `m = |AGL₂(Z/2^k) : H|`.
    pub fn index_in_agl(&self) -> u128 {
        agl2_order(2, self.level()) / self.order as u128
    }

    pub fn contains(&self, x: Packed) -> bool {
        self.ambient.contains(x) && self.elements.contains(self.ambient.index(x))
    }

    pub fn elements(&self) -> impl Iterator<Item = Packed> + '_ {
        self.elements.ones().map(|i| self.ambient.element(i))
    }

    pub fn element_vec(&self) -> Vec<Packed> {
        self.elements().collect()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        if self.ambient == other.ambient {
            return self.elements.is_subset(&other.elements);
        }
        self.elements().all(|x| other.contains(x))
    }

    /// Order of the image under `(v, M) ↦ M`.
    pub fn gl2_image_order(&self) -> u64 {
        let mut seen = FixedBitSet::with_capacity(1 << 16);
        for x in self.elements() {
            seen.insert(x.matrix_bits() as usize);
        }
        seen.count_ones(..) as u64
    }

    /// `{g ∈ H : reduction mod 2^j lies in …}`: the image under reduction to level `j`.
    pub fn reduce_to(&self, level: u32) -> Result<Subgroup> {
        if level > self.level() {
            return Err(Error::Contract(format!(
                "cannot reduce level {} to {level}",
                self.level()
            )));
        }
        let ambient = Ambient::new(self.ambient.kind, level)?;
        let mut bits = FixedBitSet::with_capacity(ambient.slots());
        for x in self.elements() {
            bits.insert(ambient.index(x.reduce(level)));
        }
        let hints: Vec<Packed> = self.generators.iter().map(|g| g.reduce(level)).collect();
        Ok(Subgroup::from_closed_set_with_hints(ambient, bits, &hints))
    }

    /// Full preimage under reduction from `level` (≥ own level).
    pub fn preimage(&self, level: u32) -> Result<Subgroup> {
        if level < self.level() {
            return Err(Error::Contract(format!(
                "cannot lift level {} to {level}",
                self.level()
            )));
        }
        let ambient = Ambient::new(self.ambient.kind, level)?;
        let mut gens = self.generators.clone();
        gens.extend(congruence_kernel_generators(self.level(), level));
        Ok(Subgroup::generated(ambient, &gens))
    }

    /// Subgroup from a membership predicate on the elements of `self`.
    pub fn filter<F: Fn(Packed) -> bool>(&self, pred: F) -> Result<Subgroup> {
        let mut bits = FixedBitSet::with_capacity(self.ambient.slots());
        for i in self.elements.ones() {
            if pred(self.ambient.element(i)) {
                bits.insert(i);
            }
        }
        let s = greedy_generators(self.ambient, &bits, &self.generators);
        if s.elements != bits {
            return Err(Error::Contract(
                "predicate does not cut out a subgroup".into(),
            ));
        }
        Ok(s)
    }
}

fn greedy_generators(ambient: Ambient, elements: &FixedBitSet, hints: &[Packed]) -> Subgroup {
    let target = elements.count_ones(..) as u64;
    let mut b = ClosureBuilder::new(ambient);
    for &h in hints {
        if b.order() >= target {
            break;
        }
        if elements.contains(ambient.index(h)) {
            b.add_generator(h);
        }
    }
    for i in elements.ones() {
        if b.order() >= target {
            break;
        }
        if !b.contains_index(i) {
            b.add_generator(ambient.element(i));
        }
    }
    b.finish()
}

/// Generators of `{(v, M) : v ≡ 0, M ≡ I mod 2^from}` at `level`.
pub fn congruence_kernel_generators(from: u32, level: u32) -> Vec<Packed> {
    if from >= level {
        return Vec::new();
    }
    let s = 1u32 << from;
    let m = mask(level);
    vec![
        Packed::from_entries([(1 + s) & m, 0, 0, 1, 0, 0]),
        Packed::from_entries([1, s & m, 0, 1, 0, 0]),
        Packed::from_entries([1, 0, s & m, 1, 0, 0]),
        Packed::from_entries([1, 0, 0, (1 + s) & m, 0, 0]),
        Packed::from_entries([1, 0, 0, 1, s & m, 0]),
        Packed::from_entries([1, 0, 0, 1, 0, s & m]),
    ]
}

/// Incremental closure under right multiplication by the generators.
pub struct ClosureBuilder {
    ambient: Ambient,
    gens: Vec<Packed>,
    set: FixedBitSet,
    list: Vec<Packed>,
}

impl ClosureBuilder {
    pub fn new(ambient: Ambient) -> Self {
        let mut set = FixedBitSet::with_capacity(ambient.slots());
        set.insert(ambient.index(Packed::IDENTITY));
        ClosureBuilder {
            ambient,
            gens: Vec::new(),
            set,
            list: vec![Packed::IDENTITY],
        }
    }

    pub fn order(&self) -> u64 {
        self.list.len() as u64
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.set.contains(i)
    }

    /// Adds `g`; returns false (and changes nothing) if `g` is already inside.
    pub fn add_generator(&mut self, g: Packed) -> bool {
        debug_assert!(self.ambient.contains(g));
        if self.set.contains(self.ambient.index(g)) {
            return false;
        }
        self.gens.push(g);
        let ar = *self.ambient.arith();
        let old = self.list.len();
        // Old elements are closed under the old generators; only `x·g` is new.
        for i in 0..old {
            let y = ar.mul(self.list[i], g);
            let j = self.ambient.index(y);
            if !self.set.put(j) {
                self.list.push(y);
            }
        }
        let mut next = old;
        while next < self.list.len() {
            let x = self.list[next];
            for &h in &self.gens {
                let y = ar.mul(x, h);
                let j = self.ambient.index(y);
                if !self.set.put(j) {
                    self.list.push(y);
                }
            }
            next += 1;
        }
        true
    }

    pub fn finish(self) -> Subgroup {
        let order = self.list.len() as u64;
        Subgroup {
            ambient: self.ambient,
            generators: self.gens,
            elements: self.set,
            order,
        }
    }
}

/// Outcome of the happy test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Happiness {
    Happy,
    /// The GL₂-image is smaller than `Γ₀(2)`.
    ImageTooSmall,
    /// Every element has `e ≡ f ≡ 0 (mod 2)`.
    AlphaHalvable,
    /// Every element has `e ≡ c/2`, `f ≡ (d − 1)/2 (mod 2)`.
    AlphaPlusTHalvable,
}

impl Happiness {
    pub fn is_happy(self) -> bool {
        self == Happiness::Happy
    }

    pub fn reason(self) -> &'static str {
        match self {
            Happiness::Happy => "happy",
            Happiness::ImageTooSmall => "im ρ too small",
            Happiness::AlphaHalvable => "α ∈ 2E(ℚ)",
            Happiness::AlphaPlusTHalvable => "α+T ∈ 2E(ℚ)",
        }
    }
}

impl fmt::Display for Happiness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.reason())
    }
}

/// A point `β` with `2β = α` or `2β = α + T`, up to the choice of basis.
///
/// `(v, M)` fixes the half indexed by `w` iff `v ≡ w(I − M) (mod 2)`. The
/// halves of `α` give the sets `{e ≡ f ≡ 0}` and `{e ≡ 0, f ≡ b}`; the halves
/// of `α + T` give `{e ≡ c/2, f ≡ (d − 1)/2}` and `{e ≡ c/2, f ≡ b + (d − 1)/2}`
/// (all mod 2). The second set of each pair is the first one conjugated by the
/// translation `(1, 0)`, so a subgroup avoids both exactly when every
/// conjugate avoids the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfPoint {
    Alpha,
    AlphaShifted,
    AlphaPlusT,
    AlphaPlusTShifted,
}

impl HalfPoint {
    pub const ALL: [HalfPoint; 4] = [
        HalfPoint::Alpha,
        HalfPoint::AlphaShifted,
        HalfPoint::AlphaPlusT,
        HalfPoint::AlphaPlusTShifted,
    ];

    /// Whether `x` fixes this half-point.
    #[inline]
    pub fn fixed_by(self, x: Packed) -> bool {
        let [_, b, c, d, e, f] = x.entries();
        let (e0, f0) = match self {
            HalfPoint::Alpha => (0, 0),
            HalfPoint::AlphaShifted => (0, b),
            HalfPoint::AlphaPlusT => (c >> 1, d.wrapping_sub(1) >> 1),
            HalfPoint::AlphaPlusTShifted => (c >> 1, b + (d.wrapping_sub(1) >> 1)),
        };
        (e ^ e0) & 1 == 0 && (f ^ f0) & 1 == 0
    }

    fn failure(self) -> Happiness {
        match self {
            HalfPoint::Alpha | HalfPoint::AlphaShifted => Happiness::AlphaHalvable,
            HalfPoint::AlphaPlusT | HalfPoint::AlphaPlusTShifted => Happiness::AlphaPlusTHalvable,
        }
    }
}

/// `|Γ₀(2)|` in `GL₂(Z/2^k)`.
pub fn gamma0_gl2_order(level: u32) -> u64 {
    1 << (4 * level - 3)
}

/// The happy predicate for a subgroup of `Γ₀^☺(2)`.
pub fn is_happy(h: &Subgroup) -> Result<Happiness> {
    if h.elements().any(|x| !x.in_gamma0()) {
        return Err(Error::OutsideAmbient(
            "happiness is only defined inside Γ₀^☺(2)".into(),
        ));
    }
    if h.gl2_image_order() != gamma0_gl2_order(h.level()) {
        return Ok(Happiness::ImageTooSmall);
    }
    for hp in HalfPoint::ALL {
        if h.elements().all(|x| hp.fixed_by(x)) {
            return Ok(hp.failure());
        }
    }
    Ok(Happiness::Happy)
}

/// `N₁ * N₂`: elements of `G` lying in both or in neither.
pub fn star(n1: &Subgroup, n2: &Subgroup, g: &Subgroup) -> Result<Subgroup> {
    if n1.ambient != g.ambient || n2.ambient != g.ambient {
        return Err(Error::Contract(
            "star needs subgroups of one ambient group".into(),
        ));
    }
    for n in [n1, n2] {
        if 2 * n.order != g.order || !n.elements.is_subset(&g.elements) {
            return Err(Error::NotIndexTwo);
        }
    }
    let mut bits = n1.elements.clone();
    bits.symmetric_difference_with(&n2.elements);
    bits.toggle_range(..);
    bits.intersect_with(&g.elements);
    let hints: Vec<Packed> = n1
        .generators
        .iter()
        .chain(&n2.generators)
        .copied()
        .collect();
    Ok(Subgroup::from_closed_set_with_hints(
        g.ambient, bits, &hints,
    ))
}

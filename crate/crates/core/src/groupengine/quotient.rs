//! Index-2 subgroups as kernels of characters `H → Z/2`.
//!
//! A character is fixed by its values `λ ∈ F₂ⁿ` on the generators. A BFS over
//! the Cayley graph labels each element with the parity vector of a word
//! reaching it; every non-tree edge gives a relation that `λ` must annihilate.
//! The admissible `λ` form a space of dimension `d = rank(H/Φ(H))`, and the
//! index-2 subgroups are exactly the `2^d − 1` nonzero kernels.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use super::packed::Packed;
use super::subgroup::{gamma0_gl2_order, ClosureBuilder, HalfPoint, Subgroup};
use crate::{Error, Result};

/// Characters of `H` with values in `Z/2`.
pub struct CharacterSpace {
    /// Parity label of each element, indexed by position in `order`.
    labels: Vec<u64>,
    /// Element list in BFS order.
    order: Vec<Packed>,
    /// Basis of admissible generator values.
    basis: Vec<u64>,
    /// Position in `order` by ambient index, `u32::MAX` outside `H`.
    pos: Vec<u32>,
    ambient: super::subgroup::Ambient,
}

impl CharacterSpace {
    pub fn new(h: &Subgroup) -> Result<CharacterSpace> {
        let gens = h.generators();
        if gens.len() > 64 {
            return Err(Error::Contract(
                "character labelling supports at most 64 generators".into(),
            ));
        }
        let ambient = h.ambient();
        let ar = *h.arith();
        let slots = ambient.slots();
        let mut pos = vec![u32::MAX; slots];
        let mut order = Vec::with_capacity(h.order() as usize);
        let mut labels = Vec::with_capacity(h.order() as usize);
        let mut relations = Echelon::default();
        pos[ambient.index(Packed::IDENTITY)] = 0;
        order.push(Packed::IDENTITY);
        labels.push(0u64);
        let mut next = 0;
        while next < order.len() {
            let (x, lx) = (order[next], labels[next]);
            for (i, &g) in gens.iter().enumerate() {
                let y = ar.mul(x, g);
                let ly = lx ^ (1 << i);
                let j = ambient.index(y);
                if pos[j] == u32::MAX {
                    pos[j] = order.len() as u32;
                    order.push(y);
                    labels.push(ly);
                } else {
                    relations.insert(ly ^ labels[pos[j] as usize]);
                }
            }
            next += 1;
        }
        let basis = relations.annihilator(gens.len());
        Ok(CharacterSpace {
            labels,
            order,
            basis,
            pos,
            ambient,
        })
    }

    /// `d`, the rank of the Frattini quotient.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Every nonzero character, as generator-value vectors.
    pub fn nonzero_characters(&self) -> Vec<u64> {
        (1u64..1 << self.rank())
            .map(|c| {
                self.basis
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| c >> i & 1 == 1)
                    .fold(0, |acc, (_, b)| acc ^ b)
            })
            .collect()
    }

    #[inline]
    fn value(lambda: u64, label: u64) -> bool {
        (lambda & label).count_ones() & 1 == 1
    }

    /// Value of character `lambda` at `x`, or `None` if `x ∉ H`.
    pub fn value_at(&self, lambda: u64, x: Packed) -> Option<bool> {
        if !self.ambient.contains(x) {
            return None;
        }
        let p = self.pos[self.ambient.index(x)];
        (p != u32::MAX).then(|| Self::value(lambda, self.labels[p as usize]))
    }

    pub fn elements(&self) -> &[Packed] {
        &self.order
    }

    /// Value of character `lambda` on each element, in [`Self::elements`] order.
    pub fn values(&self, lambda: u64) -> impl Iterator<Item = bool> + '_ {
        self.labels.iter().map(move |&l| Self::value(lambda, l))
    }

    /// The character whose kernel is `k`, if `k` has index 2 in `H`.
    pub fn character_of(&self, h: &Subgroup, k: &Subgroup) -> Option<u64> {
        let ambient = h.ambient();
        self.nonzero_characters().into_iter().find(|&lambda| {
            self.order
                .iter()
                .zip(&self.labels)
                .all(|(&x, &l)| Self::value(lambda, l) != k.bits().contains(ambient.index(x)))
        })
    }

    /// The character `x ↦ f(x)`, if `f` is a homomorphism to `Z/2` on `H`.
    pub fn character_from_fn<F: Fn(Packed) -> bool>(&self, h: &Subgroup, f: F) -> Option<u64> {
        let lambda = h
            .generators()
            .iter()
            .enumerate()
            .filter(|(_, g)| f(**g))
            .fold(0u64, |acc, (i, _)| acc | 1 << i);
        let consistent = self
            .order
            .iter()
            .zip(&self.labels)
            .all(|(&x, &l)| Self::value(lambda, l) == f(x));
        consistent.then_some(lambda)
    }

    /// Kernel of a character.
    pub fn kernel(&self, h: &Subgroup, lambda: u64) -> Subgroup {
        let ambient = h.ambient();
        let mut bits = FixedBitSet::with_capacity(ambient.slots());
        for (&x, &l) in self.order.iter().zip(&self.labels) {
            if !Self::value(lambda, l) {
                bits.insert(ambient.index(x));
            }
        }
        let hints = kernel_hints(h, lambda);
        Subgroup::from_closed_set_with_hints(ambient, bits, &hints)
    }

    /// Element set of the kernel of `lambda`, reduced to a lower level.
    pub fn reduced_kernel_bits(
        &self,
        lambda: u64,
        ambient: super::subgroup::Ambient,
    ) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(ambient.slots());
        for (&x, &l) in self.order.iter().zip(&self.labels) {
            if !Self::value(lambda, l) {
                bits.insert(ambient.index(x.reduce(ambient.level())));
            }
        }
        bits
    }

    /// Characters whose kernels are happy, assuming `H` itself has full
    /// GL₂-image. Each test runs on labels rather than element sets:
    /// the kernel keeps the full image iff some translation of `H` is outside
    /// it, and it moves a half-point iff some element moving it has
    /// character value 0.
    pub fn happy_characters(&self, h: &Subgroup) -> Vec<u64> {
        if h.gl2_image_order() != gamma0_gl2_order(h.level()) {
            return Vec::new();
        }
        let coords = |l: u64| -> u64 {
            self.basis
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | (Self::value(b, l) as u64) << i)
        };
        let mut translations = Vec::new();
        let mut escaping: [Vec<u64>; 4] = Default::default();
        for (&x, &l) in self.order.iter().zip(&self.labels) {
            if x.matrix_bits() == Packed::IDENTITY.matrix_bits() {
                translations.push(coords(l));
            }
            for (hp, list) in HalfPoint::ALL.iter().zip(escaping.iter_mut()) {
                if !hp.fixed_by(x) {
                    list.push(coords(l));
                }
            }
        }
        translations.sort_unstable();
        translations.dedup();
        for v in &mut escaping {
            v.sort_unstable();
            v.dedup();
        }
        let all = self.nonzero_characters();
        (1u64..1 << self.rank())
            .filter(|&c| {
                translations.iter().any(|&q| Self::value(c, q))
                    && escaping
                        .iter()
                        .all(|list| list.iter().any(|&q| !Self::value(c, q)))
            })
            .map(|c| all[c as usize - 1])
            .collect()
    }
}

/// Generator candidates for a kernel: generators with value 0, products and
/// squares of those with value 1, and conjugates.
fn kernel_hints(h: &Subgroup, lambda: u64) -> Vec<Packed> {
    let ar = h.arith();
    let gens = h.generators();
    let (zero, one): (Vec<(usize, &Packed)>, Vec<(usize, &Packed)>) = gens
        .iter()
        .enumerate()
        .partition(|(i, _)| lambda >> i & 1 == 0);
    let mut hints: Vec<Packed> = zero.iter().map(|(_, g)| **g).collect();
    if let Some((_, &pivot)) = one.first() {
        hints.push(ar.mul(pivot, pivot));
        for (_, &g) in one.iter().skip(1) {
            hints.push(ar.mul(pivot, g));
        }
        for (_, &g) in &zero {
            hints.push(ar.conj(pivot, ar.inv(pivot), g));
        }
    }
    hints
}

/// Row-echelon basis of a subspace of `F₂^64`.
#[derive(Default)]
struct Echelon {
    rows: Vec<u64>,
}

impl Echelon {
    fn insert(&mut self, mut v: u64) {
        for &r in &self.rows {
            v = v.min(v ^ r);
        }
        if v != 0 {
            self.rows.push(v);
            // keep rows sorted by leading bit, descending, for the min-reduction
            self.rows.sort_unstable_by(|a, b| b.cmp(a));
        }
    }

    /// Basis of `{λ ∈ F₂ⁿ : λ·r = 0 for every row r}`.
    fn annihilator(&self, n: usize) -> Vec<u64> {
        // Fully reduce to RREF keyed by leading bit.
        let mut rows = self.rows.clone();
        for i in 0..rows.len() {
            let lead = 63 - rows[i].leading_zeros();
            for j in 0..rows.len() {
                if j != i && rows[j] >> lead & 1 == 1 {
                    rows[j] ^= rows[i];
                }
            }
        }
        let pivots: Vec<u32> = rows.iter().map(|r| 63 - r.leading_zeros()).collect();
        (0..n as u32)
            .filter(|f| !pivots.contains(f))
            .map(|f| {
                let mut lambda = 1u64 << f;
                for (r, &p) in rows.iter().zip(&pivots) {
                    if r >> f & 1 == 1 {
                        lambda |= 1 << p;
                    }
                }
                lambda
            })
            .collect()
    }
}

/// All index-2 subgroups of `h`.
pub fn index2_subgroups(h: &Subgroup) -> Result<Vec<Subgroup>> {
    let space = CharacterSpace::new(h)?;
    Ok(space
        .nonzero_characters()
        .into_par_iter()
        .map(|l| space.kernel(h, l))
        .collect())
}

/// Happy index-2 subgroups of `h`.
pub fn happy_index2_subgroups(h: &Subgroup) -> Result<Vec<Subgroup>> {
    let space = CharacterSpace::new(h)?;
    Ok(space
        .happy_characters(h)
        .into_par_iter()
        .map(|l| space.kernel(h, l))
        .collect())
}

/// `Φ(H)`: normal closure of the squares and commutators of the generators.
pub fn frattini_subgroup(h: &Subgroup) -> Subgroup {
    let ar = h.arith();
    let gens = h.generators();
    let mut seeds: Vec<Packed> = gens.iter().map(|&g| ar.mul(g, g)).collect();
    for (i, &x) in gens.iter().enumerate() {
        for &y in &gens[i + 1..] {
            seeds.push(ar.commutator(x, y));
        }
    }
    let mut b = ClosureBuilder::new(h.ambient());
    let mut queue: Vec<Packed> = seeds;
    while let Some(s) = queue.pop() {
        if b.add_generator(s) {
            // Conjugates of a new generator by the generators of H.
            for &g in gens {
                queue.push(ar.conj(g, ar.inv(g), s));
                queue.push(ar.conj(ar.inv(g), g, s));
            }
        }
    }
    let phi = b.finish();
    // The closure of all conjugates of all current generators is normal once
    // every generator's conjugates are inside.
    debug_assert!(phi
        .generators()
        .iter()
        .all(|&s| gens.iter().all(|&g| phi.contains(ar.conj(g, ar.inv(g), s)))));
    phi
}

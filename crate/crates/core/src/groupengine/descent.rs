//! Breadth-first descent through happy index-2 subgroups of `Γ₀^☺(2)`.
//!
//! Happiness is inherited by overgroups, so every happy subgroup is reached
//! by a chain of happy maximal subgroups from the root and unhappy branches
//! can be dropped. At level 4 each class is seeded as the full preimage of a
//! level-3 class; a happy maximal subgroup containing the mod-8 congruence
//! kernel is then identified through its reduction, and anything else is
//! handled by the generic level-4 search.

use std::collections::BTreeSet;

use super::conjugacy::{conjugator, Invariants};
use super::packed::Packed;
use super::quotient::{happy_index2_subgroups, CharacterSpace};
use super::subgroup::{congruence_kernel_generators, Ambient, AmbientKind, Subgroup};
use crate::{Error, Result};

/// One conjugacy class of happy subgroups.
#[derive(Clone, Debug)]
pub struct ClassRecord {
    pub rep: Subgroup,
    invariants: Option<Invariants>,
    /// Classes with a representative among the happy maximal subgroups of `rep`.
    pub children: BTreeSet<usize>,
}

impl ClassRecord {
    fn new(rep: Subgroup) -> Self {
        ClassRecord {
            rep,
            invariants: None,
            children: BTreeSet::new(),
        }
    }

    pub fn invariants(&mut self) -> Result<&Invariants> {
        if self.invariants.is_none() {
            self.invariants = Some(Invariants::of(&self.rep)?);
        }
        Ok(self.invariants.as_ref().expect("just set"))
    }
}

/// Counters reported by the descent.
#[derive(Clone, Copy, Debug, Default)]
pub struct DescentStats {
    /// Happy maximal subgroups examined.
    pub candidates: u64,
    /// Conjugator searches run after the prefilter matched.
    pub conjugacy_searches: u64,
    /// Happy maximal subgroups at level 4 not containing the congruence kernel.
    pub kernel_misses: u64,
}

/// Happy classes found at one level, in discovery order (root first).
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub level: u32,
    pub classes: Vec<ClassRecord>,
    pub stats: DescentStats,
}

impl Enumeration {
    fn new(level: u32) -> Self {
        Enumeration {
            level,
            classes: Vec::new(),
            stats: DescentStats::default(),
        }
    }

    /// Class of `h`, if it is conjugate to a recorded representative.
    pub fn find(&mut self, h: &Subgroup) -> Result<Option<(usize, Packed)>> {
        let inv = Invariants::of(h)?;
        self.find_with(h, &inv)
    }

    fn find_with(&mut self, h: &Subgroup, inv: &Invariants) -> Result<Option<(usize, Packed)>> {
        for i in 0..self.classes.len() {
            if self.classes[i].rep.order() != h.order() {
                continue;
            }
            if self.classes[i].invariants()? != inv {
                continue;
            }
            self.stats.conjugacy_searches += 1;
            if let Some(g) = conjugator(h, &self.classes[i].rep) {
                return Ok(Some((i, g)));
            }
        }
        Ok(None)
    }

    fn find_or_insert(&mut self, h: Subgroup) -> Result<usize> {
        let inv = Invariants::of(&h)?;
        if let Some((i, _)) = self.find_with(&h, &inv)? {
            return Ok(i);
        }
        let mut rec = ClassRecord::new(h);
        rec.invariants = Some(inv);
        self.classes.push(rec);
        Ok(self.classes.len() - 1)
    }

    /// `(index in Γ₀^☺(2), number of classes)`, ascending.
    pub fn index_histogram(&self) -> Vec<(u128, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for c in &self.classes {
            *h.entry(c.rep.index_in_ambient()).or_insert(0) += 1;
        }
        h.into_iter().collect()
    }
}

/// All happy subgroups of `Γ₀^☺(2)` at level 3 or 4, up to conjugacy.
pub fn enumerate_happy(level: u32) -> Result<Enumeration> {
    match level {
        3 => enumerate_from_root(3),
        4 => enumerate_level4(&enumerate_from_root(3)?),
        _ => Err(Error::Contract(format!(
            "enumeration is supported at levels 3 and 4, not {level}"
        ))),
    }
}

/// Plain descent from the root; usable at any level, practical up to 3.
pub fn enumerate_from_root(level: u32) -> Result<Enumeration> {
    let mut e = Enumeration::new(level);
    e.find_or_insert(Subgroup::gamma0(level)?)?;
    process_queue(&mut e, 0)?;
    Ok(e)
}

fn process_queue(e: &mut Enumeration, start: usize) -> Result<()> {
    let mut next = start;
    while next < e.classes.len() {
        let kids = happy_index2_subgroups(&e.classes[next].rep)?;
        for k in kids {
            e.stats.candidates += 1;
            let j = e.find_or_insert(k)?;
            e.classes[next].children.insert(j);
        }
        next += 1;
    }
    Ok(())
}

/// Level-4 classes from the level-3 ones.
pub fn enumerate_level4(base: &Enumeration) -> Result<Enumeration> {
    if base.level != 3 {
        return Err(Error::Contract(
            "level-4 enumeration starts from the level-3 classes".into(),
        ));
    }
    let mut base = base.clone();
    let amb3 = Ambient::new(AmbientKind::Gamma0, 3)?;
    let kernel = congruence_kernel_generators(3, 4);
    let mut e = Enumeration::new(4);
    for c in &base.classes {
        e.classes.push(ClassRecord::new(c.rep.preimage(4)?));
    }
    let mut next = 0;
    while next < e.classes.len() {
        let rep = e.classes[next].rep.clone();
        let space = CharacterSpace::new(&rep)?;
        for lambda in space.happy_characters(&rep) {
            e.stats.candidates += 1;
            let contains_kernel = kernel
                .iter()
                .all(|&x| space.value_at(lambda, x) == Some(false));
            let j = if contains_kernel {
                let reduced =
                    Subgroup::from_closed_set(amb3, space.reduced_kernel_bits(lambda, amb3));
                let (j, _) = base.find(&reduced)?.ok_or_else(|| {
                    Error::Catalog(
                        "a happy level-3 subgroup is missing from the level-3 classes".into(),
                    )
                })?;
                j
            } else {
                e.stats.kernel_misses += 1;
                e.find_or_insert(space.kernel(&rep, lambda))?
            };
            e.classes[next].children.insert(j);
        }
        next += 1;
    }
    Ok(e)
}

//! The catalog of happy classes: row numbering, JSON persistence, DOT export.
//!
//! Rows 2–17 are built literally as `H₂ * M_d` from the explicit characters
//! below. Every deeper batch is a set of maximal subgroups of one literal
//! parent, cut out by characters `χ_Y + χ_m` for the row multipliers `m` and an
//! unknown batch character `χ_Y`; `χ_Y` is recovered by trying each happy
//! maximal subgroup as the anchor row and keeping the first choice under
//! which every row of the batch is happy, has the tabulated density, and has
//! the right number of children in the lattice.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::descent::{enumerate_from_root, enumerate_level4, Enumeration};
use super::packed::Packed;
use super::quotient::CharacterSpace;
use super::subgroup::{Ambient, AmbientKind, Subgroup};
use crate::classifier::table::{batch_rows, child_count, row_spec, Batch, Multiplier};
use crate::density::{density_exact, DensityValue, RationalRecord};
use crate::{Error, Result};

/// Layout note written into every catalog file.
pub const ENCODING_NOTE: &str = "generators are 3x3 matrices [a,b,0,c,d,0,e,f,1] row-major for (v,M) = ([e f],[a b; c d]); \
     internally packed as 4-bit fields a,b,c,d,e,f from the low end of a u32, indexed inside Gamma0(2)-preimage \
     by a>>1 | b<<(k-1) | (c>>1)<<(2k-1) | (d>>1)<<(3k-2) | e<<(4k-3) | f<<(5k-3)";

/// `e` odd: outside `H₂`.
pub fn chi_h2(x: Packed) -> bool {
    x.entries()[4] & 1 == 1
}

/// Character cutting out `M_m` for a product `m` of `−1, 2, b, a² − 4b`.
pub fn chi_multiplier(m: Multiplier, x: Packed) -> bool {
    let [a, b, c, d, ..] = x.entries();
    let det = (a * d + 256 - b * c) & 7;
    let mut v = false;
    if m.0 & Multiplier::NEG != 0 {
        v ^= det & 3 != 1;
    }
    if m.0 & Multiplier::TWO != 0 {
        v ^= det != 1 && det != 7;
    }
    if m.0 & Multiplier::B != 0 {
        v ^= c & 3 != 0;
    }
    if m.0 & Multiplier::DISC != 0 {
        v ^= b & 1 == 1;
    }
    v
}

/// How class ids were assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Numbering {
    /// Ids are the table rows 1–63.
    Rows,
    /// Row matching failed; ids follow (index, density, invariant hash).
    Canonical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExemplarRecord {
    pub a: i64,
    pub c: i64,
    pub k: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogClass {
    pub id: u32,
    pub order: u64,
    pub index: u64,
    pub generators: Vec<[i64; 9]>,
    pub parents: Vec<u32>,
    pub density: RationalRecord,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exemplar: Option<ExemplarRecord>,
}

impl CatalogClass {
    pub fn density_value(&self) -> DensityValue {
        DensityValue::from(&self.density)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupCatalog {
    pub level: u32,
    pub encoding: String,
    pub numbering: Numbering,
    pub classes: Vec<CatalogClass>,
}

impl SubgroupCatalog {
    /// Enumerates the happy classes at level 3 or 4 and numbers them.
    pub fn build(level: u32) -> Result<SubgroupCatalog> {
        let mut e3 = enumerate_from_root(3)?;
        let rows = assign_rows(&mut e3).ok();
        let e = match level {
            3 => e3,
            4 => enumerate_level4(&e3)?,
            _ => {
                return Err(Error::Contract(format!(
                    "catalogs exist for levels 3 and 4, not {level}"
                )))
            }
        };
        Self::from_enumeration(&e, rows.as_deref())
    }

    /// `rows[r − 1]` is the class index of row `r`, when known.
    pub fn from_enumeration(e: &Enumeration, rows: Option<&[usize]>) -> Result<SubgroupCatalog> {
        let n = e.classes.len();
        let densities: Vec<DensityValue> =
            e.classes.iter().map(|c| density_exact(&c.rep)).collect();
        let (ids, numbering) = match rows {
            Some(rows) if rows.len() == n => {
                let mut ids = vec![0u32; n];
                for (r, &j) in rows.iter().enumerate() {
                    ids[j] = r as u32 + 1;
                }
                (ids, Numbering::Rows)
            }
            _ => {
                let mut order: Vec<usize> = (0..n).collect();
                let keys: Vec<_> = e
                    .classes
                    .iter()
                    .map(|c| super::conjugacy::Invariants::of(&c.rep).map(|i| i.canonical_hash()))
                    .collect::<Result<_>>()?;
                order.sort_by(|&i, &j| {
                    (
                        e.classes[i].rep.index_in_ambient(),
                        &densities[i],
                        &keys[i],
                        i,
                    )
                        .cmp(&(
                            e.classes[j].rep.index_in_ambient(),
                            &densities[j],
                            &keys[j],
                            j,
                        ))
                });
                let mut ids = vec![0u32; n];
                for (pos, &i) in order.iter().enumerate() {
                    ids[i] = pos as u32 + 1;
                }
                (ids, Numbering::Canonical)
            }
        };
        let mut parents: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        for (i, c) in e.classes.iter().enumerate() {
            for &j in &c.children {
                parents[j].insert(ids[i]);
            }
        }
        let mut classes: Vec<CatalogClass> = (0..n)
            .map(|i| {
                let rep = &e.classes[i].rep;
                let exemplar = (numbering == Numbering::Rows)
                    .then(|| row_spec(ids[i] as u8))
                    .flatten()
                    .map(|r| ExemplarRecord {
                        a: r.exemplar.0,
                        c: r.exemplar.1,
                        k: r.exemplar.2,
                    });
                CatalogClass {
                    id: ids[i],
                    order: rep.order(),
                    index: rep.index_in_ambient() as u64,
                    generators: rep.generators().iter().map(|g| g.to_3x3()).collect(),
                    parents: parents[i].iter().copied().collect(),
                    density: RationalRecord::from(&densities[i]),
                    exemplar,
                }
            })
            .collect();
        classes.sort_by_key(|c| c.id);
        Ok(SubgroupCatalog {
            level: e.level,
            encoding: ENCODING_NOTE.to_string(),
            numbering,
            classes,
        })
    }

    pub fn class(&self, id: u32) -> Option<&CatalogClass> {
        self.classes.iter().find(|c| c.id == id)
    }

    /// Rebuilds the representative of class `id`.
    pub fn subgroup(&self, id: u32) -> Result<Subgroup> {
        let class = self
            .class(id)
            .ok_or_else(|| Error::Catalog(format!("no class with id {id}")))?;
        let gens = decode_generators(&class.generators)?;
        let h = Subgroup::try_generated(Ambient::new(AmbientKind::Gamma0, self.level)?, &gens)?;
        if h.order() != class.order {
            return Err(Error::Catalog(format!(
                "class {id}: generators give order {}, file says {}",
                h.order(),
                class.order
            )));
        }
        Ok(h)
    }

    /// `(parent id, child id)` edges.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = self
            .classes
            .iter()
            .flat_map(|c| c.parents.iter().map(move |&p| (p, c.id)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn children(&self, id: u32) -> Vec<u32> {
        self.edges()
            .into_iter()
            .filter(|&(p, _)| p == id)
            .map(|(_, c)| c)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<SubgroupCatalog> {
        let c: SubgroupCatalog = serde_json::from_str(s)?;
        let mut ids = BTreeSet::new();
        for class in &c.classes {
            if !ids.insert(class.id) {
                return Err(Error::Catalog(format!("duplicate class id {}", class.id)));
            }
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SubgroupCatalog> {
        SubgroupCatalog::from_json(&std::fs::read_to_string(path)?)
    }

    /// Lattice in Graphviz DOT, nodes labelled `id (density)`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph happy_subgroups {\n  rankdir=TB;\n");
        for c in &self.classes {
            let _ = writeln!(
                s,
                "  n{} [label=\"{} ({}/{})\"];",
                c.id, c.id, c.density.num, c.density.den
            );
        }
        for (p, c) in self.edges() {
            let _ = writeln!(s, "  n{p} -> n{c};");
        }
        s.push_str("}\n");
        s
    }

    /// `(index, number of classes)`.
    pub fn index_histogram(&self) -> BTreeMap<u64, usize> {
        let mut h = BTreeMap::new();
        for c in &self.classes {
            *h.entry(c.index).or_insert(0) += 1;
        }
        h
    }
}

pub fn decode_generators(gens: &[[i64; 9]]) -> Result<Vec<Packed>> {
    gens.iter()
        .map(|m| {
            let ok = m[2] == 0 && m[5] == 0 && m[8] == 1;
            let entries = [m[0], m[1], m[3], m[4], m[6], m[7]];
            if !ok || entries.iter().any(|&x| !(0..16).contains(&x)) {
                return Err(Error::Catalog(format!("malformed generator {m:?}")));
            }
            Ok(Packed::from_entries(entries.map(|x| x as u32)))
        })
        .collect()
}

const BATCHES: [Batch; 7] = [
    Batch::Base,
    Batch::AlphaPrime,
    Batch::AlphaPlusTRadical,
    Batch::AlphaPlusTPrime,
    Batch::DiscriminantRadical,
    Batch::IsogenousAlpha,
    Batch::IsogenousAlphaPlusT,
];

/// Literal subgroup for each row, from the batch characters.
pub fn literal_row_subgroups(root: &Subgroup) -> Result<BTreeMap<u8, Subgroup>> {
    let mut literal = BTreeMap::new();
    literal.insert(1u8, root.clone());
    for batch in BATCHES {
        let parent = batch.parent().expect("batches below the root");
        let p = literal
            .get(&parent)
            .cloned()
            .ok_or_else(|| Error::Catalog(format!("row {parent} not built")))?;
        let rows: Vec<_> = batch_rows(batch).collect();
        let space = CharacterSpace::new(&p)?;
        let happy: BTreeSet<u64> = space.happy_characters(&p).into_iter().collect();
        let chi = |m: Multiplier| {
            space
                .character_from_fn(&p, |x| chi_multiplier(m, x))
                .ok_or_else(|| {
                    Error::Catalog(format!(
                        "multiplier character {m:?} is not a character of row {parent}"
                    ))
                })
        };
        let chis: Vec<u64> = rows
            .iter()
            .map(|r| chi(r.multiplier))
            .collect::<Result<_>>()?;
        let candidates: Vec<u64> = if batch == Batch::Base {
            vec![space
                .character_from_fn(&p, chi_h2)
                .ok_or_else(|| Error::Catalog("e mod 2 is not a character".into()))?]
        } else {
            let want = DensityValue::new(rows[0].density.0, rows[0].density.1);
            happy
                .iter()
                .filter(|&&l| density_exact(&space.kernel(&p, l)) == want)
                .map(|&l| l ^ chis[0])
                .collect()
        };
        let mut chosen = None;
        'anchor: for y in candidates {
            let mut kernels = Vec::new();
            for (r, &c) in rows.iter().zip(&chis) {
                let lambda = y ^ c;
                if !happy.contains(&lambda) {
                    continue 'anchor;
                }
                let k = space.kernel(&p, lambda);
                if density_exact(&k) != DensityValue::new(r.density.0, r.density.1) {
                    continue 'anchor;
                }
                if (child_count(r.id) > 0) != (space_children(&k)? > 0) {
                    continue 'anchor;
                }
                kernels.push((r.id, k));
            }
            chosen = Some(kernels);
            break;
        }
        let kernels = chosen.ok_or_else(|| {
            Error::Catalog(format!(
                "no consistent numbering for the batch below {parent}"
            ))
        })?;
        literal.extend(kernels);
    }
    Ok(literal)
}

fn space_children(k: &Subgroup) -> Result<usize> {
    Ok(CharacterSpace::new(k)?.happy_characters(k).len())
}

/// Class index for each row `1..=63`, checked against the descent lattice.
pub fn assign_rows(e: &mut Enumeration) -> Result<Vec<usize>> {
    if e.level != 3 {
        return Err(Error::Contract(
            "rows are assigned on the level-3 classes".into(),
        ));
    }
    let root = e.classes[0].rep.clone();
    let literal = literal_row_subgroups(&root)?;
    let mut rows = Vec::with_capacity(literal.len());
    let mut used = BTreeSet::new();
    for (&id, k) in &literal {
        let (j, _) = e
            .find(k)?
            .ok_or_else(|| Error::Catalog(format!("row {id} matches no class")))?;
        if !used.insert(j) {
            return Err(Error::Catalog(format!("row {id} repeats a class")));
        }
        if e.classes[j].children.len() != child_count(id) {
            return Err(Error::Catalog(format!(
                "row {id} has the wrong number of children"
            )));
        }
        rows.push(j);
    }
    for (&id, _) in &literal {
        if let Some(p) = row_spec(id).and_then(|r| r.parent()) {
            let (pj, j) = (rows[p as usize - 1], rows[id as usize - 1]);
            if !e.classes[pj].children.contains(&j) {
                return Err(Error::Catalog(format!(
                    "row {id} is not below row {p} in the lattice"
                )));
            }
        }
    }
    if rows.len() != e.classes.len() {
        return Err(Error::Catalog(format!(
            "{} rows for {} classes",
            rows.len(),
            e.classes.len()
        )));
    }
    Ok(rows)
}

//! Decides which of the 63 image classes a curve `[a, c, k]` falls into.
//!
//! Each row below the root is "`m · Y` is a nonzero square", where `Y` is a
//! batch quantity that may involve square roots `s` and `d` (see
//! [`table::Batch`]). Every sign choice is tried, and a row holds when some
//! choice works. The image is the unique satisfied row lying below every
//! other satisfied row in the subgroup lattice.

pub mod square;
pub mod table;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::density::DensityValue;
use crate::ecurve::CurveParams;
use crate::groupengine::{Numbering, SubgroupCatalog};
use crate::{Error, Result};
use square::{rational_sqrt, squarefree_part, SquareClass};
use table::{Batch, RowSpec, ROWS};

/// Containment between rows, up to conjugacy.
#[derive(Clone, Debug)]
pub struct Lattice {
    /// Strict ancestors of each row.
    ancestors: BTreeMap<u8, BTreeSet<u8>>,
}

impl Lattice {
    /// From a catalog numbered by rows.
    pub fn from_catalog(catalog: &SubgroupCatalog) -> Result<Lattice> {
        if catalog.numbering != Numbering::Rows || catalog.classes.len() != ROWS.len() {
            return Err(Error::Catalog(
                "classification needs a catalog numbered by the 63 rows".into(),
            ));
        }
        let parents: BTreeMap<u8, Vec<u8>> = catalog
            .classes
            .iter()
            .map(|c| (c.id as u8, c.parents.iter().map(|&p| p as u8).collect()))
            .collect();
        let mut ancestors = BTreeMap::new();
        for &id in parents.keys() {
            let mut seen = BTreeSet::new();
            let mut stack = parents[&id].clone();
            while let Some(p) = stack.pop() {
                if seen.insert(p) {
                    stack.extend(parents.get(&p).into_iter().flatten());
                }
            }
            ancestors.insert(id, seen);
        }
        Ok(Lattice { ancestors })
    }

    /// The level-3 lattice, enumerated once per process.
    pub fn standard() -> Result<&'static Lattice> {
        static CELL: OnceLock<std::result::Result<Lattice, String>> = OnceLock::new();
        CELL.get_or_init(|| {
            SubgroupCatalog::build(3)
                .and_then(|c| Lattice::from_catalog(&c))
                .map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| Error::Catalog(e.clone()))
    }

    pub fn ancestors(&self, id: u8) -> &BTreeSet<u8> {
        static EMPTY: BTreeSet<u8> = BTreeSet::new();
        self.ancestors.get(&id).unwrap_or(&EMPTY)
    }

    /// `lower ⊆ upper` up to conjugacy.
    pub fn is_below(&self, lower: u8, upper: u8) -> bool {
        lower == upper || self.ancestors(lower).contains(&upper)
    }
}

/// The square roots behind a satisfied row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_q")]
    pub s: Option<BigRational>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_q")]
    pub d: Option<BigRational>,
    /// `√(m · Y)`, nonnegative.
    #[serde(serialize_with = "ser_q")]
    pub root: BigRational,
}

fn ser_q<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_opt_q<S: serde::Serializer>(
    q: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser_q(q.as_ref().expect("skipped when absent"), s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub row: u8,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationResult {
    pub satisfied_rows: BTreeSet<u8>,
    pub minimal_row: u8,
    pub certificates: BTreeMap<u8, Certificate>,
    /// Rows whose element vanished for every admissible choice.
    pub indeterminate_rows: BTreeSet<u8>,
    pub warnings: Vec<Warning>,
}

/// `{−1, 2, b, a² − 4b, c}` are independent modulo squares, so the image is
/// the whole root class.
pub fn genericity_check(curve: &CurveParams) -> Result<bool> {
    let elems = [
        BigInt::from(-1),
        BigInt::from(2),
        curve.b().clone(),
        curve.disc(),
        BigInt::from(curve.c),
    ];
    let mut primes: BTreeSet<BigInt> = BTreeSet::new();
    let mut classes = Vec::new();
    for e in &elems {
        let SquareClass::Class(r) = squarefree_part(&BigRational::from_integer(e.clone()))? else {
            return Ok(false);
        };
        let fs = square::factor(&r, square::DEFAULT_FACTOR_BUDGET)?;
        primes.extend(fs.iter().map(|(p, _)| p.clone()));
        classes.push((
            r.is_negative(),
            fs.into_iter().map(|(p, _)| p).collect::<BTreeSet<_>>(),
        ));
    }
    let index: BTreeMap<&BigInt, usize> =
        primes.iter().enumerate().map(|(i, p)| (p, i + 1)).collect();
    let vectors: Vec<Vec<bool>> = classes
        .iter()
        .map(|(neg, ps)| {
            let mut v = vec![false; primes.len() + 1];
            v[0] = *neg;
            for p in ps {
                v[index[p]] = true;
            }
            v
        })
        .collect();
    Ok(gf2_rank(vectors) == elems.len())
}

fn gf2_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let mut rank = 0;
    let width = rows.first().map_or(0, Vec::len);
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] {
                let pr = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(pr) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// One admissible choice of radicals and the batch quantity it gives.
struct Choice {
    s: Option<BigRational>,
    d: Option<BigRational>,
    y: BigRational,
}

fn int(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

/// Both square roots of `q`, or none.
fn roots(q: &BigRational) -> Vec<BigRational> {
    match rational_sqrt(q) {
        Some(r) if r.is_zero() => vec![r],
        Some(r) => vec![r.clone(), -r],
        None => Vec::new(),
    }
}

fn batch_choices(curve: &CurveParams, batch: Batch) -> Vec<Choice> {
    let (a, c, k) = (int(curve.a), int(curve.c), int(curve.k));
    let b = int(curve.b().clone());
    let disc = int(curve.disc());
    let xt = int(curve.x_alpha_plus_t());
    let two = int(2);
    let mut out = Vec::new();
    match batch {
        Batch::Root => {}
        Batch::Base => out.push(Choice {
            s: None,
            d: None,
            y: c.clone(),
        }),
        Batch::AlphaPrime => {
            for s in roots(&c) {
                let y = &a + &two * &s * &s + &two * &s * &k;
                out.push(Choice {
                    s: Some(s),
                    d: None,
                    y,
                });
            }
        }
        Batch::AlphaPlusTRadical => {
            for d in roots(&(-&disc * &xt)) {
                let y = &d * (&d + &two * &a * &k + &two * &c * &k - &two * &k * &k * &k);
                out.push(Choice {
                    s: None,
                    d: Some(d),
                    y,
                });
            }
        }
        Batch::AlphaPlusTPrime => {
            for u in roots(&xt) {
                let y = &a + &two * &u * &u - &two * &u * &k;
                out.push(Choice {
                    s: Some(u),
                    d: None,
                    y,
                });
            }
        }
        Batch::DiscriminantRadical => {
            for d in roots(&(-&c * &disc)) {
                let y = &c * &d * (&d + &two * &c * &k);
                out.push(Choice {
                    s: None,
                    d: Some(d),
                    y,
                });
            }
        }
        Batch::IsogenousAlpha => {
            for s in roots(&c) {
                let q = -(&b / &c) * (&a + &two * &s * &s - &two * &s * &k);
                for d in roots(&q) {
                    let y = &d + &xt;
                    out.push(Choice {
                        s: Some(s.clone()),
                        d: Some(d),
                        y,
                    });
                }
            }
        }
        Batch::IsogenousAlphaPlusT => {
            for s in roots(&xt) {
                let q = (&a + &s * &s - &k * &k) * (&a + &two * &s * &s - &two * &s * &k);
                for d in roots(&q) {
                    let y = &d + &c;
                    out.push(Choice {
                        s: Some(s.clone()),
                        d: Some(d),
                        y,
                    });
                }
            }
        }
    }
    out
}

enum RowStatus {
    Satisfied(Certificate),
    Unsatisfied,
    /// Some choice gave a zero element and none gave a nonzero square.
    Indeterminate,
}

fn evaluate_row(row: &RowSpec, choices: &[Choice], b: &BigInt, disc: &BigInt) -> RowStatus {
    if row.batch == Batch::Root {
        return RowStatus::Satisfied(Certificate {
            s: None,
            d: None,
            root: int(1),
        });
    }
    let m = int(row.multiplier.value(b, disc));
    let mut saw_zero = false;
    for ch in choices {
        let e = &m * &ch.y;
        if e.is_zero() {
            saw_zero = true;
            continue;
        }
        if let Some(root) = rational_sqrt(&e) {
            return RowStatus::Satisfied(Certificate {
                s: ch.s.clone(),
                d: ch.d.clone(),
                root,
            });
        }
    }
    if saw_zero {
        RowStatus::Indeterminate
    } else {
        RowStatus::Unsatisfied
    }
}

/// Every row condition, and the minimal satisfied row in `lattice`.
pub fn classify_with(curve: &CurveParams, lattice: &Lattice) -> Result<ClassificationResult> {
    if curve.has_full_two_torsion() {
        return Err(Error::Hypothesis(
            "extra 2-torsion: a² − 4b is a square".into(),
        ));
    }
    let (b, disc) = (curve.b().clone(), curve.disc());
    let mut choices: BTreeMap<u8, Vec<Choice>> = BTreeMap::new();
    let mut satisfied = BTreeSet::new();
    let mut indeterminate = BTreeSet::new();
    let mut certificates = BTreeMap::new();
    let mut warnings = Vec::new();
    for row in &ROWS {
        let key = row.batch.parent().unwrap_or(0);
        let ch = choices
            .entry(key)
            .or_insert_with(|| batch_choices(curve, row.batch));
        match evaluate_row(row, ch, &b, &disc) {
            RowStatus::Satisfied(cert) => {
                satisfied.insert(row.id);
                certificates.insert(row.id, cert);
            }
            RowStatus::Unsatisfied => {}
            RowStatus::Indeterminate => {
                indeterminate.insert(row.id);
                warnings.push(Warning {
                    row: row.id,
                    message: "element vanished; the condition is not established".into(),
                });
            }
        }
    }
    let minima: Vec<u8> = satisfied
        .iter()
        .copied()
        .filter(|&r| satisfied.iter().all(|&o| lattice.is_below(r, o)))
        .collect();
    let minimal_row = match minima.as_slice() {
        [r] => *r,
        _ => {
            return Err(Error::Hypothesis(format!(
                "image not among the 63 classes (im ρ too small or α imprimitive): satisfied rows {satisfied:?} have no unique minimum"
            )))
        }
    };
    Ok(ClassificationResult {
        satisfied_rows: satisfied,
        minimal_row,
        certificates,
        indeterminate_rows: indeterminate,
        warnings,
    })
}

/// [`classify_with`] against the standard lattice.
pub fn classify(curve: &CurveParams) -> Result<ClassificationResult> {
    classify_with(curve, Lattice::standard()?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub row: u8,
    #[serde(serialize_with = "ser_density")]
    pub density: DensityValue,
    /// The input is the stored exemplar of its row.
    pub is_exemplar: bool,
    pub result: ClassificationResult,
}

fn ser_density<S: serde::Serializer>(
    d: &DensityValue,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_string())
}

/// Classifies `curve` and looks its row up in `catalog`.
pub fn classify_report(curve: &CurveParams, catalog: &SubgroupCatalog) -> Result<ClassifyReport> {
    let lattice = Lattice::from_catalog(catalog)?;
    let result = classify_with(curve, &lattice)?;
    let row = result.minimal_row;
    let class = catalog
        .class(u32::from(row))
        .ok_or_else(|| Error::Catalog(format!("row {row} missing")))?;
    let is_exemplar = class
        .exemplar
        .is_some_and(|e| (e.a, e.c, e.k) == (curve.a, curve.c, curve.k));
    Ok(ClassifyReport {
        row,
        density: class.density_value(),
        is_exemplar,
        result,
    })
}

//! The 63 image rows: lattice parent, square-class multiplier, exemplar curve
//! and exact density.
//!
//! Within a batch every row's condition is "`m · Y` is a nonzero square" for a
//! batch-wide quantity `Y` and a row multiplier `m ∈ ⟨−1, 2, b, a² − 4b⟩`.

use serde::{Deserialize, Serialize};

/// A product of a subset of `{−1, 2, b, a² − 4b}`, as a bit mask
/// (bit 0: −1, bit 1: 2, bit 2: b, bit 3: a² − 4b).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiplier(pub u8);

impl Multiplier {
    pub const ONE: Multiplier = Multiplier(0);
    pub const NEG: u8 = 1;
    pub const TWO: u8 = 2;
    pub const B: u8 = 4;
    pub const DISC: u8 = 8;

    pub fn times(self, other: Multiplier) -> Multiplier {
        Multiplier(self.0 ^ other.0)
    }

    /// Value for a curve with the given `b` and `a² − 4b`.
    pub fn value(self, b: &num_bigint::BigInt, disc: &num_bigint::BigInt) -> num_bigint::BigInt {
        let mut v = num_bigint::BigInt::from(1);
        if self.0 & Self::NEG != 0 {
            v = -v;
        }
        if self.0 & Self::TWO != 0 {
            v *= 2;
        }
        if self.0 & Self::B != 0 {
            v *= b;
        }
        if self.0 & Self::DISC != 0 {
            v *= disc;
        }
        v
    }
}

/// Which quantity `Y` a row's condition multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Batch {
    /// Row 1, no condition.
    Root,
    /// Rows 2–17: `Y = c`.
    Base,
    /// Rows 18–24 (below 2): `c = s²`, `Y = x(α′) = a + 2s² + 2sk`.
    AlphaPrime,
    /// Rows 25–32 (below 7): `d² = −(a² − 4b)(k² − a − c)`,
    /// `Y = d(d + 2ak + 2ck − 2k³)`.
    AlphaPlusTRadical,
    /// Rows 33–39 (below 10): `u² = k² − a − c`, `Y = x(α′) = a + 2u² − 2uk`.
    AlphaPlusTPrime,
    /// Rows 40–47 (below 15): `d² = −c(a² − 4b)`, `Y = c·d(d + 2ck)`.
    DiscriminantRadical,
    /// Rows 48–55 (below 20): `c = s²`, `d² = −(b/c)(a + 2s² − 2sk)`,
    /// `Y = d + x(α + T)`.
    IsogenousAlpha,
    /// Rows 56–63 (below 35): `s² = k² − a − c`,
    /// `d² = (a + s² − k²)(a + 2s² − 2sk)`, `Y = d + c`.
    IsogenousAlphaPlusT,
}

impl Batch {
    /// The row whose maximal subgroups make up the batch.
    pub fn parent(self) -> Option<u8> {
        match self {
            Batch::Root => None,
            Batch::Base => Some(1),
            Batch::AlphaPrime => Some(2),
            Batch::AlphaPlusTRadical => Some(7),
            Batch::AlphaPlusTPrime => Some(10),
            Batch::DiscriminantRadical => Some(15),
            Batch::IsogenousAlpha => Some(20),
            Batch::IsogenousAlphaPlusT => Some(35),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowSpec {
    pub id: u8,
    pub batch: Batch,
    pub multiplier: Multiplier,
    /// `(a, c, k)` of a curve whose image is this row.
    pub exemplar: (i64, i64, i64),
    /// Exact density as `(numerator, denominator)`.
    pub density: (i64, i64),
}

impl RowSpec {
    pub fn parent(&self) -> Option<u8> {
        self.batch.parent()
    }
}

const N: u8 = Multiplier::NEG;
const T: u8 = Multiplier::TWO;
const B: u8 = Multiplier::B;
const D: u8 = Multiplier::DISC;

const fn row(
    id: u8,
    batch: Batch,
    m: u8,
    exemplar: (i64, i64, i64),
    density: (i64, i64),
) -> RowSpec {
    RowSpec {
        id,
        batch,
        multiplier: Multiplier(m),
        exemplar,
        density,
    }
}

use Batch::*;

pub const ROWS: [RowSpec; 63] = [
    row(1, Root, 0, (3, 3, 1), (5, 21)),
    row(2, Base, 0, (-3, 1, 3), (10, 21)),
    row(3, Base, N | T | B | D, (14, 15, 6), (5123, 21504)),
    row(4, Base, N | T | B, (3, 3, 2), (5123, 21504)),
    row(5, Base, T | B | D, (6, -5, 2), (5123, 21504)),
    row(6, Base, T | B, (2, -3, 1), (5123, 21504)),
    row(7, Base, N | B | D, (-5, 11, 1), (83, 336)),
    row(8, Base, N | B, (2, 3, 1), (83, 336)),
    row(9, Base, B | D, (10, -11, 2), (13, 42)),
    row(10, Base, B, (2, -5, 1), (1, 7)),
    row(11, Base, N | T | D, (14, 7, 6), (5123, 21504)),
    row(12, Base, N | T, (1, -2, 2), (5123, 21504)),
    row(13, Base, T | D, (6, 3, 2), (5123, 21504)),
    row(14, Base, T, (2, 2, 1), (5123, 21504)),
    row(15, Base, N | D, (-5, -5, 1), (83, 336)),
    row(16, Base, N, (-1, -1, 1), (83, 336)),
    row(17, Base, D, (10, 5, 2), (1, 7)),
    row(18, AlphaPrime, N | T | B, (7, 16, 3), (5123, 10752)),
    row(19, AlphaPrime, T | B, (-3, 1, 2), (5123, 10752)),
    row(20, AlphaPrime, N | B, (28, 36, 1), (83, 168)),
    row(21, AlphaPrime, B, (-5, 1, 4), (19, 42)),
    row(22, AlphaPrime, N | T, (2, 1, 3), (5123, 10752)),
    row(23, AlphaPrime, T, (-4, 1, 2), (5123, 10752)),
    row(24, AlphaPrime, N, (3, 1, 3), (83, 168)),
    row(25, AlphaPlusTRadical, T, (-6, 13, 2), (2659, 10752)),
    row(26, AlphaPlusTRadical, N, (6, 7, 4), (89, 336)),
    row(27, AlphaPlusTRadical, N | T, (10, 21, 6), (2659, 10752)),
    row(28, AlphaPlusTRadical, 0, (28, -12, 3), (25, 112)),
    row(29, AlphaPlusTRadical, T | B, (15, 6, 6), (2659, 10752)),
    row(30, AlphaPlusTRadical, N | B, (-210, 375, 9), (25, 112)),
    row(
        31,
        AlphaPlusTRadical,
        N | T | B,
        (30, 10, 10),
        (2659, 10752),
    ),
    row(32, AlphaPlusTRadical, B, (-55, 125, 9), (89, 336)),
    row(33, AlphaPlusTPrime, N | T | B, (-7, -14, 2), (513, 3584)),
    row(34, AlphaPlusTPrime, T | B, (-3, 6, 2), (513, 3584)),
    row(35, AlphaPlusTPrime, N | B, (-40, 45, 3), (5, 42)),
    row(36, AlphaPlusTPrime, B, (10, 10, 6), (5, 42)),
    row(37, AlphaPlusTPrime, N | T, (2, 3, 3), (513, 3584)),
    row(38, AlphaPlusTPrime, T, (-2, 7, 3), (513, 3584)),
    row(39, AlphaPlusTPrime, N, (2, 5, 4), (5, 42)),
    row(40, DiscriminantRadical, T | B, (-45, 60, 5), (2659, 10752)),
    row(41, DiscriminantRadical, B, (-210, -21, 12), (89, 336)),
    row(
        42,
        DiscriminantRadical,
        N | T | B,
        (15, 15, 6),
        (2659, 10752),
    ),
    row(43, DiscriminantRadical, N | B, (-55, 11, -9), (89, 336)),
    row(44, DiscriminantRadical, T, (10, 5, 6), (2659, 10752)),
    row(45, DiscriminantRadical, 0, (6, 3, 4), (25, 112)),
    row(46, DiscriminantRadical, N | T, (-6, -3, 2), (2659, 10752)),
    row(47, DiscriminantRadical, N, (-14, -7, 6), (25, 112)),
    row(48, IsogenousAlpha, T | D, (60, 36, 9), (2659, 5376)),
    row(49, IsogenousAlpha, B | D, (30, 121, 1), (89, 168)),
    row(50, IsogenousAlpha, N | T | D, (90, 16, 16), (2659, 5376)),
    row(51, IsogenousAlpha, N | B | D, (210, 81, 21), (41, 84)),
    row(52, IsogenousAlpha, N | T | B, (15, 9, 2), (2659, 5376)),
    row(53, IsogenousAlpha, N, (-12, 16, 1), (41, 84)),
    row(54, IsogenousAlpha, T | B, (3, 1, 4), (2659, 5376)),
    row(55, IsogenousAlpha, 0, (-7, 16, 11), (25, 56)),
    row(56, IsogenousAlphaPlusT, 0, (7, 112, 12), (5, 21)),
    row(57, IsogenousAlphaPlusT, T | D, (-30, -15, 6), (643, 5376)),
    row(58, IsogenousAlphaPlusT, D, (30, -150, 1), (1, 14)),
    row(
        59,
        IsogenousAlphaPlusT,
        N | T | D,
        (-60, -15, 5),
        (643, 5376),
    ),
    row(60, IsogenousAlphaPlusT, N | D, (210, 150, 21), (19, 168)),
    row(61, IsogenousAlphaPlusT, N | T, (5, -20, 1), (643, 5376)),
    row(62, IsogenousAlphaPlusT, N, (-12, -3, 1), (19, 168)),
    row(63, IsogenousAlphaPlusT, T, (3, 12, 4), (643, 5376)),
];

pub fn row_spec(id: u8) -> Option<&'static RowSpec> {
    ROWS.get((id as usize).wrapping_sub(1))
}

/// Rows of a batch, in id order.
pub fn batch_rows(batch: Batch) -> impl Iterator<Item = &'static RowSpec> {
    ROWS.iter().filter(move |r| r.batch == batch)
}

/// Ancestors of a row in the lattice, nearest first.
pub fn ancestors(id: u8) -> Vec<u8> {
    let mut out = Vec::new();
    let mut cur = row_spec(id).and_then(|r| r.parent());
    while let Some(p) = cur {
        out.push(p);
        cur = row_spec(p).and_then(|r| r.parent());
    }
    out
}

/// Number of rows directly below `id`.
pub fn child_count(id: u8) -> usize {
    ROWS.iter().filter(|r| r.parent() == Some(id)).count()
}

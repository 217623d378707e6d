//! Word-packed elements of `AGL₂(Z/2^k)` for `k ≤ 4`.
//!
//! Layout of the `u32`: six 4-bit fields, low to high `a, b, c, d, e, f`,
//! for the element `([e f], [a b; c d])`. Entries are reduced mod `2^k`.

use crate::modmatrix::{AffineElement, Mat2, Modulus, RowVec};
use crate::{Error, Result};

pub const MAX_LEVEL: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Packed(pub u32);

impl Packed {
    pub const IDENTITY: Packed = Packed::from_entries([1, 0, 0, 1, 0, 0]);

    /// Entries in the order `a, b, c, d, e, f`.
    pub const fn from_entries(x: [u32; 6]) -> Packed {
        Packed(x[0] | x[1] << 4 | x[2] << 8 | x[3] << 12 | x[4] << 16 | x[5] << 20)
    }

    #[inline]
    pub fn entries(self) -> [u32; 6] {
        let w = self.0;
        [
            w & 15,
            w >> 4 & 15,
            w >> 8 & 15,
            w >> 12 & 15,
            w >> 16 & 15,
            w >> 20 & 15,
        ]
    }

    pub fn parts(self) -> (RowVec, Mat2) {
        let [a, b, c, d, e, f] = self.entries().map(u64::from);
        ([e, f], Mat2::new(a, b, c, d))
    }

    pub fn from_parts(v: RowVec, m: Mat2, level: u32) -> Packed {
        let mask = (1u64 << level) - 1;
        Packed::from_entries([m.a, m.b, m.c, m.d, v[0], v[1]].map(|x| (x & mask) as u32))
    }

    pub fn from_affine(g: &AffineElement) -> Result<Packed> {
        let md = g.modulus();
        if md.ell() != 2 || md.level() == 0 || md.level() > MAX_LEVEL {
            return Err(Error::Contract(format!(
                "packed elements need ℓ = 2 and 1 ≤ k ≤ {MAX_LEVEL}"
            )));
        }
        Ok(Packed::from_parts(g.v(), g.m(), md.level()))
    }

    pub fn to_affine(self, level: u32) -> AffineElement {
        let (v, m) = self.parts();
        let md = Modulus::new(2, level).expect("level ≤ 4");
        AffineElement::from_parts(md, v, m).expect("packed elements are invertible")
    }

    /// Row-major 3×3 embedding.
    pub fn to_3x3(self) -> [i64; 9] {
        let [a, b, c, d, e, f] = self.entries().map(i64::from);
        [a, b, 0, c, d, 0, e, f, 1]
    }

    pub fn is_identity(self) -> bool {
        self == Packed::IDENTITY
    }

    /// Lower-left entry is even: the matrix lies in `Γ₀(2)`.
    pub fn in_gamma0(self) -> bool {
        self.0 >> 8 & 1 == 0
    }

    /// The matrix part, packed into the low 16 bits.
    pub fn matrix_bits(self) -> u32 {
        self.0 & 0xffff
    }

    pub fn det(self, level: u32) -> u32 {
        let [a, b, c, d, ..] = self.entries();
        (a * d + 16 * 16 - b * c) & mask(level)
    }

    pub fn reduce(self, level: u32) -> Packed {
        let m = mask(level);
        Packed::from_entries(self.entries().map(|x| x & m))
    }
}

#[inline]
pub fn mask(level: u32) -> u32 {
    (1 << level) - 1
}

/// Group arithmetic at a fixed level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arith {
    level: u32,
    mask: u32,
}

impl Arith {
    pub fn new(level: u32) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::Contract(format!(
                "packed arithmetic supports levels 1..={MAX_LEVEL}"
            )));
        }
        Ok(Arith {
            level,
            mask: mask(level),
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `(v₁M₂ + v₂, M₁M₂)`.
    #[inline]
    pub fn mul(&self, x: Packed, y: Packed) -> Packed {
        let [a1, b1, c1, d1, e1, f1] = x.entries();
        let [a2, b2, c2, d2, e2, f2] = y.entries();
        let m = self.mask;
        Packed::from_entries([
            (a1 * a2 + b1 * c2) & m,
            (a1 * b2 + b1 * d2) & m,
            (c1 * a2 + d1 * c2) & m,
            (c1 * b2 + d1 * d2) & m,
            (e1 * a2 + f1 * c2 + e2) & m,
            (e1 * b2 + f1 * d2 + f2) & m,
        ])
    }

    #[inline]
    pub fn inv(&self, x: Packed) -> Packed {
        let [a, b, c, d, e, f] = x.entries();
        let m = self.mask;
        let det = (a * d + 256 - b * c) & m;
        // Odd x satisfies x² ≡ 1 mod 8; one Newton step reaches mod 64.
        let di = det.wrapping_mul(2u32.wrapping_sub(det * det)) & m;
        let (ia, ib, ic, id) = (
            (d * di) & m,
            ((16 - b) * di) & m,
            ((16 - c) * di) & m,
            (a * di) & m,
        );
        let ve = (e * ia + f * ic) & m;
        let vf = (e * ib + f * id) & m;
        Packed::from_entries([ia, ib, ic, id, (16 - ve) & m, (16 - vf) & m])
    }

    pub fn pow(&self, x: Packed, mut n: u64) -> Packed {
        let (mut acc, mut base) = (Packed::IDENTITY, x);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// `g x g⁻¹`.
    pub fn conj(&self, g: Packed, g_inv: Packed, x: Packed) -> Packed {
        self.mul(self.mul(g, x), g_inv)
    }

    pub fn commutator(&self, x: Packed, y: Packed) -> Packed {
        self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))
    }

    /// Order of an element; every element of `AGL₂(Z/2^k)` has order dividing `3·2^{6k}`.
    pub fn element_order(&self, x: Packed) -> u64 {
        let mut y = x;
        let mut n = 1;
        while !y.is_identity() {
            y = self.mul(y, x);
            n += 1;
        }
        n
    }

    /// Whether `x ↦ xM + v` has a fixed point mod `2^k`.
    pub fn has_fixed_point(&self, x: Packed) -> bool {
        let (v, m) = x.parts();
        let md = Modulus::new(2, self.level).expect("level ≤ 4");
        crate::modmatrix::solve_row(&v, &m.minus_identity(&md), &md).is_some()
    }
}

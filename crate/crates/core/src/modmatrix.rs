//! Elements of `AGL₂(Z/ℓ^r)` and linear algebra over the residue ring.
//!
//! An element is a pair `(v, M)` of a row vector and an invertible 2×2
//! matrix. Products follow the 3×3 embedding
//!
//! ```text
//! (v, M)  ↦  [ a b 0 ]
//!            [ c d 0 ]
//!            [ e f 1 ]
//! ```
//!
//! so `(v₁, M₁)·(v₂, M₂) = (v₁M₂ + v₂, M₁M₂)`, and `(v, M)` acts on row
//! vectors by `x ↦ xM + v`.

use std::fmt;

use crate::{Error, Result};

/// A prime-power modulus `ℓ^r` small enough that products of two residues
/// fit in a `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    ell: u64,
    level: u32,
    n: u64,
}

impl Modulus {
    pub fn new(ell: u64, level: u32) -> Result<Self> {
        if ell < 2 || !is_small_prime(ell) {
            return Err(Error::Modulus {
                ell,
                level,
                reason: "ℓ must be prime",
            });
        }
        let mut n: u64 = 1;
        for _ in 0..level {
            n = n
                .checked_mul(ell)
                .filter(|&n| n < 1 << 31)
                .ok_or(Error::Modulus {
                    ell,
                    level,
                    reason: "ℓ^r must stay below 2^31",
                })?;
        }
        Ok(Modulus { ell, level, n })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `ℓ^r`.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn reduce(&self, x: u64) -> u64 {
        x % self.n
    }

    pub fn reduce_signed(&self, x: i64) -> u64 {
        x.rem_euclid(self.n as i64) as u64
    }

    fn mul(&self, x: u64, y: u64) -> u64 {
        x * y % self.n
    }

    fn add(&self, x: u64, y: u64) -> u64 {
        (x + y) % self.n
    }

    fn sub(&self, x: u64, y: u64) -> u64 {
        (x + self.n - y) % self.n
    }

    /// ℓ-adic valuation of a residue, capped at `r` (so `val(0) = r`).
    pub fn valuation(&self, x: u64) -> u32 {
        let mut x = x % self.n;
        if x == 0 {
            return self.level;
        }
        let mut v = 0;
        while x % self.ell == 0 {
            x /= self.ell;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, x: u64) -> bool {
        x % self.ell != 0
    }

    /// Inverse of a unit.
    pub fn inv(&self, x: u64) -> Option<u64> {
        let (g, s, _) = ext_gcd((x % self.n) as i64, self.n as i64);
        (g == 1).then(|| s.rem_euclid(self.n as i64) as u64)
    }

    /// `ℓ^j` for `j ≤ r`.
    pub fn pow_ell(&self, j: u32) -> u64 {
        self.ell.pow(j)
    }
}

fn is_small_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0, s0, t0)
}

/// Row vector `[e f]`.
pub type RowVec = [u64; 2];

/// 2×2 matrix `[[a, b], [c, d]]` with residues as entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn reduced(self, m: &Modulus) -> Self {
        Mat2 {
            a: m.reduce(self.a),
            b: m.reduce(self.b),
            c: m.reduce(self.c),
            d: m.reduce(self.d),
        }
    }

    pub fn mul(&self, o: &Mat2, m: &Modulus) -> Mat2 {
        Mat2 {
            a: m.add(m.mul(self.a, o.a), m.mul(self.b, o.c)),
            b: m.add(m.mul(self.a, o.b), m.mul(self.b, o.d)),
            c: m.add(m.mul(self.c, o.a), m.mul(self.d, o.c)),
            d: m.add(m.mul(self.c, o.b), m.mul(self.d, o.d)),
        }
    }

    /// `self − I`.
    pub fn minus_identity(&self, m: &Modulus) -> Mat2 {
        Mat2 {
            a: m.sub(self.a, 1),
            b: self.b,
            c: self.c,
            d: m.sub(self.d, 1),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2::IDENTITY
    }

    /// Every entry divisible by `ℓ`.
    pub fn is_zero_mod_ell(&self, m: &Modulus) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|&x| x % m.ell == 0)
    }
}

/// `x·A` for a row vector `x`.
pub fn vec_mat(x: &RowVec, a: &Mat2, m: &Modulus) -> RowVec {
    [
        m.add(m.mul(x[0], a.a), m.mul(x[1], a.c)),
        m.add(m.mul(x[0], a.b), m.mul(x[1], a.d)),
    ]
}

/// `det(M) = ad − bc` reduced mod `ℓ^r`.
pub fn det_mod(mat: &Mat2, m: &Modulus) -> u64 {
    m.sub(m.mul(mat.a, mat.d), m.mul(mat.b, mat.c))
}

/// `|AGL₂(Z/ℓ^r)| = ℓ^{6r−3}(ℓ−1)(ℓ²−1)` for `r ≥ 1`.
pub fn agl2_order(ell: u64, level: u32) -> u128 {
    assert!(level >= 1);
    let ell = ell as u128;
    ell.pow(6 * level - 3) * (ell - 1) * (ell * ell - 1)
}

/// An element `(v, M)` of `AGL₂(Z/ℓ^r)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffineElement {
    modulus: Modulus,
    v: RowVec,
    m: Mat2,
}

impl fmt::Debug for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "([{} {}], [{} {}; {} {}]) mod {}^{}",
            self.v[0],
            self.v[1],
            self.m.a,
            self.m.b,
            self.m.c,
            self.m.d,
            self.modulus.ell,
            self.modulus.level
        )
    }
}

impl AffineElement {
    /// Builds an element from signed entries; entries are reduced to `[0, ℓ^r)`.
    pub fn new(modulus: Modulus, v: [i64; 2], m: [i64; 4]) -> Result<Self> {
        let v = [modulus.reduce_signed(v[0]), modulus.reduce_signed(v[1])];
        let m = Mat2::new(
            modulus.reduce_signed(m[0]),
            modulus.reduce_signed(m[1]),
            modulus.reduce_signed(m[2]),
            modulus.reduce_signed(m[3]),
        );
        Self::from_parts(modulus, v, m)
    }

    pub fn from_parts(modulus: Modulus, v: RowVec, m: Mat2) -> Result<Self> {
        let v = [modulus.reduce(v[0]), modulus.reduce(v[1])];
        let m = m.reduced(&modulus);
        if !modulus.is_unit(det_mod(&m, &modulus)) {
            return Err(Error::Contract(format!(
                "matrix {m:?} is not invertible mod {}",
                modulus.ell
            )));
        }
        Ok(AffineElement { modulus, v, m })
    }

    pub fn identity(modulus: Modulus) -> Self {
        AffineElement {
            modulus,
            v: [0, 0],
            m: Mat2::IDENTITY,
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn level(&self) -> u32 {
        self.modulus.level
    }

    pub fn v(&self) -> RowVec {
        self.v
    }

    pub fn m(&self) -> Mat2 {
        self.m
    }

    pub fn is_identity(&self) -> bool {
        self.v == [0, 0] && self.m.is_identity()
    }

    /// Whether `x ↦ xM + v` has a fixed point, i.e. `v ∈ Row(M − I)`.
    pub fn has_fixed_point(&self) -> bool {
        row_membership(&self.v, &self.m, &self.modulus).member
    }
}

/// Product under the 3×3-embedding convention: `(v₁M₂ + v₂, M₁M₂)`.
pub fn affine_mul(g1: &AffineElement, g2: &AffineElement) -> Result<AffineElement> {
    if g1.modulus != g2.modulus {
        return Err(Error::Contract(format!(
            "cannot multiply elements mod {}^{} and {}^{}",
            g1.modulus.ell, g1.modulus.level, g2.modulus.ell, g2.modulus.level
        )));
    }
    let m = &g1.modulus;
    let w = vec_mat(&g1.v, &g2.m, m);
    Ok(AffineElement {
        modulus: *m,
        v: [m.add(w[0], g2.v[0]), m.add(w[1], g2.v[1])],
        m: g1.m.mul(&g2.m, m),
    })
}

/// `(v, M)⁻¹ = (−vM⁻¹, M⁻¹)`.
pub fn affine_inv(g: &AffineElement) -> AffineElement {
    let m = &g.modulus;
    let det_inv = m
        .inv(det_mod(&g.m, m))
        .expect("element invariant: det is a unit");
    let minv = Mat2 {
        a: m.mul(g.m.d, det_inv),
        b: m.mul(m.sub(0, g.m.b), det_inv),
        c: m.mul(m.sub(0, g.m.c), det_inv),
        d: m.mul(g.m.a, det_inv),
    };
    let w = vec_mat(&g.v, &minv, m);
    AffineElement {
        modulus: *m,
        v: [m.sub(0, w[0]), m.sub(0, w[1])],
        m: minv,
    }
}

/// The block matrix `[[a, b, 0], [c, d, 0], [e, f, 1]]`.
pub fn embed_3x3(g: &AffineElement) -> [[u64; 3]; 3] {
    [[g.m.a, g.m.b, 0], [g.m.c, g.m.d, 0], [g.v[0], g.v[1], 1]]
}

/// Inverse of [`embed_3x3`] for matrices of the right block shape.
pub fn from_3x3(modulus: Modulus, rows: &[[i64; 3]; 3]) -> Result<AffineElement> {
    let n = modulus.n() as i64;
    if rows[0][2].rem_euclid(n) != 0
        || rows[1][2].rem_euclid(n) != 0
        || rows[2][2].rem_euclid(n) != 1 % n
    {
        return Err(Error::Contract(format!(
            "{rows:?} is not an affine 3×3 matrix"
        )));
    }
    AffineElement::new(
        modulus,
        [rows[2][0], rows[2][1]],
        [rows[0][0], rows[0][1], rows[1][0], rows[1][1]],
    )
}

/// Entrywise reduction to `ℓ^j`.
pub fn reduce_level(g: &AffineElement, j: u32) -> Result<AffineElement> {
    if j > g.level() {
        return Err(Error::Contract(format!(
            "cannot reduce level {} element to level {j}",
            g.level()
        )));
    }
    let target = Modulus::new(g.modulus.ell, j)?;
    AffineElement::from_parts(target, g.v, g.m)
}

/// Outcome of a row-space membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowSpaceWitness {
    pub member: bool,
    /// Solves `x·(M − I) = v` when `member` holds.
    pub x: Option<RowVec>,
}

/// Decides `v ∈ Row(M − I)` over `Z/ℓ^r`.
pub fn row_membership(v: &RowVec, mat: &Mat2, modulus: &Modulus) -> RowSpaceWitness {
    let a = mat.reduced(modulus).minus_identity(modulus);
    match solve_row(v, &a, modulus) {
        Some(x) => RowSpaceWitness {
            member: true,
            x: Some(x),
        },
        None => RowSpaceWitness {
            member: false,
            x: None,
        },
    }
}

/// Solves `x·A = v` over `Z/ℓ^r` by diagonalizing `A` with unimodular row
/// and column operations (pivot on the entry of least valuation).
pub fn solve_row(v: &RowVec, a: &Mat2, m: &Modulus) -> Option<RowVec> {
    let v = [m.reduce(v[0]), m.reduce(v[1])];
    let mut w = [[a.a, a.b], [a.c, a.d]].map(|r| r.map(|x| m.reduce(x)));
    // Accumulated row operations `u` and column operations `c`: u·A·c = diag.
    let mut u = [[1u64, 0], [0, 1]];
    let mut c = [[1u64, 0], [0, 1]];

    let (mut pi, mut pj, mut best) = (0, 0, u32::MAX);
    for i in 0..2 {
        for j in 0..2 {
            let val = m.valuation(w[i][j]);
            if val < best {
                (pi, pj, best) = (i, j, val);
            }
        }
    }
    if best >= m.level() {
        return (v == [0, 0]).then_some([0, 0]);
    }
    if pi == 1 {
        w.swap(0, 1);
        u.swap(0, 1);
    }
    if pj == 1 {
        for row in w.iter_mut().chain(c.iter_mut()) {
            row.swap(0, 1);
        }
    }

    let alpha = best;
    let scale = m
        .inv(w[0][0] / m.pow_ell(alpha))
        .expect("unit part of pivot");
    for j in 0..2 {
        w[0][j] = m.mul(w[0][j], scale);
        u[0][j] = m.mul(u[0][j], scale);
    }
    // Clear below the pivot.
    let t = w[1][0] / m.pow_ell(alpha);
    for j in 0..2 {
        w[1][j] = m.sub(w[1][j], m.mul(t, w[0][j]));
        u[1][j] = m.sub(u[1][j], m.mul(t, u[0][j]));
    }
    // Clear right of the pivot.
    let t = w[0][1] / m.pow_ell(alpha);
    for row in w.iter_mut().chain(c.iter_mut()) {
        row[1] = m.sub(row[1], m.mul(t, row[0]));
    }
    let beta = m.valuation(w[1][1]);
    if beta < m.level() {
        let scale = m
            .inv(w[1][1] / m.pow_ell(beta))
            .expect("unit part of pivot");
        for j in 0..2 {
            u[1][j] = m.mul(u[1][j], scale);
        }
    }

    // v ∈ Row(A) iff vc ∈ Row(diag(ℓ^α, ℓ^β)).
    let vc = [
        m.add(m.mul(v[0], c[0][0]), m.mul(v[1], c[1][0])),
        m.add(m.mul(v[0], c[0][1]), m.mul(v[1], c[1][1])),
    ];
    let mut y = [0u64; 2];
    for (i, exp) in [alpha, beta].into_iter().enumerate() {
        if exp >= m.level() {
            if vc[i] != 0 {
                return None;
            }
        } else {
            let p = m.pow_ell(exp);
            if vc[i] % p != 0 {
                return None;
            }
            y[i] = vc[i] / p;
        }
    }
    let x = [
        m.add(m.mul(y[0], u[0][0]), m.mul(y[1], u[1][0])),
        m.add(m.mul(y[0], u[0][1]), m.mul(y[1], u[1][1])),
    ];
    debug_assert_eq!(vec_mat(&x, a, m), v);
    Some(x)
}

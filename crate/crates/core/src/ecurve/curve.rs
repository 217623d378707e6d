//! Curves `y² = x³ + ax² + bx` over `F_p`, chord-tangent arithmetic and the
//! 2-isogeny pair `φ : E → E′`, `ψ : E′ → E`.

use rand::Rng;

use super::field as f;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReducedPoint {
    Infinity,
    Affine { x: u64, y: u64 },
}

impl ReducedPoint {
    pub fn is_infinity(&self) -> bool {
        matches!(self, ReducedPoint::Infinity)
    }
}

/// `y² = x³ + ax² + bx` over `F_p`, `p` odd with `b(a² − 4b) ≢ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReducedCurve {
    p: u64,
    a: u64,
    b: u64,
}

impl ReducedCurve {
    pub fn new(a: u64, b: u64, p: u64) -> Result<ReducedCurve> {
        if p < 3 || p % 2 == 0 || p >= f::MAX_P {
            return Err(Error::BadPrime(p));
        }
        let (a, b) = (a % p, b % p);
        let disc = f::sub(f::mul(a, a, p), f::mul(4, b, p), p);
        if b == 0 || disc == 0 {
            return Err(Error::BadPrime(p));
        }
        Ok(ReducedCurve { p, a, b })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// `x³ + ax² + bx`.
    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        f::mul(x, f::add(f::mul(x, f::add(x, self.a, p), p), self.b, p), p)
    }

    pub fn contains(&self, pt: &ReducedPoint) -> bool {
        match *pt {
            ReducedPoint::Infinity => true,
            ReducedPoint::Affine { x, y } => {
                x < self.p && y < self.p && f::mul(y, y, self.p) == self.rhs(x)
            }
        }
    }

    pub fn point(&self, x: u64, y: u64) -> Option<ReducedPoint> {
        let pt = ReducedPoint::Affine {
            x: x % self.p,
            y: y % self.p,
        };
        self.contains(&pt).then_some(pt)
    }

    /// The 2-torsion point `(0, 0)`.
    pub fn torsion(&self) -> ReducedPoint {
        ReducedPoint::Affine { x: 0, y: 0 }
    }

    pub fn neg(&self, pt: ReducedPoint) -> ReducedPoint {
        match pt {
            ReducedPoint::Infinity => pt,
            ReducedPoint::Affine { x, y } => ReducedPoint::Affine {
                x,
                y: f::neg(y, self.p),
            },
        }
    }

    pub fn add(&self, s: ReducedPoint, t: ReducedPoint) -> ReducedPoint {
        let p = self.p;
        let (x1, y1, x2, y2) = match (s, t) {
            (ReducedPoint::Infinity, _) => return t,
            (_, ReducedPoint::Infinity) => return s,
            (ReducedPoint::Affine { x: x1, y: y1 }, ReducedPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let lambda = if x1 == x2 {
            if f::add(y1, y2, p) == 0 {
                return ReducedPoint::Infinity;
            }
            // (3x² + 2ax + b) / 2y
            let num = f::add(
                f::add(
                    f::mul(3, f::mul(x1, x1, p), p),
                    f::mul(f::mul(2, self.a, p), x1, p),
                    p,
                ),
                self.b,
                p,
            );
            f::mul(num, f::inv(f::mul(2, y1, p), p), p)
        } else {
            f::mul(f::sub(y2, y1, p), f::inv(f::sub(x2, x1, p), p), p)
        };
        let x3 = f::sub(
            f::sub(f::sub(f::mul(lambda, lambda, p), self.a, p), x1, p),
            x2,
            p,
        );
        let y3 = f::sub(f::mul(lambda, f::sub(x1, x3, p), p), y1, p);
        ReducedPoint::Affine { x: x3, y: y3 }
    }

    /// `n · P` by double-and-add.
    pub fn scalar_mul(&self, mut n: u64, pt: ReducedPoint) -> ReducedPoint {
        let (mut acc, mut base) = (ReducedPoint::Infinity, pt);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(acc, base);
            }
            n >>= 1;
            if n > 0 {
                base = self.add(base, base);
            }
        }
        acc
    }

    /// Uniformly random affine point.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> ReducedPoint {
        loop {
            let x = rng.gen_range(0..self.p);
            if let Some(y) = f::sqrt(self.rhs(x), self.p) {
                let y = if rng.gen::<bool>() {
                    y
                } else {
                    f::neg(y, self.p)
                };
                return ReducedPoint::Affine { x, y };
            }
        }
    }

    /// `E′ : y² = x³ − 2ax² + (a² − 4b)x`.
    pub fn isogenous(&self) -> ReducedCurve {
        let p = self.p;
        let a2 = f::neg(f::mul(2, self.a, p), p);
        let b2 = f::sub(f::mul(self.a, self.a, p), f::mul(4, self.b, p), p);
        ReducedCurve { p, a: a2, b: b2 }
    }

    /// Quadratic twist by `g`: `y² = x³ + agx² + bg²x`.
    pub fn twist(&self, g: u64) -> ReducedCurve {
        let p = self.p;
        ReducedCurve {
            p,
            a: f::mul(self.a, g, p),
            b: f::mul(self.b, f::mul(g, g, p), p),
        }
    }

    /// `φ(x, y) = (y²/x², y(x² − b)/x²)`, with kernel `{O, T}`.
    pub fn phi(&self, pt: ReducedPoint) -> ReducedPoint {
        let p = self.p;
        match pt {
            ReducedPoint::Affine { x, y } if x != 0 => {
                let ix2 = f::inv(f::mul(x, x, p), p);
                let x2 = f::mul(x, x, p);
                ReducedPoint::Affine {
                    x: f::mul(f::mul(y, y, p), ix2, p),
                    y: f::mul(f::mul(y, f::sub(x2, self.b, p), p), ix2, p),
                }
            }
            _ => ReducedPoint::Infinity,
        }
    }

    /// `ψ : E′ → E`, `ψ(X, Y) = (Y²/4X², Y(X² − (a² − 4b))/8X²)`, where
    /// `self` is `E`. Chosen so that `ψ ∘ φ = [2]` and `φ ∘ ψ = [2]`.
    pub fn psi(&self, pt: ReducedPoint) -> ReducedPoint {
        let p = self.p;
        let bb = self.isogenous().b;
        match pt {
            ReducedPoint::Affine { x, y } if x != 0 => {
                let x2 = f::mul(x, x, p);
                let i4 = f::inv(f::mul(4, x2, p), p);
                let i8 = f::inv(f::mul(8, x2, p), p);
                ReducedPoint::Affine {
                    x: f::mul(f::mul(y, y, p), i4, p),
                    y: f::mul(f::mul(y, f::sub(x2, bb, p), p), i8, p),
                }
            }
            _ => ReducedPoint::Infinity,
        }
    }

    /// `#E(F_p)` by counting `x` with `rhs(x)` a square. `O(p log p)`.
    pub fn count_points_exhaustive(&self) -> u64 {
        let p = self.p;
        let mut n = 1;
        for x in 0..p {
            n += match f::legendre(self.rhs(x), p) {
                0 => 1,
                1 => 2,
                _ => 0,
            };
        }
        n
    }
}

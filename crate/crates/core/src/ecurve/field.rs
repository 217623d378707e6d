//! Arithmetic in `F_p` for odd `p < 2³²`, so every product fits in a `u64`.

pub(crate) const MAX_P: u64 = 1 << 32;

#[inline]
pub fn mul(x: u64, y: u64, p: u64) -> u64 {
    x * y % p
}

#[inline]
pub fn add(x: u64, y: u64, p: u64) -> u64 {
    let s = x + y;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(x: u64, y: u64, p: u64) -> u64 {
    if x >= y {
        x - y
    } else {
        x + p - y
    }
}

#[inline]
pub fn neg(x: u64, p: u64) -> u64 {
    if x == 0 {
        0
    } else {
        p - x
    }
}

/// Inverse of a nonzero residue.
pub fn inv(x: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i64, x as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "{x} is not invertible mod {p}");
    t0.rem_euclid(p as i64) as u64
}

pub fn pow(mut x: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, x, p);
        }
        x = mul(x, x, p);
        e >>= 1;
    }
    acc
}

/// `i64 → F_p`.
pub fn from_signed(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Legendre symbol as `0`, `1` or `−1`.
pub fn legendre(x: u64, p: u64) -> i32 {
    if x % p == 0 {
        return 0;
    }
    if pow(x, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// A square root of a quadratic residue (Tonelli–Shanks).
pub fn sqrt(x: u64, p: u64) -> Option<u64> {
    let x = x % p;
    if x == 0 {
        return Some(0);
    }
    if legendre(x, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow(x, (p + 1) / 4, p));
    }
    let (mut q, mut s) = (p - 1, 0);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p)
        .find(|&z| legendre(z, p) == -1)
        .expect("p is an odd prime");
    let (mut m, mut c, mut t, mut r) = (s, pow(z, q, p), pow(x, q, p), pow(x, (q + 1) / 2, p));
    while t != 1 {
        let mut i = 1;
        let mut t2 = mul(t, t, p);
        while t2 != 1 {
            t2 = mul(t2, t2, p);
            i += 1;
        }
        let b = pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mul(b, b, p);
        t = mul(t, c, p);
        r = mul(r, b, p);
    }
    Some(r)
}

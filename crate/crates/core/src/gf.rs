//! Table-driven arithmetic over GF(2^m) for 2 <= m <= 16.
//!
//! Elements are stored as `u16`. Addition is XOR; multiplication and
//! division go through discrete log/antilog tables built from a primitive
//! polynomial, with the generator fixed to `alpha = 2` (the polynomial `x`).

use crate::error::{Error, Result};

/// A field element. Only the low `m` bits are meaningful.
pub type Symbol = u16;

/// Default primitive polynomials per symbol width.
pub fn default_primitive_poly(m: u32) -> Option<u32> {
    Some(match m {
        2 => 0x7,
        3 => 0xB,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        8 => 0x11D,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        13 => 0x201B,
        14 => 0x4443,
        15 => 0x8003,
        16 => 0x1100B,
        _ => return None,
    })
}

/// GF(2^m) with precomputed exp/log tables.
#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    m: u32,
    poly: u32,
    /// `exp[i] = alpha^i`, doubled in length so products of two logs index
    /// without a modulo.
    exp: Vec<Symbol>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u32>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl Field {
    /// Builds the field, failing if `poly` does not generate all `2^m - 1`
    /// nonzero elements from `alpha = 2`.
    pub fn new(m: u32, poly: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::Argument(format!("symbol width must be in 2..=16, got {m}")));
        }
        if poly >> m != 1 {
            return Err(Error::NotPrimitive { m, poly });
        }
        let order = (1usize << m) - 1;
        let mut exp = vec![0 as Symbol; 2 * order];
        let mut log = vec![0u32; order + 1];
        let mut seen = vec![false; order + 1];
        let mut x: u32 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            if seen[x as usize] {
                return Err(Error::NotPrimitive { m, poly });
            }
            seen[x as usize] = true;
            *e = x as Symbol;
            log[x as usize] = i as u32;
            x <<= 1;
            if x >> m != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive { m, poly });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, poly, exp, log })
    }

    /// Field with the default primitive polynomial for `m`.
    pub fn with_default_poly(m: u32) -> Result<Self> {
        let poly = default_primitive_poly(m)
            .ok_or_else(|| Error::Argument(format!("symbol width must be in 2..=16, got {m}")))?;
        Self::new(m, poly)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Number of elements, `2^m`.
    pub fn size(&self) -> usize {
        1 << self.m
    }

    /// Order of the multiplicative group, `2^m - 1`.
    pub fn order(&self) -> usize {
        (1 << self.m) - 1
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// `a / b`. Panics on division by zero.
    #[inline]
    pub fn div(&self, a: Symbol, b: Symbol) -> Symbol {
        assert!(b != 0, "division by zero in GF(2^{})", self.m);
        if a == 0 {
            return 0;
        }
        let order = self.order() as u32;
        self.exp[(self.log[a as usize] + order - self.log[b as usize]) as usize]
    }

    #[inline]
    pub fn inv(&self, a: Symbol) -> Symbol {
        self.div(1, a)
    }

    /// `alpha^e` for any integer exponent.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> Symbol {
        let order = self.order() as i64;
        self.exp[e.rem_euclid(order) as usize]
    }

    /// Discrete log base alpha of a nonzero element.
    #[inline]
    pub fn log(&self, a: Symbol) -> u32 {
        assert!(a != 0, "log of zero");
        self.log[a as usize]
    }

    /// `a^e` for a nonnegative exponent.
    pub fn pow(&self, a: Symbol, e: u64) -> Symbol {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = self.order() as u64;
        self.exp[((self.log[a as usize] as u64 * (e % order)) % order) as usize]
    }

    /// Evaluates a polynomial with coefficients in ascending degree order.
    pub fn poly_eval(&self, coeffs: &[Symbol], x: Symbol) -> Symbol {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Product of two ascending-order polynomials.
    pub fn poly_mul(&self, a: &[Symbol], b: &[Symbol]) -> Vec<Symbol> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= self.mul(x, y);
            }
        }
        out
    }

    pub fn contains(&self, a: Symbol) -> bool {
        (a as usize) < self.size()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn gf256_generator_cycles_all_nonzero_elements() {
        let f = Field::new(8, 0x11D).unwrap();
        assert_eq!(f.exp[0], 1);
        // walk alpha^i directly by shift-and-reduce, independent of the tables
        let mut x: u32 = 1;
        let mut cycle = 0;
        loop {
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= 0x11D;
            }
            cycle += 1;
            if x == 1 {
                break;
            }
        }
        assert_eq!(cycle, 255);
    }

    #[test]
    fn gf65536_has_65535_nonzero_elements() {
        let f = Field::with_default_poly(16).unwrap();
        assert_eq!(f.order(), 65535);
        assert_eq!(f.primitive_poly(), 0x1100B);
    }

    #[test]
    fn default_polys_are_primitive() {
        for m in 2..=16 {
            Field::with_default_poly(m).unwrap();
        }
    }

    #[test]
    fn rejects_non_primitive_polynomial() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but has order 5
        let err = Field::new(4, 0x1F).unwrap_err();
        assert!(err.to_string().contains("0x1f"), "{err}");
        assert!(Field::new(8, 0x100).is_err());
        assert!(Field::new(8, 0x11D << 1).is_err());
        assert!(Field::new(1, 0x3).is_err());
        assert!(Field::new(17, 0x3).is_err());
    }

    #[test]
    fn multiplicative_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [4, 8, 16] {
            let f = Field::with_default_poly(m).unwrap();
            for _ in 0..100 {
                let a = rng.random_range(0..f.size()) as Symbol;
                assert_eq!(f.mul(a, 1), a);
            }
        }
    }

    #[test]
    fn exp_log_inverse_and_periodic() {
        let f = Field::with_default_poly(8).unwrap();
        for a in 1..256u16 {
            assert_eq!(f.exp[f.log(a) as usize], a);
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        for i in 0..255 {
            assert_eq!(f.exp[i], f.exp[i + 255]);
            assert_eq!(f.alpha_pow(i as i64), f.alpha_pow(i as i64 - 255));
        }
    }

    fn carryless_mul_mod(a: u32, b: u32, m: u32, poly: u32) -> u32 {
        let mut acc = 0u32;
        for i in 0..m {
            if b >> i & 1 == 1 {
                acc ^= a << i;
            }
        }
        for bit in (m..2 * m).rev() {
            if acc >> bit & 1 == 1 {
                acc ^= poly << (bit - m);
            }
        }
        acc
    }

    #[test]
    fn table_multiplication_matches_carryless_product_gf16() {
        let f = Field::with_default_poly(4).unwrap();
        for a in 0..16u32 {
            for b in 0..16u32 {
                assert_eq!(f.mul(a as u16, b as u16) as u32, carryless_mul_mod(a, b, 4, 0x13));
            }
        }
    }

    #[test]
    fn poly_eval_matches_horner_free_sum() {
        let f = Field::with_default_poly(8).unwrap();
        let p = [3u16, 0, 7, 1];
        for x in [0u16, 1, 2, 77, 255] {
            let mut expect = 0;
            for (i, &c) in p.iter().enumerate() {
                expect ^= f.mul(c, f.pow(x, i as u64));
            }
            assert_eq!(f.poly_eval(&p, x), expect);
        }
    }
}

//! Arithmetic in GF(2^p) for 1 <= p <= 8 and the Walsh-Hadamard transform
//! over the additive group (Z/2)^p.
//!
//! Elements are stored as their p-bit polynomial-basis representation, so
//! addition is XOR and the binary image of a symbol is simply its bits.
//! Multiplication goes through exp/log tables built from a fixed primitive
//! polynomial per extension degree.

use crate::error::{Error, Result};

/// A field element, `value < q`.
pub type Symbol = u8;

/// Primitive polynomials indexed by `p`, including the leading `x^p` term.
pub const PRIMITIVE_POLYS: [u16; 9] = [
    0,     // unused
    0x3,   // x + 1
    0x7,   // x^2 + x + 1
    0xB,   // x^3 + x + 1
    0x13,  // x^4 + x + 1
    0x25,  // x^5 + x^2 + 1
    0x43,  // x^6 + x + 1
    0x83,  // x^7 + x + 1
    0x11D, // x^8 + x^4 + x^3 + x^2 + 1
];

/// Exp/log tables and a dense multiplication table for one field.
#[derive(Clone, Debug)]
pub struct FieldTables {
    p: u8,
    q: usize,
    poly: u16,
    exp: Vec<Symbol>,
    log: Vec<u8>,
    mul: Vec<Symbol>,
    inv: Vec<Symbol>,
}

impl FieldTables {
    /// Builds the tables for GF(2^p) using the fixed polynomial from
    /// [`PRIMITIVE_POLYS`].
    pub fn new(p: u8) -> Result<Self> {
        if !(1..=8).contains(&p) {
            return Err(Error::Config(format!(
                "unsupported extension degree p={p}, expected 1..=8"
            )));
        }
        let q = 1usize << p;
        let poly = PRIMITIVE_POLYS[p as usize];
        let order = q - 1;

        let mut exp = Vec::with_capacity(order);
        let mut log = vec![0u8; q];
        let mut cur: u16 = 1;
        for i in 0..order {
            exp.push(cur as Symbol);
            log[cur as usize] = i as u8;
            cur <<= 1;
            if cur & (q as u16) != 0 {
                cur ^= poly;
            }
        }
        debug_assert_eq!(cur, 1, "polynomial for p={p} is not primitive");

        let mut mul = vec![0 as Symbol; q * q];
        let mut inv = vec![0 as Symbol; q];
        for a in 1..q {
            for b in 1..q {
                let s = (log[a] as usize + log[b] as usize) % order;
                mul[a * q + b] = exp[s];
            }
            inv[a] = exp[(order - log[a] as usize) % order];
        }

        Ok(Self {
            p,
            q,
            poly,
            exp,
            log,
            mul,
            inv,
        })
    }

    #[inline]
    pub fn p(&self) -> u8 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    /// Primitive polynomial as a bitmask including the `x^p` term.
    #[inline]
    pub fn poly(&self) -> u16 {
        self.poly
    }

    /// `exp_table[i] = x^i`, length `q - 1`.
    pub fn exp_table(&self) -> &[Symbol] {
        &self.exp
    }

    /// Discrete logarithm of each nonzero element (entry 0 is unused).
    pub fn log_table(&self) -> &[u8] {
        &self.log
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        self.mul[a as usize * self.q + b as usize]
    }

    /// Row of the multiplication table: `mul_row(h)[a] = h * a`.
    #[inline]
    pub fn mul_row(&self, h: Symbol) -> &[Symbol] {
        let start = h as usize * self.q;
        &self.mul[start..start + self.q]
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a == 0 {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        Ok(self.inv[a as usize])
    }

    /// Inverse without the zero check; callers guarantee `a != 0`.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Symbol) -> Symbol {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Writes `out[h * a] = v[a]`, turning a belief over `c` into a belief
    /// over `h * c`.
    pub fn permute_by_coefficient(&self, v: &[f64], h: Symbol, out: &mut [f64]) -> Result<()> {
        if h == 0 {
            return Err(Error::Domain("coefficient must be nonzero".into()));
        }
        if v.len() != self.q || out.len() != self.q {
            return Err(Error::Dimension(format!(
                "expected vectors of length {}, got {} and {}",
                self.q,
                v.len(),
                out.len()
            )));
        }
        let row = self.mul_row(h);
        for (a, &x) in v.iter().enumerate() {
            out[row[a] as usize] = x;
        }
        Ok(())
    }
}

#[cfg(debug_assertions)]
thread_local! {
    static BUTTERFLIES: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Number of butterflies executed by [`wht_in_place`] on this thread since
/// the last reset. Only tracked in builds with debug assertions.
#[cfg(debug_assertions)]
pub fn wht_butterfly_count() -> u64 {
    BUTTERFLIES.with(|c| c.get())
}

#[cfg(debug_assertions)]
pub fn reset_wht_butterfly_count() {
    BUTTERFLIES.with(|c| c.set(0));
}

/// Unnormalized Walsh-Hadamard transform:
/// `out[s] = sum_a (-1)^{popcount(s & a)} v[a]`.
///
/// Applying it twice multiplies by `v.len()`. The length must be a power of
/// two; `q/2 * p` butterflies are performed.
pub fn wht_in_place(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
    #[cfg(debug_assertions)]
    BUTTERFLIES.with(|c| c.set(c.get() + (n / 2 * n.trailing_zeros() as usize) as u64));
}

/// Scales `v` to sum to one. Returns `false` (leaving `v` uniform) when the
/// sum is zero or not finite.
pub fn normalize(v: &mut [f64]) -> bool {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        let inv = 1.0 / s;
        v.iter_mut().for_each(|x| *x *= inv);
        true
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
        false
    }
}

//! Arithmetic in `F_p` and `F_p^2 = F_p[i] / (i^2 + 1)`, valid for `p = 3 mod 4`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Clone, Debug)]
pub(crate) struct PrimeField {
    p: BigUint,
    /// `(p + 1) / 4`, the square-root exponent.
    sqrt_exp: BigUint,
}

/// `c0 + c1 * i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fp2 {
    pub c0: BigUint,
    pub c1: BigUint,
}

impl Fp2 {
    pub fn one() -> Self {
        Fp2 {
            c0: BigUint::one(),
            c1: BigUint::zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.c0.is_one() && self.c1.is_zero()
    }
}

impl PrimeField {
    pub fn new(p: BigUint) -> Self {
        let sqrt_exp = (&p + BigUint::one()) >> 2;
        PrimeField { p, sqrt_exp }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn reduce(&self, a: BigUint) -> BigUint {
        a % &self.p
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.p {
            s - &self.p
        } else {
            s
        }
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.p - b + a
        }
    }

    pub fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.p - a
        }
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    pub fn sqr(&self, a: &BigUint) -> BigUint {
        (a * a) % &self.p
    }

    pub fn double(&self, a: &BigUint) -> BigUint {
        self.add(a, a)
    }

    pub fn inv(&self, a: &BigUint) -> Option<BigUint> {
        a.modinv(&self.p)
    }

    pub fn sqrt(&self, a: &BigUint) -> Option<BigUint> {
        let r = a.modpow(&self.sqrt_exp, &self.p);
        (self.sqr(&r) == *a).then_some(r)
    }

    pub fn fp2_mul(&self, a: &Fp2, b: &Fp2) -> Fp2 {
        // Karatsuba: (a0 + a1 i)(b0 + b1 i) = (a0 b0 - a1 b1) + ((a0 + a1)(b0 + b1) - a0 b0 - a1 b1) i
        let v0 = &a.c0 * &b.c0;
        let v1 = &a.c1 * &b.c1;
        let cross = (&a.c0 + &a.c1) * (&b.c0 + &b.c1) - &v0 - &v1;
        let v0 = v0 % &self.p;
        let v1 = v1 % &self.p;
        Fp2 {
            c0: self.sub(&v0, &v1),
            c1: cross % &self.p,
        }
    }

    pub fn fp2_sqr(&self, a: &Fp2) -> Fp2 {
        // (a0 + a1 i)^2 = (a0 + a1)(a0 - a1) + 2 a0 a1 i
        let sum = &a.c0 + &a.c1;
        let diff = self.sub(&a.c0, &a.c1);
        Fp2 {
            c0: (sum * diff) % &self.p,
            c1: ((&a.c0 * &a.c1) << 1) % &self.p,
        }
    }

    pub fn fp2_conj(&self, a: &Fp2) -> Fp2 {
        Fp2 {
            c0: a.c0.clone(),
            c1: self.neg(&a.c1),
        }
    }

    pub fn fp2_inv(&self, a: &Fp2) -> Option<Fp2> {
        let norm = self.add(&self.sqr(&a.c0), &self.sqr(&a.c1));
        let inv = self.inv(&norm)?;
        Some(Fp2 {
            c0: self.mul(&a.c0, &inv),
            c1: self.mul(&self.neg(&a.c1), &inv),
        })
    }

    pub fn fp2_pow(&self, base: &Fp2, e: &BigUint) -> Fp2 {
        let mut acc = Fp2::one();
        for i in (0..e.bits()).rev() {
            acc = self.fp2_sqr(&acc);
            if e.bit(i) {
                acc = self.fp2_mul(&acc, base);
            }
        }
        acc
    }
}

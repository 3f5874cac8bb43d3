//! Exponent-representation backend.
//!
//! G1 elements are stored as `x` standing for `g^x`, GT elements as `y`
//! standing for `e(g, g)^y`. The pairing is exponent multiplication mod q.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{
    byte_len, expand_digest, to_fixed_be, Backend, BackendKind, GroupError, GroupProfile,
    ProfileError,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransparentG1(BigUint);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransparentGt(BigUint);

impl TransparentG1 {
    pub fn exponent(&self) -> &BigUint {
        &self.0
    }
}

impl TransparentGt {
    pub fn exponent(&self) -> &BigUint {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransparentBackend {
    profile: Arc<GroupProfile>,
}

impl TransparentBackend {
    pub fn new(order: BigUint) -> Result<Self, ProfileError> {
        Self::from_profile(GroupProfile::transparent(order)?)
    }

    /// The q = 101 toy group used by the exhaustive oracle tests.
    pub fn small() -> Self {
        Self::new(BigUint::from(101u32)).unwrap()
    }

    /// Transparent group with the 160-bit order of the Type-A curve.
    pub fn a80() -> Self {
        Self::from_profile(GroupProfile::transparent_a80()).unwrap()
    }

    pub fn from_profile(profile: GroupProfile) -> Result<Self, ProfileError> {
        if profile.backend_kind != BackendKind::Transparent {
            return Err(ProfileError::InvalidValue {
                key: "backend",
                reason: "expected transparent".into(),
            });
        }
        Ok(TransparentBackend {
            profile: Arc::new(profile),
        })
    }

    pub fn g1_from_exponent(&self, x: u64) -> TransparentG1 {
        TransparentG1(BigUint::from(x) % self.order())
    }

    pub fn gt_from_exponent(&self, x: u64) -> TransparentGt {
        TransparentGt(BigUint::from(x) % self.order())
    }

    fn q(&self) -> &BigUint {
        &self.profile.order
    }

    fn decode_exponent(&self, bytes: &[u8]) -> Result<BigUint, GroupError> {
        let width = self.g1_len();
        if bytes.len() != width {
            return Err(GroupError::MalformedEncoding {
                expected: width,
                actual: bytes.len(),
            });
        }
        let v = BigUint::from_bytes_be(bytes);
        if &v >= self.q() {
            return Err(GroupError::InvalidElement("exponent not reduced modulo q"));
        }
        Ok(v)
    }
}

impl Backend for TransparentBackend {
    type G1 = TransparentG1;
    type Gt = TransparentGt;

    fn kind(&self) -> BackendKind {
        BackendKind::Transparent
    }

    fn profile(&self) -> &GroupProfile {
        &self.profile
    }

    fn order(&self) -> &BigUint {
        self.q()
    }

    fn generator(&self) -> TransparentG1 {
        TransparentG1(BigUint::one())
    }

    fn g1_identity(&self) -> TransparentG1 {
        TransparentG1(BigUint::zero())
    }

    fn gt_identity(&self) -> TransparentGt {
        TransparentGt(BigUint::zero())
    }

    fn g1_pow_raw(&self, base: &TransparentG1, e: &BigUint) -> TransparentG1 {
        TransparentG1((&base.0 * e) % self.q())
    }

    fn g1_mul_raw(&self, a: &TransparentG1, b: &TransparentG1) -> TransparentG1 {
        TransparentG1((&a.0 + &b.0) % self.q())
    }

    fn g1_inv_raw(&self, a: &TransparentG1) -> TransparentG1 {
        TransparentG1((self.q() - &a.0) % self.q())
    }

    fn gt_pow_raw(&self, base: &TransparentGt, e: &BigUint) -> TransparentGt {
        TransparentGt((&base.0 * e) % self.q())
    }

    fn gt_mul_raw(&self, a: &TransparentGt, b: &TransparentGt) -> TransparentGt {
        TransparentGt((&a.0 + &b.0) % self.q())
    }

    fn gt_inv_raw(&self, a: &TransparentGt) -> TransparentGt {
        TransparentGt((self.q() - &a.0) % self.q())
    }

    fn pair_raw(&self, a: &TransparentG1, b: &TransparentG1) -> TransparentGt {
        TransparentGt((&a.0 * &b.0) % self.q())
    }

    fn map_to_g1(&self, domain: &[u8], data: &[u8]) -> TransparentG1 {
        // 16 extra bytes keep the modular bias negligible; the result is
        // forced nonzero so hashed identities never map to the identity.
        let wide = expand_digest(domain, data, 0, byte_len(self.q()) + 16);
        let q_minus_one = self.q() - BigUint::one();
        TransparentG1(BigUint::from_bytes_be(&wide) % q_minus_one + BigUint::one())
    }

    fn gt_generator(&self) -> TransparentGt {
        TransparentGt(BigUint::one())
    }

    fn g1_len(&self) -> usize {
        byte_len(self.q())
    }

    fn gt_len(&self) -> usize {
        byte_len(self.q())
    }

    fn encode_g1(&self, x: &TransparentG1) -> Vec<u8> {
        to_fixed_be(&x.0, self.g1_len())
    }

    fn decode_g1(&self, bytes: &[u8]) -> Result<TransparentG1, GroupError> {
        self.decode_exponent(bytes).map(TransparentG1)
    }

    fn encode_gt(&self, x: &TransparentGt) -> Vec<u8> {
        to_fixed_be(&x.0, self.gt_len())
    }

    fn decode_gt(&self, bytes: &[u8]) -> Result<TransparentGt, GroupError> {
        self.decode_exponent(bytes).map(TransparentGt)
    }

    fn g1_exponent(&self, x: &TransparentG1) -> Option<BigUint> {
        Some(x.0.clone())
    }

    fn gt_exponent(&self, x: &TransparentGt) -> Option<BigUint> {
        Some(x.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{counters_reset, counters_snapshot, GroupOps, OpCounters};

    fn exp(b: &TransparentBackend, x: &TransparentG1) -> u64 {
        b.g1_exponent(x).unwrap().try_into().unwrap()
    }

    #[test]
    fn pair_of_small_powers() {
        let b = TransparentBackend::small();
        let gt = b.pair(&b.g1_from_exponent(3), &b.g1_from_exponent(5));
        assert_eq!(gt, b.gt_from_exponent(15));
        let id = b.pair(&b.g1_identity(), &b.g1_from_exponent(42));
        assert_eq!(id, b.gt_identity());
    }

    #[test]
    fn exponentiation_oracles() {
        let b = TransparentBackend::small();
        // 7 * 13 = 91 < 101
        assert_eq!(exp(&b, &b.g1_exp(&b.g1_from_exponent(7), &b.scalar(13))), 91);
        // 4 * 30 = 120 = 19 mod 101
        assert_eq!(b.gt_exp(&b.gt_from_exponent(4), &b.scalar(30)), b.gt_from_exponent(19));
        assert_eq!(b.g1_exp(&b.generator(), &b.scalar(1)), b.generator());
        let x = b.g1_from_exponent(57);
        assert_eq!(b.g1_mul(&x, &b.g1_inv(&x)), b.g1_identity());
    }

    #[test]
    fn bilinearity_exhaustive_on_small_grid() {
        let b = TransparentBackend::small();
        let g = b.generator();
        let egg = b.pair(&g, &g);
        assert_ne!(egg, b.gt_identity());
        for x in 0..=20u64 {
            for y in 0..=20u64 {
                let lhs = b.pair(&b.g1_exp(&g, &b.scalar(x)), &b.g1_exp(&g, &b.scalar(y)));
                let rhs = b.gt_exp(&egg, &b.scalar(x * y));
                assert_eq!(lhs, rhs, "a = {x}, b = {y}");
            }
        }
    }

    #[test]
    fn counters_track_primitives() {
        let b = TransparentBackend::small();
        let g = b.generator();
        counters_reset();
        b.pair(&g, &g);
        assert_eq!(counters_snapshot(), OpCounters::new(0, 0, 1, 0));
        counters_reset();
        for _ in 0..3 {
            b.g1_exp(&g, &b.scalar(5));
        }
        b.g1_mul(&g, &g);
        b.g1_inv(&g);
        assert_eq!(counters_snapshot(), OpCounters::new(3, 0, 0, 0));
    }

    #[test]
    fn hash_is_deterministic_and_nonzero() {
        let b = TransparentBackend::small();
        for i in 0..500u32 {
            let h = b.hash_to_g1(&i.to_be_bytes());
            assert_ne!(h, b.g1_identity());
            assert_eq!(h, b.hash_to_g1(&i.to_be_bytes()));
        }
        let big = TransparentBackend::a80();
        assert_ne!(big.hash_to_g1(b"alice"), big.hash_to_g1(b"bob"));
    }

    #[test]
    fn encoding_width_and_errors() {
        let b = TransparentBackend::small();
        assert_eq!(b.encode_g1(&b.g1_from_exponent(100)), vec![100]);
        assert!(matches!(
            b.decode_g1(&[1, 2]),
            Err(GroupError::MalformedEncoding { expected: 1, actual: 2 })
        ));
        assert!(matches!(b.decode_g1(&[101]), Err(GroupError::InvalidElement(_))));
        let big = TransparentBackend::a80();
        assert_eq!(big.g1_len(), 20);
        assert_eq!(big.scalar_len(), 20);
    }
}

//! Type-A symmetric pairing on the supersingular curve `y^2 = x^3 + x`.
//!
//! With `p = 3 mod 4` the curve has `p + 1` points and embedding degree 2.
//! The distortion map `(x, y) -> (-x, i*y)` sends the order-q subgroup of
//! `E(F_p)` to a linearly independent subgroup of `E(F_p^2)`, giving the
//! symmetric map `e(P, Q) = f_{q,P}(psi(Q))^((p^2 - 1) / q)`.
//!
//! The x-coordinate of `psi(Q)` lies in `F_p`, so vertical-line denominators
//! are in `F_p*` and vanish under the final exponentiation; the Miller loop
//! only accumulates the numerator lines.

mod curve;
mod field;

use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub use curve::G1Point;
pub use field::Fp2;

use curve::{add_affine, add_mixed, double, is_on_curve, negate, scalar_mul, Jacobian};
use field::PrimeField;

use super::{
    byte_len, expand_digest, to_fixed_be, Backend, BackendKind, GroupError, GroupProfile,
    ProfileError,
};

const GENERATOR_DOMAIN: &[u8] = b"MXC-GENERATOR";

#[derive(Debug)]
struct Params {
    profile: GroupProfile,
    field: PrimeField,
    order: BigUint,
    cofactor: BigUint,
    generator: G1Point,
    coord_len: usize,
    gt_generator: OnceLock<Fp2>,
}

#[derive(Clone, Debug)]
pub struct PairingBackend {
    params: Arc<Params>,
}

impl PartialEq for PairingBackend {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.params, &other.params) || self.params.profile == other.params.profile
    }
}

impl Eq for PairingBackend {}

impl PairingBackend {
    /// The 80-bit Type-A profile: 128-byte G1 and GT encodings, 20-byte scalars.
    pub fn a80() -> Self {
        Self::from_profile(GroupProfile::a80()).expect("built-in profile is valid")
    }

    pub fn from_profile(mut profile: GroupProfile) -> Result<Self, ProfileError> {
        if profile.backend_kind != BackendKind::Pairing {
            return Err(ProfileError::InvalidValue {
                key: "backend",
                reason: "expected pairing".into(),
            });
        }
        let p = profile
            .field_prime
            .clone()
            .ok_or(ProfileError::MissingKey("field_prime"))?;
        let field = PrimeField::new(p.clone());
        let order = profile.order.clone();
        let cofactor = (&p + BigUint::one()) / &order;
        let mut params = Params {
            coord_len: byte_len(&p),
            field,
            order,
            cofactor,
            generator: G1Point::Infinity,
            gt_generator: OnceLock::new(),
            profile: profile.clone(),
        };
        let generator = match &profile.generator {
            Some((x, y)) => {
                let f = &params.field;
                let pt = G1Point::Affine {
                    x: x.clone(),
                    y: y.clone(),
                };
                if x >= f.modulus()
                    || y >= f.modulus()
                    || !is_on_curve(f, x, y)
                    || !scalar_mul(f, &pt, &params.order).is_infinity()
                {
                    return Err(ProfileError::BadGenerator);
                }
                pt
            }
            None => {
                let g = try_and_increment(&params, GENERATOR_DOMAIN, b"g");
                if let Some((x, y)) = g.coordinates() {
                    profile.generator = Some((x.clone(), y.clone()));
                }
                g
            }
        };
        params.generator = generator;
        params.profile = profile;
        Ok(PairingBackend {
            params: Arc::new(params),
        })
    }

    pub fn cofactor(&self) -> &BigUint {
        &self.params.cofactor
    }

    pub fn field_prime(&self) -> &BigUint {
        self.params.field.modulus()
    }

    /// Checks the curve equation for an affine point; the identity passes.
    pub fn is_on_curve(&self, p: &G1Point) -> bool {
        match p {
            G1Point::Infinity => true,
            G1Point::Affine { x, y } => is_on_curve(&self.params.field, x, y),
        }
    }

    fn miller_loop(&self, p: &G1Point, q: &G1Point) -> Fp2 {
        let f = &self.params.field;
        let ((xp, yp), (xq, yq)) = match (p.coordinates(), q.coordinates()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Fp2::one(),
        };
        let order = &self.params.order;
        let mut acc = Fp2::one();
        let mut t = Jacobian::from_affine(p);
        for i in (0..order.bits() - 1).rev() {
            if t.is_infinity() {
                break;
            }
            let line = doubling_line(f, &t, xq, yq);
            acc = f.fp2_mul(&f.fp2_sqr(&acc), &line);
            t = double(f, &t);
            if order.bit(i) {
                if let Some(line) = addition_line(f, &t, xp, yp, xq, yq) {
                    acc = f.fp2_mul(&acc, &line);
                }
                t = add_mixed(f, &t, p);
            }
        }
        acc
    }

    fn final_exponentiation(&self, m: &Fp2) -> Fp2 {
        let f = &self.params.field;
        // m^(p - 1) = conj(m) / m since Frobenius is conjugation.
        let inv = f.fp2_inv(m).expect("Miller value is nonzero");
        let unitary = f.fp2_mul(&f.fp2_conj(m), &inv);
        f.fp2_pow(&unitary, &self.params.cofactor)
    }

    fn decode_coordinate(&self, bytes: &[u8]) -> Result<BigUint, GroupError> {
        let v = BigUint::from_bytes_be(bytes);
        if &v >= self.params.field.modulus() {
            return Err(GroupError::InvalidElement("coordinate not reduced"));
        }
        Ok(v)
    }
}

/// Tangent line at `t`, evaluated at `psi(Q) = (-xq, i*yq)` and scaled by an
/// `F_p` factor: `M (Z^2 xq + X) - 2 Y^2 + (2 Y Z^3 yq) i`, `M = 3X^2 + Z^4`.
fn doubling_line(f: &PrimeField, t: &Jacobian, xq: &BigUint, yq: &BigUint) -> Fp2 {
    let zz = f.sqr(&t.z);
    let xx = f.sqr(&t.x);
    let m = f.add(&f.add(&f.double(&xx), &xx), &f.sqr(&zz));
    let re = f.sub(
        &f.mul(&m, &f.add(&f.mul(&zz, xq), &t.x)),
        &f.double(&f.sqr(&t.y)),
    );
    let im = f.mul(&f.double(&f.mul(&t.y, &f.mul(&zz, &t.z))), yq);
    Fp2 { c0: re, c1: im }
}

/// Chord through `t` and `P = (xp, yp)` evaluated at `psi(Q)`, scaled by
/// `D = (xp Z^2 - X) Z`. `None` for the vertical line, which the final
/// exponentiation would erase anyway.
fn addition_line(
    f: &PrimeField,
    t: &Jacobian,
    xp: &BigUint,
    yp: &BigUint,
    xq: &BigUint,
    yq: &BigUint,
) -> Option<Fp2> {
    let zz = f.sqr(&t.z);
    let d0 = f.sub(&f.mul(xp, &zz), &t.x);
    if d0.is_zero() {
        return None;
    }
    let d = f.mul(&d0, &t.z);
    let n = f.sub(&f.mul(yp, &f.mul(&zz, &t.z)), &t.y);
    let re = f.sub(&f.mul(&n, &f.add(xq, xp)), &f.mul(&d, yp));
    let im = f.mul(&d, yq);
    Some(Fp2 { c0: re, c1: im })
}

/// Try-and-increment: expand the input to a candidate x, accept it when
/// `x^3 + x` is a square, fix the sign of y from the digest, then clear the
/// cofactor.
fn try_and_increment(params: &Params, domain: &[u8], data: &[u8]) -> G1Point {
    let f = &params.field;
    let width = params.coord_len + 16;
    for counter in 0u32.. {
        let bytes = expand_digest(domain, data, counter, width + 1);
        let x = f.reduce(BigUint::from_bytes_be(&bytes[..width]));
        let rhs = f.add(&f.mul(&f.sqr(&x), &x), &x);
        let Some(mut y) = f.sqrt(&rhs) else {
            continue;
        };
        if y.bit(0) != (bytes[width] & 1 == 1) {
            y = f.neg(&y);
        }
        let pt = scalar_mul(f, &G1Point::Affine { x, y }, &params.cofactor);
        if !pt.is_infinity() {
            return pt;
        }
    }
    unreachable!("counter space exhausted")
}

impl Backend for PairingBackend {
    type G1 = G1Point;
    type Gt = Fp2;

    fn kind(&self) -> BackendKind {
        BackendKind::Pairing
    }

    fn profile(&self) -> &GroupProfile {
        &self.params.profile
    }

    fn order(&self) -> &BigUint {
        &self.params.order
    }

    fn generator(&self) -> G1Point {
        self.params.generator.clone()
    }

    fn g1_identity(&self) -> G1Point {
        G1Point::Infinity
    }

    fn gt_identity(&self) -> Fp2 {
        Fp2::one()
    }

    fn g1_pow_raw(&self, base: &G1Point, e: &BigUint) -> G1Point {
        scalar_mul(&self.params.field, base, e)
    }

    fn g1_mul_raw(&self, a: &G1Point, b: &G1Point) -> G1Point {
        add_affine(&self.params.field, a, b)
    }

    fn g1_inv_raw(&self, a: &G1Point) -> G1Point {
        negate(&self.params.field, a)
    }

    fn gt_pow_raw(&self, base: &Fp2, e: &BigUint) -> Fp2 {
        self.params.field.fp2_pow(base, e)
    }

    fn gt_mul_raw(&self, a: &Fp2, b: &Fp2) -> Fp2 {
        self.params.field.fp2_mul(a, b)
    }

    fn gt_inv_raw(&self, a: &Fp2) -> Fp2 {
        // Elements of the order-q subgroup have norm 1, so the inverse is
        // the conjugate.
        self.params.field.fp2_conj(a)
    }

    fn pair_raw(&self, a: &G1Point, b: &G1Point) -> Fp2 {
        if a.is_infinity() || b.is_infinity() {
            return Fp2::one();
        }
        let m = self.miller_loop(a, b);
        self.final_exponentiation(&m)
    }

    fn map_to_g1(&self, domain: &[u8], data: &[u8]) -> G1Point {
        try_and_increment(&self.params, domain, data)
    }

    fn gt_generator(&self) -> Fp2 {
        self.params
            .gt_generator
            .get_or_init(|| {
                let g = &self.params.generator;
                self.pair_raw(g, g)
            })
            .clone()
    }

    fn g1_len(&self) -> usize {
        2 * self.params.coord_len
    }

    fn gt_len(&self) -> usize {
        2 * self.params.coord_len
    }

    fn encode_g1(&self, x: &G1Point) -> Vec<u8> {
        let w = self.params.coord_len;
        match x {
            // (0, 0) has order 2, so it never collides with a subgroup point.
            G1Point::Infinity => vec![0u8; 2 * w],
            G1Point::Affine { x, y } => {
                let mut out = to_fixed_be(x, w);
                out.extend(to_fixed_be(y, w));
                out
            }
        }
    }

    fn decode_g1(&self, bytes: &[u8]) -> Result<G1Point, GroupError> {
        let w = self.params.coord_len;
        if bytes.len() != 2 * w {
            return Err(GroupError::MalformedEncoding {
                expected: 2 * w,
                actual: bytes.len(),
            });
        }
        if bytes.iter().all(|b| *b == 0) {
            return Ok(G1Point::Infinity);
        }
        let x = self.decode_coordinate(&bytes[..w])?;
        let y = self.decode_coordinate(&bytes[w..])?;
        if !is_on_curve(&self.params.field, &x, &y) {
            return Err(GroupError::InvalidElement("point not on curve"));
        }
        let pt = G1Point::Affine { x, y };
        if !scalar_mul(&self.params.field, &pt, &self.params.order).is_infinity() {
            return Err(GroupError::InvalidElement("point outside the order-q subgroup"));
        }
        Ok(pt)
    }

    fn encode_gt(&self, x: &Fp2) -> Vec<u8> {
        let w = self.params.coord_len;
        let mut out = to_fixed_be(&x.c0, w);
        out.extend(to_fixed_be(&x.c1, w));
        out
    }

    fn decode_gt(&self, bytes: &[u8]) -> Result<Fp2, GroupError> {
        let w = self.params.coord_len;
        if bytes.len() != 2 * w {
            return Err(GroupError::MalformedEncoding {
                expected: 2 * w,
                actual: bytes.len(),
            });
        }
        let x = Fp2 {
            c0: self.decode_coordinate(&bytes[..w])?,
            c1: self.decode_coordinate(&bytes[w..])?,
        };
        if x.c0.is_zero() && x.c1.is_zero() {
            return Err(GroupError::InvalidElement("zero is not in GT"));
        }
        if !self.params.field.fp2_pow(&x, &self.params.order).is_one() {
            return Err(GroupError::InvalidElement("element outside the order-q subgroup"));
        }
        Ok(x)
    }
}

//! Points on `E: y^2 = x^3 + x`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::field::PrimeField;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum G1Point {
    Infinity,
    Affine { x: BigUint, y: BigUint },
}

impl G1Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, G1Point::Infinity)
    }

    pub fn coordinates(&self) -> Option<(&BigUint, &BigUint)> {
        match self {
            G1Point::Infinity => None,
            G1Point::Affine { x, y } => Some((x, y)),
        }
    }
}

/// Jacobian coordinates: `(X, Y, Z)` stands for `(X / Z^2, Y / Z^3)`; `Z = 0`
/// is the point at infinity.
#[derive(Clone, Debug)]
pub(crate) struct Jacobian {
    pub x: BigUint,
    pub y: BigUint,
    pub z: BigUint,
}

impl Jacobian {
    pub fn infinity() -> Self {
        Jacobian {
            x: BigUint::one(),
            y: BigUint::one(),
            z: BigUint::zero(),
        }
    }

    pub fn from_affine(p: &G1Point) -> Self {
        match p {
            G1Point::Infinity => Self::infinity(),
            G1Point::Affine { x, y } => Jacobian {
                x: x.clone(),
                y: y.clone(),
                z: BigUint::one(),
            },
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.z.is_zero()
    }
}

pub(crate) fn is_on_curve(f: &PrimeField, x: &BigUint, y: &BigUint) -> bool {
    let rhs = f.add(&f.mul(&f.sqr(x), x), x);
    f.sqr(y) == rhs
}

pub(crate) fn to_affine(f: &PrimeField, p: &Jacobian) -> G1Point {
    if p.is_infinity() {
        return G1Point::Infinity;
    }
    let zinv = f.inv(&p.z).expect("nonzero z is invertible");
    let zinv2 = f.sqr(&zinv);
    let zinv3 = f.mul(&zinv2, &zinv);
    G1Point::Affine {
        x: f.mul(&p.x, &zinv2),
        y: f.mul(&p.y, &zinv3),
    }
}

/// Doubling for `a = 1` (dbl-2007-bl).
pub(crate) fn double(f: &PrimeField, p: &Jacobian) -> Jacobian {
    if p.is_infinity() || p.y.is_zero() {
        return Jacobian::infinity();
    }
    let xx = f.sqr(&p.x);
    let yy = f.sqr(&p.y);
    let yyyy = f.sqr(&yy);
    let zz = f.sqr(&p.z);
    let s = f.double(&f.sub(&f.sub(&f.sqr(&f.add(&p.x, &yy)), &xx), &yyyy));
    let m = f.add(&f.add(&f.double(&xx), &xx), &f.sqr(&zz));
    let t = f.sub(&f.sqr(&m), &f.double(&s));
    let yyyy8 = f.double(&f.double(&f.double(&yyyy)));
    let y3 = f.sub(&f.mul(&m, &f.sub(&s, &t)), &yyyy8);
    let z3 = f.sub(&f.sub(&f.sqr(&f.add(&p.y, &p.z)), &yy), &zz);
    Jacobian { x: t, y: y3, z: z3 }
}

/// `p + q` with `q` affine (madd-2007-bl).
pub(crate) fn add_mixed(f: &PrimeField, p: &Jacobian, q: &G1Point) -> Jacobian {
    let (qx, qy) = match q {
        G1Point::Infinity => return p.clone(),
        G1Point::Affine { x, y } => (x, y),
    };
    if p.is_infinity() {
        return Jacobian::from_affine(q);
    }
    let z1z1 = f.sqr(&p.z);
    let u2 = f.mul(qx, &z1z1);
    let s2 = f.mul(&f.mul(qy, &p.z), &z1z1);
    let h = f.sub(&u2, &p.x);
    let r = f.double(&f.sub(&s2, &p.y));
    if h.is_zero() {
        return if r.is_zero() {
            double(f, p)
        } else {
            Jacobian::infinity()
        };
    }
    let hh = f.sqr(&h);
    let i = f.double(&f.double(&hh));
    let j = f.mul(&h, &i);
    let v = f.mul(&p.x, &i);
    let x3 = f.sub(&f.sub(&f.sqr(&r), &j), &f.double(&v));
    let y3 = f.sub(
        &f.mul(&r, &f.sub(&v, &x3)),
        &f.double(&f.mul(&p.y, &j)),
    );
    let z3 = f.sub(&f.sub(&f.sqr(&f.add(&p.z, &h)), &z1z1), &hh);
    Jacobian { x: x3, y: y3, z: z3 }
}

pub(crate) fn scalar_mul(f: &PrimeField, base: &G1Point, e: &BigUint) -> G1Point {
    if base.is_infinity() || e.is_zero() {
        return G1Point::Infinity;
    }
    let mut acc = Jacobian::infinity();
    for i in (0..e.bits()).rev() {
        acc = double(f, &acc);
        if e.bit(i) {
            acc = add_mixed(f, &acc, base);
        }
    }
    to_affine(f, &acc)
}

pub(crate) fn negate(f: &PrimeField, p: &G1Point) -> G1Point {
    match p {
        G1Point::Infinity => G1Point::Infinity,
        G1Point::Affine { x, y } => G1Point::Affine {
            x: x.clone(),
            y: f.neg(y),
        },
    }
}

/// Textbook affine addition. Also serves as the reference the Jacobian
/// formulas are tested against.
pub(crate) fn add_affine(f: &PrimeField, p: &G1Point, q: &G1Point) -> G1Point {
    let ((x1, y1), (x2, y2)) = match (p, q) {
        (G1Point::Infinity, _) => return q.clone(),
        (_, G1Point::Infinity) => return p.clone(),
        (G1Point::Affine { x: x1, y: y1 }, G1Point::Affine { x: x2, y: y2 }) => {
            ((x1, y1), (x2, y2))
        }
    };
    let lambda = if x1 == x2 {
        if f.add(y1, y2).is_zero() {
            return G1Point::Infinity;
        }
        let num = f.add(&f.double(&f.sqr(x1)), &f.add(&f.sqr(x1), &BigUint::one()));
        f.mul(&num, &f.inv(&f.double(y1)).expect("y != 0"))
    } else {
        f.mul(&f.sub(y2, y1), &f.inv(&f.sub(x2, x1)).expect("x1 != x2"))
    };
    let x3 = f.sub(&f.sub(&f.sqr(&lambda), x1), x2);
    let y3 = f.sub(&f.mul(&lambda, &f.sub(x1, &x3)), y1);
    G1Point::Affine { x: x3, y: y3 }
}

#[cfg(test)]
mod tests {
    use super::*;

    // y^2 = x^3 + x over F_103: #E = 104 = 8 * 13.
    fn small() -> PrimeField {
        PrimeField::new(BigUint::from(103u32))
    }

    fn all_points(f: &PrimeField) -> Vec<G1Point> {
        let mut pts = vec![G1Point::Infinity];
        for x in 0..103u32 {
            for y in 0..103u32 {
                let (x, y) = (BigUint::from(x), BigUint::from(y));
                if is_on_curve(f, &x, &y) {
                    pts.push(G1Point::Affine { x, y });
                }
            }
        }
        pts
    }

    #[test]
    fn curve_order_is_p_plus_one() {
        assert_eq!(all_points(&small()).len(), 104);
    }

    #[test]
    fn jacobian_matches_affine_reference() {
        let f = small();
        let pts = all_points(&f);
        for p in pts.iter().step_by(3) {
            for q in pts.iter().step_by(5) {
                let jac = to_affine(&f, &add_mixed(&f, &Jacobian::from_affine(p), q));
                assert_eq!(jac, add_affine(&f, p, q), "{p:?} + {q:?}");
            }
            let dbl = to_affine(&f, &double(&f, &Jacobian::from_affine(p)));
            assert_eq!(dbl, add_affine(&f, p, p));
        }
    }

    #[test]
    fn scalar_mul_matches_repeated_addition() {
        let f = small();
        for p in all_points(&f).iter().step_by(7) {
            let mut acc = G1Point::Infinity;
            for k in 0..30u32 {
                assert_eq!(scalar_mul(&f, p, &BigUint::from(k)), acc);
                acc = add_affine(&f, &acc, p);
            }
            assert!(scalar_mul(&f, p, &BigUint::from(104u32)).is_infinity());
        }
    }

    #[test]
    fn negation_cancels() {
        let f = small();
        for p in all_points(&f) {
            assert!(add_affine(&f, &p, &negate(&f, &p)).is_infinity());
        }
    }
}

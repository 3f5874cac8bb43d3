//! Bilinearity on the 80-bit Type-A curve and element encodings.

use medexchain::group::{Backend, GroupOps, PairingBackend, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let b = PairingBackend::a80();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let g = b.generator();
    let (x, y) = (b.random_nonzero_scalar(&mut rng), b.random_nonzero_scalar(&mut rng));
    let xy = Scalar::new(x.value() * y.value(), b.order());

    let lhs = b.pair(&b.g1_exp(&g, &x), &b.g1_exp(&g, &y));
    let rhs = b.gt_exp(&b.pair(&g, &g), &xy);
    println!("e(g^x, g^y) == e(g, g)^(xy): {}", lhs == rhs);
    println!("e(g, g) != 1: {}", b.pair(&g, &g) != b.gt_identity());

    let h = b.hash_to_g1(b"patient-0042");
    println!("H(id) on curve and in subgroup: {}", b.is_on_curve(&h) && b.g1_in_subgroup(&h));
    println!("G1 encoding {} bytes, GT encoding {} bytes", b.encode_g1(&h).len(), b.encode_gt(&lhs).len());
}

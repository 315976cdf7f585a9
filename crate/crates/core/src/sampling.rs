//! Random test inputs: extension parameters, boundary pairs and spectral
//! points. Callers supply the generator, so seeded runs are reproducible.

use num_complex::Complex64;
use rand::Rng;

use crate::krein::ExtensionParams;
use crate::numeric::{c, min_singular, CMatrix};
use crate::parametrizations::{pair_from_params, BoundaryPair};

fn entry<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| entry(rng))
}

/// Hermitian with entries of size about `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5 * scale)
}

/// Orthonormal n x k, from the QR factor of a random matrix.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> CMatrix {
    if k == 0 {
        return CMatrix::zeros(n, 0);
    }
    loop {
        let a = random_matrix(rng, n, k);
        if min_singular(&a) > 1e-3 {
            return a.qr().q();
        }
    }
}

/// Random rank in `0..=n`, random range, random Hermitian block.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ExtensionParams {
    let k = rng.gen_range(0..=n);
    random_params_of_rank(rng, n, k)
}

pub fn random_params_of_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> ExtensionParams {
    let q = random_isometry(rng, n, k);
    let t = random_hermitian(rng, k, 2.0);
    ExtensionParams::from_range(&q, &t).expect("isometry and Hermitian block give valid params")
}

/// Invertible, reasonably conditioned.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let a = random_matrix(rng, n, n) + CMatrix::identity(n, n);
        if min_singular(&a) > 0.1 {
            return a;
        }
    }
}

/// `(C B1, C B2)` for the pair of random params and a random invertible `C`;
/// describes the same relation as the params.
pub fn random_valid_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (ExtensionParams, BoundaryPair) {
    let p = random_params(rng, n);
    let bp = pair_from_params(&p);
    let cm = random_invertible(rng, n);
    let pair = BoundaryPair {
        b1: &cm * bp.b1,
        b2: &cm * bp.b2,
    };
    (p, pair)
}

/// A valid pair left-multiplied by a rank-deficient matrix: `(comm)` still
/// holds, every nondegeneracy condition fails.
pub fn corrupted_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> BoundaryPair {
    let (_, bp) = random_valid_pair(rng, n);
    let drop = rng.gen_range(1..=n);
    let keep = random_isometry(rng, n, n - drop);
    let s = &keep * keep.adjoint() * random_invertible(rng, n);
    BoundaryPair {
        b1: &s * bp.b1,
        b2: &s * bp.b2,
    }
}

/// Nonreal, with `|Im z| >= 0.1`.
pub fn random_nonreal<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex64 {
    let re = rng.gen_range(-radius..radius);
    let mag = rng.gen_range(0.1..radius.max(0.2));
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    c(re, sign * mag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parametrizations::check_pair_conditions;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_pairs_behave() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            let (_, good) = random_valid_pair(&mut rng, n);
            assert!(check_pair_conditions(&good).unwrap().all_pass());
            let bad = corrupted_pair(&mut rng, n);
            let r = check_pair_conditions(&bad).unwrap();
            assert!(r.comm && !r.nondeg && !r.rofe1 && !r.rofe2 && r.agree);
        }
    }

    #[test]
    fn isometry_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_isometry(&mut rng, 5, 3);
        assert!((q.adjoint() * &q - CMatrix::identity(3, 3)).norm() < 1e-13);
    }
}

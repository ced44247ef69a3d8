use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxpht::sparse::{Cholesky, SymMatrix};

/// Random sparse SPD matrix: a random graph Laplacian plus a positive diagonal.
fn random_spd(n: usize, edges: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut diag = vec![0.1; n];
    for _ in 0..edges {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let w = rng.gen_range(0.1..2.0);
        t.push((i.max(j), i.min(j), -w));
        diag[i] += w;
        diag[j] += w;
    }
    t.extend(diag.into_iter().enumerate().map(|(i, d)| (i, i, d)));
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_inverts_mul(n in 1usize..120, density in 0usize..6, seed in 0u64..1000) {
        let a = SymMatrix::from_triplets(n, &random_spd(n, density * n, seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul(&x);
        let perm: Vec<usize> = (0..n).rev().collect();
        for chol in [Cholesky::factor(&a, perm).unwrap(), Cholesky::factor_grouped(&a, &(0..n).map(|i| vec![i]).collect::<Vec<_>>()).unwrap()] {
            let y = chol.solve(&b);
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-8, "error {err}");
        }
    }
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxpht::bernstein;
use voxpht::geom::{dist, Vec3};
use voxpht::pht::PhtMesh;

fn table_derivs(dim: usize, table: &[f64], t: Vec3, h: Vec3) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        let mut order = [0; 3];
        let mut s = 1.0;
        if k > 0 {
            if k > dim {
                continue;
            }
            order[k - 1] = 1;
            s = 1.0 / h[k - 1];
        }
        let w = bernstein::tensor_weights(dim, t, order);
        *o = s * w.iter().zip(table).map(|(a, b)| a * b).sum::<f64>();
    }
    out
}

/// Value and gradient of every function at `u`, evaluated on leaf `e`.
fn all_on(m: &PhtMesh, e: usize, u: Vec3) -> Vec<(usize, [f64; 4])> {
    let (lo, _) = m.element_box(e);
    let h = m.element_size(e);
    let mut t = [0.0; 3];
    for a in 0..m.dim() {
        t[a] = ((u[a] - lo[a]) / h[a]).clamp(0.0, 1.0);
    }
    m.element(e).tables().map(|(f, tab)| (f, table_derivs(m.dim(), tab, t, h))).collect()
}

fn random_refine(m: &mut PhtMesh, rng: &mut ChaCha8Rng, steps: usize, max_level: u32) {
    for _ in 0..steps {
        let leaves: Vec<usize> = m.leaves().filter(|&e| m.element(e).level < max_level).collect();
        if leaves.is_empty() {
            return;
        }
        let e = leaves[rng.gen_range(0..leaves.len())];
        m.refine_element(e).unwrap();
        assert_eq!(m.num_functions(), (1 << m.dim()) * m.num_basis_vertices());
    }
}

fn random_point(m: &PhtMesh, rng: &mut ChaCha8Rng) -> Vec3 {
    let (lo, hi) = m.domain();
    let mut u = [0.0; 3];
    for a in 0..m.dim() {
        u[a] = rng.gen_range(lo[a]..hi[a]);
    }
    u
}

fn check_basis(m: &PhtMesh, rng: &mut ChaCha8Rng, points: usize) {
    let d = m.dim();
    for e in m.leaves() {
        let mut sum = vec![0.0; bernstein::table_len(d)];
        for (_, tab) in m.element(e).tables() {
            for (s, v) in sum.iter_mut().zip(tab) {
                assert!(*v >= -1e-14, "negative ordinate {v}");
                *s += v;
            }
        }
        for s in sum {
            assert!((s - 1.0).abs() < 1e-12, "partition of unity {s}");
        }
    }
    for _ in 0..points {
        let u = random_point(m, rng);
        let s: f64 = m.basis_values(u).unwrap().iter().map(|x| x.1).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    // C¹ across interfaces: evaluate on both sides of a leaf face
    let leaves: Vec<usize> = m.leaves().collect();
    for _ in 0..points {
        let e = leaves[rng.gen_range(0..leaves.len())];
        let a = rng.gen_range(0..d);
        let (lo, hi) = m.element_box(e);
        let (dlo, dhi) = m.domain();
        if hi[a] >= dhi[a] - 1e-12 {
            continue;
        }
        let mut u = [0.0; 3];
        for b in 0..d {
            u[b] = rng.gen_range(lo[b]..hi[b]);
        }
        u[a] = hi[a];
        let mut probe = u;
        probe[a] += 1e-9 * (dhi[a] - dlo[a]);
        let (n, _) = m.locate(probe).unwrap();
        let left = all_on(m, e, u);
        let right = all_on(m, n, u);
        let get = |v: &[(usize, [f64; 4])], f: usize| v.iter().find(|x| x.0 == f).map(|x| x.1).unwrap_or([0.0; 4]);
        let mut ids: Vec<usize> = left.iter().chain(&right).map(|x| x.0).collect();
        ids.sort_unstable();
        ids.dedup();
        for f in ids {
            let (l, r) = (get(&left, f), get(&right, f));
            assert!((l[0] - r[0]).abs() < 1e-10, "value jump {} at {:?}", l[0] - r[0], u);
            for k in 1..=d {
                let scale = m.element_size(e)[0].min(m.element_size(n)[0]);
                assert!(((l[k] - r[k]) * scale).abs() < 1e-8, "derivative jump {} fn {f} axis {k}", l[k] - r[k]);
            }
        }
    }
}

fn perturb(m: &mut PhtMesh, rng: &mut ChaCha8Rng) {
    for f in 0..m.num_functions() {
        let mut p = m.control(f);
        for v in p.iter_mut().take(m.dim()) {
            *v += rng.gen_range(-0.02..0.02);
        }
        m.set_control(f, p);
    }
}

fn invariance(dim: usize, seed: u64, steps: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = vec![3; dim];
    let mut m = PhtMesh::tensor(dim, &n, &vec![0.0; dim], &vec![1.0; dim]).unwrap();
    perturb(&mut m, &mut rng);
    let pts: Vec<Vec3> = (0..100).map(|_| random_point(&m, &mut rng)).collect();
    let before: Vec<Vec3> = pts.iter().map(|&u| m.map_point(u).unwrap()).collect();
    random_refine(&mut m, &mut rng, steps, 4);
    for (u, b) in pts.iter().zip(&before) {
        assert!(dist(m.map_point(*u).unwrap(), *b) < 1e-10);
    }
}

#[test]
fn refined_2d_basis_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let mut m = PhtMesh::tensor(2, &[4, 4], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        random_refine(&mut m, &mut rng, 50, 5);
        check_basis(&m, &mut rng, 300);
    }
}

#[test]
fn refined_3d_basis_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m = PhtMesh::tensor(3, &[2, 2, 2], &[0.0; 3], &[1.0; 3]).unwrap();
    random_refine(&mut m, &mut rng, 30, 3);
    check_basis(&m, &mut rng, 300);
}

#[test]
fn geometry_invariant_under_refinement() {
    invariance(2, 3, 40);
    invariance(3, 4, 15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn dimension_formula_holds(seed in 0u64..10_000, steps in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = PhtMesh::tensor(2, &[3, 2], &[0.0, 0.0], &[1.5, 1.0]).unwrap();
        random_refine(&mut m, &mut rng, steps, 6);
        prop_assert_eq!(m.num_functions(), 4 * m.num_basis_vertices());
    }
}

mod common;

use common::{exhaustive_cbc, wce_by_subsets};
use domain_uq::cbc::{cbc_construct, pod_weights, shift_avg_wce, PodWeights};
use domain_uq::lattice::GeneratingVector;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn check(n: u64, w: &PodWeights) {
    let s = w.s();
    let rep = cbc_construct(n, s, w).unwrap();
    assert_eq!(
        rep.z.z(),
        exhaustive_cbc(n, s, w).as_slice(),
        "n={n} w={w:?}"
    );
    for d in 1..=s {
        let zd = rep.z.truncated(d).unwrap();
        let wd = w.truncated(d).unwrap();
        let direct = wce_by_subsets(zd.z(), n, &wd);
        assert!(close(rep.per_dim_error[d - 1], direct, 1e-13));
    }
}

#[test]
fn unit_product_weights() {
    for n in [8, 16] {
        for s in 1..=3 {
            check(n, &PodWeights::product(vec![1.0; s]).unwrap());
        }
    }
}

#[test]
fn decaying_pod_weights() {
    for (theta, beta, lambda) in [(2.1, 1.0, 0.9), (2.5, 2.0, 1.0 / 1.8), (3.0, 1.0, 0.7)] {
        let b: Vec<f64> = (1..=3).map(|j| (j as f64).powf(1.0 - theta)).collect();
        for n in [8, 16] {
            check(n, &pod_weights(&b, 1.0, beta, lambda, 3).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_product_weights(
        wts in proptest::collection::vec(0.05f64..3.0, 1..=3),
        big in any::<bool>(),
    ) {
        check(if big { 16 } else { 8 }, &PodWeights::product(wts).unwrap());
    }

    #[test]
    fn random_pod_weights(
        ratios in proptest::collection::vec(0.1f64..4.0, 3),
        prods in proptest::collection::vec(0.05f64..2.0, 1..=3),
        big in any::<bool>(),
    ) {
        let s = prods.len();
        let w = PodWeights::from_parts(ratios[..s].to_vec(), prods).unwrap();
        check(if big { 16 } else { 8 }, &w);
    }

    #[test]
    fn recursion_matches_subsets(
        raw in proptest::collection::vec(0u64..1024, 1..=3),
        ratios in proptest::collection::vec(0.1f64..4.0, 3),
        prods in proptest::collection::vec(0.05f64..2.0, 3),
        m in 1u32..5,
    ) {
        let n = 1u64 << m;
        let s = raw.len();
        let z: Vec<u64> = raw.iter().map(|r| (2 * r + 1) % n).collect();
        let w = PodWeights::from_parts(ratios[..s].to_vec(), prods[..s].to_vec()).unwrap();
        let fast = shift_avg_wce(&GeneratingVector::new(n, z.clone()).unwrap(), &w).unwrap();
        prop_assert!(close(fast, wce_by_subsets(&z, n, &w), 1e-13));
    }
}

mod common;

use common::{brute_knn, brute_radius, random_points, random_u};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wqisa::KdTree;

#[test]
fn knn_five_on_thousand_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let points = random_points(&mut rng, 1000, 2);
    let tree = KdTree::from_points(&points).unwrap();
    for _ in 0..100 {
        let u = random_u(&mut rng, 2);
        let got: Vec<usize> = tree.knn(&u, 5).unwrap().iter().map(|n| n.index).collect();
        assert_eq!(got, brute_knn(&points, &u, 5));
    }
}

#[test]
fn knn_random_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..1000 {
        let n = rng.random_range(1..80);
        let d = rng.random_range(1..=4);
        let mut points = random_points(&mut rng, n, d);
        // lattice-snapped copies create exact distance ties
        if rng.random_bool(0.5) {
            for p in points.iter_mut() {
                for x in p.iter_mut() {
                    *x = (*x * 4.0).round() / 4.0;
                }
            }
        }
        let tree = KdTree::from_points(&points).unwrap();
        let u = random_u(&mut rng, d);
        let k = rng.random_range(1..=n);
        let got: Vec<usize> = tree.knn(&u, k).unwrap().iter().map(|n| n.index).collect();
        assert_eq!(got, brute_knn(&points, &u, k));
    }
}

#[test]
fn radius_random_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..500 {
        let n = rng.random_range(1..120);
        let d = rng.random_range(1..=3);
        let points = random_points(&mut rng, n, d);
        let tree = KdTree::from_points(&points).unwrap();
        let u = random_u(&mut rng, d);
        let r = rng.random_range(0.0..0.8);
        let mut got: Vec<usize> = tree
            .radius_query(&u, r)
            .unwrap()
            .iter()
            .map(|n| n.index)
            .collect();
        got.sort_unstable();
        assert_eq!(got, brute_radius(&points, &u, r));
    }
}

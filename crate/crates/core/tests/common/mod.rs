//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wqisa::{PointCloud, TensorSplineSpace, WeightSpec};

/// Squared distance, summed in coordinate order.
pub fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// B-spline `i` of degree `p` on `knots` at `x` by the textbook recursion,
/// with `0/0 = 0` and the last nonempty interval closed on the right.
pub fn cox_de_boor(knots: &[f64], i: usize, p: usize, x: f64) -> f64 {
    let n = knots.len() - p - 1;
    let right_end = knots[n];
    fn rec(t: &[f64], i: usize, p: usize, x: f64, right_end: f64) -> f64 {
        if p == 0 {
            let inside = t[i] <= x && x < t[i + 1];
            let closing = x == right_end && t[i] < t[i + 1] && t[i + 1] == right_end;
            return if inside || closing { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let l = t[i + p] - t[i];
        if l > 0.0 {
            v += (x - t[i]) / l * rec(t, i, p - 1, x, right_end);
        }
        let r = t[i + p + 1] - t[i + 1];
        if r > 0.0 {
            v += (t[i + p + 1] - x) / r * rec(t, i + 1, p - 1, x, right_end);
        }
        v
    }
    rec(knots, i, p, x, right_end)
}

/// Tensor-product spline value from the recursion, summing every basis function.
pub fn tensor_eval(space: &TensorSplineSpace, coefficients: &[f64], u: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (flat, c) in coefficients.iter().enumerate() {
        let multi = space.multi_index(flat);
        let mut b = 1.0;
        for (k, kv) in space.axes().iter().enumerate() {
            b *= cox_de_boor(kv.knots(), multi[k], kv.degree(), u[k]);
        }
        acc += c * b;
    }
    acc
}

/// Indices of the `k` nearest points ordered by `(squared distance, index)`.
pub fn brute_knn(points: &[Vec<f64>], u: &[f64], k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (d2(p, u), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|e| e.1).collect()
}

/// Indices within the closed ball, ascending.
pub fn brute_radius(points: &[Vec<f64>], u: &[f64], r: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| d2(&points[i], u) <= r * r)
        .collect()
}

/// Unscaled weights straight from the kernel definitions.
pub fn brute_weights(points: &[Vec<f64>], spec: &WeightSpec, u: &[f64]) -> Vec<(usize, f64)> {
    let dist = |i: usize| d2(&points[i], u).sqrt();
    match *spec {
        WeightSpec::Knn { k } => {
            let k = k.min(points.len());
            brute_knn(points, u, k)
                .into_iter()
                .map(|i| (i, 1.0 / k as f64))
                .collect()
        }
        WeightSpec::Characteristic { r } => brute_radius(points, u, r)
            .into_iter()
            .map(|i| (i, 1.0))
            .collect(),
        WeightSpec::Gaussian {
            sigma,
            squared_norm,
        } => (0..points.len())
            .map(|i| {
                let d = if squared_norm {
                    dist(i) * dist(i)
                } else {
                    dist(i)
                };
                (i, (-d / (2.0 * sigma * sigma)).exp())
            })
            .collect(),
        WeightSpec::Exponential { sigma } => (0..points.len())
            .map(|i| (i, (-dist(i) / (2f64.sqrt() * sigma)).exp()))
            .collect(),
        WeightSpec::Idw => {
            let hits: Vec<usize> = (0..points.len()).filter(|&i| dist(i) == 0.0).collect();
            if hits.is_empty() {
                (0..points.len()).map(|i| (i, 1.0 / dist(i))).collect()
            } else {
                let w = 1.0 / hits.len() as f64;
                hits.into_iter().map(|i| (i, w)).collect()
            }
        }
    }
}

/// `sum y w / sum w`, or `None` for an empty window.
pub fn brute_mean(points: &[Vec<f64>], ys: &[f64], spec: &WeightSpec, u: &[f64]) -> Option<f64> {
    let w = brute_weights(points, spec, u);
    let total: f64 = w.iter().map(|e| e.1).sum();
    if total > 0.0 {
        Some(w.iter().map(|&(i, wi)| ys[i] * wi).sum::<f64>() / total)
    } else {
        None
    }
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect()
}

pub fn cloud_from(points: &[Vec<f64>], ys: &[f64]) -> PointCloud {
    let rows: Vec<Vec<f64>> = points
        .iter()
        .zip(ys)
        .map(|(p, &y)| {
            let mut r = p.clone();
            r.push(y);
            r
        })
        .collect();
    PointCloud::from_rows(&rows).unwrap()
}

/// One of the five weight families with parameters suited to unit-box data.
pub fn random_weight(rng: &mut ChaCha8Rng, family: usize, n_points: usize) -> WeightSpec {
    match family % 5 {
        0 => WeightSpec::Knn {
            k: rng.random_range(1..=n_points.min(15)),
        },
        1 => WeightSpec::Characteristic {
            r: rng.random_range(0.05..0.4),
        },
        2 => WeightSpec::Gaussian {
            sigma: rng.random_range(0.05..0.5),
            squared_norm: rng.random_bool(0.5),
        },
        3 => WeightSpec::Exponential {
            sigma: rng.random_range(0.02..0.5),
        },
        _ => WeightSpec::Idw,
    }
}

/// Uniform space on the unit box with random degrees and sizes.
pub fn random_space(rng: &mut ChaCha8Rng, d: usize, max_extra: usize) -> TensorSplineSpace {
    let degrees: Vec<usize> = (0..d).map(|_| rng.random_range(1..=3)).collect();
    let n: Vec<usize> = degrees
        .iter()
        .map(|&p| p + 1 + rng.random_range(0..=max_extra))
        .collect();
    TensorSplineSpace::uniform(&vec![(0.0, 1.0); d], &n, &degrees).unwrap()
}

/// Uniform point in the unit box.
pub fn random_u(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>()).collect()
}

#![allow(dead_code, clippy::needless_range_loop)]

use concentra::sampling::{SampleBatch, SampleMeta, SeedSpec};
use rand::Rng;

/// Minimum transport cost by enumerating every basic feasible solution:
/// each choice of `n + m − 1` cells whose marginal system is nonsingular and
/// has a nonnegative solution is a vertex of the transportation polytope.
pub fn brute_force_ot(a: &[f64], b: &[f64], cost: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let cells = n * m;
    let k = n + m - 1;
    // drop the last column constraint, which is implied by the others
    let mut rhs: Vec<f64> = a.to_vec();
    rhs.extend_from_slice(&b[..m - 1]);
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(k);
    subsets(cells, k, 0, &mut chosen, &mut |set| {
        let mut mat = vec![vec![0.0; k + 1]; k];
        for (col, &c) in set.iter().enumerate() {
            let (i, j) = (c / m, c % m);
            mat[i][col] = 1.0;
            if j < m - 1 {
                mat[n + j][col] = 1.0;
            }
        }
        for r in 0..k {
            mat[r][k] = rhs[r];
        }
        if let Some(x) = solve(mat) {
            if x.iter().all(|&v| v >= -1e-12) {
                let c: f64 = set.iter().zip(&x).map(|(&cell, &v)| cost[cell] * v.max(0.0)).sum();
                best = best.min(c);
            }
        }
    });
    best
}

fn subsets(total: usize, k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for c in start..total {
        if total - c < k - chosen.len() {
            break;
        }
        chosen.push(c);
        subsets(total, k, c + 1, chosen, f);
        chosen.pop();
    }
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..k).map(|r| a[r][k] / a[r][r]).collect())
}

pub fn random_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

pub fn random_atoms<R: Rng>(rng: &mut R, k: usize, d: usize) -> Vec<Vec<f64>> {
    (0..k).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
}

pub fn cost_matrix(xs: &[Vec<f64>], ys: &[Vec<f64>], p: u32) -> Vec<f64> {
    xs.iter()
        .flat_map(|x| {
            ys.iter().map(move |y| {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt().powi(p as i32)
            })
        })
        .collect()
}

pub fn batch(points: Vec<Vec<f64>>) -> SampleBatch<f64> {
    let dimension = points[0].len();
    SampleBatch {
        meta: SampleMeta {
            n: None,
            sampler: "fixed".into(),
            acceptance_rate: None,
            seed: SeedSpec::new(0, 0),
            count: points.len(),
            dimension,
        },
        points,
    }
}

/// `W^p` between `μₙ` of a one-dimensional family and weighted atoms, from
/// the monotone coupling: the slab of `μₙ` between consecutive quantiles
/// of the atomic law goes to its atom.
pub fn exact_1d_to_atoms(fam: &concentra::GibbsFamily, n: u64, atoms: &[(f64, f64)], p: u32) -> f64 {
    use concentra::quadrature::integrate;
    let nf = n as f64;
    let (lo, hi) = (fam.domain().lo[0], fam.domain().hi[0]);
    let floor = atoms
        .iter()
        .map(|&(a, _)| fam.ell().value(&[a]))
        .fold(f64::INFINITY, f64::min);
    let f = |x: f64| (-nf * (fam.ell().value(&[x]) - floor)).exp() * fam.pi0().value(&[x]);
    let width = 1.0 / nf.sqrt();
    let mut breaks = Vec::new();
    for &(a, _) in atoms {
        for k in -8..=8 {
            breaks.push(a + k as f64 * width);
        }
    }
    let mass = |a: f64, b: f64| integrate(&f, a, b, &breaks).unwrap();
    let z = mass(lo, hi);
    let mut left = lo;
    let mut cum = 0.0;
    let mut total = 0.0;
    for (k, &(a, w)) in atoms.iter().enumerate() {
        cum += w;
        let right = if k + 1 == atoms.len() {
            hi
        } else {
            let (mut x0, mut x1) = (lo, hi);
            for _ in 0..100 {
                let mid = 0.5 * (x0 + x1);
                if mass(lo, mid) / z < cum {
                    x0 = mid;
                } else {
                    x1 = mid;
                }
            }
            0.5 * (x0 + x1)
        };
        let mut cuts = breaks.clone();
        cuts.push(a);
        total += integrate(|x: f64| (x - a).abs().powi(p as i32) * f(x), left, right, &cuts).unwrap();
        left = right;
    }
    (total / z).powf(1.0 / p as f64)
}

/// `W^p` between the two-dimensional volcano `μₙ` on `[−3, 3]²` and the
/// uniform law on the unit circle. No coupling beats `E dist(X, circle)^p`,
/// and radial projection attains it for a rotation-invariant `μₙ`; the box
/// breaks invariance only where the density is below `e^{−2n}`.
pub fn exact_volcano2(n: u64, p: u32) -> f64 {
    use concentra::quadrature::integrate;
    let nf = n as f64;
    let outer = 3.0 * 2f64.sqrt();
    let arc = |r: f64| {
        if r <= 3.0 {
            1.0
        } else {
            1.0 - 4.0 / std::f64::consts::PI * (3.0 / r).acos()
        }
    };
    let f = |r: f64| r * arc(r) * (-0.5 * nf * (r - 1.0) * (r - 1.0)).exp();
    let width = 1.0 / nf.sqrt();
    let breaks: Vec<f64> = (-8..=8).map(|k| 1.0 + k as f64 * width).chain([3.0]).collect();
    let z = integrate(f, 0.0, outer, &breaks).unwrap();
    let m = integrate(|r: f64| (r - 1.0).abs().powi(p as i32) * f(r), 0.0, outer, &breaks).unwrap();
    (m / z).powf(1.0 / p as f64)
}

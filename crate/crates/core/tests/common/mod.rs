#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense LP as row-major data.
pub struct RandomLp {
    pub rows: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// Solves `B x = rhs` for square `a` (row-major); `None` if singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let m = rhs.len();
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(p, c);
        rhs.swap(p, c);
        for r in 0..m {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..m {
                    a[r][k] -= f * a[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    Some((0..m).map(|i| rhs[i] / a[i][i]).collect())
}

pub fn rank(rows: &[Vec<f64>]) -> usize {
    let mut a = rows.to_vec();
    let (m, n) = (a.len(), a[0].len());
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let p = (r..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c].abs() < 1e-9 {
            continue;
        }
        a.swap(p, r);
        for i in 0..m {
            if i != r {
                let f = a[i][c] / a[r][c];
                for k in 0..n {
                    a[i][k] -= f * a[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for j in start..n {
            if n - j < k - cur.len() {
                break;
            }
            cur.push(j);
            rec(j + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Minimum of `cᵀx` over all feasible basic solutions; `None` when no basis
/// is feasible. Requires full row rank and a bounded feasible set.
pub fn enumerate_bases(lp: &RandomLp) -> Option<f64> {
    let m = lp.rows.len();
    let n = lp.c.len();
    let mut best: Option<f64> = None;
    combinations(n, m, &mut |cols| {
        let a: Vec<Vec<f64>> = (0..m).map(|i| cols.iter().map(|&j| lp.rows[i][j]).collect()).collect();
        if let Some(x) = gauss_solve(a, lp.b.clone()) {
            if x.iter().all(|v| *v >= -1e-9) {
                let obj: f64 = cols.iter().zip(&x).map(|(&j, v)| lp.c[j] * v).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });
    best
}

/// Full-row-rank LP whose first row has positive entries, so the feasible
/// set is bounded. Small integer data makes degenerate vertices common.
pub fn random_lp(seed: u64, max_rows: usize, max_cols: usize) -> RandomLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = rng.random_range(2..=max_rows);
        let n = rng.random_range(m + 1..=max_cols);
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        rows.push((0..n).map(|_| rng.random_range(1..=3) as f64).collect());
        for _ in 1..m {
            rows.push((0..n).map(|_| rng.random_range(-3..=3) as f64).collect());
        }
        if rank(&rows) < m {
            continue;
        }
        let b: Vec<f64> = if rng.random_bool(0.8) {
            let x0: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0..=2) as f64 })
                .collect();
            rows.iter().map(|r| r.iter().zip(&x0).map(|(a, x)| a * x).sum()).collect()
        } else {
            (0..m).map(|_| rng.random_range(-4..=6) as f64).collect()
        };
        let c = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
        return RandomLp { rows, b, c };
    }
}

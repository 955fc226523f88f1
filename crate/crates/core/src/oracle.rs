//! Brute-force reference implementations. Everything here works on a dense
//! distance matrix and dense weight vectors and shares no code with the main
//! path beyond the input types.

use crate::metric_space::FiniteMetricSpace;

pub type Dense = Vec<Vec<f64>>;

/// All-pairs shortest paths on `n` vertices by Floyd–Warshall.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Dense {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub fn distance_matrix(space: &FiniteMetricSpace) -> Dense {
    let n = space.len();
    (0..n).map(|i| (0..n).map(|j| space.dist(i, j)).collect()).collect()
}

/// `dist(x, X \ U)`; infinite when `U` is everything.
pub fn dist_to_complement(d: &Dense, element: &[usize], x: usize) -> f64 {
    (0..d.len())
        .filter(|y| !element.contains(y))
        .map(|y| d[x][y])
        .fold(f64::INFINITY, f64::min)
}

/// Lebesgue number, multiplicity, mesh.
pub fn cover_stats(d: &Dense, elements: &[Vec<usize>]) -> (f64, usize, f64) {
    let n = d.len();
    let mut lebesgue = f64::INFINITY;
    let mut mult = 0;
    for x in 0..n {
        let mut best = 0.0f64;
        let mut count = 0;
        for e in elements {
            if e.contains(&x) {
                count += 1;
                best = best.max(dist_to_complement(d, e, x));
            }
        }
        lebesgue = lebesgue.min(best);
        mult = mult.max(count);
    }
    let mut mesh = 0.0f64;
    for e in elements {
        for &a in e {
            for &b in e {
                mesh = mesh.max(d[a][b]);
            }
        }
    }
    (lebesgue, mult, mesh)
}

/// Barycentric weights, one dense row per point.
pub fn barycentric(d: &Dense, elements: &[Vec<usize>]) -> Dense {
    (0..d.len())
        .map(|x| {
            let fs: Vec<f64> = elements
                .iter()
                .map(|e| if e.contains(&x) { dist_to_complement(d, e, x) } else { 0.0 })
                .collect();
            let inf = fs.iter().filter(|v| v.is_infinite()).count();
            if inf > 0 {
                fs.iter().map(|v| if v.is_infinite() { 1.0 / inf as f64 } else { 0.0 }).collect()
            } else {
                let total: f64 = fs.iter().sum();
                fs.iter().map(|v| v / total).collect()
            }
        })
        .collect()
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Smallest `λ` with `‖f(x) − f(y)‖₁ ≤ λ d(x, y) + c` over all pairs.
pub fn lipschitz_hat(d: &Dense, f: &Dense, c: f64) -> f64 {
    let mut best = 0.0f64;
    for x in 0..d.len() {
        for y in x + 1..d.len() {
            let excess = l1(&f[x], &f[y]) - c;
            if excess > 0.0 {
                best = best.max(excess / d[x][y]);
            }
        }
    }
    best
}

/// Largest `‖f(x) − f(y)‖₁` over pairs with `d(x, y) ≤ r`.
pub fn max_variation(d: &Dense, f: &Dense, r: f64) -> f64 {
    let mut best = 0.0f64;
    for x in 0..d.len() {
        for y in x + 1..d.len() {
            if d[x][y] <= r {
                best = best.max(l1(&f[x], &f[y]));
            }
        }
    }
    best
}

/// Fold into the `n`-skeleton on a dense vector: order the support by
/// weight (ties by index), keep the first `n + 1`, add the sum of the rest
/// (accumulated in that order from 0) to the first.
pub fn fold(w: &[f64], n: usize) -> Vec<f64> {
    let mut support: Vec<usize> = (0..w.len()).filter(|&v| w[v] > 0.0).collect();
    if support.len() <= n + 1 {
        return w.to_vec();
    }
    support.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    let mut tail = 0.0;
    for &v in &support[n + 1..] {
        tail += w[v];
    }
    let mut out = vec![0.0; w.len()];
    for &v in &support[..n + 1] {
        out[v] = w[v];
    }
    out[support[0]] += tail;
    out
}

/// Lebesgue number of the cover by open star preimages.
pub fn map_lebesgue(d: &Dense, f: &Dense) -> f64 {
    let k = f.first().map_or(0, Vec::len);
    let stars: Vec<Vec<usize>> = (0..k)
        .map(|v| (0..d.len()).filter(|&x| f[x][v] > 0.0).collect())
        .filter(|s: &Vec<usize>| !s.is_empty())
        .collect();
    cover_stats(d, &stars).0
}

/// The cutoff `α = d(x, C) / (d(x, C) + d(x, X \ Q))` where
/// `P = B(A, R)`, `C = X \ P`, `Q = B(C, R)`.
pub fn alpha(d: &Dense, a: &[usize], r: f64) -> Vec<f64> {
    let n = d.len();
    let near = |set: &[usize], x: usize| set.iter().any(|&y| d[x][y] < r);
    let p: Vec<usize> = (0..n).filter(|&x| near(a, x)).collect();
    let c: Vec<usize> = (0..n).filter(|x| !p.contains(x)).collect();
    let q: Vec<usize> = (0..n).filter(|&x| near(&c, x)).collect();
    let not_q: Vec<usize> = (0..n).filter(|x| !q.contains(x)).collect();
    let to = |set: &[usize], x: usize| set.iter().map(|&y| d[x][y]).fold(f64::INFINITY, f64::min);
    (0..n)
        .map(|x| {
            if c.is_empty() {
                return 1.0;
            }
            let dc = to(&c, x);
            let dq = to(&not_q, x);
            if dq.is_infinite() {
                0.0
            } else {
                dc / (dc + dq)
            }
        })
        .collect()
}

/// `|A Δ B| / |A ∩ B|` on tagged sets; infinite when the overlap is empty.
pub fn symdiff_ratio(a: &[(usize, u32)], b: &[(usize, u32)]) -> f64 {
    let has = |s: &[(usize, u32)], e: &(usize, u32)| s.contains(e);
    let inter = a.iter().filter(|e| has(b, e)).count();
    let sym = a.iter().filter(|e| !has(b, e)).count() + b.iter().filter(|e| !has(a, e)).count();
    if inter == 0 {
        f64::INFINITY
    } else {
        sym as f64 / inter as f64
    }
}

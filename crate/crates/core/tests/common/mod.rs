//! Independent reference implementations shared by the integration and
//! acceptance tests. They favour plain loops over speed.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use hardylab_core::curves::{edge_cost, path_length, Target};
use hardylab_core::domain::stencil::{add_move, MoveCounts};
use hardylab_core::{GridDomain, ScalarField, Weight};
use rand::Rng;

/// Brute-force maximal operator: every admissible radius is evaluated from
/// scratch by scanning the bounding square of the ball. Cells are summed in the order
/// `(di^2 + dj^2, dj, di)`, which defines the discrete ball mean.
pub fn brute_maximal(
    d: &GridDomain,
    f: &ScalarField,
    p: f64,
    w: &Weight,
    kappa: f64,
    cap: Option<f64>,
) -> Vec<f64> {
    let h = d.spacing();
    let (nx, ny) = d.shape();
    let mut out = vec![0.0; d.len()];
    for x in 0..d.len() {
        if !d.is_inside(x) {
            continue;
        }
        let limit = (kappa * d.dist(x)).min(cap.unwrap_or(f64::INFINITY));
        let mut radii = Vec::new();
        let mut j = 1usize;
        while (j as f64) * h < limit {
            radii.push(j);
            j += 1;
        }
        if radii.is_empty() {
            out[x] = f[x].abs();
            continue;
        }
        let (xi, xj) = d.coords(x);
        let mut best = 0.0f64;
        for &r in &radii {
            let mut ball: Vec<(i64, i64, i64, usize)> = Vec::new();
            // Scan the bounding square of the ball only.
            let ri = r as i64;
            let rj = if d.dim() == 2 { ri } else { 0 };
            let (i_lo, i_hi) = ((xi as i64 - ri).max(0), (xi as i64 + ri).min(nx as i64 - 1));
            let (j_lo, j_hi) = ((xj as i64 - rj).max(0), (xj as i64 + rj).min(ny as i64 - 1));
            for cj in j_lo..=j_hi {
                for ci in i_lo..=i_hi {
                    let di = ci - xi as i64;
                    let dj = cj - xj as i64;
                    let d2 = di * di + dj * dj;
                    if d2 < (r * r) as i64 {
                        ball.push((d2, dj, di, cj as usize * nx + ci as usize));
                    }
                }
            }
            ball.sort();
            let (mut num, mut den) = (0.0f64, 0.0f64);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &(_, _, _, k) in &ball {
                let wk = w.value(k);
                if wk > 0.0 {
                    let a = f[k].abs();
                    num += wk * powp(a, p);
                    den += wk;
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
            }
            let v = if den > 0.0 {
                rootp(num / den, p).clamp(lo, hi)
            } else {
                0.0
            };
            best = best.max(v);
        }
        out[x] = best;
    }
    out
}

fn powp(a: f64, p: f64) -> f64 {
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

fn rootp(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v
    } else if p == 2.0 {
        v.sqrt()
    } else {
        v.powf(1.0 / p)
    }
}

/// Exhaustive length-constrained shortest path. States are
/// `(cell, axis, diagonal, knight)` move counts; every move adds one count,
/// so the state graph is layered by the total number of moves and a single
/// forward sweep visits every feasible walk. No dominance is applied.
pub fn exhaustive_curve(
    d: &GridDomain,
    g: &ScalarField,
    x: usize,
    target: Target,
    budget: f64,
) -> Option<f64> {
    if target == Target::Cell(x) {
        return Some(0.0);
    }
    let h = d.spacing();
    let traversable = |v: usize| match target {
        Target::Complement => d.is_inside(v),
        Target::Cell(_) => true,
    };
    let reach = d.reach() * (1.0 + 1e-12);
    let mut best = f64::INFINITY;
    let mut layer: HashMap<(usize, MoveCounts), f64> = HashMap::new();
    layer.insert((x, [0; 3]), 0.0);
    while !layer.is_empty() {
        let mut next: HashMap<(usize, MoveCounts), f64> = HashMap::new();
        for (&(u, counts), &cost) in &layer {
            if target == Target::Complement {
                for (_, e) in d.closed_side_distances(u) {
                    if e <= reach && path_length(h, counts, e) <= budget {
                        best = best.min(cost + g[u] * e);
                    }
                }
                let c = d.center(u);
                for pt in d.punctures() {
                    let e = ((c[0] - pt[0]).powi(2) + (c[1] - pt[1]).powi(2)).sqrt();
                    if e <= reach && path_length(h, counts, e) <= budget {
                        best = best.min(cost + g[u] * e);
                    }
                }
            }
            for m in d.moves() {
                let Some(v) = d.neighbor(u, m) else { continue };
                let nc = add_move(counts, m.kind);
                let len = path_length(h, nc, 0.0);
                if len > budget {
                    continue;
                }
                let c2 = cost + edge_cost(g[u], g[v], m.kind.unit_length(), h);
                if !traversable(v) || target == Target::Cell(v) {
                    best = best.min(c2);
                    if !traversable(v) {
                        continue;
                    }
                }
                let e = next.entry((v, nc)).or_insert(f64::INFINITY);
                if c2 < *e {
                    *e = c2;
                }
            }
        }
        layer = next;
    }
    best.is_finite().then_some(best)
}

/// Worst ratio of 16-neighbour chamfer length to Euclidean length, by a
/// dense scan over directions in the first octant.
pub fn chamfer_ratio_scan(samples: usize) -> f64 {
    let s5 = 5f64.sqrt();
    let s2 = 2f64.sqrt();
    let mut worst = 1.0f64;
    for i in 0..=samples {
        let t = std::f64::consts::FRAC_PI_4 * i as f64 / samples as f64;
        let (x, y) = (t.cos(), t.sin());
        let len = if 2.0 * y <= x {
            (x - 2.0 * y) + s5 * y
        } else {
            s5 * (x - y) + s2 * (2.0 * y - x)
        };
        worst = worst.max(len);
    }
    worst
}

/// All-pairs path metric over inside cells by Floyd-Warshall.
pub fn floyd_warshall(d: &GridDomain) -> (Vec<usize>, Vec<Vec<f64>>) {
    let cells: Vec<usize> = d.inside_cells().to_vec();
    let n = cells.len();
    let pos: HashMap<usize, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let h = d.spacing();
    let mut m = vec![vec![f64::INFINITY; n]; n];
    for (i, &c) in cells.iter().enumerate() {
        m[i][i] = 0.0;
        for mv in d.moves() {
            if let Some(v) = d.neighbor(c, mv) {
                if let Some(&j) = pos.get(&v) {
                    let l = mv.kind.unit_length() * h;
                    if l < m[i][j] {
                        m[i][j] = l;
                    }
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let mik = m[i][k];
            if !mik.is_finite() {
                continue;
            }
            for j in 0..n {
                let v = mik + m[k][j];
                if v < m[i][j] {
                    m[i][j] = v;
                }
            }
        }
    }
    (cells, m)
}

/// Exact quasiconvexity constant of the grid graph: the largest ratio of
/// path length to Euclidean distance over all connected pairs.
pub fn exact_quasiconvexity(d: &GridDomain) -> f64 {
    let (cells, m) = floyd_warshall(d);
    let mut worst = 1.0f64;
    for i in 0..cells.len() {
        for j in 0..cells.len() {
            if i != j && m[i][j].is_finite() {
                worst = worst.max(m[i][j] / d.euclid(cells[i], cells[j]));
            }
        }
    }
    worst
}

/// Midpoint-rule integral Hardy quotient on the interval `(0, 1)` split into
/// `n` cells: `sum |u|^p / d^p` over `sum |u'|^p`, `d = min(x, 1 - x)`.
pub fn interval_hardy_quotient(
    n: usize,
    p: f64,
    u: impl Fn(f64) -> f64,
    du: impl Fn(f64) -> f64,
) -> f64 {
    let h = 1.0 / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        let d = x.min(1.0 - x);
        num += (u(x).abs() / d).powf(p);
        den += du(x).abs().powf(p);
    }
    num / den
}

/// A field of uniform values in `[-1, 1]`, zero on the complement.
pub fn random_field<R: Rng>(d: &GridDomain, rng: &mut R) -> ScalarField {
    ScalarField::from_fn(d, |k, _| {
        if d.is_inside(k) {
            rng.gen_range(-1.0..=1.0)
        } else {
            0.0
        }
    })
}

/// A field of uniform values in `[0, 1]` on every cell.
pub fn random_integrand<R: Rng>(d: &GridDomain, rng: &mut R) -> ScalarField {
    ScalarField::from_fn(d, |_, _| rng.gen_range(0.0..=1.0))
}

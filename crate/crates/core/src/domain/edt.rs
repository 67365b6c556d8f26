//! Exact squared Euclidean distance transform on a regular grid.
//!
//! Meijster, Roerdink and Hesselink's two-pass algorithm, carried out
//! entirely in integer arithmetic so the result matches brute force exactly.

/// Marker for "no feature cell anywhere".
pub const NO_FEATURE: u64 = u64::MAX;

/// Squared distance (in cell units) from every cell to the nearest feature
/// cell. Cells are indexed `j * nx + i`.
pub fn squared_edt(nx: usize, ny: usize, feature: &[bool]) -> Vec<u64> {
    assert_eq!(feature.len(), nx * ny);
    if !feature.iter().any(|&f| f) {
        return vec![NO_FEATURE; nx * ny];
    }
    let inf = (nx + ny) as i64;

    // Column pass: vertical distance to the nearest feature in the column.
    let mut g = vec![inf; nx * ny];
    for i in 0..nx {
        if feature[i] {
            g[i] = 0;
        }
        for j in 1..ny {
            let k = j * nx + i;
            g[k] = if feature[k] {
                0
            } else if g[k - nx] < inf {
                g[k - nx] + 1
            } else {
                inf
            };
        }
        for j in (0..ny.saturating_sub(1)).rev() {
            let k = j * nx + i;
            if g[k + nx] < g[k] {
                g[k] = g[k + nx] + 1;
            }
        }
    }

    // Row pass: lower envelope of the parabolas (x - i)^2 + g(i)^2.
    let mut out = vec![0u64; nx * ny];
    let mut s = vec![0i64; nx];
    let mut t = vec![0i64; nx];
    let m = nx as i64;
    for j in 0..ny {
        let row = &g[j * nx..(j + 1) * nx];
        let gi = |i: i64| row[i as usize];
        let f = |x: i64, i: i64| (x - i) * (x - i) + gi(i) * gi(i);
        let sep = |i: i64, u: i64| {
            (u * u - i * i + gi(u) * gi(u) - gi(i) * gi(i)).div_euclid(2 * (u - i))
        };
        let mut q: i64 = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..m {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let w = 1 + sep(s[q as usize], u);
                if w < m {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = w;
                }
            }
        }
        for u in (0..m).rev() {
            out[j * nx + u as usize] = f(u, s[q as usize]) as u64;
            if u == t[q as usize] {
                q -= 1;
            }
        }
    }
    out
}

/// O(N^2) reference: minimum squared distance over all feature cells.
pub fn squared_edt_brute(nx: usize, ny: usize, feature: &[bool]) -> Vec<u64> {
    let feats: Vec<(i64, i64)> = (0..nx * ny)
        .filter(|&k| feature[k])
        .map(|k| ((k % nx) as i64, (k / nx) as i64))
        .collect();
    (0..nx * ny)
        .map(|k| {
            let (i, j) = ((k % nx) as i64, (k / nx) as i64);
            feats
                .iter()
                .map(|&(a, b)| ((a - i) * (a - i) + (b - j) * (b - j)) as u64)
                .min()
                .unwrap_or(NO_FEATURE)
        })
        .collect()
}

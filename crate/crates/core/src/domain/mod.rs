//! Uniform-grid representation of open sets in one or two dimensions.

pub mod edt;
pub mod stencil;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::util::OrdF64;
use stencil::Move;

/// Sides of the bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    XMin,
    XMax,
    YMin,
    YMax,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::XMin, Side::XMax, Side::YMin, Side::YMax];
}

/// Shape primitives. Rectangles, disks and strips are unioned to form the
/// set; segments and punctures are then removed from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Rect {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    Disk {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{ min < x[axis] < max }`; a missing bound makes it a half-space.
    Strip {
        axis: usize,
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
    },
    Segment {
        from: Vec<f64>,
        to: Vec<f64>,
    },
    Puncture {
        at: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub n: usize,
    pub h: f64,
    #[serde(rename = "box")]
    pub bbox: [Vec<f64>; 2],
    pub shapes: Vec<Shape>,
    #[serde(default)]
    pub free_sides: Vec<Side>,
}

impl DomainSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| LabError::InvalidSpec(e.to_string()))
    }

    /// Axis-aligned rectangle filling its own bounding box.
    pub fn rectangle(min: [f64; 2], max: [f64; 2], h: f64) -> Self {
        DomainSpec {
            n: 2,
            h,
            bbox: [min.to_vec(), max.to_vec()],
            shapes: vec![Shape::Rect {
                min: min.to_vec(),
                max: max.to_vec(),
            }],
            free_sides: vec![],
        }
    }

    pub fn unit_square(h: f64) -> Self {
        Self::rectangle([0.0, 0.0], [1.0, 1.0], h)
    }

    /// The interval `(a, b)` filling its bounding box.
    pub fn interval(a: f64, b: f64, h: f64) -> Self {
        DomainSpec {
            n: 1,
            h,
            bbox: [vec![a], vec![b]],
            shapes: vec![Shape::Rect {
                min: vec![a],
                max: vec![b],
            }],
            free_sides: vec![],
        }
    }

    pub fn with_shape(mut self, shape: Shape) -> Self {
        self.shapes.push(shape);
        self
    }

    pub fn with_free_side(mut self, side: Side) -> Self {
        self.free_sides.push(side);
        self
    }
}

/// An open set discretized on a uniform grid.
///
/// Cells are indexed `j * nx + i`; the center of cell `(i, j)` is
/// `origin + (i + 0.5, j + 0.5) * h`. One-dimensional domains have `ny = 1`
/// and all `y` coordinates equal to zero.
#[derive(Debug, Clone)]
pub struct GridDomain {
    dim: usize,
    origin: [f64; 2],
    h: f64,
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
    dist: Vec<f64>,
    inside_cells: Vec<usize>,
    free: [bool; 4],
    punctures: Vec<[f64; 2]>,
    segments: Vec<[[f64; 2]; 2]>,
    qc_factor: Option<f64>,
}

fn point(n: usize, v: &[f64], what: &str) -> Result<[f64; 2]> {
    if v.len() != n {
        return Err(LabError::InvalidSpec(format!(
            "{what} has {} coordinates, expected {n}",
            v.len()
        )));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(LabError::InvalidSpec(format!("{what} is not finite")));
    }
    Ok([v[0], if n == 2 { v[1] } else { 0.0 }])
}

fn sq(x: f64) -> f64 {
    x * x
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    (sq(p[0] - a[0] - t * d[0]) + sq(p[1] - a[1] - t * d[1])).sqrt()
}

/// Liang-Barsky clip of a segment against a closed axis-aligned box.
fn segment_hits_box(a: [f64; 2], b: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        let d = b[k] - a[k];
        if d == 0.0 {
            if a[k] < lo[k] || a[k] > hi[k] {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo[k] - a[k]) / d, (hi[k] - a[k]) / d);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// Build the grid, its inside mask and the distance-to-complement field.
pub fn build_domain(spec: &DomainSpec) -> Result<GridDomain> {
    let n = spec.n;
    if n != 1 && n != 2 {
        return Err(LabError::InvalidSpec(format!(
            "dimension must be 1 or 2, got {n}"
        )));
    }
    let h = spec.h;
    if !(h > 0.0 && h.is_finite()) {
        return Err(LabError::InvalidSpacing(h));
    }
    let lo = point(n, &spec.bbox[0], "box min")?;
    let hi = point(n, &spec.bbox[1], "box max")?;
    let mut counts = [1usize; 2];
    for k in 0..n {
        let extent = hi[k] - lo[k];
        if !(extent > 0.0) {
            return Err(LabError::InvalidSpec("box has nonpositive extent".into()));
        }
        let cells = (extent / h).round();
        if (cells * h - extent).abs() > 1e-9 * extent {
            return Err(LabError::InvalidSpec(format!(
                "box extent {extent} is not a multiple of h = {h}"
            )));
        }
        if cells < 8.0 {
            return Err(LabError::InvalidSpec(format!(
                "need at least 8 cells per axis, got {cells}"
            )));
        }
        counts[k] = cells as usize;
    }
    let (nx, ny) = (counts[0], counts[1]);
    let mut free = [false; 4];
    for s in &spec.free_sides {
        if n == 1 && matches!(s, Side::YMin | Side::YMax) {
            return Err(LabError::InvalidSpec("y sides do not exist in 1D".into()));
        }
        free[*s as usize] = true;
    }

    let mut punctures = Vec::new();
    let mut segments = Vec::new();
    for shape in &spec.shapes {
        match shape {
            Shape::Puncture { at } => punctures.push(point(n, at, "puncture")?),
            Shape::Segment { from, to } => segments.push([
                point(n, from, "segment start")?,
                point(n, to, "segment end")?,
            ]),
            Shape::Disk { radius, .. } if !(*radius > 0.0) => {
                return Err(LabError::InvalidSpec("disk radius must be positive".into()))
            }
            Shape::Strip { axis, .. } if *axis >= n => {
                return Err(LabError::InvalidSpec(format!(
                    "strip axis {axis} out of range"
                )))
            }
            _ => {}
        }
    }

    let center = |idx: usize| -> [f64; 2] {
        let (i, j) = (idx % nx, idx / nx);
        let y = if n == 2 {
            lo[1] + (j as f64 + 0.5) * h
        } else {
            0.0
        };
        [lo[0] + (i as f64 + 0.5) * h, y]
    };

    let mut inside = vec![false; nx * ny];
    for (idx, cell) in inside.iter_mut().enumerate() {
        let c = center(idx);
        let mut covered = false;
        for shape in &spec.shapes {
            covered |= match shape {
                Shape::Rect { min, max } => {
                    let (a, b) = (point(n, min, "rect min")?, point(n, max, "rect max")?);
                    (0..n).all(|k| a[k] < c[k] && c[k] < b[k])
                }
                Shape::Disk { center: p, radius } => {
                    let p = point(n, p, "disk center")?;
                    sq(c[0] - p[0]) + sq(c[1] - p[1]) < radius * radius
                }
                Shape::Strip { axis, min, max } => {
                    min.map_or(true, |m| c[*axis] > m) && max.map_or(true, |m| c[*axis] < m)
                }
                _ => false,
            };
        }
        if !covered {
            continue;
        }
        let half = 0.5 * h;
        let (clo, chi) = if n == 2 {
            ([c[0] - half, c[1] - half], [c[0] + half, c[1] + half])
        } else {
            ([c[0] - half, 0.0], [c[0] + half, 0.0])
        };
        if segments
            .iter()
            .any(|s| segment_hits_box(s[0], s[1], clo, chi))
        {
            continue;
        }
        if punctures.iter().any(|p| p[0] == c[0] && p[1] == c[1]) {
            continue;
        }
        *cell = true;
    }

    let inside_cells: Vec<usize> = (0..nx * ny).filter(|&k| inside[k]).collect();
    if inside_cells.is_empty() {
        return Err(LabError::EmptyDomain);
    }
    let has_closed_side = (0..2 * n).any(|s| !free[s]);
    if inside_cells.len() == nx * ny && !has_closed_side && punctures.is_empty() {
        return Err(LabError::EmptyComplement);
    }

    let feature: Vec<bool> = inside.iter().map(|&b| !b).collect();
    let k2 = edt::squared_edt(nx, ny, &feature);
    if nx * ny <= 4096 && k2 != edt::squared_edt_brute(nx, ny, &feature) {
        return Err(LabError::Internal(
            "distance transform disagrees with brute force".into(),
        ));
    }

    let mut dist = vec![0.0; nx * ny];
    for &idx in &inside_cells {
        let (i, j) = (idx % nx, idx / nx);
        let c = center(idx);
        let mut d = f64::INFINITY;
        if k2[idx] != edt::NO_FEATURE {
            d = h * (k2[idx] as f64).sqrt();
        }
        let side_units = [
            i as f64 + 0.5,
            (nx - i) as f64 - 0.5,
            j as f64 + 0.5,
            (ny - j) as f64 - 0.5,
        ];
        for s in 0..2 * n {
            if !free[s] {
                d = d.min(side_units[s] * h);
            }
        }
        for p in &punctures {
            d = d.min((sq(c[0] - p[0]) + sq(c[1] - p[1])).sqrt());
        }
        for s in &segments {
            d = d.min(point_segment_distance(c, s[0], s[1]));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(LabError::Internal(format!("cell {idx} has distance {d}")));
        }
        dist[idx] = d;
    }

    Ok(GridDomain {
        dim: n,
        origin: lo,
        h,
        nx,
        ny,
        inside,
        dist,
        inside_cells,
        free,
        punctures,
        segments,
        qc_factor: None,
    })
}

impl GridDomain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Upper corner of the bounding box.
    pub fn extent(&self) -> [f64; 2] {
        let y = if self.dim == 2 {
            self.origin[1] + self.ny as f64 * self.h
        } else {
            0.0
        };
        [self.origin[0] + self.nx as f64 * self.h, y]
    }

    /// Grid shape `(nx, ny)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lebesgue measure of one cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        let y = if self.dim == 2 {
            self.origin[1] + (j as f64 + 0.5) * self.h
        } else {
            0.0
        };
        [self.origin[0] + (i as f64 + 0.5) * self.h, y]
    }

    /// Cell whose square contains `p`, if any.
    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        let fi = ((p[0] - self.origin[0]) / self.h).floor();
        let fj = if self.dim == 2 {
            ((p[1] - self.origin[1]) / self.h).floor()
        } else {
            0.0
        };
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    /// Inside cells in raster order.
    pub fn inside_cells(&self) -> &[usize] {
        &self.inside_cells
    }

    pub fn dist(&self, idx: usize) -> f64 {
        self.dist[idx]
    }

    pub fn dist_field(&self) -> &[f64] {
        &self.dist
    }

    pub fn max_dist(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    pub fn is_free(&self, side: Side) -> bool {
        self.free[side as usize]
    }

    pub fn punctures(&self) -> &[[f64; 2]] {
        &self.punctures
    }

    pub fn segments(&self) -> &[[[f64; 2]; 2]] {
        &self.segments
    }

    pub fn qc_factor(&self) -> Option<f64> {
        self.qc_factor
    }

    pub fn with_qc_factor(mut self, qc: f64) -> Self {
        self.qc_factor = Some(qc);
        self
    }

    pub fn euclid(&self, a: usize, b: usize) -> f64 {
        let (ca, cb) = (self.center(a), self.center(b));
        (sq(ca[0] - cb[0]) + sq(ca[1] - cb[1])).sqrt()
    }

    pub fn moves(&self) -> &'static [Move] {
        stencil::moves(self.dim)
    }

    /// Longest stencil move in length units.
    pub fn reach(&self) -> f64 {
        stencil::reach(self.dim) * self.h
    }

    pub fn neighbor(&self, idx: usize, m: &Move) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let ni = i as i64 + m.di;
        let nj = j as i64 + m.dj;
        if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
            return None;
        }
        Some(self.index(ni as usize, nj as usize))
    }

    /// Distances (in length units) from the cell center to each closed box
    /// side, as `(side, distance)` pairs.
    pub fn closed_side_distances(&self, idx: usize) -> Vec<(Side, f64)> {
        let (i, j) = self.coords(idx);
        let units = [
            i as f64 + 0.5,
            (self.nx - i) as f64 - 0.5,
            j as f64 + 0.5,
            (self.ny - j) as f64 - 0.5,
        ];
        Side::ALL[..2 * self.dim]
            .iter()
            .filter(|s| !self.free[**s as usize])
            .map(|&s| (s, units[s as usize] * self.h))
            .collect()
    }

    /// Shortest 16-neighbour path lengths (length units) from `src` through
    /// inside cells only. Unreachable cells are `+inf`.
    pub fn path_metric_from(&self, src: usize) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; self.len()];
        if !self.inside[src] {
            return d;
        }
        d[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((OrdF64(0.0), src)));
        while let Some(Reverse((OrdF64(du), u))) = heap.pop() {
            if du > d[u] {
                continue;
            }
            for m in self.moves() {
                if let Some(v) = self.neighbor(u, m) {
                    if !self.inside[v] {
                        continue;
                    }
                    let nd = du + m.kind.unit_length() * self.h;
                    if nd < d[v] {
                        d[v] = nd;
                        heap.push(Reverse((OrdF64(nd), v)));
                    }
                }
            }
        }
        d
    }

    /// Distance field as CSV with header `x,y,dist`.
    pub fn dist_csv(&self) -> String {
        let mut out = String::from("x,y,dist\n");
        for idx in 0..self.len() {
            let c = self.center(idx);
            let _ = writeln!(out, "{},{},{}", c[0], c[1], self.dist[idx]);
        }
        out
    }
}

/// Largest sampled ratio of grid path length to Euclidean distance over
/// pairs of inside cells. Pairs in different components are skipped.
pub fn quasiconvexity_estimate<R: Rng + ?Sized>(
    domain: &GridDomain,
    sample_count: usize,
    rng: &mut R,
) -> f64 {
    let cells = domain.inside_cells();
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for _ in 0..sample_count {
        let a = cells[rng.gen_range(0..cells.len())];
        let b = cells[rng.gen_range(0..cells.len())];
        if a != b {
            by_source.entry(a).or_default().push(b);
        }
    }
    let mut ratio = 1.0f64;
    for (src, targets) in by_source {
        let metric = domain.path_metric_from(src);
        for t in targets {
            if metric[t].is_finite() {
                ratio = ratio.max(metric[t] / domain.euclid(src, t));
            }
        }
    }
    ratio
}

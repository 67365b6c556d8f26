//! Length-constrained minimum line integrals over grid curves.
//!
//! Curves are 16-neighbour cell paths. A curve towards the complement runs
//! through inside cells and ends by
//! - stepping into a complement cell (it ends at that cell's center),
//! - a perpendicular segment to a closed box side within one stencil reach,
//! - a straight segment to a puncture within one stencil reach.
//!
//! A curve between two cells may pass through any grid cell.
//!
//! Edge integrals use the trapezoid rule. Exit segments use the value of `g`
//! at the cell they leave from. Lengths are kept as integer move counts plus
//! a terminal segment, so the length of a path does not depend on the order
//! in which it was accumulated.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::domain::stencil::{add_move, units_length, MoveCounts, MoveKind};
use crate::domain::GridDomain;
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::util::{finite_or_null, OrdF64};

/// Relative tolerance on lengths used by label dominance.
pub const DOMINANCE_EPS: f64 = 1e-12;
/// Relative slack on the remaining-length bound used for pruning.
const PRUNE_SLACK: f64 = 1e-9;
/// Relative guard applied to Lagrangian values before they become bounds.
const DUAL_GUARD: f64 = 1e-12;

/// Trapezoid integral of `g` along one move.
#[inline]
pub fn edge_cost(gu: f64, gv: f64, unit_length: f64, h: f64) -> f64 {
    0.5 * (gu + gv) * (unit_length * h)
}

/// Length of a path with the given move counts and terminal segment.
#[inline]
pub fn path_length(h: f64, counts: MoveCounts, extra: f64) -> f64 {
    h * units_length(counts) + extra
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Complement,
    Cell(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveTarget {
    Complement,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveResult {
    pub x: Vec<f64>,
    pub target: CurveTarget,
    #[serde(with = "finite_or_null")]
    pub budget: f64,
    pub length: f64,
    #[serde(with = "finite_or_null")]
    pub integral: f64,
    pub lower_bound: f64,
    pub feasible: bool,
    pub polyline: Vec<Vec<f64>>,
    /// Axis, diagonal and knight move counts of the returned path.
    pub moves: MoveCounts,
}

#[derive(Debug, Clone, Copy)]
enum StepTo {
    Node(usize),
    Terminal([f64; 2]),
}

#[derive(Debug, Clone, Copy)]
struct Step {
    to: StepTo,
    kind: Option<MoveKind>,
    extra: f64,
    cost: f64,
}

impl Step {
    fn length(&self, h: f64) -> f64 {
        match self.kind {
            Some(k) => k.unit_length() * h,
            None => self.extra,
        }
    }
}

struct CurveGraph<'a> {
    domain: &'a GridDomain,
    g: &'a [f64],
    target: Target,
    h: f64,
}

impl<'a> CurveGraph<'a> {
    fn new(domain: &'a GridDomain, g: &'a ScalarField, target: Target) -> Result<Self> {
        g.check_len(domain, "integrand")?;
        if let Some((k, v)) = g
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
        {
            return Err(LabError::param(format!("integrand value {v} at cell {k}")));
        }
        if let Target::Cell(y) = target {
            if y >= domain.len() || !domain.is_inside(y) {
                return Err(LabError::NotInside(y));
            }
        }
        Ok(CurveGraph {
            domain,
            g: g.values(),
            target,
            h: domain.spacing(),
        })
    }

    fn traversable(&self, v: usize) -> bool {
        match self.target {
            Target::Complement => self.domain.is_inside(v),
            Target::Cell(_) => true,
        }
    }

    fn steps(&self, u: usize, out: &mut Vec<Step>) {
        out.clear();
        let d = self.domain;
        for m in d.moves() {
            let Some(v) = d.neighbor(u, m) else { continue };
            let cost = edge_cost(self.g[u], self.g[v], m.kind.unit_length(), self.h);
            let to = if self.traversable(v) {
                StepTo::Node(v)
            } else {
                StepTo::Terminal(d.center(v))
            };
            out.push(Step {
                to,
                kind: Some(m.kind),
                extra: 0.0,
                cost,
            });
        }
        if self.target != Target::Complement {
            return;
        }
        let reach = d.reach() * (1.0 + 1e-12);
        let c = d.center(u);
        let ext = d.extent();
        let o = d.origin();
        for (side, e) in d.closed_side_distances(u) {
            if e > reach {
                continue;
            }
            use crate::domain::Side::*;
            let end = match side {
                XMin => [o[0], c[1]],
                XMax => [ext[0], c[1]],
                YMin => [c[0], o[1]],
                YMax => [c[0], ext[1]],
            };
            out.push(Step {
                to: StepTo::Terminal(end),
                kind: None,
                extra: e,
                cost: self.g[u] * e,
            });
        }
        for p in d.punctures() {
            let e = ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)).sqrt();
            if e <= reach {
                out.push(Step {
                    to: StepTo::Terminal(*p),
                    kind: None,
                    extra: e,
                    cost: self.g[u] * e,
                });
            }
        }
    }

    fn is_target_node(&self, u: usize) -> bool {
        self.target == Target::Cell(u)
    }

    /// Minimum of `weight(cost, length)` over paths from each node to the
    /// target. The graph is symmetric, so this is one multi-source run.
    fn to_target(&self, weight: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let n = self.domain.len();
        let mut best = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        let mut steps = Vec::new();
        match self.target {
            Target::Cell(y) => best[y] = 0.0,
            Target::Complement => {
                for &u in self.domain.inside_cells() {
                    self.steps(u, &mut steps);
                    for s in &steps {
                        if let StepTo::Terminal(_) = s.to {
                            best[u] = best[u].min(weight(s.cost, s.length(self.h)));
                        }
                    }
                }
            }
        }
        for (u, &b) in best.iter().enumerate() {
            if b.is_finite() {
                heap.push(Reverse((OrdF64(b), u)));
            }
        }
        while let Some(Reverse((OrdF64(du), u))) = heap.pop() {
            if du > best[u] {
                continue;
            }
            self.steps(u, &mut steps);
            for s in &steps {
                if let StepTo::Node(v) = s.to {
                    let nv = du + weight(s.cost, s.length(self.h));
                    if nv < best[v] {
                        best[v] = nv;
                        heap.push(Reverse((OrdF64(nv), v)));
                    }
                }
            }
        }
        best
    }
}

fn point_vec(domain: &GridDomain, p: [f64; 2]) -> Vec<f64> {
    p[..domain.dim()].to_vec()
}

fn target_of(domain: &GridDomain, target: Target) -> CurveTarget {
    match target {
        Target::Complement => CurveTarget::Complement,
        Target::Cell(y) => CurveTarget::Point(point_vec(domain, domain.center(y))),
    }
}

fn validate_start(domain: &GridDomain, x: usize, nu: f64) -> Result<()> {
    if x >= domain.len() || !domain.is_inside(x) {
        return Err(LabError::NotInside(x));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(LabError::param(format!("nu must be positive, got {nu}")));
    }
    Ok(())
}

fn budget_for(domain: &GridDomain, x: usize, target: Target, nu: f64) -> f64 {
    match target {
        Target::Complement => nu * domain.dist(x),
        Target::Cell(y) => nu * domain.euclid(x, y),
    }
}

/// A finished path: node sequence, optional terminal step.
struct Path {
    nodes: Vec<usize>,
    counts: MoveCounts,
    extra: f64,
    end: Option<[f64; 2]>,
    cost: f64,
}

impl Path {
    fn into_result(
        self,
        domain: &GridDomain,
        target: Target,
        budget: f64,
        integral: f64,
        lower_bound: f64,
        feasible: bool,
    ) -> CurveResult {
        let mut polyline: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|&k| point_vec(domain, domain.center(k)))
            .collect();
        if let Some(e) = self.end {
            polyline.push(point_vec(domain, e));
        }
        CurveResult {
            x: point_vec(domain, domain.center(self.nodes[0])),
            target: target_of(domain, target),
            budget,
            length: path_length(domain.spacing(), self.counts, self.extra),
            integral,
            lower_bound,
            feasible,
            polyline,
            moves: self.counts,
        }
    }
}

/// Recompute cost and counts of a node path in path order.
fn trace(graph: &CurveGraph, nodes: Vec<usize>, last: Option<Step>) -> Path {
    let d = graph.domain;
    let mut counts = [0u32; 3];
    let mut cost = 0.0;
    for w in nodes.windows(2) {
        let (u, v) = (w[0], w[1]);
        let (ui, uj) = d.coords(u);
        let (vi, vj) = d.coords(v);
        let m = d
            .moves()
            .iter()
            .find(|m| ui as i64 + m.di == vi as i64 && uj as i64 + m.dj == vj as i64)
            .expect("consecutive path nodes are stencil neighbours");
        counts = add_move(counts, m.kind);
        cost += edge_cost(graph.g[u], graph.g[v], m.kind.unit_length(), graph.h);
    }
    let (mut extra, mut end) = (0.0, None);
    if let Some(s) = last {
        if let Some(k) = s.kind {
            counts = add_move(counts, k);
        }
        extra = s.extra;
        cost += s.cost;
        if let StepTo::Terminal(p) = s.to {
            end = Some(p);
        }
    }
    Path {
        nodes,
        counts,
        extra,
        end,
        cost,
    }
}

#[derive(Debug, Clone, Copy)]
struct Label {
    node: usize,
    cost: f64,
    len: f64,
    counts: MoveCounts,
    pred: u32,
    last: Option<Step>,
}

const NO_PRED: u32 = u32::MAX;
const TERMINAL: usize = usize::MAX;

fn nodes_of(labels: &[Label], mut id: u32) -> Vec<usize> {
    let mut nodes = Vec::new();
    while id != NO_PRED {
        let l = &labels[id as usize];
        if l.node != TERMINAL {
            nodes.push(l.node);
        }
        id = l.pred;
    }
    nodes.reverse();
    nodes
}

/// Unconstrained minimum-length path, used to describe infeasible queries.
fn shortest_length_path(graph: &CurveGraph, x: usize) -> Path {
    let lagr = dijkstra_weighted(graph, x, |_, len| len);
    lagr.expect("a target is reachable from every inside cell")
}

/// Exact constrained minimum by label setting.
pub fn solve(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    target: Target,
    budget: f64,
) -> Result<CurveResult> {
    let graph = CurveGraph::new(domain, g, target)?;
    if x >= domain.len() || !domain.is_inside(x) {
        return Err(LabError::NotInside(x));
    }
    let h = graph.h;
    if target == Target::Cell(x) {
        let p = Path {
            nodes: vec![x],
            counts: [0; 3],
            extra: 0.0,
            end: None,
            cost: 0.0,
        };
        return Ok(p.into_result(domain, target, budget, 0.0, 0.0, true));
    }
    let lb_len = graph.to_target(|_, len| len);
    if !(lb_len[x] <= budget * (1.0 + PRUNE_SLACK)) {
        let lower = graph.to_target(|c, _| c)[x];
        let p = shortest_length_path(&graph, x);
        return Ok(p.into_result(domain, target, budget, f64::INFINITY, lower, false));
    }

    let mut labels: Vec<Label> = vec![Label {
        node: x,
        cost: 0.0,
        len: 0.0,
        counts: [0; 3],
        pred: NO_PRED,
        last: None,
    }];
    let mut dead = vec![false];
    let mut front: Vec<Vec<u32>> = vec![Vec::new(); domain.len()];
    front[x].push(0);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), OrdF64(0.0), 0u32)));
    let mut incumbent = f64::INFINITY;
    let mut steps = Vec::new();
    let limit = budget * (1.0 + PRUNE_SLACK);

    while let Some(Reverse((_, _, id))) = heap.pop() {
        if dead[id as usize] {
            continue;
        }
        let lab = labels[id as usize];
        if lab.node == TERMINAL || graph.is_target_node(lab.node) {
            let p = trace(
                &graph,
                nodes_of(&labels, id),
                lab.last.filter(|_| lab.node == TERMINAL),
            );
            let integral = p.cost;
            return Ok(p.into_result(domain, target, budget, integral, integral, true));
        }
        graph.steps(lab.node, &mut steps);
        for s in &steps {
            let counts = match s.kind {
                Some(k) => add_move(lab.counts, k),
                None => lab.counts,
            };
            let cost = lab.cost + s.cost;
            if cost > incumbent {
                continue;
            }
            match s.to {
                StepTo::Terminal(_) => {
                    let len = path_length(h, counts, s.extra);
                    if len > budget {
                        continue;
                    }
                    incumbent = incumbent.min(cost);
                    labels.push(Label {
                        node: TERMINAL,
                        cost,
                        len,
                        counts,
                        pred: id,
                        last: Some(*s),
                    });
                    dead.push(false);
                    let nid = (labels.len() - 1) as u32;
                    heap.push(Reverse((OrdF64(cost), OrdF64(len), nid)));
                }
                StepTo::Node(v) => {
                    let len = path_length(h, counts, 0.0);
                    if len + lb_len[v] > limit {
                        continue;
                    }
                    if graph.is_target_node(v) {
                        if len > budget {
                            continue;
                        }
                        incumbent = incumbent.min(cost);
                    }
                    let tol = len * DOMINANCE_EPS;
                    if front[v].iter().any(|&e| {
                        let e = &labels[e as usize];
                        e.cost <= cost && e.len <= len + tol
                    }) {
                        continue;
                    }
                    front[v].retain(|&e| {
                        let el = &labels[e as usize];
                        let dominated = cost <= el.cost && len <= el.len + el.len * DOMINANCE_EPS;
                        if dominated {
                            dead[e as usize] = true;
                        }
                        !dominated
                    });
                    labels.push(Label {
                        node: v,
                        cost,
                        len,
                        counts,
                        pred: id,
                        last: None,
                    });
                    dead.push(false);
                    let nid = (labels.len() - 1) as u32;
                    front[v].push(nid);
                    heap.push(Reverse((OrdF64(cost), OrdF64(len), nid)));
                }
            }
        }
    }
    // The remaining-length bound said a feasible path exists, but rounding
    // in the bound disagreed with the canonical lengths.
    let lower = graph.to_target(|c, _| c)[x];
    let p = shortest_length_path(&graph, x);
    Ok(p.into_result(domain, target, budget, f64::INFINITY, lower, false))
}

/// `inf` of the line integral of `g` over curves from `x` to the complement
/// with length at most `nu * dist(x)`.
pub fn curve_infimum(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    nu: f64,
) -> Result<CurveResult> {
    validate_start(domain, x, nu)?;
    solve(
        domain,
        g,
        x,
        Target::Complement,
        budget_for(domain, x, Target::Complement, nu),
    )
}

/// Same as [`curve_infimum`] for curves from `x` to `y` with length at most
/// `nu * |x - y|`.
pub fn connect_pair(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    y: usize,
    nu: f64,
) -> Result<CurveResult> {
    validate_start(domain, x, nu)?;
    let t = Target::Cell(y);
    solve(domain, g, x, t, budget_for(domain, x, t, nu))
}

/// Dijkstra from `x` on `weight(cost, length)`; returns the best path.
fn dijkstra_weighted(
    graph: &CurveGraph,
    x: usize,
    weight: impl Fn(f64, f64) -> f64,
) -> Option<Path> {
    let n = graph.domain.len();
    let h = graph.h;
    let mut best = vec![f64::INFINITY; n];
    let mut blen = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    best[x] = 0.0;
    blen[x] = 0.0;
    heap.push(Reverse((OrdF64(0.0), OrdF64(0.0), x)));
    let mut term: Option<(f64, f64, usize, Step)> = None;
    let mut steps = Vec::new();
    while let Some(Reverse((OrdF64(du), OrdF64(lu), u))) = heap.pop() {
        if du > best[u] || (du == best[u] && lu > blen[u]) {
            continue;
        }
        if let Some((tv, _, _, _)) = term {
            if du > tv {
                break;
            }
        }
        if graph.is_target_node(u) {
            let nodes = walk(&pred, u);
            return Some(trace(graph, nodes, None));
        }
        graph.steps(u, &mut steps);
        for s in &steps {
            let sl = s.length(h);
            let nv = du + weight(s.cost, sl);
            let nl = lu + sl;
            match s.to {
                StepTo::Terminal(_) => {
                    let better = match term {
                        None => true,
                        Some((tv, tl, _, _)) => nv < tv || (nv == tv && nl < tl),
                    };
                    if better {
                        term = Some((nv, nl, u, *s));
                    }
                }
                StepTo::Node(v) => {
                    if nv < best[v] || (nv == best[v] && nl < blen[v]) {
                        best[v] = nv;
                        blen[v] = nl;
                        pred[v] = u;
                        heap.push(Reverse((OrdF64(nv), OrdF64(nl), v)));
                    }
                }
            }
        }
    }
    let (_, _, u, s) = term?;
    Some(trace(graph, walk(&pred, u), Some(s)))
}

fn walk(pred: &[usize], mut u: usize) -> Vec<usize> {
    let mut nodes = vec![u];
    while pred[u] != usize::MAX {
        u = pred[u];
        nodes.push(u);
    }
    nodes.reverse();
    nodes
}

/// `min over paths of (integral + lambda * length)` from `x` to the target.
pub fn lagrangian_value(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    target: Target,
    lambda: f64,
) -> Result<f64> {
    let graph = CurveGraph::new(domain, g, target)?;
    if x >= domain.len() || !domain.is_inside(x) {
        return Err(LabError::NotInside(x));
    }
    if target == Target::Cell(x) {
        return Ok(0.0);
    }
    Ok(graph.to_target(|c, l| c + lambda * l)[x])
}

/// Lagrangian sweep: best feasible primal path over the `lambdas` and the
/// dual bound `max(0, max_lambda value(lambda) - lambda * budget)`.
pub fn solve_lagrangian(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    target: Target,
    budget: f64,
    lambdas: &[f64],
) -> Result<CurveResult> {
    let graph = CurveGraph::new(domain, g, target)?;
    if x >= domain.len() || !domain.is_inside(x) {
        return Err(LabError::NotInside(x));
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(LabError::param(
            "lambda grid must be nonempty and nonnegative",
        ));
    }
    if target == Target::Cell(x) {
        return solve(domain, g, x, target, budget);
    }
    let h = graph.h;
    let mut dual = 0.0f64;
    let mut primal: Option<Path> = None;
    let mut shortest: Option<Path> = None;
    for &lambda in lambdas {
        let value = graph.to_target(|c, l| c + lambda * l)[x];
        dual = dual.max(value * (1.0 - DUAL_GUARD) - lambda * budget);
        let Some(p) = dijkstra_weighted(&graph, x, |c, l| c + lambda * l) else {
            continue;
        };
        let len = path_length(h, p.counts, p.extra);
        if len <= budget {
            if primal.as_ref().map_or(true, |q| p.cost < q.cost) {
                primal = Some(p);
            }
        } else if shortest
            .as_ref()
            .map_or(true, |q| len < path_length(h, q.counts, q.extra))
        {
            shortest = Some(p);
        }
    }
    match primal {
        Some(p) => {
            let integral = p.cost;
            Ok(p.into_result(domain, target, budget, integral, dual, true))
        }
        None => {
            let p = shortest.unwrap_or_else(|| shortest_length_path(&graph, x));
            Ok(p.into_result(domain, target, budget, f64::INFINITY, dual, false))
        }
    }
}

pub fn curve_infimum_lagrangian(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    nu: f64,
    lambdas: &[f64],
) -> Result<CurveResult> {
    validate_start(domain, x, nu)?;
    let t = Target::Complement;
    solve_lagrangian(domain, g, x, t, budget_for(domain, x, t, nu), lambdas)
}

pub fn connect_pair_lagrangian(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    y: usize,
    nu: f64,
    lambdas: &[f64],
) -> Result<CurveResult> {
    validate_start(domain, x, nu)?;
    let t = Target::Cell(y);
    solve_lagrangian(domain, g, x, t, budget_for(domain, x, t, nu), lambdas)
}

/// Length of the shortest grid curve from `x` to the target, ignoring `g`.
pub fn graph_distance(domain: &GridDomain, x: usize, target: Target) -> Result<f64> {
    let zero = ScalarField::zeros(domain);
    let graph = CurveGraph::new(domain, &zero, target)?;
    Ok(graph.to_target(|_, l| l)[x])
}

/// Minimum line integral with no length constraint. `budget` is reported as
/// infinite and `feasible` is always true.
pub fn unconstrained_minimum(
    domain: &GridDomain,
    g: &ScalarField,
    x: usize,
    target: Target,
) -> Result<CurveResult> {
    let graph = CurveGraph::new(domain, g, target)?;
    if x >= domain.len() || !domain.is_inside(x) {
        return Err(LabError::NotInside(x));
    }
    let p = if target == Target::Cell(x) {
        Path {
            nodes: vec![x],
            counts: [0; 3],
            extra: 0.0,
            end: None,
            cost: 0.0,
        }
    } else {
        dijkstra_weighted(&graph, x, |c, _| c)
            .ok_or_else(|| LabError::Internal("no path to the target".into()))?
    };
    let integral = p.cost;
    Ok(p.into_result(domain, target, f64::INFINITY, integral, integral, true))
}

/// A default sweep `lambda = 0` and `2^k` for `k` in `-8..=8`.
pub fn default_lambda_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((-8..=8).map(|k| 2f64.powi(k)))
        .collect()
}

//! The loop measure `μ(l) = (1/mult(l)) ∏ P` and its truncated enumeration.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::freegroup::{canonical_class, BasedLoop, GeodesicClass, HomotopyClass, Letter, Word};
use crate::graph::{GraphModel, SpanningTreeFrame};
use crate::linalg::real_log_det;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopWeight {
    /// `(1/n) ∏ P` for the based loop.
    pub based: f64,
    /// `(1/mult) ∏ P` for its shift orbit.
    pub unrooted: f64,
}

pub fn path_product(l: &BasedLoop, g: &GraphModel) -> f64 {
    l.steps().map(|(x, y)| g.p(x, y)).product()
}

pub fn loop_weight(l: &BasedLoop, g: &GraphModel) -> LoopWeight {
    let prod = path_product(l, g);
    LoopWeight {
        based: prod / l.len() as f64,
        unrooted: prod / l.multiplicity() as f64,
    }
}

fn require_massive(g: &GraphModel) -> Result<f64> {
    let rho = g.spectral_radius();
    if !g.is_killed() || rho >= 1.0 - 1e-14 {
        return Err(Error::Massless);
    }
    Ok(rho)
}

/// `-log det(I - P)`.
pub fn total_mass(g: &GraphModel) -> Result<f64> {
    require_massive(g)?;
    let n = g.vertex_count();
    let a = DMatrix::identity(n, n) - g.transition();
    let ld = real_log_det(&a);
    if ld.is_singular() || ld.phase.re <= 0.0 {
        return Err(Error::Massless);
    }
    Ok(-ld.log_abs)
}

/// Certified bound `|X| ρ^N / (N (1-ρ))` on the mass of loops longer than `N`.
pub fn tail_bound(g: &GraphModel, n: usize) -> Result<f64> {
    let rho = require_massive(g)?;
    let n = n.max(1) as f64;
    Ok(g.vertex_count() as f64 * rho.powf(n) / (n * (1.0 - rho)))
}

/// Smallest `N ≥ 2` whose tail bound is at most `eps`.
pub fn truncation_length(g: &GraphModel, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("tail tolerance must be positive, got {eps}")));
    }
    require_massive(g)?;
    let mut n = 2;
    while tail_bound(g, n)? > eps {
        n += 1;
        if n > 1_000_000 {
            return Err(Error::Config("tail tolerance unreachable".into()));
        }
    }
    Ok(n)
}

/// Powers `P^0, …, P^N`.
pub fn transition_powers(g: &GraphModel, n_max: usize) -> Vec<DMatrix<f64>> {
    let p = g.transition();
    let n = g.vertex_count();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(DMatrix::identity(n, n));
    for k in 1..=n_max {
        let next = &out[k - 1] * p;
        out.push(next);
    }
    out
}

/// `t[n] = (1/n) tr(P^n)` for `1 ≤ n ≤ N`; `t[0] = 0`.
pub fn trace_series(g: &GraphModel, n_max: usize) -> Vec<f64> {
    let powers = transition_powers(g, n_max);
    let mut out = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        out[n] = powers[n].trace() / n as f64;
    }
    out
}

/// μ-mass of all loops of length at most `n_max`, sorted by free homotopy class.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub n_max: usize,
    pub classes: BTreeMap<GeodesicClass, f64>,
    pub contractible: f64,
    /// `by_length[n]` is the mass of loops of length `n`.
    pub by_length: Vec<f64>,
    /// Bound on the omitted mass; infinite for a massless chain.
    pub tail_bound: f64,
}

impl Enumeration {
    pub fn class_mass(&self, c: &GeodesicClass) -> f64 {
        self.classes.get(c).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.contractible + self.classes.values().sum::<f64>()
    }
}

// Node of the tree of non-backtracking paths from a fixed start vertex.
struct PathNode {
    vertex: usize,
    parent: u32,
    children: Vec<(usize, u32)>,
}

const ROOT: u32 = 0;
const NO_PARENT: u32 = u32::MAX;

/// Exact (up to rounding) sum of μ over loops of length `≤ n_max`, by class.
///
/// For each start `x` the walk is tracked through the tree of reduced paths
/// from `x`: a step back to the parent vertex erases the last edge, any other
/// step descends. A walk that returns to `x` ends at the node of its reduced
/// based loop, whose cyclic reduction is the free homotopy class. Summing the
/// based weights `(1/n)∏P` over every start and rotation gives `μ`.
pub fn enumerate_measure(
    g: &GraphModel,
    frame: &SpanningTreeFrame,
    n_max: usize,
) -> Result<Enumeration> {
    let tail = tail_bound(g, n_max).unwrap_or(f64::INFINITY);
    let mut classes: BTreeMap<GeodesicClass, f64> = BTreeMap::new();
    let mut contractible = 0.0;
    let mut by_length = vec![0.0; n_max + 1];
    let dist = all_distances(g);

    for x in 0..g.vertex_count() {
        let mut nodes = vec![PathNode {
            vertex: x,
            parent: NO_PARENT,
            children: Vec::new(),
        }];
        let mut class_cache: HashMap<u32, HomotopyClass> = HashMap::new();
        let mut current: Vec<(u32, f64)> = vec![(ROOT, 1.0)];
        let mut acc: Vec<f64> = Vec::new();
        let mut touched: Vec<u32> = Vec::new();

        for n in 1..=n_max {
            let remaining = n_max - n;
            for &(id, w) in &current {
                let v = nodes[id as usize].vertex;
                let parent = nodes[id as usize].parent;
                let parent_vertex = (parent != NO_PARENT).then(|| nodes[parent as usize].vertex);
                for &y in g.neighbors(v) {
                    if dist[y][x] > remaining {
                        continue;
                    }
                    let next = if Some(y) == parent_vertex {
                        parent
                    } else {
                        child(&mut nodes, id, y)
                    };
                    let k = next as usize;
                    if acc.len() <= k {
                        acc.resize(nodes.len().max(k + 1), 0.0);
                    }
                    if acc[k] == 0.0 {
                        touched.push(next);
                    }
                    acc[k] += w * g.p(v, y);
                }
            }
            current.clear();
            for &id in &touched {
                let w = std::mem::take(&mut acc[id as usize]);
                if w == 0.0 {
                    continue;
                }
                current.push((id, w));
                if nodes[id as usize].vertex == x {
                    let mass = w / n as f64;
                    by_length[n] += mass;
                    if id == ROOT {
                        contractible += mass;
                        continue;
                    }
                    let class = class_cache
                        .entry(id)
                        .or_insert_with(|| node_class(&nodes, id, frame));
                    match class {
                        HomotopyClass::Contractible => contractible += mass,
                        HomotopyClass::Geodesic(c) => {
                            *classes.entry(c.clone()).or_insert(0.0) += mass;
                        }
                    }
                }
            }
            touched.clear();
        }
    }
    Ok(Enumeration {
        n_max,
        classes,
        contractible,
        by_length,
        tail_bound: tail,
    })
}

fn child(nodes: &mut Vec<PathNode>, id: u32, y: usize) -> u32 {
    if let Some(&(_, c)) = nodes[id as usize].children.iter().find(|&&(v, _)| v == y) {
        return c;
    }
    let c = nodes.len() as u32;
    nodes.push(PathNode {
        vertex: y,
        parent: id,
        children: Vec::new(),
    });
    nodes[id as usize].children.push((y, c));
    c
}

fn node_class(nodes: &[PathNode], id: u32, frame: &SpanningTreeFrame) -> HomotopyClass {
    let mut path = Vec::new();
    let mut cur = id;
    while cur != NO_PARENT {
        path.push(nodes[cur as usize].vertex);
        cur = nodes[cur as usize].parent;
    }
    path.reverse();
    let letters: Vec<Letter> = path
        .windows(2)
        .filter_map(|e| frame.crossing(e[0], e[1]))
        .collect();
    canonical_class(&Word::new(letters))
}

fn all_distances(g: &GraphModel) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    (0..n)
        .map(|s| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &y in g.neighbors(v) {
                    if d[y] == usize::MAX {
                        d[y] = d[v] + 1;
                        queue.push_back(y);
                    }
                }
            }
            d
        })
        .collect()
}

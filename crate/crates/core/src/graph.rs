//! Weighted graphs, their transition matrices, spanning-tree frames and Green data.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::freegroup::Letter;
use crate::linalg;

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub conductance: f64,
}

/// A finite connected simple graph with conductances and killing rates.
///
/// Construction derives the duality weights `λ_x = κ_x + Σ_y C_xy` and the
/// λ-symmetric transition matrix `P^x_y = C_xy / λ_x`. Instances are
/// immutable once built.
#[derive(Debug, Clone)]
pub struct GraphModel {
    n: usize,
    edges: Vec<Edge>,
    killing: Vec<f64>,
    lambda: Vec<f64>,
    conductance: DMatrix<f64>,
    transition: DMatrix<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl GraphModel {
    /// Validates and builds a graph from `(u, v, C)` triples and per-vertex killing rates.
    pub fn build(n: usize, edges: &[(usize, usize, f64)], killing: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if killing.len() != n {
            return Err(Error::Config(format!(
                "expected {n} killing rates, got {}",
                killing.len()
            )));
        }
        for (x, &k) in killing.iter().enumerate() {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidKilling(x, k));
            }
        }
        let mut conductance = DMatrix::zeros(n, n);
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b, c) in edges {
            for x in [a, b] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, count: n });
                }
            }
            if a == b {
                return Err(Error::SelfEdge(a));
            }
            let (u, v) = (a.min(b), a.max(b));
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::NonPositiveConductance(u, v, c));
            }
            if conductance[(u, v)] != 0.0 {
                return Err(Error::DuplicateEdge(u, v));
            }
            conductance[(u, v)] = c;
            conductance[(v, u)] = c;
            list.push(Edge { u, v, conductance: c });
        }
        list.sort_by_key(|e| (e.u, e.v));

        let mut neighbors = vec![Vec::new(); n];
        for e in &list {
            neighbors[e.u].push(e.v);
            neighbors[e.v].push(e.u);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }

        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &neighbors[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::Disconnected(x));
        }

        let lambda: Vec<f64> = (0..n)
            .map(|x| killing[x] + conductance.row(x).sum())
            .collect();
        if let Some(x) = lambda.iter().position(|&l| l <= 0.0) {
            return Err(Error::Domain(format!(
                "vertex {x} has zero duality weight (isolated and unkilled)"
            )));
        }
        let transition = DMatrix::from_fn(n, n, |x, y| conductance[(x, y)] / lambda[x]);

        Ok(Self {
            n,
            edges: list,
            killing: killing.to_vec(),
            lambda,
            conductance,
            transition,
            neighbors,
        })
    }

    /// Unit conductances on every edge and a constant killing rate.
    pub fn uniform(n: usize, edges: &[(usize, usize)], kappa: f64) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::build(n, &weighted, &vec![kappa; n])
    }

    pub fn complete(n: usize, kappa: f64) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::uniform(n, &edges, kappa)
    }

    pub fn triangle(kappa: f64) -> Result<Self> {
        Self::complete(3, kappa)
    }

    pub fn cycle(n: usize, kappa: f64) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::uniform(n, &edges, kappa)
    }

    /// Two triangles `{0,1,2}` and `{2,3,4}` glued at vertex 2.
    pub fn bowtie(kappa: f64) -> Result<Self> {
        Self::uniform(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)], kappa)
    }

    pub fn petersen(kappa: f64) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::uniform(10, &edges, kappa)
    }

    /// Parses the text graph format:
    ///
    /// ```text
    /// vertices N
    /// edge u v C
    /// kappa x value
    /// ```
    ///
    /// Blank lines and `#` comments are ignored; missing killing rates are zero.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        let mut edge_lines: HashMap<(usize, usize), usize> = HashMap::new();
        let mut kappa_lines: HashMap<usize, usize> = HashMap::new();
        let mut kappas = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let err = |message: String| Error::Parse { line, message };
            let index = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| err(format!("invalid vertex index `{s}`")))
            };
            let real = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(format!("invalid number `{s}`")))
            };
            match fields[0] {
                "vertices" => {
                    if fields.len() != 2 {
                        return Err(err("expected `vertices N`".into()));
                    }
                    if n.is_some() {
                        return Err(err("duplicate `vertices` header".into()));
                    }
                    n = Some(index(fields[1])?);
                }
                "edge" => {
                    let count = n.ok_or_else(|| err("`edge` before `vertices` header".into()))?;
                    if fields.len() != 4 {
                        return Err(err("expected `edge u v C`".into()));
                    }
                    let (u, v, c) = (index(fields[1])?, index(fields[2])?, real(fields[3])?);
                    for x in [u, v] {
                        if x >= count {
                            return Err(err(format!("vertex {x} out of range")));
                        }
                    }
                    if u == v {
                        return Err(err(format!("self-edge at vertex {u}")));
                    }
                    if c <= 0.0 || !c.is_finite() {
                        return Err(err(format!("nonpositive conductance {c}")));
                    }
                    let key = (u.min(v), u.max(v));
                    if let Some(first) = edge_lines.insert(key, line) {
                        return Err(err(format!(
                            "duplicate edge {}-{} (first on line {first})",
                            key.0, key.1
                        )));
                    }
                    edges.push((u, v, c));
                }
                "kappa" => {
                    let count = n.ok_or_else(|| err("`kappa` before `vertices` header".into()))?;
                    if fields.len() != 3 {
                        return Err(err("expected `kappa x value`".into()));
                    }
                    let (x, k) = (index(fields[1])?, real(fields[2])?);
                    if x >= count {
                        return Err(err(format!("vertex {x} out of range")));
                    }
                    if k < 0.0 || !k.is_finite() {
                        return Err(err(format!("invalid killing rate {k}")));
                    }
                    if let Some(first) = kappa_lines.insert(x, line) {
                        return Err(err(format!(
                            "duplicate kappa for vertex {x} (first on line {first})"
                        )));
                    }
                    kappas.push((x, k));
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            message: "missing `vertices N` header".into(),
        })?;
        let mut killing = vec![0.0; n];
        for (x, k) in kappas {
            killing[x] = k;
        }
        Self::build(n, &edges, &killing)
    }

    /// Serializes into the text format accepted by [`GraphModel::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("vertices {}\n", self.n);
        for e in &self.edges {
            let _ = writeln!(out, "edge {} {} {}", e.u, e.v, e.conductance);
        }
        for (x, &k) in self.killing.iter().enumerate() {
            if k != 0.0 {
                let _ = writeln!(out, "kappa {x} {k}");
            }
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// First Betti number `|E| - |X| + 1`.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.n
    }

    pub fn killing(&self) -> &[f64] {
        &self.killing
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn conductance(&self) -> &DMatrix<f64> {
        &self.conductance
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.transition[(x, y)]
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.neighbors[x]
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        x < self.n && y < self.n && self.conductance[(x, y)] != 0.0
    }

    pub fn is_killed(&self) -> bool {
        self.killing.iter().any(|&k| k > 0.0)
    }

    /// Returns `Some(d)` when every vertex has degree `d`, all conductances are
    /// one and the killing rate is constant.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.neighbors[0].len();
        let k0 = self.killing[0];
        let regular = self.neighbors.iter().all(|nb| nb.len() == d)
            && self.edges.iter().all(|e| e.conductance == 1.0)
            && self.killing.iter().all(|&k| k == k0);
        regular.then_some(d)
    }

    /// `D^{1/2} P D^{-1/2}` with `D = diag(λ)`; symmetric, same spectrum as `P`.
    pub fn symmetrized_transition(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |x, y| {
            self.conductance[(x, y)] / (self.lambda[x] * self.lambda[y]).sqrt()
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        linalg::symmetric_eigenvalues(&self.symmetrized_transition())
            .into_iter()
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `diag(λ) - C`, the matrix of the energy form.
    pub fn energy_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |x, y| {
            if x == y {
                self.lambda[x] - self.conductance[(x, y)]
            } else {
                -self.conductance[(x, y)]
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeStrategy {
    /// BFS from vertex 0, neighbors in ascending order.
    Bfs,
    /// Caller-supplied tree edges.
    Explicit(Vec<(usize, usize)>),
}

/// A spanning tree together with the ordered, oriented non-tree edges
/// `e_1..e_r` that generate the fundamental group.
#[derive(Debug, Clone)]
pub struct SpanningTreeFrame {
    n: usize,
    tree_edges: Vec<(usize, usize)>,
    cogenerators: Vec<(usize, usize)>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    crossing: HashMap<(usize, usize), Letter>,
}

impl SpanningTreeFrame {
    pub fn new(g: &GraphModel, strategy: TreeStrategy) -> Result<Self> {
        let n = g.vertex_count();
        let tree_edges: Vec<(usize, usize)> = match strategy {
            TreeStrategy::Bfs => {
                let mut seen = vec![false; n];
                let mut queue = VecDeque::from([0]);
                seen[0] = true;
                let mut tree = Vec::with_capacity(n - 1);
                while let Some(x) = queue.pop_front() {
                    for &y in g.neighbors(x) {
                        if !seen[y] {
                            seen[y] = true;
                            tree.push((x.min(y), x.max(y)));
                            queue.push_back(y);
                        }
                    }
                }
                tree
            }
            TreeStrategy::Explicit(list) => {
                let mut tree = Vec::with_capacity(list.len());
                for (a, b) in list {
                    if !g.is_edge(a, b) {
                        return Err(Error::NotSpanningTree(format!("{a}-{b} is not an edge")));
                    }
                    let key = (a.min(b), a.max(b));
                    if tree.contains(&key) {
                        return Err(Error::NotSpanningTree(format!("{a}-{b} listed twice")));
                    }
                    tree.push(key);
                }
                if tree.len() + 1 != n {
                    return Err(Error::NotSpanningTree(format!(
                        "{} edges given, a spanning tree on {n} vertices has {}",
                        tree.len(),
                        n - 1
                    )));
                }
                tree
            }
        };

        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &tree_edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    depth[y] = depth[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::NotSpanningTree(format!(
                "vertex {x} not reached (edge set has a cycle or misses it)"
            )));
        }

        let mut cogenerators: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .map(|e| (e.u, e.v))
            .filter(|key| !tree_edges.contains(key))
            .collect();
        cogenerators.sort_unstable();
        let mut crossing = HashMap::with_capacity(2 * cogenerators.len());
        for (i, &(u, v)) in cogenerators.iter().enumerate() {
            crossing.insert((u, v), Letter::new(i + 1, false));
            crossing.insert((v, u), Letter::new(i + 1, true));
        }

        let mut tree_edges = tree_edges;
        tree_edges.sort_unstable();
        Ok(Self {
            n,
            tree_edges,
            cogenerators,
            parent,
            depth,
            crossing,
        })
    }

    pub fn bfs(g: &GraphModel) -> Result<Self> {
        Self::new(g, TreeStrategy::Bfs)
    }

    pub fn rank(&self) -> usize {
        self.cogenerators.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.tree_edges
    }

    /// Cogenerators `e_1..e_r`, each oriented from the smaller vertex to the larger.
    pub fn cogenerators(&self) -> &[(usize, usize)] {
        &self.cogenerators
    }

    /// The generator letter read when traversing the oriented edge `(x, y)`,
    /// or `None` for tree edges and non-edges.
    pub fn crossing(&self, x: usize, y: usize) -> Option<Letter> {
        self.crossing.get(&(x, y)).copied()
    }

    /// Vertex path from `a` to `b` inside the tree, both endpoints included.
    pub fn tree_path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut left = vec![x];
        let mut right = vec![y];
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].expect("non-root has a parent");
            left.push(x);
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].expect("non-root has a parent");
            right.push(y);
        }
        while x != y {
            x = self.parent[x].expect("non-root has a parent");
            y = self.parent[y].expect("non-root has a parent");
            left.push(x);
            right.push(y);
        }
        right.pop();
        left.extend(right.into_iter().rev());
        left
    }
}

/// Green matrix, edge transfer matrix and Jacobian-torus data.
#[derive(Debug, Clone)]
pub struct GreenData {
    pub green: DMatrix<f64>,
    /// Indexed by the graph's edge order, each edge oriented `u -> v`.
    pub transfer: DMatrix<f64>,
    /// `J_ij = δ_ij C_{e_i} - C_{e_i} K_{e_i,e_j} C_{e_j}` over cogenerators.
    pub jacobian: DMatrix<f64>,
    pub volume: f64,
}

impl GreenData {
    pub fn new(g: &GraphModel, frame: &SpanningTreeFrame) -> Result<Self> {
        if !g.is_killed() {
            return Err(Error::Massless);
        }
        let green = g
            .energy_matrix()
            .cholesky()
            .ok_or(Error::Massless)?
            .inverse();
        let edges = g.edges();
        let k = |(a, b): (usize, usize), (c, d): (usize, usize)| {
            green[(b, d)] + green[(a, c)] - green[(b, c)] - green[(a, d)]
        };
        let transfer = DMatrix::from_fn(edges.len(), edges.len(), |i, j| {
            k((edges[i].u, edges[i].v), (edges[j].u, edges[j].v))
        });
        let cogens = frame.cogenerators();
        let cond = |e: (usize, usize)| g.conductance()[(e.0, e.1)];
        let jacobian = DMatrix::from_fn(cogens.len(), cogens.len(), |i, j| {
            let (ei, ej) = (cogens[i], cogens[j]);
            let delta = if i == j { cond(ei) } else { 0.0 };
            delta - cond(ei) * k(ei, ej) * cond(ej)
        });
        let volume = if cogens.is_empty() {
            1.0
        } else {
            jacobian.determinant().sqrt()
        };
        Ok(Self {
            green,
            transfer,
            jacobian,
            volume,
        })
    }
}

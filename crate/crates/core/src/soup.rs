//! Poisson loop soups and their occupation fields.
//!
//! Sampling works on based loops: the number of loops is Poisson with mean
//! `α Σ_{n ≤ N, x} (1/n)(P^n)_{xx}`, each loop picks `(x, n)` with weight
//! `(1/n)(P^n)_{xx}` and then a Markov bridge of length `n` from `x` to `x`.
//! A loop of multiplicity `m` has `n/m` distinct rotations, each drawn with
//! based weight `(1/n)∏P`, so forgetting the base point gives intensity
//! `α (1/m) ∏P` exactly.
//!
//! Randomness: a `ChaCha8Rng` seeded with `seed_from_u64(seed)` on stream 0
//! draws the loop count; loop `i` uses the same seed on stream `i + 1`, first
//! for `(x, n)` and then for the bridge steps in order. This mapping is stable.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;

use crate::error::{Error, Result};
use crate::freegroup::{canonical_class, loop_to_word, BasedLoop, HomotopyClass};
use crate::graph::{GraphModel, SpanningTreeFrame};
use crate::measure::{tail_bound, transition_powers, truncation_length};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureConfig {
    pub alpha: f64,
    /// Longest loop kept; `None` picks the smallest length meeting `tolerance`.
    pub n_max: Option<usize>,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            n_max: None,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
        }
    }
}

impl MeasureConfig {
    /// Checks the config against `g` and returns the truncation length.
    pub fn resolve(&self, g: &GraphModel) -> Result<usize> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("intensity must be nonnegative, got {}", self.alpha)));
        }
        match self.n_max {
            None => truncation_length(g, self.tolerance),
            Some(n) => {
                if n < 2 {
                    return Err(Error::Config("truncation length must be at least 2".into()));
                }
                let t = tail_bound(g, n)?;
                if t > self.tolerance {
                    return Err(Error::Config(format!(
                        "tail bound {t:e} at length {n} exceeds tolerance {:e}",
                        self.tolerance
                    )));
                }
                Ok(n)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoupLoop {
    pub based: BasedLoop,
    pub class: HomotopyClass,
}

#[derive(Debug, Clone)]
pub struct SampledSoup {
    pub loops: Vec<SoupLoop>,
    pub seed: u64,
    pub alpha: f64,
    pub n_max: usize,
}

impl SampledSoup {
    /// One loop per line: `n x0 x1 … x_{n-1}`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for l in &self.loops {
            writeln!(out, "{}", l.based).unwrap();
        }
        out
    }
}

/// Precomputed powers and `(x, n)` weights for repeated draws on one graph.
pub struct Sampler {
    g: GraphModel,
    powers: Vec<DMatrix<f64>>,
    starts: Vec<(usize, usize)>,
    choice: Option<WeightedIndex<f64>>,
    mass: f64,
    n_max: usize,
}

impl Sampler {
    pub fn new(g: &GraphModel, n_max: usize) -> Result<Self> {
        let powers = transition_powers(g, n_max);
        let mut starts = Vec::new();
        let mut weights = Vec::new();
        for n in 1..=n_max {
            for x in 0..g.vertex_count() {
                let w = powers[n][(x, x)] / n as f64;
                if w > 0.0 {
                    starts.push((x, n));
                    weights.push(w);
                }
            }
        }
        let mass = weights.iter().sum();
        let choice = if weights.is_empty() {
            None
        } else {
            Some(WeightedIndex::new(&weights).map_err(|e| Error::Numeric(e.to_string()))?)
        };
        Ok(Self {
            g: g.clone(),
            powers,
            starts,
            choice,
            mass,
            n_max,
        })
    }

    /// `Σ_{n ≤ N, x} (1/n)(P^n)_{xx}`.
    pub fn truncated_mass(&self) -> f64 {
        self.mass
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sample(&self, frame: &SpanningTreeFrame, alpha: f64, seed: u64) -> Result<SampledSoup> {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let lambda = alpha * self.mass;
        let count = if lambda > 0.0 {
            let d = Poisson::new(lambda).map_err(|e| Error::Numeric(e.to_string()))?;
            d.sample(&mut master) as u64
        } else {
            0
        };
        let mut loops = Vec::with_capacity(count as usize);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i + 1);
            let based = self.draw_loop(&mut rng);
            let class = canonical_class(&loop_to_word(&based, &self.g, frame)?);
            loops.push(SoupLoop { based, class });
        }
        Ok(SampledSoup {
            loops,
            seed,
            alpha,
            n_max: self.n_max,
        })
    }

    fn draw_loop<R: Rng>(&self, rng: &mut R) -> BasedLoop {
        let choice = self.choice.as_ref().expect("a loop is drawn only when mass > 0");
        let (x, n) = self.starts[choice.sample(rng)];
        let mut vertices = Vec::with_capacity(n);
        let mut cur = x;
        for k in 0..n {
            vertices.push(cur);
            let remaining = n - k;
            let total = self.powers[remaining][(cur, x)];
            let mut u = rng.random::<f64>() * total;
            let mut next = None;
            for &y in self.g.neighbors(cur) {
                let w = self.g.p(cur, y) * self.powers[remaining - 1][(y, x)];
                if w <= 0.0 {
                    continue;
                }
                next = Some(y);
                if u < w {
                    break;
                }
                u -= w;
            }
            cur = next.expect("bridge has positive continuation weight");
        }
        debug_assert_eq!(cur, x);
        BasedLoop::from_vertices_unchecked(vertices)
    }
}

/// Draws a soup of intensity `α μ` restricted to loops of length `≤ N`.
pub fn sample_soup(g: &GraphModel, frame: &SpanningTreeFrame, cfg: &MeasureConfig) -> Result<SampledSoup> {
    let n_max = cfg.resolve(g)?;
    Sampler::new(g, n_max)?.sample(frame, cfg.alpha, cfg.seed)
}

/// Oriented edge traversal counts `N_{x,y}` over a collection of loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationField {
    n: usize,
    counts: Vec<u64>,
}

impl OccupationField {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            n: vertex_count,
            counts: vec![0; vertex_count * vertex_count],
        }
    }

    pub fn from_loops<'a, I: IntoIterator<Item = &'a BasedLoop>>(vertex_count: usize, loops: I) -> Self {
        let mut f = Self::new(vertex_count);
        for l in loops {
            f.add_loop(l);
        }
        f
    }

    pub fn from_soup(g: &GraphModel, soup: &SampledSoup) -> Self {
        let f = Self::from_loops(g.vertex_count(), soup.loops.iter().map(|l| &l.based));
        assert!(f.is_eulerian(), "occupation field of closed loops must be Eulerian");
        f
    }

    pub fn add_loop(&mut self, l: &BasedLoop) {
        for (x, y) in l.steps() {
            self.counts[x * self.n + y] += 1;
        }
    }

    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.n + y]
    }

    /// `Ň_{x,y} = N_{x,y} - N_{y,x}`.
    pub fn current(&self, x: usize, y: usize) -> i64 {
        self.count(x, y) as i64 - self.count(y, x) as i64
    }

    /// `Σ_y N_{x,y} = Σ_y N_{y,x}` at every vertex.
    pub fn is_eulerian(&self) -> bool {
        (0..self.n).all(|x| {
            let out: u64 = (0..self.n).map(|y| self.count(x, y)).sum();
            let inc: u64 = (0..self.n).map(|y| self.count(y, x)).sum();
            out == inc
        })
    }

    /// CSV rows `u,v,N,Ncheck` for both orientations of every edge.
    pub fn to_csv(&self, g: &GraphModel) -> String {
        let mut out = String::from("u,v,N,Ncheck\n");
        let mut oriented: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .flat_map(|e| [(e.u, e.v), (e.v, e.u)])
            .collect();
        oriented.sort_unstable();
        for (u, v) in oriented {
            writeln!(out, "{u},{v},{},{}", self.count(u, v), self.current(u, v)).unwrap();
        }
        out
    }
}

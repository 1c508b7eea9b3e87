use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::torus::neg_log_det_real;
use crate::error::{Error, Result};
use crate::graph::{GraphModel, SpanningTreeFrame};
use crate::measure::total_mass;

pub fn check_odd_prime(p: u64) -> Result<()> {
    let prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
    if !prime || p == 2 {
        return Err(Error::InvalidPrime(p));
    }
    Ok(())
}

fn modp(v: i64, p: u64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

/// An element `(a, c)` of the free two-step nilpotent group over `Z_p`:
/// `a ∈ Z_p^r`, `c` a skew matrix mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeisenbergElement {
    pub a: Vec<u64>,
    pub c: Vec<Vec<u64>>,
}

impl HeisenbergElement {
    pub fn identity(r: usize) -> Self {
        Self {
            a: vec![0; r],
            c: vec![vec![0; r]; r],
        }
    }

    pub fn generator(r: usize, i: usize, p: u64, inverse: bool) -> Self {
        let mut e = Self::identity(r);
        e.a[i] = if inverse { p - 1 } else { 1 };
        e
    }

    /// `(a,c)(a',c') = (a + a', c + c' + ½(a⊗a' - a'⊗a))`.
    pub fn mul(&self, other: &Self, p: u64) -> Self {
        let r = self.a.len();
        let half = p.div_ceil(2);
        let a = (0..r).map(|i| (self.a[i] + other.a[i]) % p).collect();
        let c = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        let cross = (self.a[i] * other.a[j] % p + p - self.a[j] * other.a[i] % p) % p;
                        (self.c[i][j] + other.c[i][j] + half * cross) % p
                    })
                    .collect()
            })
            .collect();
        Self { a, c }
    }

    pub fn inverse(&self, p: u64) -> Self {
        Self {
            a: self.a.iter().map(|&x| (p - x) % p).collect(),
            c: self.c.iter().map(|row| row.iter().map(|&x| (p - x) % p).collect()).collect(),
        }
    }
}

/// The representation `U_h` on functions on `Z_p^r`:
/// `U_h[(a,c)] δ_y = e^{(2πi/p)(⟨c,h⟩ + ⟨a, y + h a⟩)} δ_{y + h a}`,
/// with `⟨c,h⟩ = Σ_{i,j} c_ij h_ij`.
#[derive(Debug, Clone)]
pub struct NilpotentRep {
    p: u64,
    r: usize,
    h: Vec<Vec<u64>>,
}

impl NilpotentRep {
    pub fn new(p: u64, h: &[Vec<i64>]) -> Result<Self> {
        check_odd_prime(p)?;
        let r = h.len();
        let hm: Vec<Vec<u64>> = h.iter().map(|row| row.iter().map(|&v| modp(v, p)).collect()).collect();
        for i in 0..r {
            if hm[i].len() != r {
                return Err(Error::Precondition("h must be square".into()));
            }
            for j in 0..r {
                if !(hm[i][j] + hm[j][i]).is_multiple_of(p) {
                    return Err(Error::Precondition("h must be skew-symmetric mod p".into()));
                }
            }
        }
        Ok(Self { p, r, h: hm })
    }

    /// The representation indexed by the upper-triangle entries `h_ij`, `i < j`, in lexicographic order.
    pub fn from_upper(p: u64, r: usize, upper: &[i64]) -> Result<Self> {
        Self::new(p, &skew_from_upper(r, upper))
    }

    pub fn dim(&self) -> usize {
        (self.p as usize).pow(self.r as u32)
    }

    fn apply_h(&self, a: &[u64]) -> Vec<u64> {
        (0..self.r)
            .map(|i| (0..self.r).map(|j| self.h[i][j] * a[j]).sum::<u64>() % self.p)
            .collect()
    }

    fn index(&self, y: &[u64]) -> usize {
        y.iter().fold(0, |acc, &v| acc * self.p as usize + v as usize)
    }

    fn point(&self, mut idx: usize) -> Vec<u64> {
        let mut y = vec![0; self.r];
        for slot in y.iter_mut().rev() {
            *slot = (idx % self.p as usize) as u64;
            idx /= self.p as usize;
        }
        y
    }

    fn root(&self, k: u64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * (k % self.p) as f64 / self.p as f64)
    }

    pub fn matrix(&self, e: &HeisenbergElement) -> DMatrix<Complex64> {
        let d = self.dim();
        let p = self.p;
        let ha = self.apply_h(&e.a);
        let ch: u64 = (0..self.r)
            .flat_map(|i| (0..self.r).map(move |j| (i, j)))
            .map(|(i, j)| e.c[i][j] * self.h[i][j] % p)
            .sum::<u64>();
        let mut m = DMatrix::zeros(d, d);
        for col in 0..d {
            let y = self.point(col);
            let target: Vec<u64> = y.iter().zip(&ha).map(|(a, b)| (a + b) % p).collect();
            let pairing: u64 = e.a.iter().zip(&target).map(|(a, t)| a * t % p).sum();
            m[(self.index(&target), col)] = self.root(ch + pairing);
        }
        m
    }

    /// Normalized trace `tr U / p^r`.
    pub fn character(&self, e: &HeisenbergElement) -> Complex64 {
        self.matrix(e).trace() / self.dim() as f64
    }
}

pub fn skew_from_upper(r: usize, upper: &[i64]) -> Vec<Vec<i64>> {
    let mut h = vec![vec![0; r]; r];
    let mut k = 0;
    for i in 0..r {
        for j in i + 1..r {
            h[i][j] = upper[k];
            h[j][i] = -upper[k];
            k += 1;
        }
    }
    h
}

/// All vectors in `{0..p-1}^k`, lexicographic.
fn all_vectors(p: u64, k: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (0..p as i64).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// `-(1/p^r) log det(I - P^{A,U_h,θ})` for the canonical connection
/// `A[e_i] = (v_i, 0)`, identity on tree edges, with an optional extra
/// phase `e^{2πi θ_i}` on cogenerator `e_i`.
///
/// For this connection every generator maps `δ_y` to a multiple of
/// `δ_{y ± h v_i}`, so each coset of `image(h)` spans an invariant block.
pub fn nilpotent_mass(
    g: &GraphModel,
    frame: &SpanningTreeFrame,
    rep: &NilpotentRep,
    theta: Option<&[f64]>,
) -> Result<f64> {
    let r = frame.rank();
    if rep.r != r {
        return Err(Error::Precondition(format!("representation rank {} differs from graph rank {r}", rep.r)));
    }
    let p = rep.p;
    let n = g.vertex_count();
    let d = rep.dim();
    let columns: Vec<Vec<u64>> = (0..r)
        .map(|i| (0..r).map(|k| rep.h[k][i]).collect())
        .collect();
    let image: Vec<Vec<u64>> = {
        let mut pts: Vec<Vec<u64>> = all_vectors(p, r)
            .into_iter()
            .map(|a| rep.apply_h(&a.iter().map(|&x| x as u64).collect::<Vec<_>>()))
            .collect();
        pts.sort();
        pts.dedup();
        pts
    };
    let mut block_of = vec![usize::MAX; d];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for start in 0..d {
        if block_of[start] != usize::MAX {
            continue;
        }
        let y0 = rep.point(start);
        let mut members: Vec<usize> = image
            .iter()
            .map(|s| rep.index(&y0.iter().zip(s).map(|(a, b)| (a + b) % p).collect::<Vec<_>>()))
            .collect();
        members.sort_unstable();
        for &m in &members {
            block_of[m] = blocks.len();
        }
        blocks.push(members);
    }
    let mut total = 0.0;
    for members in &blocks {
        let size = members.len();
        let local = |idx: usize| members.binary_search(&idx).expect("coset is invariant");
        let mut m = DMatrix::<Complex64>::zeros(n * size, n * size);
        for x in 0..n {
            for &z in g.neighbors(x) {
                let pxz = g.p(x, z);
                match frame.crossing(x, z) {
                    None => {
                        for k in 0..size {
                            m[(x * size + k, z * size + k)] = Complex64::new(pxz, 0.0);
                        }
                    }
                    Some(l) => {
                        let i = l.generator() - 1;
                        let eps = l.sign();
                        let twist = theta.map_or(0.0, |t| t[i]) * eps as f64;
                        for (k, &col) in members.iter().enumerate() {
                            let y = rep.point(col);
                            let target: Vec<u64> = y
                                .iter()
                                .zip(&columns[i])
                                .map(|(&a, &b)| if eps > 0 { (a + b) % p } else { (a + p - b) % p })
                                .collect();
                            let yi = if eps > 0 { y[i] } else { (p - y[i]) % p };
                            let phase = 2.0 * PI * (yi as f64 / p as f64 + twist);
                            let row = local(rep.index(&target));
                            m[(x * size + row, z * size + k)] = Complex64::from_polar(pxz, phase);
                        }
                    }
                }
            }
        }
        total += neg_log_det_real(&m)?;
    }
    Ok(total / d as f64)
}

/// Mod-`p` second-homology intensities `μ_p(m)` for every skew `m` (upper-triangle
/// entries, lexicographic), where `μ_p(m)` is the μ-mass of loops with
/// `Ň_i ≡ 0` and `Ň_{i,j} ≡ m_ij (mod p)`.
pub fn homology2_intensities(g: &GraphModel, frame: &SpanningTreeFrame, p: u64) -> Result<Vec<(Vec<i64>, f64)>> {
    check_odd_prime(p)?;
    total_mass(g)?;
    let r = frame.rank();
    let hs = all_vectors(p, r * r.saturating_sub(1) / 2);
    let values = hs
        .iter()
        .map(|h| nilpotent_mass(g, frame, &NilpotentRep::from_upper(p, r, h)?, None))
        .collect::<Result<Vec<_>>>()?;
    inverse_skew_transform(&hs, &values, p, |f| f, 1e-9)
}

pub fn homology2_intensity(g: &GraphModel, frame: &SpanningTreeFrame, m: &[i64], p: u64) -> Result<f64> {
    let all = homology2_intensities(g, frame, p)?;
    let key: Vec<i64> = m.iter().map(|&v| v.rem_euclid(p as i64)).collect();
    all.into_iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Precondition(format!("expected {} coordinates", frame.rank() * frame.rank().saturating_sub(1) / 2)))
}

/// Law of the total `Ň_{i,j} (mod p)` over soup loops with `Ň = 0`, for every skew `m`.
///
/// `G_h` averages the nilpotent mass over an `M`-grid of abelian twists, which
/// keeps only loops with `Ň ≡ 0 (mod M)`; the law is the inverse transform of
/// `exp(α (G_h - G_0))`.
pub fn homology2_field_law(
    g: &GraphModel,
    frame: &SpanningTreeFrame,
    alpha: f64,
    p: u64,
    m: usize,
) -> Result<Vec<(Vec<i64>, f64)>> {
    check_odd_prime(p)?;
    total_mass(g)?;
    if !(alpha >= 0.0) {
        return Err(Error::Config(format!("intensity must be nonnegative, got {alpha}")));
    }
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Config(format!("grid size must be a power of two, got {m}")));
    }
    let r = frame.rank();
    let hs = all_vectors(p, r * r.saturating_sub(1) / 2);
    let thetas: Vec<Vec<f64>> = all_vectors(m as u64, r)
        .into_iter()
        .map(|k| k.into_iter().map(|v| v as f64 / m as f64).collect())
        .collect();
    let values = hs
        .iter()
        .map(|h| {
            let rep = NilpotentRep::from_upper(p, r, h)?;
            let s = thetas
                .iter()
                .map(|t| nilpotent_mass(g, frame, &rep, Some(t)))
                .sum::<Result<f64>>()?;
            Ok(s / thetas.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let g0 = values[0];
    inverse_skew_transform(&hs, &values, p, |v| (alpha * (v - g0)).exp(), 1e-9)
}

// (1/p^K) Σ_h map(F_h) e^{-2πi·2⟨h,m⟩/p}; the 2 comes from ⟨c,h⟩ running over all ordered pairs.
fn inverse_skew_transform(
    hs: &[Vec<i64>],
    values: &[f64],
    p: u64,
    map: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<Vec<(Vec<i64>, f64)>> {
    let mapped: Vec<f64> = values.iter().map(|&v| map(v)).collect();
    hs.iter()
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (h, &f) in hs.iter().zip(&mapped) {
                let dot: i64 = h.iter().zip(m).map(|(a, b)| a * b).sum();
                let k = (2 * dot).rem_euclid(p as i64);
                acc += Complex64::from_polar(f, -2.0 * PI * k as f64 / p as f64);
            }
            acc /= hs.len() as f64;
            if acc.im.abs() > tol || acc.re < -tol {
                return Err(Error::Numeric(format!("mod-p intensity {acc} is not a nonnegative real")));
            }
            Ok((m.clone(), acc.re.max(0.0)))
        })
        .collect()
}

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::tensor::{Homogeneous, Rational};
use crate::error::{Error, Result};

/// Lyndon words of exactly length `n` over letters `1..=rank`, in lexicographic order.
pub fn lyndon_words(rank: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if rank == 0 || n == 0 {
        return out;
    }
    // Duval's generation of all Lyndon words of length <= n.
    let mut w: Vec<usize> = vec![0];
    while !w.is_empty() {
        let last = w.len() - 1;
        w[last] += 1;
        if w.len() == n {
            out.push(w.clone());
        }
        let m = w.len();
        while w.len() < n {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&c) = w.last() {
            if c == rank {
                w.pop();
            } else {
                break;
            }
        }
    }
    out
}

pub fn is_lyndon(w: &[usize]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w[i..] > *w)
}

/// Standard factorization `w = uv` with `v` the longest proper Lyndon suffix.
pub fn standard_factorization(w: &[usize]) -> (&[usize], &[usize]) {
    assert!(w.len() >= 2);
    let split = (1..w.len())
        .find(|&i| is_lyndon(&w[i..]))
        .expect("a single letter is always Lyndon");
    (&w[..split], &w[split..])
}

/// Standard bracketing of a Lyndon word, expanded in the tensor algebra.
pub fn bracket_expansion(rank: usize, w: &[usize]) -> Homogeneous {
    fn go(rank: usize, w: &[usize], memo: &mut HashMap<Vec<usize>, Homogeneous>) -> Homogeneous {
        if let Some(h) = memo.get(w) {
            return h.clone();
        }
        let h = if w.len() == 1 {
            Homogeneous::monomial(rank, w)
        } else {
            let (u, v) = standard_factorization(w);
            go(rank, u, memo).bracket(&go(rank, v, memo))
        };
        memo.insert(w.to_vec(), h.clone());
        h
    }
    go(rank, w, &mut HashMap::new())
}

/// Nested-bracket text for a Lyndon word, e.g. `[[X1,X2],X2]`.
pub fn bracket_string(w: &[usize]) -> String {
    if w.len() == 1 {
        return format!("X{}", w[0]);
    }
    let (u, v) = standard_factorization(w);
    format!("[{},{}]", bracket_string(u), bracket_string(v))
}

/// The Lyndon basis of the degree-`n` part of the free Lie algebra.
#[derive(Debug, Clone)]
pub struct LyndonBasis {
    rank: usize,
    degree: usize,
    words: Vec<Vec<usize>>,
    expansions: Vec<Homogeneous>,
}

impl LyndonBasis {
    pub fn new(rank: usize, degree: usize) -> Self {
        let words = lyndon_words(rank, degree);
        let mut memo = HashMap::new();
        let expansions = words
            .iter()
            .map(|w| {
                memo.entry(w.clone())
                    .or_insert_with(|| bracket_expansion(rank, w))
                    .clone()
            })
            .collect();
        Self {
            rank,
            degree,
            words,
            expansions,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Coordinates of a homogeneous element in this basis.
    ///
    /// The bracketing of a Lyndon word `w` is `w` plus lexicographically larger
    /// words, so elimination in increasing Lyndon order is triangular.
    pub fn project(&self, h: &Homogeneous) -> Result<LiePoly> {
        assert_eq!((h.rank(), h.degree()), (self.rank, self.degree));
        let mut residual = h.clone();
        let mut terms = Vec::new();
        for (w, p) in self.words.iter().zip(&self.expansions) {
            let c = residual.coeff(w).clone();
            if c.is_zero() {
                continue;
            }
            residual = residual.sub(&p.scale(&c));
            terms.push((w.clone(), c));
        }
        if !residual.is_zero() {
            return Err(Error::NotLie);
        }
        Ok(LiePoly {
            rank: self.rank,
            degree: self.degree,
            terms,
        })
    }

    pub fn expand(&self, p: &LiePoly) -> Homogeneous {
        let mut out = Homogeneous::zero(self.rank, self.degree);
        for (w, c) in &p.terms {
            let i = self
                .words
                .iter()
                .position(|x| x == w)
                .expect("coordinate outside the basis");
            out = out.add(&self.expansions[i].scale(c));
        }
        out
    }
}

/// A homogeneous Lie polynomial in Lyndon coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiePoly {
    rank: usize,
    degree: usize,
    terms: Vec<(Vec<usize>, Rational)>,
}

impl LiePoly {
    pub fn new(rank: usize, degree: usize, mut terms: Vec<(Vec<usize>, Rational)>) -> Result<Self> {
        for (w, _) in &terms {
            if w.len() != degree || !is_lyndon(w) {
                return Err(Error::Precondition(format!(
                    "{w:?} is not a Lyndon word of length {degree}"
                )));
            }
            if let Some(&g) = w.iter().find(|&&g| g == 0 || g > rank) {
                return Err(Error::IndexOutOfRange { index: g, rank });
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self {
            rank,
            degree,
            terms,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(Lyndon word, coefficient)` pairs in lexicographic order.
    pub fn terms(&self) -> &[(Vec<usize>, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &[usize]) -> Rational {
        self.terms
            .iter()
            .find(|(x, _)| x == w)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn neg(&self) -> Self {
        Self {
            rank: self.rank,
            degree: self.degree,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn to_tensor(&self) -> Homogeneous {
        let mut out = Homogeneous::zero(self.rank, self.degree);
        for (w, c) in &self.terms {
            out = out.add(&bracket_expansion(self.rank, w).scale(c));
        }
        out
    }
}

impl fmt::Display for LiePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{a}*")?;
            }
            write!(f, "{}", bracket_string(w))?;
        }
        Ok(())
    }
}

fn mobius(mut n: usize) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Dimension `(1/n) Σ_{d|n} μ(d) r^{n/d}` of the degree-`n` part of the free Lie algebra.
pub fn witt_dimension(rank: usize, n: usize) -> u128 {
    assert!(n >= 1);
    let mut sum: i128 = 0;
    for d in 1..=n {
        if n.is_multiple_of(d) {
            sum += mobius(d) as i128 * (rank as i128).pow((n / d) as u32);
        }
    }
    (sum / n as i128) as u128
}

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::freegroup::Word;

pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Index of a tensor word (letters `1..=rank`) inside its homogeneous component.
pub fn word_index(rank: usize, word: &[usize]) -> usize {
    word.iter().fold(0, |acc, &g| acc * rank + (g - 1))
}

/// Inverse of [`word_index`].
pub fn index_word(rank: usize, degree: usize, mut index: usize) -> Vec<usize> {
    let mut word = vec![0; degree];
    for slot in word.iter_mut().rev() {
        *slot = index % rank + 1;
        index /= rank;
    }
    word
}

/// A homogeneous element of degree `degree` of the tensor algebra over `rank` letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homogeneous {
    rank: usize,
    degree: usize,
    coeffs: Vec<Rational>,
}

impl Homogeneous {
    pub fn zero(rank: usize, degree: usize) -> Self {
        Self {
            rank,
            degree,
            coeffs: vec![Rational::zero(); rank.pow(degree as u32)],
        }
    }

    pub fn from_coeffs(rank: usize, degree: usize, coeffs: Vec<Rational>) -> Self {
        assert_eq!(coeffs.len(), rank.pow(degree as u32));
        Self {
            rank,
            degree,
            coeffs,
        }
    }

    /// The single word `X_{w_1} … X_{w_n}`.
    pub fn monomial(rank: usize, word: &[usize]) -> Self {
        let mut h = Self::zero(rank, word.len());
        h.coeffs[word_index(rank, word)] = Rational::one();
        h
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, word: &[usize]) -> &Rational {
        &self.coeffs[word_index(self.rank, word)]
    }

    pub fn add_to(&mut self, word: &[usize], value: &Rational) {
        let i = word_index(self.rank, word);
        self.coeffs[i] += value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Nonzero terms as `(word, coefficient)` in lexicographic word order.
    pub fn terms(&self) -> Vec<(Vec<usize>, Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (index_word(self.rank, self.degree, i), c.clone()))
            .collect()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            rank: self.rank,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rank, self.degree), (other.rank, other.degree));
        Self {
            rank: self.rank,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Concatenation product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        let mut out = Self::zero(self.rank, self.degree + other.degree);
        let shift = self.rank.pow(other.degree as u32);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i * shift + j] += a * b;
                }
            }
        }
        out
    }

    /// `[A, B] = AB - BA`.
    pub fn bracket(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Dynkin left-bracketing map `X_{i1}…X_{in} ↦ [[…[X_{i1},X_{i2}]…],X_{in}]`.
    pub fn dynkin(&self) -> Self {
        let mut out = Self::zero(self.rank, self.degree);
        if self.degree == 0 {
            return out;
        }
        for (word, c) in self.terms() {
            for (w, s) in left_bracket_expansion(&word) {
                let value = &c * integer(s);
                out.add_to(&w, &value);
            }
        }
        out
    }

    /// Dynkin–Specht–Wever: a homogeneous element of degree `n ≥ 1` is a Lie
    /// polynomial iff the Dynkin map multiplies it by `n`.
    pub fn is_lie(&self) -> bool {
        if self.degree == 0 {
            return self.is_zero();
        }
        self.dynkin() == self.scale(&integer(self.degree as i64))
    }
}

/// Signed words of the left-normed bracket of a word.
pub fn left_bracket_expansion(word: &[usize]) -> Vec<(Vec<usize>, i64)> {
    let mut terms: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    terms.insert(vec![word[0]], 1);
    for &g in &word[1..] {
        let mut next = BTreeMap::new();
        for (w, c) in terms {
            let mut right = w.clone();
            right.push(g);
            *next.entry(right).or_insert(0) += c;
            let mut left = vec![g];
            left.extend_from_slice(&w);
            *next.entry(left).or_insert(0) -= c;
        }
        terms = next;
    }
    terms.into_iter().filter(|&(_, c)| c != 0).collect()
}

/// A truncated series in the tensor algebra with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSeries {
    rank: usize,
    depth: usize,
    components: Vec<Homogeneous>,
}

impl TensorSeries {
    pub fn zero(rank: usize, depth: usize) -> Self {
        Self {
            rank,
            depth,
            components: (0..=depth).map(|n| Homogeneous::zero(rank, n)).collect(),
        }
    }

    pub fn one(rank: usize, depth: usize) -> Self {
        let mut s = Self::zero(rank, depth);
        s.components[0].coeffs[0] = Rational::one();
        s
    }

    /// `exp(n X_g)` truncated at `depth`.
    pub fn exp_letter(rank: usize, depth: usize, generator: usize, n: i64) -> Self {
        let mut s = Self::zero(rank, depth);
        let mut term = Rational::one();
        let mut word = Vec::with_capacity(depth);
        for k in 0..=depth {
            s.components[k].add_to(&word, &term);
            term = &term * integer(n) / integer(k as i64 + 1);
            word.push(generator);
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn component(&self, degree: usize) -> &Homogeneous {
        &self.components[degree]
    }

    pub fn components(&self) -> &[Homogeneous] {
        &self.components
    }

    pub fn coeff(&self, word: &[usize]) -> &Rational {
        self.components[word.len()].coeff(word)
    }

    pub fn constant(&self) -> &Rational {
        &self.components[0].coeffs[0]
    }

    pub fn set_coeff(&mut self, word: &[usize], value: Rational) {
        let i = word_index(self.rank, word);
        self.components[word.len()].coeffs[i] = value;
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_shape(other);
        Self {
            rank: self.rank,
            depth: self.depth,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_shape(other);
        Self {
            rank: self.rank,
            depth: self.depth,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            rank: self.rank,
            depth: self.depth,
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Truncated product.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_shape(other);
        let mut out = Self::zero(self.rank, self.depth);
        for (a, ca) in self.components.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.components.iter().enumerate().take(self.depth - a + 1) {
                if cb.is_zero() {
                    continue;
                }
                let prod = ca.mul(cb);
                out.components[a + b] = out.components[a + b].add(&prod);
            }
        }
        out
    }

    /// Formal logarithm `Σ_{k≥1} (-1)^{k+1} (S-1)^k / k`, truncated.
    pub fn log(&self) -> Result<Self> {
        if !self.constant().is_one() {
            return Err(Error::ConstantTermNotOne);
        }
        let y = self.sub(&Self::one(self.rank, self.depth));
        let mut out = Self::zero(self.rank, self.depth);
        let mut power = y.clone();
        for k in 1..=self.depth {
            let c = rational(if k % 2 == 1 { 1 } else { -1 }, k as i64);
            out = out.add(&power.scale(&c));
            power = power.mul(&y);
        }
        Ok(out)
    }

    /// Smallest degree `n ≥ 1` with a nonzero component.
    pub fn lowest_degree(&self) -> Option<usize> {
        (1..=self.depth).find(|&n| !self.components[n].is_zero())
    }

    fn check_shape(&self, other: &Self) {
        assert_eq!(
            (self.rank, self.depth),
            (other.rank, other.depth),
            "series shapes differ"
        );
    }
}

/// The signature `S(g) = ∏ exp(n_i X_{j_i})` of a word, truncated at `depth`.
///
/// Runs of the same letter are merged into one exponential; the word need
/// not be reduced since `exp(X) exp(-X) = 1`.
pub fn signature(word: &Word, rank: usize, depth: usize) -> Result<TensorSeries> {
    if depth == 0 {
        return Err(Error::Domain("truncation degree must be at least 1".into()));
    }
    let mut s = TensorSeries::one(rank, depth);
    let letters = word.letters();
    let mut i = 0;
    while i < letters.len() {
        let g = letters[i].generator();
        if g > rank {
            return Err(Error::IndexOutOfRange { index: g, rank });
        }
        let mut n = 0i64;
        while i < letters.len() && letters[i].generator() == g {
            n += letters[i].sign();
            i += 1;
        }
        if n != 0 {
            s = multiply_exp(&s, g, n);
        }
    }
    Ok(s)
}

/// `s · exp(n X_g)`, exploiting that the right factor is a single-letter series.
fn multiply_exp(s: &TensorSeries, generator: usize, n: i64) -> TensorSeries {
    let (rank, depth) = (s.rank, s.depth);
    let mut out = TensorSeries::zero(rank, depth);
    let mut powers = vec![Rational::one()];
    for k in 1..=depth {
        let next = &powers[k - 1] * integer(n) / integer(k as i64);
        powers.push(next);
    }
    for (a, comp) in s.components.iter().enumerate() {
        for (idx, c) in comp.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut target = idx;
            for (k, p) in powers.iter().enumerate().take(depth - a + 1) {
                if k > 0 {
                    target = target * rank + (generator - 1);
                }
                out.components[a + k].coeffs[target] += c * p;
            }
        }
    }
    out
}

/// Shuffle product of two words, as word → multiplicity.
pub fn shuffle(u: &[usize], v: &[usize]) -> BTreeMap<Vec<usize>, u64> {
    let mut out = BTreeMap::new();
    fn go(u: &[usize], v: &[usize], prefix: &mut Vec<usize>, out: &mut BTreeMap<Vec<usize>, u64>) {
        if u.is_empty() || v.is_empty() {
            let mut w = prefix.clone();
            w.extend_from_slice(u);
            w.extend_from_slice(v);
            *out.entry(w).or_insert(0) += 1;
            return;
        }
        prefix.push(u[0]);
        go(&u[1..], v, prefix, out);
        prefix.pop();
        prefix.push(v[0]);
        go(u, &v[1..], prefix, out);
        prefix.pop();
    }
    go(u, v, &mut Vec::new(), &mut out);
    out
}

/// Checks `⟨s, u1 ⧢ u2⟩ = ⟨s, u1⟩ ⟨s, u2⟩`.
pub fn shuffle_check(s: &TensorSeries, u1: &[usize], u2: &[usize]) -> Result<bool> {
    let needed = u1.len() + u2.len();
    if needed > s.depth() {
        return Err(Error::DegreeOverflow {
            needed,
            depth: s.depth(),
        });
    }
    for &g in u1.iter().chain(u2) {
        if g == 0 || g > s.rank() {
            return Err(Error::IndexOutOfRange {
                index: g,
                rank: s.rank(),
            });
        }
    }
    let lhs = shuffle(u1, u2)
        .into_iter()
        .fold(Rational::zero(), |acc, (w, m)| {
            acc + s.coeff(&w) * integer(m as i64)
        });
    Ok(lhs == s.coeff(u1) * s.coeff(u2))
}

/// Largest absolute numerator, for diagnostics.
pub fn max_abs(h: &Homogeneous) -> Rational {
    h.coeffs()
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

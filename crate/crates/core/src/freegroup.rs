//! Free-group words over the frame generators, conjugacy classes and based loops.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{GraphModel, SpanningTreeFrame};

/// A signed generator `γ_i^{±1}`, with `i` starting at 1.
///
/// Letters order by generator index, then `+` before `-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    generator: u32,
    inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!(generator >= 1, "generators are numbered from 1");
        Self {
            generator: generator as u32,
            inverse,
        }
    }

    pub fn pos(generator: usize) -> Self {
        Self::new(generator, false)
    }

    pub fn neg(generator: usize) -> Self {
        Self::new(generator, true)
    }

    pub fn generator(self) -> usize {
        self.generator as usize
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    /// `+1` or `-1`.
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inv(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.inverse { '-' } else { '+' };
        write!(f, "{sign}{}", self.generator)
    }
}

/// A word in the free group, one unit letter per entry (`γ_1^3` is three letters).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a word from signed generator indices: `[1, -2]` is `γ_1 γ_2^{-1}`.
    pub fn from_signed(indices: &[i64]) -> Self {
        Self(
            indices
                .iter()
                .map(|&i| {
                    assert!(i != 0, "zero is not a generator index");
                    Letter::new(i.unsigned_abs() as usize, i < 0)
                })
                .collect(),
        )
    }

    pub fn generator(i: usize) -> Self {
        Self(vec![Letter::pos(i)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used, 0 for the empty word.
    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.generator()).max().unwrap_or(0)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&a), Some(&b)) => self.0.len() == 1 || a != b.inv(),
                _ => true,
            }
    }

    /// Free reduction: cancels adjacent inverse pairs until none remain.
    pub fn reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Group product, freely reduced.
    pub fn mul(&self, other: &Word) -> Word {
        self.concat(other).reduce()
    }

    pub fn pow(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    /// The group commutator `[a, b] = a^{-1} b^{-1} a b`.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.inverse()
            .concat(&b.inverse())
            .concat(a)
            .concat(b)
            .reduce()
    }

    /// Strips conjugating letters from a reduced copy of the word.
    pub fn cyclic_reduce(&self) -> Word {
        let reduced = self.reduce().0;
        let (mut lo, mut hi) = (0, reduced.len());
        while hi - lo >= 2 && reduced[lo] == reduced[hi - 1].inv() {
            lo += 1;
            hi -= 1;
        }
        Word(reduced[lo..hi].to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Whitespace-separated signed integers, e.g. `"+1 +2 -1 -2"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| Error::Parse {
                line: 1,
                message: format!("invalid letter `{tok}`"),
            })?;
            if v == 0 {
                return Err(Error::Parse {
                    line: 1,
                    message: "generator index 0 is not allowed".into(),
                });
            }
            letters.push(Letter::new(v.unsigned_abs() as usize, v < 0));
        }
        Ok(Word(letters))
    }
}

/// A nontrivial conjugacy class, stored as its canonical cyclically reduced word.
///
/// The canonical rotation is the lexicographically smallest one under the
/// letter order, so two words are conjugate iff their classes compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeodesicClass {
    letters: Vec<Letter>,
    multiplicity: usize,
}

impl GeodesicClass {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn word(&self) -> Word {
        Word(self.letters.clone())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// The primitive root: the class whose `multiplicity`-th power this is.
    pub fn primitive(&self) -> GeodesicClass {
        let period = self.letters.len() / self.multiplicity;
        GeodesicClass {
            letters: self.letters[..period].to_vec(),
            multiplicity: 1,
        }
    }

    /// The tailless non-backtracking loop of the graph representing this class.
    pub fn geodesic_loop(&self, frame: &SpanningTreeFrame) -> BasedLoop {
        let cogens = frame.cogenerators();
        let mut path = vec![0usize];
        let mut cur = 0usize;
        for l in &self.letters {
            let (a, b) = cogens[l.generator() - 1];
            let (tail, head) = if l.is_inverse() { (b, a) } else { (a, b) };
            path.extend(frame.tree_path(cur, tail).into_iter().skip(1));
            path.push(head);
            cur = head;
        }
        path.extend(frame.tree_path(cur, 0).into_iter().skip(1));
        path.pop();
        geodesic_reduce(&BasedLoop { vertices: path })
            .expect("a nontrivial class has a nontrivial geodesic loop")
    }
}

impl PartialOrd for GeodesicClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GeodesicClass {
    /// Shorter classes first, then lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl fmt::Display for GeodesicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word())
    }
}

/// Free homotopy class of a loop: the contractible marker or a geodesic class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HomotopyClass {
    Contractible,
    Geodesic(GeodesicClass),
}

impl HomotopyClass {
    pub fn is_contractible(&self) -> bool {
        matches!(self, HomotopyClass::Contractible)
    }

    pub fn geodesic(&self) -> Option<&GeodesicClass> {
        match self {
            HomotopyClass::Contractible => None,
            HomotopyClass::Geodesic(c) => Some(c),
        }
    }
}

impl fmt::Display for HomotopyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomotopyClass::Contractible => f.write_str("trivial"),
            HomotopyClass::Geodesic(c) => write!(f, "{c}"),
        }
    }
}

fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    let mut best = 0;
    for start in 1..n {
        let cand = s[start..].iter().chain(&s[..start]);
        let cur = s[best..].iter().chain(&s[..best]);
        if cand.cmp(cur) == Ordering::Less {
            best = start;
        }
    }
    best
}

/// Smallest period `p` dividing `s.len()` such that `s` is `s[..p]` repeated.
pub fn smallest_period<T: PartialEq>(s: &[T]) -> usize {
    let n = s.len();
    (1..=n)
        .filter(|p| n.is_multiple_of(*p))
        .find(|&p| (p..n).all(|i| s[i] == s[i - p]))
        .unwrap_or(n)
}

/// Conjugacy class of `w`: cyclic reduction rotated to its canonical form.
pub fn canonical_class(w: &Word) -> HomotopyClass {
    let core = w.cyclic_reduce();
    if core.is_empty() {
        return HomotopyClass::Contractible;
    }
    let k = least_rotation(&core.0);
    let mut letters = core.0;
    letters.rotate_left(k);
    let multiplicity = letters.len() / smallest_period(&letters);
    HomotopyClass::Geodesic(GeodesicClass {
        letters,
        multiplicity,
    })
}

/// All nontrivial conjugacy classes of the free group of the given rank whose
/// cyclically reduced length is at most `max_len`, shortest first.
pub fn enumerate_geodesic_classes(rank: usize, max_len: usize) -> Vec<GeodesicClass> {
    fn extend(
        rank: usize,
        target: usize,
        buf: &mut Vec<Letter>,
        out: &mut Vec<GeodesicClass>,
    ) {
        if buf.len() == target {
            let first = buf[0];
            let last = buf[buf.len() - 1];
            if target > 1 && first == last.inv() {
                return;
            }
            if least_rotation(buf) != 0 {
                return;
            }
            let period = smallest_period(buf);
            out.push(GeodesicClass {
                letters: buf.clone(),
                multiplicity: target / period,
            });
            return;
        }
        for g in 1..=rank {
            for inverse in [false, true] {
                let l = Letter::new(g, inverse);
                if buf.last() == Some(&l.inv()) {
                    continue;
                }
                // a canonical word starts with its smallest letter
                if let Some(&first) = buf.first() {
                    if l < first {
                        continue;
                    }
                }
                buf.push(l);
                extend(rank, target, buf, out);
                buf.pop();
            }
        }
    }

    let mut out = Vec::new();
    if rank == 0 {
        return out;
    }
    let mut buf = Vec::with_capacity(max_len);
    for len in 1..=max_len {
        extend(rank, len, &mut buf, &mut out);
    }
    out
}

/// A closed walk `(x_0, x_1, …, x_{n-1}, x_0)`; the repeated base point is
/// not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasedLoop {
    vertices: Vec<usize>,
}

impl BasedLoop {
    /// Validates a vertex sequence against `g`. A trailing copy of the base
    /// point is accepted and dropped.
    pub fn new(g: &GraphModel, mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.len() >= 3 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 2 {
            return Err(Error::InvalidLoop(format!(
                "a based loop needs at least 2 steps, got {}",
                vertices.len()
            )));
        }
        for &x in &vertices {
            if x >= g.vertex_count() {
                return Err(Error::VertexOutOfRange {
                    vertex: x,
                    count: g.vertex_count(),
                });
            }
        }
        let n = vertices.len();
        for k in 0..n {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            if !g.is_edge(a, b) {
                return Err(Error::NotAnEdge(a, b));
            }
        }
        Ok(Self { vertices })
    }

    /// Builds without validation; callers guarantee adjacency.
    pub(crate) fn from_vertices_unchecked(vertices: Vec<usize>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn base(&self) -> usize {
        self.vertices[0]
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Oriented edges in traversal order.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    /// The shift `θ`: moves the base point one step forward.
    pub fn shift(&self) -> BasedLoop {
        let mut v = self.vertices.clone();
        v.rotate_left(1);
        BasedLoop { vertices: v }
    }

    pub fn reversed(&self) -> BasedLoop {
        let mut v = self.vertices.clone();
        v[1..].reverse();
        BasedLoop { vertices: v }
    }

    /// Concatenation of two loops based at the same vertex.
    pub fn concat(&self, other: &BasedLoop) -> Result<BasedLoop> {
        if self.base() != other.base() {
            return Err(Error::Precondition(format!(
                "base points differ: {} vs {}",
                self.base(),
                other.base()
            )));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices);
        Ok(BasedLoop { vertices: v })
    }

    /// Largest `m` such that the loop is an `m`-fold repetition.
    pub fn multiplicity(&self) -> usize {
        self.vertices.len() / smallest_period(&self.vertices)
    }
}

impl fmt::Display for BasedLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.vertices.len())?;
        for x in &self.vertices {
            write!(f, " {x}")?;
        }
        Ok(())
    }
}

/// The unreduced sequence of signed cogenerator crossings of `l`.
pub fn crossings(l: &BasedLoop, frame: &SpanningTreeFrame) -> Word {
    Word(l.steps().filter_map(|(a, b)| frame.crossing(a, b)).collect())
}

/// Image of the based loop's homotopy class in the free group, freely reduced.
///
/// The tail is kept (the result is a based element, not a conjugacy class);
/// pass it through [`canonical_class`] to forget the base point.
pub fn loop_to_word(l: &BasedLoop, g: &GraphModel, frame: &SpanningTreeFrame) -> Result<Word> {
    for (a, b) in l.steps() {
        if !g.is_edge(a, b) {
            return Err(Error::NotAnEdge(a, b));
        }
    }
    Ok(crossings(l, frame).reduce())
}

/// Removes all backtracking, including the tail, leaving the tailless
/// non-backtracking representative of the free homotopy class. `None` marks
/// a contractible loop.
///
/// The base point of the result may differ from that of `l`.
pub fn geodesic_reduce(l: &BasedLoop) -> Option<BasedLoop> {
    let mut path: Vec<usize> = Vec::with_capacity(l.len() + 1);
    for &x in l.vertices.iter().chain(std::iter::once(&l.vertices[0])) {
        if path.len() >= 2 && path[path.len() - 2] == x {
            path.pop();
        } else {
            path.push(x);
        }
    }
    // path now runs x0 -> x0 without backtracking; strip the tail
    let (mut lo, mut hi) = (0, path.len() - 1);
    while hi - lo >= 2 && path[lo + 1] == path[hi - 1] {
        lo += 1;
        hi -= 1;
    }
    if hi - lo < 2 {
        return None;
    }
    Some(BasedLoop {
        vertices: path[lo..hi].to_vec(),
    })
}

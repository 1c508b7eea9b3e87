use num_traits::{One, Zero};

use super::lyndon::{LiePoly, LyndonBasis};
use super::tensor::{integer, left_bracket_expansion, Homogeneous, Rational};
use crate::error::{Error, Result};
use crate::freegroup::Word;

// A crossing sequence is a `Word` read letter by letter without reduction: every
// letter is one unit crossing of a cogenerator, with sign given by its orientation.

fn check_indices(indices: &[usize], rank: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Precondition("current of an empty index tuple".into()));
    }
    match indices.iter().find(|&&i| i == 0 || i > rank) {
        Some(&i) => Err(Error::IndexOutOfRange { index: i, rank }),
        None => Ok(()),
    }
}

fn check_word(crossings: &Word, rank: usize) -> Result<()> {
    match crossings.letters().iter().find(|l| l.generator() > rank) {
        Some(l) => Err(Error::IndexOutOfRange {
            index: l.generator(),
            rank,
        }),
        None => Ok(()),
    }
}

/// `Ň_{i(1)..i(m)}`: signed count of strictly increasing crossing tuples.
pub fn current(crossings: &Word, indices: &[usize], rank: usize) -> Result<i64> {
    check_indices(indices, rank)?;
    check_word(crossings, rank)?;
    let m = indices.len();
    let mut dp = vec![0i64; m + 1];
    dp[0] = 1;
    for l in crossings.letters() {
        let (g, e) = (l.generator(), l.sign());
        for k in (1..=m).rev() {
            if indices[k - 1] == g {
                dp[k] += e * dp[k - 1];
            }
        }
    }
    Ok(dp[m])
}

/// Current in which one crossing may fill a run of `j` equal indices with
/// weight `ε^j / j!`. It equals the signature coefficient `⟨S, X_{i(1)}…X_{i(m)}⟩`.
pub fn signature_current(crossings: &Word, indices: &[usize], rank: usize) -> Result<Rational> {
    check_indices(indices, rank)?;
    check_word(crossings, rank)?;
    let m = indices.len();
    let mut inv_fact = vec![Rational::one()];
    for j in 1..=m {
        let next = &inv_fact[j - 1] / integer(j as i64);
        inv_fact.push(next);
    }
    let mut dp = vec![Rational::zero(); m + 1];
    dp[0] = Rational::one();
    for l in crossings.letters() {
        let (g, e) = (l.generator(), l.sign());
        for k in (1..=m).rev() {
            let mut add = Rational::zero();
            let mut j = 1;
            while j <= k && indices[k - j] == g {
                let sign = if e < 0 && j % 2 == 1 { -1 } else { 1 };
                add += &dp[k - j] * &inv_fact[j] * integer(sign);
                j += 1;
            }
            dp[k] += add;
        }
    }
    Ok(dp.pop().unwrap())
}

/// All tuples of length `m` over `1..=rank`, in lexicographic order.
pub fn index_tuples(rank: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=rank).map(move |g| {
                    let mut u = t.clone();
                    u.push(g);
                    u
                })
            })
            .collect();
    }
    out
}

/// `(Ň_1, …, Ň_r)`.
pub fn homology1(crossings: &Word, rank: usize) -> Result<Vec<i64>> {
    check_word(crossings, rank)?;
    let mut h = vec![0; rank];
    for l in crossings.letters() {
        h[l.generator() - 1] += l.sign();
    }
    Ok(h)
}

/// Coordinates `½(Ň_{i,j} − Ň_{j,i})`, `i < j` in lexicographic order.
pub fn homology2(crossings: &Word, rank: usize) -> Result<Vec<i64>> {
    if homology1(crossings, rank)?.iter().any(|&c| c != 0) {
        return Err(Error::Precondition("first homology is nonzero".into()));
    }
    let mut out = Vec::with_capacity(rank * rank.saturating_sub(1) / 2);
    for i in 1..=rank {
        for j in i + 1..=rank {
            let d = current(crossings, &[i, j], rank)? - current(crossings, &[j, i], rank)?;
            if d % 2 != 0 {
                return Err(Error::Numeric(format!("odd antisymmetric current at ({i},{j})")));
            }
            out.push(d / 2);
        }
    }
    Ok(out)
}

/// A basis element of the degree-3 part of the free Lie algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum H3Basis {
    /// `[[X_j,X_i],X_k]` for `i < j < k`.
    A { i: usize, j: usize, k: usize },
    /// `[[X_j,X_k],X_i]` for `i < j < k`.
    B { i: usize, j: usize, k: usize },
    /// `[[X_j,X_i],X_i]` for `j ≠ i`.
    C { j: usize, i: usize },
}

impl H3Basis {
    pub fn all(rank: usize) -> Vec<H3Basis> {
        let mut out = Vec::new();
        for i in 1..=rank {
            for j in i + 1..=rank {
                for k in j + 1..=rank {
                    out.push(H3Basis::A { i, j, k });
                    out.push(H3Basis::B { i, j, k });
                }
            }
        }
        for j in 1..=rank {
            for i in 1..=rank {
                if i != j {
                    out.push(H3Basis::C { j, i });
                }
            }
        }
        out
    }

    /// `(a, b, c)` with the element equal to `[[X_a,X_b],X_c]`.
    pub fn triple(self) -> (usize, usize, usize) {
        match self {
            H3Basis::A { i, j, k } => (j, i, k),
            H3Basis::B { i, j, k } => (j, k, i),
            H3Basis::C { j, i } => (j, i, i),
        }
    }

    pub fn lie_element(self, rank: usize) -> Homogeneous {
        let (a, b, c) = self.triple();
        let x = |g| Homogeneous::monomial(rank, &[g]);
        x(a).bracket(&x(b)).bracket(&x(c))
    }

    /// The group commutator `[[γ_a,γ_b],γ_c]`, reduced.
    pub fn group_element(self) -> Word {
        let (a, b, c) = self.triple();
        Word::commutator(
            &Word::commutator(&Word::generator(a), &Word::generator(b)),
            &Word::generator(c),
        )
    }
}

/// Coordinates of `h₃` in the [`H3Basis::all`] order.
pub fn homology3(crossings: &Word, rank: usize) -> Result<Vec<Rational>> {
    if homology2(crossings, rank)?.iter().any(|&c| c != 0) {
        return Err(Error::Precondition("second homology is nonzero".into()));
    }
    let n = |t: [usize; 3]| current(crossings, &t, rank).map(integer);
    let third = integer(3);
    H3Basis::all(rank)
        .into_iter()
        .map(|b| {
            Ok(match b {
                H3Basis::A { i, j, k } => {
                    (n([j, i, k])? + integer(2) * n([k, i, j])?) / &third
                }
                H3Basis::B { i, j, k } => {
                    (integer(2) * n([j, k, i])? + n([i, k, j])?) / &third
                }
                H3Basis::C { j, i } => -n([i, j, i])? / integer(2),
            })
        })
        .collect()
}

/// Lowest degree `d ≥ 1` at which some signature coefficient is nonzero, scanning to `limit`.
pub fn degree_from_currents(crossings: &Word, rank: usize, limit: usize) -> Result<Option<usize>> {
    check_word(crossings, rank)?;
    for d in 1..=limit {
        for u in index_tuples(rank, d) {
            if !signature_current(crossings, &u, rank)?.is_zero() {
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

/// `P_l = (1/m) Σ_u Ň♮_u [[…[X_{u1},X_{u2}]…],X_{um}]` with signature-weighted
/// currents `Ň♮`, in Lyndon coordinates.
pub fn lie_polynomial_via_currents(crossings: &Word, rank: usize, m: usize) -> Result<LiePoly> {
    if m == 0 {
        return Err(Error::Precondition("degree must be at least 1".into()));
    }
    match degree_from_currents(crossings, rank, m)? {
        Some(d) if d < m => {
            return Err(Error::DegreeMismatch {
                expected: m,
                computed: d,
            })
        }
        None => return Err(Error::DegreeAbove { expected: m }),
        _ => {}
    }
    let mut h = Homogeneous::zero(rank, m);
    for u in index_tuples(rank, m) {
        let c = signature_current(crossings, &u, rank)?;
        if c.is_zero() {
            continue;
        }
        for (w, s) in left_bracket_expansion(&u) {
            h.add_to(&w, &(&c * integer(s)));
        }
    }
    let h = h.scale(&(Rational::one() / integer(m as i64)));
    LyndonBasis::new(rank, m).project(&h)
}
